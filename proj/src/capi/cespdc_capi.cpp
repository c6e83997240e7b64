#include "cespdc/cespdc.h"

#include <cmath>
#include <fstream>
#include <memory>
#include <new>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "core/biphoton.hpp"
#include "core/cavity.hpp"
#include "core/clustering.hpp"
#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/counting.hpp"
#include "core/dispersion.hpp"
#include "core/error.hpp"
#include "core/fitting.hpp"
#include "core/interference.hpp"
#include "core/model_fits.hpp"
#include "core/qpm.hpp"

using namespace cespdc;

struct cespdc_config {
    RunConfig config;
    std::string output_dir;
    std::string json;
    std::vector<double> powers;
    std::vector<double> path_differences;

    explicit cespdc_config(RunConfig c) : config(std::move(c)) { refresh(); }

    void refresh() {
        output_dir = config.output_dir();
        json = config.document().dump(2);
        powers = config.has("simulation") ? config.simulation().powers_mw : std::vector<double>{};
        path_differences.clear();
        if (config.has("interference") && config.document().at("interference").contains("michelson")) {
            path_differences = config.michelson().path_differences_m;
        }
    }
};

struct cespdc_curve {
    G2Curve curve;
    double detector_rate_per_s = 0.0;
    double comb_period_s = 0.0;  // > 0 for multi-mode curves: width is taken on the peak envelope
};

struct cespdc_timetags {
    SimulatedStreams streams;
    double duration_s = 0.0;
    double pump_mw = 0.0;
};

struct cespdc_histogram {
    CoincidenceHistogram hist;
};

struct cespdc_fit {
    FitResult result;
    std::string json;
};

namespace {

thread_local std::string g_last_error;

cespdc_status status_of(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::domain: return CESPDC_ERR_DOMAIN;
        case ErrorKind::precondition: return CESPDC_ERR_PRECONDITION;
        case ErrorKind::no_solution: return CESPDC_ERR_NO_SOLUTION;
        case ErrorKind::underdetermined: return CESPDC_ERR_UNDERDETERMINED;
        case ErrorKind::non_finite: return CESPDC_ERR_NON_FINITE;
        case ErrorKind::config: return CESPDC_ERR_CONFIG;
        case ErrorKind::io: return CESPDC_ERR_IO;
    }
    return CESPDC_ERR_INTERNAL;
}

struct InvalidArgument {
    const char* what;
};

template <class F>
cespdc_status guard(F&& f) {
    try {
        f();
        g_last_error.clear();
        return CESPDC_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const InvalidArgument& e) {
        g_last_error = e.what;
        return CESPDC_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CESPDC_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CESPDC_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CESPDC_ERR_INTERNAL;
    }
}

template <class... P>
void require(const P*... ptrs) {
    if (((ptrs == nullptr) || ...)) throw InvalidArgument{"null pointer argument"};
}

Axis axis_arg(char a) {
    if (a == 'y' || a == 'Y') return Axis::y;
    if (a == 'z' || a == 'Z') return Axis::z;
    throw DomainError(std::string("axis must be 'y' or 'z', got '") + a + "'");
}

std::ofstream open_out(const char* path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw IoError(std::string("cannot open ") + path + " for writing");
    return f;
}

void finish(std::ofstream& f, const char* path) {
    f.flush();
    if (!f) throw IoError(std::string("write failed: ") + path);
}

const TimeTagStream& stream_of(const cespdc_timetags* t, int channel) {
    if (channel == 1) return t->streams.signal;
    if (channel == 2) return t->streams.idler;
    throw DomainError("channel must be 1 (signal) or 2 (idler)");
}

cespdc_fit* make_fit(FitResult r) {
    auto* f = new cespdc_fit{std::move(r), {}};
    f->json = f->result.to_json().dump(2);
    return f;
}

SimulatedStreams simulate_at(const RunConfig& cfg, double pump_mw) {
    SourceModel src = cfg.source();
    if (pump_mw >= 0.0) src.pump_power_mw = pump_mw;
    const SimulationConfig sim = cfg.simulation();
    SimulationSettings s;
    s.duration_s = sim.duration_s;
    s.seed = sim.seed;
    s.slab_s = sim.slab_s;
    return simulate_timetags(src, cfg.detection(Polarization::signal), cfg.detection(Polarization::idler), s);
}

G2FitPriors priors_of(const RunConfig& cfg, bool fix_rate) {
    const BiphotonSettings b = cfg.biphoton();
    G2FitPriors p;
    p.model = b.model;
    p.detector_rate_per_s = b.detector_rate_per_s;
    p.grid_step_s = std::min(b.grid.step_s, kMaxConvolutionStep);
    p.fix_detector_rate = fix_rate;
    return p;
}

void fill_row(const CountsRow& r, cespdc_counts_row* out) {
    out->power_mw = r.power_mw;
    out->singles_s = r.singles_s;
    out->singles_i = r.singles_i;
    out->coincidences = r.coincidences;
    out->accidentals = r.accidentals;
    out->car = r.car_defined ? r.car.value : NAN;
    out->car_defined = r.car_defined ? 1 : 0;
}

}  // namespace

extern "C" {

const char* cespdc_last_error(void) { return g_last_error.c_str(); }

const char* cespdc_status_name(cespdc_status status) {
    switch (status) {
        case CESPDC_OK: return "ok";
        case CESPDC_ERR_DOMAIN: return "domain error";
        case CESPDC_ERR_PRECONDITION: return "precondition error";
        case CESPDC_ERR_NO_SOLUTION: return "no solution";
        case CESPDC_ERR_UNDERDETERMINED: return "under-determined";
        case CESPDC_ERR_NON_FINITE: return "non-finite value";
        case CESPDC_ERR_CONFIG: return "configuration error";
        case CESPDC_ERR_IO: return "i/o error";
        case CESPDC_ERR_INVALID_ARGUMENT: return "invalid argument";
        case CESPDC_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* cespdc_version(void) { return "0.1.0"; }

// ---- configuration ----

cespdc_status cespdc_config_load(const char* path, const char* preset, cespdc_config** out) {
    return guard([&] {
        require(out);
        *out = nullptr;
        std::optional<std::string> p;
        if (preset) p = preset;
        *out = new cespdc_config(RunConfig::load(path ? std::filesystem::path(path) : std::filesystem::path(), p));
    });
}

cespdc_status cespdc_config_from_json(const char* json, const char* base_dir, cespdc_config** out) {
    return guard([&] {
        require(json, out);
        *out = nullptr;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(json);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        *out = new cespdc_config(RunConfig::from_json(std::move(doc), base_dir ? base_dir : "."));
    });
}

void cespdc_config_free(cespdc_config* cfg) { delete cfg; }

cespdc_status cespdc_config_patch(cespdc_config* cfg, const char* json_patch) {
    return guard([&] {
        require(cfg, json_patch);
        nlohmann::json patch;
        try {
            patch = nlohmann::json::parse(json_patch);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("config patch: ") + e.what());
        }
        nlohmann::json doc = cfg->config.document();
        doc.merge_patch(patch);
        cfg->config = RunConfig::from_json(std::move(doc), cfg->config.base_dir());
        cfg->refresh();
    });
}

cespdc_status cespdc_config_set_seed(cespdc_config* cfg, uint64_t seed) {
    return guard([&] {
        require(cfg);
        nlohmann::json doc = cfg->config.document();
        doc["simulation"]["seed"] = seed;
        cfg->config = RunConfig::from_json(std::move(doc), cfg->config.base_dir());
        cfg->refresh();
    });
}

cespdc_status cespdc_config_output_dir(const cespdc_config* cfg, const char** out) {
    return guard([&] {
        require(cfg, out);
        *out = cfg->output_dir.c_str();
    });
}

cespdc_status cespdc_config_json(const cespdc_config* cfg, const char** out) {
    return guard([&] {
        require(cfg, out);
        *out = cfg->json.c_str();
    });
}

cespdc_status cespdc_config_powers(const cespdc_config* cfg, const double** values, size_t* count) {
    return guard([&] {
        require(cfg, values, count);
        *values = cfg->powers.data();
        *count = cfg->powers.size();
    });
}

cespdc_status cespdc_config_path_differences(const cespdc_config* cfg, const double** values, size_t* count) {
    return guard([&] {
        require(cfg, values, count);
        *values = cfg->path_differences.data();
        *count = cfg->path_differences.size();
    });
}

// ---- cluster effect ----

cespdc_status cespdc_cluster_analyze(double fsr_s_hz, double fsr_i_hz, double linewidth_s_hz, double linewidth_i_hz,
                                     cespdc_cluster_report* out) {
    return guard([&] {
        require(out);
        const ClusterAnalysis a = analyze_clusters(fsr_s_hz, fsr_i_hz, linewidth_s_hz, linewidth_i_hz);
        *out = cespdc_cluster_report{a.fsr_s_hz,         a.fsr_i_hz,        a.cluster_spacing_hz,
                                     a.counts.signal,    a.counts.idler,    a.offset_hz,
                                     a.linewidth_s_hz,   a.linewidth_i_hz,  a.single_mode ? 1 : 0};
    });
}

cespdc_status cespdc_cluster_from_config(const cespdc_config* cfg, cespdc_cluster_report* out) {
    const auto st = guard([&] { require(cfg, out); });
    if (st != CESPDC_OK) return st;
    CavityModeStructure s, i;
    const auto st2 = guard([&] { std::tie(s, i) = cfg->config.cavity(); });
    if (st2 != CESPDC_OK) return st2;
    return cespdc_cluster_analyze(s.fsr_hz, i.fsr_hz, s.linewidth_hz, i.linewidth_hz, out);
}

cespdc_status cespdc_cluster_spacing(double fsr_s_hz, double fsr_i_hz, double* out) {
    return guard([&] {
        require(out);
        *out = cluster_spacing(fsr_s_hz, fsr_i_hz);
    });
}

cespdc_status cespdc_mode_counts(double fsr_s_hz, double fsr_i_hz, double* n_s, double* n_i) {
    return guard([&] {
        require(n_s, n_i);
        const ModeCounts c = mode_counts(fsr_s_hz, fsr_i_hz);
        *n_s = c.signal;
        *n_i = c.idler;
    });
}

cespdc_status cespdc_orthogonal_offset(double n_modes, double fsr_s_hz, double fsr_i_hz, double* out) {
    return guard([&] {
        require(out);
        *out = orthogonal_offset(n_modes, fsr_s_hz, fsr_i_hz);
    });
}

cespdc_status cespdc_is_single_mode(double offset_hz, double linewidth_s_hz, double linewidth_i_hz, int* out) {
    return guard([&] {
        require(out);
        *out = is_single_mode(offset_hz, linewidth_s_hz, linewidth_i_hz) ? 1 : 0;
    });
}

// ---- dispersion / cavity ----

cespdc_status cespdc_refractive_index(const cespdc_config* cfg, char axis, double wavelength_m, double* out) {
    return guard([&] {
        require(cfg, out);
        const CrystalSpec c = cfg->config.crystal();
        *out = refractive_index(c.axis(axis_arg(axis)), wavelength_m, c.temperature_c);
    });
}

cespdc_status cespdc_group_index(const cespdc_config* cfg, char axis, double wavelength_m, double* out) {
    return guard([&] {
        require(cfg, out);
        const CrystalSpec c = cfg->config.crystal();
        *out = group_index(c.axis(axis_arg(axis)), wavelength_m, c.temperature_c);
    });
}

cespdc_status cespdc_derived_fsr(const cespdc_config* cfg, char axis, double wavelength_m, double* out) {
    return guard([&] {
        require(cfg, out);
        *out = fsr(cfg->config.crystal(), axis_arg(axis), wavelength_m);
    });
}

cespdc_status cespdc_lorentzian(double center_hz, double fwhm_hz, double nu_hz, double* out) {
    return guard([&] {
        require(out);
        *out = lorentzian(LorentzianLine{center_hz, fwhm_hz}, nu_hz);
    });
}

// ---- quasi-phase matching ----

cespdc_status cespdc_qpm_analyze(const cespdc_config* cfg, int order, cespdc_qpm_report* out) {
    return guard([&] {
        require(cfg, out);
        CrystalSpec crystal = cfg->config.crystal();
        SpdcProcess proc = cfg->config.process();
        if (order > 0) {
            proc.order = order;
            proc.validate();
        }
        const double solved = solve_poling_period(proc, crystal);
        const double configured = crystal.poling_period_m;
        const double mismatch = phase_mismatch(proc, crystal);
        crystal.poling_period_m = solved;
        *out = cespdc_qpm_report{proc.order, solved, configured, solved / configured - 1.0,
                                 gain_bandwidth(proc, crystal), mismatch};
    });
}

cespdc_status cespdc_qpm_spectrum(const cespdc_config* cfg, int order, double half_span_hz, size_t points,
                                  double* detuning_out, double* intensity_out) {
    return guard([&] {
        require(cfg, detuning_out, intensity_out);
        if (points < 2) throw DomainError("qpm spectrum: need at least 2 points");
        if (!(half_span_hz > 0.0)) throw DomainError("qpm spectrum: half span must be > 0");
        CrystalSpec crystal = cfg->config.crystal();
        SpdcProcess proc = cfg->config.process();
        if (order > 0) {
            proc.order = order;
            proc.validate();
        }
        crystal.poling_period_m = solve_poling_period(proc, crystal);
        std::vector<double> det(points);
        for (size_t k = 0; k < points; ++k) {
            det[k] = -half_span_hz + 2.0 * half_span_hz * static_cast<double>(k) / static_cast<double>(points - 1);
        }
        const std::vector<double> g = gain_spectrum(proc, crystal, det);
        for (size_t k = 0; k < points; ++k) {
            detuning_out[k] = det[k];
            intensity_out[k] = g[k];
        }
    });
}

cespdc_status cespdc_qpm_write_spectrum_csv(const double* detuning_hz, const double* intensity, size_t count,
                                            const char* path) {
    return guard([&] {
        require(path);
        if (count) require(detuning_hz, intensity);
        auto f = open_out(path);
        CsvWriter csv(f, {"detuning_hz", "intensity"});
        for (size_t k = 0; k < count; ++k) csv.row(detuning_hz[k], intensity[k]);
        finish(f, path);
    });
}

// ---- correlation curves ----

cespdc_status cespdc_t_fwhm_analytic(double gamma_s_hz, double gamma_i_hz, double* out) {
    return guard([&] {
        require(out);
        *out = t_fwhm_analytic(gamma_s_hz, gamma_i_hz);
    });
}

cespdc_status cespdc_g2_analytic(const cespdc_config* cfg, cespdc_curve** out) {
    return guard([&] {
        require(cfg, out);
        *out = nullptr;
        const BiphotonSettings b = cfg->config.biphoton();
        const double period = b.model.modes > 0 ? 1.0 / b.model.fsr_s_hz : 0.0;
        *out = new cespdc_curve{sample_g2(b.model, b.grid, true), b.detector_rate_per_s, period};
    });
}

cespdc_status cespdc_curve_convolve(const cespdc_curve* curve, double detector_rate_per_s, cespdc_curve** out) {
    return guard([&] {
        require(curve, out);
        *out = nullptr;
        const double rate = detector_rate_per_s > 0.0 ? detector_rate_per_s : curve->detector_rate_per_s;
        *out = new cespdc_curve{convolve_g2(curve->curve, DetectorResponse{rate, 1.0}), curve->detector_rate_per_s,
                                curve->comb_period_s};
    });
}

cespdc_status cespdc_curve_rebin(const cespdc_curve* curve, double bin_s, cespdc_curve** out) {
    return guard([&] {
        require(curve, out);
        *out = nullptr;
        *out = new cespdc_curve{rebin(curve->curve, bin_s), curve->detector_rate_per_s, curve->comb_period_s};
    });
}

cespdc_status cespdc_curve_data(const cespdc_curve* curve, const double** values, size_t* count, double* start_s,
                                double* step_s) {
    return guard([&] {
        require(curve, values, count);
        *values = curve->curve.values.data();
        *count = curve->curve.values.size();
        if (start_s) *start_s = curve->curve.start_s;
        if (step_s) *step_s = curve->curve.step_s;
    });
}

cespdc_status cespdc_curve_fwhm(const cespdc_curve* curve, double* out) {
    return guard([&] {
        require(curve, out);
        const bool comb = curve->comb_period_s > 2.0 * curve->curve.step_s;
        *out = comb ? fwhm_envelope(curve->curve, curve->comb_period_s) : fwhm(curve->curve);
    });
}

cespdc_status cespdc_curve_write_csv(const cespdc_curve* curve, const char* path) {
    return guard([&] {
        require(curve, path);
        auto f = open_out(path);
        write_curve_csv(f, curve->curve);
        finish(f, path);
    });
}

void cespdc_curve_free(cespdc_curve* curve) { delete curve; }

// ---- photon counting ----

cespdc_status cespdc_simulate(const cespdc_config* cfg, double pump_mw, cespdc_timetags** out) {
    return guard([&] {
        require(cfg, out);
        *out = nullptr;
        const double p = pump_mw >= 0.0 ? pump_mw : cfg->config.source().pump_power_mw;
        auto t = std::make_unique<cespdc_timetags>();
        t->streams = simulate_at(cfg->config, p);
        t->duration_s = cfg->config.simulation().duration_s;
        t->pump_mw = p;
        *out = t.release();
    });
}

cespdc_status cespdc_timetags_data(const cespdc_timetags* tags, int channel, const uint64_t** values, size_t* count) {
    return guard([&] {
        require(tags, values, count);
        const TimeTagStream& s = stream_of(tags, channel);
        *values = s.tags_ps.data();
        *count = s.tags_ps.size();
    });
}

cespdc_status cespdc_timetags_write_ttag(const cespdc_timetags* tags, int channel, const char* path) {
    return guard([&] {
        require(tags, path);
        write_ttag_file(path, stream_of(tags, channel));
    });
}

cespdc_status cespdc_timetags_write_csv(const cespdc_timetags* tags, int channel, const char* path) {
    return guard([&] {
        require(tags, path);
        auto f = open_out(path);
        write_tags_csv(f, stream_of(tags, channel));
        finish(f, path);
    });
}

cespdc_status cespdc_timetags_read(const char* signal_path, const char* idler_path, cespdc_timetags** out) {
    return guard([&] {
        require(signal_path, idler_path, out);
        *out = nullptr;
        auto t = std::make_unique<cespdc_timetags>();
        t->streams.signal = read_ttag_file(signal_path);
        t->streams.idler = read_ttag_file(idler_path);
        std::uint64_t last = 0;
        if (!t->streams.signal.tags_ps.empty()) last = t->streams.signal.tags_ps.back();
        if (!t->streams.idler.tags_ps.empty()) last = std::max(last, t->streams.idler.tags_ps.back());
        t->duration_s = static_cast<double>(last + 1) * 1e-12;
        *out = t.release();
    });
}

void cespdc_timetags_free(cespdc_timetags* tags) { delete tags; }

cespdc_status cespdc_histogram_build(const cespdc_config* cfg, const cespdc_timetags* tags, double bin_s,
                                     double range_s, cespdc_histogram** out) {
    return guard([&] {
        require(tags, out);
        *out = nullptr;
        if (bin_s <= 0.0 || range_s <= 0.0) {
            require(cfg);
            const SimulationConfig sim = cfg->config.simulation();
            if (bin_s <= 0.0) bin_s = sim.bin_width_s;
            if (range_s <= 0.0) range_s = sim.range_s;
        }
        *out = new cespdc_histogram{
            histogram_coincidences(tags->streams.signal, tags->streams.idler, bin_s, range_s, tags->duration_s)};
    });
}

cespdc_status cespdc_histogram_data(const cespdc_histogram* hist, const uint64_t** counts, size_t* count,
                                    double* bin_s, int* half_bins) {
    return guard([&] {
        require(hist, counts, count);
        *counts = hist->hist.counts.data();
        *count = hist->hist.counts.size();
        if (bin_s) *bin_s = hist->hist.bin_width_s;
        if (half_bins) *half_bins = hist->hist.half_bins;
    });
}

cespdc_status cespdc_histogram_fwhm(const cespdc_histogram* hist, double* out) {
    return guard([&] {
        require(hist, out);
        G2Curve c;
        c.start_s = hist->hist.delay_s(0);
        c.step_s = hist->hist.bin_width_s;
        for (auto v : hist->hist.counts) c.values.push_back(static_cast<double>(v));
        *out = fwhm(c);
    });
}

cespdc_status cespdc_histogram_accidentals(const cespdc_histogram* hist, double t_fwhm_s, double* out) {
    return guard([&] {
        require(hist, out);
        *out = accidental_level(hist->hist, t_fwhm_s);
    });
}

cespdc_status cespdc_histogram_write_csv(const cespdc_histogram* hist, const char* path) {
    return guard([&] {
        require(hist, path);
        auto f = open_out(path);
        write_histogram_csv(f, hist->hist);
        finish(f, path);
    });
}

void cespdc_histogram_free(cespdc_histogram* hist) { delete hist; }

cespdc_status cespdc_counts_expected(const cespdc_config* cfg, double pump_mw, cespdc_counts_row* out) {
    return guard([&] {
        require(cfg, out);
        SourceModel src = cfg->config.source();
        if (pump_mw >= 0.0) src.pump_power_mw = pump_mw;
        const CountsRow r = expected_counts(src, cfg->config.detection(Polarization::signal),
                                            cfg->config.detection(Polarization::idler),
                                            cfg->config.simulation().coincidence_window_s);
        fill_row(r, out);
    });
}

cespdc_status cespdc_counts_simulated(const cespdc_config* cfg, double pump_mw, cespdc_counts_row* out) {
    return guard([&] {
        require(cfg, out);
        const double p = pump_mw >= 0.0 ? pump_mw : cfg->config.source().pump_power_mw;
        const SimulationConfig sim = cfg->config.simulation();
        const SimulatedStreams s = simulate_at(cfg->config, p);
        const CoincidenceHistogram h =
            histogram_coincidences(s.signal, s.idler, sim.bin_width_s, sim.range_s, sim.duration_s);
        const BiphotonModel m = cfg->config.biphoton().model;
        const CountsRow r =
            measured_counts(p, s, h, sim.coincidence_window_s, t_fwhm_analytic(m.gamma_s_hz, m.gamma_i_hz));
        fill_row(r, out);
    });
}

cespdc_status cespdc_counts_write_csv(const cespdc_counts_row* rows, size_t count, const char* path) {
    return guard([&] {
        require(path);
        if (count) require(rows);
        std::vector<CountsRow> v;
        for (size_t k = 0; k < count; ++k) {
            CountsRow r;
            r.power_mw = rows[k].power_mw;
            r.singles_s = rows[k].singles_s;
            r.singles_i = rows[k].singles_i;
            r.coincidences = rows[k].coincidences;
            r.accidentals = rows[k].accidentals;
            r.car_defined = rows[k].car_defined != 0;
            r.car = CarValue{rows[k].car, !r.car_defined};
            v.push_back(r);
        }
        auto f = open_out(path);
        write_counts_csv(f, v);
        finish(f, path);
    });
}

cespdc_status cespdc_car(double coincidences, double accidentals, double* out, int* lower_bound) {
    return guard([&] {
        require(out);
        const CarValue v = car_or_bound(coincidences, accidentals);
        *out = v.value;
        if (lower_bound) *lower_bound = v.lower_bound ? 1 : 0;
    });
}

cespdc_status cespdc_heralded_efficiency(double coincidences, double singles, double* out) {
    return guard([&] {
        require(out);
        *out = heralded_efficiency(coincidences, singles);
    });
}

cespdc_status cespdc_estimate_brightness(const cespdc_config* cfg, double detected_rate, double pump_mw, double* out) {
    return guard([&] {
        require(cfg, out);
        const double lw = cfg->config.cavity().first.linewidth_hz;
        *out = estimate_brightness(detected_rate, cfg->config.detection(Polarization::signal),
                                   cfg->config.detection(Polarization::idler), lw, pump_mw);
    });
}

// ---- interference ----

cespdc_status cespdc_michelson_visibility(double linewidth_hz, double background_ratio, double path_difference_m,
                                          double* out) {
    return guard([&] {
        require(out);
        *out = michelson_visibility(MichelsonModel{linewidth_hz, 0.0, background_ratio}, path_difference_m);
    });
}

cespdc_status cespdc_michelson_intensity(double linewidth_hz, double center_hz, double path_difference_m, double i0,
                                         double* out) {
    return guard([&] {
        require(out);
        *out = michelson_intensity(MichelsonModel{linewidth_hz, center_hz, 0.0}, path_difference_m, i0);
    });
}

cespdc_status cespdc_michelson_reference_linewidth(const cespdc_config* cfg, double* out) {
    return guard([&] {
        require(cfg, out);
        *out = cfg->config.michelson().reference_linewidth_hz;
    });
}

cespdc_status cespdc_michelson_series(const cespdc_config* cfg, const double* path_differences_m, size_t count,
                                      double relative_noise, double* out) {
    return guard([&] {
        require(cfg);
        if (count) require(path_differences_m, out);
        if (!(relative_noise >= 0.0)) throw DomainError("michelson series: noise must be >= 0");
        const MichelsonConfig m = cfg->config.michelson();
        const std::uint64_t seed = cfg->config.has("simulation") ? cfg->config.simulation().seed : 0;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n01(0.0, 1.0);
        for (size_t k = 0; k < count; ++k) {
            const double v = michelson_visibility(m.model, path_differences_m[k]);
            out[k] = relative_noise > 0.0 ? v * (1.0 + relative_noise * n01(rng)) : v;
        }
    });
}

cespdc_status cespdc_visibility_write_csv(const double* path_differences_m, const double* visibility, size_t count,
                                          const char* path) {
    return guard([&] {
        require(path);
        if (count) require(path_differences_m, visibility);
        std::vector<VisibilitySample> v;
        for (size_t k = 0; k < count; ++k) v.push_back({path_differences_m[k], visibility[k]});
        auto f = open_out(path);
        write_visibility_csv(f, v);
        finish(f, path);
    });
}

cespdc_status cespdc_franson_coincidence(double visibility, double idler_phase_rad, double background,
                                         double signal_phase_rad, double amplitude, double* out) {
    return guard([&] {
        require(out);
        *out = franson_coincidence(FransonConfig{visibility, idler_phase_rad, background}, signal_phase_rad, amplitude);
    });
}

cespdc_status cespdc_fringe_write_csv(const double* phase_rad, const double* counts, size_t count, const char* path) {
    return guard([&] {
        require(path);
        if (count) require(phase_rad, counts);
        std::vector<FringeSample> v;
        for (size_t k = 0; k < count; ++k) v.push_back({phase_rad[k], counts[k]});
        auto f = open_out(path);
        write_fringe_csv(f, v);
        finish(f, path);
    });
}

cespdc_status cespdc_visibility_from_extrema(double c_max, double c_min, double* out) {
    return guard([&] {
        require(out);
        *out = visibility_from_extrema(c_max, c_min);
    });
}

cespdc_status cespdc_net_visibility(double c_max, double c_min, double accidentals, double* out) {
    return guard([&] {
        require(out);
        *out = net_visibility(c_max, c_min, accidentals);
    });
}

cespdc_status cespdc_umi_tuning_period(const cespdc_config* cfg, double* out) {
    return guard([&] {
        require(cfg, out);
        *out = umi_tuning_period(cfg->config.umi());
    });
}

cespdc_status cespdc_umi_length_difference(double time_delay_s, double fiber_index, double* out) {
    return guard([&] {
        require(out);
        *out = umi_length_difference(time_delay_s, fiber_index);
    });
}

// ---- fitting ----

cespdc_status cespdc_fit_lorentzian(const double* freq_hz, const double* transmission, size_t count, cespdc_fit** out) {
    return guard([&] {
        require(out);
        *out = nullptr;
        if (count) require(freq_hz, transmission);
        std::vector<ScanSample> scan;
        for (size_t k = 0; k < count; ++k) scan.push_back({freq_hz[k], transmission[k]});
        *out = make_fit(fit_lorentzian_scan(scan));
    });
}

cespdc_status cespdc_fit_g2_curve(const cespdc_config* cfg, const cespdc_curve* curve, int fix_detector_rate,
                                  cespdc_fit** out) {
    return guard([&] {
        require(cfg, curve, out);
        *out = nullptr;
        *out = make_fit(fit_g2_histogram(to_series(curve->curve), priors_of(cfg->config, fix_detector_rate != 0)));
    });
}

cespdc_status cespdc_fit_g2_histogram(const cespdc_config* cfg, const cespdc_histogram* hist, int fix_detector_rate,
                                      cespdc_fit** out) {
    return guard([&] {
        require(cfg, hist, out);
        *out = nullptr;
        G2FitPriors p = priors_of(cfg->config, fix_detector_rate != 0);
        p.poisson_weights = true;
        *out = make_fit(fit_g2_histogram(to_series(hist->hist), p));
    });
}

cespdc_status cespdc_fit_visibility_decay(const double* path_differences_m, const double* visibility, size_t count,
                                          cespdc_fit** out) {
    return guard([&] {
        require(out);
        *out = nullptr;
        if (count) require(path_differences_m, visibility);
        std::vector<VisibilitySample> v;
        for (size_t k = 0; k < count; ++k) v.push_back({path_differences_m[k], visibility[k]});
        *out = make_fit(fit_visibility_decay(v));
    });
}

cespdc_status cespdc_fit_fringe(const double* phase_rad, const double* counts, size_t count, double background,
                                cespdc_fit** out) {
    return guard([&] {
        require(out);
        *out = nullptr;
        if (count) require(phase_rad, counts);
        std::vector<FringeSample> v;
        for (size_t k = 0; k < count; ++k) v.push_back({phase_rad[k], counts[k]});
        *out = make_fit(fit_fringe(v, background));
    });
}

cespdc_status cespdc_fit_detector_rate(const cespdc_config* cfg, double observed_fwhm_s, cespdc_fit** out) {
    return guard([&] {
        require(cfg, out);
        *out = nullptr;
        const BiphotonSettings b = cfg->config.biphoton();
        *out = make_fit(fit_detector_rate(b.model, observed_fwhm_s, b.grid));
    });
}

cespdc_status cespdc_fit_converged(const cespdc_fit* fit, int* out) {
    return guard([&] {
        require(fit, out);
        *out = fit->result.converged ? 1 : 0;
    });
}

cespdc_status cespdc_fit_param(const cespdc_fit* fit, const char* name, double* value, double* std_error) {
    return guard([&] {
        require(fit, name);
        const FitParameter& p = fit->result.param(name);
        if (value) *value = p.value;
        if (std_error) *std_error = p.std_error;
    });
}

cespdc_status cespdc_fit_json(const cespdc_fit* fit, const char** out) {
    return guard([&] {
        require(fit, out);
        *out = fit->json.c_str();
    });
}

void cespdc_fit_free(cespdc_fit* fit) { delete fit; }

cespdc_status cespdc_write_text(const char* path, const char* text) {
    return guard([&] {
        require(path, text);
        auto f = open_out(path, true);
        f << text;
        finish(f, path);
    });
}

}  // extern "C"
