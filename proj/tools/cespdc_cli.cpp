// cespdc command-line front end. Talks to the library through the C API only.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cespdc/cespdc.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 ok, 1 internal, 2 config/validation, 3 non-convergence/no solution.
int exit_code(cespdc_status st) {
    switch (st) {
        case CESPDC_OK: return 0;
        case CESPDC_ERR_CONFIG:
        case CESPDC_ERR_DOMAIN:
        case CESPDC_ERR_PRECONDITION:
        case CESPDC_ERR_INVALID_ARGUMENT: return 2;
        case CESPDC_ERR_NO_SOLUTION:
        case CESPDC_ERR_UNDERDETERMINED:
        case CESPDC_ERR_NON_FINITE: return 3;
        default: return 1;
    }
}

struct Failure {
    int code;
};

void check(cespdc_status st, const char* what) {
    if (st == CESPDC_OK) return;
    std::cerr << "error: " << what << ": " << cespdc_last_error() << " (" << cespdc_status_name(st) << ")\n";
    throw Failure{exit_code(st)};
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    operator T*() const { return p; }
};

using Config = Handle<cespdc_config, cespdc_config_free>;
using Curve = Handle<cespdc_curve, cespdc_curve_free>;
using Tags = Handle<cespdc_timetags, cespdc_timetags_free>;
using Histogram = Handle<cespdc_histogram, cespdc_histogram_free>;
using Fit = Handle<cespdc_fit, cespdc_fit_free>;

struct Common {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

void load(const Common& c, Config& cfg) {
    check(cespdc_config_load(c.config_path.empty() ? nullptr : c.config_path.c_str(),
                             c.preset.empty() ? nullptr : c.preset.c_str(), cfg.out()),
          "loading configuration");
    if (c.seed) check(cespdc_config_set_seed(cfg, *c.seed), "setting seed");
}

// --out wins over CESPDC_OUT, which wins over the config's output_dir.
fs::path output_dir(const Common& c, const Config& cfg) {
    fs::path dir;
    if (!c.out_dir.empty()) {
        dir = c.out_dir;
    } else if (const char* env = std::getenv("CESPDC_OUT"); env && *env) {
        dir = env;
    } else {
        const char* d = nullptr;
        check(cespdc_config_output_dir(cfg, &d), "resolving output directory");
        dir = d;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory " << dir << ": " << ec.message() << "\n";
        throw Failure{1};
    }
    return dir;
}

std::string path_in(const fs::path& dir, const char* name) { return (dir / name).string(); }

void write_json(const fs::path& dir, const char* name, const json& doc) {
    check(cespdc_write_text(path_in(dir, name).c_str(), (doc.dump(2) + "\n").c_str()), name);
}

json fit_json(const Fit& fit) {
    const char* text = nullptr;
    check(cespdc_fit_json(fit, &text), "serializing fit");
    return json::parse(text);
}

bool fit_converged(const Fit& fit) {
    int ok = 0;
    check(cespdc_fit_converged(fit, &ok), "reading fit status");
    return ok != 0;
}

double fit_value(const Fit& fit, const char* name, double* err = nullptr) {
    double v = 0.0;
    check(cespdc_fit_param(fit, name, &v, err), name);
    return v;
}

void print_row(const char* label, const std::string& value) {
    std::printf("  %-28s %s\n", label, value.c_str());
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- subcommands ----

int cmd_cluster(const Common& c) {
    Config cfg;
    load(c, cfg);
    cespdc_cluster_report r{};
    check(cespdc_cluster_from_config(cfg, &r), "cluster analysis");
    const fs::path dir = output_dir(c, cfg);
    write_json(dir, "cluster.json",
               {{"cluster_spacing_hz", r.cluster_spacing_hz},
                {"N_s", r.n_s},
                {"N_i", r.n_i},
                {"delta_nu_hz", r.delta_nu_hz},
                {"single_mode", r.single_mode != 0},
                {"fsr_s_hz", r.fsr_s_hz},
                {"fsr_i_hz", r.fsr_i_hz},
                {"linewidth_s_hz", r.linewidth_s_hz},
                {"linewidth_i_hz", r.linewidth_i_hz}});
    std::printf("cluster effect\n");
    print_row("signal FSR", fmt("%.4f GHz", r.fsr_s_hz * 1e-9));
    print_row("idler FSR", fmt("%.4f GHz", r.fsr_i_hz * 1e-9));
    print_row("cluster spacing", fmt("%.3f GHz", r.cluster_spacing_hz * 1e-9));
    print_row("N_s", fmt("%.4f", r.n_s));
    print_row("N_i", fmt("%.4f", r.n_i));
    print_row("orthogonal offset", fmt("%.4f GHz", r.delta_nu_hz * 1e-9));
    print_row("linewidth sum", fmt("%.4f GHz", (r.linewidth_s_hz + r.linewidth_i_hz) * 1e-9));
    print_row("single longitudinal mode", r.single_mode ? "yes" : "no");
    return 0;
}

struct G2Options {
    bool analytic = false;
    bool simulate = false;
    bool fit = false;
};

int cmd_g2(const Common& c, const G2Options& o) {
    Config cfg;
    load(c, cfg);
    const fs::path dir = output_dir(c, cfg);
    const json doc = [&] {
        const char* text = nullptr;
        check(cespdc_config_json(cfg, &text), "reading configuration");
        return json::parse(text);
    }();
    const double gs = doc.at("cavity").at("signal").at("linewidth_hz").get<double>();
    const double gi = doc.at("cavity").at("idler").at("linewidth_hz").get<double>();
    double t_fwhm = 0.0;
    check(cespdc_t_fwhm_analytic(gs, gi, &t_fwhm), "analytic width");

    json report{{"t_fwhm_analytic_s", t_fwhm}};
    int code = 0;
    std::printf("glauber correlation\n");
    print_row("T_FWHM = 1.39/(2 pi gamma)", fmt("%.4f ns", t_fwhm * 1e9));

    if (!o.simulate) {
        Curve raw, conv;
        check(cespdc_g2_analytic(cfg, raw.out()), "analytic g2");
        check(cespdc_curve_convolve(raw, 0.0, conv.out()), "detector convolution");
        check(cespdc_curve_write_csv(raw, path_in(dir, "g2_analytic.csv").c_str()), "g2_analytic.csv");
        check(cespdc_curve_write_csv(conv, path_in(dir, "g2_convolved.csv").c_str()), "g2_convolved.csv");
        double w_raw = 0.0, w_conv = 0.0;
        check(cespdc_curve_fwhm(raw, &w_raw), "curve FWHM");
        check(cespdc_curve_fwhm(conv, &w_conv), "convolved curve FWHM");
        report["mode"] = "analytic";
        report["fwhm_analytic_curve_s"] = w_raw;
        report["fwhm_convolved_s"] = w_conv;
        print_row("analytic curve FWHM", fmt("%.4f ns", w_raw * 1e9));
        print_row("with detector response", fmt("%.4f ns", w_conv * 1e9));
        if (o.fit) {
            const double bin = doc.at("simulation").value("bin_width_s", 25e-12);
            Curve binned;
            check(cespdc_curve_rebin(conv, bin, binned.out()), "rebinning");
            Fit fit;
            check(cespdc_fit_g2_curve(cfg, binned, 0, fit.out()), "g2 fit");
            write_json(dir, "g2_fit.json", fit_json(fit));
            report["fit_converged"] = fit_converged(fit);
            print_row("fitted gamma_s", fmt("%.2f MHz", fit_value(fit, "gamma_s_hz") * 1e-6));
            print_row("fitted gamma_i", fmt("%.2f MHz", fit_value(fit, "gamma_i_hz") * 1e-6));
            print_row("fitted detector rate", fmt("%.4e /s", fit_value(fit, "detector_rate_per_s")));
            if (!fit_converged(fit)) code = 3;
        }
    } else {
        Tags tags;
        Histogram hist;
        check(cespdc_simulate(cfg, -1.0, tags.out()), "time-tag simulation");
        check(cespdc_histogram_build(cfg, tags, 0.0, 0.0, hist.out()), "histogram");
        check(cespdc_histogram_write_csv(hist, path_in(dir, "histogram.csv").c_str()), "histogram.csv");
        check(cespdc_timetags_write_ttag(tags, 1, path_in(dir, "signal.ttag").c_str()), "signal.ttag");
        check(cespdc_timetags_write_ttag(tags, 2, path_in(dir, "idler.ttag").c_str()), "idler.ttag");
        const std::uint64_t* v = nullptr;
        std::size_t ns = 0, ni = 0, nb = 0;
        check(cespdc_timetags_data(tags, 1, &v, &ns), "signal tags");
        check(cespdc_timetags_data(tags, 2, &v, &ni), "idler tags");
        const std::uint64_t* counts = nullptr;
        check(cespdc_histogram_data(hist, &counts, &nb, nullptr, nullptr), "histogram data");
        std::uint64_t total = 0;
        for (std::size_t k = 0; k < nb; ++k) total += counts[k];
        double w = 0.0, acc = 0.0;
        check(cespdc_histogram_fwhm(hist, &w), "histogram FWHM");
        check(cespdc_histogram_accidentals(hist, t_fwhm, &acc), "accidental level");
        report["mode"] = "simulate";
        report["signal_tags"] = ns;
        report["idler_tags"] = ni;
        report["histogram_total"] = total;
        report["fwhm_histogram_s"] = w;
        report["accidentals_per_bin"] = acc;
        print_row("signal / idler tags", std::to_string(ns) + " / " + std::to_string(ni));
        print_row("coincidences in range", std::to_string(total));
        print_row("histogram FWHM", fmt("%.4f ns", w * 1e9));
        print_row("accidentals per bin", fmt("%.3f", acc));
        if (o.fit) {
            Fit fit;
            check(cespdc_fit_g2_histogram(cfg, hist, 0, fit.out()), "g2 histogram fit");
            write_json(dir, "g2_fit.json", fit_json(fit));
            report["fit_converged"] = fit_converged(fit);
            print_row("fitted gamma_s", fmt("%.2f MHz", fit_value(fit, "gamma_s_hz") * 1e-6));
            print_row("fitted gamma_i", fmt("%.2f MHz", fit_value(fit, "gamma_i_hz") * 1e-6));
            print_row("fitted detector rate", fmt("%.4e /s", fit_value(fit, "detector_rate_per_s")));
            if (!fit_converged(fit)) code = 3;
        }
    }
    write_json(dir, "g2_report.json", report);
    if (code == 3) std::cerr << "error: fit did not converge (artifacts written)\n";
    return code;
}

int cmd_counts(const Common& c, const std::vector<double>& powers_arg, bool simulate) {
    Config cfg;
    load(c, cfg);
    std::vector<double> powers = powers_arg;
    if (powers.empty()) {
        const double* p = nullptr;
        std::size_t n = 0;
        check(cespdc_config_powers(cfg, &p, &n), "reading powers");
        powers.assign(p, p + n);
    }
    if (powers.empty()) {
        std::cerr << "error: no pump powers given (--powers or simulation.powers_mw)\n";
        return 2;
    }
    const fs::path dir = output_dir(c, cfg);
    std::vector<cespdc_counts_row> rows(powers.size());
    for (std::size_t k = 0; k < powers.size(); ++k) {
        if (simulate) check(cespdc_counts_simulated(cfg, powers[k], &rows[k]), "simulated counts");
        else check(cespdc_counts_expected(cfg, powers[k], &rows[k]), "expected counts");
    }
    check(cespdc_counts_write_csv(rows.data(), rows.size(), path_in(dir, "counts.csv").c_str()), "counts.csv");
    std::printf("counts vs pump power (%s)\n", simulate ? "simulated" : "expectation");
    std::printf("  %10s %14s %14s %14s %10s\n", "power_mw", "singles_s/s", "singles_i/s", "coinc/s", "CAR");
    for (const auto& r : rows) {
        std::printf("  %10.2f %14.2f %14.2f %14.3f %10s\n", r.power_mw, r.singles_s, r.singles_i, r.coincidences,
                    r.car_defined ? fmt("%.1f", r.car).c_str() : "-");
        if (!r.car_defined) {
            std::cerr << "warning: CAR undefined at " << r.power_mw
                      << " mW (no accidental coincidences); field left empty\n";
        }
    }
    return 0;
}

struct MichelsonOptions {
    std::vector<double> lengths;
    bool fit = false;
    double noise = 0.0;
};

int cmd_michelson(const Common& c, const MichelsonOptions& o) {
    Config cfg;
    load(c, cfg);
    std::vector<double> lengths = o.lengths;
    if (lengths.empty()) {
        const double* p = nullptr;
        std::size_t n = 0;
        check(cespdc_config_path_differences(cfg, &p, &n), "reading path differences");
        lengths.assign(p, p + n);
    }
    const fs::path dir = output_dir(c, cfg);
    std::vector<double> vis(lengths.size());
    check(cespdc_michelson_series(cfg, lengths.data(), lengths.size(), o.noise, vis.data()), "visibility series");
    check(cespdc_visibility_write_csv(lengths.data(), vis.data(), lengths.size(), path_in(dir, "michelson.csv").c_str()),
          "michelson.csv");
    std::printf("michelson visibility\n");
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        std::printf("  L = %8.4f m   V = %.6f\n", lengths[k], vis[k]);
    }
    if (!o.fit) return 0;
    Fit fit;
    check(cespdc_fit_visibility_decay(lengths.data(), vis.data(), lengths.size(), fit.out()), "visibility fit");
    double ref = 0.0;
    check(cespdc_michelson_reference_linewidth(cfg, &ref), "reference linewidth");
    double err = 0.0;
    const double lw = fit_value(fit, "linewidth_hz", &err);
    const double r = fit_value(fit, "background_ratio");
    const double deviation = (lw - ref) / ref;
    json out = fit_json(fit);
    out["reference_linewidth_hz"] = ref;
    out["relative_deviation"] = deviation;
    write_json(dir, "michelson_fit.json", out);
    print_row("fitted linewidth", fmt("%.2f MHz", lw * 1e-6) + fmt(" +- %.2f MHz", err * 1e-6));
    print_row("fitted background R", fmt("%.5f", r));
    print_row("cavity-scan linewidth", fmt("%.2f MHz", ref * 1e-6));
    print_row("deviation", fmt("%.2f %%", deviation * 100.0));
    if (!fit_converged(fit)) {
        std::cerr << "error: fit did not converge (artifacts written)\n";
        return 3;
    }
    return 0;
}

int cmd_qpm(const Common& c, int order) {
    Config cfg;
    load(c, cfg);
    cespdc_qpm_report r{};
    check(cespdc_qpm_analyze(cfg, order, &r), "poling period");
    const fs::path dir = output_dir(c, cfg);
    const std::size_t points = 801;
    std::vector<double> det(points), g(points);
    check(cespdc_qpm_spectrum(cfg, order, 2.0 * r.gain_fwhm_hz, points, det.data(), g.data()), "gain spectrum");
    check(cespdc_qpm_write_spectrum_csv(det.data(), g.data(), points, path_in(dir, "qpm_spectrum.csv").c_str()),
          "qpm_spectrum.csv");
    write_json(dir, "qpm.json",
               {{"order", r.order},
                {"solved_period_m", r.solved_period_m},
                {"configured_period_m", r.configured_period_m},
                {"relative_deviation", r.relative_deviation},
                {"gain_fwhm_hz", r.gain_fwhm_hz},
                {"configured_mismatch_per_m", r.configured_mismatch_per_m}});
    std::printf("quasi-phase matching\n");
    print_row("QPM order", std::to_string(r.order));
    print_row("solved poling period", fmt("%.4f um", r.solved_period_m * 1e6));
    print_row("configured period", fmt("%.4f um", r.configured_period_m * 1e6));
    print_row("deviation", fmt("%+.2f %%", r.relative_deviation * 100.0));
    print_row("gain envelope FWHM", fmt("%.1f GHz", r.gain_fwhm_hz * 1e-9));
    return 0;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "JSON run configuration (merged over --preset)");
    sub->add_option("--preset", c.preset, "shipped preset")->check(CLI::IsMember({"paper"}));
    sub->add_option("--seed", c.seed, "simulation seed override");
    sub->add_option("--out", c.out_dir, "output directory (overrides CESPDC_OUT and output_dir)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity-enhanced SPDC single-mode source toolkit"};
    app.require_subcommand(1);
    Common common;

    auto* cluster = app.add_subcommand("cluster", "cluster spacing, mode counts and single-mode check");
    add_common(cluster, common);

    G2Options g2o;
    auto* g2 = app.add_subcommand("g2", "signal-idler correlation: analytic curve or simulated histogram");
    add_common(g2, common);
    auto* f_an = g2->add_flag("--analytic", g2o.analytic, "analytic curve and detector convolution (default)");
    auto* f_sim = g2->add_flag("--simulate", g2o.simulate, "simulate time tags and histogram them");
    f_an->excludes(f_sim);
    g2->add_flag("--fit", g2o.fit, "fit linewidths and detector rate");

    std::vector<double> powers;
    bool counts_sim = false;
    auto* counts = app.add_subcommand("counts", "singles, coincidences and CAR vs pump power");
    add_common(counts, common);
    counts->add_option("--powers", powers, "pump powers in mW")->delimiter(',');
    counts->add_flag("--simulate", counts_sim, "measure from simulated time tags instead of expectations");

    MichelsonOptions mo;
    auto* mich = app.add_subcommand("michelson", "single-photon Michelson visibility vs path difference");
    add_common(mich, common);
    mich->add_option("-L,--path-differences", mo.lengths, "path differences in m")->delimiter(',');
    mich->add_flag("--fit", mo.fit, "fit linewidth and background ratio");
    mich->add_option("--noise", mo.noise, "relative Gaussian noise on visibilities")->check(CLI::NonNegativeNumber);

    int order = 0;
    auto* qpm = app.add_subcommand("qpm", "poling period and single-pass gain envelope");
    add_common(qpm, common);
    qpm->add_option("--order", order, "QPM order (odd)")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*cluster) return cmd_cluster(common);
        if (*g2) return cmd_g2(common, g2o);
        if (*counts) return cmd_counts(common, powers, counts_sim);
        if (*mich) return cmd_michelson(common, mo);
        if (*qpm) return cmd_qpm(common, order);
    } catch (const Failure& f) {
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
