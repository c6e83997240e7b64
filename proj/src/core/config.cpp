#include "core/config.hpp"

#include <cmath>
#include <fstream>
#include <string_view>

#include "cespdc_embedded_data.hpp"
#include "core/constants.hpp"
#include "core/error.hpp"

namespace cespdc {

namespace {

using nlohmann::json;

// Section view that reports failures with the dotted path of the field.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw ConfigError("config: " + path + ": " + what);
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return node_.contains(key); }

    Section sub(const std::string& key) const {
        if (!node_.contains(key)) fail(at(key), "missing section");
        return Section(node_.at(key), at(key));
    }

    double number(const std::string& key) const {
        if (!node_.contains(key)) fail(at(key), "missing");
        const json& v = node_.at(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(at(key), "must be finite");
        return d;
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    double positive(const std::string& key) const {
        const double d = number(key);
        if (!(d > 0.0)) fail(at(key), "must be > 0");
        return d;
    }
    double positive(const std::string& key, double fallback) const { return has(key) ? positive(key) : fallback; }

    double non_negative(const std::string& key, double fallback) const {
        const double d = number(key, fallback);
        if (!(d >= 0.0)) fail(at(key), "must be >= 0");
        return d;
    }

    long long integer(const std::string& key, long long fallback) const {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        return v.get<long long>();
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        if (!has(key)) return out;
        const json& v = node_.at(key);
        if (!v.is_array()) fail(at(key), "expected an array of numbers");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    const std::string& path() const { return path_; }

private:
    const json& node_;
    std::string path_;
};

// Runs a module constructor/validator, re-raising its errors with the config path.
template <class F>
auto checked(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        // Already located errors pass through; bare ones get the path here.
        if (std::string_view(e.what()).starts_with("config: ")) throw;
        Section::fail(path, e.what());
    } catch (const Error& e) {
        Section::fail(path, e.what());
    } catch (const json::exception& e) {
        Section::fail(path, e.what());
    }
}

}  // namespace

nlohmann::json RunConfig::preset(const std::string& name) {
    if (name == "paper") return json::parse(embedded::paper);
    throw ConfigError("config: unknown preset '" + name + "' (available: paper)");
}

RunConfig RunConfig::load(const std::filesystem::path& config_path, const std::optional<std::string>& preset_name) {
    json doc = preset_name ? preset(*preset_name) : json::object();
    std::filesystem::path base = ".";
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw ConfigError("config: cannot open " + config_path.string());
        json user;
        try {
            user = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ConfigError("config: " + config_path.string() + ": " + e.what());
        }
        if (!user.is_object()) throw ConfigError("config: " + config_path.string() + ": top level must be an object");
        doc.merge_patch(user);
        base = config_path.parent_path();
        if (base.empty()) base = ".";
    } else if (!preset_name) {
        throw ConfigError("config: neither --config nor --preset given");
    }
    return from_json(std::move(doc), base);
}

RunConfig RunConfig::from_json(nlohmann::json doc, std::filesystem::path base_dir) {
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    RunConfig c;
    c.doc_ = std::move(doc);
    c.base_dir_ = std::move(base_dir);
    c.validate_all();
    return c;
}

void RunConfig::validate_all() const {
    if (has("crystal")) crystal();
    if (has("process")) process();
    if (has("cavity")) cavity();
    if (has("biphoton")) biphoton();
    if (has("source")) source();
    if (has("detection")) {
        detection(Polarization::signal);
        detection(Polarization::idler);
    }
    if (has("simulation")) simulation();
    if (has("interference")) {
        const Section s(doc_.at("interference"), "interference");
        if (s.has("michelson")) michelson();
        if (s.has("franson")) franson();
        if (s.has("umi")) umi();
    }
    if (has("output_dir")) output_dir();
}

CrystalSpec RunConfig::crystal() const {
    const Section s = Section(doc_, "").sub("crystal");
    CrystalSpec c;
    c.length_m = s.positive("length_m");
    c.width_m = s.non_negative("width_m", 0.0);
    c.height_m = s.non_negative("height_m", 0.0);
    c.poling_period_m = s.positive("poling_period_m");
    c.temperature_c = s.number("temperature_c", 25.0);
    const Section sm = s.sub("sellmeier");
    const std::string y_ref = sm.text("y", "builtin:ktp_y");
    const std::string z_ref = sm.text("z", "builtin:ktp_z");
    c.y = checked(sm.at("y"), [&] { return resolve_sellmeier(y_ref, base_dir_); });
    c.z = checked(sm.at("z"), [&] { return resolve_sellmeier(z_ref, base_dir_); });
    if (c.y.axis != Axis::y) Section::fail(sm.at("y"), "data file is not a y-axis set");
    if (c.z.axis != Axis::z) Section::fail(sm.at("z"), "data file is not a z-axis set");
    checked("crystal", [&] { c.validate(); });
    return c;
}

SpdcProcess RunConfig::process() const {
    const Section s = Section(doc_, "").sub("process");
    const double pump = s.positive("pump_wavelength_m");
    const double signal = s.positive("signal_wavelength_m", 2.0 * pump);
    const double idler = s.positive("idler_wavelength_m", 2.0 * pump);
    const auto order = s.integer("qpm_order", 1);
    const double temperature = has("crystal") ? Section(doc_.at("crystal"), "crystal").number("temperature_c", 25.0) : 25.0;
    return checked("process", [&] {
        return SpdcProcess::make(pump, signal, idler, temperature, static_cast<int>(order));
    });
}

std::pair<CavityModeStructure, CavityModeStructure> RunConfig::cavity() const {
    const Section s = Section(doc_, "").sub("cavity");
    double center_s = kSpeedOfLight / 1550e-9;
    double center_i = center_s;
    if (has("process")) {
        const Section p(doc_.at("process"), "process");
        const double pump = p.positive("pump_wavelength_m");
        center_s = kSpeedOfLight / p.positive("signal_wavelength_m", 2.0 * pump);
        center_i = kSpeedOfLight / p.positive("idler_wavelength_m", 2.0 * pump);
    }
    auto arm = [&](const char* name, Polarization pol, double center) {
        const Section a = s.sub(name);
        const double fsr = a.positive("fsr_hz");
        const double lw = a.positive("linewidth_hz");
        return checked(a.path(), [&] { return measured_mode_structure(pol, fsr, lw, a.number("center_hz", center)); });
    };
    return {arm("signal", Polarization::signal, center_s), arm("idler", Polarization::idler, center_i)};
}

BiphotonSettings RunConfig::biphoton() const {
    const Section s = Section(doc_, "").sub("biphoton");
    const auto [sig, idl] = cavity();
    BiphotonSettings b;
    b.model.gamma_s_hz = sig.linewidth_hz;
    b.model.gamma_i_hz = idl.linewidth_hz;
    b.model.fsr_s_hz = sig.fsr_hz;
    b.model.fsr_i_hz = idl.fsr_hz;
    b.model.omega_s_hz = sig.center_hz;
    b.model.omega_i_hz = idl.center_hz;
    b.model.tau0_s = s.non_negative("tau0_s", 0.0);
    const auto modes = s.integer("modes", 0);
    if (modes < 0 || modes > kMaxModeTruncation) Section::fail(s.at("modes"), "must lie in [0, 512]");
    b.model.modes = static_cast<int>(modes);
    b.detector_rate_per_s = s.positive("detector_rate_per_s");
    b.grid.step_s = s.positive("grid_step_s", 0.5e-12);
    b.grid.half_span_s = s.positive("grid_half_span_s", 5e-9);
    const std::string weights = s.text("weights", "uniform");
    if (weights == "qpm") {
        // Envelope centered on the phase-matched period, as for gain_bandwidth.
        CrystalSpec crystal = this->crystal();
        const SpdcProcess proc = process();
        crystal.poling_period_m = checked(s.at("weights"), [&] { return solve_poling_period(proc, crystal); });
        b.model = checked(s.at("weights"), [&] {
            return with_envelope_weights(b.model, [&](double detuning) {
                const double d = detuning;
                const std::vector<double> g = gain_spectrum(proc, crystal, std::span<const double>(&d, 1));
                return std::sqrt(g[0]);
            });
        });
    } else if (weights != "uniform") {
        Section::fail(s.at("weights"), "expected \"uniform\" or \"qpm\"");
    }
    checked("biphoton", [&] { b.model.validate(); });
    return b;
}

SourceModel RunConfig::source() const {
    const Section s = Section(doc_, "").sub("source");
    SourceModel m;
    m.pair_rate_per_s_per_mw = s.non_negative("pair_rate_per_s_per_mw", 0.0);
    if (!s.has("pair_rate_per_s_per_mw")) Section::fail(s.at("pair_rate_per_s_per_mw"), "missing");
    m.pump_power_mw = s.non_negative("pump_power_mw", 0.0);
    m.correlation = biphoton().model;
    return m;
}

DetectionChain RunConfig::detection(Polarization arm) const {
    const Section s = Section(doc_, "").sub("detection").sub(arm == Polarization::signal ? "signal" : "idler");
    DetectionChain c;
    c.fiber_efficiency = s.number("fiber_efficiency", 1.0);
    c.filter_transmittance = s.number("filter_transmittance", 1.0);
    c.detector_efficiency = s.number("detector_efficiency", 1.0);
    c.duty_cycle = s.number("duty_cycle", 1.0);
    c.dark_rate_hz = s.non_negative("dark_rate_hz", 0.0);
    if (s.has("jitter")) {
        const Section j = s.sub("jitter");
        c.jitter = checked(j.at("model"), [&] { return jitter_model_from_string(j.text("model", "none")); });
        if (c.jitter == JitterModel::gaussian) c.jitter_sigma_s = j.non_negative("sigma_s", 0.0);
        if (c.jitter == JitterModel::response) {
            c.jitter_rate_per_s = j.has("rate_per_s") ? j.positive("rate_per_s") : biphoton().detector_rate_per_s;
        }
    }
    checked(s.path(), [&] { c.validate(); });
    return c;
}

SimulationConfig RunConfig::simulation() const {
    const Section s = Section(doc_, "").sub("simulation");
    SimulationConfig c;
    c.duration_s = s.positive("duration_s", c.duration_s);
    const auto seed = s.integer("seed", 1);
    if (seed < 0) Section::fail(s.at("seed"), "must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
    c.bin_width_s = s.positive("bin_width_s", c.bin_width_s);
    c.range_s = s.positive("range_s", c.range_s);
    c.coincidence_window_s = s.positive("coincidence_window_s", c.coincidence_window_s);
    c.slab_s = s.positive("slab_s", c.slab_s);
    if (c.range_s < c.bin_width_s) Section::fail(s.at("range_s"), "must be at least one bin width");
    if (c.bin_width_s < 1e-12) Section::fail(s.at("bin_width_s"), "must be at least 1 ps");
    c.powers_mw = s.numbers("powers_mw");
    for (std::size_t i = 0; i < c.powers_mw.size(); ++i) {
        if (!(c.powers_mw[i] >= 0.0)) Section::fail(s.at("powers_mw") + "[" + std::to_string(i) + "]", "must be >= 0");
    }
    return c;
}

MichelsonConfig RunConfig::michelson() const {
    const Section s = Section(doc_, "").sub("interference").sub("michelson");
    MichelsonConfig c;
    c.model.linewidth_hz = s.positive("linewidth_hz");
    c.model.center_hz = s.positive("center_hz", kSpeedOfLight / 1550e-9);
    c.model.background_ratio = s.non_negative("background_ratio", 0.0);
    c.reference_linewidth_hz = has("cavity") ? cavity().first.linewidth_hz : 0.0;
    c.reference_linewidth_hz = s.positive("reference_linewidth_hz", c.reference_linewidth_hz > 0 ? c.reference_linewidth_hz : c.model.linewidth_hz);
    c.path_differences_m = s.numbers("path_differences_m");
    checked(s.path(), [&] { c.model.validate(); });
    return c;
}

FransonSettings RunConfig::franson() const {
    const Section s = Section(doc_, "").sub("interference").sub("franson");
    FransonSettings f;
    f.fringe.visibility = s.number("visibility", 1.0);
    f.fringe.idler_phase_rad = s.number("idler_phase_rad", 0.0);
    f.fringe.background = s.non_negative("background", 0.0);
    f.amplitude = s.positive("amplitude", 1000.0);
    const auto points = s.integer("points", 64);
    if (points < 4) Section::fail(s.at("points"), "must be >= 4");
    f.points = static_cast<int>(points);
    checked(s.path(), [&] { f.fringe.validate(); });
    return f;
}

UmiThermal RunConfig::umi() const {
    const Section s = Section(doc_, "").sub("interference").sub("umi");
    UmiThermal u;
    u.wavelength_m = s.positive("wavelength_m");
    u.fiber_index = s.non_negative("fiber_index", 0.0);
    u.dn_dT = s.positive("dn_dT");
    u.time_delay_s = s.non_negative("time_delay_s", 0.0);
    u.length_difference_m = s.non_negative("length_difference_m", 0.0);
    checked(s.path(), [&] { u.validate(); });
    return u;
}

std::string RunConfig::output_dir() const {
    const Section s(doc_, "");
    const std::string dir = s.text("output_dir", "cespdc_out");
    if (dir.empty()) Section::fail("output_dir", "must not be empty");
    const std::filesystem::path p(dir);
    return (p.is_absolute() ? p : base_dir_ / p).lexically_normal().string();
}

}  // namespace cespdc
