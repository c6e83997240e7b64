#include "core/dispersion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cespdc_embedded_data.hpp"
#include "core/error.hpp"

namespace cespdc {

namespace {

std::string format_bound(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void check_range(const SellmeierSet& set, double lambda_um, double temperature_c) {
    const auto [lo, hi] = set.valid_wavelength_um;
    if (!(lambda_um >= lo)) {
        throw DomainError("wavelength " + format_bound(lambda_um) + " um below validity lower bound " +
                          format_bound(lo) + " um (" + std::string(to_string(set.axis)) + " axis)");
    }
    if (!(lambda_um <= hi)) {
        throw DomainError("wavelength " + format_bound(lambda_um) + " um above validity upper bound " +
                          format_bound(hi) + " um (" + std::string(to_string(set.axis)) + " axis)");
    }
    const auto [tlo, thi] = set.valid_temp_c;
    if (!(temperature_c >= tlo)) {
        throw DomainError("temperature " + format_bound(temperature_c) + " C below validity lower bound " +
                          format_bound(tlo) + " C");
    }
    if (!(temperature_c <= thi)) {
        throw DomainError("temperature " + format_bound(temperature_c) + " C above validity upper bound " +
                          format_bound(thi) + " C");
    }
}

double index_unchecked(const SellmeierSet& set, double lambda_um, double temperature_c) {
    const auto& c = set.coefficients;
    const double l2 = lambda_um * lambda_um;
    const double n2 = c[0] + c[1] / (l2 - c[2]) + c[3] / (l2 - c[4]);
    double dndt = 0.0;
    double inv_pow = 1.0;
    for (double a : set.dn_dT) {
        dndt += a * inv_pow;
        inv_pow /= lambda_um;
    }
    return std::sqrt(n2) + dndt * (temperature_c - set.reference_temp_c);
}

std::pair<double, double> read_pair(const nlohmann::json& doc, const char* key) {
    const auto& arr = doc.at(key);
    if (!arr.is_array() || arr.size() != 2) {
        throw ConfigError(std::string("sellmeier.") + key + ": expected [lo, hi]");
    }
    const double lo = arr[0].get<double>();
    const double hi = arr[1].get<double>();
    if (!(lo < hi)) throw ConfigError(std::string("sellmeier.") + key + ": lo must be < hi");
    return {lo, hi};
}

}  // namespace

std::string_view to_string(Axis axis) { return axis == Axis::y ? "y" : "z"; }

Axis axis_from_string(std::string_view name) {
    if (name == "y") return Axis::y;
    if (name == "z") return Axis::z;
    throw ConfigError("unknown crystal axis '" + std::string(name) + "' (expected y or z)");
}

SellmeierSet SellmeierSet::from_json(const nlohmann::json& doc) {
    SellmeierSet set;
    try {
        set.axis = axis_from_string(doc.at("axis").get<std::string>());
        if (doc.contains("form") && doc.at("form").get<std::string>() != "two_pole") {
            throw ConfigError("sellmeier.form: only 'two_pole' is supported");
        }
        const auto coeffs = doc.at("coefficients").get<std::vector<double>>();
        if (coeffs.size() != 5) throw ConfigError("sellmeier.coefficients: expected 5 values [A, B, C, D, E]");
        std::copy(coeffs.begin(), coeffs.end(), set.coefficients.begin());
        set.valid_wavelength_um = read_pair(doc, "valid_wavelength_um");
        set.valid_temp_c = read_pair(doc, "valid_temp_c");
        set.reference_temp_c = doc.value("reference_temp_c", 20.0);
        const auto& dndt = doc.at("dn_dT");
        if (dndt.is_number()) {
            set.dn_dT = {dndt.get<double>()};
        } else {
            set.dn_dT = dndt.get<std::vector<double>>();
        }
        set.citation = doc.value("citation", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("sellmeier: ") + e.what());
    }
    set.validate();
    return set;
}

nlohmann::json SellmeierSet::to_json() const {
    return {{"axis", std::string(to_string(axis))},
            {"form", "two_pole"},
            {"coefficients", coefficients},
            {"valid_wavelength_um", {valid_wavelength_um.first, valid_wavelength_um.second}},
            {"valid_temp_c", {valid_temp_c.first, valid_temp_c.second}},
            {"reference_temp_c", reference_temp_c},
            {"dn_dT", dn_dT},
            {"citation", citation}};
}

void SellmeierSet::validate() const {
    const auto [lo, hi] = valid_wavelength_um;
    if (!(lo > 0.0)) throw ConfigError("sellmeier.valid_wavelength_um: lower bound must be > 0");
    constexpr int kSweep = 257;
    for (int i = 0; i < kSweep; ++i) {
        const double lambda = lo + (hi - lo) * i / (kSweep - 1);
        for (double t : {valid_temp_c.first, valid_temp_c.second}) {
            const double n = index_unchecked(*this, lambda, t);
            if (!std::isfinite(n) || n <= 1.0) {
                throw ConfigError("sellmeier (" + std::string(to_string(axis)) +
                                  " axis): index not real and > 1 at " + format_bound(lambda) + " um");
            }
        }
    }
}

SellmeierSet load_sellmeier(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open Sellmeier file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return SellmeierSet::from_json(doc);
}

SellmeierSet builtin_ktp(Axis axis) {
    const std::string_view text = axis == Axis::y ? embedded::ktp_y : embedded::ktp_z;
    return SellmeierSet::from_json(nlohmann::json::parse(text));
}

SellmeierSet resolve_sellmeier(std::string_view reference, const std::filesystem::path& base_dir) {
    if (reference == "builtin:ktp_y") return builtin_ktp(Axis::y);
    if (reference == "builtin:ktp_z") return builtin_ktp(Axis::z);
    if (reference.starts_with("builtin:")) {
        throw ConfigError("unknown builtin Sellmeier set '" + std::string(reference) + "'");
    }
    std::filesystem::path p{std::string(reference)};
    if (p.is_relative()) p = base_dir / p;
    return load_sellmeier(p);
}

double refractive_index(const SellmeierSet& set, double wavelength_m, double temperature_c) {
    const double lambda_um = wavelength_m * 1e6;
    check_range(set, lambda_um, temperature_c);
    return index_unchecked(set, lambda_um, temperature_c);
}

double group_index(const SellmeierSet& set, double wavelength_m, double temperature_c, double step_m) {
    if (!(step_m > 0.0)) throw DomainError("group_index: step must be > 0");
    const double n = refractive_index(set, wavelength_m, temperature_c);
    // Both stencil points must lie inside the validity range.
    const double n_plus = refractive_index(set, wavelength_m + step_m, temperature_c);
    const double n_minus = refractive_index(set, wavelength_m - step_m, temperature_c);
    const double dn_dlambda = (n_plus - n_minus) / (2.0 * step_m);
    return n - wavelength_m * dn_dlambda;
}

void CrystalSpec::validate() const {
    if (!(length_m > 0.0)) throw ConfigError("crystal.length_m: must be > 0");
    if (!(poling_period_m > 0.0)) throw ConfigError("crystal.poling_period_m: must be > 0");
    if (y.axis != Axis::y) throw ConfigError("crystal.sellmeier.y: set is for the z axis");
    if (z.axis != Axis::z) throw ConfigError("crystal.sellmeier.z: set is for the y axis");
}

}  // namespace cespdc
