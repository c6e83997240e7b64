#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cespdc {

enum class Axis { y, z };

std::string_view to_string(Axis axis);
Axis axis_from_string(std::string_view name);

/// Refractive index data for one crystal axis.
///
/// Two-pole Sellmeier form with lambda in micrometres:
///   n^2 = A + B / (lambda^2 - C) + D / (lambda^2 - E)
/// plus an additive thermo-optic correction
///   n(lambda, T) = n(lambda, T_ref) + dn/dT(lambda) * (T - T_ref),
///   dn/dT(lambda) = sum_k dn_dT[k] / lambda^k.
struct SellmeierSet {
    Axis axis = Axis::y;
    std::array<double, 5> coefficients{};
    std::pair<double, double> valid_wavelength_um{0.0, 0.0};
    std::pair<double, double> valid_temp_c{0.0, 0.0};
    double reference_temp_c = 20.0;
    std::vector<double> dn_dT;
    std::string citation;

    static SellmeierSet from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    /// Checks n > 1 and finite over a sweep of the declared validity range.
    void validate() const;
};

SellmeierSet load_sellmeier(const std::filesystem::path& path);

/// Shipped KTP set for the given axis (flux-grown KTP, see data/sellmeier).
SellmeierSet builtin_ktp(Axis axis);

/// Resolves "builtin:ktp_y" / "builtin:ktp_z" or a file path (relative paths
/// are taken against base_dir).
SellmeierSet resolve_sellmeier(std::string_view reference, const std::filesystem::path& base_dir);

/// Central-difference step used by group_index (0.1 nm).
inline constexpr double kGroupIndexStep = 0.1e-9;

double refractive_index(const SellmeierSet& set, double wavelength_m, double temperature_c);

/// n_g = n - lambda dn/dlambda with a central difference of the given step.
double group_index(const SellmeierSet& set, double wavelength_m, double temperature_c,
                   double step_m = kGroupIndexStep);

struct CrystalSpec {
    double length_m = 0.0;  // along propagation (x)
    double width_m = 0.0;
    double height_m = 0.0;
    double poling_period_m = 0.0;
    double temperature_c = 25.0;
    SellmeierSet y;
    SellmeierSet z;

    const SellmeierSet& axis(Axis a) const { return a == Axis::y ? y : z; }
    void validate() const;
};

}  // namespace cespdc
