#include "core/interference.hpp"

#include <cmath>
#include <ostream>

#include "core/constants.hpp"
#include "core/csv.hpp"
#include "core/error.hpp"

namespace cespdc {

void FransonConfig::validate() const {
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw DomainError("franson: visibility must lie in [0, 1]");
    if (!(background >= 0.0)) throw DomainError("franson: background must be >= 0");
    if (!std::isfinite(idler_phase_rad)) throw DomainError("franson: idler phase must be finite");
}

double franson_coincidence(const FransonConfig& cfg, double signal_phase_rad, double amplitude) {
    cfg.validate();
    if (!(amplitude > 0.0)) throw DomainError("franson: amplitude must be > 0");
    return cfg.background + amplitude * 0.5 * (1.0 + cfg.visibility * std::cos(signal_phase_rad + cfg.idler_phase_rad));
}

std::vector<FringeSample> franson_fringe(const FransonConfig& cfg, double amplitude, int points, double start_rad,
                                         double span_rad) {
    if (points < 1) throw DomainError("franson_fringe: need at least one point");
    std::vector<FringeSample> out;
    out.reserve(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        const double phi = start_rad + span_rad * k / points;
        out.push_back({phi, franson_coincidence(cfg, phi, amplitude)});
    }
    return out;
}

double visibility_from_extrema(double c_max, double c_min) {
    if (!(c_min >= 0.0) || !(c_max >= c_min) || !(c_max > 0.0)) {
        throw DomainError("visibility_from_extrema: need C_max >= C_min >= 0 and C_max > 0");
    }
    return (c_max - c_min) / (c_max + c_min);
}

double net_visibility(double c_max, double c_min, double accidentals) {
    if (!(accidentals >= 0.0) || !(accidentals <= c_min)) {
        throw DomainError("net_visibility: accidental level must lie in [0, C_min]");
    }
    return visibility_from_extrema(c_max - accidentals, c_min - accidentals);
}

void MichelsonModel::validate() const {
    if (!(linewidth_hz > 0.0)) throw DomainError("michelson: linewidth must be > 0");
    if (!(background_ratio >= 0.0)) throw DomainError("michelson: background ratio must be >= 0");
    if (!std::isfinite(center_hz)) throw DomainError("michelson: center frequency must be finite");
}

double michelson_intensity(const MichelsonModel& model, double path_difference_m, double i0) {
    model.validate();
    const double x = path_difference_m / kSpeedOfLight;
    return 2.0 * i0 + 2.0 * i0 * std::exp(-kPi * std::abs(model.linewidth_hz * x)) * std::cos(kTwoPi * model.center_hz * x);
}

double michelson_visibility(const MichelsonModel& model, double path_difference_m) {
    model.validate();
    return std::exp(-kPi * std::abs(model.linewidth_hz * path_difference_m / kSpeedOfLight)) /
           (1.0 + 0.5 * model.background_ratio);
}

std::vector<VisibilitySample> michelson_series(const MichelsonModel& model, std::span<const double> path_differences_m) {
    std::vector<VisibilitySample> out;
    out.reserve(path_differences_m.size());
    for (double l : path_differences_m) out.push_back({l, michelson_visibility(model, l)});
    return out;
}

double umi_length_difference(double time_delay_s, double fiber_index) {
    if (!(time_delay_s > 0.0) || !(fiber_index > 0.0)) throw DomainError("umi: time delay and index must be > 0");
    return kSpeedOfLight * time_delay_s / (2.0 * fiber_index);
}

double UmiThermal::resolved_length_m() const {
    if (length_difference_m > 0.0) return length_difference_m;
    if (time_delay_s > 0.0) return umi_length_difference(time_delay_s, fiber_index);
    throw DomainError("umi: length difference L_d must be > 0");
}

void UmiThermal::validate() const {
    if (!(wavelength_m > 0.0)) throw DomainError("umi: wavelength must be > 0");
    if (!(dn_dT > 0.0)) throw DomainError("umi: thermo-optic coefficient dn/dT must be > 0");
    if (!(length_difference_m >= 0.0) || !(time_delay_s >= 0.0)) throw DomainError("umi: negative length or delay");
    if (time_delay_s > 0.0 && !(fiber_index > 0.0)) throw DomainError("umi: fiber index must be > 0");
    if (length_difference_m > 0.0 && time_delay_s > 0.0) {
        const double derived = umi_length_difference(time_delay_s, fiber_index);
        if (std::abs(derived - length_difference_m) > 1e-6 * length_difference_m) {
            throw DomainError("umi: length difference disagrees with c dt / 2n");
        }
    }
    resolved_length_m();
}

double umi_tuning_period(const UmiThermal& umi) {
    umi.validate();
    return umi.wavelength_m / (2.0 * umi.resolved_length_m() * umi.dn_dT);
}

void write_fringe_csv(std::ostream& out, std::span<const FringeSample> fringe) {
    CsvWriter csv(out, {"phase_rad", "counts"});
    for (const auto& s : fringe) csv.row(s.phase_rad, s.counts);
}

void write_visibility_csv(std::ostream& out, std::span<const VisibilitySample> series) {
    CsvWriter csv(out, {"delta_x_m", "visibility"});
    for (const auto& s : series) csv.row(s.delta_x_m, s.visibility);
}

}  // namespace cespdc
