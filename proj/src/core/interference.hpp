#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace cespdc {

/// Two-interferometer coincidence fringe C = bg + A (1 + V cos(phi_s + phi_i)) / 2.
struct FransonConfig {
    double visibility = 1.0;
    double idler_phase_rad = 0.0;
    double background = 0.0;  // counts per phase point

    void validate() const;
};

double franson_coincidence(const FransonConfig& cfg, double signal_phase_rad, double amplitude);

struct FringeSample {
    double phase_rad = 0.0;
    double counts = 0.0;
};

/// `points` equally spaced signal phases over [start, start + span).
std::vector<FringeSample> franson_fringe(const FransonConfig& cfg, double amplitude, int points,
                                         double start_rad = 0.0, double span_rad = 6.283185307179586);

/// (C_max - C_min) / (C_max + C_min).
double visibility_from_extrema(double c_max, double c_min);

/// Visibility after removing a constant accidental level from both extrema.
double net_visibility(double c_max, double c_min, double accidentals);

/// Single-photon Michelson interference of a Lorentzian line.
struct MichelsonModel {
    double linewidth_hz = 0.0;      // Delta nu_N, FWHM
    double center_hz = 0.0;         // nu_0
    double background_ratio = 0.0;  // R

    void validate() const;
};

/// 2 I0 + 2 I0 exp(-pi |dnu L / c|) cos(2 pi nu0 L / c).
double michelson_intensity(const MichelsonModel& model, double path_difference_m, double i0);

/// exp(-pi |dnu L / c|) / (1 + R / 2).
double michelson_visibility(const MichelsonModel& model, double path_difference_m);

struct VisibilitySample {
    double delta_x_m = 0.0;
    double visibility = 0.0;
};

std::vector<VisibilitySample> michelson_series(const MichelsonModel& model, std::span<const double> path_differences_m);

/// Fiber unbalanced Michelson interferometer tuned thermally.
struct UmiThermal {
    double wavelength_m = 0.0;
    double fiber_index = 0.0;
    double dn_dT = 0.0;               // 1/K
    double time_delay_s = 0.0;        // 0 when not given
    double length_difference_m = 0.0; // 0 when not given

    /// L_d, taken from the time delay when only that is given. When both are
    /// given they must agree to 1e-6.
    double resolved_length_m() const;
    void validate() const;
};

/// c dt / (2 n).
double umi_length_difference(double time_delay_s, double fiber_index);

/// lambda / (2 L_d dn/dT), kelvin per 2 pi of phase.
double umi_tuning_period(const UmiThermal& umi);

void write_fringe_csv(std::ostream& out, std::span<const FringeSample> fringe);
void write_visibility_csv(std::ostream& out, std::span<const VisibilitySample> series);

}  // namespace cespdc
