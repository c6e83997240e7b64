#pragma once

#include <span>
#include <vector>

#include "core/dispersion.hpp"

namespace cespdc {

/// Type-II down-conversion pump(y) -> signal(y) + idler(z).
struct SpdcProcess {
    double pump_wavelength_m = 0.0;
    double signal_wavelength_m = 0.0;
    double idler_wavelength_m = 0.0;
    Axis pump_axis = Axis::y;
    Axis signal_axis = Axis::y;
    Axis idler_axis = Axis::z;
    double temperature_c = 25.0;
    int order = 1;

    /// Validates energy conservation (1e-9 relative), axis assignment and order.
    static SpdcProcess make(double pump_m, double signal_m, double idler_m, double temperature_c, int order = 1);
    static SpdcProcess degenerate(double pump_m, double temperature_c, int order = 1);

    /// Signal shifted by +detuning in frequency, idler slaved by energy conservation.
    SpdcProcess detuned(double signal_detuning_hz) const;

    void validate() const;
};

/// k_p - k_s - k_i with the grating vector oriented against that bare mismatch:
///   dk = bare - sgn(bare) * 2 pi order / period   (1/m)
double phase_mismatch(const SpdcProcess& process, const CrystalSpec& crystal);

/// Same, with an explicit poling period instead of crystal.poling_period_m.
double phase_mismatch(const SpdcProcess& process, const CrystalSpec& crystal, double period_m);

/// Poling period with dk = 0 for the process, by bisection on
/// [10, 100] um x order, to |dk| < 1e-6 1/m.
double solve_poling_period(const SpdcProcess& process, const CrystalSpec& crystal);

/// Single-pass envelope sinc^2(dk(delta) L / 2) at each signal detuning (Hz).
/// Values lie in [0, 1] and reach 1 only where dk = 0.
std::vector<double> gain_spectrum(const SpdcProcess& process, const CrystalSpec& crystal,
                                  std::span<const double> signal_detuning_hz);

/// Full width at half maximum of the envelope (Hz), by bracketed bisection of
/// the half-max crossings on either side of zero detuning.
double gain_bandwidth(const SpdcProcess& process, const CrystalSpec& crystal);

}  // namespace cespdc
