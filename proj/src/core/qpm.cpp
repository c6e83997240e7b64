#include "core/qpm.hpp"

#include <cmath>

#include "core/constants.hpp"
#include "core/error.hpp"

namespace cespdc {

namespace {

double bare_mismatch(const SpdcProcess& p, const CrystalSpec& crystal) {
    const double t = p.temperature_c;
    const double kp = kTwoPi * refractive_index(crystal.axis(p.pump_axis), p.pump_wavelength_m, t) / p.pump_wavelength_m;
    const double ks =
        kTwoPi * refractive_index(crystal.axis(p.signal_axis), p.signal_wavelength_m, t) / p.signal_wavelength_m;
    const double ki = kTwoPi * refractive_index(crystal.axis(p.idler_axis), p.idler_wavelength_m, t) / p.idler_wavelength_m;
    return kp - ks - ki;
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

}  // namespace

void SpdcProcess::validate() const {
    if (!(pump_wavelength_m > 0.0) || !(signal_wavelength_m > 0.0) || !(idler_wavelength_m > 0.0)) {
        throw DomainError("process: wavelengths must be > 0");
    }
    const double lhs = 1.0 / pump_wavelength_m;
    const double rhs = 1.0 / signal_wavelength_m + 1.0 / idler_wavelength_m;
    if (std::abs(lhs - rhs) > 1e-9 * lhs) {
        throw DomainError("process: energy conservation violated (1/lambda_p != 1/lambda_s + 1/lambda_i)");
    }
    if (pump_axis != Axis::y || signal_axis != Axis::y || idler_axis != Axis::z) {
        throw DomainError("process: only type-II y -> y + z is supported");
    }
    if (order < 1 || order % 2 == 0) throw DomainError("process: QPM order must be a positive odd integer");
}

SpdcProcess SpdcProcess::make(double pump_m, double signal_m, double idler_m, double temperature_c, int order) {
    SpdcProcess p;
    p.pump_wavelength_m = pump_m;
    p.signal_wavelength_m = signal_m;
    p.idler_wavelength_m = idler_m;
    p.temperature_c = temperature_c;
    p.order = order;
    p.validate();
    return p;
}

SpdcProcess SpdcProcess::degenerate(double pump_m, double temperature_c, int order) {
    return make(pump_m, 2.0 * pump_m, 2.0 * pump_m, temperature_c, order);
}

SpdcProcess SpdcProcess::detuned(double signal_detuning_hz) const {
    SpdcProcess p = *this;
    const double nu_p = kSpeedOfLight / pump_wavelength_m;
    const double nu_s = kSpeedOfLight / signal_wavelength_m + signal_detuning_hz;
    const double nu_i = nu_p - nu_s;
    if (!(nu_s > 0.0) || !(nu_i > 0.0)) throw DomainError("process: detuning leaves no positive idler frequency");
    p.signal_wavelength_m = kSpeedOfLight / nu_s;
    p.idler_wavelength_m = kSpeedOfLight / nu_i;
    return p;
}

double phase_mismatch(const SpdcProcess& process, const CrystalSpec& crystal, double period_m) {
    process.validate();
    if (!(period_m > 0.0)) throw DomainError("phase_mismatch: poling period must be > 0");
    const double bare = bare_mismatch(process, crystal);
    const double grating = kTwoPi * process.order / period_m;
    return bare - std::copysign(grating, bare);
}

double phase_mismatch(const SpdcProcess& process, const CrystalSpec& crystal) {
    return phase_mismatch(process, crystal, crystal.poling_period_m);
}

double solve_poling_period(const SpdcProcess& process, const CrystalSpec& crystal) {
    process.validate();
    const double bare = bare_mismatch(process, crystal);
    double lo = 10e-6 * process.order;
    double hi = 100e-6 * process.order;
    // |dk| grows as the period shrinks: f(period) = |bare| - 2 pi m / period.
    auto f = [&](double period) { return std::abs(bare) - kTwoPi * process.order / period; };
    double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo * f_hi > 0.0) {
        throw NoSolutionError("solve_poling_period: phase mismatch does not change sign over the search bracket");
    }
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 400; ++iter) {
        mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (std::abs(f_mid) < 1e-6 || mid == lo || mid == hi) break;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return mid;
}

std::vector<double> gain_spectrum(const SpdcProcess& process, const CrystalSpec& crystal,
                                  std::span<const double> signal_detuning_hz) {
    std::vector<double> out;
    out.reserve(signal_detuning_hz.size());
    for (double d : signal_detuning_hz) {
        const double dk = phase_mismatch(process.detuned(d), crystal);
        const double s = sinc(0.5 * dk * crystal.length_m);
        out.push_back(s * s);
    }
    return out;
}

double gain_bandwidth(const SpdcProcess& process, const CrystalSpec& crystal) {
    auto g = [&](double d) {
        const double dk = phase_mismatch(process.detuned(d), crystal);
        const double s = sinc(0.5 * dk * crystal.length_m);
        return s * s;
    };
    if (!(g(0.0) > 0.5)) throw NoSolutionError("gain_bandwidth: envelope below half maximum at zero detuning");
    auto crossing = [&](double sign) {
        double inner = 0.0;
        double outer = sign * 1e11;
        while (g(outer) > 0.5) {
            inner = outer;
            outer *= 2.0;
            if (std::abs(outer) > 1e15) throw NoSolutionError("gain_bandwidth: no half-max crossing found");
        }
        for (int i = 0; i < 200 && std::abs(outer - inner) > 1.0; ++i) {
            const double mid = 0.5 * (inner + outer);
            (g(mid) > 0.5 ? inner : outer) = mid;
        }
        return 0.5 * (inner + outer);
    };
    return crossing(+1.0) - crossing(-1.0);
}

}  // namespace cespdc
