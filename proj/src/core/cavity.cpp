#include "core/cavity.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "core/constants.hpp"
#include "core/csv.hpp"
#include "core/error.hpp"

namespace cespdc {

std::string_view to_string(Polarization p) { return p == Polarization::signal ? "signal" : "idler"; }

void CavityModeStructure::validate() const {
    const std::string who = std::string("cavity.") + std::string(to_string(polarization));
    if (!(fsr_hz > 0.0)) throw DomainError(who + ": FSR must be > 0");
    if (!(linewidth_hz > 0.0)) throw DomainError(who + ": linewidth must be > 0");
    if (!(linewidth_hz < fsr_hz)) throw DomainError(who + ": linewidth must be below the FSR (finesse > 1)");
}

double fsr(const CrystalSpec& crystal, Axis axis, double wavelength_m) {
    const double ng = group_index(crystal.axis(axis), wavelength_m, crystal.temperature_c);
    return kSpeedOfLight / (2.0 * ng * crystal.length_m);
}

CavityModeStructure derived_mode_structure(const CrystalSpec& crystal, Polarization pol, double wavelength_m,
                                           double linewidth_hz) {
    CavityModeStructure s;
    s.polarization = pol;
    s.fsr_hz = fsr(crystal, axis_of(pol), wavelength_m);
    s.linewidth_hz = linewidth_hz;
    s.center_hz = kSpeedOfLight / wavelength_m;
    s.source = ModeSource::derived;
    s.validate();
    return s;
}

CavityModeStructure measured_mode_structure(Polarization pol, double fsr_hz, double linewidth_hz,
                                            double center_hz) {
    CavityModeStructure s;
    s.polarization = pol;
    s.fsr_hz = fsr_hz;
    s.linewidth_hz = linewidth_hz;
    s.center_hz = center_hz;
    s.source = ModeSource::measured;
    s.validate();
    return s;
}

double lorentzian(const LorentzianLine& line, double nu_hz) {
    if (!(line.fwhm_hz > 0.0)) throw DomainError("lorentzian: FWHM must be > 0");
    const double half = 0.5 * line.fwhm_hz;
    const double d = nu_hz - line.center_hz;
    return (line.fwhm_hz / kTwoPi) / (d * d + half * half);
}

std::vector<CombMode> mode_comb(const CavityModeStructure& structure, double center_hz, double half_width_hz) {
    structure.validate();
    if (!(half_width_hz > 0.0)) throw DomainError("mode_comb: half_width must be > 0");
    const double lo = center_hz - half_width_hz;
    const double hi = center_hz + half_width_hz;
    const auto m_lo = static_cast<long long>(std::ceil((lo - structure.center_hz) / structure.fsr_hz)) - 1;
    const auto m_hi = static_cast<long long>(std::floor((hi - structure.center_hz) / structure.fsr_hz)) + 1;
    std::vector<CombMode> modes;
    for (long long m = m_lo; m <= m_hi; ++m) {
        const double f = structure.center_hz + static_cast<double>(m) * structure.fsr_hz;
        if (f >= lo && f <= hi) modes.push_back({static_cast<int>(m), f});
    }
    return modes;
}

std::vector<ScanSample> synth_transmission_scan(std::span<const CavityModeStructure> structures,
                                                const ScanSettings& settings) {
    if (structures.empty()) throw DomainError("synth_transmission_scan: empty structure list");
    if (settings.samples < 2) throw DomainError("synth_transmission_scan: need at least 2 samples");
    if (!(settings.stop_hz > settings.start_hz)) throw DomainError("synth_transmission_scan: stop must exceed start");
    if (!(settings.noise_level >= 0.0)) throw DomainError("synth_transmission_scan: noise level must be >= 0");
    const double span = settings.stop_hz - settings.start_hz;
    for (const auto& s : structures) {
        s.validate();
        if (span < s.fsr_hz) throw DomainError("synth_transmission_scan: scan must cover at least one FSR");
    }

    // Peaks whose tails matter are gathered with a margin of a few FSRs.
    std::vector<std::pair<double, double>> peaks;  // (frequency, fwhm)
    const double mid = 0.5 * (settings.start_hz + settings.stop_hz);
    for (const auto& s : structures) {
        for (const auto& mode : mode_comb(s, mid, 0.5 * span + 3.0 * s.fsr_hz)) {
            peaks.emplace_back(mode.frequency_hz, s.linewidth_hz);
        }
    }

    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<ScanSample> scan(settings.samples);
    const double step = span / static_cast<double>(settings.samples - 1);
    for (std::size_t k = 0; k < settings.samples; ++k) {
        const double nu = settings.start_hz + step * static_cast<double>(k);
        double t = 0.0;
        for (const auto& [f, w] : peaks) {
            const double half = 0.5 * w;
            const double d = nu - f;
            t += half * half / (d * d + half * half);
        }
        if (settings.noise_level > 0.0) t += settings.noise_level * noise(rng);
        scan[k] = {nu, t};
    }
    return scan;
}

void write_scan_csv(std::ostream& out, std::span<const ScanSample> scan) {
    CsvWriter csv(out, {"freq_hz", "transmission"});
    for (const auto& s : scan) csv.row(s.freq_hz, s.transmission);
}

}  // namespace cespdc
