#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "core/dispersion.hpp"

namespace cespdc {

// Signal is horizontally polarized along y, idler vertically along z.
enum class Polarization { signal, idler };

inline Axis axis_of(Polarization p) { return p == Polarization::signal ? Axis::y : Axis::z; }
std::string_view to_string(Polarization p);

enum class ModeSource { derived, measured };

/// Longitudinal-mode structure of the monolithic cavity for one polarization.
/// All frequencies are ordinary frequencies in Hz.
struct CavityModeStructure {
    Polarization polarization = Polarization::signal;
    double fsr_hz = 0.0;
    double linewidth_hz = 0.0;  // FWHM
    double center_hz = 0.0;
    ModeSource source = ModeSource::measured;

    double finesse() const { return fsr_hz / linewidth_hz; }
    void validate() const;
};

/// Free spectral range c / (2 n_g L) of a linear cavity of the crystal length.
double fsr(const CrystalSpec& crystal, Axis axis, double wavelength_m);

CavityModeStructure derived_mode_structure(const CrystalSpec& crystal, Polarization pol,
                                           double wavelength_m, double linewidth_hz);

/// Calibration mode: measured FSR and linewidth are stored verbatim.
CavityModeStructure measured_mode_structure(Polarization pol, double fsr_hz, double linewidth_hz,
                                            double center_hz);

struct LorentzianLine {
    double center_hz = 0.0;
    double fwhm_hz = 0.0;
};

/// Unit-area Lorentzian density (1/Hz).
double lorentzian(const LorentzianLine& line, double nu_hz);

struct CombMode {
    int index = 0;
    double frequency_hz = 0.0;
};

/// Modes center_hz(structure) + m * FSR inside the closed interval
/// [center - half_width, center + half_width], ascending.
std::vector<CombMode> mode_comb(const CavityModeStructure& structure, double center_hz, double half_width_hz);

struct ScanSample {
    double freq_hz = 0.0;
    double transmission = 0.0;
};

struct ScanSettings {
    double start_hz = 0.0;
    double stop_hz = 0.0;
    std::size_t samples = 0;
    double noise_level = 0.0;  // Gaussian sigma relative to unit peak height
    std::uint64_t seed = 0;
};

/// Sum of unit-height Lorentzian peaks at every comb mode of every structure
/// inside the scan, plus seeded additive Gaussian noise.
std::vector<ScanSample> synth_transmission_scan(std::span<const CavityModeStructure> structures,
                                                const ScanSettings& settings);

void write_scan_csv(std::ostream& out, std::span<const ScanSample> scan);

}  // namespace cespdc
