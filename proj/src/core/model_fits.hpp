#pragma once

#include <optional>
#include <span>
#include <vector>

#include "core/biphoton.hpp"
#include "core/cavity.hpp"
#include "core/counting.hpp"
#include "core/fitting.hpp"
#include "core/interference.hpp"

namespace cespdc {

// Cavity transmission line: offset + amplitude (w/2)^2 / ((nu - nu0)^2 + (w/2)^2).
// Parameters: center_hz, fwhm_hz, amplitude, offset.
struct LorentzianGuess {
    double center_hz = 0.0;
    double fwhm_hz = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
};

double lorentzian_peak_model(const LorentzianGuess& p, double nu_hz);

/// Initial guess from the data: offset = minimum, amplitude = maximum - offset,
/// center = argmax, width = distance between the half-height crossings around it.
LorentzianGuess guess_lorentzian(std::span<const ScanSample> scan);

/// A constant series returns a non-converged result. Throws PreconditionError
/// when the scan spans less than 3 x the FWHM guess.
FitResult fit_lorentzian_scan(std::span<const ScanSample> scan, std::optional<LorentzianGuess> guess = std::nullopt);

/// Residuals and analytic Jacobian of the Lorentzian model at parameter
/// vector (center, fwhm, amplitude, offset), for tests.
Eigen::VectorXd lorentzian_residuals(std::span<const ScanSample> scan, const Eigen::VectorXd& p);
Eigen::MatrixXd lorentzian_jacobian(std::span<const ScanSample> scan, const Eigen::VectorXd& p);

// Coincidence histogram model: amplitude * [bin averages of the peak-normalized
// (g2 * response)] + background. Parameters: gamma_s_hz, gamma_i_hz,
// detector_rate_per_s, amplitude, background.
struct G2FitPriors {
    BiphotonModel model;  // starting gamma_s, gamma_i; FSRs/modes/tau0 held fixed
    double detector_rate_per_s = 0.0;
    double grid_step_s = 0.5e-12;
    bool fix_detector_rate = false;
    bool fix_background = false;
    bool poisson_weights = false;
};

struct HistogramSeries {
    double bin_width_s = 25e-12;
    std::vector<double> delay_s;  // bin centers
    std::vector<double> counts;
};

HistogramSeries to_series(const CoincidenceHistogram& hist);
HistogramSeries to_series(const G2Curve& curve);

/// Model values at the series' bin centers, as bin averages over bin_width.
std::vector<double> g2_histogram_model(const HistogramSeries& data, const BiphotonModel& model,
                                       double detector_rate_per_s, double amplitude, double background,
                                       double grid_step_s = 0.5e-12);

FitResult fit_g2_histogram(const HistogramSeries& data, const G2FitPriors& priors);

/// Eq.-(8)-type visibility decay. Parameters: linewidth_hz, background_ratio.
/// Starts from a log-linear regression of ln V on |L|. Needs >= 4 points
/// whose visibilities span a factor >= 2 (UnderdeterminedError otherwise).
FitResult fit_visibility_decay(std::span<const VisibilitySample> series);

/// Fringe bg + amplitude (1 + V cos(phi + offset)) / 2 with the background
/// held at `background` (it is not separable from amplitude and V). Starts
/// from a linear least-squares fit of [1, cos phi, sin phi]. Parameters:
/// amplitude, visibility, phase_offset, background.
FitResult fit_fringe(std::span<const FringeSample> series, double background = 0.0);

Eigen::VectorXd fringe_residuals(std::span<const FringeSample> series, const Eigen::VectorXd& p);
Eigen::MatrixXd fringe_jacobian(std::span<const FringeSample> series, const Eigen::VectorXd& p);

/// Detector rate that broadens the peak-normalized analytic curve of `model`
/// to the observed FWHM. Parameter: detector_rate_per_s.
FitResult fit_detector_rate(const BiphotonModel& model, double observed_fwhm_s, const GridSpec& grid = {});

}  // namespace cespdc
