#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace cespdc {

/// Closed-form signal-idler cross-correlation of a doubly resonant type-II
/// source. Rates gamma_* are cavity linewidths (FWHM, Hz); each mode enters
/// with complex rate Gamma = gamma/2 + i m FSR, so that the intensity of a
/// single mode decays as exp(-2 pi gamma |tau|).
struct BiphotonModel {
    double gamma_s_hz = 0.0;
    double gamma_i_hz = 0.0;
    double fsr_s_hz = 0.0;
    double fsr_i_hz = 0.0;
    double omega_s_hz = 0.0;  // central frequencies; scale only
    double omega_i_hz = 0.0;
    double tau0_s = 0.0;      // signal-idler propagation delay in the crystal
    int modes = 0;            // truncation M: m_s, m_i in [-M, M]
    // Relative mode amplitudes indexed m + M; empty means uniform.
    std::vector<double> signal_weights;
    std::vector<double> idler_weights;

    void validate() const;
    nlohmann::json to_json() const;
    static BiphotonModel from_json(const nlohmann::json& doc);
};

inline constexpr int kMaxModeTruncation = 512;
inline constexpr double kModeWeightCutoff = 1e-6;

/// Fills per-mode weights from an amplitude envelope over signal detuning
/// (the idler mode m sits at signal detuning -m * fsr_i) and picks M as the
/// last mode whose weight envelope(m) / |Gamma_s + Gamma_i| is still above
/// 1e-6 of the m = 0 term, capped at 512.
BiphotonModel with_envelope_weights(BiphotonModel model, const std::function<double(double)>& amplitude);

/// Precomputes the mode sums of a model; evaluation is O(M) per delay.
class G2Evaluator {
public:
    explicit G2Evaluator(const BiphotonModel& model);

    std::complex<double> amplitude(double tau_s) const;
    double operator()(double tau_s) const { return std::norm(amplitude(tau_s)); }

    const BiphotonModel& model() const { return model_; }

private:
    BiphotonModel model_;
    std::vector<std::complex<double>> signal_coeff_;  // index m + M
    std::vector<std::complex<double>> idler_coeff_;
};

double g2(const BiphotonModel& model, double tau_s);

/// Uniformly sampled curve on tau = start + i * step.
struct G2Curve {
    double start_s = 0.0;
    double step_s = 0.0;
    std::vector<double> values;
    std::string model;
    int truncation = 0;

    std::size_t size() const { return values.size(); }
    double tau(std::size_t i) const { return start_s + step_s * static_cast<double>(i); }
    double stop_s() const { return tau(values.size() - 1); }
};

struct GridSpec {
    double step_s = 0.5e-12;
    double half_span_s = 5e-9;
};

/// Samples g2 on a symmetric grid. Per-sample sums are sequential, so the
/// values do not depend on the worker count.
G2Curve sample_g2(const BiphotonModel& model, const GridSpec& grid = {}, bool normalize = true,
                  unsigned workers = 0);

/// One-sided exponential detector response alpha * exp(rate * t / 2) for t <= 0.
struct DetectorResponse {
    double rate_per_s = 0.0;
    double amplitude = 1.0;
};

double detector_response(const DetectorResponse& response, double t_s);

struct ConvolveOptions {
    bool normalize = true;
    double rebin_s = 0.0;  // 0 keeps the input grid
};

inline constexpr double kMaxConvolutionStep = 1e-12;

/// (curve * response)(t) on the same grid. The response is exponential, so the
/// discrete convolution runs as a backward recursion.
G2Curve convolve_g2(const G2Curve& curve, const DetectorResponse& response, const ConvolveOptions& options = {});

/// Integral of the linearly interpolated curve over [a, b] (clipped to the grid).
double integrate(const G2Curve& curve, double a_s, double b_s);

/// Bin averages over bins of the given width centered on integer multiples
/// of the width, keeping only bins fully inside the grid.
G2Curve rebin(const G2Curve& curve, double bin_s);

/// Peak normalization in place; throws if the curve has no positive value.
void normalize_peak(G2Curve& curve);

/// Width between the outermost half-maximum crossings (linear interpolation).
double fwhm(const G2Curve& curve);

/// Width of the peak envelope of a comb-shaped curve: one maximum per comb
/// period around the global maximum, made monotone away from it, then
/// outermost half-maximum crossings of the piecewise-linear envelope.
double fwhm_envelope(const G2Curve& curve, double period_s);

/// 1.39 / (2 pi sqrt(gamma_s gamma_i)).
double t_fwhm_analytic(double gamma_s_hz, double gamma_i_hz);

struct CombPeak {
    double tau_s = 0.0;
    double value = 0.0;
};

/// Follows `count` comb maxima starting near `first_center_s`: each maximum is
/// the densest-scan argmax within +-period/2 of the previous one + period,
/// refined by golden-section search. A negative period walks backwards.
std::vector<CombPeak> locate_comb_peaks(const G2Evaluator& g2, double first_center_s, double period_s, int count,
                                        double scan_step_s);

void write_curve_csv(std::ostream& out, const G2Curve& curve);

}  // namespace cespdc
