#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "core/biphoton.hpp"

namespace cespdc {

enum class JitterModel {
    none,
    gaussian,  // N(0, sigma) added to every tag
    response,  // one-sided exponential, -Exp(rate / 2), same shape as DetectorResponse
};

std::string_view to_string(JitterModel m);
JitterModel jitter_model_from_string(std::string_view name);

/// One detection arm: fiber coupling, filter, detector.
struct DetectionChain {
    double fiber_efficiency = 1.0;      // alpha
    double filter_transmittance = 1.0;  // t
    double detector_efficiency = 1.0;   // eta
    double duty_cycle = 1.0;            // d, 1 for a free-running detector
    double dark_rate_hz = 0.0;
    JitterModel jitter = JitterModel::none;
    double jitter_sigma_s = 0.0;       // gaussian
    double jitter_rate_per_s = 0.0;    // response

    /// Probability that a photon entering the arm produces a click.
    double detection_probability() const {
        return duty_cycle * fiber_efficiency * filter_transmittance * detector_efficiency;
    }
    void validate() const;
};

struct SourceModel {
    double pair_rate_per_s_per_mw = 0.0;  // b
    double pump_power_mw = 0.0;           // P
    BiphotonModel correlation;            // delay density t_signal - t_idler

    double pair_rate() const { return pair_rate_per_s_per_mw * pump_power_mw; }
    void validate() const;
};

struct TimeTagStream {
    std::uint16_t channel = 0;
    std::vector<std::uint64_t> tags_ps;  // ascending
};

struct SimulationSettings {
    double duration_s = 1.0;
    std::uint64_t seed = 0;
    double slab_s = 1e-2;  // generation unit; each slab draws from its own seeded stream
    unsigned workers = 0;  // 0: hardware concurrency; never changes the result
    GridSpec delay_grid{0.05e-12, 5e-9};
};

struct SimulatedStreams {
    TimeTagStream signal;  // channel 1
    TimeTagStream idler;   // channel 2
    std::uint64_t pairs = 0;  // pairs emitted by the source over the run
};

/// Poisson pair emission at rate b P; each photon survives its arm with
/// probability d alpha t eta; the idler leaves at t_pair - tau with tau drawn
/// from the normalized g2 density; tags are jittered per arm, darks added as
/// independent Poisson processes, and tags outside [0, duration) dropped.
SimulatedStreams simulate_timetags(const SourceModel& source, const DetectionChain& signal,
                                   const DetectionChain& idler, const SimulationSettings& settings);

/// Tabulated inverse CDF of the g2 delay density.
class DelaySampler {
public:
    DelaySampler(const BiphotonModel& model, const GridSpec& grid);
    /// u in [0, 1) -> delay in seconds.
    double operator()(double u) const;

private:
    double start_s_ = 0.0;
    double step_s_ = 0.0;
    std::vector<double> density_;
    std::vector<double> cdf_;  // cdf_[i] = mass of cells [0, i), normalized
};

/// Histogram of delays tau = t_signal - t_idler. Bin k (k = -K..K) is centered
/// on k * bin_width and covers [k w - w/2, k w + w/2).
struct CoincidenceHistogram {
    double bin_width_s = 25e-12;
    double range_s = 5e-9;
    double acquisition_s = 0.0;
    int half_bins = 0;  // K
    std::vector<std::uint64_t> counts;

    double delay_s(std::size_t i) const { return (static_cast<double>(i) - half_bins) * bin_width_s; }
    std::uint64_t total() const;
};

/// Every signal/idler pair whose delay falls in a bin is counted once
/// (correlator rule, not nearest-neighbour matching). Bin width and range are
/// rounded to whole picoseconds; K = round(range / bin_width).
CoincidenceHistogram histogram_coincidences(const TimeTagStream& signal, const TimeTagStream& idler,
                                            double bin_width_s, double range_s, double acquisition_s = 0.0,
                                            unsigned workers = 0);

/// Mean bin content over bins with |tau| > 10 * t_fwhm.
double accidental_level(const CoincidenceHistogram& hist, double t_fwhm_s);

/// Counts in bins whose centers lie within [-window/2, window/2].
std::uint64_t window_counts(const CoincidenceHistogram& hist, double window_s);
std::size_t window_bins(const CoincidenceHistogram& hist, double window_s);

struct CarValue {
    double value = 0.0;
    bool lower_bound = false;  // R_ac was zero; value is R_c + 1
};

/// (R_c + R_ac) / R_ac; throws DomainError when R_ac = 0.
double car(double coincidences, double accidentals);

/// Same, but R_ac = 0 yields the lower bound R_c + 1 flagged as such.
CarValue car_or_bound(double coincidences, double accidentals);

/// Pair production rate R / (d alpha_1 alpha_2 t_1 t_2 eta_1 eta_2) per mW per
/// MHz of linewidth. The duty cycle is the signal arm's.
double estimate_brightness(double detected_rate, const DetectionChain& signal, const DetectionChain& idler,
                           double linewidth_hz, double pump_mw);

double heralded_efficiency(double coincidences, double heralding_singles);

/// Noiseless expectation for one pump power.
struct CountsRow {
    double power_mw = 0.0;
    double singles_s = 0.0;      // 1/s
    double singles_i = 0.0;      // 1/s
    double coincidences = 0.0;   // net coincidences in the window, 1/s
    double accidentals = 0.0;    // 1/s in the window
    CarValue car;
    bool car_defined = true;
};

/// Singles R q + dark, true coincidences R q_s q_i * (fraction of the detected
/// delay density inside the window), accidentals S_s S_i W.
CountsRow expected_counts(const SourceModel& source, const DetectionChain& signal, const DetectionChain& idler,
                          double window_s);

/// Same quantities measured from simulated streams and their histogram.
CountsRow measured_counts(double power_mw, const SimulatedStreams& streams, const CoincidenceHistogram& hist,
                          double window_s, double t_fwhm_s);

void write_counts_csv(std::ostream& out, std::span<const CountsRow> rows);

// Time-tag and histogram files.
void write_ttag(std::ostream& out, const TimeTagStream& stream);
TimeTagStream read_ttag(std::istream& in);
void write_ttag_file(const std::filesystem::path& path, const TimeTagStream& stream);
TimeTagStream read_ttag_file(const std::filesystem::path& path);
void write_tags_csv(std::ostream& out, const TimeTagStream& stream);
void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist);

}  // namespace cespdc
