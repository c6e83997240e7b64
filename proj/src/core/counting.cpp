#include "core/counting.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"

namespace cespdc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t slab_seed(std::uint64_t master, std::uint64_t slab) {
    return splitmix64(master ^ splitmix64(slab + 0x5bd1e995ULL));
}

void check_fraction(double v, const char* what) {
    if (!(v > 0.0) || v > 1.0) throw DomainError(std::string("detection chain: ") + what + " must lie in (0, 1]");
}

std::int64_t to_ps(double seconds) { return static_cast<std::int64_t>(std::llround(seconds * 1e12)); }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Applies both arms' timing jitter to an area-normalized delay density.
G2Curve detected_delay_density(const BiphotonModel& model, const DetectionChain& signal, const DetectionChain& idler) {
    G2Curve c = sample_g2(model, GridSpec{}, false);
    auto mirror = [](G2Curve& curve) { std::reverse(curve.values.begin(), curve.values.end()); };
    auto apply = [&](const DetectionChain& chain, bool is_idler) {
        if (chain.jitter == JitterModel::response) {
            // tau = t_s - t_i: an idler shift u <= 0 moves tau by -u >= 0.
            if (is_idler) mirror(c);
            c = convolve_g2(c, DetectorResponse{chain.jitter_rate_per_s, 1.0}, ConvolveOptions{false, 0.0});
            if (is_idler) mirror(c);
        } else if (chain.jitter == JitterModel::gaussian && chain.jitter_sigma_s > 0.0) {
            const double h = c.step_s;
            const auto taps = static_cast<long long>(std::ceil(6.0 * chain.jitter_sigma_s / h));
            std::vector<double> kernel(static_cast<std::size_t>(2 * taps + 1));
            for (long long k = -taps; k <= taps; ++k) {
                const double x = static_cast<double>(k) * h / chain.jitter_sigma_s;
                kernel[static_cast<std::size_t>(k + taps)] = std::exp(-0.5 * x * x);
            }
            double ksum = 0.0;
            for (double v : kernel) ksum += v;
            std::vector<double> out(c.size(), 0.0);
            const auto n = static_cast<long long>(c.size());
            for (long long i = 0; i < n; ++i) {
                double acc = 0.0;
                for (long long k = -taps; k <= taps; ++k) {
                    const long long j = i - k;
                    if (j >= 0 && j < n) acc += c.values[static_cast<std::size_t>(j)] * kernel[static_cast<std::size_t>(k + taps)];
                }
                out[static_cast<std::size_t>(i)] = acc / ksum;
            }
            c.values = std::move(out);
        }
    };
    apply(signal, false);
    apply(idler, true);
    const double area = integrate(c, c.start_s, c.stop_s());
    if (!(area > 0.0)) throw NonFiniteError("delay density has no mass");
    for (double& v : c.values) v /= area;
    return c;
}

}  // namespace

std::string_view to_string(JitterModel m) {
    switch (m) {
        case JitterModel::none: return "none";
        case JitterModel::gaussian: return "gaussian";
        case JitterModel::response: return "response";
    }
    return "none";
}

JitterModel jitter_model_from_string(std::string_view name) {
    if (name == "none") return JitterModel::none;
    if (name == "gaussian") return JitterModel::gaussian;
    if (name == "response") return JitterModel::response;
    throw DomainError("unknown jitter model '" + std::string(name) + "' (expected none, gaussian or response)");
}

void DetectionChain::validate() const {
    check_fraction(fiber_efficiency, "fiber efficiency");
    check_fraction(filter_transmittance, "filter transmittance");
    check_fraction(detector_efficiency, "detector efficiency");
    check_fraction(duty_cycle, "duty cycle");
    if (!(dark_rate_hz >= 0.0)) throw DomainError("detection chain: dark rate must be >= 0");
    if (jitter == JitterModel::gaussian && !(jitter_sigma_s >= 0.0)) {
        throw DomainError("detection chain: jitter sigma must be >= 0");
    }
    if (jitter == JitterModel::response && !(jitter_rate_per_s > 0.0)) {
        throw DomainError("detection chain: response jitter needs a positive rate");
    }
}

void SourceModel::validate() const {
    if (!(pair_rate_per_s_per_mw >= 0.0)) throw DomainError("source: pair rate coefficient must be >= 0");
    if (!(pump_power_mw >= 0.0)) throw DomainError("source: pump power must be >= 0");
    correlation.validate();
}

DelaySampler::DelaySampler(const BiphotonModel& model, const GridSpec& grid) {
    const G2Curve c = sample_g2(model, grid, false);
    start_s_ = c.start_s;
    step_s_ = c.step_s;
    density_ = c.values;
    cdf_.assign(density_.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < density_.size(); ++i) {
        cdf_[i] = acc;
        acc += 0.5 * (density_[i] + density_[i + 1]);
    }
    cdf_.back() = acc;
    if (!(acc > 0.0)) throw NonFiniteError("delay sampler: g2 has no mass on the grid");
    for (double& v : cdf_) v /= acc;
}

double DelaySampler::operator()(double u) const {
    // cdf_ is non-decreasing; find the cell [i, i+1) holding u, uniform inside it.
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end() - 1, u);
    const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cdf_.begin() - 1, 0));
    const double lo = cdf_[i];
    const double hi = cdf_[std::min(i + 1, cdf_.size() - 1)];
    const double f = hi > lo ? (u - lo) / (hi - lo) : 0.5;
    return start_s_ + step_s_ * (static_cast<double>(i) + f);
}

SimulatedStreams simulate_timetags(const SourceModel& source, const DetectionChain& signal,
                                   const DetectionChain& idler, const SimulationSettings& settings) {
    source.validate();
    signal.validate();
    idler.validate();
    if (!(settings.duration_s > 0.0)) throw DomainError("simulate_timetags: duration must be > 0");
    if (!(settings.slab_s > 0.0)) throw DomainError("simulate_timetags: slab length must be > 0");

    const DelaySampler sampler(source.correlation, settings.delay_grid);
    const double rate = source.pair_rate();
    const double q_s = signal.detection_probability();
    const double q_i = idler.detection_probability();
    const auto slabs = static_cast<std::size_t>(std::ceil(settings.duration_s / settings.slab_s));

    struct SlabOut {
        std::vector<std::uint64_t> s, i;
        std::uint64_t pairs = 0;
    };
    std::vector<SlabOut> out(slabs);
    const double duration = settings.duration_s;

    parallel_for(slabs, settings.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            std::mt19937_64 rng(slab_seed(settings.seed, k));
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            const double t0 = static_cast<double>(k) * settings.slab_s;
            const double len = std::min(settings.slab_s, duration - t0);
            auto keep = [&](std::vector<std::uint64_t>& v, double t) {
                if (t < 0.0) return;
                const std::int64_t ps = to_ps(t);
                if (ps >= 0 && static_cast<double>(ps) < duration * 1e12) v.push_back(static_cast<std::uint64_t>(ps));
            };
            auto jitter = [&](const DetectionChain& chain) {
                switch (chain.jitter) {
                    case JitterModel::gaussian:
                        return chain.jitter_sigma_s > 0.0
                                   ? std::normal_distribution<double>(0.0, chain.jitter_sigma_s)(rng)
                                   : 0.0;
                    case JitterModel::response:
                        return -std::exponential_distribution<double>(0.5 * chain.jitter_rate_per_s)(rng);
                    case JitterModel::none: break;
                }
                return 0.0;
            };
            SlabOut& o = out[k];
            const auto n = rate > 0.0 ? std::poisson_distribution<std::uint64_t>(rate * len)(rng) : 0;
            o.pairs = n;
            for (std::uint64_t p = 0; p < n; ++p) {
                const double t = t0 + len * uni(rng);
                const double tau = sampler(uni(rng));
                const bool det_s = uni(rng) < q_s;
                const bool det_i = uni(rng) < q_i;
                if (det_s) keep(o.s, t + jitter(signal));
                if (det_i) keep(o.i, t - tau + jitter(idler));
            }
            auto darks = [&](const DetectionChain& chain, std::vector<std::uint64_t>& v) {
                if (!(chain.dark_rate_hz > 0.0)) return;
                const auto nd = std::poisson_distribution<std::uint64_t>(chain.dark_rate_hz * len)(rng);
                for (std::uint64_t d = 0; d < nd; ++d) keep(v, t0 + len * uni(rng));
            };
            darks(signal, o.s);
            darks(idler, o.i);
        }
    });

    SimulatedStreams result;
    result.signal.channel = 1;
    result.idler.channel = 2;
    std::size_t ns = 0, ni = 0;
    for (const auto& o : out) {
        ns += o.s.size();
        ni += o.i.size();
        result.pairs += o.pairs;
    }
    result.signal.tags_ps.reserve(ns);
    result.idler.tags_ps.reserve(ni);
    for (const auto& o : out) {
        result.signal.tags_ps.insert(result.signal.tags_ps.end(), o.s.begin(), o.s.end());
        result.idler.tags_ps.insert(result.idler.tags_ps.end(), o.i.begin(), o.i.end());
    }
    std::sort(result.signal.tags_ps.begin(), result.signal.tags_ps.end());
    std::sort(result.idler.tags_ps.begin(), result.idler.tags_ps.end());
    return result;
}

std::uint64_t CoincidenceHistogram::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

CoincidenceHistogram histogram_coincidences(const TimeTagStream& signal, const TimeTagStream& idler,
                                            double bin_width_s, double range_s, double acquisition_s,
                                            unsigned workers) {
    const std::int64_t w = to_ps(bin_width_s);
    if (w < 1) throw DomainError("histogram: bin width must be at least 1 ps");
    if (!(range_s >= bin_width_s)) throw DomainError("histogram: range must be at least one bin width");
    if (!std::is_sorted(signal.tags_ps.begin(), signal.tags_ps.end())) {
        throw PreconditionError("histogram: signal stream is not time-sorted");
    }
    if (!std::is_sorted(idler.tags_ps.begin(), idler.tags_ps.end())) {
        throw PreconditionError("histogram: idler stream is not time-sorted");
    }
    CoincidenceHistogram h;
    h.bin_width_s = static_cast<double>(w) * 1e-12;
    h.half_bins = static_cast<int>(std::llround(range_s / h.bin_width_s));
    h.range_s = h.half_bins * h.bin_width_s;
    h.acquisition_s = acquisition_s;
    const std::size_t nbins = static_cast<std::size_t>(2 * h.half_bins + 1);
    h.counts.assign(nbins, 0);

    const std::int64_t K = h.half_bins;
    // Bin k holds 2d in [2kw - w, 2kw + w); accepted delays: lo <= 2d < hi.
    const std::int64_t lo2 = -2 * K * w - w;
    const std::int64_t hi2 = 2 * K * w + w;
    const auto& S = signal.tags_ps;
    const auto& I = idler.tags_ps;

    const unsigned nw = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(S.size() / 65536, 1)));
    std::vector<std::vector<std::uint64_t>> partial(nw, std::vector<std::uint64_t>(nbins, 0));
    const std::size_t chunk = (S.size() + nw - 1) / std::max<unsigned>(nw, 1);
    parallel_for(nw, nw, [&](std::size_t wb, std::size_t we) {
        for (std::size_t part = wb; part < we; ++part) {
            auto& counts = partial[part];
            const std::size_t b = std::min(S.size(), part * chunk);
            const std::size_t e = std::min(S.size(), b + chunk);
            if (b >= e) continue;
            // first idler with 2(ts - ti) < hi2, i.e. 2 ti > 2 ts - hi2
            std::size_t j0 = 0;
            {
                const auto ts = static_cast<std::int64_t>(S[b]);
                j0 = static_cast<std::size_t>(std::upper_bound(I.begin(), I.end(), 0, [&](int, std::uint64_t ti) {
                         return 2 * static_cast<std::int64_t>(ti) > 2 * ts - hi2;
                     }) - I.begin());
            }
            for (std::size_t a = b; a < e; ++a) {
                const auto ts = static_cast<std::int64_t>(S[a]);
                while (j0 < I.size() && 2 * static_cast<std::int64_t>(I[j0]) <= 2 * ts - hi2) ++j0;
                for (std::size_t j = j0; j < I.size(); ++j) {
                    const std::int64_t d2 = 2 * (ts - static_cast<std::int64_t>(I[j]));
                    if (d2 < lo2) break;
                    const std::int64_t k = floor_div(d2 + w, 2 * w);
                    ++counts[static_cast<std::size_t>(k + K)];
                }
            }
        }
    });
    for (const auto& p : partial) {
        for (std::size_t i = 0; i < nbins; ++i) h.counts[i] += p[i];
    }
    return h;
}

double accidental_level(const CoincidenceHistogram& hist, double t_fwhm_s) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        if (std::abs(hist.delay_s(i)) > 10.0 * t_fwhm_s) {
            sum += static_cast<double>(hist.counts[i]);
            ++n;
        }
    }
    if (n == 0) throw UnderdeterminedError("accidental_level: histogram range has no bins beyond 10 x T_FWHM");
    return sum / static_cast<double>(n);
}

std::size_t window_bins(const CoincidenceHistogram& hist, double window_s) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        if (std::abs(hist.delay_s(i)) <= 0.5 * window_s + 1e-18) ++n;
    }
    return n;
}

std::uint64_t window_counts(const CoincidenceHistogram& hist, double window_s) {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        if (std::abs(hist.delay_s(i)) <= 0.5 * window_s + 1e-18) n += hist.counts[i];
    }
    return n;
}

double car(double coincidences, double accidentals) {
    if (!(coincidences >= 0.0) || !(accidentals >= 0.0)) throw DomainError("car: counts must be >= 0");
    if (accidentals == 0.0) throw DomainError("car: undefined for zero accidental coincidences");
    return (coincidences + accidentals) / accidentals;
}

CarValue car_or_bound(double coincidences, double accidentals) {
    if (!(coincidences >= 0.0) || !(accidentals >= 0.0)) throw DomainError("car: counts must be >= 0");
    if (accidentals == 0.0) return {coincidences + 1.0, true};
    return {car(coincidences, accidentals), false};
}

double estimate_brightness(double detected_rate, const DetectionChain& signal, const DetectionChain& idler,
                           double linewidth_hz, double pump_mw) {
    signal.validate();
    idler.validate();
    if (!(pump_mw > 0.0)) throw DomainError("estimate_brightness: pump power must be > 0");
    if (!(linewidth_hz > 0.0)) throw DomainError("estimate_brightness: linewidth must be > 0");
    if (!(detected_rate >= 0.0)) throw DomainError("estimate_brightness: detected rate must be >= 0");
    const double denom = signal.duty_cycle * signal.fiber_efficiency * idler.fiber_efficiency *
                         signal.filter_transmittance * idler.filter_transmittance * signal.detector_efficiency *
                         idler.detector_efficiency;
    return detected_rate / denom / pump_mw / (linewidth_hz * 1e-6);
}

double heralded_efficiency(double coincidences, double heralding_singles) {
    if (!(heralding_singles > 0.0)) throw DomainError("heralded_efficiency: heralding singles must be > 0");
    if (!(coincidences >= 0.0)) throw DomainError("heralded_efficiency: coincidences must be >= 0");
    return coincidences / heralding_singles;
}

CountsRow expected_counts(const SourceModel& source, const DetectionChain& signal, const DetectionChain& idler,
                          double window_s) {
    source.validate();
    signal.validate();
    idler.validate();
    if (!(window_s > 0.0)) throw DomainError("expected_counts: coincidence window must be > 0");
    const G2Curve density = detected_delay_density(source.correlation, signal, idler);
    const double inside = integrate(density, -0.5 * window_s, 0.5 * window_s);
    const double rate = source.pair_rate();
    CountsRow row;
    row.power_mw = source.pump_power_mw;
    row.singles_s = rate * signal.detection_probability() + signal.dark_rate_hz;
    row.singles_i = rate * idler.detection_probability() + idler.dark_rate_hz;
    row.coincidences = rate * signal.detection_probability() * idler.detection_probability() * inside;
    row.accidentals = row.singles_s * row.singles_i * window_s;
    row.car = car_or_bound(row.coincidences, row.accidentals);
    row.car_defined = !row.car.lower_bound;
    return row;
}

CountsRow measured_counts(double power_mw, const SimulatedStreams& streams, const CoincidenceHistogram& hist,
                          double window_s, double t_fwhm_s) {
    if (!(hist.acquisition_s > 0.0)) throw DomainError("measured_counts: histogram has no acquisition time");
    const double T = hist.acquisition_s;
    CountsRow row;
    row.power_mw = power_mw;
    row.singles_s = static_cast<double>(streams.signal.tags_ps.size()) / T;
    row.singles_i = static_cast<double>(streams.idler.tags_ps.size()) / T;
    const double raw = static_cast<double>(window_counts(hist, window_s));
    row.accidentals = accidental_level(hist, t_fwhm_s) * static_cast<double>(window_bins(hist, window_s));
    row.coincidences = std::max(raw - row.accidentals, 0.0) / T;
    row.accidentals /= T;
    row.car = car_or_bound(row.coincidences, row.accidentals);
    row.car_defined = !row.car.lower_bound;
    return row;
}

void write_counts_csv(std::ostream& out, std::span<const CountsRow> rows) {
    CsvWriter csv(out, {"power_mw", "singles_s", "singles_i", "coincidences", "car"});
    for (const auto& r : rows) {
        if (r.car_defined) csv.row(r.power_mw, r.singles_s, r.singles_i, r.coincidences, r.car.value);
        else csv.row(r.power_mw, r.singles_s, r.singles_i, r.coincidences, std::string_view{});
    }
}

}  // namespace cespdc
