#include "core/biphoton.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "core/constants.hpp"
#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"

namespace cespdc {

namespace {

using cplx = std::complex<double>;

cplx complex_sinc(cplx z) {
    if (std::abs(z) < 1e-4) return 1.0 - z * z / 6.0;
    return std::sin(z) / z;
}

double weight_at(const std::vector<double>& w, int m, int modes) {
    return w.empty() ? 1.0 : w[static_cast<std::size_t>(m + modes)];
}

std::string describe(const BiphotonModel& m) {
    std::ostringstream os;
    os << "g2 gamma_s=" << m.gamma_s_hz << "Hz gamma_i=" << m.gamma_i_hz << "Hz fsr_s=" << m.fsr_s_hz
       << "Hz fsr_i=" << m.fsr_i_hz << "Hz tau0=" << m.tau0_s << "s M=" << m.modes
       << (m.signal_weights.empty() ? " uniform" : " weighted");
    return os.str();
}

}  // namespace

void BiphotonModel::validate() const {
    if (!(gamma_s_hz > 0.0) || !(gamma_i_hz > 0.0)) throw DomainError("biphoton: damping rates must be > 0");
    if (!(tau0_s >= 0.0)) throw DomainError("biphoton: tau0 must be >= 0");
    if (modes < 0 || modes > kMaxModeTruncation) throw DomainError("biphoton: mode truncation must lie in [0, 512]");
    if (modes > 0 && (!(fsr_s_hz > 0.0) || !(fsr_i_hz > 0.0))) {
        throw DomainError("biphoton: multi-mode model needs positive FSRs");
    }
    const auto expected = static_cast<std::size_t>(2 * modes + 1);
    if (!signal_weights.empty() && signal_weights.size() != expected) {
        throw DomainError("biphoton: signal weights must have 2M+1 entries");
    }
    if (!idler_weights.empty() && idler_weights.size() != expected) {
        throw DomainError("biphoton: idler weights must have 2M+1 entries");
    }
}

nlohmann::json BiphotonModel::to_json() const {
    nlohmann::json j{{"gamma_s_hz", gamma_s_hz}, {"gamma_i_hz", gamma_i_hz}, {"fsr_s_hz", fsr_s_hz},
                     {"fsr_i_hz", fsr_i_hz},     {"omega_s_hz", omega_s_hz}, {"omega_i_hz", omega_i_hz},
                     {"tau0_s", tau0_s},         {"modes", modes}};
    if (!signal_weights.empty()) j["signal_weights"] = signal_weights;
    if (!idler_weights.empty()) j["idler_weights"] = idler_weights;
    return j;
}

BiphotonModel BiphotonModel::from_json(const nlohmann::json& doc) {
    BiphotonModel m;
    m.gamma_s_hz = doc.at("gamma_s_hz").get<double>();
    m.gamma_i_hz = doc.at("gamma_i_hz").get<double>();
    m.fsr_s_hz = doc.value("fsr_s_hz", 0.0);
    m.fsr_i_hz = doc.value("fsr_i_hz", 0.0);
    m.omega_s_hz = doc.value("omega_s_hz", 1.0);
    m.omega_i_hz = doc.value("omega_i_hz", 1.0);
    m.tau0_s = doc.value("tau0_s", 0.0);
    m.modes = doc.value("modes", 0);
    if (doc.contains("signal_weights")) m.signal_weights = doc.at("signal_weights").get<std::vector<double>>();
    if (doc.contains("idler_weights")) m.idler_weights = doc.at("idler_weights").get<std::vector<double>>();
    m.validate();
    return m;
}

BiphotonModel with_envelope_weights(BiphotonModel model, const std::function<double(double)>& amplitude) {
    model.modes = 0;
    model.signal_weights.clear();
    model.idler_weights.clear();
    model.validate();
    if (!(model.fsr_s_hz > 0.0) || !(model.fsr_i_hz > 0.0)) {
        throw DomainError("with_envelope_weights: FSRs must be > 0");
    }
    const double w0 = std::max(std::abs(amplitude(0.0)), 0.0);
    if (!(w0 > 0.0)) throw DomainError("with_envelope_weights: envelope vanishes at zero detuning");
    const double base = 0.5 * (model.gamma_s_hz + model.gamma_i_hz);
    const double fsr_min = std::min(model.fsr_s_hz, model.fsr_i_hz);
    int last = 0;
    for (int m = 1; m <= kMaxModeTruncation; ++m) {
        const double env = std::max(std::abs(amplitude(m * model.fsr_s_hz)), std::abs(amplitude(-m * model.fsr_i_hz)));
        const double denom = std::abs(cplx(base, m * fsr_min));
        if (env / w0 * base / denom >= kModeWeightCutoff) last = m;
    }
    model.modes = last;
    model.signal_weights.resize(static_cast<std::size_t>(2 * last + 1));
    model.idler_weights.resize(static_cast<std::size_t>(2 * last + 1));
    for (int m = -last; m <= last; ++m) {
        model.signal_weights[static_cast<std::size_t>(m + last)] = std::abs(amplitude(m * model.fsr_s_hz)) / w0;
        model.idler_weights[static_cast<std::size_t>(m + last)] = std::abs(amplitude(-m * model.fsr_i_hz)) / w0;
    }
    return model;
}

G2Evaluator::G2Evaluator(const BiphotonModel& model) : model_(model) {
    model_.validate();
    const int M = model_.modes;
    const std::size_t n = static_cast<std::size_t>(2 * M + 1);
    const double prefactor =
        std::sqrt(model_.gamma_s_hz * model_.gamma_i_hz * std::abs(model_.omega_s_hz * model_.omega_i_hz));
    const double scale = prefactor > 0.0 ? prefactor : 1.0;
    signal_coeff_.assign(n, cplx{});
    idler_coeff_.assign(n, cplx{});
    auto gamma_s = [&](int m) { return cplx(0.5 * model_.gamma_s_hz, m * model_.fsr_s_hz); };
    auto gamma_i = [&](int m) { return cplx(0.5 * model_.gamma_i_hz, m * model_.fsr_i_hz); };
    for (int ms = -M; ms <= M; ++ms) {
        const double ws = weight_at(model_.signal_weights, ms, M);
        for (int mi = -M; mi <= M; ++mi) {
            const double wi = weight_at(model_.idler_weights, mi, M);
            const cplx term = ws * wi * scale / (gamma_s(ms) + gamma_i(mi));
            signal_coeff_[static_cast<std::size_t>(ms + M)] += term;
            idler_coeff_[static_cast<std::size_t>(mi + M)] += term;
        }
    }
    const double t0 = model_.tau0_s;
    for (int m = -M; m <= M; ++m) {
        signal_coeff_[static_cast<std::size_t>(m + M)] *= complex_sinc(cplx(0.0, kPi * t0) * gamma_s(m));
        idler_coeff_[static_cast<std::size_t>(m + M)] *= complex_sinc(cplx(0.0, kPi * t0) * gamma_i(m));
    }
}

cplx G2Evaluator::amplitude(double tau_s) const {
    const int M = model_.modes;
    const double u = tau_s - 0.5 * model_.tau0_s;
    const bool signal_branch = u >= 0.0;
    const double gamma = signal_branch ? model_.gamma_s_hz : model_.gamma_i_hz;
    const double fsr = signal_branch ? model_.fsr_s_hz : model_.fsr_i_hz;
    const auto& coeff = signal_branch ? signal_coeff_ : idler_coeff_;
    // Signal branch: exp(-2 pi Gamma_s u); idler branch: exp(+2 pi Gamma_i u).
    const double sign = signal_branch ? -1.0 : 1.0;
    const double decay = std::exp(sign * kTwoPi * 0.5 * gamma * u);
    cplx sum = coeff[static_cast<std::size_t>(M)];
    if (M > 0) {
        const cplx step = std::polar(1.0, sign * kTwoPi * fsr * u);
        cplx up = 1.0;
        for (int m = 1; m <= M; ++m) {
            up *= step;
            sum += coeff[static_cast<std::size_t>(M + m)] * up + coeff[static_cast<std::size_t>(M - m)] * std::conj(up);
        }
    }
    return decay * sum;
}

double g2(const BiphotonModel& model, double tau_s) { return G2Evaluator(model)(tau_s); }

G2Curve sample_g2(const BiphotonModel& model, const GridSpec& grid, bool normalize, unsigned workers) {
    if (!(grid.step_s > 0.0) || !(grid.half_span_s > 0.0)) throw DomainError("sample_g2: grid step and span must be > 0");
    const G2Evaluator eval(model);
    const auto half = static_cast<std::size_t>(std::llround(grid.half_span_s / grid.step_s));
    G2Curve curve;
    curve.step_s = grid.step_s;
    curve.start_s = -static_cast<double>(half) * grid.step_s;
    curve.values.resize(2 * half + 1);
    curve.model = describe(model);
    curve.truncation = model.modes;
    parallel_for(curve.values.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) curve.values[i] = eval(curve.tau(i));
    });
    if (normalize) normalize_peak(curve);
    return curve;
}

double detector_response(const DetectorResponse& response, double t_s) {
    if (!(response.rate_per_s > 0.0)) throw DomainError("detector_response: rate must be > 0");
    if (t_s > 0.0) return 0.0;
    return response.amplitude * std::exp(0.5 * response.rate_per_s * t_s);
}

void normalize_peak(G2Curve& curve) {
    const double peak = curve.values.empty() ? 0.0 : *std::max_element(curve.values.begin(), curve.values.end());
    if (!(peak > 0.0)) throw DomainError("normalize_peak: curve has no positive sample");
    for (double& v : curve.values) v /= peak;
}

G2Curve convolve_g2(const G2Curve& curve, const DetectorResponse& response, const ConvolveOptions& options) {
    if (!(response.rate_per_s > 0.0)) throw DomainError("convolve_g2: detector rate must be > 0");
    if (curve.size() < 2) throw PreconditionError("convolve_g2: curve needs at least two samples");
    if (curve.step_s > kMaxConvolutionStep * (1.0 + 1e-12)) {
        throw PreconditionError("convolve_g2: grid step above 1 ps cannot resolve sub-25 ps structure");
    }
    G2Curve out = curve;
    const double h = curve.step_s;
    const double r = std::exp(-0.5 * response.rate_per_s * h);
    // out_k = h * sum_{j >= k} g_j * alpha * r^(j - k)
    double acc = 0.0;
    for (std::size_t k = curve.size(); k-- > 0;) {
        acc = curve.values[k] + r * acc;
        out.values[k] = response.amplitude * h * acc;
    }
    std::ostringstream os;
    os << curve.model << " * response(rate=" << response.rate_per_s << "/s)";
    out.model = os.str();
    if (options.rebin_s > 0.0) out = rebin(out, options.rebin_s);
    if (options.normalize) normalize_peak(out);
    return out;
}

double integrate(const G2Curve& curve, double a_s, double b_s) {
    if (curve.size() < 2) return 0.0;
    const double lo = std::max(a_s, curve.start_s);
    const double hi = std::min(b_s, curve.stop_s());
    if (!(hi > lo)) return 0.0;
    const double h = curve.step_s;
    auto value_at = [&](double t) {
        const double x = (t - curve.start_s) / h;
        auto i = static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, static_cast<double>(curve.size() - 2)));
        const double f = x - static_cast<double>(i);
        return curve.values[i] * (1.0 - f) + curve.values[i + 1] * f;
    };
    const double x_lo = (lo - curve.start_s) / h;
    const double x_hi = (hi - curve.start_s) / h;
    const auto i_lo = static_cast<std::size_t>(std::ceil(x_lo - 1e-9));
    const auto i_hi = static_cast<std::size_t>(std::floor(x_hi + 1e-9));
    if (i_lo > i_hi) return 0.5 * (value_at(lo) + value_at(hi)) * (hi - lo);
    const double t_lo = curve.tau(i_lo);
    const double t_hi = curve.tau(i_hi);
    double sum = 0.5 * (value_at(lo) + curve.values[i_lo]) * std::max(t_lo - lo, 0.0);
    for (std::size_t i = i_lo; i < i_hi; ++i) sum += 0.5 * (curve.values[i] + curve.values[i + 1]) * h;
    sum += 0.5 * (curve.values[i_hi] + value_at(hi)) * std::max(hi - t_hi, 0.0);
    return sum;
}

G2Curve rebin(const G2Curve& curve, double bin_s) {
    if (!(bin_s >= curve.step_s)) throw PreconditionError("rebin: bin narrower than the grid step");
    const double half = 0.5 * bin_s;
    const auto k_lo = static_cast<long long>(std::ceil((curve.start_s + half) / bin_s - 1e-9));
    const auto k_hi = static_cast<long long>(std::floor((curve.stop_s() - half) / bin_s + 1e-9));
    if (k_hi < k_lo) throw PreconditionError("rebin: grid shorter than one bin");
    G2Curve out;
    out.step_s = bin_s;
    out.start_s = static_cast<double>(k_lo) * bin_s;
    out.model = curve.model + " rebinned";
    out.truncation = curve.truncation;
    out.values.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (long long k = k_lo; k <= k_hi; ++k) {
        const double c = static_cast<double>(k) * bin_s;
        out.values.push_back(integrate(curve, c - half, c + half) / bin_s);
    }
    return out;
}

namespace {

struct HalfMaxCrossings {
    double left = 0.0;
    double right = 0.0;
};

HalfMaxCrossings outermost_crossings(const std::vector<double>& t, const std::vector<double>& v) {
    const auto it = std::max_element(v.begin(), v.end());
    const auto imax = static_cast<std::size_t>(it - v.begin());
    if (imax == 0 || imax + 1 == v.size()) throw DomainError("fwhm: ill-posed, maximum at the grid edge");
    const double half = 0.5 * *it;
    std::size_t i = 0;
    while (v[i] < half) ++i;
    if (i == 0) throw DomainError("fwhm: ill-posed, curve above half maximum at the left edge");
    std::size_t j = v.size() - 1;
    while (v[j] < half) --j;
    if (j + 1 == v.size()) throw DomainError("fwhm: ill-posed, curve above half maximum at the right edge");
    HalfMaxCrossings c;
    c.left = t[i - 1] + (half - v[i - 1]) / (v[i] - v[i - 1]) * (t[i] - t[i - 1]);
    c.right = t[j] + (v[j] - half) / (v[j] - v[j + 1]) * (t[j + 1] - t[j]);
    return c;
}

}  // namespace

double fwhm(const G2Curve& curve) {
    if (curve.size() < 3) throw DomainError("fwhm: curve too short");
    std::vector<double> t(curve.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = curve.tau(i);
    const auto c = outermost_crossings(t, curve.values);
    return c.right - c.left;
}

double fwhm_envelope(const G2Curve& curve, double period_s) {
    if (!(period_s > 2.0 * curve.step_s)) throw DomainError("fwhm_envelope: period must span several samples");
    const auto imax = static_cast<std::size_t>(std::max_element(curve.values.begin(), curve.values.end()) -
                                               curve.values.begin());
    const double t_peak = curve.tau(imax);
    // One maximum per window [t_peak + (k - 1/2) P, t_peak + (k + 1/2) P).
    const auto k_min = static_cast<long long>(std::floor((curve.start_s - t_peak) / period_s + 0.5));
    const auto k_max = static_cast<long long>(std::ceil((curve.stop_s() - t_peak) / period_s - 0.5));
    std::vector<double> et;
    std::vector<double> ev;
    for (long long k = k_min; k <= k_max; ++k) {
        const double lo = t_peak + (static_cast<double>(k) - 0.5) * period_s;
        const double hi = t_peak + (static_cast<double>(k) + 0.5) * period_s;
        double best = -1.0;
        double best_t = 0.0;
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const double t = curve.tau(i);
            if (t < lo || t >= hi) continue;
            if (curve.values[i] > best) {
                best = curve.values[i];
                best_t = t;
            }
        }
        if (best >= 0.0) {
            et.push_back(best_t);
            ev.push_back(best);
        }
    }
    if (et.size() < 3) throw DomainError("fwhm_envelope: too few comb periods on the grid");
    const auto ipk = static_cast<std::size_t>(std::max_element(ev.begin(), ev.end()) - ev.begin());
    for (std::size_t i = ipk + 1; i < ev.size(); ++i) ev[i] = std::min(ev[i], ev[i - 1]);
    for (std::size_t i = ipk; i-- > 0;) ev[i] = std::min(ev[i], ev[i + 1]);
    const auto c = outermost_crossings(et, ev);
    return c.right - c.left;
}

double t_fwhm_analytic(double gamma_s_hz, double gamma_i_hz) {
    if (!(gamma_s_hz > 0.0) || !(gamma_i_hz > 0.0)) throw DomainError("t_fwhm_analytic: rates must be > 0");
    return 1.39 / (kTwoPi * std::sqrt(gamma_s_hz * gamma_i_hz));
}

std::vector<CombPeak> locate_comb_peaks(const G2Evaluator& g2, double first_center_s, double period_s, int count,
                                        double scan_step_s) {
    if (period_s == 0.0 || !(scan_step_s > 0.0) || count < 1) throw DomainError("locate_comb_peaks: bad arguments");
    const double p = std::abs(period_s);
    std::vector<CombPeak> peaks;
    double center = first_center_s;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int k = 0; k < count; ++k) {
        const auto n = static_cast<int>(std::ceil(p / scan_step_s));
        double best_t = center;
        double best_v = -1.0;
        for (int i = 0; i <= n; ++i) {
            const double t = center - 0.5 * p + p * i / n;
            const double v = g2(t);
            if (v > best_v) {
                best_v = v;
                best_t = t;
            }
        }
        double a = best_t - scan_step_s;
        double b = best_t + scan_step_s;
        for (int it = 0; it < 60; ++it) {
            const double c = b - inv_phi * (b - a);
            const double d = a + inv_phi * (b - a);
            if (g2(c) > g2(d)) b = d;
            else a = c;
        }
        const double t = 0.5 * (a + b);
        const double v = g2(t);
        peaks.push_back(v >= best_v ? CombPeak{t, v} : CombPeak{best_t, best_v});
        center = peaks.back().tau_s + period_s;
    }
    return peaks;
}

void write_curve_csv(std::ostream& out, const G2Curve& curve) {
    CsvWriter csv(out, {"tau_s", "value"});
    for (std::size_t i = 0; i < curve.size(); ++i) csv.row(curve.tau(i), curve.values[i]);
}

}  // namespace cespdc
