#include "core/model_fits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/constants.hpp"
#include "core/error.hpp"

namespace cespdc {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

double wrap_phase(double phi) {
    phi = std::remainder(phi, kTwoPi);
    return phi <= -kPi ? phi + kTwoPi : phi;
}

}  // namespace

// ---- Lorentzian cavity scan ----

double lorentzian_peak_model(const LorentzianGuess& p, double nu_hz) {
    const double hw = 0.5 * p.fwhm_hz;
    const double d = nu_hz - p.center_hz;
    return p.offset + p.amplitude * hw * hw / (d * d + hw * hw);
}

LorentzianGuess guess_lorentzian(std::span<const ScanSample> scan) {
    if (scan.size() < 4) throw UnderdeterminedError("lorentzian fit: need at least 4 samples");
    auto by_value = [](const ScanSample& a, const ScanSample& b) { return a.transmission < b.transmission; };
    const auto imax = static_cast<std::size_t>(std::max_element(scan.begin(), scan.end(), by_value) - scan.begin());
    const double lo = std::min_element(scan.begin(), scan.end(), by_value)->transmission;
    LorentzianGuess g;
    g.offset = lo;
    g.amplitude = scan[imax].transmission - lo;
    g.center_hz = scan[imax].freq_hz;
    const double half = lo + 0.5 * g.amplitude;
    std::size_t l = imax, r = imax;
    while (l > 0 && scan[l].transmission > half) --l;
    while (r + 1 < scan.size() && scan[r].transmission > half) ++r;
    g.fwhm_hz = std::abs(scan[r].freq_hz - scan[l].freq_hz);
    const double span = std::abs(scan.back().freq_hz - scan.front().freq_hz);
    if (!(g.fwhm_hz > 0.0)) g.fwhm_hz = span / static_cast<double>(scan.size());
    return g;
}

Eigen::VectorXd lorentzian_residuals(std::span<const ScanSample> scan, const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(scan.size()));
    const LorentzianGuess g{p[0], p[1], p[2], p[3]};
    for (std::size_t i = 0; i < scan.size(); ++i) {
        r[static_cast<Eigen::Index>(i)] = lorentzian_peak_model(g, scan[i].freq_hz) - scan[i].transmission;
    }
    return r;
}

Eigen::MatrixXd lorentzian_jacobian(std::span<const ScanSample> scan, const Eigen::VectorXd& p) {
    Eigen::MatrixXd J(static_cast<Eigen::Index>(scan.size()), 4);
    const double hw = 0.5 * p[1];
    for (std::size_t i = 0; i < scan.size(); ++i) {
        const double d = scan[i].freq_hz - p[0];
        const double den = d * d + hw * hw;
        const double shape = hw * hw / den;
        const auto row = static_cast<Eigen::Index>(i);
        J(row, 0) = p[2] * hw * hw * 2.0 * d / (den * den);
        // d/dw of hw^2/(d^2+hw^2), hw = w/2
        J(row, 1) = p[2] * hw * d * d / (den * den);
        J(row, 2) = shape;
        J(row, 3) = 1.0;
    }
    return J;
}

FitResult fit_lorentzian_scan(std::span<const ScanSample> scan, std::optional<LorentzianGuess> guess) {
    const LorentzianGuess g0 = guess ? *guess : guess_lorentzian(scan);
    const double span = std::abs(scan.back().freq_hz - scan.front().freq_hz);
    if (!(g0.fwhm_hz > 0.0)) throw DomainError("lorentzian fit: FWHM guess must be > 0");
    if (span < 3.0 * g0.fwhm_hz) throw PreconditionError("lorentzian fit: scan spans less than 3 x the FWHM guess");

    const double shift = std::accumulate(scan.begin(), scan.end(), 0.0,
                                         [](double a, const ScanSample& s) { return a + s.freq_hz; }) /
                         static_cast<double>(scan.size());
    std::vector<ScanSample> local(scan.begin(), scan.end());
    for (auto& s : local) s.freq_hz -= shift;

    FitProblem prob;
    prob.names = {"center_hz", "fwhm_hz", "amplitude", "offset"};
    prob.initial = vec({g0.center_hz - shift, g0.fwhm_hz, g0.amplitude, g0.offset});
    prob.lower = vec({-INFINITY, span * 1e-9, -INFINITY, -INFINITY});
    prob.upper = vec({INFINITY, INFINITY, INFINITY, INFINITY});

    const auto flat = std::minmax_element(scan.begin(), scan.end(), [](const ScanSample& a, const ScanSample& b) {
        return a.transmission < b.transmission;
    });
    if (flat.first->transmission == flat.second->transmission) {
        FitResult r;
        r.converged = false;
        r.reason = "degenerate series (constant)";
        r.residual_count = scan.size();
        for (Eigen::Index i = 0; i < 4; ++i) r.params.push_back({prob.names[static_cast<std::size_t>(i)], prob.initial[i], 0.0, false});
        r.params[0].value += shift;
        return r;
    }

    prob.residual = [&](const Eigen::VectorXd& p) { return lorentzian_residuals(local, p); };
    prob.jacobian = [&](const Eigen::VectorXd& p) { return lorentzian_jacobian(local, p); };
    FitResult r = least_squares(prob);
    r.params[0].value += shift;
    return r;
}

// ---- coincidence histogram ----

HistogramSeries to_series(const CoincidenceHistogram& hist) {
    HistogramSeries s;
    s.bin_width_s = hist.bin_width_s;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        s.delay_s.push_back(hist.delay_s(i));
        s.counts.push_back(static_cast<double>(hist.counts[i]));
    }
    return s;
}

HistogramSeries to_series(const G2Curve& curve) {
    HistogramSeries s;
    s.bin_width_s = curve.step_s;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        s.delay_s.push_back(curve.tau(i));
        s.counts.push_back(curve.values[i]);
    }
    return s;
}

std::vector<double> g2_histogram_model(const HistogramSeries& data, const BiphotonModel& model,
                                       double detector_rate_per_s, double amplitude, double background,
                                       double grid_step_s) {
    if (data.delay_s.empty()) throw UnderdeterminedError("g2 fit: empty histogram");
    const auto [lo, hi] = std::minmax_element(data.delay_s.begin(), data.delay_s.end());
    const double reach = std::max(std::abs(*lo), std::abs(*hi)) + data.bin_width_s + 1e-9;
    const G2Curve raw = sample_g2(model, GridSpec{grid_step_s, reach}, false);
    const G2Curve conv = convolve_g2(raw, DetectorResponse{detector_rate_per_s, 1.0});
    std::vector<double> out(data.delay_s.size());
    const double w = data.bin_width_s;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double c = data.delay_s[i];
        const double avg = w > conv.step_s ? integrate(conv, c - 0.5 * w, c + 0.5 * w) / w
                                           : integrate(conv, c - 0.5 * conv.step_s, c + 0.5 * conv.step_s) / conv.step_s;
        out[i] = amplitude * avg + background;
    }
    return out;
}

FitResult fit_g2_histogram(const HistogramSeries& data, const G2FitPriors& priors) {
    if (data.delay_s.size() != data.counts.size()) throw PreconditionError("g2 fit: delay/count size mismatch");
    if (data.counts.size() < 5) throw UnderdeterminedError("g2 fit: need at least 5 bins");
    priors.model.validate();
    if (!(priors.detector_rate_per_s > 0.0)) throw DomainError("g2 fit: detector rate prior must be > 0");

    const double t_fwhm = t_fwhm_analytic(priors.model.gamma_s_hz, priors.model.gamma_i_hz);
    const auto [lo, hi] = std::minmax_element(data.delay_s.begin(), data.delay_s.end());
    if (*lo > -5.0 * t_fwhm || *hi < 5.0 * t_fwhm) {
        throw PreconditionError("g2 fit: histogram must cover +-5 x the expected T_FWHM");
    }

    // Background start: mean of bins beyond 5 T_FWHM.
    double bg_sum = 0.0;
    std::size_t bg_n = 0;
    for (std::size_t i = 0; i < data.counts.size(); ++i) {
        if (std::abs(data.delay_s[i]) > 5.0 * t_fwhm) {
            bg_sum += data.counts[i];
            ++bg_n;
        }
    }
    const double bg0 = bg_n ? bg_sum / static_cast<double>(bg_n) : 0.0;
    const double peak = *std::max_element(data.counts.begin(), data.counts.end());

    std::vector<double> weights(data.counts.size(), 1.0);
    if (priors.poisson_weights) {
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = 1.0 / std::sqrt(std::max(data.counts[i], 1.0));
    }

    FitProblem prob;
    prob.names = {"gamma_s_hz", "gamma_i_hz", "detector_rate_per_s", "amplitude", "background"};
    prob.initial = vec({priors.model.gamma_s_hz, priors.model.gamma_i_hz, priors.detector_rate_per_s,
                        std::max(peak - bg0, 1e-12), std::max(bg0, 0.0)});
    prob.lower = vec({1e3, 1e3, 1e6, 0.0, 0.0});
    prob.upper = vec({1e13, 1e13, 1e15, INFINITY, INFINITY});
    prob.fixed = {false, false, priors.fix_detector_rate, false, priors.fix_background};
    prob.fd_floor = 1e-9;
    prob.tolerances.max_iterations = 100;
    prob.residual = [&](const Eigen::VectorXd& p) {
        BiphotonModel m = priors.model;
        m.gamma_s_hz = p[0];
        m.gamma_i_hz = p[1];
        const auto model = g2_histogram_model(data, m, p[2], p[3], p[4], priors.grid_step_s);
        Eigen::VectorXd r(static_cast<Eigen::Index>(model.size()));
        for (std::size_t i = 0; i < model.size(); ++i) {
            r[static_cast<Eigen::Index>(i)] = (model[i] - data.counts[i]) * weights[i];
        }
        return r;
    };
    return least_squares(prob);
}

// ---- visibility decay ----

FitResult fit_visibility_decay(std::span<const VisibilitySample> series) {
    if (series.size() < 4) {
        throw UnderdeterminedError("visibility fit: need at least 4 points, got " + std::to_string(series.size()));
    }
    double vmax = 0.0, vmin = INFINITY;
    for (const auto& s : series) {
        if (!(s.visibility > 0.0)) throw DomainError("visibility fit: visibilities must be > 0");
        vmax = std::max(vmax, s.visibility);
        vmin = std::min(vmin, s.visibility);
    }
    if (vmax < 2.0 * vmin * (1.0 - 1e-12)) {
        throw UnderdeterminedError("visibility fit: visibilities must span a factor >= 2");
    }
    // ln V = -ln(1 + R/2) - (pi dnu / c) |L|
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(series.size());
    for (const auto& s : series) {
        const double x = std::abs(s.delta_x_m);
        const double y = std::log(s.visibility);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    const double dnu0 = std::max(-slope * kSpeedOfLight / kPi, 1.0);
    const double r0 = std::max(2.0 * (std::exp(-intercept) - 1.0), 0.0);

    std::vector<VisibilitySample> data(series.begin(), series.end());
    FitProblem prob;
    prob.names = {"linewidth_hz", "background_ratio"};
    prob.initial = vec({dnu0, r0});
    prob.lower = vec({1e-300, 0.0});
    prob.upper = vec({INFINITY, INFINITY});
    prob.residual = [&](const Eigen::VectorXd& p) {
        const MichelsonModel m{p[0], 0.0, p[1]};
        Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
        for (std::size_t i = 0; i < data.size(); ++i) {
            r[static_cast<Eigen::Index>(i)] = michelson_visibility(m, data[i].delta_x_m) - data[i].visibility;
        }
        return r;
    };
    prob.jacobian = [&](const Eigen::VectorXd& p) {
        const MichelsonModel m{p[0], 0.0, p[1]};
        Eigen::MatrixXd J(static_cast<Eigen::Index>(data.size()), 2);
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double v = michelson_visibility(m, data[i].delta_x_m);
            const auto row = static_cast<Eigen::Index>(i);
            J(row, 0) = -kPi * std::abs(data[i].delta_x_m) / kSpeedOfLight * v;
            J(row, 1) = -0.5 * v / (1.0 + 0.5 * p[1]);
        }
        return J;
    };
    return least_squares(prob);
}

// ---- fringes ----

Eigen::VectorXd fringe_residuals(std::span<const FringeSample> series, const Eigen::VectorXd& p) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(series.size()));
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double model = p[3] + p[0] * 0.5 * (1.0 + p[1] * std::cos(series[i].phase_rad + p[2]));
        r[static_cast<Eigen::Index>(i)] = model - series[i].counts;
    }
    return r;
}

Eigen::MatrixXd fringe_jacobian(std::span<const FringeSample> series, const Eigen::VectorXd& p) {
    Eigen::MatrixXd J(static_cast<Eigen::Index>(series.size()), 4);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double c = std::cos(series[i].phase_rad + p[2]);
        const double s = std::sin(series[i].phase_rad + p[2]);
        const auto row = static_cast<Eigen::Index>(i);
        J(row, 0) = 0.5 * (1.0 + p[1] * c);
        J(row, 1) = 0.5 * p[0] * c;
        J(row, 2) = -0.5 * p[0] * p[1] * s;
        J(row, 3) = 1.0;
    }
    return J;
}

FitResult fit_fringe(std::span<const FringeSample> series, double background) {
    if (series.size() < 4) throw UnderdeterminedError("fringe fit: need at least 4 points");
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end(), [](const FringeSample& a, const FringeSample& b) {
        return a.phase_rad < b.phase_rad;
    });
    const double n = static_cast<double>(series.size());
    if ((hi->phase_rad - lo->phase_rad) * n / (n - 1.0) < kTwoPi * (1.0 - 1e-9)) {
        throw PreconditionError("fringe fit: series must span at least one period");
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(series.size()), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(series.size()));
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        X(row, 0) = 1.0;
        X(row, 1) = std::cos(series[i].phase_rad);
        X(row, 2) = std::sin(series[i].phase_rad);
        y[row] = series[i].counts;
    }
    const Eigen::Vector3d c = X.colPivHouseholderQr().solve(y);
    // c0 + a cos + b sin = bg + A/2 + (A V / 2)(cos(off) cos - sin(off) sin)
    const double amp0 = std::max(2.0 * (c[0] - background), 1e-300);
    const double v0 = std::clamp(std::hypot(c[1], c[2]) / (0.5 * amp0), 0.0, 1.0);
    const double off0 = std::atan2(-c[2], c[1]);

    std::vector<FringeSample> data(series.begin(), series.end());
    FitProblem prob;
    prob.names = {"amplitude", "visibility", "phase_offset", "background"};
    prob.initial = vec({amp0, v0, off0, background});
    prob.lower = vec({0.0, 0.0, -INFINITY, -INFINITY});
    prob.upper = vec({INFINITY, 1.0, INFINITY, INFINITY});
    prob.fixed = {false, false, false, true};
    prob.residual = [&](const Eigen::VectorXd& p) { return fringe_residuals(data, p); };
    prob.jacobian = [&](const Eigen::VectorXd& p) { return fringe_jacobian(data, p); };
    FitResult r = least_squares(prob);
    for (auto& p : r.params) {
        if (p.name == "phase_offset") p.value = wrap_phase(p.value);
    }
    return r;
}

// ---- detector rate ----

FitResult fit_detector_rate(const BiphotonModel& model, double observed_fwhm_s, const GridSpec& grid) {
    const G2Curve raw = sample_g2(model, grid, true);
    const double intrinsic = fwhm(raw);
    if (!(observed_fwhm_s > intrinsic)) {
        throw NoSolutionError("detector rate fit: observed FWHM is not broader than the analytic curve");
    }
    FitProblem prob;
    prob.names = {"detector_rate_per_s"};
    // A one-sided exponential of mean 2/rate adds roughly that much width.
    prob.initial = vec({std::clamp(2.0 / (observed_fwhm_s - intrinsic), 1e7, 1e14)});
    prob.lower = vec({1e6});
    prob.upper = vec({1e15});
    prob.residual = [&](const Eigen::VectorXd& p) {
        const G2Curve conv = convolve_g2(raw, DetectorResponse{p[0], 1.0});
        return vec({(fwhm(conv) - observed_fwhm_s) * 1e12});
    };
    return least_squares(prob);
}

}  // namespace cespdc
