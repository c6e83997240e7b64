#pragma once
// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical code.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double c = 299792458.0;
inline constexpr double pi = std::numbers::pi;

// Measured cavity parameters of the source.
inline constexpr double fsr_s = 93.61e9;
inline constexpr double fsr_i = 89.42e9;
inline constexpr double gamma_s = 546e6;
inline constexpr double gamma_i = 735e6;
inline constexpr double detector_rate = 4.6112e10;

// Two-sided exponential g2 of one mode pair (tau0 = 0), peak 1.
inline double g2_single(double tau, double gs, double gi) {
    return tau >= 0.0 ? std::exp(-2.0 * pi * gs * tau) : std::exp(2.0 * pi * gi * tau);
}

inline double g2_single_fwhm(double gs, double gi) { return std::log(2.0) / (2.0 * pi) * (1.0 / gs + 1.0 / gi); }

// Closed form of int_{s >= t} g2_single(s) exp(-k (s - t)) ds with k = rate / 2.
inline double g2_single_convolved(double t, double gs, double gi, double rate) {
    const double a = 2.0 * pi * gs, b = 2.0 * pi * gi, k = 0.5 * rate;
    if (t >= 0.0) return std::exp(-a * t) / (a + k);
    const double near = (b == k) ? -t * std::exp(k * t) : std::exp(k * t) * (1.0 - std::exp((b - k) * t)) / (b - k);
    return near + std::exp(k * t) / (a + k);
}

// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// FWHM of a unimodal function with maximum at `peak`, searching out to +-reach.
inline double fwhm_of(const std::function<double(double)>& f, double peak, double reach) {
    const double half = 0.5 * f(peak);
    auto g = [&](double t) { return f(t) - half; };
    const double right = bisect(g, peak, peak + reach);
    const double left = bisect(g, peak - reach, peak);
    return right - left;
}

// Integral of a Lorentzian density over the whole line via nu = c + (w/2) tan(theta).
inline double lorentzian_total_area(const std::function<double(double)>& density, double center, double fwhm,
                                    int n = 200000) {
    double sum = 0.0;
    const double h = pi / n;
    for (int k = 0; k < n; ++k) {
        const double th = -0.5 * pi + (k + 0.5) * h;
        const double nu = center + 0.5 * fwhm * std::tan(th);
        const double jac = 0.5 * fwhm / (std::cos(th) * std::cos(th));
        sum += density(nu) * jac * h;
    }
    return sum;
}

// All-pairs coincidence histogram by brute force: bin k counts pairs with
// 2 (s - i) in [2 k w - w, 2 k w + w), |k| <= K.
inline std::vector<std::uint64_t> brute_histogram(const std::vector<std::uint64_t>& sig,
                                                  const std::vector<std::uint64_t>& idl, std::int64_t w,
                                                  std::int64_t K) {
    std::vector<std::uint64_t> out(static_cast<std::size_t>(2 * K + 1), 0);
    for (auto s : sig) {
        for (auto i : idl) {
            const std::int64_t d2 = 2 * (static_cast<std::int64_t>(s) - static_cast<std::int64_t>(i));
            for (std::int64_t k = -K; k <= K; ++k) {
                if (d2 >= 2 * k * w - w && d2 < 2 * k * w + w) ++out[static_cast<std::size_t>(k + K)];
            }
        }
    }
    return out;
}

// Michelson visibility of a Lorentzian line with background ratio R.
inline double michelson_v(double dnu, double R, double L) { return std::exp(-pi * std::abs(dnu * L / c)) / (1.0 + R / 2.0); }

// Gaussian elimination solve for small dense systems.
inline std::vector<double> solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        }
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            for (std::size_t k = col; k < n; ++k) A[r][k] -= f * A[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

}  // namespace oracle
