#include <doctest.h>

#include <cmath>
#include <sstream>

#include "core/biphoton.hpp"
#include "core/error.hpp"
#include "oracles.hpp"

using namespace cespdc;

namespace {

BiphotonModel single_mode(double gs = oracle::gamma_s, double gi = oracle::gamma_i) {
    BiphotonModel m;
    m.gamma_s_hz = gs;
    m.gamma_i_hz = gi;
    m.fsr_s_hz = oracle::fsr_s;
    m.fsr_i_hz = oracle::fsr_i;
    m.omega_s_hz = m.omega_i_hz = 1.0;
    return m;
}

}  // namespace

TEST_SUITE("biphoton") {
    TEST_CASE("single mode pair is a two-sided exponential") {
        const G2Evaluator g(single_mode());
        const double g0 = g(0.0);
        REQUIRE(g0 > 0.0);
        for (double t : {-2e-9, -0.5e-9, -1e-11, 1e-11, 0.3e-9, 1.7e-9}) {
            CHECK(g(t) / g0 == doctest::Approx(oracle::g2_single(t, oracle::gamma_s, oracle::gamma_i)).epsilon(1e-10));
        }
    }

    TEST_CASE("sampled width of the single mode curve") {
        const auto curve = sample_g2(single_mode(), GridSpec{0.5e-12, 3e-9});
        CHECK(fwhm(curve) == doctest::Approx(oracle::g2_single_fwhm(oracle::gamma_s, oracle::gamma_i)).epsilon(1e-4));
        CHECK(fwhm(curve) == doctest::Approx(0.35214e-9).epsilon(1e-4));
    }

    TEST_CASE("analytic width formula") {
        CHECK(t_fwhm_analytic(546e6, 735e6) == doctest::Approx(1.39 / (2 * oracle::pi * std::sqrt(546e6 * 735e6))));
        CHECK(std::abs(t_fwhm_analytic(546e6, 735e6) - 0.349e-9) < 0.002e-9);
        CHECK_THROWS_AS(t_fwhm_analytic(0.0, 1.0), DomainError);
    }

    TEST_CASE("detector convolution matches the closed form") {
        const auto raw = sample_g2(single_mode(), GridSpec{0.5e-12, 5e-9});
        const auto conv = convolve_g2(raw, DetectorResponse{oracle::detector_rate, 1.0});
        const double peak_ref = [] {
            double best = 0.0;
            for (int k = -4000; k <= 4000; ++k) {
                best = std::max(best, oracle::g2_single_convolved(k * 0.1e-12, oracle::gamma_s, oracle::gamma_i, oracle::detector_rate));
            }
            return best;
        }();
        double worst = 0.0;
        for (std::size_t i = 0; i < conv.size(); i += 7) {
            const double t = conv.tau(i);
            if (std::abs(t) > 3e-9) continue;  // truncation of the grid at +5 ns
            const double ref = oracle::g2_single_convolved(t, oracle::gamma_s, oracle::gamma_i, oracle::detector_rate) / peak_ref;
            worst = std::max(worst, std::abs(conv.values[i] - ref));
        }
        CHECK(worst < 2e-3);

        const double ref_w = oracle::fwhm_of(
            [](double t) { return oracle::g2_single_convolved(t, oracle::gamma_s, oracle::gamma_i, oracle::detector_rate); },
            -10e-12, 2e-9);
        CHECK(fwhm(conv) == doctest::Approx(ref_w).epsilon(2e-3));
        CHECK(std::abs(fwhm(conv) - 0.412e-9) < 0.005e-9);
    }

    TEST_CASE("convolution only broadens") {
        const auto raw = sample_g2(single_mode(), GridSpec{0.5e-12, 5e-9});
        double last = fwhm(raw);
        for (double rate : {4e11, 1e11, 4e10, 2e10}) {
            const double w = fwhm(convolve_g2(raw, DetectorResponse{rate, 1.0}));
            CHECK(w > last);
            last = w;
        }
    }

    TEST_CASE("convolution grid guard") {
        const auto coarse = sample_g2(single_mode(), GridSpec{2e-12, 1e-9});
        CHECK_THROWS_AS(convolve_g2(coarse, DetectorResponse{oracle::detector_rate, 1.0}), PreconditionError);
        const auto fine = sample_g2(single_mode(), GridSpec{0.5e-12, 1e-9});
        CHECK_THROWS_AS(convolve_g2(fine, DetectorResponse{0.0, 1.0}), DomainError);
    }

    TEST_CASE("detector response") {
        const DetectorResponse r{4e10, 2.0};
        CHECK(detector_response(r, 1e-12) == 0.0);
        CHECK(detector_response(r, 0.0) == 2.0);
        CHECK(detector_response(r, -50e-12) == doctest::Approx(2.0 * std::exp(-1.0)));
    }

    TEST_CASE("sampling is independent of the worker count") {
        auto m = single_mode();
        m.modes = 20;
        const auto a = sample_g2(m, GridSpec{0.5e-12, 1e-9}, true, 1);
        const auto b = sample_g2(m, GridSpec{0.5e-12, 1e-9}, true, 7);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a.values[i] == b.values[i]);
    }

    TEST_CASE("multi-mode comb period and envelope") {
        auto m = single_mode();
        m.modes = 200;
        const G2Evaluator g(m);
        const auto peaks = locate_comb_peaks(g, 1.0 / oracle::fsr_s, 1.0 / oracle::fsr_s, 30, 0.002e-12);
        REQUIRE(peaks.size() == 30);
        for (std::size_t k = 1; k < peaks.size(); ++k) {
            CHECK(std::abs(peaks[k].tau_s - peaks[k - 1].tau_s - 1.0 / oracle::fsr_s) < 0.2e-12);
        }
        // Curve values are non-negative everywhere.
        const auto curve = sample_g2(m, GridSpec{0.25e-12, 0.2e-9});
        for (double v : curve.values) CHECK(v >= 0.0);
    }

    TEST_CASE("tau0 keeps the curve non-negative and shifts the branch point") {
        auto m = single_mode();
        m.tau0_s = 20e-12;
        const auto curve = sample_g2(m, GridSpec{0.5e-12, 1e-9});
        for (double v : curve.values) CHECK(v >= 0.0);
        CHECK_THROWS_AS([] {
            auto bad = single_mode();
            bad.tau0_s = -1.0;
            bad.validate();
        }(), DomainError);
    }

    TEST_CASE("envelope weights") {
        auto flat = with_envelope_weights(single_mode(), [](double) { return 1.0; });
        CHECK(flat.modes > 0);
        for (double w : flat.signal_weights) CHECK(w == doctest::Approx(1.0));
        auto narrow = with_envelope_weights(single_mode(), [](double d) { return std::abs(d) < 1.0 ? 1.0 : 0.0; });
        CHECK(narrow.modes == 0);
        CHECK_THROWS_AS(with_envelope_weights(single_mode(), [](double) { return 0.0; }), DomainError);
    }

    TEST_CASE("integrate, rebin and normalize") {
        G2Curve line;
        line.start_s = -1e-9;
        line.step_s = 1e-12;
        for (int i = 0; i <= 2000; ++i) line.values.push_back(3.0 + 1e9 * line.tau(static_cast<std::size_t>(i)));
        // Linear curves integrate exactly under linear interpolation.
        CHECK(integrate(line, -0.5e-9, 0.25e-9) == doctest::Approx(3.0 * 0.75e-9 + 0.5e9 * (0.0625e-18 - 0.25e-18)).epsilon(1e-9));
        const auto binned = rebin(line, 25e-12);
        for (std::size_t i = 0; i < binned.size(); ++i) {
            CHECK(binned.values[i] == doctest::Approx(3.0 + 1e9 * binned.tau(i)).epsilon(1e-9));
        }
        G2Curve neg = line;
        for (double& v : neg.values) v = -1.0;
        CHECK_THROWS_AS(normalize_peak(neg), DomainError);
    }

    TEST_CASE("fwhm needs a peak away from the edges") {
        G2Curve ramp;
        ramp.step_s = 1e-12;
        for (int i = 0; i < 100; ++i) ramp.values.push_back(i);
        CHECK_THROWS_AS(fwhm(ramp), DomainError);
    }

    TEST_CASE("csv header") {
        std::ostringstream os;
        write_curve_csv(os, sample_g2(single_mode(), GridSpec{1e-12, 2e-12}));
        CHECK(os.str().rfind("tau_s,value\n", 0) == 0);
    }

    TEST_CASE("json round trip") {
        auto m = single_mode();
        m.modes = 3;
        m.tau0_s = 1e-12;
        const auto back = BiphotonModel::from_json(m.to_json());
        CHECK(g2(back, 3e-11) == g2(m, 3e-11));
    }
}
