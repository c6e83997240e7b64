#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "core/error.hpp"
#include "core/interference.hpp"
#include "oracles.hpp"

using namespace cespdc;

TEST_SUITE("interference") {
    TEST_CASE("Franson extrema give back the visibility") {
        for (double v : {0.0, 0.3, 0.8712, 1.0}) {
            const FransonConfig cfg{v, 0.0, 0.0};
            const double cmax = franson_coincidence(cfg, 0.0, 1000.0);
            const double cmin = franson_coincidence(cfg, oracle::pi, 1000.0);
            CHECK(visibility_from_extrema(cmax, cmin) == doctest::Approx(v).epsilon(1e-12));
        }
    }

    TEST_CASE("idler phase shifts the fringe") {
        const FransonConfig a{0.9, 0.0, 0.0}, b{0.9, oracle::pi / 4, 0.0};
        for (double phi : {0.0, 0.7, 2.0}) {
            CHECK(franson_coincidence(b, phi, 10.0) == doctest::Approx(franson_coincidence(a, phi + oracle::pi / 4, 10.0)));
        }
    }

    TEST_CASE("accidental subtraction recovers the net visibility") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> V(0.0, 1.0), bg(0.0, 500.0), amp(10.0, 1e4);
        for (int trial = 0; trial < 500; ++trial) {
            const double v = V(rng), b = bg(rng), A = amp(rng);
            const FransonConfig cfg{v, 0.0, b};
            const double cmax = franson_coincidence(cfg, 0.0, A);
            const double cmin = franson_coincidence(cfg, oracle::pi, A);
            CHECK(net_visibility(cmax, cmin, b) == doctest::Approx(v).epsilon(1e-9));
            // Raw visibility never exceeds the net one.
            CHECK(visibility_from_extrema(cmax, cmin) <= net_visibility(cmax, cmin, b) + 1e-12);
        }
        CHECK_THROWS_AS(net_visibility(10.0, 2.0, 3.0), DomainError);
        CHECK_THROWS_AS(visibility_from_extrema(1.0, 2.0), DomainError);
    }

    TEST_CASE("fringe sampling") {
        const auto f = franson_fringe(FransonConfig{0.5, 0.0, 1.0}, 100.0, 8);
        REQUIRE(f.size() == 8);
        CHECK(f[2].phase_rad == doctest::Approx(oracle::pi / 2));
        CHECK(f[0].counts == doctest::Approx(1.0 + 75.0));
        CHECK_THROWS_AS(FransonConfig({1.2, 0.0, 0.0}).validate(), DomainError);
        std::ostringstream os;
        write_fringe_csv(os, f);
        CHECK(os.str().rfind("phase_rad,counts\n", 0) == 0);
    }

    TEST_CASE("Michelson visibility") {
        const MichelsonModel m{568.9e6, 193.4e12, 1.0 / 30.0};
        for (double L : {0.0, 0.05, 0.2, -0.3}) {
            CHECK(michelson_visibility(m, L) == doctest::Approx(oracle::michelson_v(568.9e6, 1.0 / 30.0, L)).epsilon(1e-14));
        }
        CHECK(michelson_visibility(m, 0.0) == doctest::Approx(1.0 / (1.0 + 1.0 / 60.0)));
        const auto series = michelson_series(m, std::vector<double>{0.0, 0.1});
        CHECK(series[1].visibility == doctest::Approx(michelson_visibility(m, 0.1)));
        std::ostringstream os;
        write_visibility_csv(os, series);
        CHECK(os.str().rfind("delta_x_m,visibility\n", 0) == 0);
    }

    TEST_CASE("Michelson intensity fringe envelope") {
        const MichelsonModel m{568.9e6, 193.4e12, 0.0};
        const double L0 = 0.1;
        double lo = INFINITY, hi = 0.0;
        // One optical period of L around L0.
        const double period = oracle::c / m.center_hz;
        for (int k = 0; k < 400; ++k) {
            const double v = michelson_intensity(m, L0 + period * k / 400.0, 1.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK((hi - lo) / (hi + lo) == doctest::Approx(std::exp(-oracle::pi * 568.9e6 * L0 / oracle::c)).epsilon(1e-4));
        CHECK(michelson_intensity(m, 0.0, 1.0) == doctest::Approx(4.0));
    }

    TEST_CASE("UMI thermal tuning") {
        UmiThermal u;
        u.wavelength_m = 1550e-9;
        u.fiber_index = 1.468;
        u.dn_dT = 0.811e-5;
        u.length_difference_m = 1.022;
        CHECK(umi_tuning_period(u) == doctest::Approx(1550e-9 / (2 * 1.022 * 0.811e-5)));
        CHECK(std::abs(umi_tuning_period(u) - 0.094) < 0.001);

        const double dt = 2 * 1.468 * 1.022 / oracle::c;
        CHECK(umi_length_difference(dt, 1.468) == doctest::Approx(1.022));
        u.time_delay_s = dt;
        CHECK_NOTHROW(u.validate());
        u.time_delay_s = dt * 1.01;
        CHECK_THROWS_AS(u.validate(), DomainError);
        UmiThermal only_dt = u;
        only_dt.length_difference_m = 0.0;
        only_dt.time_delay_s = dt;
        CHECK(only_dt.resolved_length_m() == doctest::Approx(1.022));
        only_dt.dn_dT = 0.0;
        CHECK_THROWS_AS(only_dt.validate(), DomainError);
    }
}
