#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "core/counting.hpp"
#include "core/error.hpp"
#include "oracles.hpp"

using namespace cespdc;

namespace {

BiphotonModel paper_model() {
    BiphotonModel m;
    m.gamma_s_hz = oracle::gamma_s;
    m.gamma_i_hz = oracle::gamma_i;
    m.fsr_s_hz = oracle::fsr_s;
    m.fsr_i_hz = oracle::fsr_i;
    m.omega_s_hz = m.omega_i_hz = 1.0;
    return m;
}

DetectionChain arm(double eff, double dark) {
    DetectionChain d;
    d.detector_efficiency = eff;
    d.dark_rate_hz = dark;
    return d;
}

// Share of the single-mode delay density inside |tau| <= w / 2.
double window_fraction(double w) {
    const double a = 2.0 * oracle::pi * oracle::gamma_s, b = 2.0 * oracle::pi * oracle::gamma_i;
    const double pos = 1.0 / a, neg = 1.0 / b;
    return (pos * (1.0 - std::exp(-a * w / 2)) + neg * (1.0 - std::exp(-b * w / 2))) / (pos + neg);
}

TimeTagStream random_stream(std::mt19937_64& rng, std::size_t n, std::uint64_t span) {
    std::uniform_int_distribution<std::uint64_t> u(0, span);
    TimeTagStream s;
    for (std::size_t k = 0; k < n; ++k) s.tags_ps.push_back(u(rng));
    std::sort(s.tags_ps.begin(), s.tags_ps.end());
    return s;
}

}  // namespace

TEST_SUITE("counting") {
    TEST_CASE("histogram equals the brute-force all-pairs count") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 30; ++trial) {
            auto s = random_stream(rng, 150, 20000);
            auto i = random_stream(rng, 150, 20000);
            // Force some exact bin-edge delays and duplicate tags.
            s.tags_ps.push_back(5000);
            i.tags_ps.push_back(5000 - 25);
            i.tags_ps.push_back(5000 + 12);
            i.tags_ps.push_back(5000 + 13);
            std::sort(s.tags_ps.begin(), s.tags_ps.end());
            std::sort(i.tags_ps.begin(), i.tags_ps.end());
            const auto h = histogram_coincidences(s, i, 25e-12, 1e-9, 1.0, trial % 3 + 1);
            const auto ref = oracle::brute_histogram(s.tags_ps, i.tags_ps, 25, 40);
            REQUIRE(h.counts.size() == ref.size());
            for (std::size_t k = 0; k < ref.size(); ++k) CHECK(h.counts[k] == ref[k]);
        }
    }

    TEST_CASE("odd bin widths and worker counts") {
        std::mt19937_64 rng(5);
        const auto s = random_stream(rng, 400, 50000);
        const auto i = random_stream(rng, 400, 50000);
        const auto a = histogram_coincidences(s, i, 33e-12, 2e-9, 1.0, 1);
        const auto b = histogram_coincidences(s, i, 33e-12, 2e-9, 1.0, 8);
        CHECK(a.counts == b.counts);
        CHECK(a.half_bins == 61);
        const auto ref = oracle::brute_histogram(s.tags_ps, i.tags_ps, 33, 61);
        CHECK(a.counts == ref);
    }

    TEST_CASE("histogram preconditions") {
        TimeTagStream s, i;
        s.tags_ps = {5, 3};
        i.tags_ps = {1};
        CHECK_THROWS_AS(histogram_coincidences(s, i, 25e-12, 1e-9), PreconditionError);
        std::swap(s, i);
        CHECK_THROWS_AS(histogram_coincidences(s, i, 25e-12, 1e-9), PreconditionError);
        CHECK_THROWS_AS(histogram_coincidences(i, i, 0.2e-12, 1e-9), DomainError);
        TimeTagStream empty;
        CHECK(histogram_coincidences(empty, empty, 25e-12, 1e-9).total() == 0);
    }

    TEST_CASE("simulation is deterministic and worker independent") {
        SourceModel src{1439.256, 50.0, paper_model()};
        auto s = arm(0.4, 800.0);
        s.jitter = JitterModel::response;
        s.jitter_rate_per_s = oracle::detector_rate;
        auto i = arm(0.45, 900.0);
        i.jitter = JitterModel::gaussian;
        i.jitter_sigma_s = 20e-12;
        SimulationSettings set;
        set.duration_s = 0.3;
        set.seed = 99;
        set.workers = 1;
        const auto a = simulate_timetags(src, s, i, set);
        set.workers = 6;
        const auto b = simulate_timetags(src, s, i, set);
        CHECK(a.signal.tags_ps == b.signal.tags_ps);
        CHECK(a.idler.tags_ps == b.idler.tags_ps);
        CHECK(a.pairs == b.pairs);
        CHECK(std::is_sorted(a.signal.tags_ps.begin(), a.signal.tags_ps.end()));
        CHECK(std::is_sorted(a.idler.tags_ps.begin(), a.idler.tags_ps.end()));
        for (auto t : a.signal.tags_ps) REQUIRE(t < 300000000000ull);
        set.seed = 100;
        const auto c = simulate_timetags(src, s, i, set);
        CHECK(c.signal.tags_ps != a.signal.tags_ps);
    }

    TEST_CASE("singles rates follow R q + dark") {
        SourceModel src{2000.0, 100.0, paper_model()};
        const auto s = arm(0.3, 2000.0), i = arm(0.6, 500.0);
        SimulationSettings set;
        set.duration_s = 2.0;
        set.seed = 3;
        const auto out = simulate_timetags(src, s, i, set);
        const double exp_s = (2e5 * 0.3 + 2000.0) * 2.0, exp_i = (2e5 * 0.6 + 500.0) * 2.0;
        CHECK(std::abs(out.signal.tags_ps.size() - exp_s) < 5.0 * std::sqrt(exp_s));
        CHECK(std::abs(out.idler.tags_ps.size() - exp_i) < 5.0 * std::sqrt(exp_i));
        CHECK(std::abs(out.pairs - 4e5) < 5.0 * std::sqrt(4e5));
    }

    TEST_CASE("dark counts alone give a flat histogram at S_s S_i w T") {
        SourceModel src{0.0, 0.0, paper_model()};
        const auto s = arm(1.0, 2e5), i = arm(1.0, 2e5);
        SimulationSettings set;
        set.duration_s = 2.0;
        set.seed = 8;
        const auto out = simulate_timetags(src, s, i, set);
        const auto h = histogram_coincidences(out.signal, out.idler, 100e-12, 5e-9, 2.0);
        const double expect = 2e5 * 2e5 * 100e-12 * 2.0;
        const double mean = static_cast<double>(h.total()) / h.counts.size();
        CHECK(mean == doctest::Approx(expect).epsilon(0.05));
        CHECK(accidental_level(h, 0.1e-9) == doctest::Approx(expect).epsilon(0.05));
    }

    TEST_CASE("delay sampler reproduces the g2 density") {
        const DelaySampler d(paper_model(), GridSpec{0.05e-12, 5e-9});
        // Median of the two-sided exponential: mass on tau >= 0 is gi / (gs + gi).
        const double p_pos = oracle::gamma_i / (oracle::gamma_s + oracle::gamma_i);
        CHECK(d(1.0 - p_pos) == doctest::Approx(0.0).epsilon(1e-3).scale(1e-9));
        // Quantile on the positive side: 1 - F = p_pos exp(-2 pi gs t).
        const double t = 0.3e-9;
        const double u = 1.0 - p_pos * std::exp(-2 * oracle::pi * oracle::gamma_s * t);
        CHECK(d(u) == doctest::Approx(t).epsilon(1e-3));
        CHECK(d(0.0) >= -5e-9);
        CHECK(d(0.999999999) <= 5e-9);
    }

    TEST_CASE("CAR estimator") {
        CHECK(car(1799.0, 1.0) == 1800.0);
        CHECK(car(1799.0 * 37.5, 37.5) == doctest::Approx(1800.0).epsilon(1e-15));
        CHECK_THROWS_AS(car(10.0, 0.0), DomainError);
        const auto b = car_or_bound(10.0, 0.0);
        CHECK(b.lower_bound);
        CHECK(b.value == 11.0);
        CHECK_FALSE(car_or_bound(10.0, 2.0).lower_bound);
    }

    TEST_CASE("expected CAR falls with pump power") {
        auto s = arm(0.43, 1000.0), i = arm(0.44, 1000.0);
        s.jitter = JitterModel::response;
        s.jitter_rate_per_s = oracle::detector_rate;
        double last = INFINITY;
        for (double p : {50.0, 100.0, 150.0, 200.0, 250.0, 300.0}) {
            const auto row = expected_counts(SourceModel{1439.256, p, paper_model()}, s, i, 1e-9);
            CHECK(row.car_defined);
            CHECK(row.car.value < last);
            last = row.car.value;
            CHECK(row.singles_s == doctest::Approx(1439.256 * p * 0.43 + 1000.0));
            CHECK(row.accidentals == doctest::Approx(row.singles_s * row.singles_i * 1e-9));
            // Jitter moves little of the delay density across the window edges.
            const double frac = row.coincidences / (1439.256 * p * 0.43 * 0.44);
            CHECK(std::abs(frac - window_fraction(1e-9)) < 0.01);
            CHECK(frac < 1.0);
        }
    }

    TEST_CASE("expected coincidences without jitter follow the window integral") {
        const auto s = arm(0.43, 1000.0), i = arm(0.44, 1000.0);
        for (double w : {0.2e-9, 1e-9, 3e-9}) {
            const auto row = expected_counts(SourceModel{1439.256, 100.0, paper_model()}, s, i, w);
            CHECK(row.coincidences / (1439.256 * 100.0 * 0.43 * 0.44) == doctest::Approx(window_fraction(w)).epsilon(1e-4));
        }
    }

    TEST_CASE("without darks the simulated CAR is undefined") {
        SourceModel src{1439.256, 10.0, paper_model()};
        const auto s = arm(0.2, 0.0), i = arm(0.2, 0.0);
        SimulationSettings set;
        set.duration_s = 1.0;
        set.seed = 4;
        const auto out = simulate_timetags(src, s, i, set);
        const auto h = histogram_coincidences(out.signal, out.idler, 25e-12, 5e-9, 1.0);
        const auto row = measured_counts(10.0, out, h, 1e-9, 0.35e-9);
        CHECK_FALSE(row.car_defined);
        std::ostringstream os;
        const std::array<CountsRow, 1> rows{row};
        write_counts_csv(os, rows);
        const std::string text = os.str();
        CHECK(text.rfind("power_mw,singles_s,singles_i,coincidences,car\n", 0) == 0);
        CHECK(text.back() == '\n');
        CHECK(text[text.size() - 2] == ',');
    }

    TEST_CASE("accidental level needs far bins") {
        TimeTagStream e;
        const auto h = histogram_coincidences(e, e, 25e-12, 1e-9, 1.0);
        CHECK_THROWS_AS(accidental_level(h, 0.35e-9), UnderdeterminedError);
        CHECK(window_bins(h, 1e-9) == 41);
    }

    TEST_CASE("brightness and heralding") {
        auto s = arm(0.6, 0.0), i = arm(0.5, 0.0);
        s.fiber_efficiency = 0.7;
        s.filter_transmittance = 0.9;
        s.duty_cycle = 0.8;
        i.fiber_efficiency = 0.75;
        i.filter_transmittance = 0.95;
        i.duty_cycle = 0.1;  // only the signal arm's duty cycle enters
        const double R = 1000.0;
        const double b = estimate_brightness(R, s, i, 546e6, 2.0);
        CHECK(b == doctest::Approx(R / (0.8 * 0.7 * 0.75 * 0.9 * 0.95 * 0.6 * 0.5) / 2.0 / 546.0));
        CHECK(heralded_efficiency(25.0, 100.0) == 0.25);
        CHECK_THROWS_AS(heralded_efficiency(1.0, 0.0), DomainError);
    }

    TEST_CASE("ttag round trip and corruption") {
        std::mt19937_64 rng(1);
        auto s = random_stream(rng, 1000, 1ull << 50);
        s.channel = 2;
        std::stringstream buf;
        write_ttag(buf, s);
        const std::string bytes = buf.str();
        CHECK(bytes.size() == 16 + 8 * 1000);
        CHECK(bytes.substr(0, 4) == "TTAG");
        CHECK(static_cast<unsigned char>(bytes[4]) == 1);
        CHECK(static_cast<unsigned char>(bytes[6]) == 2);
        std::istringstream in(bytes);
        const auto back = read_ttag(in);
        CHECK(back.channel == 2);
        CHECK(back.tags_ps == s.tags_ps);

        std::istringstream trunc(bytes.substr(0, bytes.size() - 3));
        CHECK_THROWS_AS(read_ttag(trunc), IoError);
        std::string bad = bytes;
        bad[0] = 'X';
        std::istringstream badin(bad);
        CHECK_THROWS_AS(read_ttag(badin), IoError);
        std::string badv = bytes;
        badv[4] = 7;
        std::istringstream badvin(badv);
        CHECK_THROWS_AS(read_ttag(badvin), IoError);
        CHECK_THROWS_AS(read_ttag_file("/nonexistent/dir/x.ttag"), IoError);
    }

    TEST_CASE("histogram csv uses integer picosecond delays") {
        TimeTagStream s, i;
        s.tags_ps = {1000};
        i.tags_ps = {1000 - 50};
        const auto h = histogram_coincidences(s, i, 25e-12, 50e-12, 1.0);
        std::ostringstream os;
        write_histogram_csv(os, h);
        CHECK(os.str() == "delay_ps,counts\n-50,0\n-25,0\n0,0\n25,0\n50,1\n");
    }

    TEST_CASE("jitter model names") {
        CHECK(jitter_model_from_string("response") == JitterModel::response);
        CHECK(to_string(JitterModel::gaussian) == "gaussian");
        CHECK_THROWS_AS(jitter_model_from_string("lorentz"), DomainError);
        auto d = arm(0.5, 0.0);
        d.jitter = JitterModel::response;
        CHECK_THROWS_AS(d.validate(), DomainError);
    }
}
