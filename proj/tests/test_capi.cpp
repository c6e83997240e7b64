#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cespdc/cespdc.h"

extern "C" int cespdc_c_header_smoke(void);

namespace {

struct Cfg {
    cespdc_config* p = nullptr;
    Cfg() { REQUIRE(cespdc_config_load(nullptr, "paper", &p) == CESPDC_OK); }
    ~Cfg() { cespdc_config_free(p); }
};

}  // namespace

TEST_SUITE("c api") {
    TEST_CASE("header is usable from C") { CHECK(cespdc_c_header_smoke() == 0); }

    TEST_CASE("status names and version") {
        CHECK(std::string(cespdc_status_name(CESPDC_ERR_NO_SOLUTION)) == "no solution");
        CHECK(std::strlen(cespdc_version()) > 0);
    }

    TEST_CASE("null arguments are rejected, not crashed on") {
        double out = 0.0;
        CHECK(cespdc_cluster_spacing(93.61e9, 89.42e9, nullptr) == CESPDC_ERR_INVALID_ARGUMENT);
        CHECK(cespdc_refractive_index(nullptr, 'y', 1550e-9, &out) == CESPDC_ERR_INVALID_ARGUMENT);
        CHECK(std::strlen(cespdc_last_error()) > 0);
        cespdc_curve_free(nullptr);
        cespdc_config_free(nullptr);
        CHECK(cespdc_config_load(nullptr, nullptr, nullptr) == CESPDC_ERR_INVALID_ARGUMENT);
    }

    TEST_CASE("errors map to status codes") {
        double out = 0.0;
        CHECK(cespdc_cluster_spacing(89.42e9, 93.61e9, &out) == CESPDC_ERR_PRECONDITION);
        CHECK(cespdc_cluster_spacing(90e9, 90e9, &out) == CESPDC_ERR_DOMAIN);
        int lb = 0;
        CHECK(cespdc_car(1799.0, 1.0, &out, &lb) == CESPDC_OK);
        CHECK(out == 1800.0);
        CHECK(lb == 0);
        CHECK(cespdc_car(5.0, 0.0, &out, &lb) == CESPDC_OK);
        CHECK(lb == 1);
        CHECK(out == 6.0);
        cespdc_config* cfg = nullptr;
        CHECK(cespdc_config_from_json("{\"cavity\": {\"signal\": {\"fsr_hz\": -3}}}", nullptr, &cfg) == CESPDC_ERR_CONFIG);
        CHECK(std::string(cespdc_last_error()).find("cavity.signal") != std::string::npos);
        CHECK(cfg == nullptr);
        CHECK(cespdc_config_from_json("{oops", nullptr, &cfg) == CESPDC_ERR_CONFIG);
        CHECK(cespdc_config_load("/nonexistent/cfg.json", nullptr, &cfg) == CESPDC_ERR_CONFIG);
    }

    TEST_CASE("cluster report") {
        cespdc_cluster_report r{};
        REQUIRE(cespdc_cluster_analyze(93.61e9, 89.42e9, 546e6, 735e6, &r) == CESPDC_OK);
        CHECK(r.cluster_spacing_hz == doctest::Approx(1997.758e9).epsilon(1e-5));
        CHECK(r.n_i - r.n_s == doctest::Approx(1.0));
        CHECK(r.single_mode == 1);
        Cfg cfg;
        cespdc_cluster_report c{};
        REQUIRE(cespdc_cluster_from_config(cfg.p, &c) == CESPDC_OK);
        CHECK(c.delta_nu_hz == r.delta_nu_hz);
    }

    TEST_CASE("config patch and seed") {
        Cfg cfg;
        REQUIRE(cespdc_config_patch(cfg.p, "{\"simulation\": {\"powers_mw\": [10, 20]}}") == CESPDC_OK);
        const double* v = nullptr;
        size_t n = 0;
        REQUIRE(cespdc_config_powers(cfg.p, &v, &n) == CESPDC_OK);
        REQUIRE(n == 2);
        CHECK(v[1] == 20.0);
        CHECK(cespdc_config_patch(cfg.p, "{\"simulation\": {\"duration_s\": -1}}") == CESPDC_ERR_CONFIG);
        REQUIRE(cespdc_config_powers(cfg.p, &v, &n) == CESPDC_OK);
        CHECK(n == 2);
        CHECK(cespdc_config_set_seed(cfg.p, 5) == CESPDC_OK);
        const char* text = nullptr;
        REQUIRE(cespdc_config_json(cfg.p, &text) == CESPDC_OK);
        CHECK(nlohmann::json::parse(text).at("simulation").at("seed") == 5);
    }

    TEST_CASE("curve pipeline") {
        Cfg cfg;
        cespdc_curve *raw = nullptr, *conv = nullptr, *binned = nullptr;
        REQUIRE(cespdc_g2_analytic(cfg.p, &raw) == CESPDC_OK);
        REQUIRE(cespdc_curve_convolve(raw, 0.0, &conv) == CESPDC_OK);
        double w = 0.0;
        REQUIRE(cespdc_curve_fwhm(conv, &w) == CESPDC_OK);
        CHECK(std::abs(w - 0.412e-9) < 0.005e-9);
        REQUIRE(cespdc_curve_rebin(conv, 25e-12, &binned) == CESPDC_OK);
        const double* vals = nullptr;
        size_t n = 0;
        double start = 0.0, step = 0.0;
        REQUIRE(cespdc_curve_data(binned, &vals, &n, &start, &step) == CESPDC_OK);
        CHECK(step == doctest::Approx(25e-12));
        CHECK(n > 100);
        cespdc_fit* fit = nullptr;
        REQUIRE(cespdc_fit_g2_curve(cfg.p, binned, 0, &fit) == CESPDC_OK);
        int ok = 0;
        CHECK(cespdc_fit_converged(fit, &ok) == CESPDC_OK);
        CHECK(ok == 1);
        double g = 0.0, e = 0.0;
        CHECK(cespdc_fit_param(fit, "gamma_s_hz", &g, &e) == CESPDC_OK);
        CHECK(g == doctest::Approx(546e6).epsilon(1e-3));
        CHECK(cespdc_fit_param(fit, "nonsense", &g, &e) != CESPDC_OK);
        const char* js = nullptr;
        CHECK(cespdc_fit_json(fit, &js) == CESPDC_OK);
        CHECK(std::string(js).find("\"converged\"") != std::string::npos);
        cespdc_fit_free(fit);
        cespdc_curve_free(binned);
        cespdc_curve_free(conv);
        cespdc_curve_free(raw);
    }

    TEST_CASE("simulation, histogram and ttag files") {
        Cfg cfg;
        REQUIRE(cespdc_config_patch(cfg.p, "{\"simulation\": {\"duration_s\": 0.2}}") == CESPDC_OK);
        cespdc_timetags* tags = nullptr;
        REQUIRE(cespdc_simulate(cfg.p, 100.0, &tags) == CESPDC_OK);
        cespdc_histogram* hist = nullptr;
        REQUIRE(cespdc_histogram_build(cfg.p, tags, 0.0, 0.0, &hist) == CESPDC_OK);
        const uint64_t* counts = nullptr;
        size_t nb = 0;
        double bin = 0.0;
        int half = 0;
        REQUIRE(cespdc_histogram_data(hist, &counts, &nb, &bin, &half) == CESPDC_OK);
        CHECK(nb == 401);
        CHECK(half == 200);
        CHECK(bin == doctest::Approx(25e-12));

        const auto dir = std::filesystem::temp_directory_path() / "cespdc_capi_test";
        std::filesystem::create_directories(dir);
        const auto s = (dir / "s.ttag").string(), i = (dir / "i.ttag").string();
        REQUIRE(cespdc_timetags_write_ttag(tags, 1, s.c_str()) == CESPDC_OK);
        REQUIRE(cespdc_timetags_write_ttag(tags, 2, i.c_str()) == CESPDC_OK);
        CHECK(cespdc_timetags_write_ttag(tags, 3, i.c_str()) == CESPDC_ERR_DOMAIN);
        cespdc_timetags* back = nullptr;
        REQUIRE(cespdc_timetags_read(s.c_str(), i.c_str(), &back) == CESPDC_OK);
        const uint64_t *a = nullptr, *b = nullptr;
        size_t na = 0, nb2 = 0;
        cespdc_timetags_data(tags, 1, &a, &na);
        cespdc_timetags_data(back, 1, &b, &nb2);
        REQUIRE(na == nb2);
        CHECK(std::equal(a, a + na, b));
        { std::ofstream(dir / "bad.ttag") << "nope"; }
        cespdc_timetags* bad = nullptr;
        CHECK(cespdc_timetags_read((dir / "bad.ttag").string().c_str(), i.c_str(), &bad) == CESPDC_ERR_IO);
        CHECK(cespdc_histogram_write_csv(hist, "/nonexistent/dir/h.csv") == CESPDC_ERR_IO);
        std::filesystem::remove_all(dir);
        cespdc_timetags_free(back);
        cespdc_histogram_free(hist);
        cespdc_timetags_free(tags);
    }

    TEST_CASE("counts rows") {
        Cfg cfg;
        cespdc_counts_row lo{}, hi{};
        REQUIRE(cespdc_counts_expected(cfg.p, 50.0, &lo) == CESPDC_OK);
        REQUIRE(cespdc_counts_expected(cfg.p, 300.0, &hi) == CESPDC_OK);
        CHECK(lo.car_defined == 1);
        CHECK(lo.car > hi.car);
        // A negative pump falls back to the configured one.
        cespdc_counts_row dflt{};
        REQUIRE(cespdc_counts_expected(cfg.p, -1.0, &dflt) == CESPDC_OK);
        CHECK(dflt.coincidences == hi.coincidences);
    }

    TEST_CASE("interference and qpm") {
        Cfg cfg;
        double v = 0.0;
        REQUIRE(cespdc_umi_tuning_period(cfg.p, &v) == CESPDC_OK);
        CHECK(std::abs(v - 0.094) < 0.001);
        cespdc_qpm_report q{};
        REQUIRE(cespdc_qpm_analyze(cfg.p, 0, &q) == CESPDC_OK);
        CHECK(q.order == 1);
        CHECK(std::abs(q.relative_deviation) < 0.03);
        CHECK(cespdc_qpm_analyze(cfg.p, 2, &q) == CESPDC_ERR_DOMAIN);
        const double L[4] = {0.0, 0.01, 0.02, 0.03};
        double vis[4];
        REQUIRE(cespdc_michelson_series(cfg.p, L, 4, 0.0, vis) == CESPDC_OK);
        cespdc_fit* fit = nullptr;
        CHECK(cespdc_fit_visibility_decay(L, vis, 4, &fit) == CESPDC_ERR_UNDERDETERMINED);
        CHECK(fit == nullptr);
        double ref = 0.0;
        CHECK(cespdc_michelson_reference_linewidth(cfg.p, &ref) == CESPDC_OK);
        CHECK(ref == 546e6);
    }
}
