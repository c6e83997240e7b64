#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/config.hpp"
#include "core/error.hpp"

using namespace cespdc;
using nlohmann::json;

namespace {

std::string config_error(json patch) {
    json doc = RunConfig::preset("paper");
    doc.merge_patch(patch);
    try {
        RunConfig::from_json(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("paper preset loads and resolves every section") {
        const auto cfg = RunConfig::load({}, std::string("paper"));
        const auto [s, i] = cfg.cavity();
        CHECK(s.fsr_hz == 93.61e9);
        CHECK(i.linewidth_hz == 735e6);
        CHECK(cfg.biphoton().detector_rate_per_s == 4.6112e10);
        CHECK(cfg.source().pair_rate() == doctest::Approx(1439.256 * 300.0));
        CHECK(cfg.detection(Polarization::signal).jitter == JitterModel::response);
        CHECK(cfg.detection(Polarization::signal).jitter_rate_per_s == 4.6112e10);
        CHECK(cfg.detection(Polarization::idler).jitter == JitterModel::none);
        CHECK(cfg.simulation().powers_mw.size() == 6);
        CHECK(cfg.michelson().path_differences_m.size() == 21);
        CHECK(cfg.franson().fringe.visibility == 0.8712);
        CHECK(cfg.umi().resolved_length_m() == 1.022);
        CHECK(cfg.crystal().poling_period_m == 46.2e-6);
        CHECK(cfg.process().order == 1);
    }

    TEST_CASE("errors name the offending path") {
        CHECK(config_error({{"cavity", {{"signal", {{"fsr_hz", -1.0}}}}}}).find("cavity.signal") != std::string::npos);
        CHECK(config_error({{"simulation", {{"duration_s", 0.0}}}}).find("simulation.duration_s") != std::string::npos);
        CHECK(config_error({{"detection", {{"idler", {{"jitter", {{"model", "lorentz"}}}}}}}}).find("detection.idler") !=
              std::string::npos);
        CHECK(config_error({{"crystal", {{"sellmeier", {{"y", "builtin:nope"}}}}}}).find("crystal.sellmeier") !=
              std::string::npos);
        CHECK(config_error({{"biphoton", {{"weights", "gaussian"}}}}).find("biphoton.weights") != std::string::npos);
        CHECK(config_error({{"cavity", {{"signal", {{"fsr_hz", "fast"}}}}}}).find("cavity.signal.fsr_hz") != std::string::npos);
    }

    TEST_CASE("file configs merge over the preset and resolve paths") {
        const auto dir = std::filesystem::temp_directory_path() / "cespdc_config_test";
        std::filesystem::create_directories(dir);
        {
            std::ofstream f(dir / "run.json");
            f << R"({"simulation": {"seed": 77}, "output_dir": "out"})";
        }
        const auto cfg = RunConfig::load(dir / "run.json", std::string("paper"));
        CHECK(cfg.simulation().seed == 77);
        CHECK(cfg.simulation().duration_s == 10.0);
        CHECK(std::filesystem::path(cfg.output_dir()) == dir / "out");
        {
            std::ofstream f(dir / "broken.json");
            f << "{ not json";
        }
        CHECK_THROWS_AS(RunConfig::load(dir / "broken.json", std::string("paper")), ConfigError);
        CHECK_THROWS_AS(RunConfig::load(dir / "missing.json", std::nullopt), ConfigError);
        CHECK_THROWS_AS(RunConfig::preset("lab"), ConfigError);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("qpm weights pick a truncation") {
        json doc = RunConfig::preset("paper");
        doc["biphoton"]["weights"] = "qpm";
        const auto cfg = RunConfig::from_json(doc);
        const auto b = cfg.biphoton();
        CHECK(b.model.modes > 0);
        CHECK(b.model.signal_weights.size() == static_cast<std::size_t>(2 * b.model.modes + 1));
    }
}
