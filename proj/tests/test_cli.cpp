#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "cespdc_cli_test";

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" CESPDC_CLI_PATH "\" " + args + " >" + (kWork / "stdout.txt").string() + " 2>" +
                            (kWork / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct Workspace {
    Workspace() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
        write(kWork / "short.json", R"({"simulation": {"duration_s": 0.3, "seed": 12}})");
    }
    ~Workspace() { fs::remove_all(kWork); }
};

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("cluster report") {
        Workspace ws;
        REQUIRE(run("cluster --preset paper --out " + (kWork / "c").string()) == 0);
        const auto j = nlohmann::json::parse(slurp(kWork / "c" / "cluster.json"));
        for (const char* key : {"cluster_spacing_hz", "N_s", "N_i", "delta_nu_hz", "single_mode"}) CHECK(j.contains(key));
        CHECK(j["single_mode"].get<bool>());
        CHECK(slurp(kWork / "stdout.txt").find("1997.758 GHz") != std::string::npos);
    }

    TEST_CASE("simulated runs are byte-identical for a fixed seed") {
        Workspace ws;
        const std::string cfg = (kWork / "short.json").string();
        REQUIRE(run("g2 --simulate --preset paper --config " + cfg + " --out " + (kWork / "a").string()) == 0);
        REQUIRE(run("g2 --simulate --preset paper --config " + cfg + " --out " + (kWork / "b").string()) == 0);
        for (const char* f : {"histogram.csv", "signal.ttag", "idler.ttag", "g2_report.json"}) {
            const auto a = slurp(kWork / "a" / f);
            CHECK(!a.empty());
            CHECK(a == slurp(kWork / "b" / f));
        }
        REQUIRE(run("g2 --simulate --preset paper --config " + cfg + " --seed 13 --out " + (kWork / "c").string()) == 0);
        CHECK(slurp(kWork / "a" / "signal.ttag") != slurp(kWork / "c" / "signal.ttag"));
        CHECK(slurp(kWork / "a" / "histogram.csv").rfind("delay_ps,counts\n", 0) == 0);
    }

    TEST_CASE("output directory precedence") {
        Workspace ws;
        const std::string env = "CESPDC_OUT=" + (kWork / "env").string();
        REQUIRE(run("qpm --preset paper", env) == 0);
        CHECK(fs::exists(kWork / "env" / "qpm.json"));
        REQUIRE(run("qpm --preset paper --out " + (kWork / "flag").string(), env) == 0);
        CHECK(fs::exists(kWork / "flag" / "qpm.json"));
        write(kWork / "dir.json", R"({"output_dir": "from_config"})");
        REQUIRE(run("qpm --preset paper --config " + (kWork / "dir.json").string(), "CESPDC_OUT=") == 0);
        CHECK(fs::exists(kWork / "from_config" / "qpm_spectrum.csv"));
        const auto spectrum = slurp(kWork / "from_config" / "qpm_spectrum.csv");
        CHECK(spectrum.rfind("detuning_hz,intensity\n", 0) == 0);
        CHECK(std::count(spectrum.begin(), spectrum.end(), '\n') == 802);
    }

    TEST_CASE("exit code 2 on configuration and usage errors") {
        Workspace ws;
        write(kWork / "bad.json", R"({"cavity": {"signal": {"linewidth_hz": -5}}})");
        CHECK(run("cluster --preset paper --config " + (kWork / "bad.json").string()) == 2);
        CHECK(slurp(kWork / "stderr.txt").find("cavity.signal.linewidth_hz") != std::string::npos);
        CHECK(run("cluster") == 2);
        CHECK(run("cluster --config " + (kWork / "nothing.json").string()) == 2);
        CHECK(run("frobnicate --preset paper") == 2);
        CHECK(run("g2 --analytic --simulate --preset paper") == 2);
        CHECK(run("qpm --preset paper --order 2 --out " + (kWork / "q").string()) == 2);
    }

    TEST_CASE("exit code 3 when a fit cannot be determined") {
        Workspace ws;
        CHECK(run("michelson --preset paper --fit -L 0,0.01,0.02,0.03 --out " + (kWork / "m").string()) == 3);
        CHECK(fs::exists(kWork / "m" / "michelson.csv"));
    }

    TEST_CASE("michelson report") {
        Workspace ws;
        REQUIRE(run("michelson --preset paper --fit --out " + (kWork / "m").string()) == 0);
        const auto j = nlohmann::json::parse(slurp(kWork / "m" / "michelson_fit.json"));
        CHECK(j["relative_deviation"].get<double>() == doctest::Approx(0.0419).epsilon(0.01));
        CHECK(slurp(kWork / "stdout.txt").find("4.19 %") != std::string::npos);
    }

    TEST_CASE("undefined CAR is left empty with a warning") {
        Workspace ws;
        write(kWork / "dark.json",
              R"({"detection": {"signal": {"dark_rate_hz": 0}, "idler": {"dark_rate_hz": 0}},
                  "simulation": {"duration_s": 0.2}})");
        REQUIRE(run("counts --simulate --powers 5 --preset paper --config " + (kWork / "dark.json").string() + " --out " +
                    (kWork / "d").string()) == 0);
        const auto csv = slurp(kWork / "d" / "counts.csv");
        CHECK(csv.rfind("power_mw,singles_s,singles_i,coincidences,car\n5,", 0) == 0);
        CHECK(csv.substr(csv.size() - 2) == ",\n");
        CHECK(slurp(kWork / "stderr.txt").find("warning: CAR undefined") != std::string::npos);
    }

    TEST_CASE("analytic g2 artifacts") {
        Workspace ws;
        REQUIRE(run("g2 --preset paper --fit --out " + (kWork / "g").string()) == 0);
        for (const char* f : {"g2_analytic.csv", "g2_convolved.csv", "g2_report.json", "g2_fit.json"}) {
            CHECK(fs::exists(kWork / "g" / f));
        }
        const auto rep = nlohmann::json::parse(slurp(kWork / "g" / "g2_report.json"));
        CHECK(rep["fwhm_convolved_s"].get<double>() == doctest::Approx(0.412e-9).epsilon(0.01));
    }
}
