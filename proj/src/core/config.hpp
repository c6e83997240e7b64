#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/biphoton.hpp"
#include "core/cavity.hpp"
#include "core/counting.hpp"
#include "core/interference.hpp"
#include "core/qpm.hpp"

namespace cespdc {

struct BiphotonSettings {
    BiphotonModel model;
    double detector_rate_per_s = 0.0;
    GridSpec grid;
};

struct SimulationConfig {
    double duration_s = 10.0;
    std::uint64_t seed = 1;
    double bin_width_s = 25e-12;
    double range_s = 5e-9;
    double coincidence_window_s = 1e-9;
    double slab_s = 1e-2;
    std::vector<double> powers_mw;
};

struct MichelsonConfig {
    MichelsonModel model;
    double reference_linewidth_hz = 0.0;  // cavity-scan linewidth the fit is compared to
    std::vector<double> path_differences_m;
};

struct FransonSettings {
    FransonConfig fringe;
    double amplitude = 1000.0;
    int points = 64;
};

/// A run configuration: one JSON document with sections crystal, process,
/// cavity, biphoton, source, detection, simulation, interference, output_dir.
/// Sections are optional until a command needs them; every section present is
/// validated at load and errors name the offending path (ConfigError).
class RunConfig {
public:
    /// `config_path` may be empty when a preset is given. The config document
    /// is merged over the preset (RFC 7386 merge patch).
    static RunConfig load(const std::filesystem::path& config_path, const std::optional<std::string>& preset);
    static RunConfig from_json(nlohmann::json doc, std::filesystem::path base_dir = ".");

    /// Shipped presets ("paper").
    static nlohmann::json preset(const std::string& name);

    const nlohmann::json& document() const { return doc_; }
    bool has(const std::string& section) const { return doc_.contains(section); }
    const std::filesystem::path& base_dir() const { return base_dir_; }

    CrystalSpec crystal() const;
    SpdcProcess process() const;
    std::pair<CavityModeStructure, CavityModeStructure> cavity() const;
    BiphotonSettings biphoton() const;
    SourceModel source() const;
    DetectionChain detection(Polarization arm) const;
    SimulationConfig simulation() const;
    MichelsonConfig michelson() const;
    FransonSettings franson() const;
    UmiThermal umi() const;
    std::string output_dir() const;

private:
    void validate_all() const;

    nlohmann::json doc_;
    std::filesystem::path base_dir_;
};

}  // namespace cespdc
