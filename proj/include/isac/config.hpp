#pragma once

/**
 * @file config.hpp
 * @brief YAML run configuration: scenario, OFDM numerology, channel options,
 * and the parameters of the RCS-sweep and micro-Doppler workflows.
 *
 * Every section is optional and falls back to the link-level defaults. Unknown
 * keys are rejected at load time. See README.md for the full key reference.
 */

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isac/channel.hpp"
#include "isac/microdoppler.hpp"
#include "isac/ofdm_config.hpp"
#include "isac/rcs.hpp"
#include "isac/scenario.hpp"
#include "isac/sensing.hpp"

namespace isac::config {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened or parsed as YAML.
class ConfigReadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ShapeSpec {
    rcs::PrimitiveShape shape{rcs::RectPlate{1.0, 1.0}};
    std::size_t grid = 0; ///< 0 selects the smallest feasible grid
    rcs::Pose pose{};
};

struct RcsSweepConfig {
    ShapeSpec object{};
    std::vector<double> distances_m{30.0};
    double angle_start_deg = 0.0;
    double angle_stop_deg = 60.0;
    double angle_step_deg = 1.0;
    rcs::Aggregation aggregation = rcs::Aggregation::coherent;
};

struct MicroDopplerConfig {
    micro::ArmSwingScene scene{};
    std::vector<double> orientations_deg{0.0, 30.0, 60.0, 90.0};
    double duration_s = 3.0;
    double sample_rate_hz = 1000.0;
    std::size_t window_len = 128;
    std::size_t hop = 16;
    std::size_t nfft = 1024;
};

struct SimulateConfig {
    std::size_t trials = 1;
    sensing::DetectOptions detect{};
};

struct SimulationConfig {
    scenario::Scenario scenario = sensing::table1_scenario();
    OfdmConfig ofdm{};
    channel::ChannelConfig channel{};
    SimulateConfig simulate{};
    RcsSweepConfig rcs_sweep{};
    MicroDopplerConfig microdoppler{};
};

/// Parses YAML text after applying `section.key=value` overrides. Throws ConfigError on schema errors.
SimulationConfig load_config_text(const std::string& yaml, const std::vector<std::string>& overrides = {});

/// Throws ConfigReadError when the file cannot be read.
SimulationConfig load_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Builds a segmented object for a target given the link ranges.
rcs::SegmentedObject build_object(const ShapeSpec& spec, double wavelength, double r_min);

} // namespace isac::config
