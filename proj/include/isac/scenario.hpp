#pragma once

/**
 * @file scenario.hpp
 * @brief Deployment description: nodes, sensing mode, targets and environment
 * objects, plus per-link LOS/NLOS draws and single-bounce specular paths off
 * planar environment objects.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "isac/common.hpp"
#include "isac/microdoppler.hpp"
#include "isac/rcs.hpp"

namespace isac::scenario {

enum class NodeKind { bs, ue };

struct Node {
    std::string id;
    NodeKind kind = NodeKind::bs;
    Vec3 position{};
    Vec3 velocity{};
};

enum class SensingMode {
    bs_bs_bistatic,
    bs_monostatic,
    bs_ue_bistatic,
    ue_bs_bistatic,
    ue_ue_bistatic,
    ue_monostatic,
};

[[nodiscard]] bool is_monostatic(SensingMode mode);
[[nodiscard]] NodeKind required_tx_kind(SensingMode mode);
[[nodiscard]] NodeKind required_rx_kind(SensingMode mode);
[[nodiscard]] std::string_view to_string(SensingMode mode);
[[nodiscard]] std::optional<SensingMode> parse_sensing_mode(std::string_view text);
[[nodiscard]] std::string_view to_string(NodeKind kind);

/// Scalar RCS (m^2) or a segmented object evaluated against the link geometry.
using TargetRcs = std::variant<double, rcs::SegmentedObject>;

struct Target {
    std::string id;
    Vec3 position{};
    Vec3 velocity{};
    TargetRcs rcs = 1.0;
    micro::MicroMotionProfile micro_motion = micro::NoMotion{};
    double orientation_rad = 0.0;
};

/// Type-1: scatters like a target, without micro-motion.
struct ScattererObject {
    Vec3 position{};
    Vec3 velocity{};
    TargetRcs rcs = 1.0;
};

/// Type-2: infinite one-sided specular plane, reflecting on the side its normal points to.
struct PlaneObject {
    Vec3 point{};
    Vec3 normal{0.0, 0.0, 1.0};
    double reflection_coefficient = 1.0;
};

struct EnvironmentObject {
    std::string id;
    std::variant<ScattererObject, PlaneObject> kind;
};

struct FixedLos {};
struct FixedNlos {};
struct ExponentialLos {
    double d0_m = 50.0;
};
using LosModel = std::variant<FixedLos, FixedNlos, ExponentialLos>;

enum class LinkState { los, nlos };

struct Scenario {
    double carrier_hz = 3.5e9;
    std::vector<Node> nodes;
    SensingMode mode = SensingMode::bs_monostatic;
    std::string tx_node_id;
    std::string rx_node_id;
    std::vector<Target> targets;
    std::vector<EnvironmentObject> environment_objects;
    LosModel los_model = FixedLos{};
    std::uint64_t seed = 0;

    [[nodiscard]] double wavelength() const { return wavelength_from_carrier(carrier_hz); }
    [[nodiscard]] const Node* find_node(std::string_view id) const;
    /// Throws std::invalid_argument when the id does not resolve.
    [[nodiscard]] const Node& tx() const;
    [[nodiscard]] const Node& rx() const;
};

struct Violation {
    std::string code;    ///< e.g. "unresolved-node", "mode-kind-mismatch"
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate(const Scenario& scenario);

LinkState los_state(double link_distance, const LosModel& model, Rng& rng);

struct TargetLinkStates {
    LinkState tx_to_target = LinkState::los;
    LinkState target_to_rx = LinkState::los;
};

/// Independent draws for the two legs of a target link.
TargetLinkStates draw_target_links(const Scenario& scenario, const Target& target, Rng& rng);

struct SpecularPath {
    std::string eo_id;
    double path_delay_s = 0.0;
    double path_gain = 0.0; ///< linear amplitude
    Angles aod;
    Angles aoa;
    Vec3 reflection_point;
};

std::vector<SpecularPath> specular_paths(const Scenario& scenario);

} // namespace isac::scenario
