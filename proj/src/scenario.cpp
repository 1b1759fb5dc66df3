#include "isac/scenario.hpp"

#include <array>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace isac::scenario {

namespace {

struct ModeInfo {
    SensingMode mode;
    std::string_view name;
    NodeKind tx;
    NodeKind rx;
    bool monostatic;
};

constexpr std::array<ModeInfo, 6> kModes{{
    {SensingMode::bs_bs_bistatic, "bs-bs-bistatic", NodeKind::bs, NodeKind::bs, false},
    {SensingMode::bs_monostatic, "bs-monostatic", NodeKind::bs, NodeKind::bs, true},
    {SensingMode::bs_ue_bistatic, "bs-ue-bistatic", NodeKind::bs, NodeKind::ue, false},
    {SensingMode::ue_bs_bistatic, "ue-bs-bistatic", NodeKind::ue, NodeKind::bs, false},
    {SensingMode::ue_ue_bistatic, "ue-ue-bistatic", NodeKind::ue, NodeKind::ue, false},
    {SensingMode::ue_monostatic, "ue-monostatic", NodeKind::ue, NodeKind::ue, true},
}};

const ModeInfo& info(SensingMode mode)
{
    for (const auto& m : kModes) {
        if (m.mode == mode) {
            return m;
        }
    }
    throw std::invalid_argument("unknown sensing mode");
}

/// Mirror of p across the plane (q, n).
Vec3 mirror(const Vec3& p, const Vec3& q, const Vec3& n)
{
    return p - n * (2.0 * (p - q).dot(n));
}

} // namespace

bool is_monostatic(SensingMode mode) { return info(mode).monostatic; }
NodeKind required_tx_kind(SensingMode mode) { return info(mode).tx; }
NodeKind required_rx_kind(SensingMode mode) { return info(mode).rx; }
std::string_view to_string(SensingMode mode) { return info(mode).name; }

std::optional<SensingMode> parse_sensing_mode(std::string_view text)
{
    for (const auto& m : kModes) {
        if (m.name == text) {
            return m.mode;
        }
    }
    return std::nullopt;
}

std::string_view to_string(NodeKind kind)
{
    return kind == NodeKind::bs ? "bs" : "ue";
}

const Node* Scenario::find_node(std::string_view id) const
{
    for (const auto& n : nodes) {
        if (n.id == id) {
            return &n;
        }
    }
    return nullptr;
}

const Node& Scenario::tx() const
{
    if (const Node* n = find_node(tx_node_id)) {
        return *n;
    }
    throw std::invalid_argument(fmt::format("tx node '{}' does not exist", tx_node_id));
}

const Node& Scenario::rx() const
{
    if (const Node* n = find_node(rx_node_id)) {
        return *n;
    }
    throw std::invalid_argument(fmt::format("rx node '{}' does not exist", rx_node_id));
}

std::vector<Violation> validate(const Scenario& s)
{
    std::vector<Violation> out;
    const auto add = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };

    if (!(s.carrier_hz > 0.0) || !std::isfinite(s.carrier_hz)) {
        add("invalid-carrier", fmt::format("carrier frequency must be positive, got {}", s.carrier_hz));
    }

    std::set<std::string, std::less<>> ids;
    for (const auto& n : s.nodes) {
        if (!ids.insert(n.id).second) {
            add("duplicate-id", fmt::format("node id '{}' is used more than once", n.id));
        }
        if (!n.position.finite() || !n.velocity.finite()) {
            add("non-finite", fmt::format("node '{}' has non-finite coordinates", n.id));
        }
    }

    const Node* tx = s.find_node(s.tx_node_id);
    const Node* rx = s.find_node(s.rx_node_id);
    if (tx == nullptr) {
        add("unresolved-node", fmt::format("tx node '{}' does not exist", s.tx_node_id));
    }
    if (rx == nullptr) {
        add("unresolved-node", fmt::format("rx node '{}' does not exist", s.rx_node_id));
    }

    const ModeInfo& mode = info(s.mode);
    if (mode.monostatic && s.tx_node_id != s.rx_node_id) {
        add("monostatic-not-colocated",
            fmt::format("{} requires tx and rx to be the same node", mode.name));
    }
    if (!mode.monostatic && s.tx_node_id == s.rx_node_id) {
        add("bistatic-colocated", fmt::format("{} requires distinct tx and rx nodes", mode.name));
    }
    if ((tx != nullptr && tx->kind != mode.tx) || (rx != nullptr && rx->kind != mode.rx)) {
        add("mode-kind-mismatch", fmt::format("{} requires tx kind {} and rx kind {}", mode.name,
                                              to_string(mode.tx), to_string(mode.rx)));
    }

    std::set<std::string, std::less<>> target_ids;
    for (const auto& t : s.targets) {
        if (!target_ids.insert(t.id).second) {
            add("duplicate-id", fmt::format("target id '{}' is used more than once", t.id));
        }
        if (!t.position.finite() || !t.velocity.finite()) {
            add("non-finite", fmt::format("target '{}' has non-finite coordinates", t.id));
        }
        if (const double* sigma = std::get_if<double>(&t.rcs); sigma != nullptr && !(*sigma >= 0.0)) {
            add("invalid-rcs", fmt::format("target '{}' has negative RCS", t.id));
        }
        try {
            micro::validate(t.micro_motion);
        } catch (const std::invalid_argument& e) {
            add("invalid-micro-motion", fmt::format("target '{}': {}", t.id, e.what()));
        }
    }

    for (const auto& eo : s.environment_objects) {
        if (const auto* plane = std::get_if<PlaneObject>(&eo.kind)) {
            if (std::abs(plane->normal.norm() - 1.0) > 1e-9) {
                add("invalid-eo", fmt::format("plane '{}' normal is not a unit vector", eo.id));
            }
            if (!(plane->reflection_coefficient >= 0.0 && plane->reflection_coefficient <= 1.0)) {
                add("invalid-eo", fmt::format("plane '{}' reflection coefficient outside [0,1]", eo.id));
            }
        } else if (const auto* obj = std::get_if<ScattererObject>(&eo.kind)) {
            if (const double* sigma = std::get_if<double>(&obj->rcs); sigma != nullptr && !(*sigma >= 0.0)) {
                add("invalid-rcs", fmt::format("object '{}' has negative RCS", eo.id));
            }
        }
    }
    return out;
}

LinkState los_state(double link_distance, const LosModel& model, Rng& rng)
{
    if (!(link_distance >= 0.0)) {
        throw std::invalid_argument(fmt::format("link distance must be non-negative, got {}", link_distance));
    }
    if (std::holds_alternative<FixedLos>(model)) {
        return LinkState::los;
    }
    if (std::holds_alternative<FixedNlos>(model)) {
        return LinkState::nlos;
    }
    const double d0 = std::get<ExponentialLos>(model).d0_m;
    const double p_los = std::exp(-link_distance / d0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < p_los ? LinkState::los : LinkState::nlos;
}

TargetLinkStates draw_target_links(const Scenario& s, const Target& target, Rng& rng)
{
    TargetLinkStates out;
    out.tx_to_target = los_state(distance(s.tx().position, target.position), s.los_model, rng);
    out.target_to_rx = los_state(distance(target.position, s.rx().position), s.los_model, rng);
    return out;
}

std::vector<SpecularPath> specular_paths(const Scenario& s)
{
    const double lambda = s.wavelength();
    const Vec3 tx = s.tx().position;
    const Vec3 rx = s.rx().position;

    std::vector<SpecularPath> out;
    for (const auto& eo : s.environment_objects) {
        const auto* plane = std::get_if<PlaneObject>(&eo.kind);
        if (plane == nullptr || plane->reflection_coefficient <= 0.0) {
            continue;
        }
        const Vec3 n = plane->normal.normalized();
        const double h_tx = (tx - plane->point).dot(n);
        const double h_rx = (rx - plane->point).dot(n);
        // both endpoints must sit strictly in front of the reflecting face
        if (!(h_tx > 0.0) || !(h_rx > 0.0)) {
            continue;
        }
        const Vec3 image = mirror(tx, plane->point, n);
        const double t = h_tx / (h_tx + h_rx);
        const Vec3 hit = image + (rx - image) * t;
        const double d_total = distance(image, rx);

        SpecularPath p;
        p.eo_id = eo.id;
        p.path_delay_s = d_total / kSpeedOfLight;
        p.path_gain = plane->reflection_coefficient * lambda / (4.0 * kPi * d_total);
        p.aod = direction_angles((hit - tx).normalized());
        p.aoa = direction_angles((hit - rx).normalized());
        p.reflection_point = hit;
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace isac::scenario
