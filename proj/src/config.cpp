#include "isac/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace isac::config {

namespace {

/// Strict view of a YAML mapping: every key must be consumed before finish().
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path))
    {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            throw ConfigError(fmt::format("'{}' must be a mapping", path_));
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

    template <class T>
    void get(const std::string& key, T& out)
    {
        used_.insert(key);
        if (!has(key)) {
            return;
        }
        try {
            out = node_[key].as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(fmt::format("'{}' has an invalid value", where(key)));
        }
    }

    void get_vec3(const std::string& key, Vec3& out)
    {
        std::vector<double> v;
        get(key, v);
        if (!has(key)) {
            return;
        }
        if (v.size() != 3) {
            throw ConfigError(fmt::format("'{}' must be a list of three numbers", where(key)));
        }
        out = {v[0], v[1], v[2]};
    }

    Section child(const std::string& key)
    {
        used_.insert(key);
        return Section(has(key) ? node_[key] : YAML::Node(), where(key));
    }

    std::vector<Section> list(const std::string& key)
    {
        used_.insert(key);
        std::vector<Section> out;
        if (!has(key)) {
            return out;
        }
        const YAML::Node seq = node_[key];
        if (!seq.IsSequence()) {
            throw ConfigError(fmt::format("'{}' must be a list", where(key)));
        }
        for (std::size_t i = 0; i < seq.size(); ++i) {
            out.emplace_back(seq[i], fmt::format("{}[{}]", where(key), i));
        }
        return out;
    }

    void finish() const
    {
        if (!node_ || !node_.IsMap()) {
            return;
        }
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.contains(key)) {
                throw ConfigError(fmt::format("unknown key '{}'", where(key)));
            }
        }
    }

    [[nodiscard]] std::string where(const std::string& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

void apply_override(YAML::Node& root, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(fmt::format("override '{}' is not of the form section.key=value", assignment));
    }
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    std::vector<std::string> parts;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) {
            throw ConfigError(fmt::format("override path '{}' has an empty component", path));
        }
        parts.push_back(part);
    }

    // yaml-cpp nodes are handles; walk with reset() to avoid assigning through aliases
    YAML::Node cur;
    cur.reset(root);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next;
        const bool index = cur.IsSequence() && !parts[i].empty() &&
                           parts[i].find_first_not_of("0123456789") == std::string::npos;
        if (index) {
            const auto n = std::stoul(parts[i]);
            if (n >= cur.size()) {
                throw ConfigError(fmt::format("override path '{}': index {} out of range", path, n));
            }
            next.reset(cur[n]);
        } else {
            if (!cur[parts[i]]) {
                cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
            }
            next.reset(cur[parts[i]]);
        }
        cur.reset(next);
    }
    YAML::Node parsed;
    try {
        parsed = YAML::Load(value);
    } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("override '{}' has an unparsable value", assignment));
    }
    const std::string& leaf = parts.back();
    if (cur.IsSequence() && leaf.find_first_not_of("0123456789") == std::string::npos) {
        const auto n = std::stoul(leaf);
        if (n >= cur.size()) {
            throw ConfigError(fmt::format("override path '{}': index {} out of range", path, n));
        }
        cur[n] = parsed;
    } else {
        cur[leaf] = parsed;
    }
}

rcs::PrimitiveShape read_shape(Section& s)
{
    std::string kind = "rect-plate";
    double reflectivity = 1.0;
    double a = 1.0;
    double b = 1.0;
    double radius = 0.5;
    double height = 1.0;
    s.get("shape", kind);
    s.get("reflectivity", reflectivity);
    try {
        if (kind == "rect-plate") {
            s.get("a", a);
            s.get("b", b);
            return rcs::PrimitiveShape(rcs::RectPlate{a, b}, reflectivity);
        }
        if (kind == "circular-plate") {
            s.get("radius", radius);
            return rcs::PrimitiveShape(rcs::CircularPlate{radius}, reflectivity);
        }
        if (kind == "sphere") {
            s.get("radius", radius);
            return rcs::PrimitiveShape(rcs::Sphere{radius}, reflectivity);
        }
        if (kind == "cylinder") {
            s.get("radius", radius);
            s.get("height", height);
            return rcs::PrimitiveShape(rcs::Cylinder{radius, height}, reflectivity);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("'{}': {}", s.path(), e.what()));
    }
    throw ConfigError(fmt::format("'{}' has unknown shape '{}'", s.where("shape"), kind));
}

ShapeSpec read_shape_spec(Section s)
{
    ShapeSpec spec{read_shape(s)};
    s.get("grid", spec.grid);
    s.get_vec3("center", spec.pose.center);
    s.get_vec3("normal", spec.pose.normal);
    s.get_vec3("u_axis", spec.pose.u_axis);
    s.finish();
    return spec;
}

micro::MicroMotionProfile read_micro(Section s, const OfdmConfig& ofdm)
{
    std::string kind = "none";
    s.get("kind", kind);
    micro::MicroMotionProfile out = micro::NoMotion{};
    const double window = static_cast<double>(ofdm.n_reps) * ofdm.pri_s();
    if (kind == "none") {
        out = micro::NoMotion{};
    } else if (kind == "sinusoid" || kind == "cosine") {
        micro::Sinusoid p{0.0, 1.0 / window, 0.0};
        s.get("peak_doppler_hz", p.peak_doppler_hz);
        s.get("mod_freq_hz", p.mod_freq_hz);
        s.get("phase_rad", p.phase_rad);
        out = p;
    } else if (kind == "sawtooth") {
        micro::Sawtooth p{0.0, window, 0.0};
        s.get("peak_doppler_hz", p.peak_doppler_hz);
        s.get("period_s", p.period_s);
        s.get("phase_rad", p.phase_rad);
        out = p;
    } else if (kind == "rotor") {
        micro::Rotor p;
        s.get("n_blades", p.n_blades);
        s.get("blade_length_m", p.blade_length_m);
        s.get("rpm", p.rpm);
        out = p;
    } else if (kind == "pendulum-arm") {
        micro::PendulumArm p;
        s.get("period_s", p.period_s);
        s.get("peak_speed_mps", p.peak_speed_mps);
        s.get("orientation_rad", p.orientation_rad);
        out = p;
    } else if (kind == "vital") {
        micro::Vital p;
        s.get("amp_displacement_m", p.amp_displacement_m);
        s.get("rate_hz", p.rate_hz);
        out = p;
    } else {
        throw ConfigError(fmt::format("'{}' has unknown micro-motion kind '{}'", s.where("kind"), kind));
    }
    s.finish();
    try {
        micro::validate(out);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("'{}': {}", s.path(), e.what()));
    }
    return out;
}

/// Scalar `rcs_m2` or a segmented `rcs_object`, evaluated against the link ranges.
scenario::TargetRcs read_target_rcs(Section& s, const scenario::Scenario& scn, const Vec3& position,
                                    const std::vector<std::pair<std::string, Vec3>>& nodes)
{
    if (s.has("rcs_m2") && s.has("rcs_object")) {
        throw ConfigError(fmt::format("'{}' sets both rcs_m2 and rcs_object", s.path()));
    }
    double sigma = 1.0;
    s.get("rcs_m2", sigma);
    if (!s.has("rcs_object")) {
        s.child("rcs_object");
        return sigma;
    }
    ShapeSpec spec = read_shape_spec(s.child("rcs_object"));
    spec.pose.center = position;
    double r_min = std::numeric_limits<double>::infinity();
    for (const auto& [id, p] : nodes) {
        if (id == scn.tx_node_id || id == scn.rx_node_id) {
            r_min = std::min(r_min, distance(p, position));
        }
    }
    if (!std::isfinite(r_min) || !(r_min > 0.0)) {
        throw ConfigError(fmt::format("'{}': segmented target needs resolvable tx/rx nodes", s.path()));
    }
    try {
        return build_object(spec, wavelength_from_carrier(scn.carrier_hz), r_min);
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("'{}': {}", s.where("rcs_object"), e.what()));
    }
}

/// Keys absent from the section keep the values of `scn`; lists replace wholesale.
scenario::Scenario read_scenario(Section s, const OfdmConfig& ofdm, scenario::Scenario scn)
{
    s.get("carrier_hz", scn.carrier_hz);
    s.get("seed", scn.seed);
    std::string mode{scenario::to_string(scn.mode)};
    s.get("mode", mode);
    const auto parsed = scenario::parse_sensing_mode(mode);
    if (!parsed) {
        throw ConfigError(fmt::format("'{}' has unknown sensing mode '{}'", s.where("mode"), mode));
    }
    scn.mode = *parsed;
    s.get("tx", scn.tx_node_id);
    s.get("rx", scn.rx_node_id);

    if (s.has("los_model")) {
        Section los = s.child("los_model");
        std::string kind = "fixed-los";
        los.get("kind", kind);
        if (kind == "fixed-los") {
            scn.los_model = scenario::FixedLos{};
        } else if (kind == "fixed-nlos") {
            scn.los_model = scenario::FixedNlos{};
        } else if (kind == "exponential") {
            scenario::ExponentialLos e;
            los.get("d0_m", e.d0_m);
            if (!(e.d0_m > 0.0)) {
                throw ConfigError(fmt::format("'{}' must be positive", los.where("d0_m")));
            }
            scn.los_model = e;
        } else {
            throw ConfigError(fmt::format("'{}' has unknown LOS model '{}'", los.where("kind"), kind));
        }
        los.finish();
    }
    s.child("los_model");

    std::vector<std::pair<std::string, Vec3>> node_positions;
    if (s.has("nodes")) {
        scn.nodes.clear();
    }
    for (const auto& n : scn.nodes) {
        node_positions.emplace_back(n.id, n.position);
    }
    for (auto& n : s.list("nodes")) {
        scenario::Node node;
        std::string kind = "bs";
        n.get("id", node.id);
        n.get("kind", kind);
        if (kind != "bs" && kind != "ue") {
            throw ConfigError(fmt::format("'{}' must be bs or ue", n.where("kind")));
        }
        node.kind = kind == "bs" ? scenario::NodeKind::bs : scenario::NodeKind::ue;
        n.get_vec3("position", node.position);
        n.get_vec3("velocity", node.velocity);
        n.finish();
        node_positions.emplace_back(node.id, node.position);
        scn.nodes.push_back(std::move(node));
    }

    if (s.has("targets")) {
        scn.targets.clear();
    }
    for (auto& t : s.list("targets")) {
        scenario::Target target;
        t.get("id", target.id);
        t.get_vec3("position", target.position);
        t.get_vec3("velocity", target.velocity);
        t.get("orientation_rad", target.orientation_rad);
        target.rcs = read_target_rcs(t, scn, target.position, node_positions);
        target.micro_motion = read_micro(t.child("micro_motion"), ofdm);
        t.finish();
        scn.targets.push_back(std::move(target));
    }

    if (s.has("environment_objects")) {
        scn.environment_objects.clear();
    }
    for (auto& e : s.list("environment_objects")) {
        scenario::EnvironmentObject eo;
        std::string type;
        e.get("id", eo.id);
        e.get("type", type);
        if (type == "plane") {
            scenario::PlaneObject p;
            e.get_vec3("point", p.point);
            e.get_vec3("normal", p.normal);
            e.get("reflection_coefficient", p.reflection_coefficient);
            eo.kind = p;
        } else if (type == "scatterer") {
            scenario::ScattererObject o;
            e.get_vec3("position", o.position);
            e.get_vec3("velocity", o.velocity);
            o.rcs = read_target_rcs(e, scn, o.position, node_positions);
            eo.kind = o;
        } else {
            throw ConfigError(fmt::format("'{}' must be plane or scatterer", e.where("type")));
        }
        e.finish();
        scn.environment_objects.push_back(std::move(eo));
    }
    s.finish();
    return scn;
}

void read_ofdm(Section s, OfdmConfig& ofdm)
{
    s.get("scs_hz", ofdm.scs_hz);
    s.get("bandwidth_hz", ofdm.bandwidth_hz);
    s.get("pri_symbols", ofdm.pri_symbols);
    s.get("n_reps", ofdm.n_reps);
    if (s.has("snr_db")) {
        std::string text;
        s.get("snr_db", text);
        if (text == "inf" || text == ".inf" || text == "none") {
            ofdm.snr_db = std::numeric_limits<double>::infinity();
        } else {
            s.get("snr_db", ofdm.snr_db);
        }
    }
    std::string window = "rectangular";
    s.get("doppler_window", window);
    if (window == "rectangular") {
        ofdm.doppler_window = DopplerWindow::rectangular;
    } else if (window == "hann") {
        ofdm.doppler_window = DopplerWindow::hann;
    } else {
        throw ConfigError(fmt::format("'{}' must be rectangular or hann", s.where("doppler_window")));
    }
    s.finish();
    try {
        ofdm.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("'ofdm': {}", e.what()));
    }
}

void read_channel(Section s, channel::ChannelConfig& c)
{
    s.get("n_background", c.n_background);
    s.get("delay_spread_s", c.delay_spread_s);
    s.get("n_rays", c.n_rays);
    s.get("micro_subset", c.micro_subset);
    s.get("cluster_spread_deg", c.cluster_spread_deg);
    s.get("target_power_db", c.target_power_db);
    s.get("background_gain_db", c.background_gain_db);
    s.get("nlos_excess_loss_db", c.nlos_excess_loss_db);
    std::string model = "normalized";
    s.get("power_model", model);
    if (model == "normalized") {
        c.power_model = channel::PowerModel::normalized;
    } else if (model == "link-budget") {
        c.power_model = channel::PowerModel::link_budget;
    } else {
        throw ConfigError(fmt::format("'{}' must be normalized or link-budget", s.where("power_model")));
    }
    if (c.n_rays == 0) {
        throw ConfigError("'channel.n_rays' must be at least 1");
    }
    s.finish();
}

void read_simulate(Section s, SimulateConfig& c)
{
    s.get("trials", c.trials);
    s.get("threshold_db", c.detect.threshold_db);
    s.get("guard_bins", c.detect.guard_bins);
    if (c.trials == 0) {
        throw ConfigError("'simulate.trials' must be at least 1");
    }
    s.finish();
}

void read_rcs_sweep(Section s, RcsSweepConfig& c)
{
    c.object = read_shape_spec(s.child("object"));
    s.get("distances_m", c.distances_m);
    s.get("angle_start_deg", c.angle_start_deg);
    s.get("angle_stop_deg", c.angle_stop_deg);
    s.get("angle_step_deg", c.angle_step_deg);
    std::string agg = "coherent";
    s.get("aggregation", agg);
    if (agg == "coherent") {
        c.aggregation = rcs::Aggregation::coherent;
    } else if (agg == "incoherent") {
        c.aggregation = rcs::Aggregation::incoherent;
    } else {
        throw ConfigError(fmt::format("'{}' must be coherent or incoherent", s.where("aggregation")));
    }
    if (!(c.angle_step_deg > 0.0) || c.angle_stop_deg < c.angle_start_deg || c.distances_m.empty()) {
        throw ConfigError("'rcs_sweep' needs a positive angle step, ordered bounds and at least one distance");
    }
    s.finish();
}

void read_microdoppler(Section s, MicroDopplerConfig& c)
{
    s.get("period_s", c.scene.period_s);
    s.get("peak_speed_mps", c.scene.peak_speed_mps);
    s.get_vec3("body_position", c.scene.body_position);
    s.get_vec3("radar_position", c.scene.tx_position);
    c.scene.rx_position = c.scene.tx_position;
    s.get("left_amplitude", c.scene.left_amplitude);
    s.get("right_amplitude", c.scene.right_amplitude);
    s.get("orientations_deg", c.orientations_deg);
    s.get("duration_s", c.duration_s);
    s.get("sample_rate_hz", c.sample_rate_hz);
    s.get("window_len", c.window_len);
    s.get("hop", c.hop);
    s.get("nfft", c.nfft);
    if (!(c.scene.period_s > 0.0) || !(c.sample_rate_hz > 0.0) || !(c.duration_s > 0.0) || c.hop == 0 ||
        c.window_len == 0) {
        throw ConfigError("'microdoppler' needs positive period, sample rate, duration, window and hop");
    }
    s.finish();
}

} // namespace

rcs::SegmentedObject build_object(const ShapeSpec& spec, double wavelength, double r_min)
{
    if (spec.grid == 0) {
        return rcs::segment_object(spec.shape, wavelength, r_min, spec.pose);
    }
    return rcs::segment_grid(spec.shape, spec.grid, wavelength, spec.pose);
}

SimulationConfig load_config_text(const std::string& yaml, const std::vector<std::string>& overrides)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml);
    } catch (const YAML::Exception& e) {
        throw ConfigReadError(fmt::format("YAML parse error: {}", e.what()));
    }
    if (!root || root.IsNull()) {
        root = YAML::Node(YAML::NodeType::Map);
    }
    if (!root.IsMap()) {
        throw ConfigError("configuration root must be a mapping");
    }
    for (const auto& o : overrides) {
        apply_override(root, o);
    }

    Section top(root, "");
    SimulationConfig cfg;
    read_ofdm(top.child("ofdm"), cfg.ofdm);
    cfg.scenario = read_scenario(top.child("scenario"), cfg.ofdm, cfg.scenario);
    cfg.ofdm.carrier_hz = cfg.scenario.carrier_hz;
    read_channel(top.child("channel"), cfg.channel);
    read_simulate(top.child("simulate"), cfg.simulate);
    read_rcs_sweep(top.child("rcs_sweep"), cfg.rcs_sweep);
    read_microdoppler(top.child("microdoppler"), cfg.microdoppler);
    top.finish();
    return cfg;
}

SimulationConfig load_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigReadError(fmt::format("cannot read scenario file '{}'", path.string()));
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return load_config_text(buf.str(), overrides);
    } catch (const ConfigReadError& e) {
        throw ConfigReadError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

} // namespace isac::config
