#include "isac/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace isac::channel {

namespace {

// Intra-cluster ray offsets for 20 rays, in units of the cluster angular spread.
constexpr std::array<double, 10> kRayOffsetTable{0.0447, 0.1413, 0.2492, 0.3715, 0.5129,
                                                 0.6797, 0.8844, 1.1481, 1.5195, 2.1551};

constexpr std::uint64_t kStreamLos = 1;
constexpr std::uint64_t kStreamBackground = 2;
constexpr std::uint64_t kStreamRays = 3;

Vec3 rotate_z(const Vec3& v, double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

Vec3 facing_direction(const scenario::Target& target)
{
    Vec3 base{1.0, 0.0, 0.0};
    if (const auto* obj = std::get_if<rcs::SegmentedObject>(&target.rcs)) {
        base = obj->segments().front().normal;
    }
    return rotate_z(base, target.orientation_rad);
}

/// Monostatic aspect sweep of a segmented object in the plane spanned by its
/// first segment's normal and u axis.
rcs::RcsDecomposition sweep_object(const rcs::SegmentedObject& obj, double wavelength, double range)
{
    const auto& ref = obj.segments().front();
    const Vec3 n = ref.normal;
    const Vec3 u = ref.u_axis;
    std::vector<rcs::SweepSample> sweep;
    for (int deg = 0; deg < 90; ++deg) {
        const double a = deg * kPi / 180.0;
        const Vec3 probe = ref.center + (n * std::cos(a) + u * std::sin(a)) * range;
        sweep.push_back({rcs::AspectAngles::monostatic(a), rcs::object_rcs(obj, probe, probe, wavelength)});
    }
    return rcs::decompose_slow_fast(sweep);
}

void require_distance(double d, const char* leg)
{
    if (!(d > 1e-9)) {
        throw DegenerateGeometry(fmt::format("target is co-located with the {} node", leg));
    }
}

} // namespace

std::vector<double> ray_offsets(std::size_t n_rays, double cluster_spread_deg)
{
    const double scale = cluster_spread_deg * kPi / 180.0;
    std::vector<double> out;
    out.reserve(n_rays);
    if (n_rays == 2 * kRayOffsetTable.size()) {
        for (double v : kRayOffsetTable) {
            out.push_back(v * scale);
            out.push_back(-v * scale);
        }
        return out;
    }
    if (n_rays == 1) {
        return {0.0};
    }
    const double span = kRayOffsetTable.back();
    for (std::size_t i = 0; i < n_rays; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n_rays - 1);
        out.push_back((-span + 2.0 * span * f) * scale);
    }
    return out;
}

std::vector<double> draw_cluster_delays(std::size_t n_clusters, double delay_spread_s, Rng& rng)
{
    if (!(delay_spread_s >= 0.0)) {
        throw std::invalid_argument("delay spread must be non-negative");
    }
    std::vector<double> delays(n_clusters);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& d : delays) {
        // 1 - U lies in (0, 1], keeping the logarithm finite
        d = -delay_spread_s * std::log(1.0 - u(rng));
    }
    return delays;
}

std::vector<Cluster> generate_background(std::size_t n_clusters, double delay_spread_s, Rng& rng, std::size_t n_rays)
{
    if (n_rays == 0) {
        throw std::invalid_argument("clusters need at least one ray");
    }
    std::vector<Cluster> out;
    if (n_clusters == 0) {
        return out;
    }
    std::vector<double> delays = draw_cluster_delays(n_clusters, delay_spread_s, rng);
    std::sort(delays.begin(), delays.end());
    const double first = delays.front();

    std::uniform_real_distribution<double> azimuth(-kPi, kPi);
    std::uniform_real_distribution<double> zenith(0.0, kPi);
    const auto offsets = ray_offsets(n_rays);
    out.reserve(n_clusters);
    for (double d : delays) {
        Cluster c;
        c.delay_s = d - first;
        c.power = delay_spread_s > 0.0 ? std::exp(-c.delay_s / delay_spread_s) : 1.0;
        c.aod = {azimuth(rng), zenith(rng)};
        c.aoa = {azimuth(rng), zenith(rng)};
        c.n_rays = n_rays;
        c.ray_angle_offsets = offsets;
        c.kind = ClusterKind::background;
        out.push_back(std::move(c));
    }
    normalize_powers(out);
    return out;
}

void normalize_powers(std::vector<Cluster>& clusters)
{
    double total = 0.0;
    for (const auto& c : clusters) {
        if (!(c.power >= 0.0)) {
            throw std::invalid_argument("cluster power must be non-negative");
        }
        total += c.power;
    }
    if (clusters.empty()) {
        return;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("cannot normalize clusters with zero total power");
    }
    for (auto& c : clusters) {
        c.power /= total;
    }
}

double sensing_pathloss(double d_tx, double d_rx, double wavelength, double sigma_slow)
{
    if (!(d_tx > 0.0) || !(d_rx > 0.0) || !(wavelength > 0.0)) {
        throw std::invalid_argument("distances and wavelength must be positive");
    }
    if (!(sigma_slow >= 0.0)) {
        throw std::invalid_argument("RCS must be non-negative");
    }
    if (sigma_slow == 0.0) {
        return kNoEcho;
    }
    const double four_pi_cubed = std::pow(4.0 * kPi, 3);
    return to_db(four_pi_cubed * d_tx * d_tx * d_rx * d_rx / (sigma_slow * wavelength * wavelength));
}

TargetLink concatenate_target_link(const scenario::Scenario& scenario, const scenario::Target& target,
                                   const scenario::TargetLinkStates& los, const TargetLinkOptions& options)
{
    const double lambda = scenario.wavelength();
    const scenario::Node& tx = scenario.tx();
    const scenario::Node& rx = scenario.rx();

    TargetLink link;
    link.d_tx = distance(tx.position, target.position);
    link.d_rx = distance(rx.position, target.position);
    require_distance(link.d_tx, "tx");
    require_distance(link.d_rx, "rx");

    const Vec3 u_tx = (target.position - tx.position) * (1.0 / link.d_tx); // Tx -> target
    const Vec3 u_rx = (target.position - rx.position) * (1.0 / link.d_rx); // Rx -> target

    // rate of change of the two-way path length
    const double range_rate = (target.velocity - tx.velocity).dot(u_tx) + (target.velocity - rx.velocity).dot(u_rx);
    link.doppler_hz = range_rate / lambda;

    const Vec3 facing = facing_direction(target);
    link.geometry_factor = micro::geometry_factor(u_tx, u_rx, facing);

    const Vec3 bisector = -(u_tx + u_rx);
    double aspect = kPi / 2;
    if (bisector.norm() > 1e-12) {
        aspect = std::acos(std::clamp(std::abs(bisector.normalized().dot(facing)), 0.0, 1.0));
    }

    if (const double* sigma = std::get_if<double>(&target.rcs)) {
        link.sigma_slow = *sigma;
    } else {
        const auto& obj = std::get<rcs::SegmentedObject>(target.rcs);
        link.fast = sweep_object(obj, lambda, options.sweep_range_m);
        link.sigma_slow = from_db(link.fast->slow_db);
    }

    link.pathloss_db = sensing_pathloss(link.d_tx, link.d_rx, lambda, link.sigma_slow);
    if (los.tx_to_target == scenario::LinkState::nlos) {
        link.pathloss_db += options.nlos_excess_loss_db;
    }
    if (los.target_to_rx == scenario::LinkState::nlos) {
        link.pathloss_db += options.nlos_excess_loss_db;
    }

    Cluster& c = link.cluster;
    c.delay_s = (link.d_tx + link.d_rx) / kSpeedOfLight;
    c.power = 1.0;
    c.path_gain = std::isinf(link.pathloss_db) ? 0.0 : from_db(-link.pathloss_db);
    c.doppler_hz = link.doppler_hz;
    c.aod = direction_angles(u_tx);
    c.aoa = direction_angles(u_rx);
    c.n_rays = options.n_rays;
    c.ray_angle_offsets = ray_offsets(options.n_rays, options.cluster_spread_deg);
    c.kind = ClusterKind::sensing;
    c.target_id = target.id;
    c.aspect_rad = aspect;
    return link;
}

ComplexGrid ChannelRealization::total() const
{
    ComplexGrid out = background;
    out += target;
    return out;
}

ChannelRealization freq_response(const std::vector<Cluster>& clusters, const OfdmConfig& ofdm,
                                 const std::map<std::string, SensingExtras>& extras, Rng& rng,
                                 const FreqResponseOptions& options)
{
    ofdm.validate();
    const std::size_t n_sc = ofdm.n_sc();
    const std::size_t n_reps = ofdm.n_reps;
    const double pri = ofdm.pri_s();
    const double lambda = ofdm.wavelength();

    ChannelRealization out;
    out.clusters = clusters;
    out.target = ComplexGrid(n_sc, n_reps);
    out.background = ComplexGrid(n_sc, n_reps);
    out.carrier_hz = ofdm.carrier_hz;
    out.scs_hz = ofdm.scs_hz;
    out.pri_s = pri;

    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    std::vector<cplx> delay_phase(n_sc);
    std::vector<cplx> slow(n_reps);

    for (const Cluster& c : clusters) {
        if (c.n_rays == 0) {
            throw std::invalid_argument("clusters need at least one ray");
        }
        const bool sensing = c.kind == ClusterKind::sensing;
        const SensingExtras* extra = nullptr;
        if (sensing) {
            if (auto it = extras.find(c.target_id); it != extras.end()) {
                extra = &it->second;
            }
        }

        // random initial phase per ray, then the micro-Doppler ray subset
        std::vector<double> ray_phase(c.n_rays);
        for (auto& p : ray_phase) {
            p = phase(rng);
        }
        std::vector<bool> micro_ray(c.n_rays, false);
        std::vector<double> micro_phase;
        if (extra != nullptr && !std::holds_alternative<micro::NoMotion>(extra->micro)) {
            std::vector<std::size_t> idx(c.n_rays);
            std::iota(idx.begin(), idx.end(), 0);
            const std::size_t subset = std::min(options.micro_subset, c.n_rays);
            for (std::size_t i = 0; i < subset; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, c.n_rays - 1);
                std::swap(idx[i], idx[pick(rng)]);
                micro_ray[idx[i]] = true;
            }
            micro_phase = micro::micro_phase_series(extra->micro, lambda, static_cast<double>(n_reps) * pri, pri,
                                                    extra->geometry_factor)
                              .samples;
        }

        const double ray_amp = std::sqrt(c.power * c.path_gain / static_cast<double>(c.n_rays));
        std::fill(slow.begin(), slow.end(), cplx{});
        for (std::size_t r = 0; r < c.n_rays; ++r) {
            double gain = 1.0;
            if (extra != nullptr && extra->fast_gain) {
                const double offset = r < c.ray_angle_offsets.size() ? c.ray_angle_offsets[r] : 0.0;
                gain = extra->fast_gain(std::clamp(c.aspect_rad + offset, 0.0, kPi / 2));
            }
            const cplx a = ray_amp * std::sqrt(gain) * std::polar(1.0, ray_phase[r]);
            for (std::size_t m = 0; m < n_reps; ++m) {
                slow[m] += micro_ray[r] ? a * std::polar(1.0, micro_phase[m]) : a;
            }
        }
        for (std::size_t m = 0; m < n_reps; ++m) {
            slow[m] *= std::polar(1.0, 2.0 * kPi * c.doppler_hz * static_cast<double>(m) * pri);
        }
        for (std::size_t k = 0; k < n_sc; ++k) {
            delay_phase[k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) * ofdm.scs_hz * c.delay_s);
        }

        ComplexGrid& dst = sensing ? out.target : out.background;
        for (std::size_t k = 0; k < n_sc; ++k) {
            auto row = dst.row(k);
            for (std::size_t m = 0; m < n_reps; ++m) {
                row[m] += delay_phase[k] * slow[m];
            }
        }
    }
    return out;
}

ChannelRealization build_realization(const scenario::Scenario& scenario, const OfdmConfig& ofdm,
                                     const ChannelConfig& config, std::uint64_t seed, std::uint64_t realization_index)
{
    if (const auto violations = scenario::validate(scenario); !violations.empty()) {
        std::string msg = "invalid scenario:";
        for (const auto& v : violations) {
            msg += fmt::format(" [{}] {};", v.code, v.message);
        }
        throw std::invalid_argument(msg);
    }
    if (std::abs(scenario.carrier_hz - ofdm.carrier_hz) > 1e-6 * ofdm.carrier_hz) {
        throw std::invalid_argument("scenario and OFDM carrier frequencies differ");
    }

    Rng los_rng = make_stream(seed, kStreamLos, realization_index);
    Rng bg_rng = make_stream(seed, kStreamBackground, realization_index);
    Rng ray_rng = make_stream(seed, kStreamRays, realization_index);

    TargetLinkOptions link_opts;
    link_opts.nlos_excess_loss_db = config.nlos_excess_loss_db;
    link_opts.cluster_spread_deg = config.cluster_spread_deg;
    link_opts.n_rays = config.n_rays;

    const bool budget = config.power_model == PowerModel::link_budget;
    std::vector<Cluster> clusters;
    std::map<std::string, SensingExtras> extras;
    // absolute (link_budget) or relative-to-strongest-background (normalized) powers
    std::vector<double> raw;

    for (const auto& target : scenario.targets) {
        const auto states = scenario::draw_target_links(scenario, target, los_rng);
        TargetLink link = concatenate_target_link(scenario, target, states, link_opts);
        SensingExtras extra;
        extra.micro = target.micro_motion;
        extra.geometry_factor = link.geometry_factor;
        if (link.fast) {
            extra.fast_gain = [fast = *link.fast](double aspect) { return fast.fast_gain(aspect); };
        }
        extras.emplace(target.id, std::move(extra));
        raw.push_back(budget ? link.cluster.path_gain : from_db(config.target_power_db));
        clusters.push_back(std::move(link.cluster));
    }

    auto background = generate_background(config.n_background, config.delay_spread_s, bg_rng, config.n_rays);
    const double strongest = background.empty() ? 1.0 : background.front().power;
    for (auto& c : background) {
        c.ray_angle_offsets = ray_offsets(config.n_rays, config.cluster_spread_deg);
        raw.push_back(budget ? c.power * from_db(config.background_gain_db) : c.power / strongest);
        clusters.push_back(std::move(c));
    }

    for (const auto& eo : scenario.environment_objects) {
        if (const auto* obj = std::get_if<scenario::ScattererObject>(&eo.kind)) {
            scenario::Target pseudo{eo.id, obj->position, obj->velocity, obj->rcs, micro::NoMotion{}, 0.0};
            const auto states = scenario::draw_target_links(scenario, pseudo, los_rng);
            TargetLink link = concatenate_target_link(scenario, pseudo, states, link_opts);
            link.cluster.kind = ClusterKind::eo;
            raw.push_back(budget ? link.cluster.path_gain : 1.0);
            clusters.push_back(std::move(link.cluster));
        }
    }
    for (const auto& path : scenario::specular_paths(scenario)) {
        Cluster c;
        c.delay_s = path.path_delay_s;
        c.aod = path.aod;
        c.aoa = path.aoa;
        c.n_rays = 1;
        c.ray_angle_offsets = {0.0};
        c.kind = ClusterKind::eo;
        c.target_id = path.eo_id;
        const double g = path.path_gain * path.path_gain;
        // normalized model: reflection coefficient squared relative to the strongest background cluster
        raw.push_back(budget ? g : g / std::pow(scenario.wavelength() / (4.0 * kPi * path.path_delay_s * kSpeedOfLight), 2));
        clusters.push_back(std::move(c));
    }

    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        clusters[i].power = total > 0.0 ? raw[i] / total : 0.0;
        clusters[i].path_gain = budget ? total : 1.0;
    }

    ChannelRealization out = freq_response(clusters, ofdm, extras, ray_rng, {config.micro_subset});
    out.seed = seed;
    return out;
}

} // namespace isac::channel
