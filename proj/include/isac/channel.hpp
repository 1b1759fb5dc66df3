#pragma once

/**
 * @file channel.hpp
 * @brief Cluster-based ISAC channel: background clusters, concatenated target
 * links with radar-equation path loss, and the per-ray frequency response over
 * subcarriers and slow-time repetitions.
 *
 * The coefficient generator is a reduced form of the 3GPP cluster/ray sum with
 * isotropic elements and no polarization: each ray carries an amplitude, an
 * aspect-dependent RCS gain, a delay phase and a Doppler phase. A seeded
 * subset of the sensing cluster's rays additionally carries the target's
 * micro-Doppler phase.
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isac/common.hpp"
#include "isac/microdoppler.hpp"
#include "isac/ofdm_config.hpp"
#include "isac/rcs.hpp"
#include "isac/scenario.hpp"

namespace isac::channel {

enum class ClusterKind { background, sensing, eo };

inline constexpr std::size_t kDefaultRays = 20;

struct Cluster {
    double delay_s = 0.0;
    double power = 0.0;     ///< normalized fraction; all clusters of a realization sum to 1
    double path_gain = 1.0; ///< linear power scaling applied on top of `power`
    double doppler_hz = 0.0;
    Angles aod;
    Angles aoa;
    std::size_t n_rays = kDefaultRays;
    std::vector<double> ray_angle_offsets; ///< radians, one per ray
    ClusterKind kind = ClusterKind::background;
    std::string target_id; ///< sensing and eo clusters only
    double aspect_rad = 0.0; ///< target aspect for the fast-fading lookup
};

/// Standard 20-ray intra-cluster offsets scaled by the cluster angular spread (degrees).
std::vector<double> ray_offsets(std::size_t n_rays, double cluster_spread_deg = 2.0);

/// Raw exponential delays with mean delay_spread_s, unsorted.
std::vector<double> draw_cluster_delays(std::size_t n_clusters, double delay_spread_s, Rng& rng);

/// Environment clusters: sorted delays starting at 0, exponentially decaying
/// powers (normalized to sum to 1), uniform angles, zero Doppler.
std::vector<Cluster> generate_background(std::size_t n_clusters, double delay_spread_s, Rng& rng,
                                         std::size_t n_rays = kDefaultRays);

/// Rescales `power` so the clusters sum to one; throws if every power is zero.
void normalize_powers(std::vector<Cluster>& clusters);

/// Value reported by sensing_pathloss when the target has zero RCS.
inline constexpr double kNoEcho = std::numeric_limits<double>::infinity();

/// Bistatic radar equation path loss in dB.
double sensing_pathloss(double d_tx, double d_rx, double wavelength, double sigma_slow);

class DegenerateGeometry : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TargetLinkOptions {
    double nlos_excess_loss_db = 20.0; ///< applied per NLOS leg
    double cluster_spread_deg = 2.0;
    std::size_t n_rays = kDefaultRays;
    double sweep_range_m = 1000.0; ///< range used to sample a segmented target's aspect sweep
};

struct TargetLink {
    Cluster cluster;
    double d_tx = 0.0;
    double d_rx = 0.0;
    double sigma_slow = 0.0; ///< m^2
    double pathloss_db = 0.0;
    double doppler_hz = 0.0;
    double geometry_factor = 0.0; ///< micro-motion projection on the two legs
    std::optional<rcs::RcsDecomposition> fast; ///< present for segmented targets
};

/// Target cluster from the Tx->target and target->Rx legs. Doppler is the
/// two-way path-length rate over the wavelength (positive when receding).
TargetLink concatenate_target_link(const scenario::Scenario& scenario, const scenario::Target& target,
                                   const scenario::TargetLinkStates& los, const TargetLinkOptions& options = {});

/// Per-target inputs for the ray sum.
struct SensingExtras {
    micro::MicroMotionProfile micro = micro::NoMotion{};
    double geometry_factor = 2.0;
    /// Linear power gain vs aspect angle (radians); empty means 1.
    std::function<double(double)> fast_gain;
};

struct ChannelRealization {
    std::vector<Cluster> clusters;
    ComplexGrid target;     ///< n_sc x n_reps, sensing clusters
    ComplexGrid background; ///< n_sc x n_reps, background and environment-object clusters
    double carrier_hz = 0.0;
    double scs_hz = 0.0;
    double pri_s = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] ComplexGrid total() const;
};

struct FreqResponseOptions {
    std::size_t micro_subset = 10; ///< rays of each sensing cluster carrying the micro phase
};

ChannelRealization freq_response(const std::vector<Cluster>& clusters, const OfdmConfig& ofdm,
                                 const std::map<std::string, SensingExtras>& extras, Rng& rng,
                                 const FreqResponseOptions& options = {});

enum class PowerModel {
    normalized,  ///< relative cluster powers from target_power_db; unit path gains
    link_budget, ///< path gains from the radar equation and specular geometry
};

struct ChannelConfig {
    std::size_t n_background = 5;
    double delay_spread_s = 100e-9;
    std::size_t n_rays = kDefaultRays;
    std::size_t micro_subset = 10;
    double cluster_spread_deg = 2.0;
    double target_power_db = 0.0; ///< each sensing cluster vs the strongest background cluster
    double background_gain_db = -100.0; ///< link_budget model only
    double nlos_excess_loss_db = 20.0;
    PowerModel power_model = PowerModel::normalized;
};

/// Full realization for a scenario: LOS draws, target links, background and
/// specular environment paths. Uses independent streams derived from
/// (seed, realization_index).
ChannelRealization build_realization(const scenario::Scenario& scenario, const OfdmConfig& ofdm,
                                     const ChannelConfig& config, std::uint64_t seed,
                                     std::uint64_t realization_index = 0);

} // namespace isac::channel
