#pragma once

/**
 * @file sensing.hpp
 * @brief OFDM link-level sensing: pilot, noisy echo, least-squares CSI,
 * delay-Doppler map, zero-Doppler notch, peak detection and conversion to
 * range/velocity.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "isac/channel.hpp"
#include "isac/common.hpp"
#include "isac/microdoppler.hpp"
#include "isac/ofdm_config.hpp"
#include "isac/scenario.hpp"

namespace isac::sensing {

/// Unit-modulus QPSK symbols, deterministic in seed.
std::vector<cplx> make_pilot(std::size_t n_sc, std::uint64_t seed);

/// Y = H * X + w with var(w) = mean(|H X|^2) / 10^(snr/10). Infinite SNR disables noise;
/// an all-zero H uses unit signal power as the noise reference.
ComplexGrid simulate_echo(const ComplexGrid& h, std::span<const cplx> pilot, double snr_db, Rng& rng);

/// Least-squares estimate Y / X per subcarrier.
ComplexGrid estimate_csi(const ComplexGrid& echo, std::span<const cplx> pilot);

class DelayDopplerMap {
public:
    DelayDopplerMap(std::size_t n_delay, std::size_t n_doppler, double delay_resolution_s, double doppler_resolution_hz);

    [[nodiscard]] std::size_t n_delay() const { return n_delay_; }
    [[nodiscard]] std::size_t n_doppler() const { return n_doppler_; }

    /// Column index of Doppler bin 0.
    [[nodiscard]] std::size_t zero_doppler_column() const { return n_doppler_ / 2; }
    /// Signed Doppler bin of a column.
    [[nodiscard]] long doppler_bin(std::size_t column) const
    {
        return static_cast<long>(column) - static_cast<long>(zero_doppler_column());
    }
    [[nodiscard]] std::size_t column_of(long doppler_bin) const;

    [[nodiscard]] double magnitude(std::size_t delay, std::size_t column) const
    {
        return magnitude_[delay * n_doppler_ + column];
    }
    double& magnitude(std::size_t delay, std::size_t column) { return magnitude_[delay * n_doppler_ + column]; }
    [[nodiscard]] double power(std::size_t delay, std::size_t column) const
    {
        const double m = magnitude(delay, column);
        return m * m;
    }
    [[nodiscard]] double energy() const;
    /// Energy in columns whose Doppler bin lies within +-half_width of 0.
    [[nodiscard]] double energy_near_zero_doppler(long half_width) const;
    [[nodiscard]] double max_power() const;

    [[nodiscard]] const std::vector<double>& delay_axis_s() const { return delay_axis_; }
    [[nodiscard]] const std::vector<double>& doppler_axis_hz() const { return doppler_axis_; }
    [[nodiscard]] const std::vector<double>& magnitudes() const { return magnitude_; }

private:
    std::size_t n_delay_;
    std::size_t n_doppler_;
    std::vector<double> magnitude_;
    std::vector<double> delay_axis_;
    std::vector<double> doppler_axis_;
};

/// Orthonormal inverse DFT over subcarriers and forward DFT over repetitions,
/// zero Doppler centred. Hann windowing (config) is applied across slow time.
DelayDopplerMap delay_doppler(const ComplexGrid& csi, const OfdmConfig& config);

/// Removes the slow-time mean of every subcarrier.
ComplexGrid notch_zero_doppler(const ComplexGrid& csi);

struct Detection {
    std::size_t delay_bin = 0;
    long doppler_bin = 0;
    double power = 0.0; ///< linear |map|^2
};

std::vector<Detection> detect_peaks(const DelayDopplerMap& map, double threshold_db_below_max, std::size_t guard_bins);

struct RangeVelocity {
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    double range_m = 0.0;      ///< monostatic range, or bistatic total path length
    double velocity_mps = 0.0; ///< monostatic radial velocity (negative approaching), or bistatic path-length rate
};

RangeVelocity to_range_velocity(const Detection& detection, const OfdmConfig& config, bool monostatic);

struct DetectOptions {
    double threshold_db = 15.0;
    std::size_t guard_bins = 2;
};

struct SensingRun {
    ComplexGrid csi;
    DelayDopplerMap pre_notch;
    DelayDopplerMap post_notch;
    std::vector<Detection> detections; ///< from the post-notch map
};

/// Pilot, echo, CSI, maps and detections for one realization. Pilot and noise
/// streams derive from (seed, realization_index).
SensingRun run_link_level(const channel::ChannelRealization& realization, const OfdmConfig& config,
                          std::uint64_t seed, std::uint64_t realization_index = 0, const DetectOptions& detect = {});

/// Micro-motion modes of the link-level experiment: cosine at 50 Hz peak and
/// sawtooth at 30 Hz peak, both with one cycle per observation window.
micro::MicroMotionProfile table1_cosine_mode(const OfdmConfig& config = {});
micro::MicroMotionProfile table1_sawtooth_mode(const OfdmConfig& config = {});

inline constexpr double kTable1TargetSpeed = 150.0 / 3.6; ///< m/s
inline constexpr double kTable1TargetRange = 100.0;       ///< m

/// BS monostatic scene with one target receding along boresight at 150 km/h.
scenario::Scenario table1_scenario(const micro::MicroMotionProfile& micro = micro::NoMotion{});

/// Magnitude spectrum over slow time at one delay bin (sum over Doppler bins equals the row energy).
std::vector<double> doppler_profile(const DelayDopplerMap& map, std::size_t delay_bin);

/// Cosine similarity of two equal-length sequences (no mean removal); 0 when either is all zero.
double normalized_correlation(std::span<const double> a, std::span<const double> b);

} // namespace isac::sensing
