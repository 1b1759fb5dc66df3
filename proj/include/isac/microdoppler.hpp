#pragma once

/**
 * @file microdoppler.hpp
 * @brief Parametric fine-motion models, micro-Doppler phase sequences,
 * arm-swing kinematics and short-time spectra.
 *
 * Two families of profiles exist. Sinusoid and sawtooth are specified
 * directly by their micro-Doppler deviation in Hz. Rotor, pendulum arm and
 * vital-sign profiles are kinematic: they describe a radial displacement in
 * metres, which becomes phase through the carrier wavelength and the link
 * geometry factor.
 */

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "isac/common.hpp"

namespace isac::micro {

struct NoMotion {};

/// Cosine-shaped Doppler deviation: f(t) = peak * cos(2 pi f_mod t + phase).
struct Sinusoid {
    double peak_doppler_hz = 0.0;
    double mod_freq_hz = 40.0;
    double phase_rad = 0.0;
};

/// Rising ramp from -peak to +peak with instantaneous flyback.
struct Sawtooth {
    double peak_doppler_hz = 0.0;
    double period_s = 0.025;
    double phase_rad = 0.0;
};

/// Tip of one blade on a rotor spinning in the radial plane.
struct Rotor {
    int n_blades = 2;
    double blade_length_m = 0.0;
    double rpm = 0.0;
};

struct PendulumArm {
    double period_s = 1.0;
    double peak_speed_mps = 2.0;
    double orientation_rad = 0.0;
};

struct Vital {
    double amp_displacement_m = 0.0;
    double rate_hz = 0.0;
};

using MicroMotionProfile = std::variant<NoMotion, Sinusoid, Sawtooth, Rotor, PendulumArm, Vital>;

/// Throws std::invalid_argument when a rate or period is not strictly positive or a peak is negative.
void validate(const MicroMotionProfile& profile);

[[nodiscard]] bool is_doppler_specified(const MicroMotionProfile& profile);

struct PhaseSeries {
    std::vector<double> samples; ///< radians
    double sample_interval = 0.0; ///< s
};

/// Instantaneous radial velocity (m/s) of kinematic profiles scaled by direction_factor.
/// Doppler-specified profiles return their normalized waveform in [-1, 1] scaled
/// by direction_factor; multiply by peak_doppler_hz * wavelength / 2 for m/s.
double radial_velocity(const MicroMotionProfile& profile, double t, double direction_factor);

/// Radial displacement (m) of kinematic profiles; zero for Doppler-specified ones.
double radial_displacement(const MicroMotionProfile& profile, double t);

/// |u_tx . m| + |u_rx . m| for unit link directions and motion axis m.
double geometry_factor(const Vec3& u_tx, const Vec3& u_rx, const Vec3& motion_axis);

/// Phase at t = i * sample_interval for i in [0, round(duration / sample_interval)).
PhaseSeries micro_phase_series(const MicroMotionProfile& profile, double wavelength, double duration,
                               double sample_interval, double geometry_factor);

struct ScattererState {
    Vec3 position;
    Vec3 velocity;
};

struct ArmPair {
    ScattererState left;
    ScattererState right;
};

inline constexpr double kArmShoulderOffset = 0.2; ///< lateral offset of each arm from the body axis, m

/// Two point scatterers swinging sinusoidally in anti-phase along the facing
/// axis, which is +x rotated by orientation_rad about +z.
ArmPair arm_swing_states(double t, double period_s, double peak_speed_mps, double orientation_rad,
                         const Vec3& body_position);

struct ArmSwingScene {
    double period_s = 1.0;
    double peak_speed_mps = 2.0;
    double orientation_rad = 0.0;
    Vec3 body_position{3.0, 0.0, 1.2};
    Vec3 tx_position{0.0, 0.0, 1.2};
    Vec3 rx_position{0.0, 0.0, 1.2};
    double left_amplitude = 1.0;
    double right_amplitude = 0.6;
};

/// Echo of the two arms sampled at sample_rate_hz; phase follows two-way path length.
std::vector<cplx> arm_swing_echo(const ArmSwingScene& scene, double wavelength, double sample_rate_hz,
                                 double duration_s);

struct Spectrogram {
    std::vector<double> time_s;    ///< frame centres
    std::vector<double> freq_hz;   ///< ascending, zero in the middle
    std::vector<double> magnitude; ///< row-major frames x bins

    [[nodiscard]] std::size_t frames() const { return time_s.size(); }
    [[nodiscard]] std::size_t bins() const { return freq_hz.size(); }
    [[nodiscard]] double at(std::size_t frame, std::size_t bin) const { return magnitude[frame * bins() + bin]; }
};

/// Hann-windowed short-time Fourier magnitude. nfft == 0 means nfft = window_len;
/// otherwise frames are zero-padded to nfft >= window_len.
Spectrogram spectrogram(std::span<const cplx> iq, double sample_rate_hz, std::size_t window_len,
                        std::size_t hop, std::size_t nfft = 0);

/// Frequency of the strongest bin in each frame.
std::vector<double> ridge_frequencies(const Spectrogram& s);

/// Magnitude-weighted mean frequency of each frame.
std::vector<double> doppler_centroid(const Spectrogram& s);

/// Lag (in units of dt) of the highest autocorrelation peak after the first
/// zero crossing of the mean-removed series; 0 when none exists.
double dominant_period(std::span<const double> series, double dt);

} // namespace isac::micro
