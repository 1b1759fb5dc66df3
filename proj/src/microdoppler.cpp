#include "isac/microdoppler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>

#include <fmt/format.h>

#include "fft.hpp"

namespace isac::micro {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double frac(double x)
{
    return x - std::floor(x);
}

/// Sawtooth phase in cycles of the ramp at time t.
double sawtooth_cycle(const Sawtooth& s, double t)
{
    return frac(t / s.period_s + s.phase_rad / (2.0 * kPi));
}

double omega(double period_s)
{
    return 2.0 * kPi / period_s;
}

} // namespace

void validate(const MicroMotionProfile& profile)
{
    const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    const auto non_negative = [](double v) { return v >= 0.0 && std::isfinite(v); };
    const bool ok = std::visit(
        overloaded{
            [](const NoMotion&) { return true; },
            [&](const Sinusoid& s) { return non_negative(s.peak_doppler_hz) && positive(s.mod_freq_hz); },
            [&](const Sawtooth& s) { return non_negative(s.peak_doppler_hz) && positive(s.period_s); },
            [&](const Rotor& r) { return r.n_blades >= 1 && non_negative(r.blade_length_m) && positive(r.rpm); },
            [&](const PendulumArm& p) { return positive(p.period_s) && non_negative(p.peak_speed_mps); },
            [&](const Vital& v) { return non_negative(v.amp_displacement_m) && positive(v.rate_hz); },
        },
        profile);
    if (!ok) {
        throw std::invalid_argument("micro-motion rates/periods must be positive and peaks non-negative");
    }
}

bool is_doppler_specified(const MicroMotionProfile& profile)
{
    return std::holds_alternative<Sinusoid>(profile) || std::holds_alternative<Sawtooth>(profile);
}

double radial_velocity(const MicroMotionProfile& profile, double t, double direction_factor)
{
    const double v = std::visit(
        overloaded{
            [](const NoMotion&) { return 0.0; },
            [&](const Sinusoid& s) { return std::cos(2.0 * kPi * s.mod_freq_hz * t + s.phase_rad); },
            [&](const Sawtooth& s) { return 2.0 * sawtooth_cycle(s, t) - 1.0; },
            [&](const Rotor& r) {
                const double w = 2.0 * kPi * r.rpm / 60.0;
                return w * r.blade_length_m * std::cos(w * t);
            },
            [&](const PendulumArm& p) {
                return p.peak_speed_mps * std::cos(omega(p.period_s) * t) * std::cos(p.orientation_rad);
            },
            [&](const Vital& v) {
                const double w = 2.0 * kPi * v.rate_hz;
                return w * v.amp_displacement_m * std::cos(w * t);
            },
        },
        profile);
    return v * direction_factor;
}

double radial_displacement(const MicroMotionProfile& profile, double t)
{
    return std::visit(
        overloaded{
            [](const NoMotion&) { return 0.0; },
            [](const Sinusoid&) { return 0.0; },
            [](const Sawtooth&) { return 0.0; },
            [&](const Rotor& r) {
                const double w = 2.0 * kPi * r.rpm / 60.0;
                return r.blade_length_m * std::sin(w * t);
            },
            [&](const PendulumArm& p) {
                const double w = omega(p.period_s);
                return p.peak_speed_mps / w * std::sin(w * t) * std::cos(p.orientation_rad);
            },
            [&](const Vital& v) { return v.amp_displacement_m * std::sin(2.0 * kPi * v.rate_hz * t); },
        },
        profile);
}

double geometry_factor(const Vec3& u_tx, const Vec3& u_rx, const Vec3& motion_axis)
{
    const Vec3 m = motion_axis.normalized();
    return std::abs(u_tx.normalized().dot(m)) + std::abs(u_rx.normalized().dot(m));
}

PhaseSeries micro_phase_series(const MicroMotionProfile& profile, double wavelength, double duration,
                               double sample_interval, double geometry)
{
    if (!(sample_interval > 0.0)) {
        throw std::invalid_argument(fmt::format("sample interval must be positive, got {}", sample_interval));
    }
    if (!(wavelength > 0.0)) {
        throw std::invalid_argument(fmt::format("wavelength must be positive, got {}", wavelength));
    }
    if (!(duration >= 0.0)) {
        throw std::invalid_argument("duration must be non-negative");
    }
    validate(profile);

    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration / sample_interval)));
    PhaseSeries out{std::vector<double>(n), sample_interval};
    const double k = 2.0 * kPi / wavelength * geometry;

    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * sample_interval;
        out.samples[i] = std::visit(
            overloaded{
                [&](const Sinusoid& s) {
                    return s.peak_doppler_hz / s.mod_freq_hz * std::sin(2.0 * kPi * s.mod_freq_hz * t + s.phase_rad);
                },
                [&](const Sawtooth& s) {
                    // integral of peak * (2u - 1) over the ramp, referenced to t = 0
                    const auto ramp = [](double u) { return u * u - u; };
                    const double u0 = sawtooth_cycle(s, 0.0);
                    const double u = sawtooth_cycle(s, t);
                    return 2.0 * kPi * s.peak_doppler_hz * s.period_s * (ramp(u) - ramp(u0));
                },
                [&](const auto&) { return k * radial_displacement(profile, t); },
            },
            profile);
    }
    return out;
}

ArmPair arm_swing_states(double t, double period_s, double peak_speed_mps, double orientation_rad,
                         const Vec3& body_position)
{
    if (!(period_s > 0.0)) {
        throw std::invalid_argument(fmt::format("arm-swing period must be positive, got {}", period_s));
    }
    const Vec3 facing{std::cos(orientation_rad), std::sin(orientation_rad), 0.0};
    const Vec3 lateral{-facing.y, facing.x, 0.0};
    const double w = omega(period_s);
    const double excursion = peak_speed_mps / w * std::sin(w * t);
    const double speed = peak_speed_mps * std::cos(w * t);

    ArmPair arms;
    arms.left.position = body_position + lateral * kArmShoulderOffset + facing * excursion;
    arms.left.velocity = facing * speed;
    arms.right.position = body_position - lateral * kArmShoulderOffset - facing * excursion;
    arms.right.velocity = facing * (-speed);
    return arms;
}

std::vector<cplx> arm_swing_echo(const ArmSwingScene& scene, double wavelength, double sample_rate_hz,
                                 double duration_s)
{
    if (!(sample_rate_hz > 0.0) || !(wavelength > 0.0)) {
        throw std::invalid_argument("sample rate and wavelength must be positive");
    }
    const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    std::vector<cplx> iq(n);
    const double k = 2.0 * kPi / wavelength;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        const ArmPair arms =
            arm_swing_states(t, scene.period_s, scene.peak_speed_mps, scene.orientation_rad, scene.body_position);
        const auto echo = [&](const Vec3& p, double amp) {
            const double path = distance(p, scene.tx_position) + distance(p, scene.rx_position);
            return amp * std::polar(1.0, k * path);
        };
        iq[i] = echo(arms.left.position, scene.left_amplitude) + echo(arms.right.position, scene.right_amplitude);
    }
    return iq;
}

Spectrogram spectrogram(std::span<const cplx> iq, double sample_rate_hz, std::size_t window_len, std::size_t hop,
                        std::size_t nfft)
{
    if (iq.empty()) {
        throw std::invalid_argument("spectrogram of an empty series");
    }
    if (window_len == 0 || window_len > iq.size()) {
        throw std::invalid_argument(
            fmt::format("window length {} must be in [1, {}]", window_len, iq.size()));
    }
    if (hop == 0) {
        throw std::invalid_argument("hop must be at least 1");
    }
    if (nfft == 0) {
        nfft = window_len;
    }
    if (nfft < window_len) {
        throw std::invalid_argument("nfft must not be shorter than the window");
    }

    std::vector<double> window(window_len, 1.0);
    if (window_len > 1) {
        for (std::size_t i = 0; i < window_len; ++i) {
            window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(window_len - 1)));
        }
    }

    const std::size_t frames = 1 + (iq.size() - window_len) / hop;
    Spectrogram out;
    out.time_s.resize(frames);
    out.freq_hz.resize(nfft);
    out.magnitude.resize(frames * nfft);
    const auto half = static_cast<std::ptrdiff_t>(nfft / 2);
    for (std::size_t b = 0; b < nfft; ++b) {
        out.freq_hz[b] = static_cast<double>(static_cast<std::ptrdiff_t>(b) - half) * sample_rate_hz /
                         static_cast<double>(nfft);
    }

    std::vector<cplx> buf(nfft);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t start = f * hop;
        out.time_s[f] = (static_cast<double>(start) + 0.5 * static_cast<double>(window_len)) / sample_rate_hz;
        std::fill(buf.begin(), buf.end(), cplx{});
        for (std::size_t i = 0; i < window_len; ++i) {
            buf[i] = iq[start + i] * window[i];
        }
        detail::fft_inplace(buf, detail::FftDirection::forward);
        for (std::size_t b = 0; b < nfft; ++b) {
            // shifted bin b holds frequency index b - nfft/2
            const std::size_t src = (b + nfft - static_cast<std::size_t>(half)) % nfft;
            out.magnitude[f * nfft + b] = std::abs(buf[src]);
        }
    }
    return out;
}

std::vector<double> ridge_frequencies(const Spectrogram& s)
{
    std::vector<double> out(s.frames());
    for (std::size_t f = 0; f < s.frames(); ++f) {
        const auto row = s.magnitude.begin() + static_cast<std::ptrdiff_t>(f * s.bins());
        const auto best = std::max_element(row, row + static_cast<std::ptrdiff_t>(s.bins()));
        out[f] = s.freq_hz[static_cast<std::size_t>(best - row)];
    }
    return out;
}

std::vector<double> doppler_centroid(const Spectrogram& s)
{
    std::vector<double> out(s.frames());
    for (std::size_t f = 0; f < s.frames(); ++f) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t b = 0; b < s.bins(); ++b) {
            num += s.at(f, b) * s.freq_hz[b];
            den += s.at(f, b);
        }
        out[f] = den > 0.0 ? num / den : 0.0;
    }
    return out;
}

double dominant_period(std::span<const double> series, double dt)
{
    const std::size_t n = series.size();
    if (n < 4) {
        return 0.0;
    }
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    std::vector<double> x(n);
    std::transform(series.begin(), series.end(), x.begin(), [&](double v) { return v - mean; });

    std::vector<double> acf(n, 0.0);
    for (std::size_t lag = 0; lag < n; ++lag) {
        double sum = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) {
            sum += x[i] * x[i + lag];
        }
        acf[lag] = sum / static_cast<double>(n - lag);
    }
    if (!(acf[0] > 0.0)) {
        return 0.0;
    }
    std::size_t lag = 1;
    while (lag < n && acf[lag] > 0.0) {
        ++lag;
    }
    // ignore the noisy tail where fewer than a quarter of the samples overlap
    const std::size_t first = lag;
    const std::size_t last = n - n / 4;
    if (first >= last) {
        return 0.0;
    }
    const double peak = *std::max_element(acf.begin() + static_cast<std::ptrdiff_t>(first),
                                          acf.begin() + static_cast<std::ptrdiff_t>(last));
    if (!(peak > 0.0)) {
        return 0.0;
    }
    // earliest local maximum close to the strongest one, so harmonics of the
    // fundamental lag do not win on noise
    for (std::size_t l = first; l < last; ++l) {
        const bool local_max = acf[l] >= acf[l - 1] && (l + 1 >= n || acf[l] >= acf[l + 1]);
        if (local_max && acf[l] >= 0.8 * peak) {
            return static_cast<double>(l) * dt;
        }
    }
    return 0.0;
}

} // namespace isac::micro
