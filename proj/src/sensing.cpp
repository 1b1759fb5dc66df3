#include "isac/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fft.hpp"

namespace isac::sensing {

namespace {

constexpr std::uint64_t kStreamPilot = 4;
constexpr std::uint64_t kStreamNoise = 5;

} // namespace

std::vector<cplx> make_pilot(std::size_t n_sc, std::uint64_t seed)
{
    if (n_sc == 0) {
        throw std::invalid_argument("pilot needs at least one subcarrier");
    }
    Rng rng = make_stream(seed, kStreamPilot);
    std::vector<cplx> pilot(n_sc);
    const double a = 1.0 / std::sqrt(2.0);
    for (auto& x : pilot) {
        const auto bits = rng();
        x = {(bits & 1U) != 0U ? -a : a, (bits & 2U) != 0U ? -a : a};
    }
    return pilot;
}

ComplexGrid simulate_echo(const ComplexGrid& h, std::span<const cplx> pilot, double snr_db, Rng& rng)
{
    if (pilot.size() != h.rows()) {
        throw std::invalid_argument(
            fmt::format("pilot length {} does not match {} subcarriers", pilot.size(), h.rows()));
    }
    ComplexGrid y(h.rows(), h.cols());
    double signal = 0.0;
    for (std::size_t k = 0; k < h.rows(); ++k) {
        for (std::size_t m = 0; m < h.cols(); ++m) {
            y(k, m) = h(k, m) * pilot[k];
            signal += std::norm(y(k, m));
        }
    }
    if (std::isinf(snr_db) && snr_db > 0.0) {
        return y;
    }
    const std::size_t n = h.rows() * h.cols();
    double mean_power = n > 0 ? signal / static_cast<double>(n) : 0.0;
    if (!(mean_power > 0.0)) {
        mean_power = 1.0;
    }
    const double variance = mean_power / from_db(snr_db);
    std::normal_distribution<double> w(0.0, std::sqrt(variance / 2.0));
    for (auto& v : y.data()) {
        const double re = w(rng);
        const double im = w(rng);
        v += cplx{re, im};
    }
    return y;
}

ComplexGrid estimate_csi(const ComplexGrid& echo, std::span<const cplx> pilot)
{
    if (pilot.size() != echo.rows()) {
        throw std::invalid_argument(
            fmt::format("pilot length {} does not match {} subcarriers", pilot.size(), echo.rows()));
    }
    ComplexGrid csi(echo.rows(), echo.cols());
    for (std::size_t k = 0; k < echo.rows(); ++k) {
        if (std::abs(pilot[k]) == 0.0) {
            throw std::invalid_argument(fmt::format("pilot element {} is zero", k));
        }
        for (std::size_t m = 0; m < echo.cols(); ++m) {
            csi(k, m) = echo(k, m) / pilot[k];
        }
    }
    return csi;
}

DelayDopplerMap::DelayDopplerMap(std::size_t n_delay, std::size_t n_doppler, double delay_resolution_s,
                                 double doppler_resolution_hz)
    : n_delay_(n_delay), n_doppler_(n_doppler), magnitude_(n_delay * n_doppler, 0.0), delay_axis_(n_delay),
      doppler_axis_(n_doppler)
{
    for (std::size_t d = 0; d < n_delay; ++d) {
        delay_axis_[d] = static_cast<double>(d) * delay_resolution_s;
    }
    for (std::size_t c = 0; c < n_doppler; ++c) {
        doppler_axis_[c] = static_cast<double>(doppler_bin(c)) * doppler_resolution_hz;
    }
}

std::size_t DelayDopplerMap::column_of(long bin) const
{
    const long column = bin + static_cast<long>(zero_doppler_column());
    if (column < 0 || column >= static_cast<long>(n_doppler_)) {
        throw std::out_of_range(fmt::format("Doppler bin {} outside the map", bin));
    }
    return static_cast<std::size_t>(column);
}

double DelayDopplerMap::energy() const
{
    return std::accumulate(magnitude_.begin(), magnitude_.end(), 0.0, [](double acc, double m) { return acc + m * m; });
}

double DelayDopplerMap::energy_near_zero_doppler(long half_width) const
{
    double e = 0.0;
    for (std::size_t d = 0; d < n_delay_; ++d) {
        for (std::size_t c = 0; c < n_doppler_; ++c) {
            if (std::abs(doppler_bin(c)) <= half_width) {
                e += power(d, c);
            }
        }
    }
    return e;
}

double DelayDopplerMap::max_power() const
{
    const double m = magnitude_.empty() ? 0.0 : *std::max_element(magnitude_.begin(), magnitude_.end());
    return m * m;
}

DelayDopplerMap delay_doppler(const ComplexGrid& csi, const OfdmConfig& config)
{
    const std::size_t n_sc = csi.rows();
    const std::size_t n_reps = csi.cols();
    if (n_sc == 0 || n_reps == 0) {
        throw std::invalid_argument("CSI grid is empty");
    }
    const double delay_res = 1.0 / (static_cast<double>(n_sc) * config.scs_hz);
    const double doppler_res = config.prf_hz() / static_cast<double>(n_reps);
    DelayDopplerMap map(n_sc, n_reps, delay_res, doppler_res);

    std::vector<double> window(n_reps, 1.0);
    if (config.doppler_window == DopplerWindow::hann && n_reps > 1) {
        for (std::size_t m = 0; m < n_reps; ++m) {
            window[m] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(m) / static_cast<double>(n_reps - 1)));
        }
    }

    // column-major working copy: one contiguous subcarrier vector per repetition
    std::vector<cplx> col(n_sc);
    ComplexGrid delay_time(n_sc, n_reps);
    const double norm_delay = 1.0 / std::sqrt(static_cast<double>(n_sc));
    for (std::size_t m = 0; m < n_reps; ++m) {
        for (std::size_t k = 0; k < n_sc; ++k) {
            if (!std::isfinite(csi(k, m).real()) || !std::isfinite(csi(k, m).imag())) {
                throw std::invalid_argument("CSI contains non-finite values");
            }
            col[k] = csi(k, m);
        }
        detail::fft_inplace(col, detail::FftDirection::inverse);
        for (std::size_t d = 0; d < n_sc; ++d) {
            delay_time(d, m) = col[d] * norm_delay;
        }
    }

    std::vector<cplx> row(n_reps);
    const double norm_doppler = 1.0 / std::sqrt(static_cast<double>(n_reps));
    const std::size_t shift = map.zero_doppler_column();
    for (std::size_t d = 0; d < n_sc; ++d) {
        for (std::size_t m = 0; m < n_reps; ++m) {
            row[m] = delay_time(d, m) * window[m];
        }
        detail::fft_inplace(row, detail::FftDirection::forward);
        for (std::size_t c = 0; c < n_reps; ++c) {
            // column c shows DFT index (c - shift) mod n_reps
            const std::size_t src = (c + n_reps - shift) % n_reps;
            map.magnitude(d, c) = std::abs(row[src]) * norm_doppler;
        }
    }
    return map;
}

ComplexGrid notch_zero_doppler(const ComplexGrid& csi)
{
    if (csi.cols() < 2) {
        throw std::invalid_argument("zero-Doppler notch needs at least two repetitions");
    }
    ComplexGrid out = csi;
    for (std::size_t k = 0; k < out.rows(); ++k) {
        auto r = out.row(k);
        const cplx mean = std::accumulate(r.begin(), r.end(), cplx{}) / static_cast<double>(r.size());
        for (auto& v : r) {
            v -= mean;
        }
    }
    return out;
}

std::vector<Detection> detect_peaks(const DelayDopplerMap& map, double threshold_db_below_max, std::size_t guard_bins)
{
    if (map.n_delay() == 0 || map.n_doppler() == 0) {
        throw std::invalid_argument("cannot detect peaks on an empty map");
    }
    const double floor = map.max_power() * from_db(-threshold_db_below_max);
    std::vector<Detection> candidates;
    for (std::size_t d = 0; d < map.n_delay(); ++d) {
        for (std::size_t c = 0; c < map.n_doppler(); ++c) {
            const double p = map.power(d, c);
            if (!(p > 0.0) || p < floor) {
                continue;
            }
            // Doppler is periodic, delay is not
            bool local_max = true;
            const auto n_dop = static_cast<long>(map.n_doppler());
            for (long dd = -1; dd <= 1 && local_max; ++dd) {
                for (long dc = -1; dc <= 1; ++dc) {
                    const long nd = static_cast<long>(d) + dd;
                    if ((dd == 0 && dc == 0) || nd < 0 || nd >= static_cast<long>(map.n_delay())) {
                        continue;
                    }
                    const long nc = ((static_cast<long>(c) + dc) % n_dop + n_dop) % n_dop;
                    if (nc == static_cast<long>(c)) {
                        continue;
                    }
                    if (map.power(static_cast<std::size_t>(nd), static_cast<std::size_t>(nc)) > p) {
                        local_max = false;
                        break;
                    }
                }
            }
            if (local_max) {
                candidates.push_back({d, map.doppler_bin(c), p});
            }
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Detection& a, const Detection& b) { return a.power > b.power; });

    std::vector<Detection> kept;
    const auto guard = static_cast<long>(guard_bins);
    const auto n_dop = static_cast<long>(map.n_doppler());
    const auto doppler_gap = [n_dop](long a, long b) {
        const long g = std::abs(a - b) % n_dop;
        return std::min(g, n_dop - g);
    };
    for (const auto& cand : candidates) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
            return std::abs(static_cast<long>(k.delay_bin) - static_cast<long>(cand.delay_bin)) <= guard &&
                   doppler_gap(k.doppler_bin, cand.doppler_bin) <= guard;
        });
        if (!suppressed) {
            kept.push_back(cand);
        }
    }
    return kept;
}

RangeVelocity to_range_velocity(const Detection& detection, const OfdmConfig& config, bool monostatic)
{
    RangeVelocity out;
    out.delay_s = static_cast<double>(detection.delay_bin) * config.delay_resolution_s();
    out.doppler_hz = static_cast<double>(detection.doppler_bin) * config.doppler_resolution_hz();
    if (monostatic) {
        out.range_m = kSpeedOfLight * out.delay_s / 2.0;
        // Doppler here is the path-length rate over lambda: approaching targets come out negative
        out.velocity_mps = out.doppler_hz * config.wavelength() / 2.0;
    } else {
        // bistatic: total path length and its rate of change
        out.range_m = kSpeedOfLight * out.delay_s;
        out.velocity_mps = out.doppler_hz * config.wavelength();
    }
    return out;
}

SensingRun run_link_level(const channel::ChannelRealization& realization, const OfdmConfig& config,
                          std::uint64_t seed, std::uint64_t realization_index, const DetectOptions& detect)
{
    const ComplexGrid h = realization.total();
    const auto pilot = make_pilot(h.rows(), seed ^ (realization_index * 0x9E3779B97F4A7C15ULL));
    Rng noise = make_stream(seed, kStreamNoise, realization_index);
    const ComplexGrid echo = simulate_echo(h, pilot, config.snr_db, noise);

    SensingRun run{estimate_csi(echo, pilot), DelayDopplerMap(0, 0, 0, 0), DelayDopplerMap(0, 0, 0, 0), {}};
    run.pre_notch = delay_doppler(run.csi, config);
    run.post_notch = delay_doppler(notch_zero_doppler(run.csi), config);
    run.detections = detect_peaks(run.post_notch, detect.threshold_db, detect.guard_bins);
    return run;
}

micro::MicroMotionProfile table1_cosine_mode(const OfdmConfig& config)
{
    const double window = static_cast<double>(config.n_reps) * config.pri_s();
    return micro::Sinusoid{50.0, 1.0 / window, 0.0};
}

micro::MicroMotionProfile table1_sawtooth_mode(const OfdmConfig& config)
{
    const double window = static_cast<double>(config.n_reps) * config.pri_s();
    return micro::Sawtooth{30.0, window, 0.0};
}

scenario::Scenario table1_scenario(const micro::MicroMotionProfile& micro)
{
    scenario::Scenario s;
    s.carrier_hz = 3.5e9;
    s.nodes.push_back({"bs1", scenario::NodeKind::bs, {0.0, 0.0, 10.0}, {}});
    s.mode = scenario::SensingMode::bs_monostatic;
    s.tx_node_id = "bs1";
    s.rx_node_id = "bs1";
    scenario::Target t;
    t.id = "vehicle";
    t.position = {kTable1TargetRange, 0.0, 10.0};
    t.velocity = {kTable1TargetSpeed, 0.0, 0.0};
    t.rcs = 1.0;
    t.micro_motion = micro;
    s.targets.push_back(std::move(t));
    s.los_model = scenario::FixedLos{};
    return s;
}

std::vector<double> doppler_profile(const DelayDopplerMap& map, std::size_t delay_bin)
{
    std::vector<double> out(map.n_doppler());
    for (std::size_t c = 0; c < map.n_doppler(); ++c) {
        out[c] = map.magnitude(delay_bin, c);
    }
    return out;
}

double normalized_correlation(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("correlation needs two non-empty sequences of equal length");
    }
    double ab = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return aa > 0.0 && bb > 0.0 ? ab / std::sqrt(aa * bb) : 0.0;
}

} // namespace isac::sensing
