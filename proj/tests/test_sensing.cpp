#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "isac/channel.hpp"
#include "isac/sensing.hpp"
#include "oracles.hpp"

using namespace isac;
using namespace isac::sensing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// H(k, m) = a exp(-j2pi k scs tau) exp(j2pi fd m T).
ComplexGrid single_exponential(const OfdmConfig& o, double tau, double fd, cplx a = 1.0)
{
    ComplexGrid h(o.n_sc(), o.n_reps);
    for (std::size_t k = 0; k < h.rows(); ++k) {
        for (std::size_t m = 0; m < h.cols(); ++m) {
            const double ph = -2.0 * kPi * static_cast<double>(k) * o.scs_hz * tau +
                              2.0 * kPi * fd * static_cast<double>(m) * o.pri_s();
            h(k, m) = a * std::polar(1.0, ph);
        }
    }
    return h;
}

struct Peak {
    std::size_t delay;
    long doppler;
    double power;
};

Peak global_peak(const DelayDopplerMap& map)
{
    Peak best{0, 0, -1.0};
    for (std::size_t d = 0; d < map.n_delay(); ++d) {
        for (std::size_t c = 0; c < map.n_doppler(); ++c) {
            if (map.power(d, c) > best.power) {
                best = {d, map.doppler_bin(c), map.power(d, c)};
            }
        }
    }
    return best;
}

/// Distance between two Doppler bins on the circular DFT axis (bin -n/2 is bin +n/2).
long doppler_gap(long a, long b, long n)
{
    const long g = ((a - b) % n + n) % n;
    return std::min(g, n - g);
}

} // namespace

TEST_CASE("numerology defaults")
{
    const OfdmConfig o;
    CHECK(o.n_sc() == 600);
    CHECK(o.wavelength() == doctest::Approx(0.0857).epsilon(1e-3));
    CHECK(o.pri_s() == doctest::Approx(0.5e-3));
    CHECK(o.doppler_resolution_hz() == doctest::Approx(40.0));
    CHECK(o.delay_resolution_s() == doctest::Approx(1.0 / 18e6));
    CHECK_FALSE(o.noiseless());
    OfdmConfig bad = o;
    bad.n_reps = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("pilot")
{
    const auto p = make_pilot(600, 3);
    REQUIRE(p.size() == 600);
    for (const auto& x : p) {
        CHECK(std::abs(x) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(std::abs(x.real()) - std::abs(x.imag())) < 1e-15);
    }
    CHECK(make_pilot(600, 3) == p);
    CHECK(make_pilot(600, 4) != p);
    CHECK_THROWS_AS(make_pilot(0, 1), std::invalid_argument);
}

TEST_CASE("echo and CSI")
{
    const OfdmConfig o;
    const auto pilot = make_pilot(o.n_sc(), 1);
    const auto h = single_exponential(o, 2e-7, 120.0, {0.3, -0.4});
    Rng rng = make_stream(5, 0);

    SUBCASE("infinite SNR gives Y = HX and exact CSI")
    {
        const auto y = simulate_echo(h, pilot, kInf, rng);
        for (std::size_t k = 0; k < h.rows(); ++k) {
            for (std::size_t m = 0; m < h.cols(); ++m) {
                CHECK(y(k, m) == h(k, m) * pilot[k]);
            }
        }
        const auto est = estimate_csi(y, pilot);
        for (std::size_t i = 0; i < h.data().size(); ++i) {
            CHECK(std::abs(est.data()[i] - h.data()[i]) < 1e-15);
        }
    }
    SUBCASE("noise variance follows the SNR")
    {
        const auto y = simulate_echo(h, pilot, 30.0, rng);
        const auto est = estimate_csi(y, pilot);
        double err = 0.0;
        for (std::size_t i = 0; i < h.data().size(); ++i) {
            err += std::norm(est.data()[i] - h.data()[i]);
        }
        err /= static_cast<double>(h.data().size());
        // |H|^2 = 0.25, so the error variance is 0.25e-3
        CHECK(err == doctest::Approx(0.25e-3).epsilon(0.05));
    }
    SUBCASE("all-zero channel uses unit reference power")
    {
        const ComplexGrid zero(o.n_sc(), o.n_reps);
        const auto y = simulate_echo(zero, pilot, 10.0, rng);
        CHECK(y.energy() / static_cast<double>(y.data().size()) == doctest::Approx(0.1).epsilon(0.05));
    }
    SUBCASE("size mismatch")
    {
        const std::vector<cplx> short_pilot(10, 1.0);
        CHECK_THROWS_AS(simulate_echo(h, short_pilot, 30.0, rng), std::invalid_argument);
        CHECK_THROWS_AS(estimate_csi(h, short_pilot), std::invalid_argument);
    }
}

TEST_CASE("delay-Doppler map")
{
    const OfdmConfig o;
    SUBCASE("flat static channel peaks at the origin")
    {
        const auto map = delay_doppler(ComplexGrid(o.n_sc(), o.n_reps, 1.0), o);
        const auto p = global_peak(map);
        CHECK(p.delay == 0);
        CHECK(p.doppler == 0);
        CHECK(map.magnitude(0, map.zero_doppler_column()) ==
              doctest::Approx(std::sqrt(static_cast<double>(o.n_sc() * o.n_reps))));
    }
    SUBCASE("on-grid exponential peaks at its exact bin")
    {
        const double tau = 10.0 / 18e6;
        const auto map = delay_doppler(single_exponential(o, tau, 400.0), o);
        const auto p = global_peak(map);
        CHECK(p.delay == 10);
        CHECK(p.doppler == 10);
        // all energy lands in that one cell
        CHECK(p.power == doctest::Approx(map.energy()).epsilon(1e-12));
        const auto neg = delay_doppler(single_exponential(o, tau, -400.0), o);
        CHECK(global_peak(neg).doppler == -10);
    }
    SUBCASE("Parseval")
    {
        Rng rng = make_stream(9, 0);
        std::normal_distribution<double> g;
        ComplexGrid h(o.n_sc(), o.n_reps);
        for (auto& v : h.data()) {
            v = {g(rng), g(rng)};
        }
        const auto map = delay_doppler(h, o);
        CHECK(std::abs(map.energy() - h.energy()) / h.energy() < 1e-9);
    }
    SUBCASE("matches a direct 2-D DFT")
    {
        OfdmConfig small = o;
        small.bandwidth_hz = 16 * o.scs_hz;
        small.n_reps = 8;
        Rng rng = make_stream(10, 0);
        std::normal_distribution<double> g;
        ComplexGrid h(16, 8);
        for (auto& v : h.data()) {
            v = {g(rng), g(rng)};
        }
        const auto map = delay_doppler(h, small);
        // inverse over subcarriers, forward over repetitions, orthonormal
        ComplexGrid tmp(16, 8);
        for (std::size_t m = 0; m < 8; ++m) {
            std::vector<oracle::cplx> col(16);
            for (std::size_t k = 0; k < 16; ++k) {
                col[k] = h(k, m);
            }
            const auto t = oracle::dft(col, +1);
            for (std::size_t d = 0; d < 16; ++d) {
                tmp(d, m) = t[d] / 4.0;
            }
        }
        for (std::size_t d = 0; d < 16; ++d) {
            const auto f = oracle::dft({tmp.row(d).begin(), tmp.row(d).end()}, -1);
            for (long bin = -4; bin < 4; ++bin) {
                const auto idx = static_cast<std::size_t>((bin + 8) % 8);
                CHECK(map.magnitude(d, map.column_of(bin)) ==
                      doctest::Approx(std::abs(f[idx]) / std::sqrt(8.0)).epsilon(1e-12));
            }
        }
    }
    SUBCASE("axes")
    {
        const auto map = delay_doppler(ComplexGrid(o.n_sc(), o.n_reps, 1.0), o);
        CHECK(map.doppler_axis_hz()[map.zero_doppler_column()] == 0.0);
        CHECK(map.doppler_axis_hz()[map.column_of(24)] == doctest::Approx(960.0));
        CHECK(map.delay_axis_s()[12] == doctest::Approx(12.0 / 18e6));
    }
    SUBCASE("bad input")
    {
        CHECK_THROWS_AS(delay_doppler(ComplexGrid{}, o), std::invalid_argument);
        ComplexGrid h(4, 4, 1.0);
        h(1, 1) = {std::nan(""), 0.0};
        CHECK_THROWS_AS(delay_doppler(h, o), std::invalid_argument);
    }
}

TEST_CASE("zero-Doppler notch")
{
    const OfdmConfig o;
    SUBCASE("static input is removed")
    {
        ComplexGrid h(o.n_sc(), o.n_reps);
        Rng rng = make_stream(2, 0);
        std::normal_distribution<double> g;
        for (std::size_t k = 0; k < h.rows(); ++k) {
            const cplx v{g(rng), g(rng)};
            for (std::size_t m = 0; m < h.cols(); ++m) {
                h(k, m) = v;
            }
        }
        const auto n = notch_zero_doppler(h);
        CHECK(n.energy() / h.energy() < 1e-24);
    }
    SUBCASE("DC column vanishes for arbitrary input")
    {
        Rng rng = make_stream(3, 0);
        std::normal_distribution<double> g;
        ComplexGrid h(o.n_sc(), o.n_reps);
        for (auto& v : h.data()) {
            v = {g(rng), g(rng)};
        }
        const auto pre = delay_doppler(h, o);
        const auto post = delay_doppler(notch_zero_doppler(h), o);
        for (std::size_t d = 0; d < post.n_delay(); ++d) {
            CHECK(post.magnitude(d, post.zero_doppler_column()) <= 1e-12 * std::sqrt(pre.max_power()));
        }
    }
    SUBCASE("moving target keeps its peak")
    {
        // 24.3 bins is the bulk Doppler of the default target; the leakage onto DC is what the notch removes
        for (double bins : {24.0, 24.3, 5.0, 5.5}) {
            const auto h = single_exponential(o, 12.0 / 18e6, bins * 40.0);
            const double before = delay_doppler(h, o).max_power();
            const double after = delay_doppler(notch_zero_doppler(h), o).max_power();
            CHECK(oracle::db(before / after) < 1.0);
        }
    }
    CHECK_THROWS_AS(notch_zero_doppler(ComplexGrid(4, 1)), std::invalid_argument);
}

TEST_CASE("peak detection")
{
    const OfdmConfig o;
    SUBCASE("two separated targets")
    {
        auto h = single_exponential(o, 10.0 / 18e6, 400.0);
        h += single_exponential(o, 30.0 / 18e6, -200.0, 0.5);
        const auto det = detect_peaks(delay_doppler(h, o), 15.0, 2);
        REQUIRE(det.size() == 2);
        CHECK(det[0].delay_bin == 10);
        CHECK(det[0].doppler_bin == 10);
        CHECK(det[1].delay_bin == 30);
        CHECK(det[1].doppler_bin == -5);
        CHECK(oracle::db(det[0].power / det[1].power) == doctest::Approx(6.0206).epsilon(1e-4));
    }
    SUBCASE("threshold drops weak targets")
    {
        auto h = single_exponential(o, 10.0 / 18e6, 400.0);
        h += single_exponential(o, 30.0 / 18e6, -200.0, 0.1); // 20 dB down
        CHECK(detect_peaks(delay_doppler(h, o), 15.0, 2).size() == 1);
        CHECK(detect_peaks(delay_doppler(h, o), 25.0, 2).size() == 2);
    }
    SUBCASE("guard suppresses a close neighbour")
    {
        auto h = single_exponential(o, 10.0 / 18e6, 400.0);
        h += single_exponential(o, 10.0 / 18e6, 480.0, 0.8);
        CHECK(detect_peaks(delay_doppler(h, o), 15.0, 0).size() == 2);
        CHECK(detect_peaks(delay_doppler(h, o), 15.0, 2).size() == 1);
    }
    SUBCASE("Doppler wraps around")
    {
        // off-grid line near the top of the band leaks across the wrap; it must not count twice
        const auto h = single_exponential(o, 5.0 / 18e6, 24.6 * 40.0);
        const auto det = detect_peaks(delay_doppler(h, o), 15.0, 2);
        REQUIRE(det.size() == 1);
        CHECK(std::abs(det[0].doppler_bin) >= 24);
    }
    SUBCASE("empty map")
    {
        CHECK_THROWS_AS(detect_peaks(DelayDopplerMap(0, 0, 1.0, 1.0), 15.0, 2), std::invalid_argument);
        CHECK(detect_peaks(delay_doppler(ComplexGrid(4, 4), o), 15.0, 2).empty());
    }
}

TEST_CASE("range and velocity conversion")
{
    const OfdmConfig o;
    const auto mono = to_range_velocity({10, 24, 1.0}, o, true);
    CHECK(mono.range_m == doctest::Approx(oracle::c0 * 10.0 / 18e6 / 2.0));
    CHECK(mono.range_m == doctest::Approx(83.3).epsilon(1e-3));
    CHECK(mono.doppler_hz == doctest::Approx(960.0));
    CHECK(mono.velocity_mps == doctest::Approx(960.0 * o.wavelength() / 2.0));

    const auto approaching = to_range_velocity({10, -24, 1.0}, o, true);
    CHECK(approaching.velocity_mps == doctest::Approx(-960.0 * o.wavelength() / 2.0));

    const auto bi = to_range_velocity({10, 24, 1.0}, o, false);
    CHECK(bi.range_m == doctest::Approx(2.0 * mono.range_m));
    CHECK(bi.velocity_mps == doctest::Approx(2.0 * mono.velocity_mps));
}

TEST_CASE("circular Doppler distance")
{
    CHECK(doppler_gap(-25, 24, 50) == 1);
    CHECK(doppler_gap(24, 24, 50) == 0);
    CHECK(doppler_gap(-24, 24, 50) == 2);
    CHECK(doppler_gap(0, 25, 50) == 25);
}

TEST_CASE("normalized correlation")
{
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{2, 4, 6};
    const std::vector<double> c{3, 0, -1};
    CHECK(normalized_correlation(a, b) == doctest::Approx(1.0));
    CHECK(normalized_correlation(a, c) == doctest::Approx(0.0));
    CHECK(normalized_correlation(a, std::vector<double>(3, 0.0)) == 0.0);
    CHECK_THROWS_AS(normalized_correlation(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("default link-level run")
{
    const OfdmConfig o;
    const channel::ChannelConfig cc;
    const auto scn = table1_scenario(table1_cosine_mode(o));

    const double fd = 2.0 * kTable1TargetSpeed / o.wavelength();
    const auto expect_doppler = std::lround(fd / o.doppler_resolution_hz());
    const auto expect_delay = std::lround(2.0 * kTable1TargetRange / oracle::c0 * 18e6);
    CHECK(expect_doppler == 24);
    CHECK(expect_delay == 12);

    int hits = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto r = channel::build_realization(scn, o, cc, 1, i);
        const auto run = run_link_level(r, o, 1, i);
        const auto p = global_peak(run.post_notch);
        REQUIRE_FALSE(run.detections.empty());
        CHECK(run.detections[0].delay_bin == p.delay);
        if (doppler_gap(p.doppler, expect_doppler, 50) <= 1 &&
            std::abs(static_cast<long>(p.delay) - expect_delay) <= 1) {
            ++hits;
        }
        // background alone, through the same noisy pipeline, concentrates at DC
        Rng noise = make_stream(1, 99, i);
        const auto pilot = make_pilot(o.n_sc(), i);
        const auto bg = delay_doppler(estimate_csi(simulate_echo(r.background, pilot, o.snr_db, noise), pilot), o);
        CHECK(bg.energy_near_zero_doppler(1) >= 0.9 * bg.energy());
    }
    CHECK(hits == 20);

    SUBCASE("runs are reproducible")
    {
        const auto r = channel::build_realization(scn, o, cc, 4, 2);
        const auto a = run_link_level(r, o, 4, 2);
        const auto b = run_link_level(r, o, 4, 2);
        CHECK(a.csi == b.csi);
        CHECK(a.post_notch.magnitudes() == b.post_notch.magnitudes());
    }
    SUBCASE("micro modes are configured as described")
    {
        const auto cos_mode = std::get<micro::Sinusoid>(table1_cosine_mode(o));
        const auto saw_mode = std::get<micro::Sawtooth>(table1_sawtooth_mode(o));
        CHECK(cos_mode.peak_doppler_hz == 50.0);
        CHECK(saw_mode.peak_doppler_hz == 30.0);
        CHECK(saw_mode.period_s == doctest::Approx(o.n_reps * o.pri_s()));
    }
}
