// Randomized invariants across modules. Every generator is seeded.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "isac/channel.hpp"
#include "isac/cli.hpp"
#include "isac/export.hpp"
#include "isac/microdoppler.hpp"
#include "isac/rcs.hpp"
#include "isac/sensing.hpp"
#include "oracles.hpp"

using namespace isac;

namespace {

constexpr double kLambda = 0.0857;

rcs::PrimitiveShape random_shape(Rng& rng)
{
    std::uniform_real_distribution<double> dim(0.05, 2.0);
    std::uniform_real_distribution<double> rho(0.0, 1.0);
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0:
        return rcs::PrimitiveShape(rcs::RectPlate{dim(rng), dim(rng)}, rho(rng));
    case 1:
        return rcs::PrimitiveShape(rcs::CircularPlate{dim(rng)}, rho(rng));
    case 2:
        return rcs::PrimitiveShape(rcs::Sphere{dim(rng)}, rho(rng));
    default:
        return rcs::PrimitiveShape(rcs::Cylinder{dim(rng), dim(rng)}, rho(rng));
    }
}

rcs::SegmentedObject plate_at(double z, double edge)
{
    rcs::Pose pose;
    pose.center = {0.0, 0.0, z};
    return rcs::segment_grid(rcs::PrimitiveShape(rcs::RectPlate{edge, edge}), 1, kLambda, pose);
}

long circular_gap(long a, long b, long n)
{
    const long g = ((a - b) % n + n) % n;
    return std::min(g, n - g);
}

} // namespace

TEST_CASE("RCS is never negative")
{
    Rng rng = make_stream(100, 0);
    std::uniform_real_distribution<double> ang(0.0, kPi);
    for (int i = 0; i < 2000; ++i) {
        const auto shape = random_shape(rng);
        const double s = rcs::primitive_rcs(shape, kLambda, {ang(rng), ang(rng)});
        CHECK(s >= 0.0);
        CHECK(std::isfinite(s));
    }
}

TEST_CASE("sphere RCS does not depend on aspect")
{
    Rng rng = make_stream(101, 0);
    std::uniform_real_distribution<double> r(0.05, 3.0);
    std::uniform_real_distribution<double> ang(0.0, kPi / 2);
    for (int i = 0; i < 50; ++i) {
        const rcs::PrimitiveShape sphere(rcs::Sphere{r(rng)});
        const double ref = rcs::primitive_rcs(sphere, kLambda, rcs::AspectAngles::monostatic(0.0));
        for (int j = 0; j < 20; ++j) {
            CHECK(rcs::primitive_rcs(sphere, kLambda, {ang(rng), ang(rng)}) == ref);
        }
    }
}

TEST_CASE("far-field distance scaling")
{
    for (double d : {0.1, 0.7, 2.5}) {
        CHECK(rcs::far_field_distance(2.0 * d, kLambda) == doctest::Approx(4.0 * rcs::far_field_distance(d, kLambda)));
    }
    for (double lam : {0.01, 0.0857, 0.3}) {
        CHECK(rcs::far_field_distance(1.0, lam / 2.0) == doctest::Approx(2.0 * rcs::far_field_distance(1.0, lam)));
    }
}

TEST_CASE("aggregation of congruent and random-phase segments")
{
    const Vec3 obs{0.0, 0.0, 1000.0};
    const double sigma1 = rcs::object_rcs(plate_at(0.0, 0.2), obs, obs, kLambda);

    // two-way path lengths differing by exactly one wavelength add in phase
    const auto pair = rcs::SegmentedObject::merge(plate_at(0.0, 0.2), plate_at(-kLambda / 2.0, 0.2));
    const double coherent = rcs::object_rcs(pair, obs, obs, kLambda, rcs::Aggregation::coherent);
    const double incoherent = rcs::object_rcs(pair, obs, obs, kLambda, rcs::Aggregation::incoherent);
    const double s2 = rcs::object_rcs(plate_at(-kLambda / 2.0, 0.2), obs, obs, kLambda);
    CHECK(coherent == doctest::Approx(std::pow(std::sqrt(sigma1) + std::sqrt(s2), 2)).epsilon(1e-9));
    CHECK(incoherent == doctest::Approx(sigma1 + s2).epsilon(1e-12));

    // uniformly random relative phase: coherent power averages to the incoherent sum
    Rng rng = make_stream(102, 0);
    std::uniform_real_distribution<double> off(0.0, kLambda / 2.0);
    double mean = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const auto obj = rcs::SegmentedObject::merge(plate_at(0.0, 0.2), plate_at(-off(rng), 0.2));
        mean += rcs::object_rcs(obj, obs, obs, kLambda, rcs::Aggregation::coherent);
    }
    mean /= n;
    CHECK(mean == doctest::Approx(incoherent).epsilon(0.05));
}

TEST_CASE("segmented plate matches the whole-plate formula")
{
    const rcs::PrimitiveShape plate(rcs::RectPlate{1.0, 1.0});
    const Vec3 obs{0.0, 0.0, 100.0};
    const double whole = oracle::plate_rcs(1.0, 1.0, kLambda, 0.0);
    for (std::size_t g : {2U, 3U, 4U}) {
        const auto obj = rcs::segment_grid(plate, g, kLambda);
        const double s = rcs::object_rcs(obj, obs, obs, kLambda);
        CHECK(std::abs(oracle::db(s / whole)) < 0.5);
    }
}

TEST_CASE("slow/fast round trip on random sweeps")
{
    Rng rng = make_stream(103, 0);
    std::lognormal_distribution<double> sig(0.0, 2.0);
    for (int t = 0; t < 20; ++t) {
        std::vector<rcs::SweepSample> s;
        for (int i = 0; i < 61; ++i) {
            s.push_back({rcs::AspectAngles::monostatic(i * kPi / 180.0), sig(rng)});
        }
        const auto d = rcs::decompose_slow_fast(s);
        double mean = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(std::abs(d.slow_db + d.fast_db[i] - oracle::db(s[i].sigma)) < 1e-9);
            mean += d.fast_db[i];
        }
        CHECK(std::abs(mean / 61.0) < 0.01);
    }
}

TEST_CASE("micro phase series properties")
{
    SUBCASE("zero amplitude gives an all-zero series")
    {
        for (const micro::MicroMotionProfile& p :
             {micro::MicroMotionProfile{micro::Sinusoid{0.0, 40.0, 0.3}}, micro::MicroMotionProfile{micro::Sawtooth{0.0, 0.025, 0.0}},
              micro::MicroMotionProfile{micro::Vital{0.0, 0.3}}}) {
            const auto s = micro::micro_phase_series(p, kLambda, 0.5, 1e-3, 2.0);
            CHECK(std::all_of(s.samples.begin(), s.samples.end(), [](double v) { return v == 0.0; }));
        }
    }
    SUBCASE("halving the wavelength doubles displacement-driven phase")
    {
        for (const micro::MicroMotionProfile& p :
             {micro::MicroMotionProfile{micro::Vital{0.004, 0.25}}, micro::MicroMotionProfile{micro::PendulumArm{1.0, 2.0, 0.2}},
              micro::MicroMotionProfile{micro::Rotor{3, 0.4, 300.0}}}) {
            REQUIRE_FALSE(micro::is_doppler_specified(p));
            const auto a = micro::micro_phase_series(p, kLambda, 2.0, 1e-3, 2.0);
            const auto b = micro::micro_phase_series(p, kLambda / 2.0, 2.0, 1e-3, 2.0);
            for (std::size_t i = 0; i < a.samples.size(); ++i) {
                CHECK(b.samples[i] == doctest::Approx(2.0 * a.samples[i]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("sinusoidal modulation puts its energy on Bessel lines")
    {
        const double fm = 10.0;
        const double fs = 640.0;
        const std::size_t n = 640; // ten modulation periods
        for (double beta : {0.5, 1.0, 2.5, 5.0}) {
            const auto s = micro::micro_phase_series(micro::Sinusoid{beta * fm, fm, 0.0}, kLambda,
                                                     static_cast<double>(n) / fs, 1.0 / fs, 2.0);
            REQUIRE(s.samples.size() == n);
            std::vector<oracle::cplx> x(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = std::polar(1.0, s.samples[i]);
            }
            const auto spec = oracle::dft(x, -1);
            double total = 0.0;
            double on_lines = 0.0;
            double carson = 0.0;
            const auto lines = static_cast<long>(std::ceil(beta)) + 1;
            for (std::size_t k = 0; k < n; ++k) {
                const double e = std::norm(spec[k]);
                total += e;
                const long bin = k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
                if (bin % 10 == 0) {
                    on_lines += e;
                    if (std::abs(bin / 10) <= lines) {
                        carson += e;
                    }
                }
            }
            CHECK(1.0 - on_lines / total < 0.01);
            CHECK(carson / total >= 0.99);
            // line heights follow J_k(beta)
            for (long k = 0; k <= 3; ++k) {
                CHECK(std::abs(spec[static_cast<std::size_t>(10 * k)]) / static_cast<double>(n) ==
                      doctest::Approx(std::abs(std::cyl_bessel_j(static_cast<double>(k), beta))).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("channel invariants")
{
    const OfdmConfig ofdm;
    SUBCASE("cluster powers are normalized")
    {
        Rng rng = make_stream(104, 0);
        for (std::size_t n = 1; n <= 12; ++n) {
            const auto c = channel::generate_background(n, 100e-9, rng);
            const double sum = std::accumulate(c.begin(), c.end(), 0.0,
                                               [](double s, const channel::Cluster& x) { return s + x.power; });
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
    SUBCASE("Doppler peak tracks radial velocity")
    {
        Rng pick = make_stream(105, 0);
        std::uniform_real_distribution<double> v(-40.0, 40.0);
        channel::ChannelConfig cc;
        cc.n_background = 0;
        for (int t = 0; t < 25; ++t) {
            auto scn = sensing::table1_scenario();
            scn.targets[0].velocity = {v(pick), 0.0, 0.0};
            const auto r = channel::build_realization(scn, ofdm, cc, 5, static_cast<std::uint64_t>(t));
            const auto map = sensing::delay_doppler(r.total(), ofdm);
            std::size_t best = 0;
            for (std::size_t c = 0; c < map.n_doppler(); ++c) {
                if (map.power(12, c) > map.power(12, best)) {
                    best = c;
                }
            }
            const double fd = 2.0 * scn.targets[0].velocity.x / ofdm.wavelength();
            const double expect = fd / ofdm.doppler_resolution_hz();
            CHECK(std::abs(static_cast<double>(map.doppler_bin(best)) - expect) <= 1.0);
        }
    }
    SUBCASE("energy accounting for orthogonal single-ray clusters")
    {
        Rng rng = make_stream(106, 0);
        std::uniform_real_distribution<double> p(0.1, 1.0);
        std::uniform_real_distribution<double> g(1e-3, 10.0);
        for (int t = 0; t < 10; ++t) {
            std::vector<channel::Cluster> cl;
            double expect = 0.0;
            for (int i = 0; i < 4; ++i) {
                channel::Cluster c;
                c.delay_s = (3.0 + 7.0 * i) / 18e6;
                c.doppler_hz = (i - 2) * 120.0;
                c.power = p(rng);
                c.path_gain = g(rng);
                c.n_rays = 1;
                c.ray_angle_offsets = {0.0};
                expect += c.power * c.path_gain;
                cl.push_back(c);
            }
            const auto r = channel::freq_response(cl, ofdm, {}, rng);
            const double energy = r.total().energy() / static_cast<double>(ofdm.n_sc() * ofdm.n_reps);
            CHECK(std::abs(energy - expect) / expect < 1e-9);
        }
    }
    SUBCASE("multi-ray clusters keep their power on average")
    {
        Rng rng = make_stream(107, 0);
        channel::Cluster c;
        c.power = 0.6;
        c.path_gain = 2.0;
        c.ray_angle_offsets = channel::ray_offsets(20);
        double mean = 0.0;
        const int n = 400;
        OfdmConfig small = ofdm;
        small.bandwidth_hz = 8 * small.scs_hz;
        small.n_reps = 4;
        for (int i = 0; i < n; ++i) {
            mean += channel::freq_response({c}, small, {}, rng).total().energy() / 32.0;
        }
        CHECK(mean / n == doctest::Approx(1.2).epsilon(0.1));
    }
}

TEST_CASE("notch and background properties")
{
    const OfdmConfig ofdm;
    Rng rng = make_stream(108, 0);
    for (int t = 0; t < 10; ++t) {
        const auto bg = channel::generate_background(5, 100e-9, rng);
        const auto r = channel::freq_response(bg, ofdm, {}, rng);
        const auto pre = sensing::delay_doppler(r.total(), ofdm);
        const auto post = sensing::delay_doppler(sensing::notch_zero_doppler(r.total()), ofdm);
        CHECK(post.energy() / pre.energy() < 1e-6);
        CHECK(pre.energy_near_zero_doppler(1) >= 0.9 * pre.energy());
        for (std::size_t d = 0; d < post.n_delay(); ++d) {
            CHECK(post.magnitude(d, post.zero_doppler_column()) <= 1e-12 * std::sqrt(pre.max_power()));
        }
    }
}

TEST_CASE("pipeline determinism")
{
    const OfdmConfig ofdm;
    const channel::ChannelConfig cc;
    const auto scn = sensing::table1_scenario(sensing::table1_sawtooth_mode(ofdm));
    for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
        const auto a = sensing::run_link_level(channel::build_realization(scn, ofdm, cc, seed, 3), ofdm, seed, 3);
        const auto b = sensing::run_link_level(channel::build_realization(scn, ofdm, cc, seed, 3), ofdm, seed, 3);
        CHECK(a.csi == b.csi);
        CHECK(a.post_notch.magnitudes() == b.post_notch.magnitudes());
        const auto dir = oracle::scratch_dir("det");
        io::write_delay_doppler_csv(dir / "a.csv", a.post_notch);
        io::write_delay_doppler_csv(dir / "b.csv", b.post_notch);
        CHECK(io::sha256_hex(dir / "a.csv") == io::sha256_hex(dir / "b.csv"));
    }
}

TEST_CASE("detections respect the circular guard")
{
    // any two kept detections are more than guard bins apart in delay or circular Doppler
    const OfdmConfig ofdm;
    const channel::ChannelConfig cc;
    const auto scn = sensing::table1_scenario(sensing::table1_cosine_mode(ofdm));
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto run = sensing::run_link_level(channel::build_realization(scn, ofdm, cc, 9, i), ofdm, 9, i,
                                                 {25.0, 2});
        for (std::size_t a = 0; a < run.detections.size(); ++a) {
            for (std::size_t b = a + 1; b < run.detections.size(); ++b) {
                const auto& x = run.detections[a];
                const auto& y = run.detections[b];
                const bool apart =
                    std::abs(static_cast<long>(x.delay_bin) - static_cast<long>(y.delay_bin)) > 2 ||
                    circular_gap(x.doppler_bin, y.doppler_bin, 50) > 2;
                CHECK(apart);
            }
        }
    }
}

TEST_CASE("subcommands leave their input files untouched")
{
    const auto dir = oracle::scratch_dir("inputs");
    const auto scene = dir / "scene.yaml";
    std::filesystem::copy_file(std::filesystem::path(ISAC_SOURCE_DIR) / "scenarios/table1.yaml", scene);
    const auto before = io::sha256_hex(scene);
    cli::RunConfig rc;
    rc.scenario_path = scene;
    rc.overrides = {"simulate.trials=2"};
    rc.output_dir = dir / "out";
    std::ostringstream sink;
    for (auto sub : {cli::Subcommand::validate, cli::Subcommand::simulate, cli::Subcommand::rcs_sweep}) {
        rc.subcommand = sub;
        CHECK(cli::run(rc, sink, sink).exit_code == cli::kExitOk);
        CHECK(io::sha256_hex(scene) == before);
    }
}
