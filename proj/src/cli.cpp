#include "isac/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "isac/channel.hpp"
#include "isac/config.hpp"
#include "isac/export.hpp"
#include "isac/microdoppler.hpp"
#include "isac/rcs.hpp"
#include "isac/scenario.hpp"
#include "isac/sensing.hpp"

namespace isac::cli {

namespace fs = std::filesystem;

namespace {

/// Collects emitted files for the manifest.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}
    fs::path path(const std::string& name)
    {
        fs::path p = dir_ / name;
        files_.push_back(p);
        return p;
    }
    [[nodiscard]] const fs::path& dir() const { return dir_; }
    [[nodiscard]] const std::vector<fs::path>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
};

std::string distance_tag(double d)
{
    return fmt::format("{:g}m", d);
}

// ---- rcs-sweep -------------------------------------------------------------

void run_rcs_sweep(const config::SimulationConfig& cfg, Artifacts& art, std::ostream& out)
{
    const auto& sweep = cfg.rcs_sweep;
    const double lambda = wavelength_from_carrier(cfg.scenario.carrier_hz);
    const rcs::Pose& pose = sweep.object.pose;
    const Vec3 n = pose.normal.normalized();
    Vec3 u = pose.u_axis - n * pose.u_axis.dot(n);
    u = u.normalized();

    for (double d : sweep.distances_m) {
        if (!(d > 0.0)) {
            throw config::ConfigError(fmt::format("sweep distance must be positive, got {}", d));
        }
        rcs::SegmentedObject obj = [&] {
            try {
                return config::build_object(sweep.object, lambda, d);
            } catch (const rcs::SegmentationInfeasible& e) {
                throw config::ConfigError(fmt::format("at {} m: {}", d, e.what()));
            }
        }();

        std::vector<rcs::SweepSample> samples;
        const auto n_angles =
            static_cast<std::size_t>(std::floor((sweep.angle_stop_deg - sweep.angle_start_deg) / sweep.angle_step_deg +
                                                1e-9)) + 1;
        for (std::size_t i = 0; i < n_angles; ++i) {
            const double deg = sweep.angle_start_deg + static_cast<double>(i) * sweep.angle_step_deg;
            const double th = deg * kPi / 180.0;
            // monostatic radar rotated in the plane spanned by the normal and u
            const Vec3 radar = pose.center + (n * std::cos(th) + u * std::sin(th)) * d;
            const double sigma = rcs::object_rcs(obj, radar, radar, lambda, sweep.aggregation);
            samples.push_back({rcs::AspectAngles::monostatic(std::abs(th)), sigma});
        }
        const auto dec = rcs::decompose_slow_fast(samples);
        std::vector<io::RcsRow> rows;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            rows.push_back({sweep.angle_start_deg + static_cast<double>(i) * sweep.angle_step_deg, samples[i].sigma,
                            dec.slow_db, dec.fast_db[i]});
        }
        io::write_rcs_csv(art.path(fmt::format("rcs_{}.csv", distance_tag(d))), rows);
        out << fmt::format("rcs-sweep: {} at {} m, {} segments, slow component {:.2f} dBsm\n",
                           sweep.object.shape.describe(), d, obj.segments().size(), dec.slow_db);
    }
}

// ---- microdoppler ----------------------------------------------------------

void run_spectrograms(const config::SimulationConfig& cfg, Artifacts& art, std::ostream& out)
{
    const auto& md = cfg.microdoppler;
    const double lambda = wavelength_from_carrier(cfg.scenario.carrier_hz);
    std::string summary = "orientation_deg,peak_doppler_hz,period_s\n";
    for (double deg : md.orientations_deg) {
        micro::ArmSwingScene scene = md.scene;
        scene.orientation_rad = deg * kPi / 180.0;
        const auto iq = micro::arm_swing_echo(scene, lambda, md.sample_rate_hz, md.duration_s);
        const auto s = micro::spectrogram(iq, md.sample_rate_hz, md.window_len, md.hop, md.nfft);
        const auto tag = fmt::format("{:g}deg", deg);
        io::write_spectrogram_csv(art.path(fmt::format("spectrogram_{}.csv", tag)), s);
        io::write_spectrogram_pgm(art.path(fmt::format("spectrogram_{}.pgm", tag)), s);

        const auto ridge = micro::ridge_frequencies(s);
        double peak = 0.0;
        for (double f : ridge) {
            peak = std::max(peak, std::abs(f));
        }
        const auto centroid = micro::doppler_centroid(s);
        const double dt = static_cast<double>(md.hop) / md.sample_rate_hz;
        const double period = micro::dominant_period(centroid, dt);
        summary += fmt::format("{:g},{:.6g},{:.6g}\n", deg, peak, period);
        out << fmt::format("microdoppler: orientation {:g} deg, peak {:.1f} Hz, period {:.3f} s\n", deg, peak, period);
    }
    io::write_text(art.path("signatures.csv"), summary);
}

/// Arm kinematics over the run plus a delay-Doppler map of the same scene.
void run_fig3(const config::SimulationConfig& cfg, std::uint64_t seed, Artifacts& art, std::ostream& out)
{
    const auto& md = cfg.microdoppler;
    const auto& scene = md.scene;
    std::string csv = "time_s,left_velocity_mps,left_distance_m,right_velocity_mps,right_distance_m\n";
    const auto n = static_cast<std::size_t>(std::llround(md.duration_s * md.sample_rate_hz));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / md.sample_rate_hz;
        const auto arms = micro::arm_swing_states(t, scene.period_s, scene.peak_speed_mps, scene.orientation_rad,
                                                  scene.body_position);
        const auto radial = [&](const micro::ScattererState& s) {
            const Vec3 u = (s.position - scene.tx_position).normalized();
            return s.velocity.dot(u);
        };
        csv += fmt::format("{:.6g},{:.9g},{:.9g},{:.9g},{:.9g}\n", t, radial(arms.left),
                           distance(arms.left.position, scene.tx_position), radial(arms.right),
                           distance(arms.right.position, scene.tx_position));
    }
    io::write_text(art.path("arm_kinematics.csv"), csv);

    scenario::Scenario scn;
    scn.carrier_hz = cfg.scenario.carrier_hz;
    scn.nodes.push_back({"radar", scenario::NodeKind::bs, scene.tx_position, {}});
    scn.mode = scenario::SensingMode::bs_monostatic;
    scn.tx_node_id = "radar";
    scn.rx_node_id = "radar";
    scenario::Target body;
    body.id = "person";
    body.position = scene.body_position;
    body.rcs = 1.0;
    body.micro_motion = micro::PendulumArm{scene.period_s, scene.peak_speed_mps, scene.orientation_rad};
    scn.targets.push_back(body);

    OfdmConfig ofdm = cfg.ofdm;
    ofdm.carrier_hz = scn.carrier_hz;
    const auto realization = channel::build_realization(scn, ofdm, cfg.channel, seed, 0);
    const auto run = sensing::run_link_level(realization, ofdm, seed, 0, cfg.simulate.detect);
    io::write_delay_doppler_csv(art.path("delay_doppler.csv"), run.post_notch);
    io::write_delay_doppler_pgm(art.path("delay_doppler.pgm"), run.post_notch);
    out << fmt::format("fig3: {} kinematic samples, delay-Doppler map {}x{}\n", n, run.post_notch.n_delay(),
                       run.post_notch.n_doppler());
}

// ---- simulate --------------------------------------------------------------

std::size_t worker_count(std::size_t jobs)
{
    std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ISAC_CHANSIM_THREADS")) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap > 0) {
            n = std::min<std::size_t>(n, cap);
        }
    }
    return std::min(n, std::max<std::size_t>(1, jobs));
}

struct TrialSummary {
    std::size_t detections = 0;
    std::optional<sensing::Detection> strongest;
};

void run_simulate(const config::SimulationConfig& cfg, std::uint64_t seed, bool maps_only, Artifacts& art,
                  std::ostream& out)
{
    const auto& scn = cfg.scenario;
    const OfdmConfig& ofdm = cfg.ofdm;
    const bool mono = scenario::is_monostatic(scn.mode);
    const std::size_t trials = maps_only ? 1 : cfg.simulate.trials;

    std::vector<TrialSummary> summaries(trials);
    std::optional<sensing::SensingRun> first;
    std::optional<channel::ChannelRealization> first_realization;
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr failure;

    const auto worker = [&] {
        for (std::size_t i = next++; i < trials; i = next++) {
            try {
                auto real = channel::build_realization(scn, ofdm, cfg.channel, seed, i);
                auto run = sensing::run_link_level(real, ofdm, seed, i, cfg.simulate.detect);
                TrialSummary s;
                s.detections = run.detections.size();
                if (!run.detections.empty()) {
                    s.strongest = run.detections.front();
                }
                summaries[i] = s;
                if (i == 0) {
                    first = std::move(run);
                    first_realization = std::move(real);
                }
            } catch (...) {
                const std::lock_guard lock(err_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = trials;
            }
        }
    };
    const std::size_t n_workers = worker_count(trials);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    io::write_delay_doppler_csv(art.path("delay_doppler_pre_notch.csv"), first->pre_notch);
    io::write_delay_doppler_pgm(art.path("delay_doppler_pre_notch.pgm"), first->pre_notch);
    io::write_delay_doppler_csv(art.path("delay_doppler_post_notch.csv"), first->post_notch);
    io::write_delay_doppler_pgm(art.path("delay_doppler_post_notch.pgm"), first->post_notch);
    if (!maps_only) {
        io::write_detections_csv(art.path("detections.csv"), first->detections, ofdm, mono);
        io::write_channel_csv(art.path("channel.csv"), first_realization->total());
        std::string csv = "trial,detections,delay_bin,doppler_bin,range_m,velocity_mps\n";
        for (std::size_t i = 0; i < trials; ++i) {
            const auto& s = summaries[i];
            if (s.strongest) {
                const auto rv = sensing::to_range_velocity(*s.strongest, ofdm, mono);
                csv += fmt::format("{},{},{},{},{:.9g},{:.9g}\n", i, s.detections, s.strongest->delay_bin,
                                   s.strongest->doppler_bin, rv.range_m, rv.velocity_mps);
            } else {
                csv += fmt::format("{},0,,,,\n", i);
            }
        }
        io::write_text(art.path("trials.csv"), csv);
    }
    if (first->detections.empty()) {
        out << "simulate: no detections\n";
    } else {
        const auto& d = first->detections.front();
        const auto rv = sensing::to_range_velocity(d, ofdm, mono);
        out << fmt::format("simulate: {} trial(s); strongest detection at delay bin {}, Doppler bin {} "
                           "({:.1f} m, {:.2f} m/s)\n",
                           trials, d.delay_bin, d.doppler_bin, rv.range_m, rv.velocity_mps);
    }
}

// ---- dispatch --------------------------------------------------------------

const Recipe* find_recipe(const std::string& name)
{
    for (const auto& r : figure_recipes()) {
        if (r.name == name) {
            return &r;
        }
    }
    return nullptr;
}

config::SimulationConfig load(const RunConfig& rc)
{
    if (rc.scenario_path) {
        return config::load_config_file(*rc.scenario_path, rc.overrides);
    }
    return config::load_config_text("", rc.overrides);
}

/// Applies the fixed scene of a preset on top of the loaded configuration.
void apply_preset(const std::string& name, config::SimulationConfig& cfg)
{
    if (name == "fig2") {
        cfg.rcs_sweep.object = config::ShapeSpec{};
        cfg.rcs_sweep.distances_m = {5.0, 10.0, 30.0};
        cfg.rcs_sweep.angle_start_deg = 0.0;
        cfg.rcs_sweep.angle_stop_deg = 60.0;
        cfg.rcs_sweep.angle_step_deg = 0.5;
        cfg.rcs_sweep.aggregation = rcs::Aggregation::coherent;
    } else if (name == "fig3") {
        cfg.microdoppler.orientations_deg = {0.0};
    } else if (name == "fig4") {
        cfg.scenario = sensing::table1_scenario(sensing::table1_cosine_mode(cfg.ofdm));
        cfg.scenario.carrier_hz = cfg.ofdm.carrier_hz = 3.5e9;
    } else if (name == "fig5") {
        cfg.microdoppler.orientations_deg = {0.0, 30.0, 60.0, 90.0};
    }
}

int report_violations(const std::vector<scenario::Violation>& v, std::ostream& err)
{
    for (const auto& x : v) {
        err << x.code << ": " << x.message << '\n';
    }
    return v.empty() ? kExitOk : kExitInvalid;
}

} // namespace

std::string to_string(Subcommand s)
{
    switch (s) {
    case Subcommand::rcs_sweep:
        return "rcs-sweep";
    case Subcommand::microdoppler:
        return "microdoppler";
    case Subcommand::simulate:
        return "simulate";
    case Subcommand::validate:
        return "validate";
    }
    return "?";
}

const std::vector<Recipe>& figure_recipes()
{
    static const std::vector<Recipe> recipes{
        {"fig2", Subcommand::rcs_sweep, "1x1 m plate RCS vs aspect at 5, 10 and 30 m"},
        {"fig3", Subcommand::microdoppler, "arm-swing velocity/distance traces and delay-Doppler map"},
        {"fig4", Subcommand::simulate, "link-level run, delay-Doppler maps before and after the notch"},
        {"fig5", Subcommand::microdoppler, "arm-swing spectrograms at 0, 30, 60 and 90 degrees"},
    };
    return recipes;
}

RunResult run(const RunConfig& rc, std::ostream& out, std::ostream& err)
{
    RunResult result;
    try {
        if (rc.preset) {
            const Recipe* recipe = find_recipe(*rc.preset);
            if (recipe == nullptr) {
                err << fmt::format("unknown preset '{}'\n", *rc.preset);
                result.exit_code = kExitInvalid;
                return result;
            }
            if (recipe->subcommand != rc.subcommand) {
                err << fmt::format("preset '{}' belongs to '{}', not '{}'\n", recipe->name,
                                   to_string(recipe->subcommand), to_string(rc.subcommand));
                result.exit_code = kExitInvalid;
                return result;
            }
        }

        config::SimulationConfig cfg = load(rc);
        if (rc.preset) {
            apply_preset(*rc.preset, cfg);
        }
        if (rc.seed) {
            cfg.scenario.seed = *rc.seed;
        }
        const std::uint64_t seed = cfg.scenario.seed;

        if (rc.subcommand == Subcommand::validate || rc.subcommand == Subcommand::simulate) {
            result.exit_code = report_violations(scenario::validate(cfg.scenario), err);
            if (result.exit_code != kExitOk || rc.subcommand == Subcommand::validate) {
                if (result.exit_code == kExitOk) {
                    out << "validate: ok\n";
                }
                return result;
            }
        }

        Artifacts art(fs::absolute(rc.output_dir));
        switch (rc.subcommand) {
        case Subcommand::rcs_sweep:
            run_rcs_sweep(cfg, art, out);
            break;
        case Subcommand::microdoppler:
            if (rc.preset && *rc.preset == "fig3") {
                run_fig3(cfg, seed, art, out);
            } else {
                run_spectrograms(cfg, art, out);
            }
            break;
        case Subcommand::simulate:
            run_simulate(cfg, seed, rc.preset.has_value(), art, out);
            break;
        case Subcommand::validate:
            break;
        }
        result.artifacts = art.files();
        result.manifest = io::write_manifest(art.dir(), art.files());
        out << fmt::format("wrote {} artifact(s) and {}\n", result.artifacts.size(), result.manifest->string());
    } catch (const config::ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        result.exit_code = kExitInvalid;
    } catch (const config::ConfigReadError& e) {
        err << "error: " << e.what() << '\n';
        result.exit_code = kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        result.exit_code = kExitRuntime;
    }
    return result;
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"ISAC channel simulator: RCS sweeps, micro-Doppler signatures and link-level sensing runs"};
    app.require_subcommand(1);

    RunConfig rc;
    std::string scenario_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::string preset;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "YAML scenario/config file");
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "64-bit RNG seed (overrides the scenario seed)");
        sub->add_option("--preset", preset, "figure preset name");
        sub->add_option("--set", rc.overrides, "section.key=value override (repeatable)")->take_all();
    };
    const std::vector<std::pair<Subcommand, std::string>> subs{
        {Subcommand::rcs_sweep, "RCS versus aspect angle for a segmented object"},
        {Subcommand::microdoppler, "arm-swing micro-Doppler spectrograms"},
        {Subcommand::simulate, "link-level sensing run: CSI, delay-Doppler maps, detections"},
        {Subcommand::validate, "check a scenario and print violations"},
    };
    std::vector<std::pair<Subcommand, CLI::App*>> handles;
    for (const auto& [kind, help] : subs) {
        CLI::App* sub = app.add_subcommand(to_string(kind), help);
        add_common(sub);
        handles.emplace_back(kind, sub);
    }
    app.add_flag_callback(
        "--list-presets",
        [] {
            for (const auto& r : figure_recipes()) {
                std::cout << r.name << '\t' << to_string(r.subcommand) << '\t' << r.summary << '\n';
            }
            throw CLI::Success();
        },
        "print figure presets and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    for (const auto& [kind, sub] : handles) {
        if (sub->parsed()) {
            rc.subcommand = kind;
            const auto given = [&](const char* name) { return sub->count(name) > 0; };
            if (given("--scenario")) {
                rc.scenario_path = scenario_path;
            }
            if (given("--seed")) {
                rc.seed = seed;
            }
            if (given("--preset")) {
                rc.preset = preset;
            }
        }
    }
    rc.output_dir = out_dir;
    return run(rc, std::cout, std::cerr).exit_code;
}

} // namespace isac::cli
