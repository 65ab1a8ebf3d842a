// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The scsice Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "scsice/experiment.hpp"
#include "scsice/metrics.hpp"
#include "scsice/parallel.hpp"
#include "scsice/scsi_database.hpp"
#include "scsice/vstd.hpp"

namespace scsice
{
namespace
{

struct CommonOptions
{
    std::uint64_t seed = 1;
    std::string out;
    int threads = 0;
    std::string config;
    std::vector<std::string> settings;
};

ExperimentConfig load_settings(const CommonOptions& o)
{
    ExperimentConfig cfg;
    if (!o.config.empty()) {
        cfg = load_config(o.config, false);
    }
    for (const auto& s : o.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
            throw ConfigError("--set expects key=value, got '" + s + "'");
        }
        apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    cfg.system.validate();
    cfg.scene.validate();
    return cfg;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open '" + path + "'");
    }
    return f;
}

std::ofstream open_out(const std::string& path)
{
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream f(path);
    if (!f) {
        throw ConfigError("cannot write '" + path + "'");
    }
    return f;
}

GridScene read_scene_file(const std::string& path)
{
    auto f = open_in(path);
    return read_scene_csv(f);
}

ScsiDatabase read_db_file(const std::string& path)
{
    return ScsiDatabase::load_file(path);
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

VstdConfig vstd_for(const ExperimentConfig& cfg, bool noiseless)
{
    VstdConfig vc = cfg.vstd;
    vc.m_v = cfg.system.m_v;
    vc.m_h = cfg.system.m_h;
    vc.delta_f = cfg.system.delta_f;
    vc.noise_var = noiseless ? 0.0 : noise_for_snr(cfg.snr_sc_db);
    vc.validate();
    return vc;
}

void write_with(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& f)
{
    if (path.empty()) {
        f(fallback);
    } else {
        auto os = open_out(path);
        f(os);
    }
}

int cmd_scene_gen(const CommonOptions& o, std::ostream& out)
{
    ExperimentConfig cfg = load_settings(o);
    SceneParams sp = cfg.scene;
    sp.delta_f = cfg.system.delta_f;
    const GridScene scene = generate_scene(sp, o.seed);
    write_with(o.out, out, [&](std::ostream& os) { write_scene_csv(scene, os); });
    return kExitOk;
}

int cmd_db_build(const CommonOptions& o, const std::string& scene_path, bool noiseless, bool stamp,
                 std::ostream& out, std::ostream& err)
{
    ExperimentConfig cfg = load_settings(o);
    GridScene scene;
    if (scene_path.empty()) {
        SceneParams sp = cfg.scene;
        sp.delta_f = cfg.system.delta_f;
        scene = generate_scene(sp, o.seed);
    } else {
        scene = read_scene_file(scene_path);
    }
    const VstdConfig vc = vstd_for(cfg, noiseless);
    DatabaseBuild build = build_database(scene, vc, o.seed);
    if (stamp) {
        build.db.metadata().timestamp = utc_timestamp();
    }
    write_with(o.out, out, [&](std::ostream& os) { build.db.save(os); });
    if (!o.out.empty()) {
        auto os = open_out(o.out + ".diag.csv");
        for (const auto& d : build.diagnostics) {
            write_diagnostics_csv(d, os);
        }
    }
    for (int g : build.failed_grids) {
        err << "grid " << g << ": decomposition failed\n";
    }
    if (!build.failed_grids.empty()) {
        return kExitNumerical;
    }
    return kExitOk;
}

int cmd_db_inspect(const std::string& db_path, int grid, std::ostream& out)
{
    const ScsiDatabase db = read_db_file(db_path);
    if (!db.contains(grid)) {
        throw ConfigError("grid " + std::to_string(grid) + " has no record");
    }
    const auto& rec = db.lookup(grid);
    const Point c = db.geometry().center(grid);
    out << std::setprecision(10);
    out << "#grid " << grid << ", center=(" << c.x << ", " << c.y << "), paths=" << rec.paths.size()
        << ", total_power=" << rec.paths.total_power() << "\n";
    out << "l,tau_s,theta_rad,phi_rad,rho\n";
    for (std::size_t l = 0; l < rec.paths.size(); ++l) {
        const auto& p = rec.paths.paths[l];
        out << l << ',' << p.tau << ',' << p.theta << ',' << p.phi << ',' << p.rho << "\n";
    }
    return kExitOk;
}

int cmd_db_diff(const std::string& db_path, const std::string& scene_path, const CommonOptions& o, std::ostream& out)
{
    const ExperimentConfig cfg = load_settings(o);
    const ScsiDatabase db = read_db_file(db_path);
    const GridScene scene = read_scene_file(scene_path);
    const DatabaseDiff diff = diff_against_scene(db, scene, cfg.system.delta_f);
    write_with(o.out, out, [&](std::ostream& os) {
        os << std::setprecision(10);
        os << "#dbdiff v1\n";
        os << "grid_id,tau_s,theta_rad,phi_rad,rho,path_count_mismatch\n";
        for (std::size_t g = 0; g < diff.per_grid.size(); ++g) {
            const auto& e = diff.per_grid[g];
            os << g << ',' << e.tau << ',' << e.theta << ',' << e.phi << ',' << e.rho << ','
               << e.path_count_mismatches << "\n";
        }
        const auto& m = diff.max;
        os << "max," << m.tau << ',' << m.theta << ',' << m.phi << ',' << m.rho << ',' << m.path_count_mismatches
           << "\n";
    });
    return kExitOk;
}

int cmd_estimate(const CommonOptions& o, const std::string& scene_path, const std::string& db_path, double snr_db,
                 const std::vector<std::string>& estimators, const std::string& dump, std::ostream& out)
{
    const ExperimentConfig cfg = load_settings(o);
    const SystemConfig& sys = cfg.system;
    const GridScene scene = read_scene_file(scene_path);
    std::optional<ScsiDatabase> db;
    if (!db_path.empty()) {
        db = read_db_file(db_path);
    }
    Rng rng(o.seed);
    const EstimationDraw draw = draw_estimation_case(scene, sys, snr_db, rng);
    if (!dump.empty()) {
        auto os = open_out(dump);
        write_received_csv(draw.grid, os);
    }

    std::vector<ScsiCorrelations> db_scsi;
    std::vector<ScsiCorrelations> ideal_scsi;
    for (std::size_t k = 0; k < draw.locations.size(); ++k) {
        PathSet stat = draw.truth_paths[k];
        stat.gains.clear();
        ideal_scsi.push_back(build_correlations(stat, sys));
        if (db) {
            db_scsi.push_back(correlations_for_user(*db, draw.locations[k], sys));
        }
    }
    const WindowPair win = make_window(cfg.windows.front(), sys.n_pilot(), sys.m_v, sys.m_h, sys.kaiser_shape);
    BandSpec band = cfg.bands.front().resolve(sys);
    band.periodic = cfg.band_periodic;

    std::vector<std::pair<std::string, double>> results;
    for (const auto& name : estimators) {
        const bool uses_db = name == "sa_bce" || name == "sa_wbce";
        if (uses_db && !db) {
            throw ConfigError("estimator '" + name + "' needs --db");
        }
        const auto& scsi = uses_db ? db_scsi : ideal_scsi;
        std::vector<CMat> est;
        if (name == "trivial") {
            est = trivial_estimate(draw.grid, draw.allocations, sys);
        } else if (name == "sa_bce" || name == "sa_bce_ideal") {
            est = sa_bce(draw.grid, draw.allocations, scsi, draw.noise_var, sys, cfg.estimator_options);
        } else if (name == "sa_wbce" || name == "sa_wbce_ideal") {
            est = sa_wbce(draw.grid, draw.allocations, scsi, draw.noise_var, win, band, sys, cfg.estimator_options);
        } else {
            throw ConfigError("unknown estimator '" + name + "'");
        }
        results.emplace_back(name, nmse(est, draw.channels).db);
    }
    write_with(o.out, out, [&](std::ostream& os) {
        os << std::setprecision(10);
        os << "#estimate v1, snr_db=" << snr_db << ", seed=" << o.seed << ", users=" << draw.locations.size() << "\n";
        os << "estimator,nmse_db\n";
        for (const auto& [n, v] : results) {
            os << n << ',' << v << "\n";
        }
    });
    return kExitOk;
}

int cmd_experiment_run(const CommonOptions& o, const std::string& cfg_path, bool seed_given, bool out_given,
                       std::ostream& out)
{
    ExperimentConfig cfg = load_config(cfg_path);
    for (const auto& s : o.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
            throw ConfigError("--set expects key=value, got '" + s + "'");
        }
        apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed_given) {
        cfg.seed = o.seed;
    }
    if (out_given) {
        cfg.out_dir = o.out;
    }
    cfg.validate();
    const ExperimentResult res = run_experiment(cfg);
    write_outputs(res, cfg.out_dir);
    write_summary_csv(res, out);
    if (res.failed_trials == cfg.trials) {
        return kExitNumerical;
    }
    return kExitOk;
}

int cmd_experiment_list(std::ostream& out)
{
    for (const auto& [name, desc] : scenario_catalog()) {
        out << std::left << std::setw(16) << name << ' ' << desc << "\n";
    }
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Statistical-CSI assisted channel estimation toolkit", "scsice"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOptions o;
    auto* seed_opt = app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
    auto* out_opt = app.add_option("--out", o.out, "Output file or directory");
    app.add_option("--threads", o.threads, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--config", o.config, "key = value configuration file");
    app.add_option("--set", o.settings, "Extra key=value setting (repeatable)");

    auto* scene = app.add_subcommand("scene", "Synthetic scenes")->require_subcommand(1);
    auto* scene_gen = scene->add_subcommand("gen", "Generate a grid scene CSV");

    auto* db = app.add_subcommand("db", "SCSI databases")->require_subcommand(1);
    auto* db_build = db->add_subcommand("build", "Build a database from snapshots of a scene");
    std::string scene_path;
    bool noiseless = false;
    bool no_timestamp = false;
    db_build->add_option("--scene", scene_path, "Scene CSV (generated from the settings when omitted)");
    db_build->add_flag("--noiseless", noiseless, "Noise-free snapshots");
    db_build->add_flag("--no-timestamp", no_timestamp, "Leave the build timestamp empty");

    auto* db_inspect = db->add_subcommand("inspect", "Print the record of one grid");
    int grid = 0;
    std::string db_path;
    db_inspect->add_option("grid", grid, "Grid id")->required();
    db_inspect->add_option("--db", db_path, "Database CSV")->required();

    auto* db_diff = db->add_subcommand("diff", "Per-parameter errors of a database against a scene");
    std::string diff_scene;
    db_diff->add_option("scene", diff_scene, "Ground-truth scene CSV")->required();
    db_diff->add_option("--db", db_path, "Database CSV")->required();

    auto* estimate = app.add_subcommand("estimate", "Estimate channels for one user drop");
    double snr_db = 20.0;
    std::vector<std::string> estimators{"trivial", "sa_bce", "sa_bce_ideal", "sa_wbce"};
    std::string dump;
    estimate->add_option("--scene", scene_path, "Scene CSV")->required();
    estimate->add_option("--db", db_path, "Database CSV");
    estimate->add_option("--snr", snr_db, "Per-entry SNR in dB")->capture_default_str();
    estimate->add_option("--estimators", estimators, "Estimators to run")->delimiter(',');
    estimate->add_option("--dump-received", dump, "Write the received pilots CSV here");

    auto* experiment = app.add_subcommand("experiment", "Monte-Carlo experiments")->require_subcommand(1);
    auto* exp_run = experiment->add_subcommand("run", "Run an experiment config");
    std::string cfg_path;
    exp_run->add_option("config", cfg_path, "Config file")->required();
    auto* exp_list = experiment->add_subcommand("list", "List built-in scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failed = &app;
        for (auto* sub : {scene, db, experiment}) {
            if (sub->parsed()) {
                failed = sub;
            }
        }
        err << failed->help();
        return kExitConfig;
    }

    try {
        if (o.threads > 0) {
            set_num_threads(o.threads);
        }
        if (scene_gen->parsed()) {
            return cmd_scene_gen(o, out);
        }
        if (db_build->parsed()) {
            return cmd_db_build(o, scene_path, noiseless, !no_timestamp, out, err);
        }
        if (db_inspect->parsed()) {
            return cmd_db_inspect(db_path, grid, out);
        }
        if (db_diff->parsed()) {
            return cmd_db_diff(db_path, diff_scene, o, out);
        }
        if (estimate->parsed()) {
            return cmd_estimate(o, scene_path, db_path, snr_db, estimators, dump, out);
        }
        if (exp_run->parsed()) {
            return cmd_experiment_run(o, cfg_path, seed_opt->count() > 0, out_opt->count() > 0, out);
        }
        if (exp_list->parsed()) {
            return cmd_experiment_list(out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::out_of_range& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::ios_base::failure& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    err << app.help();
    return kExitConfig;
}

} // namespace scsice
