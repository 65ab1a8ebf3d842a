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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "scsice/experiment.hpp"
#include "scsice/metrics.hpp"
#include "scsice/parallel.hpp"

namespace scsice
{

namespace
{

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d)) {
            throw std::invalid_argument(v);
        }
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v)
{
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    }
    return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "on" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "off" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    for (const auto& s : split_list(v)) {
        out.push_back(to_double(key, s));
    }
    if (out.empty()) {
        throw ConfigError("key '" + key + "': empty list");
    }
    return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& v)
{
    std::vector<int> out;
    for (const auto& s : split_list(v)) {
        out.push_back(to_int(key, s));
    }
    if (out.empty()) {
        throw ConfigError("key '" + key + "': empty list");
    }
    return out;
}

BandChoice parse_band(const std::string& key, const std::string& v)
{
    if (v == "full") {
        return {};
    }
    const auto colon = v.find(':');
    if (colon == std::string::npos) {
        throw ConfigError("key '" + key + "': band '" + v + "' is not 'b_tau:b_a' or 'full'");
    }
    auto side = [&](const std::string& s) { return s == "full" ? -1 : to_int(key, s); };
    return {side(trim(v.substr(0, colon))), side(trim(v.substr(colon + 1)))};
}

const std::set<std::string> kEstimators{"trivial", "sa_bce", "sa_bce_ideal", "sa_wbce", "sa_wbce_ideal"};

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Scenario kernels

enum class Kind
{
    equivalence,
    vstd_recovery,
    scsi_accuracy,
    estimation
};

Kind kind_of(const std::string& scenario)
{
    if (scenario == "lemma1" || scenario == "window-identity") {
        return Kind::equivalence;
    }
    if (scenario == "vstd-noiseless" || scenario == "mdl") {
        return Kind::vstd_recovery;
    }
    if (scenario == "fig3-desk" || scenario == "fig4-desk") {
        return Kind::scsi_accuracy;
    }
    return Kind::estimation;
}

PathSet random_instance(int paths, double delay_spread, Rng& rng)
{
    PathSet ps;
    double total = 0.0;
    for (int l = 0; l < paths; ++l) {
        PathParams p;
        p.tau = rng.uniform(0.0, delay_spread);
        p.theta = rng.uniform(kPi / 6, 5 * kPi / 6);
        p.phi = rng.uniform(kPi / 6, 5 * kPi / 6);
        p.rho = std::pow(10.0, -rng.uniform(0.0, 0.6));
        total += p.rho;
        ps.paths.push_back(p);
    }
    for (auto& p : ps.paths) {
        p.rho /= total;
    }
    return ps;
}

double max_relative_gap(const std::vector<CMat>& a, const std::vector<CMat>& b)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double n = b[k].norm();
        worst = std::max(worst, n > 0.0 ? (a[k] - b[k]).norm() / n : (a[k] - b[k]).norm());
    }
    return worst;
}

double elapsed(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct TrialOutput
{
    std::vector<MetricsRow> rows;
    RunStats stats;
};

MetricsRow base_row(const ExperimentConfig& cfg, int trial)
{
    MetricsRow r;
    r.scenario = cfg.scenario;
    r.trial = trial;
    r.n_d = cfg.vstd.n_d;
    r.d = cfg.scene.grid_size;
    return r;
}

TrialOutput run_equivalence(const ExperimentConfig& cfg, int trial)
{
    const auto t0 = std::chrono::steady_clock::now();
    const SystemConfig& sys = cfg.system;
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
    const auto allocs = assign_allocations(sys);
    std::vector<ScsiCorrelations> scsi;
    std::vector<std::vector<CMat>> channels;
    std::vector<CMat> truths;
    for (std::size_t k = 0; k < allocs.size(); ++k) {
        PathSet ps = random_instance(cfg.instance_paths, cfg.scene.delay_spread, rng);
        scsi.push_back(build_correlations(ps, sys));
        ps.gains = draw_gains(ps, rng);
        const CMat h = synth_channel(ps, sys.n_c, sys);
        channels.emplace_back(static_cast<std::size_t>(sys.t_p), h);
        truths.push_back(h);
    }
    const double snr = cfg.snr_ce_db.front();
    const double noise = noise_for_snr(snr);
    const auto pilots = make_pilot_sequences(sys, rng);
    const PilotGrid grid = synth_received(channels, allocs, pilots, noise, sys, rng);
    const auto ref = sa_bce_segments(grid, allocs, scsi, noise, sys, cfg.estimator_options);

    TrialOutput out;
    std::vector<CMat> other;
    MetricsRow row = base_row(cfg, trial);
    row.sweep = "instance";
    row.x = 0.0;
    row.snr_db = snr;
    if (cfg.scenario == "lemma1") {
        other = sa_bce_beam_delay_segments(grid, allocs, scsi, noise, sys, cfg.estimator_options);
        row.estimator = "beam_delay";
        row.band = "dense";
    } else {
        const WindowPair win = make_window(WindowKind::kaiser, sys.n_pilot(), sys.m_v, sys.m_h, sys.kaiser_shape);
        const BandSpec band = BandSpec::full(sys);
        other = sa_wbce_segments(grid, allocs, scsi, noise, win, band, sys, cfg.estimator_options, &out.stats);
        row.estimator = "sa_wbce_kaiser";
        row.band = BandChoice{}.label();
    }
    row.extra = max_relative_gap(other, ref);
    row.nmse_db = nmse(interpolate_segments(other, allocs, sys), truths).db;
    row.wall_s = cfg.record_wall_time ? elapsed(t0) : 0.0;
    out.rows.push_back(row);
    return out;
}

// Delays at or near zero are compared against 1 ns instead of themselves.
constexpr double kDelayFloor = 1e-9;

GridScene recovery_scene(const ExperimentConfig& cfg, std::uint64_t seed)
{
    SceneParams sp = cfg.scene;
    sp.grids = 1;
    sp.delta_f = cfg.vstd.delta_f;
    return generate_scene(sp, seed);
}

TrialOutput run_vstd_recovery(const ExperimentConfig& cfg, int trial)
{
    const auto t0 = std::chrono::steady_clock::now();
    const GridScene scene = recovery_scene(cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), 0));
    const PathSet& truth = scene.grids.front();
    VstdConfig vc = cfg.vstd;
    vc.noise_var = cfg.scenario == "vstd-noiseless" ? 0.0 : noise_for_snr(cfg.snr_sc_db) * truth.total_power();
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), 1));
    const SnapshotBlock block = collect_snapshots(truth, vc.snapshots, vc.n_d, vc.m_v, vc.m_h, vc.delta_f,
                                                  vc.noise_var, rng, vc.gains);
    const VstdResult res = build_grid_record(block, vc, 0);

    MetricsRow row = base_row(cfg, trial);
    row.estimator = "vstd";
    row.sweep = "instance";
    row.x = 0.0;
    row.snr_db = vc.noise_var > 0.0 ? cfg.snr_sc_db : 300.0;
    if (cfg.scenario == "mdl") {
        row.extra = res.diagnostics.lbar;
    } else {
        const PathSet& est = res.record.paths;
        const auto match = greedy_match(truth, est, vc.delta_f);
        double worst = 0.0;
        for (std::size_t l = 0; l < truth.size(); ++l) {
            if (match[l] < 0) {
                worst = std::max(worst, 1.0);
                continue;
            }
            const auto& t = truth.paths[l];
            const auto& e = est.paths[static_cast<std::size_t>(match[l])];
            double sample_power = 0.0;
            for (Index w = 0; w < block.gains.cols(); ++w) {
                sample_power += std::norm(block.gains(static_cast<Index>(l), w));
            }
            sample_power /= static_cast<double>(block.gains.cols());
            worst = std::max({worst, std::abs(e.tau - t.tau) / std::max(std::abs(t.tau), kDelayFloor),
                              std::abs(e.theta - t.theta) / t.theta, std::abs(e.phi - t.phi) / t.phi,
                              std::abs(e.rho - sample_power) / sample_power});
        }
        if (est.size() != truth.size()) {
            worst = std::max(worst, 1.0);
        }
        row.extra = worst;
    }
    row.wall_s = cfg.record_wall_time ? elapsed(t0) : 0.0;
    return {{row}, {}};
}

TrialOutput run_scsi_accuracy(const ExperimentConfig& cfg, int trial)
{
    TrialOutput out;
    const std::vector<double> sizes =
        cfg.grid_size_sweep.empty() ? std::vector<double>{cfg.scene.grid_size} : cfg.grid_size_sweep;
    const std::vector<int> nds = cfg.n_d_sweep.empty() ? std::vector<int>{cfg.vstd.n_d} : cfg.n_d_sweep;
    const std::vector<double> snrs =
        cfg.snr_sc_sweep.empty() ? std::vector<double>{cfg.snr_sc_db} : cfg.snr_sc_sweep;
    SystemConfig sys = cfg.system;
    std::uint64_t point = 0;
    for (std::size_t di = 0; di < sizes.size(); ++di) {
        SceneParams sp = cfg.scene;
        sp.grid_size = sizes[di];
        sp.delta_f = sys.delta_f;
        const GridScene scene = generate_scene(sp, derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), 0));
        std::vector<ScsiCorrelations> ideal;
        for (const auto& g : scene.grids) {
            ideal.push_back(build_correlations(g, sys));
        }
        for (int nd : nds) {
            for (double snr : snrs) {
                const auto t0 = std::chrono::steady_clock::now();
                ++point;
                VstdConfig vc = cfg.vstd;
                vc.n_d = nd;
                vc.m_v = sys.m_v;
                vc.m_h = sys.m_h;
                vc.delta_f = sys.delta_f;
                vc.noise_var = noise_for_snr(snr);
                const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), 100 + point);
                double sum = 0.0;
                int used = 0;
                for (int g = 0; g < scene.count(); ++g) {
                    try {
                        const VstdResult res = build_grid_record(scene, g, vc, derive_seed(seed, g));
                        const ScsiCorrelations est = build_correlations(res.record.paths, sys);
                        const auto& id = ideal[static_cast<std::size_t>(g)];
                        sum += scsi_accuracy(est.r_f, est.r_s, id.r_f, id.r_s, cfg.lscsi_noise).db;
                        ++used;
                    } catch (const NumericalError&) {
                    }
                }
                if (used == 0) {
                    throw NumericalError("every grid failed to decompose");
                }
                MetricsRow row = base_row(cfg, trial);
                row.estimator = "vstd";
                row.n_d = nd;
                row.d = sizes[di];
                row.snr_db = snr;
                if (cfg.scenario == "fig4-desk") {
                    row.sweep = "d";
                    row.x = sizes[di];
                } else {
                    row.sweep = "n_d";
                    row.x = nd;
                }
                row.lscsi_db = sum / used;
                row.extra = scene.count() - used;
                row.wall_s = cfg.record_wall_time ? elapsed(t0) : 0.0;
                out.rows.push_back(row);
            }
        }
    }
    return out;
}

TrialOutput run_estimation(const ExperimentConfig& cfg, int trial)
{
    TrialOutput out;
    const SystemConfig& sys = cfg.system;
    const std::vector<double> spreads =
        cfg.delay_spread_sweep.empty() ? std::vector<double>{cfg.scene.delay_spread} : cfg.delay_spread_sweep;
    const bool needs_db = std::any_of(cfg.estimators.begin(), cfg.estimators.end(),
                                      [](const std::string& e) { return e == "sa_bce" || e == "sa_wbce"; });
    for (std::size_t si = 0; si < spreads.size(); ++si) {
        SceneParams sp = cfg.scene;
        sp.delay_spread = spreads[si];
        sp.delta_f = sys.delta_f;
        const GridScene scene = generate_scene(sp, derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), 0));

        for (std::size_t pi = 0; pi < cfg.snr_ce_db.size(); ++pi) {
            const double snr = cfg.snr_ce_db[pi];
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), 1000 + si * 100 + pi));
            const EstimationDraw draw = draw_estimation_case(scene, sys, snr, rng);

            std::vector<ScsiCorrelations> db_scsi;
            std::vector<ScsiCorrelations> ideal_scsi;
            if (needs_db) {
                VstdConfig vc = cfg.vstd;
                vc.m_v = sys.m_v;
                vc.m_h = sys.m_h;
                vc.delta_f = sys.delta_f;
                vc.noise_var = noise_for_snr(cfg.snr_sc_db);
                const std::uint64_t db_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), 1 + si);
                ScsiDatabase db(scene.geometry);
                for (const Point& q : draw.locations) {
                    const int g = grid_of_location(q, scene.geometry);
                    if (!db.contains(g)) {
                        db.insert(build_grid_record(scene, g, vc, derive_seed(db_seed, g)).record);
                    }
                }
                for (const Point& q : draw.locations) {
                    db_scsi.push_back(correlations_for_user(db, q, sys));
                }
            }
            for (const auto& ps : draw.truth_paths) {
                PathSet stat = ps;
                stat.gains.clear();
                ideal_scsi.push_back(build_correlations(stat, sys));
            }

            auto emit = [&](const std::string& name, const std::string& band, const std::vector<CMat>& est,
                            std::chrono::steady_clock::time_point t0, double x) {
                MetricsRow row = base_row(cfg, trial);
                row.estimator = name;
                row.band = band;
                row.snr_db = snr;
                row.nmse_db = nmse(est, draw.channels).db;
                row.wall_s = cfg.record_wall_time ? elapsed(t0) : 0.0;
                if (cfg.scenario == "fig8-desk") {
                    row.sweep = "delay_spread";
                    row.x = spreads[si];
                } else if (cfg.scenario == "fig7-desk") {
                    row.sweep = "band";
                    row.x = x;
                } else {
                    row.sweep = "snr_ce";
                    row.x = snr;
                }
                out.rows.push_back(row);
            };

            for (const auto& name : cfg.estimators) {
                if (name == "trivial") {
                    const auto t0 = std::chrono::steady_clock::now();
                    emit(name, "", trivial_estimate(draw.grid, draw.allocations, sys), t0, 0.0);
                } else if (name == "sa_bce" || name == "sa_bce_ideal") {
                    const auto t0 = std::chrono::steady_clock::now();
                    const auto& scsi = name == "sa_bce" ? db_scsi : ideal_scsi;
                    emit(name, "full",
                         sa_bce(draw.grid, draw.allocations, scsi, draw.noise_var, sys, cfg.estimator_options), t0,
                         0.0);
                } else {
                    const auto& scsi = name == "sa_wbce" ? db_scsi : ideal_scsi;
                    for (WindowKind wk : cfg.windows) {
                        const WindowPair win = make_window(wk, sys.n_pilot(), sys.m_v, sys.m_h, sys.kaiser_shape);
                        for (std::size_t bi = 0; bi < cfg.bands.size(); ++bi) {
                            const auto t0 = std::chrono::steady_clock::now();
                            BandSpec band = cfg.bands[bi].resolve(sys);
                            band.periodic = cfg.band_periodic;
                            emit(name + "_" + to_string(wk), cfg.bands[bi].label(),
                                 sa_wbce(draw.grid, draw.allocations, scsi, draw.noise_var, win, band, sys,
                                         cfg.estimator_options, &out.stats),
                                 t0, static_cast<double>(bi));
                        }
                    }
                }
            }
        }
    }
    return out;
}

double metric_of(const MetricsRow& r, const std::string& metric)
{
    if (metric == "nmse_db") {
        return r.nmse_db;
    }
    if (metric == "lscsi_db") {
        return r.lscsi_db;
    }
    return r.extra;
}

} // namespace

// ---------------------------------------------------------------------------
// Configuration

BandSpec BandChoice::resolve(const SystemConfig& cfg) const
{
    const BandSpec full = BandSpec::full(cfg);
    BandSpec b;
    b.b_tau = b_tau < 0 ? full.b_tau : std::min<Index>(b_tau, full.b_tau);
    b.b_a = b_a < 0 ? full.b_a : std::min<Index>(b_a, full.b_a);
    return b;
}

std::string BandChoice::label() const
{
    auto side = [](int v) { return v < 0 ? std::string("full") : std::to_string(v); };
    return side(b_tau) + ":" + side(b_a);
}

double noise_for_snr(double snr_db)
{
    return std::pow(10.0, -snr_db / 10.0);
}

void ExperimentConfig::validate() const
{
    static const std::set<std::string> names = [] {
        std::set<std::string> s;
        for (const auto& [n, d] : scenario_catalog()) {
            s.insert(n);
        }
        return s;
    }();
    if (names.count(scenario) == 0) {
        throw ConfigError("unknown scenario '" + scenario + "'");
    }
    system.validate();
    scene.validate();
    vstd.validate();
    if (trials < 1) {
        throw ConfigError("trials must be >= 1");
    }
    if (snr_ce_db.empty() || windows.empty() || bands.empty()) {
        throw ConfigError("sweeps must be non-empty");
    }
    for (const auto& e : estimators) {
        if (kEstimators.count(e) == 0) {
            throw ConfigError("unknown estimator '" + e + "'");
        }
    }
    if (kind_of(scenario) == Kind::estimation && estimators.empty()) {
        throw ConfigError("estimation scenarios need at least one estimator");
    }
    for (int nd : n_d_sweep) {
        if (nd < 2) {
            throw ConfigError("sweep.n_d entries must be >= 2");
        }
    }
    for (double d : grid_size_sweep) {
        if (!(d > 0.0)) {
            throw ConfigError("sweep.grid_size entries must be positive");
        }
    }
    for (double s : delay_spread_sweep) {
        if (!(s >= 0.0)) {
            throw ConfigError("sweep.delay_spread entries must be non-negative");
        }
    }
    if (!(lscsi_noise > 0.0)) {
        throw ConfigError("lscsi.noise must be positive");
    }
    if (instance_paths < 1) {
        throw ConfigError("instance.paths must be >= 1");
    }
}

const std::vector<std::pair<std::string, std::string>>& scenario_catalog()
{
    static const std::vector<std::pair<std::string, std::string>> cat{
        {"lemma1", "antenna-frequency SA-BCE vs beam-delay form, max relative gap"},
        {"window-identity", "full-band Kaiser SA-WBCE vs SA-BCE, max relative gap"},
        {"vstd-noiseless", "noiseless VSTD parameter recovery, max relative error"},
        {"mdl", "MDL path count at SNR_SC 20 dB"},
        {"fig3-desk", "L_SCSI vs N_d at SNR_SC in {0, 10} dB"},
        {"fig4-desk", "L_SCSI vs grid size d"},
        {"fig5-desk", "NMSE vs SNR_CE for trivial, SA-BCE and SA-WBCE"},
        {"fig7-desk", "SA-WBCE NMSE vs band size and window"},
        {"fig8-desk", "NMSE vs delay spread at SNR_CE 20 dB"},
    };
    return cat;
}

ExperimentConfig scenario_defaults(const std::string& name)
{
    ExperimentConfig c;
    c.scenario = name;
    c.vstd.m_v = c.system.m_v;
    c.vstd.m_h = c.system.m_h;
    if (name == "lemma1" || name == "window-identity") {
        c.trials = 20;
        c.snr_ce_db = {10.0};
    } else if (name == "vstd-noiseless" || name == "mdl") {
        c.trials = 100;
        c.vstd.n_d = 32;
        c.vstd.m_v = 4;
        c.vstd.m_h = 8;
        c.vstd.snapshots = 10;
        c.scene.delay_spread = 3e-6;
        c.scene.separation = {32, 4, 8};
        c.snr_sc_db = 20.0;
    } else if (name == "fig3-desk") {
        c.trials = 50;
        c.n_d_sweep = {16, 32, 64, 128};
        c.snr_sc_sweep = {0.0, 10.0};
    } else if (name == "fig4-desk") {
        c.trials = 20;
        c.grid_size_sweep = {2.0, 8.0, 32.0};
        c.snr_sc_db = 10.0;
    } else if (name == "fig5-desk") {
        c.trials = 100;
        c.snr_ce_db = {0.0, 5.0, 10.0, 15.0, 20.0};
        c.estimators = {"trivial", "sa_bce", "sa_bce_ideal", "sa_wbce"};
    } else if (name == "fig7-desk") {
        c.trials = 50;
        c.snr_ce_db = {20.0};
        c.estimators = {"sa_wbce"};
        c.windows = {WindowKind::rectangular, WindowKind::hann, WindowKind::kaiser};
        c.bands = {BandChoice{4, 4}, BandChoice{8, 8}, BandChoice{15, 20}, BandChoice{}};
    } else if (name == "fig8-desk") {
        c.trials = 100;
        c.snr_ce_db = {20.0};
        c.delay_spread_sweep = {100e-9, 200e-9, 300e-9, 500e-9};
        c.estimators = {"trivial", "sa_bce", "sa_wbce"};
    }
    return c;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& v)
{
    if (key == "scenario") {
        if (v != c.scenario) {
            throw ConfigError("scenario must be the first setting");
        }
    } else if (key == "trials") {
        c.trials = to_int(key, v);
    } else if (key == "seed") {
        const int s = to_int(key, v);
        if (s < 0) {
            throw ConfigError("seed must be non-negative");
        }
        c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "out") {
        c.out_dir = v;
    } else if (key == "record_wall_time") {
        c.record_wall_time = to_bool(key, v);
    } else if (key == "paper_scale") {
        if (to_bool(key, v)) {
            c.system = SystemConfig::paper_scale();
            if (kind_of(c.scenario) != Kind::vstd_recovery) {
                c.vstd.m_v = c.system.m_v;
                c.vstd.m_h = c.system.m_h;
            }
        }
    } else if (key == "system.n_c") {
        c.system.n_c = to_int(key, v);
    } else if (key == "system.delta_f") {
        c.system.delta_f = to_double(key, v);
        c.vstd.delta_f = c.system.delta_f;
    } else if (key == "system.m_v") {
        c.system.m_v = to_int(key, v);
    } else if (key == "system.m_h") {
        c.system.m_h = to_int(key, v);
    } else if (key == "system.k_users") {
        c.system.k_users = to_int(key, v);
    } else if (key == "system.kaiser_shape") {
        c.system.kaiser_shape = to_double(key, v);
    } else if (key == "scene.grid_size") {
        c.scene.grid_size = to_double(key, v);
    } else if (key == "scene.grids") {
        c.scene.grids = to_int(key, v);
    } else if (key == "scene.paths") {
        c.scene.paths = to_int(key, v);
    } else if (key == "scene.delay_spread") {
        c.scene.delay_spread = to_double(key, v);
    } else if (key == "scene.corr_length") {
        c.scene.corr_length = to_double(key, v);
    } else if (key == "scene.variation") {
        c.scene.variation = to_double(key, v);
    } else if (key == "scene.subpaths") {
        c.scene.subpaths = to_int(key, v);
    } else if (key == "scene.cluster_delay_spread") {
        c.scene.cluster_delay_spread = to_double(key, v);
    } else if (key == "scene.cluster_angle_spread") {
        c.scene.cluster_angle_spread = to_double(key, v);
    } else if (key == "scene.power_range_db") {
        c.scene.power_range_db = to_double(key, v);
    } else if (key == "scene.separation") {
        const auto s = to_ints(key, v);
        if (s.size() != 3) {
            throw ConfigError("scene.separation needs three entries: delay, vertical, horizontal");
        }
        c.scene.separation = {s[0], s[1], s[2]};
    } else if (key == "vstd.n_d") {
        c.vstd.n_d = to_int(key, v);
    } else if (key == "vstd.snapshots") {
        c.vstd.snapshots = to_int(key, v);
    } else if (key == "vstd.m_v") {
        c.vstd.m_v = to_int(key, v);
    } else if (key == "vstd.m_h") {
        c.vstd.m_h = to_int(key, v);
    } else if (key == "vstd.row_cap") {
        c.vstd.row_cap = to_int(key, v);
    } else if (key == "vstd.fixed_rank") {
        c.vstd.fixed_rank = to_int(key, v);
    } else if (key == "vstd.max_rank") {
        c.vstd.max_rank = to_int(key, v);
    } else if (key == "vstd.smoothing") {
        const auto k = to_ints(key, v);
        if (k.size() != 3) {
            throw ConfigError("vstd.smoothing needs three entries: K1, K2, K3");
        }
        c.vstd.smoothing = SmoothingParams::from_k(k[0], k[1], k[2], c.vstd.n_d, c.vstd.m_v, c.vstd.m_h);
    } else if (key == "vstd.evd") {
        c.vstd.evd = parse_evd_mode(v);
    } else if (key == "vstd.gains") {
        c.vstd.gains = parse_gain_model(v);
    } else if (key == "vstd.snr_db") {
        c.snr_sc_db = to_double(key, v);
    } else if (key == "estimate.snr_db") {
        c.snr_ce_db = to_doubles(key, v);
    } else if (key == "estimate.estimators") {
        c.estimators = split_list(v);
    } else if (key == "estimate.windows") {
        c.windows.clear();
        for (const auto& s : split_list(v)) {
            c.windows.push_back(parse_window_kind(s));
        }
    } else if (key == "estimate.bands") {
        c.bands.clear();
        for (const auto& s : split_list(v)) {
            c.bands.push_back(parse_band(key, s));
        }
    } else if (key == "estimate.band_wrap") {
        if (v != "linear" && v != "periodic") {
            throw ConfigError("estimate.band_wrap must be linear or periodic");
        }
        c.band_periodic = v == "periodic";
    } else if (key == "estimate.freq_noise") {
        if (v == "post_average") {
            c.estimator_options.freq_noise = FreqNoise::post_average;
        } else if (v == "raw") {
            c.estimator_options.freq_noise = FreqNoise::raw;
        } else {
            throw ConfigError("estimate.freq_noise must be post_average or raw");
        }
    } else if (key == "estimate.antenna_noise") {
        if (v == "plain") {
            c.estimator_options.antenna_noise = AntennaNoise::plain;
        } else if (v == "propagated") {
            c.estimator_options.antenna_noise = AntennaNoise::propagated;
        } else {
            throw ConfigError("estimate.antenna_noise must be plain or propagated");
        }
    } else if (key == "sweep.n_d") {
        c.n_d_sweep = to_ints(key, v);
    } else if (key == "sweep.snr_sc_db") {
        c.snr_sc_sweep = to_doubles(key, v);
    } else if (key == "sweep.grid_size") {
        c.grid_size_sweep = to_doubles(key, v);
    } else if (key == "sweep.delay_spread") {
        c.delay_spread_sweep = to_doubles(key, v);
    } else if (key == "lscsi.noise") {
        c.lscsi_noise = to_double(key, v);
    } else if (key == "instance.paths") {
        c.instance_paths = to_int(key, v);
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

ExperimentConfig parse_config(std::istream& is, bool require_scenario)
{
    std::vector<std::pair<std::string, std::string>> settings;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        }
        for (const auto& [k, _] : settings) {
            if (k == key) {
                throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            }
        }
        settings.emplace_back(key, value);
    }
    auto it = std::find_if(settings.begin(), settings.end(), [](const auto& kv) { return kv.first == "scenario"; });
    if (it == settings.end() && require_scenario) {
        throw ConfigError("config has no 'scenario' key");
    }
    ExperimentConfig cfg = it == settings.end() ? ExperimentConfig{} : scenario_defaults(it->second);
    if (it != settings.end()) {
        std::rotate(settings.begin(), it, it + 1);
    }
    for (const auto& [k, v] : settings) {
        if (k == "paper_scale") {
            apply_setting(cfg, k, v);
        }
    }
    for (const auto& [k, v] : settings) {
        if (k != "paper_scale") {
            apply_setting(cfg, k, v);
        }
    }
    if (cfg.scenario.empty()) {
        cfg.system.validate();
        cfg.scene.validate();
        cfg.vstd.validate();
    } else {
        cfg.validate();
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path, bool require_scenario)
{
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse_config(f, require_scenario);
}

// ---------------------------------------------------------------------------
// Execution

EstimationDraw draw_estimation_case(const GridScene& scene, const SystemConfig& cfg, double snr_db, Rng& rng)
{
    EstimationDraw d;
    d.allocations = assign_allocations(cfg);
    d.noise_var = noise_for_snr(snr_db);
    const auto& geom = scene.geometry;
    std::vector<std::vector<CMat>> per_symbol;
    for (int k = 0; k < cfg.k_users; ++k) {
        const Point q{geom.origin_x + rng.uniform(0.0, geom.width()), geom.origin_y + rng.uniform(0.0, geom.height())};
        PathSet ps = scene.paths_at(q);
        ps.gains = draw_gains(ps, rng);
        const CMat h = synth_channel(ps, cfg.n_c, cfg);
        d.locations.push_back(q);
        d.truth_paths.push_back(std::move(ps));
        d.channels.push_back(h);
        per_symbol.emplace_back(static_cast<std::size_t>(cfg.t_p), h);
    }
    const auto pilots = make_pilot_sequences(cfg, rng);
    d.grid = synth_received(per_symbol, d.allocations, pilots, d.noise_var, cfg, rng);
    return d;
}

std::string primary_metric(const std::string& scenario)
{
    switch (kind_of(scenario)) {
    case Kind::scsi_accuracy:
        return "lscsi_db";
    case Kind::estimation:
        return "nmse_db";
    default:
        return "extra";
    }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const Kind kind = kind_of(cfg.scenario);
    std::vector<TrialOutput> outputs(static_cast<std::size_t>(cfg.trials));
    std::vector<std::string> errors(static_cast<std::size_t>(cfg.trials));
    parallel_for(cfg.trials, [&](std::ptrdiff_t t) {
        const int trial = static_cast<int>(t);
        try {
            switch (kind) {
            case Kind::equivalence:
                outputs[static_cast<std::size_t>(t)] = run_equivalence(cfg, trial);
                break;
            case Kind::vstd_recovery:
                outputs[static_cast<std::size_t>(t)] = run_vstd_recovery(cfg, trial);
                break;
            case Kind::scsi_accuracy:
                outputs[static_cast<std::size_t>(t)] = run_scsi_accuracy(cfg, trial);
                break;
            case Kind::estimation:
                outputs[static_cast<std::size_t>(t)] = run_estimation(cfg, trial);
                break;
            }
        } catch (const NumericalError& e) {
            errors[static_cast<std::size_t>(t)] = e.what();
            outputs[static_cast<std::size_t>(t)] = {};
        }
    });

    ExperimentResult res;
    res.scenario = cfg.scenario;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        if (!errors[t].empty()) {
            ++res.failed_trials;
            res.failure_messages.push_back("trial " + std::to_string(t) + ": " + errors[t]);
            continue;
        }
        for (auto& r : outputs[t].rows) {
            res.rows.push_back(std::move(r));
        }
        res.stats.merge(outputs[t].stats);
    }
    res.summary = summarize(res.rows, primary_metric(cfg.scenario));
    return res;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows, const std::string& metric)
{
    using Key = std::tuple<std::string, double, double, int, double, std::string>;
    std::vector<Key> order;
    std::map<Key, std::vector<double>> values;
    std::map<Key, const MetricsRow*> first;
    for (const auto& r : rows) {
        const Key k{r.estimator, r.x, r.snr_db, r.n_d, r.d, r.band};
        if (values.count(k) == 0) {
            order.push_back(k);
            first[k] = &r;
        }
        values[k].push_back(metric_of(r, metric));
    }
    std::vector<SummaryRow> out;
    for (const auto& k : order) {
        auto v = values[k];
        const MetricsRow& r = *first[k];
        SummaryRow s;
        s.estimator = r.estimator;
        s.sweep = r.sweep;
        s.x = r.x;
        s.snr_db = r.snr_db;
        s.n_d = r.n_d;
        s.d = r.d;
        s.band = r.band;
        s.metric = metric;
        s.count = static_cast<int>(v.size());
        s.mean = std::accumulate(v.begin(), v.end(), 0.0) / s.count;
        if (s.count > 1) {
            double ss = 0.0;
            for (double x : v) {
                ss += (x - s.mean) * (x - s.mean);
            }
            s.stderr_ = std::sqrt(ss / (s.count - 1) / s.count);
        }
        std::sort(v.begin(), v.end());
        const std::size_t h = v.size() / 2;
        s.median = v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
        out.push_back(s);
    }
    return out;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& os)
{
    os << std::setprecision(17);
    os << "#metrics v1\n";
    os << "scenario,estimator,sweep,x,snr_db,n_d,d,band,trial,nmse_db,lscsi_db,extra,wall_s\n";
    for (const auto& r : rows) {
        os << r.scenario << ',' << r.estimator << ',' << r.sweep << ',' << r.x << ',' << r.snr_db << ',' << r.n_d
           << ',' << r.d << ',' << r.band << ',' << r.trial << ',' << r.nmse_db << ',' << r.lscsi_db << ','
           << r.extra << ',' << r.wall_s << '\n';
    }
}

void write_summary_csv(const ExperimentResult& res, std::ostream& os)
{
    os << std::setprecision(17);
    os << "#summary v1, scenario=" << res.scenario << ", failed_trials=" << res.failed_trials
       << ", dense_fallbacks=" << res.stats.dense_fallbacks << "\n";
    os << "estimator,sweep,x,snr_db,n_d,d,band,metric,count,mean,stderr,median\n";
    for (const auto& s : res.summary) {
        os << s.estimator << ',' << s.sweep << ',' << s.x << ',' << s.snr_db << ',' << s.n_d << ',' << s.d << ','
           << s.band << ',' << s.metric << ',' << s.count << ',' << s.mean << ',' << s.stderr_ << ',' << s.median
           << '\n';
    }
}

void write_plotdata_csv(const ExperimentResult& res, std::ostream& os)
{
    std::set<double> snrs;
    std::set<int> nds;
    std::set<std::string> bands;
    std::string sweep;
    for (const auto& s : res.summary) {
        snrs.insert(s.snr_db);
        nds.insert(s.n_d);
        bands.insert(s.band);
        sweep = s.sweep;
    }
    os << std::setprecision(17);
    os << "#plotdata v1, scenario=" << res.scenario << ", x=" << sweep << "\n";
    os << "x,series,y,stderr\n";
    for (const auto& s : res.summary) {
        std::string series = s.estimator;
        if (snrs.size() > 1 && sweep != "snr_ce") {
            series += " snr=" + fmt(s.snr_db);
        }
        if (nds.size() > 1 && sweep != "n_d") {
            series += " n_d=" + std::to_string(s.n_d);
        }
        if (bands.size() > 1 && sweep != "band") {
            series += " band=" + s.band;
        }
        os << s.x << ',' << series << ',' << s.mean << ',' << s.stderr_ << '\n';
    }
}

void write_outputs(const ExperimentResult& res, const std::string& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    }
    auto open = [&](const std::string& name) {
        std::ofstream f(fs::path(dir) / name);
        if (!f) {
            throw ConfigError("cannot write '" + (fs::path(dir) / name).string() + "'");
        }
        return f;
    };
    std::string fig = res.scenario;
    const auto dash = fig.find("-desk");
    if (dash != std::string::npos) {
        fig = fig.substr(0, dash);
    }
    {
        auto f = open("metrics.csv");
        write_metrics_csv(res.rows, f);
    }
    {
        auto f = open("summary.csv");
        write_summary_csv(res, f);
    }
    {
        auto f = open("plotdata_" + fig + ".csv");
        write_plotdata_csv(res, f);
    }
}

} // namespace scsice
