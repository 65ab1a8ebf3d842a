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

#ifndef SCSICE_EXPERIMENT_HPP
#define SCSICE_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "scsice/channel_scene.hpp"
#include "scsice/estimators.hpp"
#include "scsice/vstd.hpp"
#include "scsice/windows.hpp"

namespace scsice
{

/// A band choice; negative values mean "full" (dimension - 1) and values
/// above the dimension are clipped to it.
struct BandChoice
{
    int b_tau = -1;
    int b_a = -1;

    BandSpec resolve(const SystemConfig& cfg) const;
    std::string label() const;
};

struct ExperimentConfig
{
    std::string scenario;
    SystemConfig system = SystemConfig::desk();
    SceneParams scene;
    VstdConfig vstd;
    double snr_sc_db = 10.0;
    std::vector<double> snr_ce_db{20.0};
    std::vector<std::string> estimators;
    std::vector<WindowKind> windows{WindowKind::kaiser};
    std::vector<BandChoice> bands{BandChoice{15, 20}};
    bool band_periodic = false;
    std::vector<int> n_d_sweep;
    std::vector<double> snr_sc_sweep;
    std::vector<double> grid_size_sweep;
    std::vector<double> delay_spread_sweep;
    EstimatorOptions estimator_options{FreqNoise::post_average, AntennaNoise::propagated};
    double lscsi_noise = 1e-3;
    int instance_paths = 4;
    int trials = 10;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool record_wall_time = false;

    void validate() const;
};

/// Names of the built-in scenarios with one-line descriptions.
const std::vector<std::pair<std::string, std::string>>& scenario_catalog();

/// Defaults of a scenario before config overrides.
ExperimentConfig scenario_defaults(const std::string& name);

/// Parses the key = value grammar described in docs/config.md. The
/// `scenario` key selects the defaults the other keys override; without it
/// the plain ExperimentConfig defaults are used unless `require_scenario`.
ExperimentConfig parse_config(std::istream& is, bool require_scenario = true);
ExperimentConfig load_config(const std::string& path, bool require_scenario = true);

/// Applies one key = value override.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct MetricsRow
{
    std::string scenario;
    std::string estimator;
    std::string sweep; // name of the swept quantity
    double x = 0.0;    // its value
    double snr_db = 0.0;
    int n_d = 0;
    double d = 0.0;
    std::string band;
    int trial = 0;
    double nmse_db = 0.0;
    double lscsi_db = 0.0;
    double extra = 0.0;
    double wall_s = 0.0;
};

struct SummaryRow
{
    std::string estimator;
    std::string sweep;
    double x = 0.0;
    double snr_db = 0.0;
    int n_d = 0;
    double d = 0.0;
    std::string band;
    std::string metric;
    int count = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    double median = 0.0;
};

struct ExperimentResult
{
    std::string scenario;
    std::vector<MetricsRow> rows;
    std::vector<SummaryRow> summary;
    int failed_trials = 0;
    std::vector<std::string> failure_messages;
    RunStats stats;
};

/// Name of the per-row value a scenario is judged on: nmse_db, lscsi_db
/// or extra.
std::string primary_metric(const std::string& scenario);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows, const std::string& metric);

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& os);
void write_summary_csv(const ExperimentResult& res, std::ostream& os);
void write_plotdata_csv(const ExperimentResult& res, std::ostream& os);

/// Writes metrics.csv, summary.csv and plotdata_<fig>.csv into `dir`.
void write_outputs(const ExperimentResult& res, const std::string& dir);

/// One channel-estimation draw on a scene: users dropped uniformly over
/// the coverage area, exact channels and received pilots.
struct EstimationDraw
{
    std::vector<Point> locations;
    std::vector<PathSet> truth_paths;
    std::vector<CMat> channels;
    std::vector<DmrsAllocation> allocations;
    PilotGrid grid;
    double noise_var = 0.0;
};

EstimationDraw draw_estimation_case(const GridScene& scene, const SystemConfig& cfg, double snr_db, Rng& rng);

/// Noise variance for a per-entry SNR with unit total path power.
double noise_for_snr(double snr_db);

} // namespace scsice

#endif // SCSICE_EXPERIMENT_HPP
