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

#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "scsice/experiment.hpp"

using namespace scsice;

namespace
{

ExperimentConfig parse(const std::string& text, bool require_scenario = true)
{
    std::istringstream is(text);
    return parse_config(is, require_scenario);
}

std::string metrics_text(const ExperimentResult& r)
{
    std::ostringstream os;
    write_metrics_csv(r.rows, os);
    return os.str();
}

std::string summary_text(const ExperimentResult& r)
{
    std::ostringstream os;
    write_summary_csv(r, os);
    return os.str();
}

} // namespace

TEST_CASE("config grammar", "[experiment]")
{
    SECTION("scenario defaults and overrides")
    {
        const auto c = parse("# comment\nscenario = fig5-desk\ntrials = 3   # inline\nseed=42\n");
        CHECK(c.scenario == "fig5-desk");
        CHECK(c.trials == 3);
        CHECK(c.seed == 42);
    }
    SECTION("order does not matter for the scenario key")
    {
        const auto c = parse("trials = 2\nscenario = mdl\n");
        CHECK(c.trials == 2);
        CHECK(c.vstd.n_d == 32);
    }
    SECTION("errors")
    {
        CHECK_THROWS_AS(parse("trials = 3\n"), ConfigError);
        CHECK_THROWS_AS(parse("scenario = fig5-desk\ntrials = 3\ntrials = 4\n"), ConfigError);
        CHECK_THROWS_AS(parse("scenario = fig5-desk\nno_such_key = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse("scenario = fig5-desk\ntrials\n"), ConfigError);
        CHECK_THROWS_AS(parse("scenario = fig5-desk\ntrials =\n"), ConfigError);
        CHECK_THROWS_AS(parse("scenario = no-such-scenario\n"), ConfigError);
        CHECK_THROWS_AS(parse("scenario = fig5-desk\ntrials = abc\n"), ConfigError);
        CHECK_THROWS_AS(parse("scenario = fig5-desk\ntrials = 0\n"), ConfigError);
    }
    SECTION("scenario-free settings")
    {
        const auto c = parse("vstd.n_d = 16\nvstd.gains = phase\n", false);
        CHECK(c.scenario.empty());
        CHECK(c.vstd.n_d == 16);
        CHECK(c.vstd.gains == GainModel::phase);
        CHECK_THROWS_AS(parse("vstd.gains = rice\n", false), ConfigError);
    }
    SECTION("apply_setting")
    {
        ExperimentConfig c = scenario_defaults("fig7-desk");
        apply_setting(c, "estimate.band_wrap", "periodic");
        CHECK(c.band_periodic);
        CHECK_THROWS_AS(apply_setting(c, "vstd.smoothing", "4,2"), ConfigError);
    }
}

TEST_CASE("scenario catalog", "[experiment]")
{
    const auto& cat = scenario_catalog();
    REQUIRE(cat.size() >= 8);
    for (const auto& [name, desc] : cat) {
        CHECK_FALSE(desc.empty());
        const auto c = scenario_defaults(name);
        CHECK_NOTHROW(c.validate());
        CHECK_FALSE(primary_metric(name).empty());
    }
}

TEST_CASE("runs are deterministic given the seed", "[experiment]")
{
    for (const std::string name : {"fig5-desk", "fig3-desk", "vstd-noiseless"}) {
        ExperimentConfig c = scenario_defaults(name);
        c.trials = 1;
        c.seed = 9;
        if (name == "fig3-desk") {
            c.n_d_sweep = {16};
            c.snr_sc_sweep = {10.0};
            c.scene.grids = 4;
        }
        const auto a = run_experiment(c);
        const auto b = run_experiment(c);
        CHECK(a.failed_trials == 0);
        CHECK_FALSE(a.rows.empty());
        CHECK(metrics_text(a) == metrics_text(b));
        CHECK(summary_text(a) == summary_text(b));
        c.seed = 10;
        CHECK(metrics_text(run_experiment(c)) != metrics_text(a));
    }
}

TEST_CASE("lemma1 equivalence gap", "[experiment]")
{
    ExperimentConfig c = scenario_defaults("lemma1");
    c.trials = 3;
    const auto r = run_experiment(c);
    REQUIRE_FALSE(r.rows.empty());
    for (const auto& row : r.rows) {
        CHECK(row.extra < 1e-9);
    }
}

TEST_CASE("fig5 small run ranks sa_bce above trivial", "[experiment]")
{
    ExperimentConfig c = scenario_defaults("fig5-desk");
    c.trials = 3;
    c.snr_ce_db = {10.0, 20.0};
    const auto r = run_experiment(c);
    REQUIRE(r.failed_trials == 0);
    const auto sum = summarize(r.rows, "nmse_db");
    for (double snr : c.snr_ce_db) {
        double trivial = 0.0, bce = 0.0;
        for (const auto& s : sum) {
            if (s.snr_db == snr && s.estimator == "trivial") {
                trivial = s.mean;
            }
            if (s.snr_db == snr && s.estimator == "sa_bce") {
                bce = s.mean;
            }
        }
        CHECK(bce < trivial);
    }
}

TEST_CASE("summarize statistics", "[experiment]")
{
    std::vector<MetricsRow> rows;
    for (int t = 0; t < 4; ++t) {
        MetricsRow r;
        r.estimator = "e";
        r.sweep = "snr";
        r.x = 1.0;
        r.trial = t;
        r.nmse_db = static_cast<double>(t);
        rows.push_back(r);
    }
    const auto s = summarize(rows, "nmse_db");
    REQUIRE(s.size() == 1);
    CHECK(s[0].count == 4);
    CHECK(s[0].mean == Catch::Approx(1.5));
    CHECK(s[0].median == Catch::Approx(1.5));
    CHECK(s[0].stderr_ == Catch::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("metrics CSV header", "[experiment]")
{
    std::ostringstream os;
    write_metrics_csv({}, os);
    CHECK(os.str().rfind("#metrics v1\nscenario,estimator,", 0) == 0);
}
