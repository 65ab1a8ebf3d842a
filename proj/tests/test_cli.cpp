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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "../tools/cli.hpp"

namespace fs = std::filesystem;

namespace
{

struct Run
{
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "scsice-cli");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    Run r;
    r.code = scsice::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "scsice_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

double last_field(const std::string& line)
{
    return std::stod(line.substr(line.rfind(',') + 1));
}

} // namespace

TEST_CASE("cli exit codes", "[cli]")
{
    CHECK(cli({}).code == scsice::kExitConfig);
    const auto unknown = cli({"scene", "gen", "--bogus"});
    CHECK(unknown.code == scsice::kExitConfig);
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CHECK(cli({"--help"}).code == scsice::kExitOk);
    CHECK(cli({"experiment", "run", "/nonexistent/missing.cfg"}).code == scsice::kExitConfig);
    CHECK(cli({"--set", "no.such.key=1", "scene", "gen"}).code == scsice::kExitConfig);
    const auto list = cli({"experiment", "list"});
    CHECK(list.code == scsice::kExitOk);
    CHECK(list.out.find("fig5-desk") != std::string::npos);
}

TEST_CASE("scene gen is deterministic", "[cli]")
{
    const auto dir = scratch("scene");
    const auto a = dir / "a.csv";
    const auto b = dir / "b.csv";
    const auto c = dir / "c.csv";
    REQUIRE(cli({"--seed", "4", "--out", a.string(), "scene", "gen"}).code == 0);
    REQUIRE(cli({"--seed", "4", "--out", b.string(), "scene", "gen"}).code == 0);
    REQUIRE(cli({"--seed", "5", "--out", c.string(), "scene", "gen"}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));
}

TEST_CASE("noiseless db build reproduces the scene", "[cli]")
{
    const auto dir = scratch("db");
    const auto scene = dir / "scene.csv";
    const auto db = dir / "db.csv";
    const std::vector<std::string> common{"--set", "scene.grids=4", "--set", "vstd.gains=phase"};
    auto args = common;
    args.insert(args.end(), {"--out", scene.string(), "scene", "gen"});
    REQUIRE(cli(args).code == 0);
    args = common;
    args.insert(args.end(), {"--out", db.string(), "db", "build", "--scene", scene.string(), "--noiseless",
                             "--no-timestamp"});
    const auto built = cli(args);
    REQUIRE(built.code == 0);
    CHECK(fs::exists(dir / "db.csv.diag.csv"));

    const auto inspect = cli({"db", "inspect", "2", "--db", db.string()});
    CHECK(inspect.code == 0);
    CHECK_FALSE(inspect.out.empty());
    CHECK(cli({"db", "inspect", "99", "--db", db.string()}).code == scsice::kExitConfig);

    const auto diff = cli({"db", "diff", scene.string(), "--db", db.string()});
    REQUIRE(diff.code == 0);
    CHECK(diff.out.rfind("#dbdiff v1", 0) == 0);
    std::istringstream is(diff.out);
    std::string line, max_line;
    while (std::getline(is, line)) {
        if (line.rfind("max,", 0) == 0) {
            max_line = line;
        }
    }
    REQUIRE_FALSE(max_line.empty());
    std::vector<double> fields;
    std::stringstream ms(max_line.substr(4));
    std::string f;
    while (std::getline(ms, f, ',')) {
        fields.push_back(std::stod(f));
    }
    REQUIRE(fields.size() == 5);
    CHECK(fields[0] < 1e-12);
    CHECK(fields[1] < 1e-6);
    CHECK(fields[2] < 1e-6);
    CHECK(fields[3] < 1e-6);
    CHECK(fields[4] == 0.0);

    const auto est = cli({"--seed", "3", "estimate", "--scene", scene.string(), "--db", db.string(),
                          "--estimators", "trivial,sa_bce"});
    REQUIRE(est.code == 0);
    CHECK(est.out.rfind("#estimate v1", 0) == 0);
    std::istringstream es(est.out);
    double trivial = 0.0, bce = 0.0;
    while (std::getline(es, line)) {
        if (line.rfind("trivial,", 0) == 0) {
            trivial = last_field(line);
        } else if (line.rfind("sa_bce,", 0) == 0) {
            bce = last_field(line);
        }
    }
    CHECK(bce < trivial);
}

TEST_CASE("experiment run writes versioned CSVs", "[cli]")
{
    const auto dir = scratch("exp");
    const auto cfg = dir / "run.cfg";
    {
        std::ofstream os(cfg);
        os << "scenario = lemma1\ntrials = 2\n";
    }
    const auto r = cli({"--out", (dir / "out").string(), "experiment", "run", cfg.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "out" / "metrics.csv").rfind("#metrics v1", 0) == 0);
    CHECK(fs::exists(dir / "out" / "summary.csv"));

    const auto bad = dir / "bad.cfg";
    {
        std::ofstream os(bad);
        os << "scenario = lemma1\ntrials = 2\ntrials = 3\n";
    }
    CHECK(cli({"experiment", "run", bad.string()}).code == scsice::kExitConfig);
}
