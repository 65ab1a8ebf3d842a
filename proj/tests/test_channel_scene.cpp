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

#include <cmath>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "scsice/channel_scene.hpp"
#include "scsice/reference.hpp"
#include "test_util.hpp"

using namespace scsice;
using Catch::Approx;

TEST_CASE("steering_delay zero delay is all ones", "[scene]")
{
    const CVec b = steering_delay(0.0, 4, 30e3);
    for (Index n = 0; n < 4; ++n) {
        CHECK(std::abs(b[n] - Complex(1.0, 0.0)) < 1e-15);
    }
}

TEST_CASE("steering_delay quarter-turn phases", "[scene]")
{
    const double df = 30e3;
    const CVec b = steering_delay(1.0 / (4.0 * df), 4, df);
    const Complex expected[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    for (Index n = 0; n < 4; ++n) {
        CHECK(std::abs(b[n] - expected[n]) < 1e-12);
    }
}

TEST_CASE("steering_delay matches per-entry exponential", "[scene]")
{
    const double tau = 300e-9;
    const double df = 30e3;
    const CVec b = steering_delay(tau, 8, df);
    for (Index n = 0; n < 8; ++n) {
        const double ph = -2.0 * kPi * static_cast<double>(n) * df * tau;
        CHECK(std::abs(b[n] - Complex(std::cos(ph), std::sin(ph))) < 1e-14);
    }
}

TEST_CASE("steering_antenna broadside is all ones", "[scene]")
{
    for (auto [mv, mh] : {std::pair{1, 1}, std::pair{2, 8}, std::pair{4, 3}}) {
        const CVec a = steering_antenna(kPi / 2, kPi / 2, mv, mh);
        REQUIRE(a.size() == mv * mh);
        CHECK((a - CVec::Ones(a.size())).norm() < 1e-14);
    }
}

TEST_CASE("steering_antenna with one row equals the horizontal factor", "[scene]")
{
    const CVec a = steering_antenna(1.1, 0.7, 1, 6);
    const CVec h = steering_horizontal(1.1, 0.7, 6);
    CHECK((a - h).norm() < 1e-15);
}

TEST_CASE("steering_antenna matches explicit Kronecker product", "[scene]")
{
    const double th = kPi / 3;
    const double ph = kPi / 4;
    const CVec a = steering_antenna(th, ph, 2, 3);
    REQUIRE(a.size() == 6);
    for (int v = 0; v < 2; ++v) {
        for (int h = 0; h < 3; ++h) {
            const double arg = -kPi * (v * std::cos(th) + h * std::sin(th) * std::cos(ph));
            CHECK(std::abs(a[v * 3 + h] - Complex(std::cos(arg), std::sin(arg))) < 1e-14);
        }
    }
}

TEST_CASE("synth_channel single broadside path is all ones", "[scene]")
{
    SystemConfig cfg;
    PathSet ps;
    ps.paths.push_back({0.0, kPi / 2, kPi / 2, 1.0});
    ps.gains.push_back({1.0, 0.0});
    const CMat h = synth_channel(ps, 12, cfg);
    CHECK((h - CMat::Ones(12, cfg.antennas())).norm() < 1e-13);
}

TEST_CASE("synth_channel is linear in paths", "[scene]")
{
    SystemConfig cfg;
    Rng rng(3);
    const PathSet ps = test::random_paths(rng, 2);
    PathSet a;
    a.paths = {ps.paths[0]};
    a.gains = {ps.gains[0]};
    PathSet b;
    b.paths = {ps.paths[1]};
    b.gains = {ps.gains[1]};
    const CMat sum = synth_channel(a, 16, cfg) + synth_channel(b, 16, cfg);
    CHECK(test::rel_err(synth_channel(ps, 16, cfg), sum) < 1e-14);
}

TEST_CASE("synth_channel matches the triple-loop oracle", "[scene]")
{
    SystemConfig cfg;
    cfg.m_v = 2;
    cfg.m_h = 4;
    Rng rng(11);
    const PathSet ps = test::random_paths(rng, 5, 1e-6);
    CHECK(test::rel_err(synth_channel(ps, 16, cfg), reference::synth_channel(ps, 16, cfg)) < 1e-12);
}

TEST_CASE("synth_channel requires gains", "[scene]")
{
    PathSet ps;
    ps.paths.push_back({});
    CHECK_THROWS_AS(synth_channel(ps, 4, SystemConfig{}), ConfigError);
}

TEST_CASE("draw_gains zero power gives zero gain", "[scene]")
{
    PathSet ps;
    ps.paths.push_back({0.0, 1.0, 1.0, 0.0});
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        CHECK(draw_gains(ps, rng)[0] == Complex(0.0, 0.0));
    }
}

TEST_CASE("draw_gains unit power sample variance", "[scene]")
{
    PathSet ps;
    ps.paths.push_back({0.0, 1.0, 1.0, 1.0});
    ps.paths.push_back({0.0, 1.0, 1.0, 1.0});
    Rng rng(2);
    const int n = 100000;
    double var = 0.0;
    Complex cross{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        const auto g = draw_gains(ps, rng);
        var += std::norm(g[0]);
        cross += g[0] * std::conj(g[1]);
    }
    CHECK(std::abs(var / n - 1.0) < 0.03);
    CHECK(std::abs(cross) / n < 0.02);
}

TEST_CASE("draw_gains phase model has fixed modulus", "[scene]")
{
    PathSet ps;
    ps.paths.push_back({0.0, 1.0, 1.0, 0.25});
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        CHECK(std::abs(draw_gains(ps, rng, GainModel::phase)[0]) == Approx(0.5).epsilon(1e-14));
    }
    CHECK(parse_gain_model(to_string(GainModel::phase)) == GainModel::phase);
    CHECK_THROWS_AS(parse_gain_model("flat"), ConfigError);
}

TEST_CASE("generate_scene single grid single path", "[scene]")
{
    SceneParams sp;
    sp.grids = 1;
    sp.paths = 1;
    const GridScene s = generate_scene(sp, 4);
    REQUIRE(s.count() == 1);
    REQUIRE(s.grids[0].size() == 1);
    CHECK(s.grids[0].paths[0].rho == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generate_scene is deterministic", "[scene]")
{
    SceneParams sp;
    std::ostringstream a;
    std::ostringstream b;
    write_scene_csv(generate_scene(sp, 9), a);
    write_scene_csv(generate_scene(sp, 9), b);
    CHECK(a.str() == b.str());
    std::ostringstream c;
    write_scene_csv(generate_scene(sp, 10), c);
    CHECK(a.str() != c.str());
}

TEST_CASE("generate_scene neighbours vary smoothly", "[scene]")
{
    SceneParams sp;
    sp.grids = 4;
    sp.grid_size = 2.0;
    sp.corr_length = 1000.0;
    sp.variation = 0.05;
    const GridScene s = generate_scene(sp, 21);
    const double tau_range = sp.delay_spread;
    const double theta_range = sp.theta_max - sp.theta_min;
    const double phi_range = sp.phi_max - sp.phi_min;
    for (int g = 1; g < s.count(); ++g) {
        for (std::size_t l = 0; l < s.grids[0].size(); ++l) {
            const auto& p = s.grids[0].paths[l];
            const auto& q = s.grids[static_cast<std::size_t>(g)].paths[l];
            CHECK(std::abs(p.tau - q.tau) < sp.variation * tau_range);
            CHECK(std::abs(p.theta - q.theta) < sp.variation * theta_range);
            CHECK(std::abs(p.phi - q.phi) < sp.variation * phi_range);
        }
    }
}

TEST_CASE("scene csv round trip", "[scene]")
{
    SceneParams sp;
    const GridScene s = generate_scene(sp, 12);
    std::ostringstream os;
    write_scene_csv(s, os);
    CHECK(os.str().rfind("#scene v1, d=2, U=16, Lbar=4", 0) == 0);
    std::istringstream is(os.str());
    const GridScene r = read_scene_csv(is);
    REQUIRE(r.count() == s.count());
    for (int g = 0; g < s.count(); ++g) {
        const auto& a = s.grids[static_cast<std::size_t>(g)];
        const auto& b = r.grids[static_cast<std::size_t>(g)];
        REQUIRE(a.size() == b.size());
        for (std::size_t l = 0; l < a.size(); ++l) {
            CHECK(a.paths[l].tau == b.paths[l].tau);
            CHECK(a.paths[l].theta == b.paths[l].theta);
            CHECK(a.paths[l].phi == b.paths[l].phi);
            CHECK(a.paths[l].rho == b.paths[l].rho);
        }
    }
}

TEST_CASE("scene csv rejects unknown versions", "[scene]")
{
    std::istringstream is("#scene v9, d=2, U=1, Lbar=1\n");
    CHECK_THROWS_AS(read_scene_csv(is), ConfigError);
}

TEST_CASE("well_separated honours the configured axes", "[scene]")
{
    PathSet ps;
    ps.paths.push_back({0.0, 1.0, 1.0, 0.5});
    ps.paths.push_back({1e-9, 1.0, 1.0, 0.5});
    CHECK(well_separated(ps, SeparationDims{}, 30e3));
    CHECK_FALSE(well_separated(ps, SeparationDims{32, 0, 0}, 30e3));
}
