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

#include <Eigen/SVD>
#include <catch2/catch_amalgamated.hpp>

#include "scsice/channel_scene.hpp"
#include "scsice/estimators.hpp"
#include "scsice/interpolation.hpp"
#include "scsice/linalg.hpp"
#include "scsice/metrics.hpp"
#include "scsice/reference.hpp"
#include "scsice/windows.hpp"
#include "test_util.hpp"

using namespace scsice;

namespace
{

struct Instance
{
    SystemConfig cfg;
    std::vector<DmrsAllocation> allocs;
    std::vector<PathSet> paths;
    std::vector<CMat> channels;
    std::vector<ScsiCorrelations> scsi;
    PilotGrid grid;
    double noise_var = 0.0;
};

Instance make_instance(std::uint64_t seed, const SystemConfig& cfg, int paths, double spread, double noise_var)
{
    Instance in;
    in.cfg = cfg;
    in.noise_var = noise_var;
    Rng rng(seed);
    in.allocs = assign_allocations(cfg);
    const auto pilots = make_pilot_sequences(cfg, rng);
    std::vector<std::vector<CMat>> ch;
    for (int k = 0; k < cfg.k_users; ++k) {
        in.paths.push_back(test::random_paths(rng, paths, spread));
        in.channels.push_back(synth_channel(in.paths.back(), cfg.n_c, cfg));
        ch.push_back(std::vector<CMat>(static_cast<std::size_t>(cfg.t_p), in.channels.back()));
        PathSet stat = in.paths.back();
        stat.gains.clear();
        in.scsi.push_back(build_correlations(stat, cfg));
    }
    in.grid = synth_received(ch, in.allocs, pilots, noise_var, cfg, rng);
    return in;
}

std::vector<CMat> pilot_truths(const Instance& in)
{
    std::vector<CMat> out;
    for (std::size_t k = 0; k < in.allocs.size(); ++k) {
        out.push_back(select_subcarriers(in.channels[k], pilot_subcarrier_set(in.allocs[k].group, in.cfg.n_c)));
    }
    return out;
}

} // namespace

TEST_CASE("build_correlations single zero-delay path", "[estimators]")
{
    SystemConfig cfg;
    PathSet ps;
    ps.paths.push_back({0.0, 1.0, 2.0, 1.0});
    const auto s = build_correlations(ps, cfg);
    CHECK((s.r_f - CMat::Ones(cfg.n_c, cfg.n_c)).norm() < 1e-12);
}

TEST_CASE("build_correlations single path is rank one", "[estimators]")
{
    SystemConfig cfg;
    PathSet ps;
    ps.paths.push_back({250e-9, 1.0, 2.0, 0.7});
    const auto s = build_correlations(ps, cfg);
    const RVec sv = Eigen::JacobiSVD<CMat>(s.r_f).singularValues();
    CHECK(sv[1] < 1e-10 * sv[0]);
}

TEST_CASE("build_correlations matches the accumulation oracle", "[estimators]")
{
    SystemConfig cfg;
    Rng rng(1);
    PathSet ps = test::random_paths(rng, 3);
    ps.gains.clear();
    const auto a = build_correlations(ps, cfg);
    const auto b = reference::build_correlations(ps, cfg);
    CHECK(test::rel_err(a.r_f, b.r_f) < 1e-12);
    CHECK(test::rel_err(a.r_s, b.r_s) < 1e-12);
}

TEST_CASE("freq_mmse_decompose noiseless single user inverts the cover", "[estimators]")
{
    Rng rng(2);
    const Index n = 16;
    const CMat r = test::random_psd(rng, n) + CMat::Identity(n, n);
    const CVec c = freq_occ_diag(4, static_cast<int>(n));
    const CMat y = test::random_matrix(rng, n, 4);
    const CMat h = freq_mmse_decompose(y, 0, {r}, {c}, 1e-14);
    CHECK(test::rel_err(h, c.conjugate().asDiagonal() * y) < 1e-8);
}

TEST_CASE("freq_mmse_decompose shrinks to zero with large noise", "[estimators]")
{
    Rng rng(3);
    const Index n = 16;
    const CMat r = test::random_psd(rng, n);
    const CMat y = test::random_matrix(rng, n, 4);
    const double small = freq_mmse_decompose(y, 0, {r}, {CVec::Ones(n)}, 1e8).norm();
    CHECK(small < 1e-6 * y.norm());
}

TEST_CASE("freq_mmse_decompose matches the direct formula", "[estimators]")
{
    Rng rng(4);
    const Index n = 16;
    for (int trial = 0; trial < 5; ++trial) {
        const std::vector<CMat> r{test::random_psd(rng, n), test::random_psd(rng, n)};
        const std::vector<CVec> c{freq_occ_diag(0, 16), freq_occ_diag(4, 16)};
        const CMat y = test::random_matrix(rng, n, 3);
        for (std::size_t u = 0; u < 2; ++u) {
            const CMat a = freq_mmse_decompose(y, u, r, c, 0.05);
            CHECK(test::rel_err(a, reference::freq_mmse(y, u, r, c, 0.05)) < 1e-10);
        }
    }
}

TEST_CASE("antenna_mmse limits and oracle", "[estimators]")
{
    Rng rng(5);
    const Index m = 8;
    const CMat h = test::random_matrix(rng, 12, m);
    SECTION("noiseless full rank is the identity map")
    {
        const CMat r = test::random_psd(rng, m) + CMat::Identity(m, m);
        CHECK(test::rel_err(antenna_mmse(h, r, 0.0), h) < 1e-8);
    }
    SECTION("scaled identity gives uniform shrinkage")
    {
        const double rho = 2.0;
        const double s2 = 0.5;
        const CMat out = antenna_mmse(h, rho * CMat::Identity(m, m), s2);
        CHECK(test::rel_err(out, (rho / (rho + s2)) * h) < 1e-9);
    }
    SECTION("random instance matches the direct formula")
    {
        const CMat r = test::random_psd(rng, m);
        CHECK(test::rel_err(antenna_mmse(h, r, 0.1), reference::antenna_mmse(h, r, 0.1)) < 1e-10);
    }
}

TEST_CASE("interpolate_to_full", "[estimators]")
{
    const auto idx = pilot_subcarrier_set(0, 48);
    const Index n = static_cast<Index>(idx.size());
    SECTION("flat input stays flat")
    {
        const CMat v = CMat::Constant(n, 3, Complex(0.3, -1.2));
        CHECK((interpolate_to_full(v, idx, 48) - CMat::Constant(48, 3, Complex(0.3, -1.2))).norm() < 1e-14);
    }
    SECTION("linear input is exact between pilots")
    {
        CMat v(n, 1);
        for (Index i = 0; i < n; ++i) {
            v(i, 0) = Complex(2.0 * idx[static_cast<std::size_t>(i)] + 1.0, -0.5 * idx[static_cast<std::size_t>(i)]);
        }
        const CMat out = interpolate_to_full(v, idx, 48);
        for (int k = idx.front(); k <= idx.back(); ++k) {
            CHECK(std::abs(out(k, 0) - Complex(2.0 * k + 1.0, -0.5 * k)) < 1e-12);
        }
    }
    SECTION("random input matches a scalar interpolation oracle")
    {
        Rng rng(6);
        const CMat v = test::random_matrix(rng, n, 2);
        const CMat out = interpolate_to_full(v, idx, 48);
        for (int k = 0; k < 48; ++k) {
            for (Index c = 0; c < 2; ++c) {
                Complex e;
                if (k <= idx.front()) {
                    e = v(0, c);
                } else if (k >= idx.back()) {
                    e = v(n - 1, c);
                } else {
                    Index j = 0;
                    while (idx[static_cast<std::size_t>(j + 1)] < k) {
                        ++j;
                    }
                    const double x0 = idx[static_cast<std::size_t>(j)];
                    const double x1 = idx[static_cast<std::size_t>(j + 1)];
                    const double t = (k - x0) / (x1 - x0);
                    e = (1.0 - t) * v(j, c) + t * v(j + 1, c);
                }
                CHECK(std::abs(out(k, c) - e) < 1e-12);
            }
        }
    }
}

TEST_CASE("sa_bce exact SCSI noiseless full-rank recovery", "[estimators]")
{
    SystemConfig cfg;
    cfg.k_users = 6;
    const Instance in = make_instance(7, cfg, 48, 3e-6, 0.0);
    const auto est = sa_bce_segments(in.grid, in.allocs, in.scsi, 0.0, cfg);
    CHECK(nmse(est, pilot_truths(in)).db < -80.0);
}

TEST_CASE("sa_bce equals its manual stage composition", "[estimators]")
{
    SystemConfig cfg;
    const Instance in = make_instance(8, cfg, 4, 300e-9, 0.05);
    const auto est = sa_bce_segments(in.grid, in.allocs, in.scsi, in.noise_var, cfg);
    for (int i = 0; i < cfg.g_groups; ++i) {
        const auto& gs = in.grid.groups[static_cast<std::size_t>(i)];
        std::vector<CMat> ls;
        for (const auto& y : gs.rx) {
            ls.push_back(ls_depilot(y, gs.pilot));
        }
        for (int set = 0; set < 2; ++set) {
            const auto members = users_in_set(in.allocs, i, set);
            const CMat y = time_occ_decouple(ls, in.allocs[static_cast<std::size_t>(members.front())].time_occ);
            std::vector<CMat> r;
            std::vector<CVec> c;
            for (int u : members) {
                r.push_back(restrict_to_pilots(in.scsi[static_cast<std::size_t>(u)].r_f, gs.indices));
                c.push_back(freq_occ_diag(in.allocs[static_cast<std::size_t>(u)].cyclic_shift, cfg.n_pilot()));
            }
            for (std::size_t k = 0; k < members.size(); ++k) {
                const auto u = static_cast<std::size_t>(members[k]);
                const CMat hf = freq_mmse_decompose(y, k, r, c, in.noise_var / cfg.t_p);
                const CMat h = antenna_mmse(hf, in.scsi[u].r_s, in.noise_var);
                CHECK(test::rel_err(est[u], h) < 1e-12);
            }
        }
    }
}

TEST_CASE("sa_bce beats the trivial baseline on frequency-selective channels", "[estimators]")
{
    SystemConfig cfg;
    cfg.k_users = 24;
    double gap = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Instance in = make_instance(100 + static_cast<std::uint64_t>(trial), cfg, 4, 300e-9, std::pow(10.0, -1.5));
        const double a = nmse(sa_bce(in.grid, in.allocs, in.scsi, in.noise_var, cfg), in.channels).db;
        const double b = nmse(trivial_estimate(in.grid, in.allocs, cfg), in.channels).db;
        gap += (b - a) / 10.0;
    }
    CHECK(gap > 3.0);
}

TEST_CASE("beam_delay_correlations direct form equals the congruence", "[estimators]")
{
    SystemConfig cfg;
    Rng rng(9);
    PathSet ps = test::random_paths(rng, 5);
    ps.gains.clear();
    const auto allocs = assign_allocations(cfg);
    const auto scsi = build_correlations(ps, cfg);
    for (const WindowPair* w : {static_cast<const WindowPair*>(nullptr)}) {
        for (const auto& a : {allocs[0], allocs[1], allocs[7]}) {
            const auto d = beam_delay_correlations(ps, a, w, cfg);
            const auto c = beam_delay_from_correlations(scsi, a, w, cfg);
            CHECK(test::rel_err(d.r_tau, c.r_tau) < 1e-12);
            CHECK(test::rel_err(d.r_a, c.r_a) < 1e-12);
        }
    }
    const WindowPair kw = make_window(WindowKind::kaiser, cfg.n_pilot(), cfg.m_v, cfg.m_h, 3.95);
    const auto d = beam_delay_correlations(ps, allocs[3], &kw, cfg);
    const auto c = beam_delay_from_correlations(scsi, allocs[3], &kw, cfg);
    CHECK(test::rel_err(d.r_tau, c.r_tau) < 1e-12);
    CHECK(test::rel_err(d.r_a, c.r_a) < 1e-12);
}

TEST_CASE("on-bin delay over a full comb is one-sparse in the delay domain", "[estimators]")
{
    const Index n = 32;
    const double df = 30e3;
    const CVec b = dft_matrix(n).adjoint() * steering_delay(5.0 / (static_cast<double>(n) * df), n, df);
    int nonzero = 0;
    for (Index i = 0; i < n; ++i) {
        nonzero += std::abs(b[i]) > 1e-10 ? 1 : 0;
    }
    CHECK(nonzero == 1);
}

TEST_CASE("sa_wbce with full bands equals sa_bce", "[estimators]")
{
    SystemConfig cfg;
    const Instance in = make_instance(10, cfg, 4, 300e-9, 0.01);
    const auto ref = sa_bce_segments(in.grid, in.allocs, in.scsi, in.noise_var, cfg);
    for (WindowKind k : {WindowKind::kaiser, WindowKind::hann, WindowKind::rectangular}) {
        const WindowPair w = make_window(k, cfg.n_pilot(), cfg.m_v, cfg.m_h, 3.95);
        const auto est =
            sa_wbce_segments(in.grid, in.allocs, in.scsi, in.noise_var, w, BandSpec::full(cfg), cfg);
        CHECK(test::rel_err(est, ref) < 1e-9);
    }
}

TEST_CASE("sa_wbce identity window full band equals the beam-delay form", "[estimators]")
{
    SystemConfig cfg;
    const Instance in = make_instance(11, cfg, 4, 300e-9, 0.01);
    const WindowPair w = make_window(WindowKind::rectangular, cfg.n_pilot(), cfg.m_v, cfg.m_h);
    const auto a = sa_wbce_segments(in.grid, in.allocs, in.scsi, in.noise_var, w, BandSpec::full(cfg), cfg);
    const auto b = sa_bce_beam_delay_segments(in.grid, in.allocs, in.scsi, in.noise_var, cfg);
    CHECK(test::rel_err(a, b) < 1e-10);
}

TEST_CASE("sa_wbce periodic full band equals sa_bce", "[estimators]")
{
    SystemConfig cfg;
    const Instance in = make_instance(12, cfg, 4, 300e-9, 0.01);
    const auto ref = sa_bce_segments(in.grid, in.allocs, in.scsi, in.noise_var, cfg);
    const WindowPair w = make_window(WindowKind::kaiser, cfg.n_pilot(), cfg.m_v, cfg.m_h, 3.95);
    BandSpec band = BandSpec::full(cfg);
    band.periodic = true;
    CHECK(test::rel_err(sa_wbce_segments(in.grid, in.allocs, in.scsi, in.noise_var, w, band, cfg), ref) < 1e-9);
}

TEST_CASE("sa_wbce rejects bands outside the dimensions", "[estimators]")
{
    SystemConfig cfg;
    BandSpec b{cfg.n_pilot(), 3};
    CHECK_THROWS_AS(b.validate(cfg), ConfigError);
}

TEST_CASE("sa_wbce Kaiser 15:20 close to sa_bce at paper scale", "[estimators][!mayfail]")
{
    const SystemConfig cfg = SystemConfig::paper_scale();
    const WindowPair w = make_window(WindowKind::kaiser, cfg.n_pilot(), cfg.m_v, cfg.m_h, 3.95);
    double wbce = 0.0;
    double bce = 0.0;
    const int trials = 3;
    for (int t = 0; t < trials; ++t) {
        const Instance in = make_instance(200 + static_cast<std::uint64_t>(t), cfg, 4, 300e-9, 0.01);
        bce += nmse(sa_bce(in.grid, in.allocs, in.scsi, in.noise_var, cfg), in.channels).db / trials;
        wbce += nmse(sa_wbce(in.grid, in.allocs, in.scsi, in.noise_var, w, BandSpec{15, 20}, cfg), in.channels).db /
                trials;
    }
    INFO("sa_bce " << bce << " dB, sa_wbce " << wbce << " dB");
    CHECK(wbce <= bce + 2.5);
}

TEST_CASE("make_window", "[estimators]")
{
    SECTION("rectangular gives identity Xi")
    {
        const WindowPair w = make_window(WindowKind::rectangular, 16, 2, 4);
        CHECK(w.xi_f == CMat::Identity(16, 16));
        CHECK(w.xi_s == CMat::Identity(8, 8));
    }
    SECTION("kaiser with zero shape is rectangular")
    {
        const RVec k = window_1d(WindowKind::kaiser, 16, 0.0);
        CHECK((k - RVec::Ones(16)).norm() < 1e-15);
    }
    SECTION("kaiser matches the Bessel series")
    {
        auto i0 = [](double x) {
            double sum = 1.0;
            double term = 1.0;
            for (int k = 1; k < 60; ++k) {
                term *= (x / (2.0 * k)) * (x / (2.0 * k));
                sum += term;
            }
            return sum;
        };
        const Index n = 64;
        const double beta = 3.95;
        RVec e(n);
        for (Index i = 0; i < n; ++i) {
            const double r = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
            e[i] = i0(beta * std::sqrt(1.0 - r * r)) / i0(beta);
        }
        e /= e.maxCoeff();
        CHECK((window_1d(WindowKind::kaiser, n, beta) - e).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("hann entries are positive")
    {
        CHECK(window_1d(WindowKind::hann, 8).minCoeff() > 0.0);
    }
    SECTION("names round trip")
    {
        for (WindowKind k : {WindowKind::rectangular, WindowKind::hann, WindowKind::kaiser}) {
            CHECK(parse_window_kind(to_string(k)) == k);
        }
        CHECK_THROWS_AS(parse_window_kind("blackman"), ConfigError);
    }
}
