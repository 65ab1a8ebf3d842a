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

#include <benchmark/benchmark.h>

#include <Eigen/Cholesky>

#include "scsice/channel_scene.hpp"
#include "scsice/estimators.hpp"
#include "scsice/experiment.hpp"
#include "scsice/linalg.hpp"
#include "scsice/parallel.hpp"
#include "scsice/reference.hpp"
#include "scsice/vstd.hpp"
#include "test_util.hpp"

using namespace scsice;

namespace
{

struct EstimationCase
{
    SystemConfig cfg;
    EstimationDraw draw;
    std::vector<ScsiCorrelations> scsi;
};

const EstimationCase& estimation_case()
{
    static const EstimationCase c = [] {
        EstimationCase e;
        e.cfg = SystemConfig::paper_scale();
        SceneParams sp;
        sp.delta_f = e.cfg.delta_f;
        const GridScene scene = generate_scene(sp, 3);
        Rng rng(4);
        e.draw = draw_estimation_case(scene, e.cfg, 15.0, rng);
        for (const auto& ps : e.draw.truth_paths) {
            PathSet stat = ps;
            stat.gains.clear();
            e.scsi.push_back(build_correlations(stat, e.cfg));
        }
        return e;
    }();
    return c;
}

PathSet bench_paths(int n)
{
    Rng rng(1);
    return test::random_paths(rng, n, 1e-6);
}

void BM_SynthChannel(benchmark::State& st)
{
    const SystemConfig cfg = SystemConfig::paper_scale();
    const PathSet ps = bench_paths(24);
    for (auto _ : st) {
        benchmark::DoNotOptimize(synth_channel(ps, cfg.n_c, cfg));
    }
}

void BM_SynthChannelReference(benchmark::State& st)
{
    const SystemConfig cfg = SystemConfig::paper_scale();
    const PathSet ps = bench_paths(24);
    for (auto _ : st) {
        benchmark::DoNotOptimize(reference::synth_channel(ps, cfg.n_c, cfg));
    }
}

void BM_Correlations(benchmark::State& st)
{
    const SystemConfig cfg = SystemConfig::paper_scale();
    PathSet ps = bench_paths(24);
    ps.gains.clear();
    for (auto _ : st) {
        benchmark::DoNotOptimize(build_correlations(ps, cfg));
    }
}

void BM_CorrelationsReference(benchmark::State& st)
{
    const SystemConfig cfg = SystemConfig::paper_scale();
    PathSet ps = bench_paths(24);
    ps.gains.clear();
    for (auto _ : st) {
        benchmark::DoNotOptimize(reference::build_correlations(ps, cfg));
    }
}

void BM_SaBce(benchmark::State& st)
{
    const auto& c = estimation_case();
    set_num_threads(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        benchmark::DoNotOptimize(sa_bce_segments(c.draw.grid, c.draw.allocations, c.scsi, c.draw.noise_var, c.cfg));
    }
    set_num_threads(0);
}

void BM_SaWbce(benchmark::State& st)
{
    const auto& c = estimation_case();
    const WindowPair win = make_window(WindowKind::kaiser, c.cfg.n_pilot(), c.cfg.m_v, c.cfg.m_h, c.cfg.kaiser_shape);
    const BandSpec band{15, 20, false};
    set_num_threads(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        benchmark::DoNotOptimize(
            sa_wbce_segments(c.draw.grid, c.draw.allocations, c.scsi, c.draw.noise_var, win, band, c.cfg));
    }
    set_num_threads(0);
}

void BM_BuildDatabase(benchmark::State& st)
{
    SceneParams sp;
    sp.grids = 16;
    const GridScene scene = generate_scene(sp, 5);
    VstdConfig vc;
    vc.noise_var = 0.1;
    set_num_threads(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        benchmark::DoNotOptimize(build_database(scene, vc, 6));
    }
    set_num_threads(0);
}

CMat banded_system(Index n, Index b)
{
    Rng rng(7);
    CMat r = test::random_psd(rng, n);
    r = 0.5 * (r + r.adjoint()).eval();
    r.diagonal().array() += 1.0;
    return band_truncate(r, b);
}

void BM_BandedSolve(benchmark::State& st)
{
    const Index n = st.range(0), b = st.range(1);
    const CMat a = banded_system(n, b);
    Rng rng(8);
    const CMat rhs = test::random_matrix(rng, n, 1);
    for (auto _ : st) {
        benchmark::DoNotOptimize(banded_solve(a, b, 0.0, rhs, nullptr));
    }
}

void BM_DenseSolve(benchmark::State& st)
{
    const Index n = st.range(0), b = st.range(1);
    const CMat a = banded_system(n, b);
    Rng rng(8);
    const CMat rhs = test::random_matrix(rng, n, 1);
    for (auto _ : st) {
        benchmark::DoNotOptimize(a.llt().solve(rhs).eval());
    }
}

} // namespace

BENCHMARK(BM_SynthChannel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SynthChannelReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Correlations)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CorrelationsReference)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SaBce)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SaWbce)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BuildDatabase)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BandedSolve)->Args({272, 15})->Args({64, 20})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DenseSolve)->Args({272, 15})->Args({64, 20})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
