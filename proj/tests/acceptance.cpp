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
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "scsice/dmrs_frame.hpp"
#include "scsice/estimators.hpp"
#include "scsice/experiment.hpp"
#include "scsice/linalg.hpp"
#include "scsice/reference.hpp"
#include "scsice/vstd.hpp"
#include "test_util.hpp"

using namespace scsice;

namespace
{

struct Verdict
{
    bool pass = false;
    std::string detail;
};

struct Criterion
{
    const char* name;
    double time_limit_s;
    std::function<Verdict()> run;
};

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

ExperimentResult run_scenario(const std::string& name, const std::function<void(ExperimentConfig&)>& tweak)
{
    ExperimentConfig c = scenario_defaults(name);
    c.seed = 1;
    tweak(c);
    return run_experiment(c);
}

const SummaryRow* find_row(const std::vector<SummaryRow>& rows, const std::string& est,
                           const std::function<bool(const SummaryRow&)>& pred)
{
    for (const auto& r : rows) {
        if (r.estimator == est && pred(r)) {
            return &r;
        }
    }
    return nullptr;
}

bool non_increasing_within_se(const std::vector<const SummaryRow*>& seq, std::string& detail)
{
    bool ok = true;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        detail += (i ? " " : "") + fmt("%.2f", seq[i]->mean) + fmt("(%.2f)", seq[i]->stderr_);
        if (i > 0) {
            const double slack = std::max(seq[i - 1]->stderr_, seq[i]->stderr_);
            ok = ok && seq[i]->mean <= seq[i - 1]->mean + slack;
        }
    }
    return ok;
}

Verdict max_extra_below(const ExperimentResult& r, double tol)
{
    double worst = 0.0;
    for (const auto& row : r.rows) {
        worst = std::max(worst, row.extra);
    }
    const bool ok = r.failed_trials == 0 && !r.rows.empty() && worst <= tol;
    return {ok, "max relative error " + fmt("%.3g", worst) + " over " + std::to_string(r.rows.size()) +
                    " instances, failed trials " + std::to_string(r.failed_trials)};
}

Verdict criterion1()
{
    return max_extra_below(run_scenario("lemma1", [](ExperimentConfig& c) { c.trials = 20; }), 1e-9);
}

Verdict criterion2()
{
    return max_extra_below(run_scenario("window-identity", [](ExperimentConfig& c) { c.trials = 20; }), 1e-9);
}

Verdict criterion3()
{
    const auto r = run_scenario("vstd-noiseless", [](ExperimentConfig& c) { c.trials = 100; });
    int good = 0;
    double worst = 0.0;
    for (const auto& row : r.rows) {
        worst = std::max(worst, row.extra);
        good += row.extra <= 1e-6 ? 1 : 0;
    }
    return {good == 100, std::to_string(good) + "/100 trials within 1e-6, worst " + fmt("%.3g", worst)};
}

Verdict criterion4()
{
    const auto r = run_scenario("mdl", [](ExperimentConfig& c) { c.trials = 100; });
    int good = 0;
    for (const auto& row : r.rows) {
        good += row.extra == 4.0 ? 1 : 0;
    }
    return {good >= 95, std::to_string(good) + "/100 trials with Lbar = 4"};
}

Verdict criterion5()
{
    const auto r = run_scenario("fig3-desk", [](ExperimentConfig& c) { c.trials = 50; });
    const auto sum = summarize(r.rows, "lscsi_db");
    bool ok = r.failed_trials == 0;
    std::string detail;
    for (double snr : {0.0, 10.0}) {
        std::vector<const SummaryRow*> seq;
        for (double nd : {16.0, 32.0, 64.0, 128.0}) {
            const auto* row =
                find_row(sum, "vstd", [&](const SummaryRow& s) { return s.snr_db == snr && s.x == nd; });
            if (!row) {
                return {false, "missing summary row"};
            }
            seq.push_back(row);
        }
        detail += (snr == 0.0 ? "" : "; ") + fmt("SNR_SC %.0f dB: ", snr);
        ok = non_increasing_within_se(seq, detail) && ok;
    }
    return {ok, "L_SCSI dB (se) over N_d 16..128: " + detail};
}

Verdict criterion6()
{
    const auto r = run_scenario("fig5-desk", [](ExperimentConfig& c) {
        c.trials = 100;
        c.estimators = {"trivial", "sa_bce"};
    });
    const auto sum = summarize(r.rows, "nmse_db");
    bool ok = r.failed_trials == 0;
    std::string detail;
    for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0}) {
        const auto* t = find_row(sum, "trivial", [&](const SummaryRow& s) { return s.snr_db == snr; });
        const auto* b = find_row(sum, "sa_bce", [&](const SummaryRow& s) { return s.snr_db == snr; });
        if (!t || !b) {
            return {false, "missing summary row"};
        }
        const double gain = t->mean - b->mean;
        ok = ok && gain >= 3.0;
        detail += (detail.empty() ? "" : ", ") + fmt("%.0f dB:", snr) + fmt("%.2f", gain);
    }
    return {ok, "SA-BCE gain over trivial " + detail};
}

Verdict criterion7()
{
    const auto r = run_scenario("fig8-desk", [](ExperimentConfig& c) {
        c.trials = 100;
        c.estimators = {"trivial", "sa_bce"};
    });
    const auto sum = summarize(r.rows, "nmse_db");
    auto at = [&](const std::string& est, double x) {
        return find_row(sum, est, [&](const SummaryRow& s) { return std::abs(s.x - x) < 1e-12; });
    };
    const auto *b0 = at("sa_bce", 100e-9), *b1 = at("sa_bce", 500e-9);
    const auto *t0 = at("trivial", 100e-9), *t1 = at("trivial", 500e-9);
    if (!b0 || !b1 || !t0 || !t1) {
        return {false, "missing summary row"};
    }
    const double db = b1->mean - b0->mean;
    const double dt = t1->mean - t0->mean;
    const bool ok = r.failed_trials == 0 && db <= 1.5 && dt >= 3.0;
    return {ok, "100 -> 500 ns: SA-BCE " + fmt("%+.2f dB", db) + ", trivial " + fmt("%+.2f dB", dt)};
}

double seconds_per_call(const std::function<void()>& f)
{
    f();
    int reps = 1;
    for (;;) {
        const auto t0 = std::chrono::steady_clock::now();
        for (int i = 0; i < reps; ++i) {
            f();
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s > 0.2 || reps >= 1 << 16) {
            return s / reps;
        }
        reps *= 2;
    }
}

double band_speedup(Index n, Index b, Rng& rng)
{
    CMat r = test::random_psd(rng, n);
    r = 0.5 * (r + r.adjoint()).eval();
    r.diagonal().array() += 1.0;
    const CMat banded = band_truncate(r, b);
    const CMat rhs = test::random_matrix(rng, n, 1);
    volatile double sink = 0.0;
    const double tb = seconds_per_call([&] { sink = sink + banded_solve(banded, b, 0.0, rhs, nullptr).norm(); });
    const double td = seconds_per_call([&] { sink = sink + banded.llt().solve(rhs).norm(); });
    return td / tb;
}

Verdict criterion8()
{
    const auto r = run_scenario("fig7-desk", [](ExperimentConfig& c) {
        c.trials = 50;
        c.windows = {WindowKind::kaiser};
    });
    const auto sum = summarize(r.rows, "nmse_db");
    std::vector<const SummaryRow*> seq;
    for (double x : {0.0, 1.0, 2.0, 3.0}) {
        const auto* row = find_row(sum, "sa_wbce_kaiser", [&](const SummaryRow& s) { return s.x == x; });
        if (!row) {
            return {false, "missing summary row"};
        }
        seq.push_back(row);
    }
    std::string detail = "NMSE dB (se) over bands 4:4, 8:8, 15:20, full: ";
    bool ok = r.failed_trials == 0 && non_increasing_within_se(seq, detail);
    Rng rng(8);
    const double s_tau = band_speedup(272, 15, rng);
    const double s_a = band_speedup(64, 20, rng);
    ok = ok && s_tau >= 3.0 && s_a >= 3.0;
    detail += "; banded speedup N=272,B=15: " + fmt("%.1fx", s_tau) + ", M=64,B=20: " + fmt("%.1fx", s_a);
    return {ok, detail};
}

Verdict criterion9()
{
    const double tau = 137e-9;
    std::vector<double> frac;
    std::string detail = "off-diagonal energy fraction at N = 32, 64, 128, 256:";
    for (int n : {32, 64, 128, 256}) {
        SystemConfig cfg = SystemConfig::desk();
        cfg.n_c = 3 * n;
        PathSet ps;
        ps.paths.push_back({tau, 1.3, 1.9, 1.0});
        const auto alloc = assign_allocations(cfg).front();
        const CMat r = beam_delay_correlations(ps, alloc, nullptr, cfg).r_tau;
        const double total = r.squaredNorm();
        const double diag = r.diagonal().squaredNorm();
        frac.push_back((total - diag) / total);
        detail += fmt(" %.4f", frac.back());
    }
    bool ok = true;
    for (std::size_t i = 1; i < frac.size(); ++i) {
        ok = ok && frac[i] <= 0.75 * frac[i - 1];
    }
    return {ok, detail};
}

Verdict criterion10()
{
    Rng rng(10);
    double worst_f = 0.0, worst_s = 0.0;
    bool exact = true;
    for (int inst = 0; inst < 50; ++inst) {
        const Index n = 4 * (2 + static_cast<Index>(rng.uniform(0.0, 7.0)));
        const Index m = 2 + static_cast<Index>(rng.uniform(0.0, 15.0));
        const double noise = rng.uniform(1e-2, 1.0);
        std::vector<CMat> rp;
        std::vector<CVec> covers;
        const int members = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
        for (int u = 0; u < members; ++u) {
            rp.push_back(test::random_psd(rng, n, 3));
            covers.push_back(freq_occ_diag(u * static_cast<int>(n) / 4, static_cast<int>(n)));
        }
        const CMat y = test::random_matrix(rng, n, m);
        for (std::size_t u = 0; u < rp.size(); ++u) {
            worst_f = std::max(worst_f, test::rel_err(freq_mmse_decompose(y, u, rp, covers, noise),
                                                      reference::freq_mmse(y, u, rp, covers, noise)));
        }
        const CMat rs = test::random_psd(rng, m);
        const CMat h = test::random_matrix(rng, n, m);
        worst_s = std::max(worst_s, test::rel_err(antenna_mmse(h, rs, noise), reference::antenna_mmse(h, rs, noise)));

        const int nd = 2 + inst % 5, mv = 1 + inst % 3, mh = 1 + inst % 4;
        const CMat block = test::random_matrix(rng, nd * mv * mh, 3);
        exact = exact && matricize_x3(tensorize(block, nd, mv, mh)) == block;
    }
    const bool ok = worst_f <= 1e-10 && worst_s <= 1e-10 && exact;
    return {ok, "max relative error freq " + fmt("%.2e", worst_f) + ", antenna " + fmt("%.2e", worst_s) +
                    ", tensor round trips " + (exact ? "exact" : "NOT exact")};
}

const std::map<int, Criterion>& criteria()
{
    static const std::map<int, Criterion> c{
        {1, {"beam-delay equivalence", 10.0, criterion1}},
        {2, {"window cancellation at full band", 10.0, criterion2}},
        {3, {"noiseless VSTD recovery", 30.0, criterion3}},
        {4, {"MDL path count", 60.0, criterion4}},
        {5, {"L_SCSI vs N_d and SNR_SC", 300.0, criterion5}},
        {6, {"SA-BCE vs trivial over SNR_CE", 300.0, criterion6}},
        {7, {"delay-spread robustness", 300.0, criterion7}},
        {8, {"band-size monotonicity and banded speed", 600.0, criterion8}},
        {9, {"delay-domain diagonalization with N", 5.0, criterion9}},
        {10, {"oracle equivalence", 10.0, criterion10}},
    };
    return c;
}

int run_one(int id)
{
    const auto& c = criteria().at(id);
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = c.run();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.time_limit_s;
    const bool pass = v.pass && in_time;
    std::printf("criterion %d (%s): %s | %s | %.1f s (limit %.0f s)\n", id, c.name, pass ? "PASS" : "FAIL",
                v.detail.c_str(), s, c.time_limit_s);
    std::fflush(stdout);
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) {
        const int id = std::atoi(argv[i]);
        if (!criteria().count(id)) {
            std::fprintf(stderr, "usage: %s [criterion 1-10 ...]\n", argv[0]);
            return 2;
        }
        ids.push_back(id);
    }
    if (ids.empty()) {
        for (const auto& [id, _] : criteria()) {
            ids.push_back(id);
        }
    }
    int failures = 0;
    for (int id : ids) {
        failures += run_one(id);
    }
    return failures == 0 ? 0 : 1;
}
