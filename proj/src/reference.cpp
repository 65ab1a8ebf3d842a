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

#include <Eigen/LU>

#include "scsice/reference.hpp"

namespace scsice::reference
{
namespace
{

Complex unit(double angle)
{
    return {std::cos(angle), std::sin(angle)};
}

Complex antenna_entry(const PathParams& p, int m, int m_h)
{
    const int iv = m / m_h;
    const int ih = m % m_h;
    const double ph = kPi * (iv * std::cos(p.theta) + ih * std::sin(p.theta) * std::cos(p.phi));
    return unit(-ph);
}

double loading_of(double trace_sum, Index n)
{
    return trace_sum > 0.0 ? 1e-10 * trace_sum / static_cast<double>(n) : 1e-10;
}

} // namespace

ChannelMatrix synth_channel(const PathSet& paths, Index n_sc, const SystemConfig& cfg)
{
    if (!paths.has_gains()) {
        throw ConfigError("reference::synth_channel needs one gain per path");
    }
    const int m_total = cfg.antennas();
    ChannelMatrix h = ChannelMatrix::Zero(n_sc, m_total);
    for (Index n = 0; n < n_sc; ++n) {
        for (int m = 0; m < m_total; ++m) {
            Complex s{0.0, 0.0};
            for (std::size_t l = 0; l < paths.size(); ++l) {
                const auto& p = paths.paths[l];
                const double ph = 2.0 * kPi * static_cast<double>(n) * cfg.delta_f * p.tau;
                s += paths.gains[l] * unit(-ph) * antenna_entry(p, m, cfg.m_h);
            }
            h(n, m) = s;
        }
    }
    return h;
}

ScsiCorrelations build_correlations(const PathSet& paths, const SystemConfig& cfg)
{
    ScsiCorrelations out;
    out.source = paths;
    const Index n = cfg.n_c;
    const int m_total = cfg.antennas();
    out.r_f = CMat::Zero(n, n);
    out.r_s = CMat::Zero(m_total, m_total);
    for (const auto& p : paths.paths) {
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                out.r_f(i, j) += p.rho * unit(-2.0 * kPi * static_cast<double>(i - j) * cfg.delta_f * p.tau);
            }
        }
        for (int a = 0; a < m_total; ++a) {
            for (int b = 0; b < m_total; ++b) {
                out.r_s(a, b) += p.rho * antenna_entry(p, a, cfg.m_h) * std::conj(antenna_entry(p, b, cfg.m_h));
            }
        }
    }
    return out;
}

PilotGrid synth_received(const std::vector<std::vector<CMat>>& channels,
                         const std::vector<DmrsAllocation>& allocs,
                         const std::vector<CVec>& pilots,
                         const SystemConfig& cfg)
{
    const int n_pilot = cfg.n_pilot();
    const int m_total = cfg.antennas();
    const int stride = 2 * cfg.g_groups;
    PilotGrid grid;
    grid.groups.resize(static_cast<std::size_t>(cfg.g_groups));
    for (int i = 0; i < cfg.g_groups; ++i) {
        auto& gs = grid.groups[static_cast<std::size_t>(i)];
        gs.pilot = pilots[static_cast<std::size_t>(i)];
        for (int q = 0; q < n_pilot; ++q) {
            gs.indices.push_back(stride * (q / 2) + 2 * i + q % 2);
        }
        for (int t = 0; t < cfg.t_p; ++t) {
            CMat y = CMat::Zero(n_pilot, m_total);
            for (std::size_t k = 0; k < allocs.size(); ++k) {
                const auto& a = allocs[k];
                if (a.group != i) {
                    continue;
                }
                const double w = a.time_occ[static_cast<std::size_t>(t)];
                const CMat& h = channels[k][static_cast<std::size_t>(t)];
                for (int q = 0; q < n_pilot; ++q) {
                    const Complex cover = unit(2.0 * kPi * static_cast<double>(q) * a.cyclic_shift / n_pilot);
                    const Complex code = gs.pilot[q] * cover * w;
                    for (int m = 0; m < m_total; ++m) {
                        y(q, m) += code * h(gs.indices[static_cast<std::size_t>(q)], m);
                    }
                }
            }
            gs.rx.push_back(y);
        }
    }
    return grid;
}

CMat freq_mmse(const CMat& y,
               std::size_t u,
               const std::vector<CMat>& r_pilot,
               const std::vector<CVec>& covers,
               double noise_var)
{
    const Index n = r_pilot.front().rows();
    CMat g = CMat::Zero(n, n);
    double tr = 0.0;
    for (std::size_t k = 0; k < r_pilot.size(); ++k) {
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                g(i, j) += covers[k][i] * r_pilot[k](i, j) * std::conj(covers[k][j]);
            }
        }
        tr += r_pilot[k].trace().real();
    }
    const double eps = loading_of(tr, n);
    for (Index i = 0; i < n; ++i) {
        g(i, i) += noise_var + eps;
    }
    const CMat g_inv = g.fullPivLu().inverse();
    CMat cu = CMat::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        cu(i, i) = std::conj(covers[u][i]);
    }
    return r_pilot[u] * cu * g_inv * y;
}

CMat antenna_mmse(const CMat& h, const CMat& r_s, double noise_var)
{
    const Index m = r_s.rows();
    CMat a = r_s;
    const double eps = loading_of(r_s.trace().real(), m);
    for (Index i = 0; i < m; ++i) {
        a(i, i) += noise_var + eps;
    }
    const CMat w = r_s * a.fullPivLu().inverse();
    CMat out(h.rows(), h.cols());
    for (Index r = 0; r < h.rows(); ++r) {
        out.row(r) = (w * h.row(r).transpose()).transpose();
    }
    return out;
}

CMat dense_solve(const CMat& a, const CMat& b)
{
    return a.partialPivLu().solve(b);
}

} // namespace scsice::reference
