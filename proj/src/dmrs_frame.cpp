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
#include <iomanip>
#include <ostream>
#include <string>

#include "scsice/dmrs_frame.hpp"
#include "scsice/interpolation.hpp"
#include "scsice/parallel.hpp"

namespace scsice
{

std::vector<int> pilot_subcarrier_set(int group, int n_c)
{
    if (group < 0 || group >= 3) {
        throw ConfigError("CDM group must be in [0, 3)");
    }
    if (n_c <= 0 || n_c % 6 != 0) {
        throw ConfigError("n_c must be a positive multiple of 6");
    }
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(n_c / 3));
    for (int n = 0; n < n_c / 6; ++n) {
        idx.push_back(6 * n + 2 * group);
        idx.push_back(6 * n + 2 * group + 1);
    }
    return idx;
}

CVec freq_occ_diag(int cyclic_shift, int n_pilot)
{
    const bool quarter_ok = n_pilot % 4 == 0;
    const bool valid = cyclic_shift == 0 || (n_pilot % 2 == 0 && cyclic_shift == n_pilot / 2) ||
                       (quarter_ok && (cyclic_shift == n_pilot / 4 || cyclic_shift == 3 * n_pilot / 4));
    if (!valid) {
        throw ConfigError("cyclic shift " + std::to_string(cyclic_shift) + " not in {0, N/4, N/2, 3N/4}");
    }
    CVec c(n_pilot);
    // Reduce n*shift modulo N before scaling so quarter-turn phases are exact.
    for (int n = 0; n < n_pilot; ++n) {
        const long long r = (static_cast<long long>(n) * cyclic_shift) % n_pilot;
        const long long q4 = 4 * r;
        if (q4 % n_pilot == 0) {
            static const Complex quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
            c[n] = quarter[(q4 / n_pilot) % 4];
        } else {
            c[n] = std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / n_pilot);
        }
    }
    return c;
}

std::vector<DmrsAllocation> assign_allocations(const SystemConfig& cfg)
{
    cfg.validate();
    const int per_group = cfg.users_per_group();
    const int per_set = cfg.users_per_set();
    if (per_set > 4) {
        throw ConfigError("more than 4 users per OCC set: no free cyclic shifts");
    }
    const int N = cfg.n_pilot();
    if (per_set > 1 && N % 4 != 0) {
        throw ConfigError("sharing an OCC set needs N divisible by 4");
    }
    std::vector<DmrsAllocation> out;
    out.reserve(static_cast<std::size_t>(cfg.k_users));
    for (int k = 0; k < cfg.k_users; ++k) {
        DmrsAllocation a;
        a.user = k;
        a.group = k / per_group;
        const int local = k % per_group;
        a.occ_set = local < per_set ? 0 : 1;
        a.cyclic_shift = (local % per_set) * N / 4;
        a.time_occ = a.occ_set == 0 ? std::vector<int>{1, 1} : std::vector<int>{1, -1};
        out.push_back(std::move(a));
    }
    return out;
}

double time_occ_correlation(const DmrsAllocation& p, const DmrsAllocation& q)
{
    if (p.time_occ.size() != q.time_occ.size() || p.time_occ.empty()) {
        throw ConfigError("time covers of different length");
    }
    int s = 0;
    for (std::size_t t = 0; t < p.time_occ.size(); ++t) {
        s += p.time_occ[t] * q.time_occ[t];
    }
    return static_cast<double>(s) / static_cast<double>(p.time_occ.size());
}

std::vector<int> users_in_set(const std::vector<DmrsAllocation>& allocs, int group, int occ_set)
{
    std::vector<int> out;
    for (std::size_t k = 0; k < allocs.size(); ++k) {
        if (allocs[k].group == group && allocs[k].occ_set == occ_set) {
            out.push_back(static_cast<int>(k));
        }
    }
    return out;
}

std::vector<CVec> make_pilot_sequences(const SystemConfig& cfg, Rng& rng)
{
    std::vector<CVec> out;
    for (int i = 0; i < cfg.g_groups; ++i) {
        CVec s(cfg.n_pilot());
        for (Index n = 0; n < s.size(); ++n) {
            s[n] = rng.qpsk();
        }
        out.push_back(std::move(s));
    }
    return out;
}

CMat select_subcarriers(const CMat& h, const std::vector<int>& indices)
{
    CMat out(static_cast<Index>(indices.size()), h.cols());
    for (std::size_t n = 0; n < indices.size(); ++n) {
        out.row(static_cast<Index>(n)) = h.row(indices[n]);
    }
    return out;
}

PilotGrid synth_received(const std::vector<std::vector<CMat>>& channels,
                         const std::vector<DmrsAllocation>& allocs,
                         const std::vector<CVec>& pilots,
                         double noise_var,
                         const SystemConfig& cfg,
                         Rng& rng)
{
    if (channels.size() != allocs.size()) {
        throw ConfigError("one channel list per allocation required");
    }
    if (static_cast<int>(pilots.size()) != cfg.g_groups) {
        throw ConfigError("one pilot sequence per CDM group required");
    }
    const int N = cfg.n_pilot();
    const Index M = cfg.antennas();
    PilotGrid grid;
    grid.groups.resize(static_cast<std::size_t>(cfg.g_groups));
    for (int i = 0; i < cfg.g_groups; ++i) {
        auto& gs = grid.groups[static_cast<std::size_t>(i)];
        gs.indices = pilot_subcarrier_set(i, cfg.n_c);
        gs.pilot = pilots[static_cast<std::size_t>(i)];
        gs.rx.assign(static_cast<std::size_t>(cfg.t_p), CMat::Zero(N, M));
    }
    for (std::size_t k = 0; k < allocs.size(); ++k) {
        if (static_cast<int>(channels[k].size()) != cfg.t_p) {
            throw ConfigError("channels must cover every pilot symbol");
        }
    }

    parallel_for(cfg.g_groups, [&](std::ptrdiff_t i) {
        auto& gs = grid.groups[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < allocs.size(); ++k) {
            const auto& a = allocs[k];
            if (a.group != i) {
                continue;
            }
            const CVec code = gs.pilot.cwiseProduct(freq_occ_diag(a.cyclic_shift, N));
            for (int t = 0; t < cfg.t_p; ++t) {
                const CMat hp = select_subcarriers(channels[k][static_cast<std::size_t>(t)], gs.indices);
                gs.rx[static_cast<std::size_t>(t)] +=
                    static_cast<double>(a.time_occ[static_cast<std::size_t>(t)]) * (code.asDiagonal() * hp);
            }
        }
    });

    if (noise_var > 0.0) {
        for (auto& gs : grid.groups) {
            for (auto& y : gs.rx) {
                for (Index r = 0; r < y.rows(); ++r) {
                    for (Index c = 0; c < y.cols(); ++c) {
                        y(r, c) += rng.complex_normal(noise_var);
                    }
                }
            }
        }
    }
    return grid;
}

CMat ls_depilot(const CMat& y, const CVec& pilot)
{
    if (y.rows() != pilot.size()) {
        throw ConfigError("ls_depilot: pilot length mismatch");
    }
    return pilot.conjugate().asDiagonal() * y;
}

CMat time_occ_decouple(const std::vector<CMat>& y_ls, const std::vector<int>& time_occ)
{
    if (y_ls.empty() || y_ls.size() != time_occ.size()) {
        throw ConfigError("time_occ_decouple: one sign per symbol required");
    }
    CMat out = CMat::Zero(y_ls.front().rows(), y_ls.front().cols());
    for (std::size_t t = 0; t < y_ls.size(); ++t) {
        out += static_cast<double>(time_occ[t]) * y_ls[t];
    }
    return out / static_cast<double>(y_ls.size());
}

int despread_block(const std::vector<DmrsAllocation>& allocs, const std::vector<int>& set_users, int n_pilot)
{
    for (int w : {2, 4}) {
        if (n_pilot % w != 0) {
            continue;
        }
        bool orthogonal = true;
        for (std::size_t a = 0; a < set_users.size() && orthogonal; ++a) {
            for (std::size_t b = a + 1; b < set_users.size() && orthogonal; ++b) {
                const int d = allocs[static_cast<std::size_t>(set_users[a])].cyclic_shift -
                              allocs[static_cast<std::size_t>(set_users[b])].cyclic_shift;
                Complex s{0.0, 0.0};
                for (int n = 0; n < w; ++n) {
                    s += std::polar(1.0, 2.0 * kPi * n * d / n_pilot);
                }
                orthogonal = std::abs(s) < 1e-9;
            }
        }
        if (orthogonal) {
            return w;
        }
    }
    throw ConfigError("cyclic shifts of an OCC set are not separable by a 2- or 4-entry despreader");
}

std::vector<CMat> trivial_estimate(const PilotGrid& grid, const std::vector<DmrsAllocation>& allocs,
                                   const SystemConfig& cfg)
{
    const int N = cfg.n_pilot();
    std::vector<CMat> out(allocs.size());
    for (int i = 0; i < static_cast<int>(grid.groups.size()); ++i) {
        const auto& gs = grid.groups[static_cast<std::size_t>(i)];
        std::vector<CMat> y_ls;
        for (const auto& y : gs.rx) {
            y_ls.push_back(ls_depilot(y, gs.pilot));
        }
        for (int set = 0; set < 2; ++set) {
            const auto members = users_in_set(allocs, i, set);
            if (members.empty()) {
                continue;
            }
            const int block = despread_block(allocs, members, N);
            const CMat y = time_occ_decouple(y_ls, allocs[static_cast<std::size_t>(members.front())].time_occ);
            const int nb = N / block;
            std::vector<double> pos(static_cast<std::size_t>(nb));
            for (int b = 0; b < nb; ++b) {
                double s = 0.0;
                for (int n = 0; n < block; ++n) {
                    s += gs.indices[static_cast<std::size_t>(b * block + n)];
                }
                pos[static_cast<std::size_t>(b)] = s / block;
            }
            for (int u : members) {
                const CVec c = freq_occ_diag(allocs[static_cast<std::size_t>(u)].cyclic_shift, N);
                const CMat z = c.conjugate().asDiagonal() * y;
                CMat blocks(nb, z.cols());
                for (int b = 0; b < nb; ++b) {
                    blocks.row(b) = z.middleRows(static_cast<Index>(b) * block, block).colwise().mean();
                }
                out[static_cast<std::size_t>(u)] = interpolate_rows(blocks, pos, cfg.n_c);
            }
        }
    }
    return out;
}

void write_received_csv(const PilotGrid& grid, std::ostream& os)
{
    os << std::setprecision(17) << "#received v1, groups=" << grid.groups.size() << "\n";
    os << "group,t,subcarrier,antenna,re,im\n";
    for (std::size_t i = 0; i < grid.groups.size(); ++i) {
        const auto& gs = grid.groups[i];
        for (std::size_t t = 0; t < gs.rx.size(); ++t) {
            const auto& y = gs.rx[t];
            for (Index r = 0; r < y.rows(); ++r) {
                for (Index c = 0; c < y.cols(); ++c) {
                    os << i << ',' << t << ',' << gs.indices[static_cast<std::size_t>(r)] << ',' << c << ','
                       << y(r, c).real() << ',' << y(r, c).imag() << "\n";
                }
            }
        }
    }
}

} // namespace scsice
