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

#ifndef SCSICE_DMRS_FRAME_HPP
#define SCSICE_DMRS_FRAME_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "scsice/rng.hpp"
#include "scsice/types.hpp"

namespace scsice
{

/// Pilot port of one user: CDM group, OCC set, cyclic shift and time cover.
struct DmrsAllocation
{
    int user = 0;
    int group = 0;      // CDM group i in [0, G)
    int occ_set = 0;    // 0 -> first set (signs +,+), 1 -> second set (+,-)
    int cyclic_shift = 0;
    std::vector<int> time_occ; // w_{t,k}, one sign per pilot symbol
};

/// Pilot subcarriers of one CDM group together with the received blocks.
struct GroupSignal
{
    std::vector<int> indices; // sorted pilot subcarrier indices (0-based)
    CVec pilot;               // unit-modulus pilot sequence s_i
    std::vector<CMat> rx;     // Y_i(t), N x M, one per pilot symbol
};

struct PilotGrid
{
    std::vector<GroupSignal> groups;
};

/// 0-based pilot subcarriers of CDM group i: {6n + 2i, 6n + 2i + 1}.
std::vector<int> pilot_subcarrier_set(int group, int n_c);

/// Diagonal of the frequency cover C_k: entry n = exp(j 2 pi n shift / N).
CVec freq_occ_diag(int cyclic_shift, int n_pilot);

/// Standard allocation: users split evenly over groups, the first half of a
/// group in the first OCC set; cyclic shifts round-robin within each set.
std::vector<DmrsAllocation> assign_allocations(const SystemConfig& cfg);

/// (1/T_p) sum_t w_{t,p} w_{t,q}; exactly 1 or 0 for valid allocations.
double time_occ_correlation(const DmrsAllocation& p, const DmrsAllocation& q);

/// Indices (into the allocation list) of the users of `group` and `occ_set`.
std::vector<int> users_in_set(const std::vector<DmrsAllocation>& allocs, int group, int occ_set);

/// Unit-modulus QPSK pilot sequences, one of length N per group.
std::vector<CVec> make_pilot_sequences(const SystemConfig& cfg, Rng& rng);

/// Received pilot blocks Y_i(t) = sum_k w_{t,k} S_i C_k P_i H_k(t) + N(t).
/// `channels[k][t]` is the n_c x M channel of user k in symbol t.
PilotGrid synth_received(const std::vector<std::vector<CMat>>& channels,
                         const std::vector<DmrsAllocation>& allocs,
                         const std::vector<CVec>& pilots,
                         double noise_var,
                         const SystemConfig& cfg,
                         Rng& rng);

/// S_i^H Y.
CMat ls_depilot(const CMat& y, const CVec& pilot);

/// (1/T_p) sum_t w_t Y_ls(t).
CMat time_occ_decouple(const std::vector<CMat>& y_ls, const std::vector<int>& time_occ);

/// Rows of `h` at the given subcarriers (P_i H).
CMat select_subcarriers(const CMat& h, const std::vector<int>& indices);

/// Baseline: LS, time-OCC removal, frequency-OCC despreading assuming a
/// channel that is flat across each despreading block, then linear
/// interpolation to n_c. Returns one n_c x M estimate per user.
std::vector<CMat> trivial_estimate(const PilotGrid& grid,
                                   const std::vector<DmrsAllocation>& allocs,
                                   const SystemConfig& cfg);

/// Length of the comb block over which the cyclic shifts of one OCC set are
/// mutually orthogonal (1, 2 or 4).
int despread_block(const std::vector<DmrsAllocation>& allocs, const std::vector<int>& set_users, int n_pilot);

/// Debug dump with columns group,t,subcarrier,antenna,re,im.
void write_received_csv(const PilotGrid& grid, std::ostream& os);

} // namespace scsice

#endif // SCSICE_DMRS_FRAME_HPP
