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

#ifndef SCSICE_REFERENCE_HPP
#define SCSICE_REFERENCE_HPP

#include <vector>

#include "scsice/dmrs_frame.hpp"
#include "scsice/estimators.hpp"
#include "scsice/types.hpp"

/// Serial, entry-by-entry implementations of the hot kernels. They share no
/// code with the optimized paths and serve as test oracles and benchmark
/// baselines.
namespace scsice::reference
{

ChannelMatrix synth_channel(const PathSet& paths, Index n_sc, const SystemConfig& cfg);

ScsiCorrelations build_correlations(const PathSet& paths, const SystemConfig& cfg);

/// Noiseless received pilot blocks, one n_pilot x M matrix per group and
/// pilot symbol.
PilotGrid synth_received(const std::vector<std::vector<CMat>>& channels,
                         const std::vector<DmrsAllocation>& allocs,
                         const std::vector<CVec>& pilots,
                         const SystemConfig& cfg);

/// R_u C_u^H (sum_k C_k R_k C_k^H + (sigma^2 + eps) I)^{-1} y through an
/// explicit inverse, with eps = 1e-10 * sum_k tr(R_k) / N.
CMat freq_mmse(const CMat& y,
               std::size_t u,
               const std::vector<CMat>& r_pilot,
               const std::vector<CVec>& covers,
               double noise_var);

/// Row-wise R_s (R_s + (sigma^2 + eps) I)^{-1} h with eps = 1e-10 tr(R_s) / M.
CMat antenna_mmse(const CMat& h, const CMat& r_s, double noise_var);

/// Dense Hermitian solve through a pivoted LU of the full matrix.
CMat dense_solve(const CMat& a, const CMat& b);

} // namespace scsice::reference

#endif // SCSICE_REFERENCE_HPP
