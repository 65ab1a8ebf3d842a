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

#ifndef SCSICE_METRICS_HPP
#define SCSICE_METRICS_HPP

#include <vector>

#include "scsice/types.hpp"

namespace scsice
{

inline constexpr double kDbFloor = -200.0;

double to_db(double linear);

struct NmseResult
{
    double db = 0.0;
    int used = 0;
    int skipped = 0; // zero-norm truths
};

/// Mean over (k, t) of 10 log10(|H^ - H|_F^2 / |H|_F^2); each term floored
/// at kDbFloor.
NmseResult nmse(const std::vector<CMat>& estimates, const std::vector<CMat>& truths);

/// (1/dim) Re tr(R - R R~ (R~ + sigma^2 I)^-1), trace argument symmetrized.
double mmse_mismatch_error(const CMat& r_ideal, const CMat& r_db, double noise_var);

struct ScsiAccuracy
{
    double e_f = 0.0;
    double e_s = 0.0;
    double db = 0.0; // 10 log10((e_f + e_s) / 2)
};

ScsiAccuracy scsi_accuracy(const CMat& r_f_db, const CMat& r_s_db, const CMat& r_f, const CMat& r_s,
                           double noise_var = 1e-3);

} // namespace scsice

#endif // SCSICE_METRICS_HPP
