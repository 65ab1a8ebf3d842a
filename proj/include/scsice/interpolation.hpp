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

#ifndef SCSICE_INTERPOLATION_HPP
#define SCSICE_INTERPOLATION_HPP

#include <vector>

#include "scsice/types.hpp"

namespace scsice
{

/// Column-wise piecewise-linear interpolation of `values` (one row per
/// sample position, positions strictly increasing) onto rows 0..n_out-1.
/// Rows before the first / after the last position hold the end values.
CMat interpolate_rows(const CMat& values, const std::vector<double>& positions, Index n_out);

/// Interpolates a pilot-segment channel (rows at `indices`) to all `n_c`
/// subcarriers.
CMat interpolate_to_full(const CMat& pilot_segment, const std::vector<int>& indices, Index n_c);

} // namespace scsice

#endif // SCSICE_INTERPOLATION_HPP
