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

#include "scsice/interpolation.hpp"

namespace scsice
{

CMat interpolate_rows(const CMat& values, const std::vector<double>& positions, Index n_out)
{
    const Index n = values.rows();
    if (n == 0 || static_cast<Index>(positions.size()) != n) {
        throw ConfigError("interpolate_rows: one position per row required");
    }
    for (Index i = 1; i < n; ++i) {
        if (!(positions[static_cast<std::size_t>(i)] > positions[static_cast<std::size_t>(i - 1)])) {
            throw ConfigError("interpolate_rows: positions must be strictly increasing");
        }
    }
    CMat out(n_out, values.cols());
    Index seg = 0;
    for (Index r = 0; r < n_out; ++r) {
        const double x = static_cast<double>(r);
        if (x <= positions.front()) {
            out.row(r) = values.row(0);
            continue;
        }
        if (x >= positions.back()) {
            out.row(r) = values.row(n - 1);
            continue;
        }
        while (positions[static_cast<std::size_t>(seg + 1)] < x) {
            ++seg;
        }
        const double x0 = positions[static_cast<std::size_t>(seg)];
        const double x1 = positions[static_cast<std::size_t>(seg + 1)];
        const double t = (x - x0) / (x1 - x0);
        out.row(r) = (1.0 - t) * values.row(seg) + t * values.row(seg + 1);
    }
    return out;
}

CMat interpolate_to_full(const CMat& pilot_segment, const std::vector<int>& indices, Index n_c)
{
    std::vector<double> pos(indices.begin(), indices.end());
    return interpolate_rows(pilot_segment, pos, n_c);
}

} // namespace scsice
