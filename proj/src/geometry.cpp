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
#include <cmath>
#include <string>

#include "scsice/geometry.hpp"
#include "scsice/types.hpp"

namespace scsice
{

Point GridGeometry::center(int grid_id) const
{
    if (grid_id < 0 || grid_id >= count()) {
        throw OutOfCoverage("grid id " + std::to_string(grid_id) + " outside [0, " +
                            std::to_string(count()) + ")");
    }
    const int col = grid_id % cols;
    const int row = grid_id / cols;
    return {origin_x + (col + 0.5) * d, origin_y + (row + 0.5) * d};
}

bool GridGeometry::contains(Point q) const
{
    const double dx = q.x - origin_x;
    const double dy = q.y - origin_y;
    return std::isfinite(dx) && std::isfinite(dy) && dx >= 0.0 && dy >= 0.0 && dx <= width() &&
           dy <= height();
}

void GridGeometry::validate() const
{
    if (!(d > 0.0)) {
        throw ConfigError("grid size d must be positive");
    }
    if (cols < 1 || rows < 1) {
        throw ConfigError("grid layout needs at least one column and one row");
    }
}

GridGeometry GridGeometry::square_layout(int u, double d, double origin_x, double origin_y)
{
    if (u < 1) {
        throw ConfigError("grid count must be >= 1");
    }
    int cols = u;
    for (int c = 1; c <= u; ++c) {
        if (u % c == 0 && c * c >= u) {
            cols = c;
            break;
        }
    }
    GridGeometry g{origin_x, origin_y, d, cols, u / cols};
    g.validate();
    return g;
}

int grid_of_location(Point q, const GridGeometry& geom)
{
    if (!geom.contains(q)) {
        throw OutOfCoverage("location (" + std::to_string(q.x) + ", " + std::to_string(q.y) +
                            ") outside coverage");
    }
    int col = static_cast<int>(std::floor((q.x - geom.origin_x) / geom.d));
    int row = static_cast<int>(std::floor((q.y - geom.origin_y) / geom.d));
    col = std::min(col, geom.cols - 1);
    row = std::min(row, geom.rows - 1);
    return row * geom.cols + col;
}

} // namespace scsice
