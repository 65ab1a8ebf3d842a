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

#ifndef SCSICE_GEOMETRY_HPP
#define SCSICE_GEOMETRY_HPP

#include <stdexcept>

namespace scsice
{

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

/// Thrown by location lookups outside the covered rectangle.
class OutOfCoverage : public std::out_of_range
{
  public:
    using std::out_of_range::out_of_range;
};

/// Rectangular tiling of the coverage area into `cols x rows` square cells
/// of side `d`. Grid ids are row-major: id = row * cols + col.
struct GridGeometry
{
    double origin_x = 0.0;
    double origin_y = 0.0;
    double d = 2.0;
    int cols = 1;
    int rows = 1;

    int count() const { return cols * rows; }
    double width() const { return d * cols; }
    double height() const { return d * rows; }
    Point center(int grid_id) const;
    bool contains(Point q) const;
    void validate() const;

    /// Near-square layout with exactly `u` cells (cols is the smallest
    /// divisor of u that is >= sqrt(u)).
    static GridGeometry square_layout(int u, double d, double origin_x = 0.0, double origin_y = 0.0);
};

/// Maps a location to its grid id. Cells are half-open [c*d, (c+1)*d); points
/// on the far outer edge belong to the last cell.
int grid_of_location(Point q, const GridGeometry& geom);

} // namespace scsice

#endif // SCSICE_GEOMETRY_HPP
