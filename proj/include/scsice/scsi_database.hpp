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

#ifndef SCSICE_SCSI_DATABASE_HPP
#define SCSICE_SCSI_DATABASE_HPP

#include <iosfwd>
#include <map>
#include <string>

#include "scsice/channel_scene.hpp"
#include "scsice/dmrs_frame.hpp"
#include "scsice/estimators.hpp"
#include "scsice/geometry.hpp"

namespace scsice
{

struct ScsiRecord
{
    int grid_id = 0;
    PathSet paths;
};

struct DatabaseMetadata
{
    int n_d = 0;
    int snapshots = 0;
    double snr_db = 0.0;
    std::string timestamp;
};

/// Grid-indexed store of effective-path SCSI. The number of paths may
/// differ between grids.
class ScsiDatabase
{
  public:
    ScsiDatabase() = default;
    explicit ScsiDatabase(GridGeometry geometry);

    const GridGeometry& geometry() const { return geometry_; }
    DatabaseMetadata& metadata() { return meta_; }
    const DatabaseMetadata& metadata() const { return meta_; }

    /// Inserts or replaces the record of `rec.grid_id`.
    void insert(ScsiRecord rec);
    bool contains(int grid_id) const { return records_.count(grid_id) != 0; }
    std::size_t size() const { return records_.size(); }
    /// True when every grid id of the geometry has a record.
    bool complete() const;

    /// Throws std::out_of_range when the grid has no record.
    const ScsiRecord& lookup(int grid_id) const;

    const std::map<int, ScsiRecord>& records() const { return records_; }

    void save(std::ostream& os) const;
    static ScsiDatabase load(std::istream& is);

    void save_file(const std::string& path) const;
    static ScsiDatabase load_file(const std::string& path);

  private:
    GridGeometry geometry_;
    DatabaseMetadata meta_;
    std::map<int, ScsiRecord> records_;
};

/// grid_of_location -> lookup -> build_correlations.
ScsiCorrelations correlations_for_user(const ScsiDatabase& db, Point location, const SystemConfig& cfg);

/// Per-parameter comparison of a database against a ground-truth scene
/// after greedy matching of paths within each grid.
struct ParamErrors
{
    double tau = 0.0;   // seconds
    double theta = 0.0; // radians
    double phi = 0.0;   // radians
    double rho = 0.0;   // absolute
    int path_count_mismatches = 0;
};

struct DatabaseDiff
{
    std::vector<ParamErrors> per_grid;
    ParamErrors max;
};

DatabaseDiff diff_against_scene(const ScsiDatabase& db, const GridScene& scene, double delta_f = 30e3);

/// Greedy nearest assignment of `estimate` paths to `truth` paths on the
/// generator phases; returns, for each truth path, the index into
/// `estimate` or -1.
std::vector<int> greedy_match(const PathSet& truth, const PathSet& estimate, double delta_f);

} // namespace scsice

#endif // SCSICE_SCSI_DATABASE_HPP
