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
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "csv_util.hpp"
#include "scsice/scsi_database.hpp"

namespace scsice
{

ScsiDatabase::ScsiDatabase(GridGeometry geometry) : geometry_(geometry)
{
    geometry_.validate();
}

void ScsiDatabase::insert(ScsiRecord rec)
{
    if (rec.grid_id < 0 || rec.grid_id >= geometry_.count()) {
        throw ConfigError("grid id " + std::to_string(rec.grid_id) + " outside the database geometry");
    }
    if (rec.paths.size() == 0) {
        throw ConfigError("a database record needs at least one path");
    }
    for (const auto& p : rec.paths.paths) {
        if (!(p.rho >= 0.0) || !(p.tau >= 0.0) || !(p.theta > 0.0 && p.theta < kPi) || !(p.phi > 0.0 && p.phi < kPi)) {
            throw ConfigError("record of grid " + std::to_string(rec.grid_id) + " violates parameter ranges");
        }
    }
    rec.paths.gains.clear();
    records_[rec.grid_id] = std::move(rec);
}

bool ScsiDatabase::complete() const
{
    return static_cast<int>(records_.size()) == geometry_.count();
}

const ScsiRecord& ScsiDatabase::lookup(int grid_id) const
{
    const auto it = records_.find(grid_id);
    if (it == records_.end()) {
        throw std::out_of_range("no SCSI record for grid " + std::to_string(grid_id));
    }
    return it->second;
}

void ScsiDatabase::save(std::ostream& os) const
{
    std::size_t lbar = 0;
    for (const auto& [id, rec] : records_) {
        lbar = std::max(lbar, rec.paths.size());
    }
    const auto& g = geometry_;
    os << std::setprecision(17);
    os << "#scsidb v1, d=" << g.d << ", U=" << g.count() << ", Lbar=" << lbar << ", n_d=" << meta_.n_d
       << ", W=" << meta_.snapshots << ", snr_db=" << meta_.snr_db
       << ", timestamp=" << (meta_.timestamp.empty() ? "-" : meta_.timestamp) << "\n";
    os << "#geometry cols=" << g.cols << ", rows=" << g.rows << ", origin_x=" << g.origin_x
       << ", origin_y=" << g.origin_y << "\n";
    os << "grid_id,l,tau_s,theta_rad,phi_rad,rho\n";
    for (const auto& [id, rec] : records_) {
        for (std::size_t l = 0; l < rec.paths.size(); ++l) {
            const auto& p = rec.paths.paths[l];
            os << id << ',' << l << ',' << p.tau << ',' << p.theta << ',' << p.phi << ',' << p.rho << "\n";
        }
    }
}

ScsiDatabase ScsiDatabase::load(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("#scsidb v1", 0) != 0) {
        throw ConfigError("not a '#scsidb v1' file");
    }
    const auto head = detail::parse_header_fields(line);
    const int u = detail::header_int(head, "U");
    GridGeometry geom = GridGeometry::square_layout(u, detail::header_double(head, "d"));
    auto grids = detail::read_path_rows(is, geom, line, false);
    ScsiDatabase db(geom);
    db.meta_.n_d = head.count("n_d") ? detail::header_int(head, "n_d") : 0;
    db.meta_.snapshots = head.count("W") ? detail::header_int(head, "W") : 0;
    db.meta_.snr_db = head.count("snr_db") ? detail::header_double(head, "snr_db") : 0.0;
    db.meta_.timestamp = detail::header_string(head, "timestamp", "-");
    for (std::size_t g = 0; g < grids.size(); ++g) {
        if (grids[g].size() > 0) {
            db.insert({static_cast<int>(g), std::move(grids[g])});
        }
    }
    return db;
}

void ScsiDatabase::save_file(const std::string& path) const
{
    std::ofstream os(path);
    if (!os) {
        throw ConfigError("cannot write '" + path + "'");
    }
    save(os);
}

ScsiDatabase ScsiDatabase::load_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open '" + path + "'");
    }
    return load(is);
}

ScsiCorrelations correlations_for_user(const ScsiDatabase& db, Point location, const SystemConfig& cfg)
{
    return build_correlations(db.lookup(grid_of_location(location, db.geometry())).paths, cfg);
}

namespace
{
double wrap(double x)
{
    return std::remainder(x, 2.0 * kPi);
}

double generator_distance(const PathParams& a, const PathParams& b, double delta_f)
{
    const double d1 = wrap(2.0 * kPi * delta_f * (a.tau - b.tau));
    const double d2 = wrap(kPi * (std::cos(a.theta) - std::cos(b.theta)));
    const double d3 = wrap(kPi * (std::sin(a.theta) * std::cos(a.phi) - std::sin(b.theta) * std::cos(b.phi)));
    return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
}
} // namespace

std::vector<int> greedy_match(const PathSet& truth, const PathSet& estimate, double delta_f)
{
    struct Pair
    {
        double d;
        std::size_t t;
        std::size_t e;
    };
    std::vector<Pair> pairs;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        for (std::size_t e = 0; e < estimate.size(); ++e) {
            pairs.push_back({generator_distance(truth.paths[t], estimate.paths[e], delta_f), t, e});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
    std::vector<int> match(truth.size(), -1);
    std::vector<bool> used(estimate.size(), false);
    for (const auto& p : pairs) {
        if (match[p.t] < 0 && !used[p.e]) {
            match[p.t] = static_cast<int>(p.e);
            used[p.e] = true;
        }
    }
    return match;
}

DatabaseDiff diff_against_scene(const ScsiDatabase& db, const GridScene& scene, double delta_f)
{
    if (db.geometry().count() != scene.count()) {
        throw ConfigError("database and scene have different grid counts");
    }
    DatabaseDiff out;
    out.per_grid.resize(static_cast<std::size_t>(scene.count()));
    for (int g = 0; g < scene.count(); ++g) {
        auto& e = out.per_grid[static_cast<std::size_t>(g)];
        const auto& truth = scene.grids[static_cast<std::size_t>(g)];
        if (!db.contains(g)) {
            e.path_count_mismatches = static_cast<int>(truth.size());
            e.tau = e.theta = e.phi = e.rho = std::numeric_limits<double>::infinity();
        } else {
            const auto& est = db.lookup(g).paths;
            const auto m = greedy_match(truth, est, delta_f);
            e.path_count_mismatches = std::abs(static_cast<int>(truth.size()) - static_cast<int>(est.size()));
            for (std::size_t l = 0; l < truth.size(); ++l) {
                if (m[l] < 0) {
                    continue;
                }
                const auto& a = truth.paths[l];
                const auto& b = est.paths[static_cast<std::size_t>(m[l])];
                e.tau = std::max(e.tau, std::abs(a.tau - b.tau));
                e.theta = std::max(e.theta, std::abs(a.theta - b.theta));
                e.phi = std::max(e.phi, std::abs(a.phi - b.phi));
                e.rho = std::max(e.rho, std::abs(a.rho - b.rho));
            }
        }
        out.max.tau = std::max(out.max.tau, e.tau);
        out.max.theta = std::max(out.max.theta, e.theta);
        out.max.phi = std::max(out.max.phi, e.phi);
        out.max.rho = std::max(out.max.rho, e.rho);
        out.max.path_count_mismatches += e.path_count_mismatches;
    }
    return out;
}

} // namespace scsice
