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
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "csv_util.hpp"
#include "scsice/channel_scene.hpp"
#include "scsice/parallel.hpp"

namespace scsice
{

CVec steering_delay(double tau, Index n, double delta_f)
{
    CVec b(n);
    const double w = -2.0 * kPi * delta_f * tau;
    for (Index k = 0; k < n; ++k) {
        b[k] = std::polar(1.0, w * static_cast<double>(k));
    }
    return b;
}

CVec steering_vertical(double theta, int m_v)
{
    CVec a(m_v);
    const double w = -kPi * std::cos(theta);
    for (int k = 0; k < m_v; ++k) {
        a[k] = std::polar(1.0, w * k);
    }
    return a;
}

CVec steering_horizontal(double theta, double phi, int m_h)
{
    CVec a(m_h);
    const double w = -kPi * std::sin(theta) * std::cos(phi);
    for (int k = 0; k < m_h; ++k) {
        a[k] = std::polar(1.0, w * k);
    }
    return a;
}

CVec steering_antenna(double theta, double phi, int m_v, int m_h)
{
    const CVec av = steering_vertical(theta, m_v);
    const CVec ah = steering_horizontal(theta, phi, m_h);
    CVec a(static_cast<Index>(m_v) * m_h);
    for (int i = 0; i < m_v; ++i) {
        a.segment(static_cast<Index>(i) * m_h, m_h) = av[i] * ah;
    }
    return a;
}

ChannelMatrix synth_channel(const PathSet& paths, Index n_sc, const SystemConfig& cfg)
{
    if (!paths.has_gains()) {
        throw ConfigError("synth_channel needs one gain per path");
    }
    const Index L = static_cast<Index>(paths.size());
    const Index M = cfg.antennas();
    CMat delay(n_sc, L);
    CMat space(M, L);
    for (Index l = 0; l < L; ++l) {
        const auto& p = paths.paths[static_cast<std::size_t>(l)];
        delay.col(l) = steering_delay(p.tau, n_sc, cfg.delta_f) * paths.gains[static_cast<std::size_t>(l)];
        space.col(l) = steering_antenna(p.theta, p.phi, cfg.m_v, cfg.m_h);
    }

    ChannelMatrix h(n_sc, M);
    constexpr Index chunk = 64;
    const Index blocks = (n_sc + chunk - 1) / chunk;
    parallel_for(blocks, [&](std::ptrdiff_t b) {
        const Index r0 = b * chunk;
        const Index rows = std::min(chunk, n_sc - r0);
        h.middleRows(r0, rows).noalias() = delay.middleRows(r0, rows) * space.transpose();
    });
    return h;
}

GainModel parse_gain_model(const std::string& s)
{
    if (s == "rayleigh") {
        return GainModel::rayleigh;
    }
    if (s == "phase") {
        return GainModel::phase;
    }
    throw ConfigError("gain model must be rayleigh or phase, got '" + s + "'");
}

std::string to_string(GainModel m)
{
    return m == GainModel::rayleigh ? "rayleigh" : "phase";
}

std::vector<Complex> draw_gains(const PathSet& paths, Rng& rng, GainModel model)
{
    std::vector<Complex> g;
    g.reserve(paths.size());
    for (const auto& p : paths.paths) {
        if (p.rho < 0.0) {
            throw ConfigError("path power must be non-negative");
        }
        // Draw unconditionally so the stream does not depend on zero powers.
        const Complex x = model == GainModel::rayleigh ? rng.complex_normal(1.0)
                                                       : std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
        g.push_back(p.rho == 0.0 ? Complex{0.0, 0.0} : std::sqrt(p.rho) * x);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Scene generation

void SceneParams::validate() const
{
    if (paths < 1) {
        throw ConfigError("a scene needs at least one path");
    }
    if (grids < 1 || !(grid_size > 0.0)) {
        throw ConfigError("scene needs grids >= 1 and grid_size > 0");
    }
    if (!(delay_spread >= 0.0) || !(corr_length > 0.0) || !(variation >= 0.0)) {
        throw ConfigError("delay_spread, corr_length and variation must be non-negative");
    }
    if (!(0.0 < theta_min && theta_min <= theta_max && theta_max < kPi) ||
        !(0.0 < phi_min && phi_min <= phi_max && phi_max < kPi)) {
        throw ConfigError("angle ranges must lie inside (0, pi)");
    }
    if (subpaths < 1) {
        throw ConfigError("subpaths must be >= 1");
    }
}

namespace
{
constexpr int kAxes = 4; // tau, theta, phi, power

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double clamp_open(double v, double lo, double hi) { return std::clamp(v, lo, hi); }
} // namespace

SceneField::SceneField(const SceneParams& params, const GridGeometry& geom, Rng& rng)
    : params_(params), geom_(geom)
{
    const int L = params.paths;
    base_.resize(static_cast<std::size_t>(L));
    for (auto& p : base_) {
        p.tau = rng.uniform(0.0, params.delay_spread);
        p.theta = rng.uniform(params.theta_min, params.theta_max);
        p.phi = rng.uniform(params.phi_min, params.phi_max);
        p.rho = -rng.uniform(0.0, params.power_range_db);
    }

    lattice_nx_ = static_cast<int>(std::ceil(geom.width() / params.corr_length)) + 2;
    lattice_ny_ = static_cast<int>(std::ceil(geom.height() / params.corr_length)) + 2;
    lattice_.resize(static_cast<std::size_t>(L) * kAxes * lattice_nx_ * lattice_ny_);
    for (auto& v : lattice_) {
        v = rng.uniform(-1.0, 1.0);
    }

    offsets_.resize(static_cast<std::size_t>(L) * params.subpaths);
    for (auto& o : offsets_) {
        if (params.subpaths > 1) {
            o.tau = rng.uniform(-1.0, 1.0) * params.cluster_delay_spread;
            o.theta = rng.uniform(-1.0, 1.0) * params.cluster_angle_spread;
            o.phi = rng.uniform(-1.0, 1.0) * params.cluster_angle_spread;
        }
    }
}

double SceneField::field(int path, int axis, Point q) const
{
    const double fx = std::max(0.0, (q.x - geom_.origin_x) / params_.corr_length);
    const double fy = std::max(0.0, (q.y - geom_.origin_y) / params_.corr_length);
    const int ix = std::min(static_cast<int>(fx), lattice_nx_ - 2);
    const int iy = std::min(static_cast<int>(fy), lattice_ny_ - 2);
    const double tx = smoothstep(std::clamp(fx - ix, 0.0, 1.0));
    const double ty = smoothstep(std::clamp(fy - iy, 0.0, 1.0));
    const std::size_t base = (static_cast<std::size_t>(path) * kAxes + axis) * lattice_nx_ * lattice_ny_;
    auto at = [&](int x, int y) { return lattice_[base + static_cast<std::size_t>(y) * lattice_nx_ + x]; };
    const double top = (1 - tx) * at(ix, iy) + tx * at(ix + 1, iy);
    const double bot = (1 - tx) * at(ix, iy + 1) + tx * at(ix + 1, iy + 1);
    return (1 - ty) * top + ty * bot;
}

PathSet SceneField::effective_paths(Point q) const
{
    const auto& P = params_;
    const double v = P.variation;
    PathSet out;
    out.paths.resize(base_.size());
    double total = 0.0;
    for (int l = 0; l < path_count(); ++l) {
        const auto& b = base_[static_cast<std::size_t>(l)];
        auto& p = out.paths[static_cast<std::size_t>(l)];
        p.tau = std::max(0.0, b.tau + v * P.delay_spread * field(l, 0, q));
        p.theta = clamp_open(b.theta + v * (P.theta_max - P.theta_min) * field(l, 1, q), P.theta_min, P.theta_max);
        p.phi = clamp_open(b.phi + v * (P.phi_max - P.phi_min) * field(l, 2, q), P.phi_min, P.phi_max);
        p.rho = std::pow(10.0, (b.rho + v * P.power_range_db * field(l, 3, q)) / 10.0);
        total += p.rho;
    }
    for (auto& p : out.paths) {
        p.rho /= total;
    }
    return out;
}

PathSet SceneField::subpaths(Point q) const
{
    const PathSet centres = effective_paths(q);
    const int S = params_.subpaths;
    if (S == 1) {
        return centres;
    }
    PathSet out;
    out.paths.reserve(centres.size() * static_cast<std::size_t>(S));
    // Rays may leave the configured angle window but stay inside (0, pi).
    constexpr double eps = 1e-6;
    for (std::size_t l = 0; l < centres.size(); ++l) {
        const auto& c = centres.paths[l];
        for (int s = 0; s < S; ++s) {
            const auto& o = offsets_[l * static_cast<std::size_t>(S) + static_cast<std::size_t>(s)];
            PathParams r;
            r.tau = std::max(0.0, c.tau + o.tau);
            r.theta = std::clamp(c.theta + o.theta, eps, kPi - eps);
            r.phi = std::clamp(c.phi + o.phi, eps, kPi - eps);
            r.rho = c.rho / S;
            out.paths.push_back(r);
        }
    }
    return out;
}

int GridScene::lbar() const
{
    std::size_t m = 0;
    for (const auto& g : grids) {
        m = std::max(m, g.size());
    }
    return static_cast<int>(m);
}

PathSet GridScene::paths_at(Point q) const
{
    if (field) {
        return field->subpaths(q);
    }
    return grids.at(static_cast<std::size_t>(grid_of_location(q, geometry)));
}

bool well_separated(const PathSet& ps, const SeparationDims& dims, double delta_f)
{
    auto h = [](const PathParams& p) { return std::sin(p.theta) * std::cos(p.phi); };
    for (std::size_t i = 0; i < ps.size(); ++i) {
        for (std::size_t j = i + 1; j < ps.size(); ++j) {
            const auto& a = ps.paths[i];
            const auto& b = ps.paths[j];
            if (dims.delay > 0 && delta_f * std::abs(a.tau - b.tau) < 0.5 / dims.delay) {
                return false;
            }
            if (dims.vertical > 0 && std::abs(std::cos(a.theta) - std::cos(b.theta)) < 0.5 / dims.vertical) {
                return false;
            }
            if (dims.horizontal > 0 && std::abs(h(a) - h(b)) < 0.5 / dims.horizontal) {
                return false;
            }
        }
    }
    return true;
}

GridScene generate_scene(const SceneParams& params, std::uint64_t seed)
{
    params.validate();
    GridScene scene;
    scene.geometry = GridGeometry::square_layout(params.grids, params.grid_size, params.origin_x, params.origin_y);
    Rng rng(seed);
    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        SceneField field(params, scene.geometry, rng);
        std::vector<PathSet> grids;
        grids.reserve(static_cast<std::size_t>(scene.geometry.count()));
        bool ok = true;
        for (int g = 0; g < scene.geometry.count() && ok; ++g) {
            grids.push_back(field.effective_paths(scene.geometry.center(g)));
            ok = well_separated(grids.back(), params.separation, params.delta_f);
        }
        if (ok) {
            scene.grids = std::move(grids);
            scene.field = std::move(field);
            return scene;
        }
    }
    throw ConfigError("could not place " + std::to_string(params.paths) +
                      " paths with the requested minimum separation");
}

Point sample_in_grid(const GridGeometry& geom, int g, Rng& rng)
{
    const Point c = geom.center(g);
    return {c.x + rng.uniform(-0.5, 0.5) * geom.d, c.y + rng.uniform(-0.5, 0.5) * geom.d};
}

// ---------------------------------------------------------------------------
// CSV

void write_scene_csv(const GridScene& scene, std::ostream& os)
{
    const auto& g = scene.geometry;
    os << std::setprecision(17);
    os << "#scene v1, d=" << g.d << ", U=" << scene.count() << ", Lbar=" << scene.lbar() << "\n";
    os << "#geometry cols=" << g.cols << ", rows=" << g.rows << ", origin_x=" << g.origin_x
       << ", origin_y=" << g.origin_y << "\n";
    os << "grid_id,l,tau_s,theta_rad,phi_rad,rho\n";
    for (int id = 0; id < scene.count(); ++id) {
        const auto& ps = scene.grids[static_cast<std::size_t>(id)];
        for (std::size_t l = 0; l < ps.size(); ++l) {
            const auto& p = ps.paths[l];
            os << id << ',' << l << ',' << p.tau << ',' << p.theta << ',' << p.phi << ',' << p.rho << "\n";
        }
    }
}

GridScene read_scene_csv(std::istream& is)
{
    GridScene scene;
    std::string line;
    if (!std::getline(is, line) || line.rfind("#scene v1", 0) != 0) {
        throw ConfigError("not a '#scene v1' file");
    }
    const auto head = detail::parse_header_fields(line);
    const int u = detail::header_int(head, "U");
    scene.geometry = GridGeometry::square_layout(u, detail::header_double(head, "d"));
    auto records = detail::read_path_rows(is, scene.geometry, line);
    scene.grids = std::move(records);
    if (scene.count() != u) {
        throw ConfigError("scene file declares U=" + std::to_string(u) + " but holds " +
                          std::to_string(scene.count()) + " grids");
    }
    return scene;
}

} // namespace scsice
