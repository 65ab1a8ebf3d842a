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

#ifndef SCSICE_CHANNEL_SCENE_HPP
#define SCSICE_CHANNEL_SCENE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scsice/geometry.hpp"
#include "scsice/rng.hpp"
#include "scsice/types.hpp"

namespace scsice
{

/// Delay steering vector, entry n = exp(-j 2 pi n delta_f tau), n = 0..n-1.
CVec steering_delay(double tau, Index n, double delta_f);

/// Vertical factor, entry n = exp(-j pi n cos(theta)).
CVec steering_vertical(double theta, int m_v);

/// Horizontal factor, entry n = exp(-j pi n sin(theta) cos(phi)).
CVec steering_horizontal(double theta, double phi, int m_h);

/// UPA response a_v(theta) (x) a_h(phi; theta); the vertical index is the
/// major (slow) index.
CVec steering_antenna(double theta, double phi, int m_v, int m_h);

/// Space-frequency channel sum_l alpha_l b(tau_l) a(phi_l, theta_l)^T on
/// `n_sc` subcarriers. Requires one gain per path.
ChannelMatrix synth_channel(const PathSet& paths, Index n_sc, const SystemConfig& cfg);

/// Distribution of per-realization path gains: complex Gaussian
/// CN(0, rho_l), or fixed modulus sqrt(rho_l) with a uniform phase.
enum class GainModel
{
    rayleigh,
    phase
};

GainModel parse_gain_model(const std::string& s);
std::string to_string(GainModel m);

/// Independent gains with E|alpha_l|^2 = rho_l, one per path.
std::vector<Complex> draw_gains(const PathSet& paths, Rng& rng, GainModel model = GainModel::rayleigh);

/// Minimum pairwise separation between effective paths, expressed as the
/// dimension each axis is resolved with; the threshold on that axis is
/// 1/(2*dim). A dimension of 0 disables the axis.
struct SeparationDims
{
    int delay = 0;      // on delta_f * |tau_i - tau_j|
    int vertical = 0;   // on |cos(theta_i) - cos(theta_j)|
    int horizontal = 0; // on |sin(theta_i)cos(phi_i) - sin(theta_j)cos(phi_j)|
};

/// Hyperparameters of the synthetic spatially consistent scene.
struct SceneParams
{
    double grid_size = 2.0;
    int grids = 16;
    double origin_x = 0.0;
    double origin_y = 0.0;
    int paths = 4;                     // effective paths (clusters) per location
    double delay_spread = 300e-9;      // base delays drawn in [0, delay_spread]
    double theta_min = kPi / 6;
    double theta_max = 5 * kPi / 6;
    double phi_min = kPi / 6;
    double phi_max = 5 * kPi / 6;
    double power_range_db = 6.0;       // base cluster powers spread over this range
    double corr_length = 50.0;         // lattice spacing of the random field, metres
    double variation = 0.05;           // field amplitude as a fraction of each range
    int subpaths = 1;                  // rays per cluster
    double cluster_delay_spread = 0.0; // seconds, half-width of ray delay offsets
    double cluster_angle_spread = 0.0; // radians, half-width of ray angle offsets
    double delta_f = 30e3;             // used by the delay separation test
    SeparationDims separation{};
    int max_attempts = 2000;

    void validate() const;
};

/// Smooth random field over the plane: per-path parameters vary
/// continuously with location via a smoothstep-interpolated coarse lattice.
class SceneField
{
  public:
    SceneField() = default;
    SceneField(const SceneParams& params, const GridGeometry& geom, Rng& rng);

    int path_count() const { return static_cast<int>(base_.size()); }

    /// Cluster-centre parameters at `q`, powers normalized to sum 1.
    PathSet effective_paths(Point q) const;

    /// Ray-level parameters at `q`: every cluster expanded into its rays,
    /// each carrying rho_cluster / subpaths.
    PathSet subpaths(Point q) const;

    const SceneParams& params() const { return params_; }

  private:
    double field(int path, int axis, Point q) const;

    SceneParams params_;
    GridGeometry geom_;
    std::vector<PathParams> base_;   // rho holds the base power in dB
    int lattice_nx_ = 0;
    int lattice_ny_ = 0;
    std::vector<double> lattice_;    // [path][axis][iy][ix]
    std::vector<PathParams> offsets_; // [path * subpaths + s]
};

/// Grid-based ground-truth scene: one PathSet (evaluated at the grid centre)
/// per grid, plus the continuous field when generated in-process.
struct GridScene
{
    GridGeometry geometry;
    std::vector<PathSet> grids;
    std::optional<SceneField> field;

    int count() const { return static_cast<int>(grids.size()); }
    int lbar() const;

    /// Ray-level parameters at `q`; falls back to the grid record when the
    /// scene was loaded from file.
    PathSet paths_at(Point q) const;
};

GridScene generate_scene(const SceneParams& params, std::uint64_t seed);

/// Uniform location inside grid `g`.
Point sample_in_grid(const GridGeometry& geom, int g, Rng& rng);

/// True when every pair of paths satisfies the configured separation.
bool well_separated(const PathSet& ps, const SeparationDims& dims, double delta_f);

void write_scene_csv(const GridScene& scene, std::ostream& os);
GridScene read_scene_csv(std::istream& is);

} // namespace scsice

#endif // SCSICE_CHANNEL_SCENE_HPP
