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

#ifndef SCSICE_VSTD_HPP
#define SCSICE_VSTD_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scsice/channel_scene.hpp"
#include "scsice/rng.hpp"
#include "scsice/scsi_database.hpp"
#include "scsice/types.hpp"

namespace scsice
{

/// LS snapshots of one grid: column w is the vectorized N_d x M channel of
/// sampling point w, antenna index fastest (row n*M + m_v*M_h + m_h).
struct SnapshotBlock
{
    CMat data;
    int n_d = 0;
    int m_v = 0;
    int m_h = 0;
    CMat gains;                  // paths x W, the drawn complex gains
    std::vector<Point> locations; // sampling points, when drawn from a scene

    Index snapshots() const { return data.cols(); }
};

/// Snapshots for a fixed path set (every sampling point sees `paths`).
SnapshotBlock collect_snapshots(const PathSet& paths, int w, int n_d, int m_v, int m_h, double delta_f,
                                double noise_var, Rng& rng, GainModel gains = GainModel::rayleigh);

/// Snapshots at W uniform locations inside grid `g` of `scene`; each point
/// sees the scene's ray-level paths at its own location.
SnapshotBlock collect_snapshots(const GridScene& scene, int g, int w, int n_d, int m_v, int m_h, double delta_f,
                                double noise_var, Rng& rng, GainModel gains = GainModel::rayleigh);

/// Dense 4th-order tensor with the last index fastest.
class Tensor4
{
  public:
    Tensor4() = default;
    Tensor4(Index d0, Index d1, Index d2, Index d3);

    Index dim(int mode) const { return dims_[static_cast<std::size_t>(mode)]; }
    Complex& operator()(Index i, Index j, Index k, Index w) { return data_[offset(i, j, k, w)]; }
    const Complex& operator()(Index i, Index j, Index k, Index w) const { return data_[offset(i, j, k, w)]; }

  private:
    std::size_t offset(Index i, Index j, Index k, Index w) const
    {
        return static_cast<std::size_t>(((i * dims_[1] + j) * dims_[2] + k) * dims_[3] + w);
    }

    std::array<Index, 4> dims_{0, 0, 0, 0};
    std::vector<Complex> data_;
};

/// Entry (n, m_v, m_h, w) = H[n*M + m_v*M_h + m_h, w].
Tensor4 tensorize(const CMat& block, int n_d, int m_v, int m_h);

/// X^[3]: rows (n, m_v, m_h) with m_h fastest, columns w.
CMat matricize_x3(const Tensor4& t);

struct SmoothingParams
{
    int k1 = 1, l1 = 1;
    int k2 = 1, l2 = 1;
    int k3 = 1, l3 = 1;

    static SmoothingParams from_k(int k1, int k2, int k3, int n_d, int m_v, int m_h);
    void validate(int n_d, int m_v, int m_h) const;
    int rows() const { return k1 * k2 * k3; }
};

/// X_S with block (l1, l2, l3) = J X^[3] placed at column offset
/// ((l1*L2 + l2)*L3 + l3) * W.
CMat spatial_smooth(const CMat& x3, int n_d, int m_v, int m_h, const SmoothingParams& sp);

struct UniquenessReport
{
    long long row_product = 0;    // (K1 - 1) K2 K3
    long long column_product = 0; // L1 L2 L3 W
    long long bound = 0;          // min of the two
    long long margin = 0;         // bound - Lbar
    bool pass = false;
};

UniquenessReport check_uniqueness(const SmoothingParams& sp, int lbar, int w);

/// Balanced split K = ceil((dim + 1) / 2) per mode with K2, K3 >= 2 where
/// the array allows it. When K1 K2 K3 exceeds row_cap (0 disables the cap)
/// K1 shrinks first, then K3, then K2.
SmoothingParams select_smoothing(int n_d, int m_v, int m_h, int row_cap);

/// Exhaustive search over splits with K2, K3 >= 2 where the array allows
/// it and K1 K2 K3 <= row_cap. Maximizes the uniqueness bound; ties prefer
/// splits closest to the balanced split.
SmoothingParams max_bound_smoothing(int n_d, int m_v, int m_h, int w, int row_cap);

/// Leading singular triplets of X from the eigendecomposition of X X^H.
struct TruncatedSvd
{
    CMat u;
    RVec s;
    CMat v;
    RVec spectrum; // all singular values, descending
};

/// All singular values (descending) plus the leading `rank` triplets.
TruncatedSvd gram_svd(const CMat& x, Index rank);

struct MdlResult
{
    int rank = 1;
    bool degenerate = false;
    std::vector<double> scores;
};

/// Wax-Kailath MDL on the squared singular values. Eigenvalues below
/// 1e-14 of the largest are raised to that floor. `max_rank` bounds the
/// answer (0 means no bound).
MdlResult estimate_rank_mdl(const RVec& singular_values, double sample_count, int max_rank = 0);

struct ShiftInvariance
{
    CVec z1;
    CMat m; // eigenvectors, one column per path
};

/// Which shift operator is eigendecomposed: the delay-mode operator
/// U1^+ U2 alone, or a fixed linear combination of the delay, vertical and
/// horizontal operators (same eigenvectors in the noiseless case, but
/// separated eigenvalues when delays are unresolved). In joint mode z1 is
/// read from the diagonal of M^-1 (U1^+ U2) M.
enum class EvdMode
{
    delay,
    joint
};

EvdMode parse_evd_mode(const std::string& s);
std::string to_string(EvdMode m);

ShiftInvariance shift_invariance_evd(const CMat& u, const SmoothingParams& sp, EvdMode mode = EvdMode::delay);

struct GeneratorSet
{
    CVec z1, z2, z3;
    CMat b4;                     // W x Lbar
    std::vector<double> residual; // per-path fit residual of U m_l
    std::vector<bool> failed;
};

GeneratorSet extract_generators(const TruncatedSvd& svd, const ShiftInvariance& si, const SmoothingParams& sp, int w);

struct ParamDiagnostics
{
    int clips = 0;
    int folded_delays = 0;
};

/// Delays unwrap into [-0.05, 0.95) / delta_f; negative values inside the
/// guard are set to zero, values below it are folded by 1 / delta_f.
PathSet params_from_generators(const GeneratorSet& g, double delta_f, ParamDiagnostics* diag = nullptr);

struct VstdConfig
{
    int n_d = 32;
    int m_v = 2;
    int m_h = 8;
    int snapshots = 10;
    double delta_f = 30e3;
    double noise_var = 0.0;
    std::optional<SmoothingParams> smoothing;
    int row_cap = 128;
    int fixed_rank = 0;     // > 0 skips MDL
    int max_rank = 0;       // bound on the MDL answer, 0 = none
    EvdMode evd = EvdMode::joint;
    GainModel gains = GainModel::rayleigh;

    void validate() const;
};

struct VstdDiagnostics
{
    int grid_id = -1;
    SmoothingParams smoothing;
    UniquenessReport uniqueness;
    RVec singular_values;
    int lbar = 0;
    bool mdl_degenerate = false;
    int clips = 0;
    int folded_delays = 0;
    std::vector<double> residuals;
};

struct VstdResult
{
    ScsiRecord record;
    VstdDiagnostics diagnostics;
};

/// Full decomposition of one snapshot block.
VstdResult build_grid_record(const SnapshotBlock& block, const VstdConfig& cfg, int grid_id = 0);

/// Collects snapshots inside grid `g` and decomposes them.
VstdResult build_grid_record(const GridScene& scene, int g, const VstdConfig& cfg, std::uint64_t seed);

struct DatabaseBuild
{
    ScsiDatabase db;
    std::vector<VstdDiagnostics> diagnostics;
    std::vector<int> failed_grids;
};

/// Builds every grid in parallel; grid g uses seed derive_seed(seed, g).
DatabaseBuild build_database(const GridScene& scene, const VstdConfig& cfg, std::uint64_t seed);

void write_diagnostics_csv(const VstdDiagnostics& d, std::ostream& os);

} // namespace scsice

#endif // SCSICE_VSTD_HPP
