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

#ifndef SCSICE_ESTIMATORS_HPP
#define SCSICE_ESTIMATORS_HPP

#include <cstdint>
#include <vector>

#include "scsice/dmrs_frame.hpp"
#include "scsice/linalg.hpp"
#include "scsice/types.hpp"
#include "scsice/windows.hpp"

namespace scsice
{

/// Frequency (n_c x n_c) and antenna (M x M) correlations of one user.
struct ScsiCorrelations
{
    CMat r_f;
    CMat r_s;
    PathSet source;
};

CMat freq_correlation(const PathSet& paths, Index n_sc, double delta_f);
CMat antenna_correlation(const PathSet& paths, int m_v, int m_h);
ScsiCorrelations build_correlations(const PathSet& paths, const SystemConfig& cfg);

/// P R P^T for the given (sorted) pilot subcarriers.
CMat restrict_to_pilots(const CMat& r_f, const std::vector<int>& indices);

/// Noise variance seen by the frequency stage.
enum class FreqNoise
{
    post_average, // sigma^2 / T_p, the variance after time-cover averaging
    raw           // sigma^2
};

/// Noise variance used by the antenna stage.
enum class AntennaNoise
{
    plain,     // sigma^2
    propagated // tr(R_e) / N of the frequency-stage error covariance
};

struct EstimatorOptions
{
    FreqNoise freq_noise = FreqNoise::post_average;
    AntennaNoise antenna_noise = AntennaNoise::plain;
};

double freq_stage_noise(double noise_var, const SystemConfig& cfg, const EstimatorOptions& opts);

/// Frequency-domain MMSE shared by all users of one OCC set. The Gram
/// matrix sum_k C_k R_k C_k^H + sigma^2 I is factorized once.
class FreqMmse
{
  public:
    /// `r_pilot[k]` is P R_f^k P^T and `covers[k]` the diagonal of C_k.
    FreqMmse(std::vector<CMat> r_pilot, std::vector<CVec> covers, double noise_var);

    /// Estimate of member `k` (position in the constructor lists).
    CMat estimate(const CMat& y, std::size_t k) const;

    /// tr(R_e) / N for member `k`.
    double residual(std::size_t k) const;

    double loading() const { return loading_; }

  private:
    std::vector<CMat> r_;
    std::vector<CVec> c_;
    double noise_ = 0.0;
    double loading_ = 0.0;
    HermitianSolver solver_;
};

/// Single-call form of FreqMmse: estimate of member `u`.
CMat freq_mmse_decompose(const CMat& y,
                         std::size_t u,
                         const std::vector<CMat>& r_pilot,
                         const std::vector<CVec>& covers,
                         double noise_var);

/// H~^T = R_s (R_s + sigma^2 I)^-1 H^T.
CMat antenna_mmse(const CMat& h, const CMat& r_s, double noise_var);

/// SA-BCE on the pilot segments: one N x M estimate per user (rows follow
/// the user's pilot subcarrier set).
std::vector<CMat> sa_bce_segments(const PilotGrid& grid,
                                  const std::vector<DmrsAllocation>& allocs,
                                  const std::vector<ScsiCorrelations>& scsi,
                                  double noise_var,
                                  const SystemConfig& cfg,
                                  const EstimatorOptions& opts = {});

/// SA-BCE interpolated to all n_c subcarriers.
std::vector<CMat> sa_bce(const PilotGrid& grid,
                         const std::vector<DmrsAllocation>& allocs,
                         const std::vector<ScsiCorrelations>& scsi,
                         double noise_var,
                         const SystemConfig& cfg,
                         const EstimatorOptions& opts = {});

/// Delay-domain (N x N) and beam-domain (M x M) correlations.
struct BeamDelayCorrelations
{
    CMat r_tau;
    CMat r_a;
};

/// Direct evaluation from paths: b~ = F^H Lambda_f C_u P_i b(tau),
/// a~ = (F^A)^H Lambda_s a. A null window means the identity window.
BeamDelayCorrelations beam_delay_correlations(const PathSet& paths,
                                              const DmrsAllocation& alloc,
                                              const WindowPair* window,
                                              const SystemConfig& cfg);

/// Same quantity by congruence of arbitrary antenna-frequency correlations.
BeamDelayCorrelations beam_delay_from_correlations(const ScsiCorrelations& scsi,
                                                   const DmrsAllocation& alloc,
                                                   const WindowPair* window,
                                                   const SystemConfig& cfg);

/// Beam-delay form with identity window and dense solves, pilot segments.
std::vector<CMat> sa_bce_beam_delay_segments(const PilotGrid& grid,
                                             const std::vector<DmrsAllocation>& allocs,
                                             const std::vector<ScsiCorrelations>& scsi,
                                             double noise_var,
                                             const SystemConfig& cfg,
                                             const EstimatorOptions& opts = {});

/// Half-bandwidths of the truncated delay- and beam-domain matrices. The
/// default linear band drops the wrap-around corners; the periodic band keeps
/// them and is solved in folded order (linear half-bandwidth 2B).
struct BandSpec
{
    Index b_tau = 0;
    Index b_a = 0;
    bool periodic = false; // measure the band by circular index distance

    static BandSpec full(const SystemConfig& cfg);
    void validate(const SystemConfig& cfg) const;
};

/// Counters gathered across SA-WBCE calls.
struct RunStats
{
    std::uint64_t banded_solves = 0;
    std::uint64_t dense_fallbacks = 0;

    void merge(const RunStats& other)
    {
        banded_solves += other.banded_solves;
        dense_fallbacks += other.dense_fallbacks;
    }
};

/// Solves A X = B for a Hermitian band matrix; falls back to a dense LU
/// when the banded Cholesky breaks down (counted in `stats`).
CMat banded_solve(const CMat& a, Index bandwidth, double loading, const CMat& b, RunStats* stats);

std::vector<CMat> sa_wbce_segments(const PilotGrid& grid,
                                   const std::vector<DmrsAllocation>& allocs,
                                   const std::vector<ScsiCorrelations>& scsi,
                                   double noise_var,
                                   const WindowPair& window,
                                   const BandSpec& band,
                                   const SystemConfig& cfg,
                                   const EstimatorOptions& opts = {},
                                   RunStats* stats = nullptr);

std::vector<CMat> sa_wbce(const PilotGrid& grid,
                          const std::vector<DmrsAllocation>& allocs,
                          const std::vector<ScsiCorrelations>& scsi,
                          double noise_var,
                          const WindowPair& window,
                          const BandSpec& band,
                          const SystemConfig& cfg,
                          const EstimatorOptions& opts = {},
                          RunStats* stats = nullptr);

/// Interpolates per-user pilot-segment estimates to n_c subcarriers.
std::vector<CMat> interpolate_segments(const std::vector<CMat>& segments,
                                       const std::vector<DmrsAllocation>& allocs,
                                       const SystemConfig& cfg);

} // namespace scsice

#endif // SCSICE_ESTIMATORS_HPP
