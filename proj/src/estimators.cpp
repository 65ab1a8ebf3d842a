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
#include <memory>

#include <Eigen/LU>

#include "scsice/channel_scene.hpp"
#include "scsice/estimators.hpp"
#include "scsice/interpolation.hpp"
#include "scsice/linalg.hpp"
#include "scsice/parallel.hpp"

namespace scsice
{

CMat freq_correlation(const PathSet& paths, Index n_sc, double delta_f)
{
    CMat b(n_sc, static_cast<Index>(paths.size()));
    RVec rho(static_cast<Index>(paths.size()));
    for (std::size_t l = 0; l < paths.size(); ++l) {
        if (paths.paths[l].rho < 0.0) {
            throw ConfigError("path power must be >= 0");
        }
        b.col(static_cast<Index>(l)) = steering_delay(paths.paths[l].tau, n_sc, delta_f);
        rho[static_cast<Index>(l)] = paths.paths[l].rho;
    }
    return b * rho.cast<Complex>().asDiagonal() * b.adjoint();
}

CMat antenna_correlation(const PathSet& paths, int m_v, int m_h)
{
    const Index m = static_cast<Index>(m_v) * m_h;
    CMat a(m, static_cast<Index>(paths.size()));
    RVec rho(static_cast<Index>(paths.size()));
    for (std::size_t l = 0; l < paths.size(); ++l) {
        if (paths.paths[l].rho < 0.0) {
            throw ConfigError("path power must be >= 0");
        }
        a.col(static_cast<Index>(l)) = steering_antenna(paths.paths[l].theta, paths.paths[l].phi, m_v, m_h);
        rho[static_cast<Index>(l)] = paths.paths[l].rho;
    }
    return a * rho.cast<Complex>().asDiagonal() * a.adjoint();
}

ScsiCorrelations build_correlations(const PathSet& paths, const SystemConfig& cfg)
{
    ScsiCorrelations c;
    c.r_f = freq_correlation(paths, cfg.n_c, cfg.delta_f);
    c.r_s = antenna_correlation(paths, cfg.m_v, cfg.m_h);
    c.source = paths;
    c.source.gains.clear();
    return c;
}

CMat restrict_to_pilots(const CMat& r_f, const std::vector<int>& indices)
{
    const Index n = static_cast<Index>(indices.size());
    CMat out(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            out(i, j) = r_f(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

double freq_stage_noise(double noise_var, const SystemConfig& cfg, const EstimatorOptions& opts)
{
    return opts.freq_noise == FreqNoise::post_average ? noise_var / cfg.t_p : noise_var;
}

namespace
{

double trace_loading(const std::vector<CMat>& r)
{
    double tr = 0.0;
    Index n = 1;
    for (const auto& m : r) {
        tr += m.trace().real();
        n = m.rows();
    }
    return tr > 0.0 ? kDiagonalLoading * tr / static_cast<double>(n) : kDiagonalLoading;
}

double trace_loading(const CMat& r)
{
    const double tr = r.trace().real();
    return tr > 0.0 ? kDiagonalLoading * tr / static_cast<double>(r.rows()) : kDiagonalLoading;
}

CMat gram(const std::vector<CMat>& r, const std::vector<CVec>& c, double noise)
{
    if (r.empty() || r.size() != c.size()) {
        throw ConfigError("FreqMmse: one correlation and one cover per member");
    }
    const Index n = r.front().rows();
    CMat g = CMat::Zero(n, n);
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (r[k].rows() != n || r[k].cols() != n || c[k].size() != n) {
            throw ConfigError("FreqMmse: dimension mismatch");
        }
        g.noalias() += c[k].asDiagonal() * r[k] * c[k].conjugate().asDiagonal();
    }
    g.diagonal().array() += noise;
    return g;
}

struct SetJob
{
    int group = 0;
    std::vector<int> members;
};

std::vector<SetJob> set_jobs(const PilotGrid& grid, const std::vector<DmrsAllocation>& allocs)
{
    std::vector<SetJob> jobs;
    for (int i = 0; i < static_cast<int>(grid.groups.size()); ++i) {
        for (int s = 0; s < 2; ++s) {
            auto m = users_in_set(allocs, i, s);
            if (!m.empty()) {
                jobs.push_back({i, std::move(m)});
            }
        }
    }
    return jobs;
}

CMat decoupled(const GroupSignal& gs, const DmrsAllocation& a)
{
    std::vector<CMat> y_ls;
    y_ls.reserve(gs.rx.size());
    for (const auto& y : gs.rx) {
        y_ls.push_back(ls_depilot(y, gs.pilot));
    }
    return time_occ_decouple(y_ls, a.time_occ);
}

void check_inputs(const PilotGrid& grid,
                  const std::vector<DmrsAllocation>& allocs,
                  const std::vector<ScsiCorrelations>& scsi,
                  const SystemConfig& cfg)
{
    cfg.validate();
    if (scsi.size() != allocs.size()) {
        throw ConfigError("one SCSI entry per user required");
    }
    if (static_cast<int>(grid.groups.size()) != cfg.g_groups) {
        throw ConfigError("pilot grid does not match the configured CDM groups");
    }
    for (const auto& s : scsi) {
        if (s.r_f.rows() != cfg.n_c || s.r_s.rows() != cfg.antennas()) {
            throw ConfigError("SCSI correlation size does not match the configuration");
        }
    }
}

} // namespace

FreqMmse::FreqMmse(std::vector<CMat> r_pilot, std::vector<CVec> covers, double noise_var)
    : r_(std::move(r_pilot)), c_(std::move(covers)), noise_(noise_var), loading_(trace_loading(r_)),
      solver_(gram(r_, c_, noise_var), loading_)
{
}

CMat FreqMmse::estimate(const CMat& y, std::size_t k) const
{
    if (k >= r_.size()) {
        throw ConfigError("FreqMmse: member index out of range");
    }
    return r_[k] * (c_[k].conjugate().asDiagonal() * solver_.solve(y));
}

double FreqMmse::residual(std::size_t k) const
{
    if (k >= r_.size()) {
        throw ConfigError("FreqMmse: member index out of range");
    }
    const CMat cr = c_[k].asDiagonal() * r_[k];
    const CMat re = r_[k] - cr.adjoint() * solver_.solve(cr);
    return std::max(0.0, re.trace().real() / static_cast<double>(r_[k].rows()));
}

CMat freq_mmse_decompose(const CMat& y,
                         std::size_t u,
                         const std::vector<CMat>& r_pilot,
                         const std::vector<CVec>& covers,
                         double noise_var)
{
    return FreqMmse(r_pilot, covers, noise_var).estimate(y, u);
}

CMat antenna_mmse(const CMat& h, const CMat& r_s, double noise_var)
{
    if (r_s.rows() != h.cols()) {
        throw ConfigError("antenna_mmse: dimension mismatch");
    }
    CMat a = r_s;
    a.diagonal().array() += noise_var;
    const HermitianSolver solver(a, trace_loading(r_s));
    return (r_s * solver.solve(h.transpose())).transpose();
}

std::vector<CMat> interpolate_segments(const std::vector<CMat>& segments,
                                       const std::vector<DmrsAllocation>& allocs,
                                       const SystemConfig& cfg)
{
    std::vector<CMat> out(segments.size());
    parallel_for(static_cast<std::ptrdiff_t>(segments.size()), [&](std::ptrdiff_t k) {
        const auto idx = pilot_subcarrier_set(allocs[static_cast<std::size_t>(k)].group, cfg.n_c);
        out[static_cast<std::size_t>(k)] = interpolate_to_full(segments[static_cast<std::size_t>(k)], idx, cfg.n_c);
    });
    return out;
}

std::vector<CMat> sa_bce_segments(const PilotGrid& grid,
                                  const std::vector<DmrsAllocation>& allocs,
                                  const std::vector<ScsiCorrelations>& scsi,
                                  double noise_var,
                                  const SystemConfig& cfg,
                                  const EstimatorOptions& opts)
{
    check_inputs(grid, allocs, scsi, cfg);
    const double sf = freq_stage_noise(noise_var, cfg, opts);
    const auto jobs = set_jobs(grid, allocs);
    std::vector<CMat> out(allocs.size());
    parallel_for(static_cast<std::ptrdiff_t>(jobs.size()), [&](std::ptrdiff_t j) {
        const auto& job = jobs[static_cast<std::size_t>(j)];
        const auto& gs = grid.groups[static_cast<std::size_t>(job.group)];
        const CMat y = decoupled(gs, allocs[static_cast<std::size_t>(job.members.front())]);
        std::vector<CMat> r;
        std::vector<CVec> c;
        for (int u : job.members) {
            r.push_back(restrict_to_pilots(scsi[static_cast<std::size_t>(u)].r_f, gs.indices));
            c.push_back(freq_occ_diag(allocs[static_cast<std::size_t>(u)].cyclic_shift, cfg.n_pilot()));
        }
        const FreqMmse fm(std::move(r), std::move(c), sf);
        for (std::size_t k = 0; k < job.members.size(); ++k) {
            const auto u = static_cast<std::size_t>(job.members[k]);
            const double ss = opts.antenna_noise == AntennaNoise::plain ? noise_var : fm.residual(k);
            out[u] = antenna_mmse(fm.estimate(y, k), scsi[u].r_s, ss);
        }
    });
    return out;
}

std::vector<CMat> sa_bce(const PilotGrid& grid,
                         const std::vector<DmrsAllocation>& allocs,
                         const std::vector<ScsiCorrelations>& scsi,
                         double noise_var,
                         const SystemConfig& cfg,
                         const EstimatorOptions& opts)
{
    return interpolate_segments(sa_bce_segments(grid, allocs, scsi, noise_var, cfg, opts), allocs, cfg);
}

BeamDelayCorrelations beam_delay_correlations(const PathSet& paths,
                                              const DmrsAllocation& alloc,
                                              const WindowPair* window,
                                              const SystemConfig& cfg)
{
    const int n = cfg.n_pilot();
    const Index m = cfg.antennas();
    const auto idx = pilot_subcarrier_set(alloc.group, cfg.n_c);
    const CVec c = freq_occ_diag(alloc.cyclic_shift, n);
    const CMat f = dft_matrix(n);
    const CMat fa = kron(dft_matrix(cfg.m_v), dft_matrix(cfg.m_h));
    const RVec eta_f = window ? window->eta_f : RVec::Ones(n);
    const RVec eta_s = window ? window->eta_s : RVec::Ones(m);
    BeamDelayCorrelations out{CMat::Zero(n, n), CMat::Zero(m, m)};
    for (const auto& p : paths.paths) {
        CVec b(n);
        for (int k = 0; k < n; ++k) {
            b[k] = std::polar(1.0, -2.0 * kPi * idx[static_cast<std::size_t>(k)] * cfg.delta_f * p.tau);
        }
        const CVec bt = f.adjoint() * (eta_f.cast<Complex>().cwiseProduct(c.cwiseProduct(b)));
        const CVec at = fa.adjoint() * (eta_s.cast<Complex>().cwiseProduct(steering_antenna(p.theta, p.phi, cfg.m_v, cfg.m_h)));
        out.r_tau.noalias() += p.rho * bt * bt.adjoint();
        out.r_a.noalias() += p.rho * at * at.adjoint();
    }
    return out;
}

BeamDelayCorrelations beam_delay_from_correlations(const ScsiCorrelations& scsi,
                                                   const DmrsAllocation& alloc,
                                                   const WindowPair* window,
                                                   const SystemConfig& cfg)
{
    const int n = cfg.n_pilot();
    const Index m = cfg.antennas();
    const auto idx = pilot_subcarrier_set(alloc.group, cfg.n_c);
    const CVec c = freq_occ_diag(alloc.cyclic_shift, n);
    const RVec eta_f = window ? window->eta_f : RVec::Ones(n);
    const RVec eta_s = window ? window->eta_s : RVec::Ones(m);
    const CVec df = eta_f.cast<Complex>().cwiseProduct(c);
    const CMat tf = dft_matrix(n).adjoint() * df.asDiagonal();
    const CMat ts = kron(dft_matrix(cfg.m_v), dft_matrix(cfg.m_h)).adjoint() * eta_s.cast<Complex>().asDiagonal();
    BeamDelayCorrelations out;
    out.r_tau = tf * restrict_to_pilots(scsi.r_f, idx) * tf.adjoint();
    out.r_a = ts * scsi.r_s * ts.adjoint();
    return out;
}

std::vector<CMat> sa_bce_beam_delay_segments(const PilotGrid& grid,
                                             const std::vector<DmrsAllocation>& allocs,
                                             const std::vector<ScsiCorrelations>& scsi,
                                             double noise_var,
                                             const SystemConfig& cfg,
                                             const EstimatorOptions& opts)
{
    check_inputs(grid, allocs, scsi, cfg);
    const double sf = freq_stage_noise(noise_var, cfg, opts);
    const int n = cfg.n_pilot();
    const CMat f = dft_matrix(n);
    const CMat fa = kron(dft_matrix(cfg.m_v), dft_matrix(cfg.m_h));
    const auto jobs = set_jobs(grid, allocs);
    std::vector<CMat> out(allocs.size());
    parallel_for(static_cast<std::ptrdiff_t>(jobs.size()), [&](std::ptrdiff_t j) {
        const auto& job = jobs[static_cast<std::size_t>(j)];
        const auto& gs = grid.groups[static_cast<std::size_t>(job.group)];
        const CMat y = decoupled(gs, allocs[static_cast<std::size_t>(job.members.front())]);
        std::vector<BeamDelayCorrelations> bd;
        std::vector<CMat> r_pilot;
        CMat sum = CMat::Zero(n, n);
        for (int u : job.members) {
            bd.push_back(beam_delay_from_correlations(scsi[static_cast<std::size_t>(u)],
                                                      allocs[static_cast<std::size_t>(u)], nullptr, cfg));
            sum += bd.back().r_tau;
            r_pilot.push_back(restrict_to_pilots(scsi[static_cast<std::size_t>(u)].r_f, gs.indices));
        }
        const double eps = trace_loading(r_pilot);
        sum.diagonal().array() += sf;
        const HermitianSolver solver(sum, eps);
        const CMat x = solver.solve(f.adjoint() * y);
        std::unique_ptr<FreqMmse> fm;
        if (opts.antenna_noise == AntennaNoise::propagated) {
            std::vector<CVec> c;
            for (int u : job.members) {
                c.push_back(freq_occ_diag(allocs[static_cast<std::size_t>(u)].cyclic_shift, n));
            }
            fm = std::make_unique<FreqMmse>(r_pilot, std::move(c), sf);
        }
        for (std::size_t k = 0; k < job.members.size(); ++k) {
            const auto u = static_cast<std::size_t>(job.members[k]);
            const CVec c = freq_occ_diag(allocs[u].cyclic_shift, n);
            const CMat h = c.conjugate().asDiagonal() * (f * (bd[k].r_tau * x));
            const double ss = fm ? fm->residual(k) : noise_var;
            CMat a = bd[k].r_a;
            a.diagonal().array() += ss;
            const HermitianSolver sa(a, trace_loading(scsi[u].r_s));
            out[u] = (fa * (bd[k].r_a * sa.solve(fa.adjoint() * h.transpose()))).transpose();
        }
    });
    return out;
}

BandSpec BandSpec::full(const SystemConfig& cfg)
{
    return {cfg.n_pilot() - 1, cfg.antennas() - 1};
}

void BandSpec::validate(const SystemConfig& cfg) const
{
    if (b_tau < 0 || b_tau >= cfg.n_pilot()) {
        throw ConfigError("B_tau must lie in [0, N)");
    }
    if (b_a < 0 || b_a >= cfg.antennas()) {
        throw ConfigError("B_a must lie in [0, M)");
    }
}

CMat banded_solve(const CMat& a, Index bandwidth, double loading, const CMat& b, RunStats* stats)
{
    BandedHermitian bh(a, bandwidth);
    bh.add_diagonal(loading);
    if (bh.factorize()) {
        if (stats) {
            ++stats->banded_solves;
        }
        return bh.solve(b);
    }
    if (stats) {
        ++stats->dense_fallbacks;
    }
    CMat d = band_truncate(a, bandwidth);
    d.diagonal().array() += loading;
    return Eigen::PartialPivLU<CMat>(d).solve(b);
}

namespace
{

// Band structure of one domain: the stored (possibly folded) matrices have
// linear half-bandwidth `width`.
class BandOps
{
  public:
    BandOps(Index n, Index b, bool periodic) : b_(b), periodic_(periodic)
    {
        if (periodic_) {
            perm_ = fold_permutation(n);
            width_ = std::min<Index>(2 * b, n - 1);
        } else {
            width_ = b;
        }
    }

    Index width() const { return width_; }

    CMat truncate(const CMat& r) const
    {
        if (!periodic_) {
            return band_truncate(r, b_);
        }
        const CMat t = band_truncate_periodic(r, b_);
        const auto n = static_cast<Index>(perm_.size());
        CMat out(n, n);
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i < n; ++i) {
                out(i, j) = t(perm_[static_cast<std::size_t>(i)], perm_[static_cast<std::size_t>(j)]);
            }
        }
        return out;
    }

    CMat to_internal(const CMat& x) const
    {
        if (!periodic_) {
            return x;
        }
        CMat out(x.rows(), x.cols());
        for (std::size_t i = 0; i < perm_.size(); ++i) {
            out.row(static_cast<Index>(i)) = x.row(perm_[i]);
        }
        return out;
    }

    CMat from_internal(const CMat& x) const
    {
        if (!periodic_) {
            return x;
        }
        CMat out(x.rows(), x.cols());
        for (std::size_t i = 0; i < perm_.size(); ++i) {
            out.row(perm_[i]) = x.row(static_cast<Index>(i));
        }
        return out;
    }

  private:
    Index b_;
    bool periodic_;
    Index width_ = 0;
    std::vector<Index> perm_;
};

} // namespace

std::vector<CMat> sa_wbce_segments(const PilotGrid& grid,
                                   const std::vector<DmrsAllocation>& allocs,
                                   const std::vector<ScsiCorrelations>& scsi,
                                   double noise_var,
                                   const WindowPair& window,
                                   const BandSpec& band,
                                   const SystemConfig& cfg,
                                   const EstimatorOptions& opts,
                                   RunStats* stats)
{
    check_inputs(grid, allocs, scsi, cfg);
    band.validate(cfg);
    const int n = cfg.n_pilot();
    const Index m = cfg.antennas();
    if (window.eta_f.size() != n || window.eta_s.size() != m) {
        throw ConfigError("window sizes do not match the configuration");
    }
    if ((window.eta_f.array() <= 0.0).any() || (window.eta_s.array() <= 0.0).any()) {
        throw ConfigError("window entries must be positive");
    }
    const double sf = freq_stage_noise(noise_var, cfg, opts);
    const CMat f = dft_matrix(n);
    const CMat fa = kron(dft_matrix(cfg.m_v), dft_matrix(cfg.m_h));
    const CVec lf = window.eta_f.cast<Complex>();
    const CVec ls = window.eta_s.cast<Complex>();
    const CVec lf_inv = window.eta_f.cwiseInverse().cast<Complex>();
    const CVec ls_inv = window.eta_s.cwiseInverse().cast<Complex>();
    const BandOps tau_ops(n, band.b_tau, band.periodic);
    const BandOps a_ops(m, band.b_a, band.periodic);
    const CMat xi_f = tau_ops.truncate(window.xi_f);
    const CMat xi_s = a_ops.truncate(window.xi_s);
    const auto jobs = set_jobs(grid, allocs);
    std::vector<CMat> out(allocs.size());
    std::vector<RunStats> job_stats(jobs.size());
    parallel_for(static_cast<std::ptrdiff_t>(jobs.size()), [&](std::ptrdiff_t j) {
        const auto& job = jobs[static_cast<std::size_t>(j)];
        auto& st = job_stats[static_cast<std::size_t>(j)];
        const auto& gs = grid.groups[static_cast<std::size_t>(job.group)];
        const CMat y = decoupled(gs, allocs[static_cast<std::size_t>(job.members.front())]);
        std::vector<BeamDelayCorrelations> bd;
        std::vector<CMat> r_pilot;
        CMat sum = CMat::Zero(n, n);
        for (int u : job.members) {
            bd.push_back(beam_delay_from_correlations(scsi[static_cast<std::size_t>(u)],
                                                      allocs[static_cast<std::size_t>(u)], &window, cfg));
            bd.back().r_tau = tau_ops.truncate(bd.back().r_tau);
            bd.back().r_a = a_ops.truncate(bd.back().r_a);
            sum += bd.back().r_tau;
            r_pilot.push_back(restrict_to_pilots(scsi[static_cast<std::size_t>(u)].r_f, gs.indices));
        }
        const double eps = trace_loading(r_pilot);
        sum += (sf + eps) * xi_f;
        const CMat x =
            banded_solve(sum, tau_ops.width(), 0.0, tau_ops.to_internal(f.adjoint() * (lf.asDiagonal() * y)), &st);
        std::unique_ptr<FreqMmse> fm;
        if (opts.antenna_noise == AntennaNoise::propagated) {
            std::vector<CVec> c;
            for (int u : job.members) {
                c.push_back(freq_occ_diag(allocs[static_cast<std::size_t>(u)].cyclic_shift, n));
            }
            fm = std::make_unique<FreqMmse>(r_pilot, std::move(c), sf);
        }
        for (std::size_t k = 0; k < job.members.size(); ++k) {
            const auto u = static_cast<std::size_t>(job.members[k]);
            const CVec c = freq_occ_diag(allocs[u].cyclic_shift, n);
            const CMat rx = tau_ops.from_internal(BandedHermitian(bd[k].r_tau, tau_ops.width()).multiply(x));
            const CMat h = lf_inv.cwiseProduct(c.conjugate()).asDiagonal() * (f * rx);
            const double ss = fm ? fm->residual(k) : noise_var;
            const CMat a = bd[k].r_a + (ss + trace_loading(scsi[u].r_s)) * xi_s;
            const CMat xa = banded_solve(a, a_ops.width(), 0.0,
                                         a_ops.to_internal(fa.adjoint() * (ls.asDiagonal() * h.transpose())), &st);
            const CMat ha = a_ops.from_internal(BandedHermitian(bd[k].r_a, a_ops.width()).multiply(xa));
            out[u] = (ls_inv.asDiagonal() * (fa * ha)).transpose();
        }
    });
    if (stats) {
        for (const auto& s : job_stats) {
            stats->merge(s);
        }
    }
    return out;
}

std::vector<CMat> sa_wbce(const PilotGrid& grid,
                          const std::vector<DmrsAllocation>& allocs,
                          const std::vector<ScsiCorrelations>& scsi,
                          double noise_var,
                          const WindowPair& window,
                          const BandSpec& band,
                          const SystemConfig& cfg,
                          const EstimatorOptions& opts,
                          RunStats* stats)
{
    return interpolate_segments(sa_wbce_segments(grid, allocs, scsi, noise_var, window, band, cfg, opts, stats),
                                allocs, cfg);
}

} // namespace scsice
