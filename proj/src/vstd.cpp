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
#include <limits>
#include <iomanip>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "scsice/linalg.hpp"
#include "scsice/parallel.hpp"
#include "scsice/vstd.hpp"

namespace scsice
{

namespace
{

SystemConfig array_config(int m_v, int m_h, double delta_f)
{
    SystemConfig c;
    c.m_v = m_v;
    c.m_h = m_h;
    c.delta_f = delta_f;
    return c;
}

void add_snapshot(SnapshotBlock& block, Index w, const PathSet& ps, int n_d, const SystemConfig& arr,
                  double noise_var, Rng& rng)
{
    const ChannelMatrix h = synth_channel(ps, n_d, arr);
    const Index m = h.cols();
    for (Index n = 0; n < n_d; ++n) {
        const Complex s = rng.qpsk();
        for (Index k = 0; k < m; ++k) {
            Complex y = s * h(n, k);
            if (noise_var > 0.0) {
                y += rng.complex_normal(noise_var);
            }
            block.data(n * m + k, w) = std::conj(s) * y;
        }
    }
}

CVec vandermonde(Complex z, int n)
{
    CVec v(n);
    Complex p{1.0, 0.0};
    for (int i = 0; i < n; ++i) {
        v[i] = p;
        p *= z;
    }
    return v;
}

Complex unit(Complex z)
{
    const double a = std::abs(z);
    return a > 0.0 ? z / a : Complex{1.0, 0.0};
}

struct GramEigen
{
    RVec values;   // descending, clamped at zero
    CMat vectors;  // matching columns
};

GramEigen gram_eigen(const CMat& x)
{
    CMat g = CMat::Zero(x.rows(), x.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(x);
    Eigen::SelfAdjointEigenSolver<CMat> es(g.selfadjointView<Eigen::Lower>());
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of the smoothed Gram matrix failed");
    }
    const Index n = g.rows();
    GramEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        out.values[i] = std::max(0.0, es.eigenvalues()[n - 1 - i]);
        out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

TruncatedSvd truncate(const CMat& x, const GramEigen& ge, Index rank)
{
    TruncatedSvd out;
    out.spectrum = ge.values.cwiseSqrt();
    rank = std::min<Index>(rank, ge.values.size());
    out.u = ge.vectors.leftCols(rank);
    out.s = out.spectrum.head(rank);
    out.v = x.adjoint() * out.u;
    for (Index i = 0; i < rank; ++i) {
        if (!(out.s[i] > 0.0)) {
            throw NumericalError("requested rank exceeds the numerical rank of the snapshot matrix");
        }
        out.v.col(i) /= out.s[i];
    }
    return out;
}

int balanced(int dim)
{
    return (dim + 2) / 2;
}

} // namespace

SnapshotBlock collect_snapshots(const PathSet& paths, int w, int n_d, int m_v, int m_h, double delta_f,
                                double noise_var, Rng& rng, GainModel gains)
{
    if (w < 1 || n_d < 1 || m_v < 1 || m_h < 1) {
        throw ConfigError("collect_snapshots: sizes must be >= 1");
    }
    const SystemConfig arr = array_config(m_v, m_h, delta_f);
    SnapshotBlock block;
    block.n_d = n_d;
    block.m_v = m_v;
    block.m_h = m_h;
    block.data.resize(static_cast<Index>(n_d) * m_v * m_h, w);
    block.gains.resize(static_cast<Index>(paths.size()), w);
    for (Index k = 0; k < w; ++k) {
        PathSet ps = paths;
        ps.gains = draw_gains(ps, rng, gains);
        for (std::size_t l = 0; l < ps.size(); ++l) {
            block.gains(static_cast<Index>(l), k) = ps.gains[l];
        }
        add_snapshot(block, k, ps, n_d, arr, noise_var, rng);
    }
    return block;
}

SnapshotBlock collect_snapshots(const GridScene& scene, int g, int w, int n_d, int m_v, int m_h, double delta_f,
                                double noise_var, Rng& rng, GainModel gains)
{
    if (g < 0 || g >= scene.count()) {
        throw ConfigError("collect_snapshots: grid id out of range");
    }
    if (w < 1 || n_d < 1 || m_v < 1 || m_h < 1) {
        throw ConfigError("collect_snapshots: sizes must be >= 1");
    }
    const SystemConfig arr = array_config(m_v, m_h, delta_f);
    SnapshotBlock block;
    block.n_d = n_d;
    block.m_v = m_v;
    block.m_h = m_h;
    block.data.resize(static_cast<Index>(n_d) * m_v * m_h, w);
    for (Index k = 0; k < w; ++k) {
        const Point q = sample_in_grid(scene.geometry, g, rng);
        PathSet ps = scene.paths_at(q);
        ps.gains = draw_gains(ps, rng, gains);
        if (k == 0) {
            block.gains.resize(static_cast<Index>(ps.size()), w);
        }
        for (std::size_t l = 0; l < ps.size() && static_cast<Index>(l) < block.gains.rows(); ++l) {
            block.gains(static_cast<Index>(l), k) = ps.gains[l];
        }
        block.locations.push_back(q);
        add_snapshot(block, k, ps, n_d, arr, noise_var, rng);
    }
    return block;
}

Tensor4::Tensor4(Index d0, Index d1, Index d2, Index d3)
    : dims_{d0, d1, d2, d3}, data_(static_cast<std::size_t>(d0 * d1 * d2 * d3))
{
}

Tensor4 tensorize(const CMat& block, int n_d, int m_v, int m_h)
{
    const Index m = static_cast<Index>(m_v) * m_h;
    if (block.rows() != static_cast<Index>(n_d) * m) {
        throw ConfigError("tensorize: block rows must equal N_d * M_v * M_h");
    }
    Tensor4 t(n_d, m_v, m_h, block.cols());
    for (Index w = 0; w < block.cols(); ++w) {
        for (Index n = 0; n < n_d; ++n) {
            for (Index a = 0; a < m_v; ++a) {
                for (Index b = 0; b < m_h; ++b) {
                    t(n, a, b, w) = block(n * m + a * m_h + b, w);
                }
            }
        }
    }
    return t;
}

CMat matricize_x3(const Tensor4& t)
{
    const Index d0 = t.dim(0), d1 = t.dim(1), d2 = t.dim(2), d3 = t.dim(3);
    CMat x(d0 * d1 * d2, d3);
    for (Index w = 0; w < d3; ++w) {
        for (Index n = 0; n < d0; ++n) {
            for (Index a = 0; a < d1; ++a) {
                for (Index b = 0; b < d2; ++b) {
                    x((n * d1 + a) * d2 + b, w) = t(n, a, b, w);
                }
            }
        }
    }
    return x;
}

SmoothingParams SmoothingParams::from_k(int k1, int k2, int k3, int n_d, int m_v, int m_h)
{
    SmoothingParams sp;
    sp.k1 = k1;
    sp.l1 = n_d + 1 - k1;
    sp.k2 = k2;
    sp.l2 = m_v + 1 - k2;
    sp.k3 = k3;
    sp.l3 = m_h + 1 - k3;
    sp.validate(n_d, m_v, m_h);
    return sp;
}

void SmoothingParams::validate(int n_d, int m_v, int m_h) const
{
    if (k1 < 1 || l1 < 1 || k2 < 1 || l2 < 1 || k3 < 1 || l3 < 1) {
        throw ConfigError("smoothing parameters must all be >= 1");
    }
    if (k1 + l1 != n_d + 1 || k2 + l2 != m_v + 1 || k3 + l3 != m_h + 1) {
        throw ConfigError("smoothing parameters must satisfy K + L = dim + 1");
    }
}

CMat spatial_smooth(const CMat& x3, int n_d, int m_v, int m_h, const SmoothingParams& sp)
{
    sp.validate(n_d, m_v, m_h);
    const Index m = static_cast<Index>(m_v) * m_h;
    if (x3.rows() != static_cast<Index>(n_d) * m) {
        throw ConfigError("spatial_smooth: X rows must equal N_d * M_v * M_h");
    }
    const Index w = x3.cols();
    CMat xs(sp.rows(), static_cast<Index>(sp.l1) * sp.l2 * sp.l3 * w);
    for (int l1 = 0; l1 < sp.l1; ++l1) {
        for (int l2 = 0; l2 < sp.l2; ++l2) {
            for (int l3 = 0; l3 < sp.l3; ++l3) {
                const Index c0 = ((static_cast<Index>(l1) * sp.l2 + l2) * sp.l3 + l3) * w;
                for (int n = 0; n < sp.k1; ++n) {
                    for (int a = 0; a < sp.k2; ++a) {
                        for (int b = 0; b < sp.k3; ++b) {
                            const Index r = (static_cast<Index>(n) * sp.k2 + a) * sp.k3 + b;
                            const Index src = (n + l1) * m + (a + l2) * m_h + (b + l3);
                            xs.block(r, c0, 1, w) = x3.row(src);
                        }
                    }
                }
            }
        }
    }
    return xs;
}

UniquenessReport check_uniqueness(const SmoothingParams& sp, int lbar, int w)
{
    UniquenessReport r;
    r.row_product = static_cast<long long>(sp.k1 - 1) * sp.k2 * sp.k3;
    r.column_product = static_cast<long long>(sp.l1) * sp.l2 * sp.l3 * w;
    r.bound = std::min(r.row_product, r.column_product);
    r.margin = r.bound - lbar;
    r.pass = r.margin >= 0;
    return r;
}

SmoothingParams select_smoothing(int n_d, int m_v, int m_h, int row_cap)
{
    if (n_d < 2) {
        throw ConfigError("at least two subcarriers are needed for the delay shift");
    }
    int k1 = balanced(n_d);
    int k2 = std::max(balanced(m_v), std::min(2, m_v));
    int k3 = std::max(balanced(m_h), std::min(2, m_h));
    if (row_cap > 0) {
        if (k1 * k2 * k3 > row_cap) {
            k1 = std::max(2, row_cap / (k2 * k3));
        }
        while (k1 * k2 * k3 > row_cap && k3 > std::min(2, m_h)) {
            --k3;
        }
        while (k1 * k2 * k3 > row_cap && k2 > std::min(2, m_v)) {
            --k2;
        }
        if (k1 * k2 * k3 > row_cap) {
            throw ConfigError("no smoothing split satisfies the row cap");
        }
    }
    return SmoothingParams::from_k(k1, k2, k3, n_d, m_v, m_h);
}

SmoothingParams max_bound_smoothing(int n_d, int m_v, int m_h, int w, int row_cap)
{
    if (n_d < 2) {
        throw ConfigError("at least two subcarriers are needed for the delay shift");
    }
    const int k2_min = std::min(2, m_v);
    const int k3_min = std::min(2, m_h);
    SmoothingParams best;
    long long best_bound = -1;
    int best_dist = std::numeric_limits<int>::max();
    for (int k1 = 2; k1 <= n_d; ++k1) {
        for (int k2 = k2_min; k2 <= m_v; ++k2) {
            for (int k3 = k3_min; k3 <= m_h; ++k3) {
                if (row_cap > 0 && k1 * k2 * k3 > row_cap) {
                    continue;
                }
                const auto sp = SmoothingParams::from_k(k1, k2, k3, n_d, m_v, m_h);
                const long long bound = check_uniqueness(sp, 0, w).bound;
                const int dist = std::abs(k1 - balanced(n_d)) + std::abs(k2 - balanced(m_v)) +
                                 std::abs(k3 - balanced(m_h));
                if (bound > best_bound || (bound == best_bound && dist < best_dist)) {
                    best = sp;
                    best_bound = bound;
                    best_dist = dist;
                }
            }
        }
    }
    if (best_bound < 0) {
        throw ConfigError("no smoothing split satisfies the row cap");
    }
    return best;
}

TruncatedSvd gram_svd(const CMat& x, Index rank)
{
    return truncate(x, gram_eigen(x), rank);
}

MdlResult estimate_rank_mdl(const RVec& singular_values, double sample_count, int max_rank)
{
    const Index p = singular_values.size();
    MdlResult out;
    if (p == 0 || !(sample_count > 0.0)) {
        out.degenerate = true;
        return out;
    }
    RVec lam = singular_values.array().square();
    const double floor = std::max(lam[0] * 1e-14, std::numeric_limits<double>::min());
    lam = lam.cwiseMax(floor);
    Index kmax = p - 1;
    if (max_rank > 0) {
        kmax = std::min<Index>(kmax, max_rank);
    }
    const double logn = std::log(sample_count);
    double best = std::numeric_limits<double>::infinity();
    Index arg = 0;
    for (Index k = 0; k <= kmax; ++k) {
        const Index q = p - k;
        const auto tail = lam.tail(q).array();
        const double log_geo = tail.log().mean();
        const double log_ari = std::log(tail.mean());
        const double score = -sample_count * static_cast<double>(q) * (log_geo - log_ari) +
                             0.5 * static_cast<double>(k) * static_cast<double>(2 * p - k) * logn;
        out.scores.push_back(score);
        if (score < best) {
            best = score;
            arg = k;
        }
    }
    if (arg == 0) {
        out.degenerate = true;
        out.rank = 1;
    } else {
        out.rank = static_cast<int>(arg);
    }
    return out;
}

namespace
{

CMat shift_operator(const CMat& top, const CMat& bottom)
{
    Eigen::JacobiSVD<CMat> svd(top);
    const RVec& s = svd.singularValues();
    if (s.size() == 0 || !(s[s.size() - 1] > 0.0) || s[0] / s[s.size() - 1] > 1e10) {
        throw NumericalError("U1 is rank deficient; increase K1");
    }
    return pinv(top) * bottom;
}

// Rows of U whose index along one smoothing mode is below (or above) the
// last (or first) position.
CMat mode_rows(const CMat& u, const SmoothingParams& sp, int mode, bool upper)
{
    const int k[3] = {sp.k1, sp.k2, sp.k3};
    std::vector<Index> rows;
    for (int n = 0; n < sp.k1; ++n) {
        for (int a = 0; a < sp.k2; ++a) {
            for (int b = 0; b < sp.k3; ++b) {
                const int idx[3] = {n, a, b};
                const int pos = idx[mode];
                if ((upper && pos < k[mode] - 1) || (!upper && pos > 0)) {
                    rows.push_back((static_cast<Index>(n) * sp.k2 + a) * sp.k3 + b);
                }
            }
        }
    }
    CMat out(static_cast<Index>(rows.size()), u.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Index>(i)) = u.row(rows[i]);
    }
    return out;
}

} // namespace

EvdMode parse_evd_mode(const std::string& s)
{
    if (s == "delay") {
        return EvdMode::delay;
    }
    if (s == "joint") {
        return EvdMode::joint;
    }
    throw ConfigError("unknown EVD mode '" + s + "' (expected delay or joint)");
}

std::string to_string(EvdMode m)
{
    return m == EvdMode::joint ? "joint" : "delay";
}

ShiftInvariance shift_invariance_evd(const CMat& u, const SmoothingParams& sp, EvdMode mode)
{
    const Index k23 = static_cast<Index>(sp.k2) * sp.k3;
    const Index n1 = static_cast<Index>(sp.k1 - 1) * k23;
    if (u.rows() != static_cast<Index>(sp.rows())) {
        throw ConfigError("shift_invariance_evd: U rows must equal K1 K2 K3");
    }
    if (n1 < u.cols()) {
        throw NumericalError("shift invariance needs (K1 - 1) K2 K3 >= Lbar; increase K1");
    }
    const CMat phi1 = shift_operator(u.topRows(n1), u.bottomRows(n1));
    CMat phi = phi1;
    if (mode == EvdMode::joint) {
        static constexpr double weights[3] = {1.0, 0.6180339887498949, 0.4142135623730950};
        const int dims[3] = {sp.k1, sp.k2, sp.k3};
        for (int md = 1; md < 3; ++md) {
            const Index rows = static_cast<Index>(dims[md] - 1) * sp.rows() / dims[md];
            if (dims[md] < 2 || rows < u.cols()) {
                continue;
            }
            phi += weights[md] * shift_operator(mode_rows(u, sp, md, true), mode_rows(u, sp, md, false));
        }
    }
    Eigen::ComplexEigenSolver<CMat> es(phi);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of the shift operator failed");
    }
    ShiftInvariance out;
    out.m = es.eigenvectors();
    if (mode == EvdMode::joint) {
        Eigen::FullPivLU<CMat> lu(out.m);
        if (!lu.isInvertible()) {
            throw NumericalError("eigenvector matrix of the shift operator is singular");
        }
        const CMat d = lu.solve(phi1 * out.m);
        out.z1 = d.diagonal().unaryExpr([](Complex z) { return unit(z); });
    } else {
        out.z1 = es.eigenvalues().unaryExpr([](Complex z) { return unit(z); });
    }
    return out;
}

GeneratorSet extract_generators(const TruncatedSvd& svd, const ShiftInvariance& si, const SmoothingParams& sp, int w)
{
    const Index r = si.m.cols();
    const Index k = sp.rows();
    const Index k23 = static_cast<Index>(sp.k2) * sp.k3;
    GeneratorSet g;
    g.z1 = si.z1;
    g.z2 = CVec::Ones(r);
    g.z3 = CVec::Ones(r);
    g.b4 = CMat::Zero(w, r);
    g.residual.assign(static_cast<std::size_t>(r), 0.0);
    g.failed.assign(static_cast<std::size_t>(r), false);

    CMat m = si.m;
    for (Index l = 0; l < r; ++l) {
        const double nrm = (svd.u * m.col(l)).norm();
        if (!(nrm > 1e-12)) {
            g.failed[static_cast<std::size_t>(l)] = true;
            continue;
        }
        m.col(l) *= std::sqrt(static_cast<double>(k)) / nrm;
    }
    Eigen::FullPivLU<CMat> lu(m);
    if (!lu.isInvertible()) {
        throw NumericalError("eigenvector matrix of the shift operator is singular");
    }
    const CMat nmat = lu.inverse().transpose();

    for (Index l = 0; l < r; ++l) {
        const auto li = static_cast<std::size_t>(l);
        if (g.failed[li]) {
            continue;
        }
        const CVec um = svd.u * m.col(l);
        const CVec b1 = vandermonde(g.z1[l], sp.k1);
        CVec c = CVec::Zero(k23);
        for (int n = 0; n < sp.k1; ++n) {
            c += std::conj(b1[n]) * um.segment(n * k23, k23);
        }
        c /= static_cast<double>(sp.k1);
        if (c.norm() < 1e-8) {
            g.failed[li] = true;
            continue;
        }
        if (sp.k2 > 1) {
            const Index len = static_cast<Index>(sp.k2 - 1) * sp.k3;
            const CVec top = c.head(len);
            const CVec bot = c.segment(sp.k3, len);
            g.z2[l] = unit(top.dot(bot) / top.squaredNorm());
        }
        const CVec b2 = vandermonde(g.z2[l], sp.k2);
        CVec d = CVec::Zero(sp.k3);
        for (int a = 0; a < sp.k2; ++a) {
            d += std::conj(b2[a]) * c.segment(static_cast<Index>(a) * sp.k3, sp.k3);
        }
        d /= static_cast<double>(sp.k2);
        if (d.norm() < 1e-8) {
            g.failed[li] = true;
            continue;
        }
        if (sp.k3 > 1) {
            const CVec top = d.head(sp.k3 - 1);
            const CVec bot = d.tail(sp.k3 - 1);
            g.z3[l] = unit(top.dot(bot) / top.squaredNorm());
        }
        const CVec ahat = kron(kron(b1, b2), vandermonde(g.z3[l], sp.k3));
        const Complex proj = ahat.dot(um) / static_cast<double>(k);
        g.residual[li] = (um - proj * ahat).norm() / um.norm();

        const CVec bl = svd.v.conjugate() * (svd.s.cast<Complex>().cwiseProduct(nmat.col(l)));
        const CVec c1 = vandermonde(g.z1[l], sp.l1);
        const CVec c2 = vandermonde(g.z2[l], sp.l2);
        const CVec c3 = vandermonde(g.z3[l], sp.l3);
        CVec b4 = CVec::Zero(w);
        for (int i1 = 0; i1 < sp.l1; ++i1) {
            for (int i2 = 0; i2 < sp.l2; ++i2) {
                for (int i3 = 0; i3 < sp.l3; ++i3) {
                    const Complex coef = std::conj(c1[i1] * c2[i2] * c3[i3]);
                    const Index off = ((static_cast<Index>(i1) * sp.l2 + i2) * sp.l3 + i3) * w;
                    b4 += coef * bl.segment(off, w);
                }
            }
        }
        g.b4.col(l) = b4 / static_cast<double>(static_cast<long long>(sp.l1) * sp.l2 * sp.l3);
    }
    return g;
}

PathSet params_from_generators(const GeneratorSet& g, double delta_f, ParamDiagnostics* diag)
{
    constexpr double kEdge = 1e-9;
    constexpr double kDelayGuard = 0.05;
    ParamDiagnostics local;
    auto clip = [&local](double x) {
        if (x > 1.0 || x < -1.0) {
            ++local.clips;
            return std::clamp(x, -1.0, 1.0);
        }
        return x;
    };
    PathSet out;
    const Index w = g.b4.rows();
    for (Index l = 0; l < g.z1.size(); ++l) {
        PathParams p;
        p.tau = -std::arg(g.z1[l]) / (2.0 * kPi * delta_f);
        if (p.tau < -kDelayGuard / delta_f) {
            p.tau += 1.0 / delta_f;
            ++local.folded_delays;
        } else if (p.tau < 0.0) {
            p.tau = 0.0;
        }
        p.theta = std::clamp(std::acos(clip(-std::arg(g.z2[l]) / kPi)), kEdge, kPi - kEdge);
        p.phi = std::clamp(std::acos(clip(-std::arg(g.z3[l]) / (kPi * std::sin(p.theta)))), kEdge, kPi - kEdge);
        p.rho = w > 0 ? g.b4.col(l).squaredNorm() / static_cast<double>(w) : 0.0;
        out.paths.push_back(p);
    }
    std::stable_sort(out.paths.begin(), out.paths.end(),
                     [](const PathParams& a, const PathParams& b) { return a.rho > b.rho; });
    if (diag) {
        diag->clips += local.clips;
        diag->folded_delays += local.folded_delays;
    }
    return out;
}

void VstdConfig::validate() const
{
    if (n_d < 2 || m_v < 1 || m_h < 1 || snapshots < 1) {
        throw ConfigError("VSTD needs N_d >= 2, M_v, M_h, W >= 1");
    }
    if (!(delta_f > 0.0) || !(noise_var >= 0.0)) {
        throw ConfigError("VSTD needs delta_f > 0 and noise variance >= 0");
    }
    if (smoothing) {
        smoothing->validate(n_d, m_v, m_h);
    }
    if (fixed_rank < 0 || max_rank < 0 || row_cap < 0) {
        throw ConfigError("VSTD rank limits and row cap must be >= 0");
    }
}

VstdResult build_grid_record(const SnapshotBlock& block, const VstdConfig& cfg, int grid_id)
{
    cfg.validate();
    if (block.n_d != cfg.n_d || block.m_v != cfg.m_v || block.m_h != cfg.m_h) {
        throw ConfigError("snapshot block does not match the VSTD configuration");
    }
    const int w = static_cast<int>(block.snapshots());
    VstdResult res;
    auto& diag = res.diagnostics;
    diag.grid_id = grid_id;
    const CMat x3 = matricize_x3(tensorize(block.data, cfg.n_d, cfg.m_v, cfg.m_h));
    diag.smoothing = cfg.smoothing ? *cfg.smoothing : select_smoothing(cfg.n_d, cfg.m_v, cfg.m_h, cfg.row_cap);
    const auto& sp = diag.smoothing;
    const CMat xs = spatial_smooth(x3, cfg.n_d, cfg.m_v, cfg.m_h, sp);
    const GramEigen ge = gram_eigen(xs);
    diag.singular_values = ge.values.cwiseSqrt();

    const UniquenessReport cap = check_uniqueness(sp, 0, w);
    if (cfg.fixed_rank > 0) {
        diag.lbar = cfg.fixed_rank;
    } else {
        int bound = static_cast<int>(cap.bound);
        if (cfg.max_rank > 0) {
            bound = std::min(bound, cfg.max_rank);
        }
        const auto mdl = estimate_rank_mdl(diag.singular_values, static_cast<double>(xs.cols()), bound);
        diag.lbar = mdl.rank;
        diag.mdl_degenerate = mdl.degenerate;
    }
    diag.uniqueness = check_uniqueness(sp, diag.lbar, w);
    if (!diag.uniqueness.pass) {
        throw ConfigError("Lbar = " + std::to_string(diag.lbar) + " exceeds the uniqueness bound " +
                          std::to_string(diag.uniqueness.bound) + " of the smoothing split");
    }

    const TruncatedSvd svd = truncate(xs, ge, diag.lbar);
    const ShiftInvariance si = shift_invariance_evd(svd.u, sp, cfg.evd);
    const GeneratorSet gen = extract_generators(svd, si, sp, w);
    diag.residuals = gen.residual;
    for (std::size_t l = 0; l < gen.failed.size(); ++l) {
        if (gen.failed[l]) {
            throw NumericalError("generator extraction failed for path " + std::to_string(l) + " of grid " +
                                 std::to_string(grid_id));
        }
    }
    ParamDiagnostics pd;
    res.record.grid_id = grid_id;
    res.record.paths = params_from_generators(gen, cfg.delta_f, &pd);
    diag.clips = pd.clips;
    diag.folded_delays = pd.folded_delays;
    return res;
}

VstdResult build_grid_record(const GridScene& scene, int g, const VstdConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    Rng rng(seed);
    const SnapshotBlock block =
        collect_snapshots(scene, g, cfg.snapshots, cfg.n_d, cfg.m_v, cfg.m_h, cfg.delta_f, cfg.noise_var, rng, cfg.gains);
    return build_grid_record(block, cfg, g);
}

DatabaseBuild build_database(const GridScene& scene, const VstdConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    const int u = scene.count();
    std::vector<std::optional<VstdResult>> results(static_cast<std::size_t>(u));
    std::vector<VstdDiagnostics> diags(static_cast<std::size_t>(u));
    parallel_for(u, [&](std::ptrdiff_t g) {
        try {
            results[static_cast<std::size_t>(g)] =
                build_grid_record(scene, static_cast<int>(g), cfg, derive_seed(seed, static_cast<std::uint64_t>(g)));
        } catch (const NumericalError&) {
            diags[static_cast<std::size_t>(g)].grid_id = static_cast<int>(g);
        }
    });
    DatabaseBuild out{ScsiDatabase(scene.geometry), {}, {}};
    out.db.metadata().n_d = cfg.n_d;
    out.db.metadata().snapshots = cfg.snapshots;
    out.db.metadata().snr_db = cfg.noise_var > 0.0 ? -10.0 * std::log10(cfg.noise_var) : 300.0;
    for (int g = 0; g < u; ++g) {
        auto& r = results[static_cast<std::size_t>(g)];
        if (r) {
            out.db.insert(r->record);
            out.diagnostics.push_back(r->diagnostics);
        } else {
            out.failed_grids.push_back(g);
            out.diagnostics.push_back(diags[static_cast<std::size_t>(g)]);
        }
    }
    return out;
}

void write_diagnostics_csv(const VstdDiagnostics& d, std::ostream& os)
{
    const auto& sp = d.smoothing;
    os << std::setprecision(17);
    os << "#vstd-diag v1, grid=" << d.grid_id << ", lbar=" << d.lbar << ", K1=" << sp.k1 << ", L1=" << sp.l1
       << ", K2=" << sp.k2 << ", L2=" << sp.l2 << ", K3=" << sp.k3 << ", L3=" << sp.l3
       << ", bound=" << d.uniqueness.bound << ", margin=" << d.uniqueness.margin << ", clips=" << d.clips
       << ", folded=" << d.folded_delays << ", mdl_degenerate=" << (d.mdl_degenerate ? 1 : 0) << "\n";
    os << "kind,index,value\n";
    for (Index i = 0; i < d.singular_values.size(); ++i) {
        os << "sv," << i << ',' << d.singular_values[i] << "\n";
    }
    for (std::size_t l = 0; l < d.residuals.size(); ++l) {
        os << "residual," << l << ',' << d.residuals[l] << "\n";
    }
}

} // namespace scsice
