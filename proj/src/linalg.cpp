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

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "scsice/linalg.hpp"

namespace scsice
{

namespace
{

inline Complex mul_conj(Complex a, Complex b)
{
    return {a.real() * b.real() + a.imag() * b.imag(), a.imag() * b.real() - a.real() * b.imag()};
}

inline Complex mul(Complex a, Complex b)
{
    return {a.real() * b.real() - a.imag() * b.imag(), a.imag() * b.real() + a.real() * b.imag()};
}

} // namespace

CMat dft_matrix(Index n)
{
    CMat f(n, n);
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const Index r = (i * j) % n;
            f(i, j) = std::polar(s, -2.0 * kPi * static_cast<double>(r) / static_cast<double>(n));
        }
    }
    return f;
}

CVec kron(const CVec& a, const CVec& b)
{
    CVec out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a[i] * b;
    }
    return out;
}

CMat kron(const CMat& a, const CMat& b)
{
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CMat band_truncate_periodic(const CMat& r, Index b)
{
    if (b < 0) {
        throw ConfigError("band_truncate_periodic: bandwidth must be >= 0");
    }
    const Index n = r.rows();
    CMat out = r;
    for (Index j = 0; j < r.cols(); ++j) {
        for (Index i = 0; i < n; ++i) {
            const Index d = std::abs(i - j);
            if (std::min(d, n - d) > b) {
                out(i, j) = Complex{0.0, 0.0};
            }
        }
    }
    return out;
}

std::vector<Index> fold_permutation(Index n)
{
    std::vector<Index> p;
    p.reserve(static_cast<std::size_t>(n));
    for (Index lo = 0, hi = n - 1; lo <= hi; ++lo, --hi) {
        p.push_back(lo);
        if (hi != lo) {
            p.push_back(hi);
        }
    }
    return p;
}

CMat band_truncate(const CMat& r, Index b)
{
    if (b < 0) {
        throw ConfigError("band_truncate: bandwidth must be >= 0");
    }
    CMat out = r;
    for (Index j = 0; j < r.cols(); ++j) {
        for (Index i = 0; i < r.rows(); ++i) {
            if (std::abs(i - j) > b) {
                out(i, j) = Complex{0.0, 0.0};
            }
        }
    }
    return out;
}

CMat loaded(const CMat& a)
{
    const Index n = a.rows();
    CMat out = 0.5 * (a + a.adjoint());
    const double tr = out.trace().real();
    const double load = tr > 0.0 ? kDiagonalLoading * tr / static_cast<double>(n) : kDiagonalLoading;
    out.diagonal().array() += load;
    return out;
}

HermitianSolver::HermitianSolver(const CMat& a, double loading, double max_cond) : n_(a.rows())
{
    if (a.rows() != a.cols()) {
        throw ConfigError("HermitianSolver: square matrix required");
    }
    CMat h = 0.5 * (a + a.adjoint());
    h.diagonal().array() += loading;
    llt_.compute(h);
    if (llt_.info() != Eigen::Success) {
        throw NumericalError("Hermitian system is not positive definite");
    }
    const double rc = llt_.rcond();
    if (!(rc > 0.0) || 1.0 / rc > max_cond) {
        throw NumericalError("Hermitian system condition number above limit");
    }
}

CMat HermitianSolver::solve(const CMat& b) const
{
    if (b.rows() != n_) {
        throw ConfigError("HermitianSolver: dimension mismatch");
    }
    return llt_.solve(b);
}

CMat hermitian_solve(const CMat& a, const CMat& b, double max_cond)
{
    const double tr = a.trace().real();
    const double load = tr > 0.0 ? kDiagonalLoading * tr / static_cast<double>(a.rows()) : kDiagonalLoading;
    return HermitianSolver(a, load, max_cond).solve(b);
}

CMat pinv(const CMat& a, double rel_cutoff)
{
    Eigen::BDCSVD<CMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVec& s = svd.singularValues();
    RVec inv = RVec::Zero(s.size());
    const double cut = s.size() > 0 ? rel_cutoff * s[0] : 0.0;
    for (Index i = 0; i < s.size(); ++i) {
        if (s[i] > cut) {
            inv[i] = 1.0 / s[i];
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

BandedHermitian::BandedHermitian(const CMat& dense, Index bandwidth)
    : n_(dense.rows()), b_(std::min<Index>(bandwidth, std::max<Index>(dense.rows() - 1, 0)))
{
    if (dense.rows() != dense.cols()) {
        throw ConfigError("BandedHermitian: square matrix required");
    }
    if (bandwidth < 0) {
        throw ConfigError("BandedHermitian: bandwidth must be >= 0");
    }
    band_ = CMat::Zero(b_ + 1, n_);
    for (Index j = 0; j < n_; ++j) {
        const Index last = std::min(n_ - 1, j + b_);
        for (Index i = j; i <= last; ++i) {
            band_(i - j, j) = dense(i, j);
        }
    }
}

void BandedHermitian::add_diagonal(double value)
{
    band_.row(0).array() += value;
}

bool BandedHermitian::factorize()
{
    for (Index j = 0; j < n_; ++j) {
        const Index k0 = std::max<Index>(0, j - b_);
        double d = band_(0, j).real();
        for (Index k = k0; k < j; ++k) {
            d -= std::norm(band_(j - k, k));
        }
        if (!(d > 0.0) || !std::isfinite(d)) {
            factorized_ = false;
            return false;
        }
        const double ljj = std::sqrt(d);
        band_(0, j) = ljj;
        const Index last = std::min(n_ - 1, j + b_);
        for (Index i = j + 1; i <= last; ++i) {
            Complex s = band_(i - j, j);
            for (Index k = std::max<Index>(0, i - b_); k < j; ++k) {
                s -= mul_conj(band_(i - k, k), band_(j - k, k));
            }
            band_(i - j, j) = s * (1.0 / ljj);
        }
    }
    factorized_ = true;
    return true;
}

CMat BandedHermitian::solve(const CMat& rhs) const
{
    if (!factorized_) {
        throw NumericalError("BandedHermitian::solve called without a valid factor");
    }
    if (rhs.rows() != n_) {
        throw ConfigError("BandedHermitian::solve: dimension mismatch");
    }
    CMat x = rhs;
    for (Index c = 0; c < x.cols(); ++c) {
        Complex* v = x.col(c).data();
        for (Index i = 0; i < n_; ++i) {
            Complex s = v[i];
            for (Index k = std::max<Index>(0, i - b_); k < i; ++k) {
                s -= mul(band_(i - k, k), v[k]);
            }
            v[i] = s / band_(0, i).real();
        }
        for (Index i = n_ - 1; i >= 0; --i) {
            Complex s = v[i];
            const Index last = std::min(n_ - 1, i + b_);
            for (Index k = i + 1; k <= last; ++k) {
                s -= mul_conj(v[k], band_(k - i, i));
            }
            v[i] = s / band_(0, i).real();
        }
    }
    return x;
}

CMat BandedHermitian::multiply(const CMat& x) const
{
    if (x.rows() != n_) {
        throw ConfigError("BandedHermitian::multiply: dimension mismatch");
    }
    CMat y = CMat::Zero(n_, x.cols());
    for (Index j = 0; j < n_; ++j) {
        y.row(j) += band_(0, j) * x.row(j);
        const Index last = std::min(n_ - 1, j + b_);
        for (Index i = j + 1; i <= last; ++i) {
            const Complex a = band_(i - j, j);
            y.row(i) += a * x.row(j);
            y.row(j) += std::conj(a) * x.row(i);
        }
    }
    return y;
}

CMat BandedHermitian::to_dense() const
{
    CMat d = CMat::Zero(n_, n_);
    for (Index j = 0; j < n_; ++j) {
        const Index last = std::min(n_ - 1, j + b_);
        for (Index i = j; i <= last; ++i) {
            d(i, j) = band_(i - j, j);
            d(j, i) = std::conj(band_(i - j, j));
        }
    }
    return d;
}

} // namespace scsice
