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

#ifndef SCSICE_LINALG_HPP
#define SCSICE_LINALG_HPP

#include <Eigen/Cholesky>

#include <vector>

#include "scsice/types.hpp"

namespace scsice
{

/// Unitary DFT, [F]_{i,j} = exp(-j 2 pi i j / n) / sqrt(n).
CMat dft_matrix(Index n);

CVec kron(const CVec& a, const CVec& b);
CMat kron(const CMat& a, const CMat& b);

/// Zeroes every entry with |i - j| > b.
CMat band_truncate(const CMat& r, Index b);

/// Zeroes entries whose circular distance min(|i-j|, n-|i-j|) exceeds b.
CMat band_truncate_periodic(const CMat& r, Index b);

/// Folding order 0, n-1, 1, n-2, ...: entries at circular distance d end up
/// at most 2d apart, so a periodic band of width b becomes a linear band of
/// width 2b.
std::vector<Index> fold_permutation(Index n);

/// Relative diagonal loading applied before every inversion.
inline constexpr double kDiagonalLoading = 1e-10;
/// Largest accepted condition number of a loaded Hermitian system.
inline constexpr double kMaxCondition = 1e12;

/// a + (kDiagonalLoading * tr(a) / dim) I, Hermitian part only.
CMat loaded(const CMat& a);

/// Solves A X = B for Hermitian positive (semi)definite A after diagonal
/// loading. Throws NumericalError if A is not positive definite or its
/// estimated condition number exceeds `max_cond`.
CMat hermitian_solve(const CMat& a, const CMat& b, double max_cond = kMaxCondition);

/// Cholesky solver for a Hermitian positive definite matrix plus an
/// explicit diagonal `loading`, with a condition-number guard.
class HermitianSolver
{
  public:
    HermitianSolver(const CMat& a, double loading, double max_cond = kMaxCondition);
    CMat solve(const CMat& b) const;
    Index size() const { return n_; }

  private:
    Index n_ = 0;
    Eigen::LLT<CMat> llt_;
};

/// Moore-Penrose pseudo-inverse via SVD with relative cutoff.
CMat pinv(const CMat& a, double rel_cutoff = 1e-10);

/// Hermitian band matrix in lower band storage with an unpivoted
/// Cholesky factorization. Storage is (b+1) x n with entry (i - j, j)
/// holding A(i, j) for 0 <= i - j <= b.
class BandedHermitian
{
  public:
    BandedHermitian() = default;
    /// Copies the lower band of `dense` (entries outside the band ignored).
    BandedHermitian(const CMat& dense, Index bandwidth);

    Index size() const { return n_; }
    Index bandwidth() const { return b_; }

    /// Adds `value` to every diagonal entry.
    void add_diagonal(double value);

    /// In-place factorization A = L L^H. Returns false on loss of positive
    /// definiteness; the object is then unusable for solves.
    bool factorize();
    bool factorized() const { return factorized_; }

    /// Solves A X = B using the factor.
    CMat solve(const CMat& b) const;

    /// Y = A X using the (unfactorized) band.
    CMat multiply(const CMat& x) const;

    /// Dense copy of the (unfactorized) band.
    CMat to_dense() const;

  private:
    Index n_ = 0;
    Index b_ = 0;
    CMat band_;
    bool factorized_ = false;
};

} // namespace scsice

#endif // SCSICE_LINALG_HPP
