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

#ifndef SCSICE_TYPES_HPP
#define SCSICE_TYPES_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace scsice
{

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kJ{0.0, 1.0};

/// Raised for invalid configuration or out-of-contract arguments.
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical stage cannot produce a trustworthy result
/// (ill-conditioned Gram matrix, rank-deficient subspace, ...).
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// System-level scalars shared by every module.
///
/// Invariants (checked by `validate()`): `n_c` divisible by `g_groups` and
/// by 6, `n_pilot == n_c / g_groups` is even, `k_users` divisible by
/// `2 * g_groups`, antenna counts positive.
struct SystemConfig
{
    int n_fft = 4096;
    int n_c = 96;            // data subcarriers
    double delta_f = 30e3;   // Hz
    int g_groups = 3;        // CDM groups
    int t_p = 2;             // pilot symbols
    int m_v = 2;             // vertical antennas
    int m_h = 8;             // horizontal antennas
    int k_users = 12;
    double noise_var = 1e-2; // per complex entry
    double kaiser_shape = 3.95;

    int n_pilot() const { return n_c / g_groups; }
    int antennas() const { return m_v * m_h; }
    int users_per_group() const { return k_users / g_groups; }
    int users_per_set() const { return k_users / (2 * g_groups); }

    void validate() const;

    /// Scaled-down defaults used for desk runs.
    static SystemConfig desk();
    /// Full-size parameters (816 subcarriers, 4x16 array, 24 users).
    static SystemConfig paper_scale();
};

/// One propagation path. Delay in seconds, angles in radians inside (0, pi),
/// linear power.
struct PathParams
{
    double tau = 0.0;
    double theta = kPi / 2;
    double phi = kPi / 2;
    double rho = 0.0;
};

/// Ordered list of paths, optionally with one complex gain per path for a
/// single channel realization.
struct PathSet
{
    std::vector<PathParams> paths;
    std::vector<Complex> gains;

    std::size_t size() const { return paths.size(); }
    bool has_gains() const { return gains.size() == paths.size() && !paths.empty(); }
    double total_power() const;
};

/// A channel matrix, frequency x antenna, for one user and one symbol.
using ChannelMatrix = CMat;

std::string to_string(const SystemConfig& cfg);

} // namespace scsice

#endif // SCSICE_TYPES_HPP
