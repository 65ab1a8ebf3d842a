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

#ifndef SCSICE_WINDOWS_HPP
#define SCSICE_WINDOWS_HPP

#include <string>

#include "scsice/types.hpp"

namespace scsice
{

enum class WindowKind
{
    rectangular,
    hann,
    kaiser
};

WindowKind parse_window_kind(const std::string& name);
std::string to_string(WindowKind kind);

/// Real symmetric 1-D window of length n, normalized to unit maximum.
/// The Hann variant omits the zero endpoints so every entry is positive.
RVec window_1d(WindowKind kind, Index n, double shape = 0.0);

/// Modified Bessel function of the first kind, order zero.
double bessel_i0(double x);

/// Frequency and antenna windows together with Xi = F^H |Lambda|^2 F.
struct WindowPair
{
    WindowKind kind = WindowKind::rectangular;
    double shape = 0.0;
    RVec eta_f;  // length N
    RVec eta_s;  // length M, vertical (x) horizontal
    CMat xi_f;   // N x N
    CMat xi_s;   // M x M
};

WindowPair make_window(WindowKind kind, int n_pilot, int m_v, int m_h, double shape = 0.0);

} // namespace scsice

#endif // SCSICE_WINDOWS_HPP
