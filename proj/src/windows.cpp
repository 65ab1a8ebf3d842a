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

#include "scsice/linalg.hpp"
#include "scsice/windows.hpp"

namespace scsice
{

WindowKind parse_window_kind(const std::string& name)
{
    if (name == "rectangular" || name == "rect" || name == "none") {
        return WindowKind::rectangular;
    }
    if (name == "hann") {
        return WindowKind::hann;
    }
    if (name == "kaiser") {
        return WindowKind::kaiser;
    }
    throw ConfigError("unknown window '" + name + "' (rectangular, hann, kaiser)");
}

std::string to_string(WindowKind kind)
{
    switch (kind) {
    case WindowKind::rectangular:
        return "rectangular";
    case WindowKind::hann:
        return "hann";
    case WindowKind::kaiser:
        return "kaiser";
    }
    return "unknown";
}

double bessel_i0(double x)
{
    return std::cyl_bessel_i(0.0, x);
}

RVec window_1d(WindowKind kind, Index n, double shape)
{
    if (n < 1) {
        throw ConfigError("window length must be >= 1");
    }
    if (shape < 0.0) {
        throw ConfigError("window shape must be >= 0");
    }
    RVec w = RVec::Ones(n);
    if (n == 1) {
        return w;
    }
    switch (kind) {
    case WindowKind::rectangular:
        break;
    case WindowKind::hann:
        for (Index i = 0; i < n; ++i) {
            w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i + 1) / static_cast<double>(n + 1));
        }
        break;
    case WindowKind::kaiser: {
        const double den = bessel_i0(shape);
        for (Index i = 0; i < n; ++i) {
            const double r = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
            w[i] = bessel_i0(shape * std::sqrt(std::max(0.0, 1.0 - r * r))) / den;
        }
        break;
    }
    }
    return w / w.maxCoeff();
}

namespace
{
CMat xi_matrix(const RVec& eta, const CMat& f)
{
    const RVec p = eta.array().square();
    return f.adjoint() * p.cast<Complex>().asDiagonal() * f;
}
} // namespace

WindowPair make_window(WindowKind kind, int n_pilot, int m_v, int m_h, double shape)
{
    WindowPair wp;
    wp.kind = kind;
    wp.shape = shape;
    wp.eta_f = window_1d(kind, n_pilot, shape);
    const RVec v = window_1d(kind, m_v, shape);
    const RVec h = window_1d(kind, m_h, shape);
    wp.eta_s.resize(static_cast<Index>(m_v) * m_h);
    for (Index i = 0; i < m_v; ++i) {
        wp.eta_s.segment(i * m_h, m_h) = v[i] * h;
    }
    if (kind == WindowKind::rectangular) {
        wp.xi_f = CMat::Identity(n_pilot, n_pilot);
        wp.xi_s = CMat::Identity(wp.eta_s.size(), wp.eta_s.size());
        return wp;
    }
    wp.xi_f = xi_matrix(wp.eta_f, dft_matrix(n_pilot));
    wp.xi_s = xi_matrix(wp.eta_s, kron(dft_matrix(m_v), dft_matrix(m_h)));
    return wp;
}

} // namespace scsice
