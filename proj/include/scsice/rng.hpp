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

#ifndef SCSICE_RNG_HPP
#define SCSICE_RNG_HPP

#include <cstdint>
#include <random>

#include "scsice/types.hpp"

namespace scsice
{

/// SplitMix64 finalizer; used to derive independent stream seeds from a
/// master seed and a stream index.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    return mix_seed(master ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
{
    return derive_seed(derive_seed(master, a), b);
}

class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0)
    {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    int uniform_int(int lo, int hi)
    {
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }

    double normal() { return normal_(engine_); }

    /// Circularly symmetric complex Gaussian with E|x|^2 = variance.
    Complex complex_normal(double variance)
    {
        const double s = std::sqrt(0.5 * variance);
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {s * re, s * im};
    }

    /// Uniformly drawn unit-modulus QPSK symbol.
    Complex qpsk()
    {
        static constexpr double h = 0.70710678118654752440;
        const int k = uniform_int(0, 3);
        return {(k & 1) ? -h : h, (k & 2) ? -h : h};
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace scsice

#endif // SCSICE_RNG_HPP
