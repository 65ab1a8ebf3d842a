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

#include <cstdlib>
#include <sstream>

#include "scsice/parallel.hpp"
#include "scsice/types.hpp"

namespace scsice
{

namespace
{
int g_threads = 0;

int env_threads()
{
    if (const char* v = std::getenv("SCSICE_THREADS")) {
        const int n = std::atoi(v);
        if (n > 0) {
            return n;
        }
    }
    return 0;
}
} // namespace

int num_threads()
{
    if (g_threads > 0) {
        return g_threads;
    }
    if (const int e = env_threads(); e > 0) {
        return e;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_num_threads(int n) { g_threads = n > 0 ? n : 0; }

void SystemConfig::validate() const
{
    if (g_groups != 3) {
        throw ConfigError("the Type II pattern has exactly 3 CDM groups");
    }
    if (n_c <= 0 || n_c % 6 != 0 || n_c % g_groups != 0) {
        throw ConfigError("n_c must be a positive multiple of 6");
    }
    if (n_pilot() % 2 != 0) {
        throw ConfigError("pilot count per group must be even");
    }
    if (k_users <= 0 || k_users % (2 * g_groups) != 0) {
        throw ConfigError("k_users must be a positive multiple of 2*G");
    }
    if (m_v < 1 || m_h < 1) {
        throw ConfigError("antenna counts must be >= 1");
    }
    if (t_p != 2) {
        throw ConfigError("only T_p = 2 pilot symbols are supported");
    }
    if (!(delta_f > 0.0)) {
        throw ConfigError("delta_f must be positive");
    }
    if (!(noise_var >= 0.0)) {
        throw ConfigError("noise_var must be non-negative");
    }
    if (!(kaiser_shape >= 0.0)) {
        throw ConfigError("kaiser_shape must be non-negative");
    }
}

SystemConfig SystemConfig::desk() { return SystemConfig{}; }

SystemConfig SystemConfig::paper_scale()
{
    SystemConfig c;
    c.n_c = 816;
    c.m_v = 4;
    c.m_h = 16;
    c.k_users = 24;
    return c;
}

double PathSet::total_power() const
{
    double s = 0.0;
    for (const auto& p : paths) {
        s += p.rho;
    }
    return s;
}

std::string to_string(const SystemConfig& c)
{
    std::ostringstream os;
    os << "n_c=" << c.n_c << " N=" << c.n_pilot() << " df=" << c.delta_f << " G=" << c.g_groups
       << " Tp=" << c.t_p << " Mv=" << c.m_v << " Mh=" << c.m_h << " K=" << c.k_users
       << " sigma2=" << c.noise_var;
    return os.str();
}

} // namespace scsice
