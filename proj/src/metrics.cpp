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
#include "scsice/metrics.hpp"

namespace scsice
{

double to_db(double linear)
{
    if (!(linear > 0.0)) {
        return kDbFloor;
    }
    return std::max(kDbFloor, 10.0 * std::log10(linear));
}

NmseResult nmse(const std::vector<CMat>& estimates, const std::vector<CMat>& truths)
{
    if (estimates.size() != truths.size()) {
        throw ConfigError("nmse: estimate and truth counts differ");
    }
    NmseResult r;
    double acc = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (estimates[i].rows() != truths[i].rows() || estimates[i].cols() != truths[i].cols()) {
            throw ConfigError("nmse: shape mismatch");
        }
        const double den = truths[i].squaredNorm();
        if (!(den > 0.0)) {
            ++r.skipped;
            continue;
        }
        acc += to_db((estimates[i] - truths[i]).squaredNorm() / den);
        ++r.used;
    }
    r.db = r.used > 0 ? acc / r.used : kDbFloor;
    return r;
}

double mmse_mismatch_error(const CMat& r_ideal, const CMat& r_db, double noise_var)
{
    const Index n = r_ideal.rows();
    if (r_ideal.cols() != n || r_db.rows() != n || r_db.cols() != n) {
        throw ConfigError("mmse_mismatch_error: dimension mismatch");
    }
    CMat a = r_db;
    a.diagonal().array() += noise_var;
    const CMat g = hermitian_solve(a, r_db);
    CMat e = r_ideal - r_ideal * g;
    e = 0.5 * (e + e.adjoint());
    return e.trace().real() / static_cast<double>(n);
}

ScsiAccuracy scsi_accuracy(const CMat& r_f_db, const CMat& r_s_db, const CMat& r_f, const CMat& r_s,
                           double noise_var)
{
    ScsiAccuracy a;
    a.e_f = mmse_mismatch_error(r_f, r_f_db, noise_var);
    a.e_s = mmse_mismatch_error(r_s, r_s_db, noise_var);
    a.db = to_db(0.5 * (a.e_f + a.e_s));
    return a;
}

} // namespace scsice
