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

#ifndef SCSICE_PARALLEL_HPP
#define SCSICE_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scsice
{

/// Number of worker threads used by the parallel kernels. Defaults to the
/// OpenMP runtime value, overridden by the SCSICE_THREADS environment
/// variable or `set_num_threads`.
int num_threads();
void set_num_threads(int n);

/// Runs `f(i)` for i in [0, n) on the OpenMP team. Exceptions thrown by any
/// iteration are captured and the first one is rethrown on the caller.
template <typename F>
void parallel_for(std::ptrdiff_t n, F&& f)
{
    std::exception_ptr first;
    std::mutex guard;
#pragma omp parallel for schedule(dynamic) num_threads(num_threads()) if (n > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!first) {
                first = std::current_exception();
            }
        }
    }
    if (first) {
        std::rethrow_exception(first);
    }
}

} // namespace scsice

#endif // SCSICE_PARALLEL_HPP
