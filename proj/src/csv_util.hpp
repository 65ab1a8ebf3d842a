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

#ifndef SCSICE_SRC_CSV_UTIL_HPP
#define SCSICE_SRC_CSV_UTIL_HPP

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "scsice/geometry.hpp"
#include "scsice/types.hpp"

namespace scsice::detail
{

using HeaderFields = std::map<std::string, std::string>;

/// Parses "#tag vN, k1=v1, k2=v2" (also accepts space separated pairs).
HeaderFields parse_header_fields(const std::string& line);

int header_int(const HeaderFields& h, const std::string& key);
double header_double(const HeaderFields& h, const std::string& key);
std::string header_string(const HeaderFields& h, const std::string& key, const std::string& fallback);

std::vector<std::string> split(const std::string& s, char sep);

/// Reads an optional "#geometry" line (updating `geom`), an optional column
/// header and `grid_id,l,tau_s,theta_rad,phi_rad,rho` rows. Every grid in
/// [0, geom.count()) must appear unless `require_all` is false; rows must be
/// ordered by l within a grid.
std::vector<PathSet> read_path_rows(std::istream& is, GridGeometry& geom, std::string& line, bool require_all = true);

} // namespace scsice::detail

#endif // SCSICE_SRC_CSV_UTIL_HPP
