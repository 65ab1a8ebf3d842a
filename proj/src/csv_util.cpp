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

#include <sstream>

#include "csv_util.hpp"

namespace scsice::detail
{

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        out.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

namespace
{
std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
} // namespace

HeaderFields parse_header_fields(const std::string& line)
{
    HeaderFields out;
    std::string body = line;
    for (char& c : body) {
        if (c == ',') {
            c = ' ';
        }
    }
    std::istringstream is(body);
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) {
            out[trim(tok.substr(0, eq))] = trim(tok.substr(eq + 1));
        }
    }
    return out;
}

std::string header_string(const HeaderFields& h, const std::string& key, const std::string& fallback)
{
    const auto it = h.find(key);
    return it == h.end() ? fallback : it->second;
}

int header_int(const HeaderFields& h, const std::string& key)
{
    const auto it = h.find(key);
    if (it == h.end()) {
        throw ConfigError("header is missing '" + key + "'");
    }
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw ConfigError("header field '" + key + "' is not an integer");
    }
}

double header_double(const HeaderFields& h, const std::string& key)
{
    const auto it = h.find(key);
    if (it == h.end()) {
        throw ConfigError("header is missing '" + key + "'");
    }
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ConfigError("header field '" + key + "' is not a number");
    }
}

std::vector<PathSet> read_path_rows(std::istream& is, GridGeometry& geom, std::string& line, bool require_all)
{
    std::vector<PathSet> grids(static_cast<std::size_t>(geom.count()));
    std::vector<bool> seen(grids.size(), false);
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t.rfind("#geometry", 0) == 0) {
            const auto h = parse_header_fields(t);
            geom.cols = header_int(h, "cols");
            geom.rows = header_int(h, "rows");
            geom.origin_x = header_double(h, "origin_x");
            geom.origin_y = header_double(h, "origin_y");
            geom.validate();
            if (static_cast<std::size_t>(geom.count()) != grids.size()) {
                throw ConfigError("#geometry cols*rows does not match U");
            }
            continue;
        }
        if (t[0] == '#' || t.rfind("grid_id", 0) == 0) {
            continue;
        }
        const auto f = split(t, ',');
        if (f.size() != 6) {
            throw ConfigError("malformed path row: '" + t + "'");
        }
        int id = 0;
        std::size_t l = 0;
        PathParams p;
        try {
            id = std::stoi(f[0]);
            l = static_cast<std::size_t>(std::stoul(f[1]));
            p.tau = std::stod(f[2]);
            p.theta = std::stod(f[3]);
            p.phi = std::stod(f[4]);
            p.rho = std::stod(f[5]);
        } catch (const std::exception&) {
            throw ConfigError("malformed path row: '" + t + "'");
        }
        if (id < 0 || static_cast<std::size_t>(id) >= grids.size()) {
            throw ConfigError("grid id " + std::to_string(id) + " out of range");
        }
        auto& ps = grids[static_cast<std::size_t>(id)];
        if (ps.size() != l) {
            throw ConfigError("path rows of grid " + std::to_string(id) + " are not consecutive");
        }
        ps.paths.push_back(p);
        seen[static_cast<std::size_t>(id)] = true;
    }
    for (std::size_t g = 0; g < seen.size(); ++g) {
        if (require_all && !seen[g]) {
            throw ConfigError("grid " + std::to_string(g) + " has no rows");
        }
    }
    return grids;
}

} // namespace scsice::detail
