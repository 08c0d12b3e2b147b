// SPDX-License-Identifier: Apache-2.0
//
// qmimo: multicell massive MIMO with variable-resolution ADCs
// Copyright (C) 2026 The qmimo authors
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

#include "qmimo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace qmimo {

namespace {

int grid_side(int cells) {
    if (cells < 1) return -1;
    const int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cells))));
    return g * g == cells ? g : -1;
}

}  // namespace

RVec NetworkConfig::powers_w() const {
    RVec p(total_users());
    for (int u = 0; u < total_users(); ++u) {
        const double dbm = user_power_dbm.empty() ? tx_power_dbm : user_power_dbm[u];
        p(u) = dbm_to_watt(dbm);
    }
    return p;
}

std::vector<std::string> NetworkConfig::problems() const {
    std::vector<std::string> out;
    if (cells < 1) out.push_back("cells must be >= 1");
    else if (grid_side(cells) < 0)
        out.push_back("cells = " + std::to_string(cells) + " is not a perfect square (g x g grid)");
    if (users < 1) out.push_back("users must be >= 1");
    if (antennas < 1) out.push_back("antennas must be >= 1");
    if (reuse != 1 && reuse != 3)
        out.push_back("pilot reuse factor " + std::to_string(reuse) + " unsupported (use 1 or 3)");
    if (tau_c < 1) out.push_back("tau_c must be >= 1");
    if (tau_c - reuse * users <= 0)
        out.push_back("tau_u = tau_c - reuse * users = " + std::to_string(tau_c - reuse * users) +
                      " must be positive");
    if (!(cell_side_km > 0.0)) out.push_back("cell_side_km must be positive");
    if (!(bandwidth_hz > 0.0)) out.push_back("bandwidth_hz must be positive");
    if (!(asd_deg >= 0.0)) out.push_back("asd_deg must be >= 0");
    if (quadrature_order < 1) out.push_back("quadrature_order must be >= 1");
    if (min_distance_km < 0.0 || min_distance_km >= 0.5 * cell_side_km)
        out.push_back("min_distance_km must lie in [0, cell_side_km / 2)");
    if (!user_power_dbm.empty() && static_cast<int>(user_power_dbm.size()) != cells * users)
        out.push_back("user_power_dbm needs cells * users = " + std::to_string(cells * users) +
                      " entries");
    return out;
}

void NetworkConfig::validate() const {
    const auto issues = problems();
    if (issues.empty()) return;
    std::string msg = "invalid network configuration:";
    for (const auto& s : issues) msg += "\n  - " + s;
    throw ConfigError(msg);
}

Grid build_grid(const NetworkConfig& config) {
    const int g = grid_side(config.cells);
    if (g < 0) throw ConfigError("cells = " + std::to_string(config.cells) + " is not a perfect square");
    if (config.reuse != 1 && config.reuse != 3)
        throw ConfigError("pilot reuse factor " + std::to_string(config.reuse) + " unsupported");

    Grid grid;
    grid.side = g;
    grid.cell_side_km = config.cell_side_km;
    grid.centers.resize(config.cells);
    grid.pilot_group.resize(config.cells);
    for (int j = 0; j < config.cells; ++j) {
        const int row = j / g;
        const int col = j % g;
        grid.centers[j] = {(col + 0.5) * config.cell_side_km, (row + 0.5) * config.cell_side_km};
        // Three-coloring with no two edge-adjacent cells in the same group.
        grid.pilot_group[j] = config.reuse == 3 ? (row + 2 * col) % 3 : 0;
    }
    return grid;
}

UserDrop place_users(const Grid& grid, std::vector<Point> positions) {
    UserDrop drop;
    drop.positions = std::move(positions);
    const int L = grid.cells();
    const int n = static_cast<int>(drop.positions.size());
    drop.distance_km.resize(L, n);
    drop.azimuth_rad.resize(L, n);
    for (int j = 0; j < L; ++j) {
        for (int u = 0; u < n; ++u) {
            const double dx = drop.positions[u].x - grid.centers[j].x;
            const double dy = drop.positions[u].y - grid.centers[j].y;
            drop.distance_km(j, u) = std::hypot(dx, dy);
            drop.azimuth_rad(j, u) = std::atan2(dy, dx);
        }
    }
    return drop;
}

UserDrop drop_users(const NetworkConfig& config, const Grid& grid, Rng& rng) {
    const int K = config.users;
    const double half = 0.5 * grid.cell_side_km;
    std::uniform_real_distribution<double> offset(-half, half);
    std::vector<Point> positions(static_cast<std::size_t>(grid.cells()) * K);
    for (int i = 0; i < grid.cells(); ++i) {
        for (int k = 0; k < K; ++k) {
            double dx = 0.0;
            double dy = 0.0;
            do {
                dx = offset(rng);
                dy = offset(rng);
            } while (std::hypot(dx, dy) <= config.min_distance_km);
            positions[flat_user(i, k, K)] = {grid.centers[i].x + dx, grid.centers[i].y + dy};
        }
    }
    return place_users(grid, std::move(positions));
}

double large_scale_gain_db(double d_km) {
    if (!(d_km > 0.0)) throw DomainError("large_scale_gain: distance must be positive");
    return -148.1 - 37.6 * std::log10(d_km);
}

double large_scale_gain(double d_km) { return db_to_linear(large_scale_gain_db(d_km)); }

int PilotBook::num_pilots() const {
    if (pilot_index.empty()) return 0;
    return *std::max_element(pilot_index.begin(), pilot_index.end()) + 1;
}

PilotBook build_pilot_book(const NetworkConfig& config, const Grid& grid) {
    PilotBook book;
    book.cells = grid.cells();
    book.users = config.users;
    const int n = book.cells * book.users;
    book.pilot_index.resize(n);
    for (int i = 0; i < book.cells; ++i)
        for (int k = 0; k < book.users; ++k)
            book.pilot_index[flat_user(i, k, book.users)] = grid.pilot_group[i] * book.users + k;

    std::map<int, std::vector<int>> by_pilot;
    for (int u = 0; u < n; ++u) by_pilot[book.pilot_index[u]].push_back(u);
    book.sharers.resize(n);
    for (int u = 0; u < n; ++u) book.sharers[u] = by_pilot[book.pilot_index[u]];
    return book;
}

std::string drop_to_csv(const NetworkConfig& config, const UserDrop& drop, const PilotBook& pilots) {
    std::ostringstream os;
    os.precision(9);
    os << "cell_id,user_id,x_km,y_km,pilot_index\n";
    for (std::size_t u = 0; u < drop.positions.size(); ++u) {
        const auto id = split_user(static_cast<int>(u), config.users);
        os << id.cell << ',' << id.user << ',' << drop.positions[u].x << ',' << drop.positions[u].y << ','
           << pilots.pilot_index[u] << '\n';
    }
    return os.str();
}

}  // namespace qmimo
