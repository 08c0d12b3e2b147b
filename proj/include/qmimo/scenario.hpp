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

#pragma once

#include "qmimo/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qmimo {

/// Scalar scenario parameters. Counts follow the usual massive MIMO
/// notation: `cells` (L), `users` per cell (K), `antennas` per BS (M),
/// pilot `reuse` factor (f).
struct NetworkConfig {
    int cells = 4;
    int users = 3;
    int antennas = 16;
    int reuse = 3;
    int tau_c = 200;
    double cell_side_km = 0.25;
    double bandwidth_hz = 20e6;
    double noise_power_dbm = -94.0;
    double asd_deg = 10.0;
    double tx_power_dbm = 30.0;
    /// Optional per-user override, flat index cell * users + user.
    std::vector<double> user_power_dbm;
    /// Users closer than this to their own BS are redrawn. Zero keeps the
    /// plain uniform drop.
    double min_distance_km = 0.0;
    int quadrature_order = 50;
    std::uint64_t rng_seed = 1;

    int tau_p() const { return reuse * users; }
    int tau_u() const { return tau_c - tau_p(); }
    int total_users() const { return cells * users; }
    double noise_power_w() const { return dbm_to_watt(noise_power_dbm); }

    /// Per-user transmit power in watts (size cells * users).
    RVec powers_w() const;

    /// All violated invariants, empty if the configuration is usable.
    std::vector<std::string> problems() const;

    /// Throws ConfigError listing every problem.
    void validate() const;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Square cells with a BS at each center. Cell j sits at
/// (row, col) = (j / side, j % side).
struct Grid {
    int side = 1;
    double cell_side_km = 0.25;
    std::vector<Point> centers;
    std::vector<int> pilot_group;

    int cells() const { return static_cast<int>(centers.size()); }
};

Grid build_grid(const NetworkConfig& config);

/// User positions and BS-to-user distances. User (i, k) has flat index
/// i * K + k.
struct UserDrop {
    std::vector<Point> positions;
    /// distance_km(j, u): BS j to user u.
    RMat distance_km;
    /// azimuth_rad(j, u): angle from BS j to user u, measured from the array
    /// broadside (x axis).
    RMat azimuth_rad;
};

UserDrop drop_users(const NetworkConfig& config, const Grid& grid, Rng& rng);

/// Builds the distance/azimuth tables for fixed positions.
UserDrop place_users(const Grid& grid, std::vector<Point> positions);

/// Pathloss in dB: -148.1 - 37.6 log10(d / 1 km).
double large_scale_gain_db(double d_km);
/// Same, linear scale.
double large_scale_gain(double d_km);

struct PilotBook {
    int cells = 0;
    int users = 0;
    /// pilot_index[u] for flat user index u.
    std::vector<int> pilot_index;
    /// sharers[u]: every flat index sharing u's pilot, u included, sorted.
    std::vector<std::vector<int>> sharers;

    int num_pilots() const;
    bool same_pilot(int u, int v) const { return pilot_index[u] == pilot_index[v]; }
    const std::vector<int>& contamination_set(int u) const { return sharers[u]; }
};

PilotBook build_pilot_book(const NetworkConfig& config, const Grid& grid);

/// Cell/user pair behind a flat user index.
struct UserId {
    int cell;
    int user;
};

inline int flat_user(int cell, int user, int users_per_cell) { return cell * users_per_cell + user; }
inline UserId split_user(int u, int users_per_cell) { return {u / users_per_cell, u % users_per_cell}; }

/// CSV export: cell_id, user_id, x_km, y_km, pilot_index.
std::string drop_to_csv(const NetworkConfig& config, const UserDrop& drop, const PilotBook& pilots);

}  // namespace qmimo
