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

#include "qmimo/scenario.hpp"
#include "qmimo/types.hpp"

#include <vector>

namespace qmimo {

/// Nodes and weights for \int e^{-x^2} f(x) dx.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Golub-Welsch construction from the Hermite three-term recurrence.
GaussHermiteRule gauss_hermite(int order);

/// Local scattering model for a half-wavelength ULA:
///   [R]_{mn} = beta * E{ exp(j pi (m - n) sin(phi + delta)) },  delta ~ N(0, asd^2).
/// The expectation is evaluated by Gauss-Hermite quadrature. Only the first
/// column is integrated; the Hermitian Toeplitz structure fills the rest.
CMat local_scattering_matrix(double beta, double phi_rad, double asd_rad, int antennas,
                             int quadrature_order = 50);

/// Correlation matrices R_{j,u} and gains beta_{j,u} for every BS j and
/// flat user index u.
class CorrelationSet {
public:
    CorrelationSet() = default;
    CorrelationSet(int cells, int users, int antennas);

    int cells() const { return cells_; }
    int users() const { return users_; }
    int antennas() const { return antennas_; }
    int total_users() const { return cells_ * users_; }

    const CMat& r(int bs, int u) const { return r_[index(bs, u)]; }
    CMat& r(int bs, int u) { return r_[index(bs, u)]; }
    double beta(int bs, int u) const { return beta_(bs, u); }
    double& beta(int bs, int u) { return beta_(bs, u); }
    double angle(int bs, int u) const { return angle_(bs, u); }
    double& angle(int bs, int u) { return angle_(bs, u); }

    double asd_rad = 0.0;

private:
    std::size_t index(int bs, int u) const { return static_cast<std::size_t>(bs) * total_users() + u; }

    int cells_ = 0;
    int users_ = 0;
    int antennas_ = 0;
    std::vector<CMat> r_;
    RMat beta_;
    RMat angle_;
};

CorrelationSet build_correlation_set(const NetworkConfig& config, const UserDrop& drop, const Grid& grid);

struct RegularizedInverse {
    CMat inverse;
    double epsilon = 0.0;
};

/// (R + eps * beta * I)^{-1} for Hermitian PSD R. eps starts at
/// `initial_epsilon` and grows by 10x until the regularized matrix has a
/// finite condition number in double precision.
RegularizedInverse regularized_inverse(const CMat& r, double beta, double initial_epsilon = 1e-10);

/// Row-major dump with real/imag interleaved per entry, one row per line.
std::string matrix_to_csv(const CMat& m);

}  // namespace qmimo
