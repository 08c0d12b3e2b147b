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

#include "qmimo/spatial_correlation.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace qmimo {

GaussHermiteRule gauss_hermite(int order) {
    if (order < 1) throw DomainError("gauss_hermite: order must be >= 1");
    // Jacobi matrix of the physicists' Hermite polynomials: zero diagonal,
    // off-diagonal sqrt(i / 2).
    RMat jacobi = RMat::Zero(order, order);
    for (int i = 1; i < order; ++i) {
        const double b = std::sqrt(0.5 * i);
        jacobi(i, i - 1) = b;
        jacobi(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<RMat> eig(jacobi);
    GaussHermiteRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double mu0 = std::sqrt(kPi);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

CMat local_scattering_matrix(double beta, double phi_rad, double asd_rad, int antennas,
                             int quadrature_order) {
    if (!(beta > 0.0)) throw DomainError("local_scattering_matrix: beta must be positive");
    if (!(asd_rad >= 0.0)) throw DomainError("local_scattering_matrix: asd must be >= 0");
    if (antennas < 1) throw DomainError("local_scattering_matrix: need at least one antenna");

    // First column: c[d] = E{exp(j pi d sin(phi + delta))}, d = m - n >= 0.
    CVec column(antennas);
    column(0) = 1.0;
    if (asd_rad == 0.0) {
        for (int d = 1; d < antennas; ++d) column(d) = std::polar(1.0, kPi * d * std::sin(phi_rad));
    } else {
        thread_local std::map<int, GaussHermiteRule> cache;
        auto it = cache.find(quadrature_order);
        if (it == cache.end()) it = cache.emplace(quadrature_order, gauss_hermite(quadrature_order)).first;
        const GaussHermiteRule& rule = it->second;
        const double scale = std::sqrt(2.0) * asd_rad;
        const double norm = 1.0 / std::sqrt(kPi);
        for (int d = 1; d < antennas; ++d) {
            cdouble acc = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                acc += rule.weights[q] * std::polar(1.0, kPi * d * std::sin(phi_rad + scale * rule.nodes[q]));
            column(d) = norm * acc;
        }
    }

    CMat r(antennas, antennas);
    for (int m = 0; m < antennas; ++m) {
        for (int n = 0; n < antennas; ++n) {
            const int d = m - n;
            r(m, n) = beta * (d >= 0 ? column(d) : std::conj(column(-d)));
        }
    }
    return r;
}

CorrelationSet::CorrelationSet(int cells, int users, int antennas)
    : cells_(cells), users_(users), antennas_(antennas) {
    r_.assign(static_cast<std::size_t>(cells) * cells * users, CMat::Zero(antennas, antennas));
    beta_ = RMat::Zero(cells, cells * users);
    angle_ = RMat::Zero(cells, cells * users);
}

CorrelationSet build_correlation_set(const NetworkConfig& config, const UserDrop& drop, const Grid& grid) {
    const int L = grid.cells();
    CorrelationSet set(L, config.users, config.antennas);
    set.asd_rad = deg_to_rad(config.asd_deg);
    for (int j = 0; j < L; ++j) {
        for (int u = 0; u < set.total_users(); ++u) {
            const double beta = large_scale_gain(drop.distance_km(j, u));
            const double phi = drop.azimuth_rad(j, u);
            set.beta(j, u) = beta;
            set.angle(j, u) = phi;
            set.r(j, u) = local_scattering_matrix(beta, phi, set.asd_rad, config.antennas,
                                                  config.quadrature_order);
        }
    }
    return set;
}

RegularizedInverse regularized_inverse(const CMat& r, double beta, double initial_epsilon) {
    const CMat herm = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> eig(herm);
    const RVec& lambda = eig.eigenvalues();
    const double lmax = std::max(lambda.maxCoeff(), 0.0);
    const double cond_limit = 1.0 / (16.0 * std::numeric_limits<double>::epsilon());

    double eps = initial_epsilon;
    for (;;) {
        const double shift = eps * beta;
        const double lmin = lambda.minCoeff() + shift;
        if (lmin > 0.0 && (lmax + shift) / lmin < cond_limit) break;
        eps *= 10.0;
    }
    RVec inv = (lambda.array() + eps * beta).inverse();
    RegularizedInverse out;
    out.inverse = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
    out.epsilon = eps;
    return out;
}

std::string matrix_to_csv(const CMat& m) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << m(i, j).real() << ',' << m(i, j).imag();
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace qmimo
