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

#include "../oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace qmimo;

TEST_CASE("local scattering: zero spread at broadside is the all-beta matrix") {
    const CMat r = local_scattering_matrix(2.5, 0.0, 0.0, 6);
    CHECK((r - CMat::Constant(6, 6, 2.5)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("local scattering: unit-free diagonal") {
    for (double asd : {0.0, 0.05, 0.2, 0.6}) {
        const CMat r = local_scattering_matrix(0.7, 0.4, asd, 8);
        for (int m = 0; m < 8; ++m) CHECK(std::abs(r(m, m) - 0.7) < 1e-12);
    }
}

TEST_CASE("local scattering: agrees with adaptive quadrature") {
    const double asd = deg_to_rad(10.0), phi = deg_to_rad(30.0);
    const CMat r = local_scattering_matrix(1.0, phi, asd, 4);
    const CMat ref = oracle::local_scattering_quad(1.0, phi, asd, 4);
    CHECK(oracle::rel_fro(r, ref) < 1e-8);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) CHECK(std::abs(r(a, b) - ref(a, b)) <= 1e-8 * std::abs(ref(a, b)) + 1e-15);
}

TEST_CASE("local scattering: structural invariants") {
    Rng rng = make_stream(3, 0);
    std::uniform_real_distribution<double> ang(-kPi / 2, kPi / 2), spread(0.0, 0.6);
    for (int trial = 0; trial < 25; ++trial) {
        const double beta = 1e-9 * (1 + trial);
        const CMat r = local_scattering_matrix(beta, ang(rng), spread(rng), 12);
        CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * beta);
        const double lmin = Eigen::SelfAdjointEigenSolver<CMat>(r, Eigen::EigenvaluesOnly).eigenvalues()(0);
        CHECK(lmin >= -1e-10 * beta);
        CHECK(r.trace().real() / 12 == doctest::Approx(beta).epsilon(1e-12));
        for (int a = 1; a < 12; ++a)
            for (int b = 1; b < 12; ++b) CHECK(r(a, b) == r(a - 1, b - 1));
    }
}

TEST_CASE("local scattering: mirror angles give conjugate matrices") {
    const double asd = deg_to_rad(15.0);
    const CMat a = local_scattering_matrix(1.0, 0.6, asd, 10);
    const CMat b = local_scattering_matrix(1.0, -0.6, asd, 10);
    CHECK((a - b.conjugate()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("local scattering: decorrelation grows with the spread") {
    // Holds until the real part of E{exp(j pi sin d)} crosses zero near 44 deg.
    double prev = 1.0 + 1e-15;
    for (double deg = 0.0; deg <= 40.0; deg += 2.5) {
        const CMat r = local_scattering_matrix(1.0, 0.0, deg_to_rad(deg), 4);
        const double c = std::abs(r(0, 1));
        CHECK(c <= prev + 1e-13);
        prev = c;
    }
    CHECK(local_scattering_matrix(1.0, 0.0, deg_to_rad(50.0), 2)(0, 1).real() < 0.0);
}

TEST_CASE("local scattering: argument checks") {
    CHECK_THROWS_AS(local_scattering_matrix(0.0, 0.0, 0.1, 4), DomainError);
    CHECK_THROWS_AS(local_scattering_matrix(1.0, 0.0, -0.1, 4), DomainError);
    CHECK_THROWS_AS(local_scattering_matrix(1.0, 0.0, 0.1, 0), DomainError);
}

TEST_CASE("Gauss-Hermite rule") {
    const GaussHermiteRule g = gauss_hermite(50);
    double w = 0.0, x2 = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        w += g.weights[i];
        x2 += g.weights[i] * g.nodes[i] * g.nodes[i];
    }
    CHECK(w == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
    CHECK(x2 == doctest::Approx(std::sqrt(kPi) / 2).epsilon(1e-12));
}

TEST_CASE("correlation set: one user") {
    NetworkConfig c;
    c.cells = 1;
    c.users = 1;
    c.reuse = 1;
    c.antennas = 8;
    const Grid g = build_grid(c);
    Rng rng = make_stream(2, 0);
    const UserDrop d = drop_users(c, g, rng);
    const CorrelationSet set = build_correlation_set(c, d, g);
    const CMat& r = set.r(0, 0);
    const RVec ev = Eigen::SelfAdjointEigenSolver<CMat>(r, Eigen::EigenvaluesOnly).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-10 * set.beta(0, 0));
    CHECK(ev.sum() == doctest::Approx(8 * set.beta(0, 0)).epsilon(1e-10));
    CHECK(set.beta(0, 0) == doctest::Approx(large_scale_gain(d.distance_km(0, 0))));
}

TEST_CASE("regularized inverse") {
    const CMat i4 = 3.0 * CMat::Identity(4, 4);
    const RegularizedInverse a = regularized_inverse(i4, 3.0);
    CHECK((a.inverse - CMat::Identity(4, 4) / 3.0).cwiseAbs().maxCoeff() < 1e-9);

    const CMat rank1 = local_scattering_matrix(2.0, 0.3, 0.0, 6);
    const RegularizedInverse b = regularized_inverse(rank1, 2.0);
    CHECK(b.inverse.allFinite());
    CHECK((rank1 * b.inverse * rank1 - rank1).cwiseAbs().maxCoeff() < 1e-4 * 2.0);

    const CMat good = local_scattering_matrix(1.0, 0.2, deg_to_rad(40.0), 4);
    const RegularizedInverse c = regularized_inverse(good, 1.0);
    CHECK(oracle::rel_fro(c.inverse, good.inverse()) < 1e-8);
}

TEST_CASE("matrix CSV dump") {
    const std::string csv = matrix_to_csv(local_scattering_matrix(1.0, 0.1, 0.1, 3));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    const std::string first = csv.substr(0, csv.find('\n'));
    CHECK(std::count(first.begin(), first.end(), ',') == 5);
}
