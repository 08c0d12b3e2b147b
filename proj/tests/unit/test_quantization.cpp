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

#include "qmimo/channel.hpp"
#include "qmimo/quantization.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <cstdio>

using namespace qmimo;

TEST_CASE("distortion factor: printed table") {
    const char* table[] = {"0.6366", "0.8825", "0.96546", "0.990503", "0.997501"};
    const int digits[] = {4, 4, 5, 6, 6};
    for (int b = 1; b <= 5; ++b) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.*f", digits[b - 1], distortion_factor(b));
        CHECK(std::string(buf) == table[b - 1]);
        CHECK(distortion_factor(b) == std::stod(table[b - 1]));
    }
}

TEST_CASE("distortion factor: formula above five bits") {
    CHECK(distortion_factor(10) == doctest::Approx(1.0 - kPi * std::sqrt(3.0) / 2.0 * std::pow(2.0, -20)));
    CHECK(std::abs(distortion_factor(10) - 0.99999740) < 1e-8);
    CHECK(distortion_factor(kInfiniteBits) == 1.0);
    CHECK_THROWS_AS(distortion_factor(0), DomainError);
    CHECK_THROWS_AS(distortion_factor(-3), DomainError);
    for (int b = 1; b < 30; ++b) {
        // 2^{-2b} drops below machine epsilon past b = 26
        if (b < 26) CHECK(distortion_factor(b) < distortion_factor(b + 1));
        CHECK(distortion_factor(b) <= distortion_factor(b + 1));
        CHECK(distortion_factor(b) > 0.0);
        CHECK(distortion_factor(b) <= 1.0);
    }
    // The closed form evaluated at five bits lands within 1e-3 of the table.
    CHECK(std::abs(1.0 - kPi * std::sqrt(3.0) / 2.0 / 1024.0 - distortion_factor(5)) < 1e-3);
    CHECK(distortion_factor(6) - distortion_factor(5) == doctest::Approx(1.835e-3).epsilon(1e-3));
}

TEST_CASE("bit allocation shapes") {
    const BitAllocation a = BitAllocation::per_bs({1, kInfiniteBits}, 3);
    CHECK(a.cells() == 2);
    CHECK(a.antennas() == 3);
    CHECK(a.alpha(0)(2) == distortion_factor(1));
    CHECK(a.lossless(1));
    CHECK_FALSE(a.lossless(0));
    CHECK_THROWS(BitAllocation::uniform(2, 3, 0));
}

TEST_CASE("exact quantization noise covariance: hand values") {
    const RVec one = RVec::Ones(3);
    const CMat h = CMat::Constant(3, 2, cdouble(0.3, -0.2));
    const RVec p = RVec::Constant(2, 1.5);
    CHECK(quant_noise_cov_exact(one, h, p, 0.1).cwiseAbs().maxCoeff() == 0.0);

    // M = 1, alpha = 0.5, total power plus noise = 2
    const RVec half = RVec::Constant(1, 0.5);
    CMat h1(1, 1);
    h1(0, 0) = 1.0;
    CHECK(quant_noise_cov_exact(half, h1, RVec::Constant(1, 1.5), 0.5)(0) == doctest::Approx(0.5));

    const RVec al = RVec::Constant(3, 0.7);
    const RVec r1 = quant_noise_cov_exact(al, h, p, 0.0);
    const RVec r2 = quant_noise_cov_exact(al, h, 2.0 * p, 0.0);
    CHECK((r2 - 2.0 * r1).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(quant_noise_cov_exact(al, h, -p, 0.0), DomainError);
}

TEST_CASE("averaged covariance: hand value and Monte Carlo mean of the exact one") {
    CorrelationSet one(1, 1, 3);
    const double beta = 2.0, pw = 0.5, s2 = 0.25;
    one.r(0, 0) = beta * CMat::Identity(3, 3);
    const RVec al = RVec::Constant(3, distortion_factor(2));
    const RVec avg1 = quant_noise_cov_avg(al, one, 0, RVec::Constant(1, pw), s2);
    for (int m = 0; m < 3; ++m) CHECK(avg1(m) == doctest::Approx(al(m) * (1 - al(m)) * (pw * beta + s2)));
    CHECK(quant_noise_cov_avg(RVec::Ones(3), one, 0, RVec::Constant(1, pw), s2).cwiseAbs().maxCoeff() == 0.0);

    CorrelationSet set(2, 2, 4);
    for (int j = 0; j < 2; ++j)
        for (int u = 0; u < 4; ++u) set.r(j, u) = local_scattering_matrix(0.5 + u, 0.3 * u - 0.4, 0.2, 4);
    const RVec p = (RVec(4) << 1.0, 0.5, 2.0, 0.25).finished();
    const RVec alpha = (RVec(4) << 0.6366, 0.8825, 0.96546, 1.0).finished();
    const RVec avg = quant_noise_cov_avg(alpha, set, 1, p, 0.3);
    Rng rng = make_stream(11, 0);
    RVec acc = RVec::Zero(4);
    const int n = 10000;
    for (int t = 0; t < n; ++t) acc += quant_noise_cov_exact(alpha, draw_channels(set, rng).at_bs(1), p, 0.3);
    acc /= n;
    for (int m = 0; m < 3; ++m) CHECK(std::abs(acc(m) - avg(m)) < 0.02 * avg(m));
    CHECK(acc(3) == 0.0);
    CHECK(avg(3) == 0.0);
}

TEST_CASE("AQNM output") {
    Rng rng = make_stream(12, 0);
    const CVec y = oracle::random_complex(4, 1, rng);
    CHECK(apply_aqnm(RVec::Ones(4), y, RVec::Zero(4), rng) == y);

    const RVec alpha = (RVec(4) << 0.6366, 0.8825, 0.96546, 0.990503).finished();
    const RVec rq = (RVec(4) << 0.4, 0.1, 0.05, 0.01).finished();
    const int n = 100000;
    RVec var = RVec::Zero(4);
    CVec mean = CVec::Zero(4);
    for (int t = 0; t < n; ++t) {
        const CVec q = apply_aqnm(alpha, y, rq, rng) - alpha.cast<cdouble>().cwiseProduct(y);
        var += q.cwiseAbs2();
        mean += q;
    }
    var /= n;
    mean /= n;
    for (int m = 0; m < 4; ++m) {
        CHECK(std::abs(var(m) - rq(m)) < 0.02 * rq(m));
        CHECK(std::abs(mean(m)) < 5 * std::sqrt(rq(m) / n));
    }
}

TEST_CASE("AQNM power bookkeeping with the exact covariance") {
    CorrelationSet set(1, 2, 3);
    set.r(0, 0) = local_scattering_matrix(1.0, 0.2, 0.3, 3);
    set.r(0, 1) = local_scattering_matrix(0.5, -0.7, 0.1, 3);
    const RVec p = RVec::Constant(2, 1.0);
    const double s2 = 0.2;
    const RVec alpha = RVec::Constant(3, distortion_factor(1));
    Rng rng = make_stream(13, 0);
    const int n = 50000;
    RVec in = RVec::Zero(3), out = RVec::Zero(3);
    for (int t = 0; t < n; ++t) {
        const CMat h = draw_channels(set, rng).at_bs(0);
        const CVec y = h.col(0) + h.col(1) + std::sqrt(s2) * complex_normal(3, rng);
        const CVec yq = apply_aqnm(alpha, y, quant_noise_cov_exact(alpha, h, p, s2), rng);
        in += y.cwiseAbs2();
        out += yq.cwiseAbs2();
    }
    for (int m = 0; m < 3; ++m) CHECK(std::abs(out(m) - alpha(m) * in(m)) < 0.02 * alpha(m) * in(m));
}
