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

#include "qmimo/quantization.hpp"

#include <array>
#include <cmath>

namespace qmimo {

double distortion_factor(int bits) {
    static constexpr std::array<double, 5> table = {0.6366, 0.8825, 0.96546, 0.990503, 0.997501};
    if (bits == kInfiniteBits) return 1.0;
    if (bits < 1) throw DomainError("distortion_factor: bits must be >= 1");
    if (bits <= 5) return table[bits - 1];
    return 1.0 - (kPi * std::sqrt(3.0) / 2.0) * std::pow(2.0, -2.0 * bits);
}

BitAllocation::BitAllocation(Eigen::ArrayXXi bits) : bits_(std::move(bits)) {
    alpha_.resize(bits_.rows(), bits_.cols());
    for (Eigen::Index j = 0; j < bits_.rows(); ++j)
        for (Eigen::Index m = 0; m < bits_.cols(); ++m) alpha_(j, m) = distortion_factor(bits_(j, m));
}

BitAllocation BitAllocation::uniform(int cells, int antennas, int bits) {
    return BitAllocation(Eigen::ArrayXXi::Constant(cells, antennas, bits));
}

BitAllocation BitAllocation::per_bs(const std::vector<int>& bits, int antennas) {
    Eigen::ArrayXXi b(static_cast<Eigen::Index>(bits.size()), antennas);
    for (std::size_t j = 0; j < bits.size(); ++j) b.row(static_cast<Eigen::Index>(j)).setConstant(bits[j]);
    return BitAllocation(std::move(b));
}

RVec quant_noise_cov_exact(const RVec& alpha, const CMat& h, const RVec& powers, double sigma2) {
    if ((powers.array() < 0.0).any()) throw DomainError("quant_noise_cov_exact: negative power");
    const RVec received = h.cwiseAbs2() * powers;
    return (alpha.array() * (1.0 - alpha.array()) * (received.array() + sigma2)).matrix();
}

RVec quant_noise_cov_avg(const RVec& alpha, const CorrelationSet& set, int bs, const RVec& powers,
                         double sigma2) {
    RVec received = RVec::Zero(set.antennas());
    for (int u = 0; u < set.total_users(); ++u) received += powers(u) * set.r(bs, u).diagonal().real();
    return (alpha.array() * (1.0 - alpha.array()) * (received.array() + sigma2)).matrix();
}

CVec apply_aqnm(const RVec& alpha, const CVec& y, const RVec& rq, Rng& rng) {
    CVec q = complex_normal(y.size(), rng);
    return alpha.cast<cdouble>().cwiseProduct(y) + rq.cwiseSqrt().cast<cdouble>().cwiseProduct(q);
}

}  // namespace qmimo
