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

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>

namespace qmimo {

CMat sqrt_psd(const CMat& r) {
    if (r.rows() != r.cols()) throw DomainError("sqrt_psd: matrix must be square");
    const double scale = std::max(r.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    if ((r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw DomainError("sqrt_psd: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (r + r.adjoint()));
    const RVec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().adjoint();
}

ChannelSampler::ChannelSampler(const CorrelationSet& set)
    : cells_(set.cells()), users_(set.total_users()), antennas_(set.antennas()) {
    sqrt_.reserve(static_cast<std::size_t>(cells_) * users_);
    for (int j = 0; j < cells_; ++j)
        for (int u = 0; u < users_; ++u) sqrt_.push_back(sqrt_psd(set.r(j, u)));
}

ChannelRealization ChannelSampler::draw(Rng& rng) const {
    ChannelRealization out;
    out.h.resize(cells_);
    for (int j = 0; j < cells_; ++j) {
        out.h[j].resize(antennas_, users_);
        for (int u = 0; u < users_; ++u) out.h[j].col(u) = factor(j, u) * complex_normal(antennas_, rng);
    }
    return out;
}

ChannelRealization draw_channels(const CorrelationSet& set, Rng& rng) { return ChannelSampler(set).draw(rng); }

}  // namespace qmimo
