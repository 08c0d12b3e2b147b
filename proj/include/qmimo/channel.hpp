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

#include "qmimo/spatial_correlation.hpp"
#include "qmimo/types.hpp"

#include <vector>

namespace qmimo {

/// Hermitian PSD square root S (S S^H = R) from the eigendecomposition;
/// negative eigenvalue jitter is clipped at zero. Throws DomainError when R
/// is not Hermitian to within 1e-10 relative.
CMat sqrt_psd(const CMat& r);

/// One small-scale fading draw. h(bs) is M x (L K): column u holds h_{bs,u}.
struct ChannelRealization {
    std::vector<CMat> h;

    const CMat& at_bs(int bs) const { return h[bs]; }
};

/// Caches the square-root factors of a correlation set so repeated draws
/// cost one matrix-vector product per channel.
class ChannelSampler {
public:
    explicit ChannelSampler(const CorrelationSet& set);

    ChannelRealization draw(Rng& rng) const;
    const CMat& factor(int bs, int u) const { return sqrt_[static_cast<std::size_t>(bs) * users_ + u]; }

private:
    int cells_;
    int users_;
    int antennas_;
    std::vector<CMat> sqrt_;
};

ChannelRealization draw_channels(const CorrelationSet& set, Rng& rng);

}  // namespace qmimo
