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

#include <limits>
#include <vector>

namespace qmimo {

/// Bits value meaning "no quantization" (alpha = 1).
inline constexpr int kInfiniteBits = std::numeric_limits<int>::max();

/// AQNM distortion factor. Tabulated for 1..5 bits, 1 - (pi sqrt(3) / 2) 2^{-2b}
/// above, exactly 1 for kInfiniteBits.
double distortion_factor(int bits);

/// Per-BS, per-antenna ADC resolution and the matching distortion factors.
class BitAllocation {
public:
    BitAllocation() = default;
    /// bits(j, m) for BS j, antenna m.
    explicit BitAllocation(Eigen::ArrayXXi bits);

    static BitAllocation uniform(int cells, int antennas, int bits);
    static BitAllocation per_bs(const std::vector<int>& bits, int antennas);

    int cells() const { return static_cast<int>(bits_.rows()); }
    int antennas() const { return static_cast<int>(bits_.cols()); }
    int bits(int bs, int m) const { return bits_(bs, m); }
    const Eigen::ArrayXXi& bits() const { return bits_; }

    /// Diagonal of Sigma_AD for BS j.
    RVec alpha(int bs) const { return alpha_.row(bs).transpose(); }
    bool lossless(int bs) const { return (alpha_.row(bs) == 1.0).all(); }

private:
    Eigen::ArrayXXi bits_;
    Eigen::ArrayXXd alpha_;
};

/// Diagonal of the instantaneous quantization noise covariance at one BS,
///   R_q = Sigma (I - Sigma) diag(H P H^H + sigma2 I),
/// with H the M x (L K) channels into that BS and P = diag(powers).
RVec quant_noise_cov_exact(const RVec& alpha, const CMat& h, const RVec& powers, double sigma2);

/// Same with H P H^H replaced by its mean sum_u p_u R_{j,u}.
RVec quant_noise_cov_avg(const RVec& alpha, const CorrelationSet& set, int bs, const RVec& powers,
                         double sigma2);

/// AQNM output Sigma y + q with q ~ CN(0, diag(rq)) drawn independently of y.
CVec apply_aqnm(const RVec& alpha, const CVec& y, const RVec& rq, Rng& rng);

}  // namespace qmimo
