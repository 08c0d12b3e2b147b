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

#include "qmimo/estimation.hpp"
#include "qmimo/types.hpp"

#include <string>
#include <vector>

namespace qmimo {

enum class Scheme {
    mrc,
    qa_m_mmse,  ///< quantization-aware multicell MMSE
    qa_s_mmse,  ///< quantization-aware single-cell MMSE
    u_m_mmse,   ///< multicell MMSE built as if ADCs were ideal
    u_s_mmse,   ///< single-cell MMSE built as if ADCs were ideal
};

std::string to_string(Scheme s);
/// Accepts "mrc", "qa_m_mmse", "qa_s_mmse", "u_m_mmse", "u_s_mmse"
/// (case-insensitive, '-' or '_'). Throws ConfigError otherwise.
Scheme parse_scheme(const std::string& name);
bool is_unaware(Scheme s);
bool is_multicell(Scheme s);

/// Diagonal of Sigma^{-1} Rq_avg Sigma^{-1} for the data phase at BS j,
///   (1 - alpha) / alpha * (sum_u p_u [R_{j,u}]_mm + sigma2).
RVec data_quantization_term(const LinkModel& model, int bs);

/// Z^M_j = sum_u p_u C_{j,u} (+ the quantization term).
CMat z_multicell(const LinkModel& model, const EstimatorStatistics& stats, int bs, bool with_quantization);

/// Z^S_j = sum_{other cells} p R + sum_{own cell} p C (+ the quantization term).
CMat z_singlecell(const LinkModel& model, const EstimatorStatistics& stats, int bs, bool with_quantization);

/// Cholesky solve of a Hermitian PD system with one right-hand side per
/// column. On failure the matrix is diagonally loaded and the relative load
/// is folded into `*loading` when given.
CMat solve_hpd(const CMat& a, const CMat& rhs, double* loading = nullptr);

/// MMSE-type combiners p_k (sum_{u in gram} p_u h_u h_u^H + Z + sigma2 I)^{-1} h_k
/// for every k in `targets`, one column each. `h` is M x (L K).
CMat mmse_combiners(const CMat& h, const RVec& powers, const CMat& z, double sigma2,
                    const std::vector<int>& gram_users, const std::vector<int>& targets,
                    double* loading = nullptr);

/// p_k |v^H h_k|^2 / v^H (sum_{u in gram, u != k} p_u h_u h_u^H + Z + sigma2 I) v,
/// the per-realization SINR an MMSE combiner maximizes.
double instantaneous_sinr(const CVec& v, const CMat& h, const RVec& powers, const CMat& z, double sigma2,
                          const std::vector<int>& gram_users, int k);

/// Per-drop combiner statistics for all five schemes. Z matrices depend on
/// second-order statistics only and are built once.
class CombinerSet {
public:
    CombinerSet(const LinkModel& model, const EstimatorStatistics& aware, const EstimatorStatistics& unaware);

    /// Combiners of the K own-cell users at BS j as an M x K matrix.
    /// `h_aware` and `h_unaware` are the M x (L K) estimates at that BS; the
    /// unaware one is only read by the unaware schemes.
    CMat build(Scheme s, int bs, const CMat& h_aware, const CMat& h_unaware, double* loading = nullptr) const;

    const CMat& z(Scheme s, int bs) const;

    /// Flat indices whose estimates enter the Gram matrix of scheme s at BS j.
    std::vector<int> gram_users(Scheme s, int bs) const;
    /// Flat indices of BS j's own users.
    std::vector<int> own_users(int bs) const;

private:
    const LinkModel* model_;
    std::vector<CMat> zm_, zs_, zm_u_, zs_u_;
};

}  // namespace qmimo
