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

#include "qmimo/combining.hpp"
#include "qmimo/estimation.hpp"
#include "qmimo/rmt.hpp"
#include "qmimo/se_montecarlo.hpp"
#include "qmimo/types.hpp"

#include <vector>

namespace qmimo {

/// V^m = E{h h^H |h_m|^2} for h ~ CN(0, B), computed as
///   B [B]_mm + b_m b_m^H,  b_m the m-th column of B.
CMat vm_tensor(const CMat& b, int m);

/// Xi = K V^m K^H with K = R' R^{-1} relating two co-pilot estimates at one
/// BS. Evaluated without R^{-1}:
///   Xi = [B]_mm (p / p') B' + n_m n_m^H,
/// where N = p tau_p R' Sigma Psi Sigma R = K B and n_m is its m-th column.
CMat xi_matrix(const CMat& b, const CMat& b_prime, const CMat& n, double p, double p_prime, int m);

/// p tau_p R_{j,v} Sigma Psi Sigma R_{j,u} for two users sharing a pilot; it
/// equals R_{j,v} R_{j,u}^{-1} B_{j,u} whenever R_{j,u} is invertible.
CMat copilot_coupling(const LinkModel& model, const EstimatorStatistics& stats, int bs, int u, int v);

/// Exact closed-form terms for MR combining of user u at its own BS.
/// Every field of the returned SeTerms is filled; `aggregate` holds the
/// interference total evaluated in one pass.
SeTerms mrc_closed_form(const LinkModel& model, const EstimatorStatistics& stats, int u);

/// Deterministic equivalent input used for user u under an MMSE scheme:
/// Delta_v = (p_v / p_u) B_{j,v}, D = Z / (p_u M), alpha = sigma2 / (p_u M).
/// The multicell version uses all L K users, the single-cell one only the
/// own cell.
DetEqInput mmse_deteq_input(const LinkModel& model, const EstimatorStatistics& stats, const CMat& z, int u,
                            bool multicell);

/// Large-M terms for the quantization-aware multicell MMSE combiner.
SeTerms qa_m_mmse_asymptotic(const LinkModel& model, const EstimatorStatistics& stats, int u,
                             const SolveOptions& options = {});

/// Large-M terms for the quantization-aware single-cell MMSE combiner.
SeTerms qa_s_mmse_asymptotic(const LinkModel& model, const EstimatorStatistics& stats, int u,
                             const SolveOptions& options = {});

/// True if a closed form or deterministic equivalent exists for scheme s.
bool has_asymptotic(Scheme s);

/// Terms for every user of the drop. Throws ConfigError for schemes without
/// an asymptotic form.
std::vector<SeTerms> asymptotic_terms(Scheme s, const LinkModel& model, const EstimatorStatistics& stats,
                                      const SolveOptions& options = {});

}  // namespace qmimo
