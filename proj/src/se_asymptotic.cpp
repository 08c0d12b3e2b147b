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

#include "qmimo/se_asymptotic.hpp"

#include <cmath>

namespace qmimo {

CMat vm_tensor(const CMat& b, int m) { return b * b(m, m) + b.col(m) * b.col(m).adjoint(); }

CMat xi_matrix(const CMat& b, const CMat& b_prime, const CMat& n, double p, double p_prime, int m) {
    return b(m, m) * (p / p_prime) * b_prime + n.col(m) * n.col(m).adjoint();
}

CMat copilot_coupling(const LinkModel& model, const EstimatorStatistics& stats, int bs, int u, int v) {
    const RVec alpha = model.bits.alpha(bs);
    const CMat& psi = stats.psi(bs, u);
    return model.powers(u) * model.tau_p *
           (model.correlation.r(bs, v) * alpha.asDiagonal() * psi * alpha.asDiagonal() * model.correlation.r(bs, u));
}

SeTerms mrc_closed_form(const LinkModel& model, const EstimatorStatistics& stats, int u) {
    const int K = model.users();
    const int j = u / K;
    const RVec& pw = model.powers;
    const double p = pw(u);
    const CMat& b = stats.b(j, u);
    const RVec bd = b.diagonal().real();
    const double tr_b = bd.sum();
    const RVec alpha = model.bits.alpha(j);
    const RVec w = (1.0 - alpha.array()) / alpha.array();

    SeTerms t;
    t.a = p * tr_b * tr_b;
    t.b = p * trace_product(b, b);
    t.f = model.sigma2 * tr_b;
    t.g = model.sigma2 * w.dot(bd);
    double spread = 0.0;    // sum_v p_v tr(B R_v)
    double coherent = 0.0;  // sum_{v on pilot} p_v^2 |tr(N_v)|^2 / p
    for (int v = 0; v < model.total_users(); ++v) {
        const double pv = pw(v);
        spread += pv * trace_product(b, model.correlation.r(j, v));
        t.e += pv * trace_product(b, stats.c(j, v));
        const RVec cd = stats.c(j, v).diagonal().real();
        if (model.pilots.same_pilot(u, v)) {
            const CMat n = v == u ? b : copilot_coupling(model, stats, j, u, v);
            const double tr_n2 = std::norm(n.trace());
            coherent += pv * pv * tr_n2 / p;
            const RVec n_diag2 = n.diagonal().cwiseAbs2();
            // (p_v^2 / p) Xi_mm = p_v B_mm B'_mm + (p_v^2 / p) |N_mm|^2
            const RVec bvd = stats.b(j, v).diagonal().real();
            t.g += (w.array() * (pv * bd.array() * bvd.array() + (pv * pv / p) * n_diag2.array() +
                                 pv * cd.array() * bd.array()))
                       .sum();
            if (v == u) continue;
            const double val = pv * (trace_product(b, stats.b(j, v)) + (pv / p) * tr_n2);
            (v / K == j ? t.c : t.d) += val;
        } else {
            const RVec rd = model.correlation.r(j, v).diagonal().real();
            t.g += pv * (w.array() * rd.array() * bd.array()).sum();
            (v / K == j ? t.c : t.d) += pv * trace_product(b, stats.b(j, v));
        }
    }
    t.aggregate = spread + coherent - t.a;
    finalize(t, model.tau_u(), model.tau_c);
    return t;
}

DetEqInput mmse_deteq_input(const LinkModel& model, const EstimatorStatistics& stats, const CMat& z, int u,
                            bool multicell) {
    const int K = model.users();
    const int M = model.antennas();
    const int j = u / K;
    const double p = model.powers(u);
    DetEqInput in;
    const int first = multicell ? 0 : j * K;
    const int last = multicell ? model.total_users() : (j + 1) * K;
    for (int v = first; v < last; ++v) in.delta.push_back((model.powers(v) / p) * stats.b(j, v));
    in.d = z / (p * M);
    in.alpha = model.sigma2 / (p * M);
    return in;
}

namespace {

/// Shared by both MMSE theorems so that their single-cell cases coincide
/// exactly.
SeTerms mmse_asymptotic(const LinkModel& model, const EstimatorStatistics& stats, const CMat& z, int u,
                        bool multicell, const SolveOptions& opt) {
    const int K = model.users();
    const int M = model.antennas();
    const int j = u / K;
    const int first = multicell ? 0 : j * K;
    const RVec& pw = model.powers;
    const double p = pw(u);

    const DetEqInput in = mmse_deteq_input(model, stats, z, u, multicell);
    const DetEqSolution sol = solve_gamma(in, opt);
    // tr(B_v T_v) / M with T_v anchored at user v equals delta_v of this
    // solve: re-anchoring rescales Gamma by p_v / p_u and Delta by p_u / p_v.
    const RVec& delta = sol.delta();
    const double dk = delta(u - first);
    const double den = (1.0 + dk) * (1.0 + dk);
    const DetEqSolution::Projector proj = sol.projector(stats.b(j, u));

    SeTerms t;
    t.a = p * (dk / (1.0 + dk)) * (dk / (1.0 + dk));
    t.b = 0.0;
    for (int v = 0; v < model.total_users(); ++v) {
        const double pv = pw(v);
        const bool own = v / K == j;
        if (own && v == u) {
            // no intra-cell term for the target itself
        } else if (own || multicell) {
            const double dv = delta(v - first);
            (own ? t.c : t.d) += pv * proj(stats.b(j, v)) / M / (den * (1.0 + dv) * (1.0 + dv));
        } else if (model.pilots.same_pilot(u, v)) {
            // tr(sqrt(p_v / p_u) R_v R_u^{-1} B_u Gamma) / M, without R_u^{-1}.
            const cdouble tr = copilot_coupling(model, stats, j, u, v).cwiseProduct(sol.gamma().transpose()).sum();
            t.d += pv * (pv / p) * std::norm(tr / static_cast<double>(M)) / den;
        } else {
            t.d += pv * proj(stats.b(j, v)) / M / den;
        }
        t.e += pv * proj(stats.c(j, v)) / M / den;
    }
    t.f = model.sigma2 * proj(CMat::Identity(M, M)) / M / den;
    const CMat q = data_quantization_term(model, j).cast<cdouble>().asDiagonal();
    t.g = proj(q) / M / den;
    t.aggregate = t.interference();
    finalize(t, model.tau_u(), model.tau_c);
    return t;
}

}  // namespace

SeTerms qa_m_mmse_asymptotic(const LinkModel& model, const EstimatorStatistics& stats, int u,
                             const SolveOptions& options) {
    const int j = u / model.users();
    return mmse_asymptotic(model, stats, z_multicell(model, stats, j, true), u, true, options);
}

SeTerms qa_s_mmse_asymptotic(const LinkModel& model, const EstimatorStatistics& stats, int u,
                             const SolveOptions& options) {
    const int j = u / model.users();
    return mmse_asymptotic(model, stats, z_singlecell(model, stats, j, true), u, false, options);
}

bool has_asymptotic(Scheme s) { return s == Scheme::mrc || s == Scheme::qa_m_mmse || s == Scheme::qa_s_mmse; }

std::vector<SeTerms> asymptotic_terms(Scheme s, const LinkModel& model, const EstimatorStatistics& stats,
                                      const SolveOptions& options) {
    if (!has_asymptotic(s)) throw ConfigError("no asymptotic form for scheme " + to_string(s));
    const int K = model.users();
    std::vector<SeTerms> out;
    out.reserve(model.total_users());
    for (int j = 0; j < model.cells(); ++j) {
        CMat z;
        if (s == Scheme::qa_m_mmse) z = z_multicell(model, stats, j, true);
        if (s == Scheme::qa_s_mmse) z = z_singlecell(model, stats, j, true);
        for (int u = j * K; u < (j + 1) * K; ++u) {
            if (s == Scheme::mrc)
                out.push_back(mrc_closed_form(model, stats, u));
            else
                out.push_back(mmse_asymptotic(model, stats, z, u, s == Scheme::qa_m_mmse, options));
        }
    }
    return out;
}

}  // namespace qmimo
