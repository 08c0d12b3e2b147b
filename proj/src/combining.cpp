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

#include "qmimo/combining.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
#include <numeric>

namespace qmimo {

std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::mrc: return "mrc";
    case Scheme::qa_m_mmse: return "qa_m_mmse";
    case Scheme::qa_s_mmse: return "qa_s_mmse";
    case Scheme::u_m_mmse: return "u_m_mmse";
    case Scheme::u_s_mmse: return "u_s_mmse";
    }
    return "?";
}

Scheme parse_scheme(const std::string& name) {
    std::string n;
    for (char c : name) n.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (Scheme s : {Scheme::mrc, Scheme::qa_m_mmse, Scheme::qa_s_mmse, Scheme::u_m_mmse, Scheme::u_s_mmse})
        if (to_string(s) == n) return s;
    throw ConfigError("unknown combining scheme '" + name + "'");
}

bool is_unaware(Scheme s) { return s == Scheme::u_m_mmse || s == Scheme::u_s_mmse; }
bool is_multicell(Scheme s) { return s == Scheme::qa_m_mmse || s == Scheme::u_m_mmse; }

RVec data_quantization_term(const LinkModel& model, int bs) {
    const RVec alpha = model.bits.alpha(bs);
    RVec received = RVec::Constant(model.antennas(), model.sigma2);
    for (int u = 0; u < model.total_users(); ++u)
        received += model.powers(u) * model.correlation.r(bs, u).diagonal().real();
    return ((1.0 - alpha.array()) / alpha.array() * received.array()).matrix();
}

CMat z_multicell(const LinkModel& model, const EstimatorStatistics& stats, int bs, bool with_quantization) {
    const int M = model.antennas();
    CMat z = CMat::Zero(M, M);
    for (int u = 0; u < model.total_users(); ++u) z += model.powers(u) * stats.c(bs, u);
    if (with_quantization) z.diagonal() += data_quantization_term(model, bs).cast<cdouble>();
    return 0.5 * (z + z.adjoint());
}

CMat z_singlecell(const LinkModel& model, const EstimatorStatistics& stats, int bs, bool with_quantization) {
    const int M = model.antennas();
    const int K = model.users();
    CMat z = CMat::Zero(M, M);
    for (int u = 0; u < model.total_users(); ++u) {
        if (u / K == bs)
            z += model.powers(u) * stats.c(bs, u);
        else
            z += model.powers(u) * model.correlation.r(bs, u);
    }
    if (with_quantization) z.diagonal() += data_quantization_term(model, bs).cast<cdouble>();
    return 0.5 * (z + z.adjoint());
}

CMat solve_hpd(const CMat& a, const CMat& rhs, double* loading) {
    Eigen::LLT<CMat> llt(a);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
    const Eigen::Index n = a.rows();
    const double scale = std::max(a.diagonal().real().cwiseAbs().maxCoeff(), 1e-300);
    for (double eps = 1e-12; eps < 1.0; eps *= 10.0) {
        llt.compute(a + eps * scale * CMat::Identity(n, n));
        if (llt.info() == Eigen::Success) {
            if (loading) *loading = std::max(*loading, eps);
            return llt.solve(rhs);
        }
    }
    throw SolverError("solve_hpd: matrix is not positive definite", scale);
}

namespace {

CMat gram(const CMat& h, const RVec& powers, const CMat& z, double sigma2, const std::vector<int>& users) {
    const Eigen::Index M = h.rows();
    CMat weighted(M, static_cast<Eigen::Index>(users.size()));
    for (std::size_t i = 0; i < users.size(); ++i)
        weighted.col(static_cast<Eigen::Index>(i)) = std::sqrt(powers(users[i])) * h.col(users[i]);
    CMat a = z;
    a.noalias() += weighted * weighted.adjoint();
    a.diagonal().array() += sigma2;
    return 0.5 * (a + a.adjoint());
}

}  // namespace

CMat mmse_combiners(const CMat& h, const RVec& powers, const CMat& z, double sigma2,
                    const std::vector<int>& gram_users, const std::vector<int>& targets, double* loading) {
    CMat rhs(h.rows(), static_cast<Eigen::Index>(targets.size()));
    for (std::size_t i = 0; i < targets.size(); ++i)
        rhs.col(static_cast<Eigen::Index>(i)) = powers(targets[i]) * h.col(targets[i]);
    return solve_hpd(gram(h, powers, z, sigma2, gram_users), rhs, loading);
}

double instantaneous_sinr(const CVec& v, const CMat& h, const RVec& powers, const CMat& z, double sigma2,
                          const std::vector<int>& gram_users, int k) {
    std::vector<int> others;
    std::copy_if(gram_users.begin(), gram_users.end(), std::back_inserter(others), [k](int u) { return u != k; });
    const CMat a = gram(h, powers, z, sigma2, others);
    const double signal = powers(k) * std::norm(v.dot(h.col(k)));
    return signal / v.dot(a * v).real();
}

CombinerSet::CombinerSet(const LinkModel& model, const EstimatorStatistics& aware,
                         const EstimatorStatistics& unaware)
    : model_(&model) {
    for (int j = 0; j < model.cells(); ++j) {
        zm_.push_back(z_multicell(model, aware, j, true));
        zs_.push_back(z_singlecell(model, aware, j, true));
        zm_u_.push_back(z_multicell(model, unaware, j, false));
        zs_u_.push_back(z_singlecell(model, unaware, j, false));
    }
}

const CMat& CombinerSet::z(Scheme s, int bs) const {
    switch (s) {
    case Scheme::qa_m_mmse: return zm_[bs];
    case Scheme::qa_s_mmse: return zs_[bs];
    case Scheme::u_m_mmse: return zm_u_[bs];
    case Scheme::u_s_mmse: return zs_u_[bs];
    case Scheme::mrc: break;
    }
    throw ConfigError("CombinerSet::z: MRC has no Z matrix");
}

std::vector<int> CombinerSet::own_users(int bs) const {
    std::vector<int> out(model_->users());
    std::iota(out.begin(), out.end(), bs * model_->users());
    return out;
}

std::vector<int> CombinerSet::gram_users(Scheme s, int bs) const {
    if (!is_multicell(s)) return own_users(bs);
    std::vector<int> out(model_->total_users());
    std::iota(out.begin(), out.end(), 0);
    return out;
}

CMat CombinerSet::build(Scheme s, int bs, const CMat& h_aware, const CMat& h_unaware, double* loading) const {
    const std::vector<int> own = own_users(bs);
    if (s == Scheme::mrc) return h_aware.middleCols(own.front(), model_->users());
    const CMat& h = is_unaware(s) ? h_unaware : h_aware;
    return mmse_combiners(h, model_->powers, z(s, bs), model_->sigma2, gram_users(s, bs), own, loading);
}

}  // namespace qmimo
