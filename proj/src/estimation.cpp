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

#include "qmimo/estimation.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace qmimo {

namespace {

CMat hermitian(const CMat& a) { return 0.5 * (a + a.adjoint()); }

/// Inverse of a Hermitian PD matrix. Falls back to a diagonally loaded
/// inverse when Cholesky fails; the load relative to tr/M is written to
/// `loading`.
CMat hpd_inverse(const CMat& a, double& loading) {
    const Eigen::Index n = a.rows();
    Eigen::LLT<CMat> llt(a);
    if (llt.info() == Eigen::Success) return hermitian(llt.solve(CMat::Identity(n, n)));
    const double scale = a.diagonal().real().sum() / static_cast<double>(n);
    for (double eps = 1e-12; eps < 1.0; eps *= 10.0) {
        llt.compute(a + eps * scale * CMat::Identity(n, n));
        if (llt.info() == Eigen::Success) {
            loading = std::max(loading, eps);
            return hermitian(llt.solve(CMat::Identity(n, n)));
        }
    }
    throw SolverError("estimation: covariance is not positive definite", scale);
}

/// sum_{v on pilot} p_v tau_p Sigma R_v Sigma + sigma2 Sigma^2 + Rq, i.e. the
/// pilot observation covariance divided by tau_p.
CMat pilot_gram(const LinkModel& model, int bs, int u, const RVec& alpha, const RVec& rq) {
    const int M = model.antennas();
    CMat g = CMat::Zero(M, M);
    for (int v : model.pilots.contamination_set(u)) g += model.powers(v) * model.tau_p * model.correlation.r(bs, v);
    g = alpha.asDiagonal() * g * alpha.asDiagonal();
    g.diagonal().array() += model.sigma2 * alpha.array().square() + rq.array();
    return hermitian(g);
}

}  // namespace

LinkModel make_link_model(const NetworkConfig& config, CorrelationSet correlation, PilotBook pilots,
                          BitAllocation bits) {
    if (bits.cells() != correlation.cells() || bits.antennas() != correlation.antennas())
        throw ConfigError("bit allocation shape does not match the network");
    LinkModel m;
    m.correlation = std::move(correlation);
    m.pilots = std::move(pilots);
    m.bits = std::move(bits);
    m.powers = config.powers_w();
    m.sigma2 = config.noise_power_w();
    m.tau_p = config.tau_p();
    m.tau_c = config.tau_c;
    return m;
}

CMat build_psi(const LinkModel& model, int bs, int u, EstimatorKind kind) {
    const int M = model.antennas();
    double loading = 0.0;
    if (kind == EstimatorKind::aware) {
        const RVec alpha = model.bits.alpha(bs);
        const RVec rq = quant_noise_cov_avg(alpha, model.correlation, bs, model.powers, model.sigma2);
        return hpd_inverse(pilot_gram(model, bs, u, alpha, rq), loading);
    }
    return hpd_inverse(pilot_gram(model, bs, u, RVec::Ones(M), RVec::Zero(M)), loading);
}

EstimatorStatistics::EstimatorStatistics(const LinkModel& model, EstimatorKind kind)
    : kind_(kind), users_(model.total_users()), pilots_(model.pilots.num_pilots()),
      pilot_index_(model.pilots.pilot_index) {
    const int L = model.cells();
    const int M = model.antennas();
    const double tau = model.tau_p;
    const std::size_t n = static_cast<std::size_t>(L) * users_;
    filter_.resize(n);
    b_.resize(n);
    c_.resize(n);
    err_.resize(n);
    psi_.assign(static_cast<std::size_t>(L) * pilots_, CMat());
    obs_cov_.assign(static_cast<std::size_t>(L) * pilots_, CMat());
    rq_avg_.resize(L);

    for (int j = 0; j < L; ++j) {
        const RVec alpha = model.bits.alpha(j);
        rq_avg_[j] = quant_noise_cov_avg(alpha, model.correlation, j, model.powers, model.sigma2);

        for (int u = 0; u < users_; ++u) {
            const std::size_t slot = pilot_at(j, pilot_index_[u]);
            if (psi_[slot].size() != 0) continue;
            const CMat aware_gram = pilot_gram(model, j, u, alpha, rq_avg_[j]);
            obs_cov_[slot] = tau * aware_gram;
            if (kind == EstimatorKind::aware) {
                psi_[slot] = hpd_inverse(aware_gram, regularization_);
            } else {
                psi_[slot] = hpd_inverse(pilot_gram(model, j, u, RVec::Ones(M), RVec::Zero(M)), regularization_);
            }
        }

        for (int u = 0; u < users_; ++u) {
            const std::size_t k = at(j, u);
            const CMat& r = model.correlation.r(j, u);
            const CMat& psi = psi_[pilot_at(j, pilot_index_[u])];
            const CMat& cy = obs_cov_[pilot_at(j, pilot_index_[u])];
            const double p = model.powers(u);
            if (kind == EstimatorKind::aware) {
                const CMat rs = r * alpha.asDiagonal();
                filter_[k] = std::sqrt(p) * rs * psi;
                b_[k] = hermitian(p * tau * rs * psi * rs.adjoint());
                c_[k] = hermitian(r - b_[k]);
                err_[k] = c_[k];
            } else {
                filter_[k] = std::sqrt(p) * r * psi;
                b_[k] = hermitian(p * tau * r * psi * r);
                c_[k] = hermitian(r - b_[k]);
                // E{h y^H} = sqrt(p) tau_p R Sigma.
                const CMat hy = std::sqrt(p) * tau * r * alpha.asDiagonal();
                const CMat& w = filter_[k];
                err_[k] = hermitian(r - w * hy.adjoint() - hy * w.adjoint() + w * cy * w.adjoint());
            }
        }
    }
}

PilotObservation synthesize_pilot_signal(const LinkModel& model, int bs, const CMat& h_bs, Rng& rng,
                                         PilotNoiseModel noise_model) {
    const int M = model.antennas();
    const double tau = model.tau_p;
    const RVec alpha = model.bits.alpha(bs);
    const RVec rq = noise_model == PilotNoiseModel::exact
                        ? quant_noise_cov_exact(alpha, h_bs, model.powers, model.sigma2)
                        : quant_noise_cov_avg(alpha, model.correlation, bs, model.powers, model.sigma2);
    const RVec noise_std = (model.sigma2 * tau * alpha.array().square() + tau * rq.array()).sqrt();

    PilotObservation obs;
    obs.y.assign(model.pilots.num_pilots(), CVec());
    for (int u = 0; u < model.total_users(); ++u) {
        CVec& y = obs.y[model.pilots.pilot_index[u]];
        if (y.size() == 0) y = CVec::Zero(M);
        y += std::sqrt(model.powers(u)) * tau * alpha.cast<cdouble>().cwiseProduct(h_bs.col(u));
    }
    for (CVec& y : obs.y) {
        if (y.size() == 0) continue;
        // Sigma n and q are independent zero-mean Gaussians; draw their sum.
        y += noise_std.cast<cdouble>().cwiseProduct(complex_normal(M, rng));
    }
    return obs;
}

CVec estimate_channel(const CVec& y_pilot, const CMat& psi, const CMat& r, const RVec& alpha, double power) {
    return std::sqrt(power) * (r * (alpha.cast<cdouble>().cwiseProduct(psi * y_pilot)));
}

CVec estimate_channel_unaware(const CVec& y_pilot, const CMat& psi_unaware, const CMat& r, double power) {
    return std::sqrt(power) * (r * (psi_unaware * y_pilot));
}

CMat estimate_all(const EstimatorStatistics& stats, const LinkModel& model, int bs, const PilotObservation& obs) {
    CMat h_hat(model.antennas(), model.total_users());
    for (int u = 0; u < model.total_users(); ++u)
        h_hat.col(u) = stats.filter(bs, u) * obs.y[model.pilots.pilot_index[u]];
    return h_hat;
}

double nmse(const CMat& c, const CMat& r) {
    const double tr = r.trace().real();
    if (!(tr > 0.0)) throw DomainError("nmse: tr(R) must be positive");
    return c.trace().real() / tr;
}

double mean_nmse(const EstimatorStatistics& stats, const LinkModel& model) {
    double acc = 0.0;
    for (int u = 0; u < model.total_users(); ++u) {
        const int own = split_user(u, model.users()).cell;
        acc += nmse(stats.error_cov(own, u), model.correlation.r(own, u));
    }
    return acc / model.total_users();
}

CMat cross_covariance(const EstimatorStatistics& stats, const LinkModel& model, int bs, int u, int v) {
    const int M = model.antennas();
    if (!model.pilots.same_pilot(u, v)) return CMat::Zero(M, M);
    return stats.filter(bs, v) * stats.observation_cov(bs, u) * stats.filter(bs, u).adjoint();
}

}  // namespace qmimo
