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

#include "qmimo/quantization.hpp"
#include "qmimo/scenario.hpp"
#include "qmimo/spatial_correlation.hpp"
#include "qmimo/types.hpp"

#include <vector>

namespace qmimo {

/// Everything the receivers know about one drop: second-order channel
/// statistics, pilot assignment, ADC resolution, powers and noise.
struct LinkModel {
    CorrelationSet correlation;
    PilotBook pilots;
    BitAllocation bits;
    RVec powers;       // watts, flat user index
    double sigma2 = 0;  // watts
    int tau_p = 1;
    int tau_c = 200;

    int tau_u() const { return tau_c - tau_p; }
    int cells() const { return correlation.cells(); }
    int users() const { return correlation.users(); }
    int antennas() const { return correlation.antennas(); }
    int total_users() const { return correlation.total_users(); }
};

/// Assembles the link model of one drop from a validated configuration.
LinkModel make_link_model(const NetworkConfig& config, CorrelationSet correlation, PilotBook pilots,
                          BitAllocation bits);

enum class EstimatorKind {
    aware,    ///< LMMSE built with Sigma_AD and the averaged quantization noise
    unaware,  ///< LMMSE built as if the ADCs were ideal, fed quantized pilots
};

/// Covariance used to draw the pilot-phase quantization noise.
enum class PilotNoiseModel {
    exact,     ///< instantaneous, from the current channel draw
    averaged,  ///< its channel average
};

/// Psi_{j,u} for user u at BS j. The inverted sum runs over every user that
/// shares u's pilot, u included:
///   ( sum_{v in P(u)} p_v tau_p Sigma R_{j,v} Sigma + sigma2 Sigma^2 + Rq_avg )^{-1}.
/// For the unaware estimator Sigma = I and Rq_avg = 0.
CMat build_psi(const LinkModel& model, int bs, int u, EstimatorKind kind = EstimatorKind::aware);

/// Per-drop estimator statistics. Filters, covariances and Psi depend on the
/// channel statistics only, so they are built once and reused for every
/// small-scale realization.
class EstimatorStatistics {
public:
    EstimatorStatistics() = default;
    EstimatorStatistics(const LinkModel& model, EstimatorKind kind);

    EstimatorKind kind() const { return kind_; }

    /// h_hat_{j,u} = filter(j, u) * y_pilot(j, pilot(u)).
    const CMat& filter(int bs, int u) const { return filter_[at(bs, u)]; }
    /// Psi shared by all users on one pilot at BS j.
    const CMat& psi(int bs, int u) const { return psi_[pilot_at(bs, pilot_index_[u])]; }
    /// E{y y^H} of the correlated pilot signal for u's pilot at BS j.
    const CMat& observation_cov(int bs, int u) const { return obs_cov_[pilot_at(bs, pilot_index_[u])]; }
    /// Estimate covariance the receiver believes, E{h_hat h_hat^H}.
    const CMat& b(int bs, int u) const { return b_[at(bs, u)]; }
    /// Error covariance the receiver believes, R - B.
    const CMat& c(int bs, int u) const { return c_[at(bs, u)]; }
    /// True error covariance E{(h - h_hat)(h - h_hat)^H}. Equal to c() for the
    /// aware estimator.
    const CMat& error_cov(int bs, int u) const { return err_[at(bs, u)]; }
    /// Diagonal of the averaged quantization noise covariance at BS j.
    const RVec& rq_avg(int bs) const { return rq_avg_[bs]; }
    /// Largest regularization applied to any Psi inversion (0 if none).
    double regularization() const { return regularization_; }

private:
    std::size_t at(int bs, int u) const { return static_cast<std::size_t>(bs) * users_ + u; }
    std::size_t pilot_at(int bs, int p) const { return static_cast<std::size_t>(bs) * pilots_ + p; }

    EstimatorKind kind_ = EstimatorKind::aware;
    int users_ = 0;
    int pilots_ = 0;
    std::vector<int> pilot_index_;
    std::vector<CMat> filter_, b_, c_, err_, psi_, obs_cov_;
    std::vector<RVec> rq_avg_;
    double regularization_ = 0.0;
};

inline EstimatorStatistics estimate_covariances(const LinkModel& model,
                                                EstimatorKind kind = EstimatorKind::aware) {
    return EstimatorStatistics(model, kind);
}

/// Correlated pilot observations y_{j,u} = Y_j phi_u at one BS, one vector
/// per pilot index; entries for pilots nobody uses stay empty.
struct PilotObservation {
    std::vector<CVec> y;
};

/// Synthesizes the correlated, quantized pilot signal at BS j directly:
///   sum_{v on pilot} sqrt(p_v) tau_p Sigma h_v + Sigma n + q,
/// n ~ CN(0, sigma2 tau_p I), q ~ CN(0, tau_p Rq). `h_bs` is M x (L K).
PilotObservation synthesize_pilot_signal(const LinkModel& model, int bs, const CMat& h_bs, Rng& rng,
                                         PilotNoiseModel noise_model = PilotNoiseModel::exact);

/// Quantization-aware estimate sqrt(p) R Sigma Psi y.
CVec estimate_channel(const CVec& y_pilot, const CMat& psi, const CMat& r, const RVec& alpha, double power);

/// Unaware estimate sqrt(p) R Psi_u y with Psi_u built for ideal ADCs.
CVec estimate_channel_unaware(const CVec& y_pilot, const CMat& psi_unaware, const CMat& r, double power);

/// All L K estimates at BS j as an M x (L K) matrix.
CMat estimate_all(const EstimatorStatistics& stats, const LinkModel& model, int bs,
                  const PilotObservation& obs);

/// tr(C) / tr(R).
double nmse(const CMat& c, const CMat& r);

/// Mean NMSE over every user at its own BS, using the true error covariance.
double mean_nmse(const EstimatorStatistics& stats, const LinkModel& model);

/// E{h_hat_{j,v} h_hat_{j,u}^H}; zero when u and v use different pilots.
CMat cross_covariance(const EstimatorStatistics& stats, const LinkModel& model, int bs, int u, int v);

}  // namespace qmimo
