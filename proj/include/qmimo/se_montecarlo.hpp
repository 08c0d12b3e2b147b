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
#include "qmimo/quantization.hpp"
#include "qmimo/scenario.hpp"
#include "qmimo/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace qmimo {

/// Use-and-then-forget ingredients of one user plus the resulting SE.
///   SE = (tau_u / tau_c) log2(1 + a / (b + c + d + e + f + g)).
struct SeTerms {
    double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0, g = 0;
    /// b + c + d + e evaluated as sum_u p_u E{|v^H h_u|^2} - a. Matches the
    /// termwise sum when estimate and error are uncorrelated.
    double aggregate = 0;
    double se = 0;
    /// Set when the denominator vanished with a > 0; se is then +inf.
    bool infinite_sinr = false;

    double interference() const { return b + c + d + e; }
    double denominator() const { return b + c + d + e + f + g; }
};

/// (tau_u / tau_c) log2(1 + a / denominator). Returns +inf when the
/// denominator is zero and a > 0, and 0 when a = 0 or tau_u = 0.
double se_from_terms(const SeTerms& t, int tau_u, int tau_c);

/// Fills t.se and t.infinite_sinr.
void finalize(SeTerms& t, int tau_u, int tau_c);

/// Feature vector of one trial for one (BS, user, scheme):
/// Re s, Im s, |s|^2, C, D, E, F, G, aggregate power, with s = v^H h_hat_k.
inline constexpr int kFeatures = 9;
using Features = std::array<double, kFeatures>;

/// Streaming mean and centered second moments of the feature vector
/// (pairwise update, stable when the mean dwarfs the spread). Chunks merged
/// in a fixed order give results independent of the worker count.
class TermAccumulator {
public:
    void add(const Features& x);
    void merge(const TermAccumulator& other);
    long count() const { return n_; }
    Features mean() const;
    /// Sample covariance of the features.
    Eigen::Matrix<double, kFeatures, kFeatures> covariance() const;

private:
    long n_ = 0;
    Eigen::Matrix<double, kFeatures, 1> mean_ = Eigen::Matrix<double, kFeatures, 1>::Zero();
    Eigen::Matrix<double, kFeatures, kFeatures> m2_ = Eigen::Matrix<double, kFeatures, kFeatures>::Zero();
};

/// Monte Carlo estimate of one user's terms with delta-method standard errors.
struct McTerms {
    SeTerms value;
    SeTerms stderr_;  ///< per-field standard error; stderr_.se is the SE's
    long trials = 0;
};

/// Converts accumulated moments into terms. Throws DomainError if fewer
/// than two trials were accumulated.
McTerms terms_from_moments(const TermAccumulator& acc, double power, int tau_u, int tau_c);

/// Features of one trial. `v` is the combiner, `h_hat` the aware estimates
/// and `h` the true channels at BS j (both M x (L K)), `k` the flat index of
/// the target user.
Features trial_features(const CVec& v, const CMat& h_hat, const CMat& h, const LinkModel& model, int bs, int k);

struct McOptions {
    std::vector<Scheme> schemes{Scheme::mrc, Scheme::qa_m_mmse, Scheme::qa_s_mmse};
    int trials = 100;
    /// 0 means one per hardware thread.
    int threads = 1;
    std::uint64_t seed = 1;
    PilotNoiseModel pilot_noise = PilotNoiseModel::exact;
};

/// Per-user Monte Carlo results of one drop, indexed [scheme][flat user].
struct DropMcResult {
    std::vector<Scheme> schemes;
    std::vector<std::vector<McTerms>> users;

    double sum_se(std::size_t scheme) const;
};

/// Runs `options.trials` small-scale realizations of one drop. Trial t uses
/// the stream (seed, trial_stream(drop_id, t)), so results do not depend on
/// the worker count.
DropMcResult run_drop_mc(const LinkModel& model, const McOptions& options, std::uint64_t drop_id);

std::uint64_t drop_stream(std::uint64_t drop_id);
std::uint64_t trial_stream(std::uint64_t drop_id, std::uint64_t trial);

/// One random drop: geometry, correlation, pilots and the given bits.
LinkModel sample_drop(const NetworkConfig& config, const BitAllocation& bits, std::uint64_t seed,
                      std::uint64_t drop_id);

/// Sum SE statistics over drops for one scheme.
struct SumSe {
    double mean = 0;
    /// Standard error over drops; with a single drop, the within-drop
    /// delta-method error.
    double stderr_ = 0;
};

struct McExperimentResult {
    std::vector<Scheme> schemes;
    std::vector<DropMcResult> drops;
    std::vector<SumSe> sum_se;
};

/// Outer loop over drops, inner loop over trials.
McExperimentResult run_mc_experiment(const NetworkConfig& config, const BitAllocation& bits, int drops,
                                     const McOptions& options);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace qmimo
