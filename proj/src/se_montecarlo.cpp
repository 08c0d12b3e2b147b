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

#include "qmimo/se_montecarlo.hpp"

#include "qmimo/channel.hpp"
#include "qmimo/spatial_correlation.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace qmimo {

namespace {

using FVec = Eigen::Matrix<double, kFeatures, 1>;
using FMat = Eigen::Matrix<double, kFeatures, kFeatures>;

enum Feature { kRe, kIm, kAbs2, kC, kD, kE, kF, kG, kAgg };

constexpr int kChunk = 8;

}  // namespace

double se_from_terms(const SeTerms& t, int tau_u, int tau_c) {
    if (tau_c <= 0) throw DomainError("se_from_terms: tau_c must be positive");
    const double prelog = static_cast<double>(tau_u) / tau_c;
    if (prelog <= 0.0 || t.a <= 0.0) return 0.0;
    const double den = t.denominator();
    if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
    return prelog * std::log2(1.0 + t.a / den);
}

void finalize(SeTerms& t, int tau_u, int tau_c) {
    t.se = se_from_terms(t, tau_u, tau_c);
    t.infinite_sinr = std::isinf(t.se);
}

void TermAccumulator::add(const Features& x) {
    const FVec v = Eigen::Map<const FVec>(x.data());
    ++n_;
    const FVec d = v - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_.noalias() += d * (v - mean_).transpose();
}

void TermAccumulator::merge(const TermAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const FVec d = o.mean_ - mean_;
    mean_ += d * (nb / n);
    m2_ += o.m2_ + d * d.transpose() * (na * nb / n);
    n_ += o.n_;
}

Features TermAccumulator::mean() const {
    Features out;
    Eigen::Map<FVec>(out.data()) = mean_;
    return out;
}

FMat TermAccumulator::covariance() const {
    if (n_ < 2) throw DomainError("TermAccumulator: covariance needs at least two samples");
    FMat c = m2_ / static_cast<double>(n_ - 1);
    return 0.5 * (c + c.transpose());
}

McTerms terms_from_moments(const TermAccumulator& acc, double p, int tau_u, int tau_c) {
    if (acc.count() < 2) throw DomainError("terms_from_moments: at least two trials are required");
    const Features mu_arr = acc.mean();
    const FVec mu = Eigen::Map<const FVec>(mu_arr.data());
    const FMat cov = acc.covariance() / static_cast<double>(acc.count());

    McTerms out;
    out.trials = acc.count();
    SeTerms& t = out.value;
    t.a = p * (mu(kRe) * mu(kRe) + mu(kIm) * mu(kIm));
    t.b = p * mu(kAbs2) - t.a;
    t.c = mu(kC);
    t.d = mu(kD);
    t.e = mu(kE);
    t.f = mu(kF);
    t.g = mu(kG);
    t.aggregate = mu(kAgg) - t.a;
    finalize(t, tau_u, tau_c);

    // Delta method on the feature means.
    FVec ga = FVec::Zero();
    ga(kRe) = 2.0 * p * mu(kRe);
    ga(kIm) = 2.0 * p * mu(kIm);
    FVec gb = -ga;
    gb(kAbs2) = p;
    FVec gagg = -ga;
    gagg(kAgg) = 1.0;
    FVec gden = gb;
    for (int i : {kC, kD, kE, kF, kG}) gden(i) += 1.0;

    auto sd = [&cov](const FVec& g) { return std::sqrt(std::max(0.0, g.dot(cov * g))); };
    auto unit = [](int i) {
        FVec g = FVec::Zero();
        g(i) = 1.0;
        return g;
    };
    SeTerms& s = out.stderr_;
    s.a = sd(ga);
    s.b = sd(gb);
    s.c = sd(unit(kC));
    s.d = sd(unit(kD));
    s.e = sd(unit(kE));
    s.f = sd(unit(kF));
    s.g = sd(unit(kG));
    s.aggregate = sd(gagg);
    const double den = t.denominator();
    if (t.infinite_sinr || !(den > 0.0) || t.a <= 0.0) {
        s.se = 0.0;
    } else {
        const double prelog = static_cast<double>(tau_u) / tau_c;
        const FVec gse = (prelog / std::log(2.0)) * (ga * den - t.a * gden) / (den * (den + t.a));
        s.se = sd(gse);
    }
    return out;
}

Features trial_features(const CVec& v, const CMat& h_hat, const CMat& h, const LinkModel& model, int bs, int k) {
    const int K = model.users();
    const RVec& p = model.powers;
    const CVec wa = h_hat.adjoint() * v;        // conj(v^H h_hat_u)
    const CVec we = (h - h_hat).adjoint() * v;  // conj(v^H h_tilde_u)
    const CVec wt = h.adjoint() * v;

    Features x{};
    const cdouble s = std::conj(wa(k));
    x[kRe] = s.real();
    x[kIm] = s.imag();
    x[kAbs2] = std::norm(s);
    for (int u = 0; u < model.total_users(); ++u) {
        const double ia = p(u) * std::norm(wa(u));
        if (u / K == bs) {
            if (u != k) x[kC] += ia;
        } else {
            x[kD] += ia;
        }
        x[kE] += p(u) * std::norm(we(u));
        x[kAgg] += p(u) * std::norm(wt(u));
    }
    x[kF] = model.sigma2 * v.squaredNorm();
    // E{v^H Sigma^-1 Rq Sigma^-1 v | h}: the data-phase quantization noise is
    // averaged analytically given the channel draw.
    const RVec alpha = model.bits.alpha(bs);
    const RVec received = (h.cwiseAbs2() * p).array() + model.sigma2;
    x[kG] = (v.cwiseAbs2().array() * (1.0 - alpha.array()) / alpha.array() * received.array()).sum();
    return x;
}

double DropMcResult::sum_se(std::size_t scheme) const {
    double s = 0.0;
    for (const McTerms& t : users[scheme]) s += t.value.se;
    return s;
}

std::uint64_t drop_stream(std::uint64_t drop_id) { return drop_id; }
std::uint64_t trial_stream(std::uint64_t drop_id, std::uint64_t trial) { return ((drop_id + 1) << 32) | trial; }

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

DropMcResult run_drop_mc(const LinkModel& model, const McOptions& opt, std::uint64_t drop_id) {
    if (opt.trials < 2) throw ConfigError("Monte Carlo needs at least two trials");
    const int L = model.cells();
    const int K = model.users();
    const int LK = model.total_users();
    const std::size_t S = opt.schemes.size();
    bool need_unaware = false;
    for (Scheme s : opt.schemes) need_unaware = need_unaware || is_unaware(s);

    const EstimatorStatistics aware(model, EstimatorKind::aware);
    const EstimatorStatistics unaware = need_unaware ? EstimatorStatistics(model, EstimatorKind::unaware) : aware;
    const CombinerSet combiners(model, aware, unaware);
    const ChannelSampler sampler(model.correlation);

    const int chunks = (opt.trials + kChunk - 1) / kChunk;
    // chunk_acc[c][s * LK + u]
    std::vector<std::vector<TermAccumulator>> chunk_acc(chunks, std::vector<TermAccumulator>(S * LK));

    parallel_for(chunks, opt.threads, [&](int c) {
        std::vector<TermAccumulator>& acc = chunk_acc[c];
        const int end = std::min(opt.trials, (c + 1) * kChunk);
        for (int t = c * kChunk; t < end; ++t) {
            Rng rng = make_stream(opt.seed, trial_stream(drop_id, static_cast<std::uint64_t>(t)));
            const ChannelRealization ch = sampler.draw(rng);
            for (int j = 0; j < L; ++j) {
                const PilotObservation obs = synthesize_pilot_signal(model, j, ch.at_bs(j), rng, opt.pilot_noise);
                const CMat h_aware = estimate_all(aware, model, j, obs);
                const CMat h_unaware = need_unaware ? estimate_all(unaware, model, j, obs) : CMat();
                for (std::size_t s = 0; s < S; ++s) {
                    const CMat v = combiners.build(opt.schemes[s], j, h_aware, h_unaware);
                    for (int k = 0; k < K; ++k) {
                        const int u = j * K + k;
                        acc[s * LK + u].add(trial_features(v.col(k), h_aware, ch.at_bs(j), model, j, u));
                    }
                }
            }
        }
    });

    DropMcResult out;
    out.schemes = opt.schemes;
    out.users.assign(S, std::vector<McTerms>(LK));
    for (std::size_t s = 0; s < S; ++s) {
        for (int u = 0; u < LK; ++u) {
            TermAccumulator total;
            for (int c = 0; c < chunks; ++c) total.merge(chunk_acc[c][s * LK + u]);
            out.users[s][u] = terms_from_moments(total, model.powers(u), model.tau_u(), model.tau_c);
        }
    }
    return out;
}

LinkModel sample_drop(const NetworkConfig& config, const BitAllocation& bits, std::uint64_t seed,
                      std::uint64_t drop_id) {
    config.validate();
    Rng rng = make_stream(seed, drop_stream(drop_id));
    const Grid grid = build_grid(config);
    const UserDrop drop = drop_users(config, grid, rng);
    return make_link_model(config, build_correlation_set(config, drop, grid), build_pilot_book(config, grid), bits);
}

McExperimentResult run_mc_experiment(const NetworkConfig& config, const BitAllocation& bits, int drops,
                                     const McOptions& opt) {
    if (drops < 1) throw ConfigError("at least one drop is required");
    McExperimentResult out;
    out.schemes = opt.schemes;
    for (int d = 0; d < drops; ++d) {
        const LinkModel model = sample_drop(config, bits, opt.seed, static_cast<std::uint64_t>(d));
        out.drops.push_back(run_drop_mc(model, opt, static_cast<std::uint64_t>(d)));
    }
    for (std::size_t s = 0; s < opt.schemes.size(); ++s) {
        SumSe sum;
        double sq = 0.0;
        for (const DropMcResult& r : out.drops) {
            const double x = r.sum_se(s);
            sum.mean += x;
            sq += x * x;
        }
        sum.mean /= drops;
        if (drops >= 2) {
            const double var = std::max(0.0, (sq - drops * sum.mean * sum.mean) / (drops - 1));
            sum.stderr_ = std::sqrt(var / drops);
        } else {
            // Cross-user correlation is ignored here.
            double v = 0.0;
            for (const McTerms& t : out.drops[0].users[s]) v += t.stderr_.se * t.stderr_.se;
            sum.stderr_ = std::sqrt(v);
        }
        out.sum_se.push_back(sum);
    }
    return out;
}

}  // namespace qmimo
