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

// Acceptance checks, one line per criterion. Exit status is the number of
// failed criteria.

#include "qmimo/channel.hpp"
#include "qmimo/energy.hpp"
#include "qmimo/rmt.hpp"
#include "qmimo/se_asymptotic.hpp"
#include "qmimo/se_montecarlo.hpp"

#include "../oracles.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace qmimo;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " FAIL[" << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " exception: " << e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %d %s: %s (%.1f s)%s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), sec,
                o.detail.str().c_str());
    std::fflush(stdout);
}

std::string bits_name(int b) { return b == kInfiniteBits ? "inf" : std::to_string(b); }

NetworkConfig desk(double power_dbm = 30.0) {
    NetworkConfig c;  // L = 4, K = 3, M = 16, f = 3
    c.tx_power_dbm = power_dbm;
    return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

void table_one(Outcome& o) {
    const char* printed[] = {"0.6366", "0.8825", "0.96546", "0.990503", "0.997501"};
    const int digits[] = {4, 4, 5, 6, 6};
    for (int b = 1; b <= 5; ++b) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.*f", digits[b - 1], distortion_factor(b));
        o.require(std::string(buf) == printed[b - 1], "b=" + std::to_string(b) + " printed " + buf);
        o.require(distortion_factor(b) == std::stod(printed[b - 1]), "b=" + std::to_string(b) + " value");
    }
}

void deterministic_equivalents(Outcome& o) {
    const int m = 256, n = 8, draws = 200;
    Rng rng = make_stream(2024, 2);
    DetEqInput in;
    std::vector<CMat> roots;
    for (int u = 0; u < n; ++u) {
        in.delta.push_back(4.0 * oracle::random_psd(m, rng));
        roots.push_back(oracle::sqrtm(in.delta.back()));
    }
    in.d = 0.5 * oracle::random_psd(m, rng);
    in.alpha = 0.1;
    in.check();
    const DetEqSolution sol = solve_gamma(in);
    const CMat a = oracle::random_psd(m, rng);
    const CMat c = oracle::random_psd(m, rng);

    double mc_i = 0.0, mc_a = 0.0, mc_p = 0.0;
    for (int d = 0; d < draws; ++d) {
        CMat x = in.d;
        x.diagonal().array() += in.alpha;
        for (const CMat& t : roots) {
            const CVec h = t * complex_normal(m, rng) / std::sqrt(static_cast<double>(m));
            x += h * h.adjoint();
        }
        const CMat q = x.inverse();
        mc_i += q.trace().real() / m / draws;
        mc_a += trace_product(a, q) / m / draws;
        mc_p += trace_product(a, q * c * q) / m / draws;
    }
    const double de_i = sol.gamma().trace().real() / m;
    const double de_a = trace_product(a, sol.gamma()) / m;
    const double de_p = sol.projector(a)(c);
    o.detail << " tr(Gamma) err=" << rel(de_i, mc_i) << " tr(A Gamma) err=" << rel(de_a, mc_a)
             << " tr(A Gamma') err=" << rel(de_p, mc_p);
    o.require(rel(de_i, mc_i) < 0.01, "A=I");
    o.require(rel(de_a, mc_a) < 0.01, "A random");
    o.require(rel(de_p, mc_p) < 0.02, "Gamma'");
}

void mrc_closed_form_vs_mc(Outcome& o, PilotNoiseModel noise, bool enforce) {
    const int trials = 10000;
    double worst_agg = 0.0, worst_g = 0.0;
    for (int b : {1, 3, kInfiniteBits}) {
        const LinkModel model = oracle::two_cell_model(2, 16, b, 30.0, 10.0, 17);
        const EstimatorStatistics stats(model, EstimatorKind::aware);
        McOptions opt;
        opt.schemes = {Scheme::mrc};
        opt.trials = trials;
        opt.seed = 33;
        opt.pilot_noise = noise;
        const DropMcResult mc = run_drop_mc(model, opt, 0);
        for (int u = 0; u < model.total_users(); ++u) {
            const int j = u / model.users();
            const SeTerms cf = mrc_closed_form(model, stats, u);
            const double trb = stats.b(j, u).trace().real();
            const std::string tag = " b=" + bits_name(b) + " u=" + std::to_string(u);
            if (enforce) {
                o.require(rel(cf.a, model.powers(u) * trb * trb) < 1e-12, "A" + tag);
                o.require(rel(cf.f, model.sigma2 * trb) < 1e-12, "F" + tag);
            }
            const McTerms& t = mc.users[0][u];
            const double z_agg = std::abs(t.value.aggregate - cf.aggregate) / t.stderr_.aggregate;
            const double z_g = b == kInfiniteBits ? 0.0 : std::abs(t.value.g - cf.g) / t.stderr_.g;
            if (b == kInfiniteBits) o.require(cf.g == 0.0 && t.value.g == 0.0, "G=0" + tag);
            worst_agg = std::max(worst_agg, z_agg);
            worst_g = std::max(worst_g, z_g);
            if (enforce) {
                o.require(z_agg <= 3.0, "aggregate" + tag);
                o.require(z_g <= 3.0, "G" + tag);
            }
        }
    }
    o.detail << (noise == PilotNoiseModel::averaged ? " averaged-noise" : " exact-noise") << " max|z| agg="
             << worst_agg << " G=" << worst_g;
}

void mmse_asymptotics_vs_mc(Outcome& o) {
    NetworkConfig cfg = desk(30.0);
    cfg.antennas = 32;
    const int drops = 10;
    for (int b : {1, 3, kInfiniteBits}) {
        const BitAllocation alloc = BitAllocation::uniform(cfg.cells, cfg.antennas, b);
        double mc_m = 0, mc_s = 0, as_m = 0, as_s = 0;
        for (int d = 0; d < drops; ++d) {
            const LinkModel model = sample_drop(cfg, alloc, 7, d);
            McOptions opt;
            opt.schemes = {Scheme::qa_m_mmse, Scheme::qa_s_mmse};
            opt.trials = 100;
            opt.seed = 7;
            const DropMcResult mc = run_drop_mc(model, opt, d);
            mc_m += mc.sum_se(0);
            mc_s += mc.sum_se(1);
            const EstimatorStatistics stats(model, EstimatorKind::aware);
            for (Scheme s : {Scheme::qa_m_mmse, Scheme::qa_s_mmse})
                for (SeTerms t : asymptotic_terms(s, model, stats)) {
                    finalize(t, model.tau_u(), model.tau_c);
                    (s == Scheme::qa_m_mmse ? as_m : as_s) += t.se;
                }
        }
        const double gm = rel(as_m, mc_m), gs = rel(as_s, mc_s);
        o.detail << " b=" << bits_name(b) << " gap M=" << gm << " S=" << gs;
        o.require(gm < 0.10, "QA-M b=" + bits_name(b));
        o.require(gs < 0.10, "QA-S b=" + bits_name(b));
    }
}

double mean_nmse_over(const NetworkConfig& cfg, int bits, EstimatorKind kind, int drops) {
    double acc = 0.0;
    for (int d = 0; d < drops; ++d) {
        const LinkModel model = sample_drop(cfg, BitAllocation::uniform(cfg.cells, cfg.antennas, bits), 5, d);
        acc += mean_nmse(EstimatorStatistics(model, kind), model);
    }
    return acc / drops;
}

/// Drop-averaged sum SE per scheme from Monte Carlo and, where available,
/// from the asymptotic route.
struct SumSePair {
    std::vector<double> mc, asy;
};

SumSePair sum_se(const NetworkConfig& cfg, int bits, const std::vector<Scheme>& schemes, int drops, int trials,
                 bool with_mc = true) {
    SumSePair out{std::vector<double>(schemes.size(), 0.0), std::vector<double>(schemes.size(), 0.0)};
    const BitAllocation alloc = BitAllocation::uniform(cfg.cells, cfg.antennas, bits);
    for (int d = 0; d < drops; ++d) {
        const LinkModel model = sample_drop(cfg, alloc, 9, d);
        if (with_mc) {
            McOptions opt;
            opt.schemes = schemes;
            opt.trials = trials;
            opt.seed = 9;
            const DropMcResult r = run_drop_mc(model, opt, d);
            for (std::size_t s = 0; s < schemes.size(); ++s) out.mc[s] += r.sum_se(s) / drops;
        }
        const EstimatorStatistics stats(model, EstimatorKind::aware);
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            if (!has_asymptotic(schemes[s])) continue;
            for (SeTerms t : asymptotic_terms(schemes[s], model, stats)) {
                finalize(t, model.tau_u(), model.tau_c);
                out.asy[s] += t.se / drops;
            }
        }
    }
    return out;
}

void orderings(Outcome& o) {
    const int drops = 10;
    // (a) aware estimator never worse, every finite resolution and power
    {
        bool ok = true;
        for (int b = 1; b <= 10; ++b)
            for (double p : {0.0, 10.0, 20.0, 30.0, 40.0}) {
                const NetworkConfig cfg = desk(p);
                for (int d = 0; d < 3; ++d) {
                    const LinkModel model =
                        sample_drop(cfg, BitAllocation::uniform(cfg.cells, cfg.antennas, b), 5, d);
                    const EstimatorStatistics aw(model, EstimatorKind::aware), un(model, EstimatorKind::unaware);
                    for (int u = 0; u < model.total_users(); ++u) {
                        const int j = u / model.users();
                        const CMat& r = model.correlation.r(j, u);
                        ok = ok && nmse(aw.error_cov(j, u), r) <= nmse(un.error_cov(j, u), r) + 1e-12;
                    }
                }
            }
        o.require(ok, "a");
        o.detail << " (a) " << (ok ? "ok" : "violated");
    }
    // (b) saturation at one bit
    {
        std::vector<double> n;
        for (double p : {0.0, 10.0, 30.0, 40.0}) n.push_back(mean_nmse_over(desk(p), 1, EstimatorKind::aware, drops));
        const double ratio = (n[2] - n[3]) / (n[0] - n[1]);
        o.detail << " (b) ratio=" << ratio;
        o.require(ratio < 0.10, "b");
    }
    // (c) aware beats unaware MMSE at one bit
    {
        const SumSePair r = sum_se(desk(), 1, {Scheme::qa_m_mmse, Scheme::u_m_mmse, Scheme::qa_s_mmse, Scheme::u_s_mmse},
                                   drops, 50);
        o.detail << " (c) M " << r.mc[0] << ">=" << r.mc[1] << " S " << r.mc[2] << ">=" << r.mc[3];
        o.require(r.mc[0] >= r.mc[1], "c M-MMSE");
        o.require(r.mc[2] >= r.mc[3], "c S-MMSE");
    }
    // (d) M-MMSE ahead of S-MMSE without quantization, by a larger margin than at one bit
    {
        const std::vector<Scheme> ms{Scheme::qa_m_mmse, Scheme::qa_s_mmse};
        const SumSePair hi = sum_se(desk(), kInfiniteBits, ms, drops, 50);
        const SumSePair lo = sum_se(desk(), 1, ms, drops, 50);
        const double gap_hi_mc = hi.mc[0] - hi.mc[1], gap_lo_mc = lo.mc[0] - lo.mc[1];
        const double gap_hi_as = hi.asy[0] - hi.asy[1], gap_lo_as = lo.asy[0] - lo.asy[1];
        o.detail << " (d) mc gap inf=" << gap_hi_mc << " 1=" << gap_lo_mc << " asy gap inf=" << gap_hi_as
                 << " 1=" << gap_lo_as;
        o.require(gap_hi_mc >= 0.0 && gap_lo_mc < gap_hi_mc, "d mc");
        o.require(gap_hi_as >= 0.0 && gap_lo_as < gap_hi_as, "d asy");
    }
    // (e) interior EE optimum
    {
        const std::vector<Scheme> all{Scheme::mrc, Scheme::qa_m_mmse, Scheme::qa_s_mmse};
        std::vector<int> best(all.size(), 0);
        std::vector<double> top(all.size(), -1.0);
        const NetworkConfig cfg = desk();
        for (int b = 1; b <= 10; ++b) {
            const SumSePair r = sum_se(cfg, b, all, drops, 0, false);
            const BitAllocation alloc = BitAllocation::uniform(cfg.cells, cfg.antennas, b);
            for (std::size_t s = 0; s < all.size(); ++s) {
                const double ee = energy_efficiency(r.asy[s], alloc);
                if (ee > top[s]) {
                    top[s] = ee;
                    best[s] = b;
                }
            }
        }
        o.detail << " (e) argmax";
        for (std::size_t s = 0; s < all.size(); ++s) {
            o.detail << ' ' << to_string(all[s]) << '=' << best[s];
            o.require(best[s] >= 2 && best[s] <= 6, "e " + to_string(all[s]));
        }
    }
}

void vm_equivalence(Outcome& o) {
    Rng rng = make_stream(2024, 6);
    std::uniform_int_distribution<int> size(4, 8);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int m = size(rng);
        const CMat b = oracle::random_psd(m, rng);
        for (int i = 0; i < m; ++i)
            worst = std::max(worst, (vm_tensor(b, i) - oracle::vm_direct(b, i)).cwiseAbs().maxCoeff());
    }
    o.detail << " max deviation " << worst;
    o.require(worst < 1e-10, "deviation");
}

void quartic(Outcome& o) {
    Rng rng = make_stream(2024, 7);
    const int n = 1000000;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const CMat a = oracle::random_psd(3, rng);
        const CMat b = oracle::random_hermitian(3, rng);
        const CMat root = oracle::sqrtm(a);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const CVec x = root * complex_normal(3, rng);
            acc += std::norm(x.dot(b * x));
        }
        worst = std::max(worst, rel(acc / n, quartic_moment(a, b)));
    }
    o.detail << " worst relative error " << worst;
    o.require(worst < 0.01, "1%");
}

/// Worst relative error of the co-pilot linear relation between estimates,
/// plus the worst condition number of the R_u being inverted.
std::pair<double, double> copilot_relation(const LinkModel& model, const EstimatorStatistics& stats, Rng& rng) {
    double worst = 0.0, cond = 0.0;
    for (int t = 0; t < 20; ++t) {
        const ChannelRealization ch = draw_channels(model.correlation, rng);
        for (int j = 0; j < model.cells(); ++j) {
            const CMat hh = estimate_all(stats, model, j, synthesize_pilot_signal(model, j, ch.at_bs(j), rng));
            for (int u = 0; u < model.total_users(); ++u) {
                const CMat& ru = model.correlation.r(j, u);
                if (t == 0) {
                    const RVec ev = Eigen::SelfAdjointEigenSolver<CMat>(ru).eigenvalues();
                    cond = std::max(cond, ev.maxCoeff() / ev.minCoeff());
                }
                for (int v : model.pilots.contamination_set(u)) {
                    const CVec pred = std::sqrt(model.powers(v) / model.powers(u)) * model.correlation.r(j, v) *
                                      ru.ldlt().solve(hh.col(u));
                    worst = std::max(worst, (pred - hh.col(v)).norm() / hh.col(v).norm());
                }
            }
        }
    }
    return {worst, cond};
}

void estimator_identities(Outcome& o) {
    double worst_sum = 0.0, worst_lin = 0.0, cond_lin = 0.0, worst_desk = 0.0, cond_desk = 0.0;
    for (int b : {1, 3, kInfiniteBits}) {
        NetworkConfig cfg = desk(20.0);
        cfg.reuse = 1;  // every BS sees co-pilot users
        cfg.asd_deg = 30.0;
        const LinkModel model = sample_drop(cfg, BitAllocation::uniform(cfg.cells, cfg.antennas, b), 3, 0);
        const EstimatorStatistics stats(model, EstimatorKind::aware);
        for (int j = 0; j < model.cells(); ++j)
            for (int u = 0; u < model.total_users(); ++u) {
                const CMat& r = model.correlation.r(j, u);
                worst_sum = std::max(worst_sum, (stats.b(j, u) + stats.c(j, u) - r).cwiseAbs().maxCoeff() /
                                                    r.cwiseAbs().maxCoeff());
            }
        Rng rng = make_stream(3, 100 + b % 100);
        const auto [desk_err, desk_cond] = copilot_relation(model, stats, rng);
        worst_desk = std::max(worst_desk, desk_err);
        cond_desk = std::max(cond_desk, desk_cond);

        // The relation inverts R_u, so it is resolvable to 1e-8 only when
        // eps * cond(R_u) is well below that; M = 8 keeps cond near 5e3.
        cfg.antennas = 8;
        const LinkModel small = sample_drop(cfg, BitAllocation::uniform(cfg.cells, cfg.antennas, b), 3, 0);
        const auto [err, cond] = copilot_relation(small, EstimatorStatistics(small, EstimatorKind::aware), rng);
        worst_lin = std::max(worst_lin, err);
        cond_lin = std::max(cond_lin, cond);
    }
    o.detail << " B+C-R " << worst_sum << " linear relation M=8 " << worst_lin << " (cond " << cond_lin
             << "), M=16 informational " << worst_desk << " (cond " << cond_desk << ")";
    o.require(worst_sum < 1e-10, "B+C=R");
    o.require(worst_lin < 1e-8, "co-pilot relation");

    const LinkModel model = sample_drop(desk(20.0), BitAllocation::uniform(4, 16, 2), 3, 1);
    const EstimatorStatistics stats(model, EstimatorKind::aware);
    const ChannelSampler sampler(model.correlation);
    const int n = 10000, M = model.antennas();
    for (auto noise : {PilotNoiseModel::exact, PilotNoiseModel::averaged}) {
        Rng rng = make_stream(3, 200 + static_cast<int>(noise));
        CMat mean = CMat::Zero(M, M);
        RMat sq = RMat::Zero(M, M);
        for (int t = 0; t < n; ++t) {
            const ChannelRealization ch = sampler.draw(rng);
            const CMat hh = estimate_all(stats, model, 0, synthesize_pilot_signal(model, 0, ch.at_bs(0), rng, noise));
            const CMat x = hh.col(0) * (ch.at_bs(0).col(0) - hh.col(0)).adjoint();
            mean += x / n;
            sq += x.cwiseAbs2() / n;
        }
        const double se = std::sqrt((sq - mean.cwiseAbs2()).sum() / n);
        o.detail << (noise == PilotNoiseModel::exact ? " orth exact " : " orth averaged ") << mean.norm() / se
                 << " SE";
        o.require(mean.norm() <= 3.0 * se, "orthogonality");
    }
}

void adc_power(Outcome& o) {
    const double p1 = p_adc(1);
    o.detail << " P_ADC(1)=" << p1 * 1e3 << " mW";
    o.require(std::abs(p1 - 11.42e-3) <= 0.005 * 11.42e-3, "hand value");
    for (int b = 1; b < 10; ++b)
        o.require(std::abs(p_adc(b + 1) / p_adc(b) - std::pow(10.0, 0.1525)) < 1e-12, "ratio b=" + std::to_string(b));
}

}  // namespace

int main() {
    criterion(1, "distortion factors match the printed table", table_one);
    criterion(2, "deterministic equivalents vs sampled resolvent (M=256, LK=8, 200 draws)", deterministic_equivalents);
    criterion(3, "MRC closed form vs Monte Carlo (L=2, K=2, M=16, 1e4 trials)", [](Outcome& o) {
        mrc_closed_form_vs_mc(o, PilotNoiseModel::averaged, true);
        mrc_closed_form_vs_mc(o, PilotNoiseModel::exact, false);
    });
    criterion(4, "MMSE asymptotics vs Monte Carlo sum SE (L=4, K=3, M=32, 30 dBm)", mmse_asymptotics_vs_mc);
    criterion(5, "qualitative orderings at desk scale", orderings);
    criterion(6, "V^m reduced form vs literal double sum", vm_equivalence);
    criterion(7, "quartic moment vs 1e6-sample Monte Carlo", quartic);
    criterion(8, "estimator identities", estimator_identities);
    criterion(9, "ADC power hand value and bit ratio", adc_power);
    return failures;
}
