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

#include "qmimo/types.hpp"

#include <Eigen/LU>

#include <iosfwd>
#include <vector>

namespace qmimo {

/// Inputs of the deterministic equivalent for tr(A (H H^H + D + alpha I)^{-1}) / M
/// with independent columns h_u ~ CN(0, Delta_u / M).
struct DetEqInput {
    std::vector<CMat> delta;
    CMat d;
    double alpha = 1.0;

    int antennas() const { return static_cast<int>(d.rows()); }
    int size() const { return static_cast<int>(delta.size()); }

    /// Throws DomainError unless every matrix is square M x M, Hermitian,
    /// PSD (to rounding) and finite, and alpha > 0.
    void check() const;
};

struct SolveOptions {
    enum class Method {
        fixed_point,  ///< plain iteration with a 0.5-damping fallback
        newton,       ///< fixed-point steps accelerated by Newton steps on delta
    };
    Method method = Method::newton;
    double tol = 1e-10;
    int max_iter = 500;
    /// Record the residual of every iteration.
    bool trace = false;
    /// When set, one "iteration residual" line per iteration is written here.
    std::ostream* log = nullptr;
};

/// delta' and Gamma' for one C matrix.
struct GammaPrime {
    CMat gamma_prime;
    RVec delta_prime;
};

/// Solution of the fixed point
///   Gamma = ( (1/M) sum_u Delta_u / (1 + delta_u) + D + alpha I )^{-1},
///   delta_u = tr(Delta_u Gamma) / M,
/// plus everything needed to evaluate Gamma' for arbitrary C cheaply.
class DetEqSolution {
public:
    DetEqSolution(const DetEqInput& input, CMat gamma, RVec delta, int iterations, double residual,
                  std::vector<double> history);

    const CMat& gamma() const { return gamma_; }
    const RVec& delta() const { return delta_; }
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }
    const std::vector<double>& history() const { return history_; }

    /// Y with Y(u, v) = tr(Delta_u Gamma Delta_v Gamma) / (M^2 (1 + delta_v)^2).
    const RMat& y() const { return y_; }

    RVec delta_prime(const CMat& c) const;
    GammaPrime gamma_prime(const CMat& c) const;

    /// tr(A Gamma') / M for many C with A fixed; construction costs
    /// O(n M^3), each evaluation O(n M^2).
    class Projector {
    public:
        double operator()(const CMat& c) const;

    private:
        friend class DetEqSolution;
        const DetEqSolution* sol_ = nullptr;
        CMat gamma_a_gamma_;  // Gamma A Gamma
        RVec a_terms_;        // tr(A Gamma Delta_u Gamma) / M^2 / (1 + delta_u)^2
    };
    Projector projector(const CMat& a) const;

private:
    int m_;
    std::vector<CMat> delta_mats_;
    CMat gamma_;
    RVec delta_;
    int iterations_;
    double residual_;
    std::vector<double> history_;
    std::vector<CMat> gdg_;  // Gamma Delta_u Gamma
    RMat y_;
    Eigen::PartialPivLU<RMat> lu_;
};

/// Gamma for a given delta (one matrix inversion).
CMat gamma_of(const DetEqInput& input, const RVec& delta);

/// Throws SolverError on non-convergence within max_iter or when I - Y is
/// singular at the solution.
DetEqSolution solve_gamma(const DetEqInput& input, const SolveOptions& options = {});

/// Convenience wrapper around DetEqSolution::gamma_prime.
GammaPrime solve_gamma_prime(const DetEqSolution& solution, const CMat& c);

/// E{|a^H B a|^2} for a ~ CN(0, A): |tr(B A)|^2 + tr(B A B^H A).
double quartic_moment(const CMat& a, const CMat& b);

struct Rank1Check {
    /// |tr(A (G + alpha I)^{-1}) - tr(A (G + alpha' g g^H + alpha I)^{-1})|
    double perturbation = 0.0;
    /// ||A|| / alpha, the bound the perturbation must respect.
    double bound = 0.0;
    /// Max deviation between both sides of
    ///   g^H (X + alpha' g g^H)^{-1} = g^H X^{-1} / (1 + alpha' g^H X^{-1} g),  X = G + alpha I.
    double inversion_residual = 0.0;
};

Rank1Check rank1_update_check(const CMat& a, const CMat& g_mat, const CVec& g, double alpha, double alpha_prime);

}  // namespace qmimo
