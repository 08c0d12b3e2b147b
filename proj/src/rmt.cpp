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

#include "qmimo/rmt.hpp"

#include "qmimo/combining.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace qmimo {

namespace {

void check_matrix(const CMat& a, int m, const char* what) {
    std::ostringstream msg;
    if (a.rows() != m || a.cols() != m) {
        msg << what << " must be " << m << " x " << m;
        throw DomainError(msg.str());
    }
    if (!a.allFinite()) throw DomainError(std::string(what) + " has non-finite entries");
    const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw DomainError(std::string(what) + " is not Hermitian");
    const double lmin = Eigen::SelfAdjointEigenSolver<CMat>(a, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lmin < -1e-10 * scale) throw DomainError(std::string(what) + " is not positive semidefinite");
}

RVec traces(const DetEqInput& in, const CMat& gamma) {
    RVec t(in.size());
    for (int u = 0; u < in.size(); ++u) t(u) = trace_product(in.delta[u], gamma) / in.antennas();
    return t;
}

double relative_gap(const RVec& a, const RVec& b) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        r = std::max(r, std::abs(a(i) - b(i)) / std::max(1.0, std::abs(b(i))));
    return r;
}

/// Y(u, v) = tr(Delta_u G_v) / (M^2 (1 + delta_v)^2), G_v = Gamma Delta_v Gamma.
RMat build_y(const std::vector<CMat>& delta_mats, const std::vector<CMat>& gdg, const RVec& delta, int m) {
    const int n = static_cast<int>(delta_mats.size());
    RMat y(n, n);
    const double m2 = static_cast<double>(m) * m;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) y(u, v) = trace_product(delta_mats[u], gdg[v]) / (m2 * std::pow(1.0 + delta(v), 2));
    return y;
}

std::vector<CMat> sandwich(const std::vector<CMat>& delta_mats, const CMat& gamma) {
    std::vector<CMat> out;
    out.reserve(delta_mats.size());
    for (const CMat& d : delta_mats) out.push_back(gamma * d * gamma);
    return out;
}

}  // namespace

void DetEqInput::check() const {
    const int m = antennas();
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("DetEqInput: alpha must be positive");
    check_matrix(d, m, "DetEqInput: D");
    for (const CMat& x : delta) check_matrix(x, m, "DetEqInput: Delta");
}

CMat gamma_of(const DetEqInput& in, const RVec& delta) {
    const int m = in.antennas();
    CMat a = in.d;
    for (int u = 0; u < in.size(); ++u) a += in.delta[u] / (m * (1.0 + delta(u)));
    a.diagonal().array() += in.alpha;
    a = 0.5 * (a + a.adjoint());
    CMat g = solve_hpd(a, CMat::Identity(m, m));
    return 0.5 * (g + g.adjoint());
}

DetEqSolution::DetEqSolution(const DetEqInput& input, CMat gamma, RVec delta, int iterations, double residual,
                             std::vector<double> history)
    : m_(input.antennas()), delta_mats_(input.delta), gamma_(std::move(gamma)), delta_(std::move(delta)),
      iterations_(iterations), residual_(residual), history_(std::move(history)) {
    gdg_ = sandwich(delta_mats_, gamma_);
    y_ = build_y(delta_mats_, gdg_, delta_, m_);
    const int n = static_cast<int>(delta_mats_.size());
    if (n > 0) {
        const RMat iy = RMat::Identity(n, n) - y_;
        lu_.compute(iy);
        const double det = std::abs(lu_.determinant());
        if (!(det > 1e-14) || !std::isfinite(det)) throw SolverError("Gamma': I - Y is singular", det);
    }
}

RVec DetEqSolution::delta_prime(const CMat& c) const {
    const int n = static_cast<int>(delta_mats_.size());
    if (n == 0) return RVec();
    RVec x(n);
    for (int u = 0; u < n; ++u) x(u) = trace_product(c, gdg_[u]) / m_;
    return lu_.solve(x);
}

GammaPrime DetEqSolution::gamma_prime(const CMat& c) const {
    GammaPrime out;
    out.delta_prime = delta_prime(c);
    CMat inner = c;
    for (std::size_t u = 0; u < delta_mats_.size(); ++u) {
        const Eigen::Index i = static_cast<Eigen::Index>(u);
        inner += delta_mats_[u] * (out.delta_prime(i) / (m_ * std::pow(1.0 + delta_(i), 2)));
    }
    out.gamma_prime = gamma_ * inner * gamma_;
    out.gamma_prime = 0.5 * (out.gamma_prime + out.gamma_prime.adjoint()).eval();
    return out;
}

DetEqSolution::Projector DetEqSolution::projector(const CMat& a) const {
    Projector p;
    p.sol_ = this;
    p.gamma_a_gamma_ = gamma_ * a * gamma_;
    const Eigen::Index n = static_cast<Eigen::Index>(delta_mats_.size());
    p.a_terms_.resize(n);
    const double m2 = static_cast<double>(m_) * m_;
    for (Eigen::Index u = 0; u < n; ++u)
        p.a_terms_(u) = trace_product(a, gdg_[static_cast<std::size_t>(u)]) / (m2 * std::pow(1.0 + delta_(u), 2));
    return p;
}

double DetEqSolution::Projector::operator()(const CMat& c) const {
    const double direct = trace_product(gamma_a_gamma_, c) / sol_->m_;
    if (a_terms_.size() == 0) return direct;
    return direct + a_terms_.dot(sol_->delta_prime(c));
}

DetEqSolution solve_gamma(const DetEqInput& input, const SolveOptions& opt) {
    const int n = input.size();
    const int m = input.antennas();
    if (!(input.alpha > 0.0)) throw DomainError("solve_gamma: alpha must be positive");

    RVec delta = RVec::Constant(n, 1.0 / input.alpha);
    std::vector<double> history;
    double previous = std::numeric_limits<double>::infinity();
    bool damped = false;

    for (int it = 1; it <= opt.max_iter; ++it) {
        const CMat gamma = gamma_of(input, delta);
        const RVec t = traces(input, gamma);
        const double residual = relative_gap(t, delta);
        if (opt.trace) history.push_back(residual);
        if (opt.log) *opt.log << "solve_gamma " << it << ' ' << residual << '\n';
        if (!std::isfinite(residual)) throw SolverError("solve_gamma: non-finite iterate", residual);
        if (residual < opt.tol) return DetEqSolution(input, gamma, t, it, residual, std::move(history));

        RVec next;
        if (opt.method == SolveOptions::Method::newton && n > 0) {
            // Newton on F(delta) = T(delta) - delta; dT/ddelta is exactly Y.
            const RMat y = build_y(input.delta, sandwich(input.delta, gamma), delta, m);
            next = delta + (RMat::Identity(n, n) - y).partialPivLu().solve(t - delta);
            if (!next.allFinite() || (next.array() < 0.0).any() || residual > previous) next = t;
        } else {
            if (residual > previous) damped = true;
            next = damped ? RVec(0.5 * (delta + t)) : t;
        }
        previous = residual;
        delta = next;
    }
    const RVec t = traces(input, gamma_of(input, delta));
    throw SolverError("solve_gamma: no convergence", relative_gap(t, delta));
}

GammaPrime solve_gamma_prime(const DetEqSolution& solution, const CMat& c) { return solution.gamma_prime(c); }

double quartic_moment(const CMat& a, const CMat& b) {
    const cdouble t = (b * a).trace();
    return std::norm(t) + (b * a * b.adjoint() * a).trace().real();
}

Rank1Check rank1_update_check(const CMat& a, const CMat& g_mat, const CVec& g, double alpha, double alpha_prime) {
    const Eigen::Index m = a.rows();
    const CMat x = g_mat + alpha * CMat::Identity(m, m);
    const CMat x_inv = x.inverse();
    const CMat xp_inv = (x + alpha_prime * g * g.adjoint()).inverse();

    Rank1Check out;
    out.perturbation = std::abs((a * x_inv).trace() - (a * xp_inv).trace());
    out.bound = Eigen::JacobiSVD<CMat>(a).singularValues()(0) / alpha;
    const Eigen::RowVectorXcd lhs = g.adjoint() * xp_inv;
    const Eigen::RowVectorXcd rhs = (g.adjoint() * x_inv) / (1.0 + alpha_prime * g.dot(x_inv * g));
    out.inversion_residual = (lhs - rhs).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace qmimo
