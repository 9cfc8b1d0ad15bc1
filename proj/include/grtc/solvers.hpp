// Copyright 2026 The grtc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// @file solvers.hpp
/// Linear conjugate gradients and the three outer solvers for the
/// graph-regularized completion problem:
///   - altmin_cg:    cyclic block minimization, each block solved by CG on
///                   the matrix-free subproblem operator;
///   - altmin_exact: the same iteration with a dense Cholesky solve (reference);
///   - admm:         splitting U = B, row-wise U updates, CG for the
///                   Laplacian-coupled B update.
///
/// All three stop on |E(U_t) - E(U_{t-1})| < delta_tol, where E is the
/// relative error on the training entries, or on the time / iteration budget.

#pragma once

#include "grtc/metrics.hpp"
#include "grtc/report.hpp"
#include "grtc/subproblem.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace grtc {

struct CGConfig {
  double rel_tol = 1e-8;
  int max_iters = 500;

  void validate() const {
    if (!(rel_tol > 0)) throw ConfigError("cg.rel_tol must be positive");
    if (max_iters < 1) throw ConfigError("cg.max_iters must be at least 1");
  }
};

template <typename Scalar>
struct CGResult {
  Vector<Scalar> x;
  int iterations = 0;
  Scalar residual_norm = 0;
  Scalar initial_residual_norm = 0;
};

/// Solves M x = rhs for symmetric positive definite M given only x -> M x.
/// Stops once ||r_t|| <= rel_tol ||r_0|| or after max_iters updates.
template <typename Scalar, typename Apply>
CGResult<Scalar> linear_cg(const Apply& apply, const Vector<Scalar>& rhs, Vector<Scalar> x0, const CGConfig& cfg) {
  detail::require(rhs.size() == x0.size(), "linear_cg: size mismatch");
  Vector<Scalar> x = std::move(x0);
  Vector<Scalar> r = rhs - apply(x);
  Scalar rr = r.squaredNorm();
  const Scalar r0 = std::sqrt(rr);
  if (!std::isfinite(r0)) throw SolverError("linear_cg: non-finite initial residual");
  const Scalar target = static_cast<Scalar>(cfg.rel_tol) * r0;
  Vector<Scalar> p;
  Vector<Scalar> v;
  Scalar rr_prev = 0;
  int t = 0;
  for (; std::sqrt(rr) > target && t < cfg.max_iters; ++t) {
    if (t == 0)
      p = r;
    else
      p = r + (rr / rr_prev) * p;
    v = apply(p);
    const Scalar pv = p.dot(v);
    if (!std::isfinite(pv) || !(pv > 0))
      throw SolverError("linear_cg: operator is not positive definite along a search direction");
    const Scalar alpha = rr / pv;
    x += alpha * p;
    r -= alpha * v;
    rr_prev = rr;
    rr = r.squaredNorm();
    if (!std::isfinite(rr)) throw SolverError("linear_cg: non-finite residual");
  }
  return {std::move(x), t, std::sqrt(rr), r0};
}

struct StoppingRule {
  double delta_tol = 1e-6;
  double time_budget = std::numeric_limits<double>::infinity();
  int max_outer_iters = 500;

  void validate() const {
    if (!(delta_tol >= 0)) throw ConfigError("stop.delta_tol must be nonnegative");
    if (!(time_budget > 0)) throw ConfigError("stop.time_budget must be positive");
    if (max_outer_iters < 1) throw ConfigError("stop.max_outer_iters must be at least 1");
  }
};

struct ADMMConfig {
  double eta0 = 1.0;
  double gamma = 1.05;
  /// Upper bound on the penalty; the geometric schedule stops growing here.
  /// Unbounded growth pins U to B and stalls the iteration short of a
  /// stationary point.
  double eta_max = 100.0;
  /// The delta rule only fires once max_i ||B_i - U_i|| / ||U_i|| is below this.
  double primal_tol = 1e-5;
  CGConfig inner{1e-10, 1000};

  void validate() const {
    if (!(eta0 > 0)) throw ConfigError("admm.eta0 must be positive");
    if (!(gamma >= 1)) throw ConfigError("admm.gamma must be at least 1");
    if (!(eta_max >= eta0)) throw ConfigError("admm.eta_max must be at least eta0");
    if (!(primal_tol > 0)) throw ConfigError("admm.primal_tol must be positive");
    inner.validate();
  }
};

/// Ridge added to every block when all lambda_i are zero, keeping the
/// otherwise singular normal equations of empty rows well posed.
inline constexpr double kUnregularizedRidge = 1e-10;

template <typename Scalar>
Scalar subproblem_ridge(const Regularization<Scalar>& reg) {
  for (Scalar l : reg.lambda)
    if (l != Scalar(0)) return Scalar(0);
  return static_cast<Scalar>(kUnregularizedRidge);
}

template <typename Scalar>
struct SolveResult {
  CPFactors<Scalar> factors;
  SolverReport report;
};

/// Optional held-out entries scored at every outer iteration.
template <typename Scalar>
struct SolveOptions {
  const SparseObservations<Scalar>* test = nullptr;
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Relative training error; falls back to the absolute residual when the
/// training values are all zero.
template <typename Scalar>
Scalar train_error(const ResidualNorms<Scalar>& n) {
  return n.truth > 0 ? n.residual / n.truth : n.residual;
}

template <typename Scalar>
IterationRecord make_record(int iter, double time_s, const Problem<Scalar>& problem, const CPFactors<Scalar>& factors,
                            const SolveOptions<Scalar>& opts, long inner) {
  IterationRecord rec;
  rec.iter = iter;
  rec.time_s = time_s;
  rec.objective = static_cast<double>(objective_value(problem, factors));
  const auto tr = residual_norms(factors, problem.obs);
  rec.train_re = static_cast<double>(train_error(tr));
  rec.train_rmse = tr.count ? static_cast<double>(tr.residual / std::sqrt(static_cast<Scalar>(tr.count))) : 0.0;
  if (opts.test != nullptr && !opts.test->empty()) {
    const auto te = residual_norms(factors, *opts.test);
    rec.test_re = static_cast<double>(train_error(te));
    rec.test_rmse = static_cast<double>(te.residual / std::sqrt(static_cast<Scalar>(te.count)));
  }
  rec.inner_iters = inner;
  return rec;
}

/// Applies the stopping rule after an outer iteration; returns true to stop.
inline bool check_stop(const StoppingRule& stop, double delta, bool delta_allowed, double elapsed, SolverReport& report) {
  if (delta_allowed && delta < stop.delta_tol) {
    report.termination = Termination::DeltaTol;
    return true;
  }
  if (elapsed > stop.time_budget) {
    report.termination = Termination::TimeBudget;
    return true;
  }
  return false;
}

template <typename Scalar>
void check_init(const Problem<Scalar>& problem, const CPFactors<Scalar>& init) {
  if (!init.matches(problem.obs.shape())) grtc::detail::fail_arg("solver: initial factors do not match the data shape");
}

/// Shared outer loop of the two alternating-minimization variants.
/// `solve_block(op, x0)` returns (x, inner iterations).
template <typename Scalar, typename BlockSolve>
SolveResult<Scalar> altmin_loop(const char* name, const Problem<Scalar>& problem, CPFactors<Scalar> factors,
                                const StoppingRule& stop, const SolveOptions<Scalar>& opts, BlockSolve&& solve_block) {
  stop.validate();
  check_init(problem, factors);
  Stopwatch clock;
  SolverReport report;
  report.solver = name;
  const Scalar ridge = subproblem_ridge(problem.reg);
  double prev_err = static_cast<double>(train_error(residual_norms(factors, problem.obs)));
  report.termination = Termination::MaxIters;
  for (int t = 1; t <= stop.max_outer_iters; ++t) {
    long inner = 0;
    for (Index i = 0; i < problem.order(); ++i) {
      SubproblemOperator<Scalar> op(problem.obs, factors, i, problem.shifted(i), problem.reg.lambda, ridge);
      auto [x, iters] = solve_block(op, vec_rows(factors[i]));
      factors.set_factor(i, unvec_rows(x, op.rows(), op.rank()));
      inner += iters;
    }
    auto rec = make_record(t, clock.seconds(), problem, factors, opts, inner);
    const double delta = std::abs(rec.train_re - prev_err);
    prev_err = rec.train_re;
    report.records.push_back(rec);
    if (check_stop(stop, delta, true, rec.time_s, report)) break;
  }
  return {std::move(factors), std::move(report)};
}

}  // namespace detail

template <typename Scalar>
SolveResult<Scalar> altmin_cg(const Problem<Scalar>& problem, const CPFactors<Scalar>& init, const StoppingRule& stop,
                              const CGConfig& cg, const SolveOptions<Scalar>& opts = {}) {
  cg.validate();
  return detail::altmin_loop("altmin-cg", problem, init, stop, opts,
                             [&](const SubproblemOperator<Scalar>& op, Vector<Scalar> x0) {
                               auto res = linear_cg(op, op.rhs_vector(), std::move(x0), cg);
                               return std::pair<Vector<Scalar>, long>(std::move(res.x), res.iterations);
                             });
}

/// Reference solver: every block solved exactly by a dense Cholesky
/// factorization of M^(i). Requires m_i R <= 2000 for every mode.
template <typename Scalar>
SolveResult<Scalar> altmin_exact(const Problem<Scalar>& problem, const CPFactors<Scalar>& init, const StoppingRule& stop,
                                 const SolveOptions<Scalar>& opts = {}) {
  for (Index i = 0; i < init.order(); ++i)
    detail::require(init[i].size() <= 2000, "altmin_exact: block too large for dense assembly");
  return detail::altmin_loop("altmin-exact", problem, init, stop, opts,
                             [&](const SubproblemOperator<Scalar>& op, const Vector<Scalar>&) {
                               Eigen::LLT<Matrix<Scalar>> llt(op.assemble_dense());
                               if (llt.info() != Eigen::Success)
                                 throw SolverError("altmin_exact: block system is not positive definite");
                               return std::pair<Vector<Scalar>, long>(llt.solve(op.rhs_vector()), 0);
                             });
}

/// Splitting scheme with B_i = U_i, multipliers Y_i and penalty eta:
///   rows of U_i:  (A_j + eta I + C) u_j = Q_j + eta b_j + y_j
///   B_i:          (eta I + lambda_i L_i) B_i = eta U_i - Y_i       (CG)
///   Y_i:          Y_i += eta (B_i - U_i)
/// and eta <- gamma eta after each sweep over the modes.
template <typename Scalar>
SolveResult<Scalar> admm(const Problem<Scalar>& problem, const CPFactors<Scalar>& init, const StoppingRule& stop,
                         const ADMMConfig& cfg, const SolveOptions<Scalar>& opts = {}) {
  stop.validate();
  cfg.validate();
  detail::check_init(problem, init);
  detail::Stopwatch clock;
  SolverReport report;
  report.solver = "admm";
  report.termination = Termination::MaxIters;

  const Index k = problem.order();
  CPFactors<Scalar> u = init;
  std::vector<Matrix<Scalar>> b = init.factors();
  std::vector<Matrix<Scalar>> y;
  for (const auto& f : init.factors()) y.push_back(Matrix<Scalar>::Zero(f.rows(), f.cols()));
  std::vector<SparseMatrix<Scalar>> shifted;
  for (Index i = 0; i < k; ++i) shifted.push_back(problem.shifted(i).matrix());

  Scalar eta = static_cast<Scalar>(cfg.eta0);
  double prev_err = static_cast<double>(detail::train_error(residual_norms(u, problem.obs)));
  for (int t = 1; t <= stop.max_outer_iters; ++t) {
    long inner = 0;
    double primal = 0;
    for (Index i = 0; i < k; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const Scalar li = problem.reg.at(i);
      SubproblemOperator<Scalar> op(problem.obs, u, i, problem.shifted(i), problem.reg.lambda);
      Matrix<Scalar> ui(op.rows(), op.rank());
      for (Index j = 0; j < op.rows(); ++j) {
        auto sys = build_row_system(op, j, eta, b[si].row(j), y[si].row(j));
        Eigen::LLT<Matrix<Scalar>> llt(sys.matrix);
        if (llt.info() != Eigen::Success) throw SolverError("admm: row system is not positive definite");
        ui.row(j) = llt.solve(sys.rhs).transpose();
      }
      u.set_factor(i, ui);

      Matrix<Scalar> rhs = eta * ui - y[si];
      if (li == Scalar(0)) {
        b[si] = rhs / eta;
      } else {
        const auto& lmat = shifted[si];
        const Index m = ui.rows();
        const Index r = ui.cols();
        auto apply = [&](const Vector<Scalar>& v) -> Vector<Scalar> {
          Eigen::Map<const Matrix<Scalar>> vm(v.data(), m, r);
          Vector<Scalar> out(v.size());
          Eigen::Map<Matrix<Scalar>> om(out.data(), m, r);
          om.noalias() = eta * vm;
          om.noalias() += li * (lmat * vm);
          return out;
        };
        Vector<Scalar> rv = Eigen::Map<const Vector<Scalar>>(rhs.data(), rhs.size());
        Vector<Scalar> x0 = Eigen::Map<const Vector<Scalar>>(b[si].data(), b[si].size());
        auto res = linear_cg(apply, rv, std::move(x0), cfg.inner);
        b[si] = Eigen::Map<const Matrix<Scalar>>(res.x.data(), m, r);
        inner += res.iterations;
      }
      y[si] += eta * (b[si] - ui);
      const Scalar un = ui.norm();
      const Scalar gap = (b[si] - ui).norm();
      primal = std::max(primal, static_cast<double>(un > 0 ? gap / un : gap));
    }
    eta = std::min(eta * static_cast<Scalar>(cfg.gamma), static_cast<Scalar>(cfg.eta_max));

    auto rec = detail::make_record(t, clock.seconds(), problem, u, opts, inner);
    rec.primal_residual = primal;
    const double delta = std::abs(rec.train_re - prev_err);
    prev_err = rec.train_re;
    report.records.push_back(rec);
    if (detail::check_stop(stop, delta, primal <= cfg.primal_tol, rec.time_s, report)) break;
  }
  return {std::move(u), std::move(report)};
}

}  // namespace grtc
