#pragma once

#include "syncon/panel.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>

namespace syncon {

// Which constraints the weight fit imposes. All eight combinations are
// legal; (nonneg, sum_to_one, intercept) = (true, true, false) is the
// canonical simplex fit, (true, true, true) its demeaned variant, and
// (false, false, true) a plain regression with intercept.
struct ConstraintSet {
  bool nonneg = true;
  bool sum_to_one = true;
  bool intercept = false;
};

/*
 * Quadratic fit criterion in second-moment form:
 *
 *   Q(w) = w' gram w - 2 linear' w + constant
 *
 * which equals the mean squared pre-period residual when the moments come
 * from data, and the population criterion when they come from a limit
 * specification. `mean_controls`/`mean_treated` carry first moments; they
 * are only consulted when constraints.intercept is set, in which case the
 * intercept is profiled out exactly by centering the moments. Leaving them
 * empty/zero makes intercept profiling a no-op on already-centered data.
 */
struct QpProblem {
  Eigen::MatrixXd gram;          // J x J, PSD within 1e-8
  Eigen::VectorXd linear;        // J
  double constant = 0.0;
  ConstraintSet constraints;
  Eigen::VectorXd mean_controls; // J or empty
  double mean_treated = 0.0;
};

struct QpSolution {
  Eigen::VectorXd weights;
  double intercept = 0.0;      // 0 when the intercept is disabled
  double objective = 0.0;      // Q at the solution (centered form if intercept)
  double kkt_residual = 0.0;   // max violation of the optimality certificate
  int iterations = 0;          // active-set pivots across all phases
  bool nonunique = false;      // optimal face has dimension >= 1
  std::map<std::string, double> diagnostics;
};

// Global minimizer of the problem under its constraint set. Ties are broken
// toward the minimum-norm optimum (exactly: ||w||^2 is minimized over the
// optimal face). Throws Error(numeric_failure) when gram is asymmetric or
// indefinite beyond the 1e-8 slack.
QpSolution solve_qp(const QpProblem& problem);

// Builds the pre-period moment problem from a panel and solves it. With the
// intercept enabled this equals fitting demean_pre(panel) without one, and
// the reported intercept equals mean(y0) - mean(controls)'w over the pre
// period. Diagnostics: "overfit" = 1 when t0 < J.
QpSolution fit_weights(const Panel& panel, const ConstraintSet& constraints);

// Exhaustive lattice search over the simplex with `grid` steps per
// coordinate; J <= 4 only. Test oracle for solve_qp; resolves lattice ties
// toward the smaller norm.
Eigen::VectorXd brute_force_simplex(const QpProblem& problem, int grid);

/*
 * Lower-level entry shared by the limit machinery and the exact-loading
 * weight computations:
 *
 *   minimize x' gram x - 2 linear' x   s.t.  eq x = eq_rhs,  x >= 0 if nonneg
 *
 * Equality constraints may be any consistent system (the sum-to-one row
 * included explicitly when wanted). Infeasible constraints raise
 * Error(invalid_input).
 */
struct GeneralQp {
  Eigen::MatrixXd gram;
  Eigen::VectorXd linear;
  Eigen::MatrixXd eq;      // m x n, m may be 0
  Eigen::VectorXd eq_rhs;  // m
  bool nonneg = false;
};

QpSolution solve_general(const GeneralQp& qp);

}  // namespace syncon
