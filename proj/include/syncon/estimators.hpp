// Treatment-effect estimators: simplex-weight fits with and without an
// intercept, uniform-weight differencing, oracle exact-loading weights,
// pre-mean matching, lag-instrumented moment fitting, and a principal-
// components counterfactual.
#pragma once

#include "syncon/dgp.hpp"
#include "syncon/panel.hpp"
#include "syncon/qp.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>

namespace syncon {

enum class EstimatorTag {
  sc,                 // simplex weights, no intercept
  sc_demeaned,        // simplex weights plus intercept
  did,                // uniform weights plus intercept
  sc_infeasible,      // exact-loading oracle weights; needs the generating model
  sc_mean_predictor,  // weights matching the pre-period mean only
  sc_iv,              // lag-instrumented moment weights, sum-to-one
  ife,                // principal-components counterfactual
  custom,             // caller-chosen constraint set
};

struct EstimatorKind {
  EstimatorTag tag = EstimatorTag::sc;
  ConstraintSet constraints;  // consulted when tag == custom
  int num_factors = 0;        // consulted when tag == ife
};

// Canonical names used in artifacts and config files: "sc", "sc_demeaned",
// "did", "sc_infeasible", "sc_mean_predictor", "sc_iv", and "ife:<r>" where
// <r> is the factor count. `custom` has no parseable name.
std::string estimator_name(const EstimatorKind& kind);
EstimatorKind parse_estimator(const std::string& name);

struct EstimateReport {
  EstimatorKind kind;
  Eigen::VectorXd weights;  // empty for ife
  double intercept = 0.0;
  EffectSeries effects;     // one entry per post period
  double pre_rmspe = 0.0;
  std::map<std::string, double> diagnostics;
};

// Dispatches on kind. sc_infeasible cannot be computed from a panel alone
// (its weights come from the generating model via infeasible_weights) and
// raises invalid_input here.
EstimateReport estimate(const Panel& panel, const EstimatorKind& kind);

// Shared effect engine at fixed weights. With `intercept` the pre-period
// mean residual is absorbed into the level before effects are read off, so
// pre-period fitted residuals average zero.
EstimateReport estimate_with_weights(const Panel& panel,
                                     const Eigen::VectorXd& weights,
                                     bool intercept);

// Minimum-norm simplex weights reproducing the treated loadings exactly:
//   argmin w'w  s.t.  mu' w = mu0,  w in the simplex.
// Throws invalid_input("no exact-loading weights exist") when the simplex
// contains no exact match.
Eigen::VectorXd exact_loading_weights(const Eigen::MatrixXd& mu,
                                      const Eigen::VectorXd& mu0);

// Exact-loading weights of a generative model, matching the stationary and
// random-walk loadings (and fixed effects, when present) simultaneously.
Eigen::VectorXd infeasible_weights(const FactorDGP& dgp);

// Simplex weights matching only the pre-period mean of the treated unit:
//   minimize (mean_pre(y0) - mean_pre(Y)' w)^2.
// The objective is rank one, so the minimal-norm minimizer is returned and
// the diagnostics flag `underdetermined` is 1 whenever the zero-objective
// set has dimension >= 1.
QpSolution mean_predictor_weights(const Panel& panel);

// Two-step moment fit using the previous period's control outcomes as
// instruments, under sum-to-one with no sign constraint: step 1 uses
// identity weighting, step 2 the inverse of the estimated moment covariance
// (ridge 1e-8). Diagnostics report `j_stat` (sample size times the weighted
// criterion at the optimum) and `flat_criterion` = 1 when the set of
// weights within 1% of the minimal criterion has diameter above 0.1.
// Requires t0 >= J + 2 so the moments outnumber the parameters.
QpSolution iv_sc_weights(const Panel& panel);

// Squared norm of the instrument moment vector at fixed weights. Exactly
// zero on a noiseless panel whose weights reproduce the treated unit.
double iv_criterion(const Panel& panel, const Eigen::VectorXd& weights);

// Principal-components counterfactual with a known factor count: principal
// directions are taken from the joint pre-period second moment of all
// units, the treated unit's loadings are its own coordinates in that basis,
// the factor path is recovered from the controls at every period, and an
// intercept aligns pre-period levels. Requires
//   1 <= num_factors <= min(J, T) - 1.
EstimateReport ife_estimate(const Panel& panel, int num_factors);

}  // namespace syncon
