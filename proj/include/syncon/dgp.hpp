// Synthetic-panel generator: grouped factor models with a shared additive
// shock, stationary AR(1) group factors, optional random-walk group factors,
// an optional common polynomial trend, unit fixed effects, and Gaussian
// noise, plus the loading/limit views the analytic machinery consumes.
#pragma once

#include "syncon/asymptotics.hpp"
#include "syncon/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace syncon {

/*
 * Generative model for one treated unit plus J controls. The controls are
 * split into K contiguous groups of J/K units sharing one stationary AR(1)
 * factor each; the treated unit loads on the first group's factor. When
 * R > 0 the controls are independently split into R contiguous groups
 * sharing one random-walk factor each, the treated unit again loading on
 * the first. Selection on unobservables enters through `post_shift`: the
 * first stationary factor's mean moves by that amount in every
 * post-treatment period, so any weighting that under-represents the treated
 * unit's own group inherits a bias proportional to the missing mass.
 */
struct FactorDGP {
  int J = 20;                         // number of control units
  int K = 10;                         // stationary groups; J % K == 0
  int R = 0;                          // random-walk groups; 0 = stationary model
  double sigma2 = 1.0;                // idiosyncratic noise variance
  double rho = 0.5;                   // AR(1) coefficient, |rho| < 1
  double delta_variance = 1.0;        // variance of the shared shock
  double post_shift = 1.0;            // post-period mean shift of factor 1
  std::vector<double> fixed_effects;  // size J+1, treated first; empty = all 0
  int trend = 0;                      // common polynomial trend degree; 0 = off
  std::vector<double> hetero;         // per-unit noise variances, size J+1;
                                      // empty = sigma2 everywhere
  double treatment_effect = 0.0;      // added to treated post outcomes

  // Group membership of control index c in 0..J-1.
  int stationary_group(int c) const { return c / (J / K); }
  int walk_group(int c) const { return c / (J / R); }

  // Throws Error(invalid_input) on divisibility violations, sigma2 < 0,
  // |rho| >= 1, negative variances, or wrongly sized per-unit vectors.
  void validate() const;
};

// Replication-addressable seed: `base` identifies the experiment, `stream`
// the replication. Every (base, stream) pair yields an independent draw,
// bit-identical across platforms and standard-library versions.
struct SimSeed {
  std::uint64_t base = 0;
  std::uint64_t stream = 0;
};

/*
 * Component series of one simulated panel before they are combined into
 * outcomes. All series are finished products: recursions applied and
 * variances scaled. Keeping them separate lets tests splice one stream at a
 * time, e.g. swap the shared-shock series while holding factors and noise
 * fixed to show sum-to-one estimators never react to it.
 */
struct SimDraws {
  Eigen::VectorXd delta;   // length T, shared shock
  Eigen::MatrixXd lambda;  // K x T, AR(1) factors, marginal variance 1
  Eigen::MatrixXd gamma;   // R x T, random walks from 0 with unit-variance steps
  Eigen::MatrixXd eps;     // (J+1) x T, scaled idiosyncratic noise
};

// Draws the component series for t0 pre and t1 post periods. Every random
// object (the shared shock, each factor, each unit's noise series) consumes
// an independent substream derived from (seed, object id), so regenerating
// one object with a different seed leaves all others bit-identical.
SimDraws simulate_draws(const FactorDGP& dgp, int t0, int t1, SimSeed seed);

// Combines component series into a Panel:
//   outcome = fixed effect + shared shock + own-group factors
//             [+ common trend] + noise,
// with post_shift added to factor 1 in post periods and treatment_effect
// added to the treated row's post outcomes.
Panel assemble(const FactorDGP& dgp, const SimDraws& draws, int t0, int t1);

// simulate = assemble(simulate_draws). A pure function of its arguments;
// replications can run on any number of workers with identical results.
Panel simulate(const FactorDGP& dgp, int t0, int t1, SimSeed seed);

/*
 * Loading view of the model. mu0 and the rows of mu hold unit loadings on
 * the K stationary group factors; when any fixed effect is nonzero one more
 * column carries the fixed effects as loadings on a constant factor. theta0
 * and theta hold loadings on the R random-walk factors (width 0 if R = 0).
 */
struct LoadingMatrix {
  Eigen::VectorXd mu0;     // treated, length F
  Eigen::MatrixXd mu;      // controls, J x F
  Eigen::VectorXd theta0;  // treated, length R
  Eigen::MatrixXd theta;   // controls, J x R
};
LoadingMatrix loading_matrix(const FactorDGP& dgp);

// Infinite-history description of the model for the analytic table rows.
// The shared shock is omitted: every estimator given an analytic row
// enforces sum-to-one weights, under which a common additive shock cancels
// exactly. A common polynomial trend becomes a nonstationary direction with
// unit loadings everywhere for the same reason. Per-unit noise variances
// have no scalar limit counterpart and are rejected.
LimitSpec limit_spec(const FactorDGP& dgp);

}  // namespace syncon
