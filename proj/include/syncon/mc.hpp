// Replicated-experiment harness: runs a set of estimators over simulated
// panels across a grid of pre-period lengths, aggregates weight allocation,
// bias, and dispersion, and appends analytic infinite-history rows.
#pragma once

#include "syncon/dgp.hpp"
#include "syncon/estimators.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace syncon {

struct McConfig {
  std::string label = "mc";  // value of the `panel` column in artifacts
  FactorDGP dgp;
  std::vector<int> t0_grid;  // pre-period lengths, each >= 2
  int t1 = 1;                // post periods per replication
  int reps = 5000;
  std::vector<EstimatorKind> estimators;
  std::uint64_t base_seed = 0;
  bool include_asymptotic_row = false;
  bool average_post = false;  // average effects over post periods instead of
                              // reading the first one

  void validate() const;  // throws Error(invalid_input)
};

/*
 * One summary row: an (estimator, pre-period length) cell. Quantities that
 * do not apply hold NaN: weight-allocation shares for methods without
 * weights, dispersion with fewer than two replications. `asymptotic` rows
 * carry analytic limit values and zero reps. A cell whose computation
 * failed keeps its numbers NaN and stores the first error message.
 */
struct McCell {
  std::string panel_label;
  int t0 = 0;               // meaningless when asymptotic
  bool asymptotic = false;
  std::string estimator;
  double mu_hat1 = 0.0;     // mean weight share on same-group controls
  double theta_hat1 = 0.0;  // same for random-walk groups (1 when R = 0)
  double bias = 0.0;        // mean first-post effect minus the true effect
  double se = 0.0;          // sample standard deviation across reps
  double mc_error = 0.0;    // se / sqrt(reps)
  double fe_hat = 0.0;      // mean weight share on same-fixed-effect controls
  int reps = 0;
  std::uint64_t seed = 0;
  std::string error;        // empty = ok
};

struct McSummary {
  McConfig config;
  std::vector<McCell> cells;
};

// Runs the sweep on `workers` threads. Replications write to disjoint
// preallocated slots and aggregation runs in a fixed order afterwards, so
// the result is bit-identical for any worker count. Per-cell failures are
// recorded and the sweep continues.
McSummary run_mc(const McConfig& config, int workers = 1);

// Weight-allocation shares of a single weight vector under the model's
// group structure: share on controls in the treated unit's stationary
// group, on controls in its random-walk group (1 when R = 0), and on
// controls whose fixed effect equals the treated unit's.
struct Misallocation {
  double mu_mass = 0.0;
  double theta_mass = 0.0;
  double fe_mass = 0.0;
};
Misallocation misallocation(const Eigen::VectorXd& weights,
                            const FactorDGP& dgp);

// Same-group share by pre-period length for each estimator, with a
// monotonicity diagnostic; demonstrates that short histories allocate less
// weight to the treated unit's own group than the limit does. Requires at
// least two grid entries.
struct TrendSeries {
  std::string estimator;
  std::vector<int> t0;          // finite grid, in config order
  std::vector<double> mu_hat1;  // aligned with t0
  bool has_limit = false;
  double limit_mu_hat1 = 0.0;
  bool nondecreasing = false;   // raw ordering, limit row included
};
std::vector<TrendSeries> finite_t_comparison(const McConfig& config,
                                             int workers = 1);

// CSV artifact with header
//   panel,t0,estimator,mu_hat1,theta_hat1,bias,se,mc_error,reps,seed
// where t0 is `inf` on analytic rows, NaN fields print empty,
// theta_hat1 prints empty when the model has no random-walk factors, and
// infinities print as `inf`.
std::string mc_summary_csv(const McSummary& summary);

}  // namespace syncon
