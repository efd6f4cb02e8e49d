// Large-sample limit objects for the weight estimators: the limiting weight
// problem, its closed-form misallocation in grouped designs, the asymptotic
// variance evaluator, and linear-projection coefficients.
#pragma once

#include "syncon/qp.hpp"

#include <Eigen/Dense>

namespace syncon {

// Population description of the factor structure the estimators face as the
// number of pre-treatment periods grows. F stationary factors; optional
// nonstationary directions (theta) that dominate the fit criterion and must
// be matched exactly for the objective to stay bounded.
struct LimitSpec {
  Eigen::VectorXd mu0;        // treated loadings, length F
  Eigen::MatrixXd mu;         // control loadings, J x F
  Eigen::VectorXd omega0;     // pre-period factor mean, length F
  Eigen::MatrixXd Omega0;     // pre-period factor second moment, F x F
  double sigma2 = 0.0;        // idiosyncratic shock variance
  Eigen::VectorXd post_mean;  // post-period conditional factor mean, length F

  // Optional nonstationary structure. Empty in the stationary model.
  Eigen::VectorXd theta0;     // treated loadings on nonstationary factors, R
  Eigen::MatrixXd theta;      // control loadings, J x R

  int controls() const { return static_cast<int>(mu.rows()); }
  int factors() const { return static_cast<int>(mu.cols()); }
  // Throws Error(invalid_input) on dimension mismatches, sigma2 < 0, or a
  // second-moment matrix that is not PSD (slack 1e-10), including the
  // implied variance Omega0 - omega0 omega0'.
  void validate() const;
};

// Weights selected in the limit plus the objects the tables report: the
// loadings the weighted controls reproduce, the first-post-period bias under
// the given post-treatment factor mean, and the asymptotic variance under
// the demeaned metric (which applies to every estimator considered here).
struct LimitResult {
  Eigen::VectorXd weights;
  Eigen::VectorXd reconstructed_loadings;  // mu' w
  double intercept = 0.0;                  // omega0' (mu0 - mu' w) when enabled
  double asymptotic_bias = 0.0;
  double asymptotic_variance = 0.0;        // +inf if nonstationary mismatch
  double objective = 0.0;
  bool in_phi = false;   // loading mismatch below 1e-8 in every direction
  bool nonunique = false;
};

// Solves the limiting weight problem under the given constraint set. With an
// intercept the factor second moment is recentered, which reproduces the
// demeaned fit criterion. When nonstationary loadings are present they are
// matched lexicographically first: among weights minimizing the
// nonstationary mismatch, the stationary objective is minimized.
LimitResult limit_weights(const LimitSpec& spec, const ConstraintSet& constraints);

// Evaluates a fixed weight vector under the limit: reconstructed loadings,
// bias (centered at omega0 when `centered`, matching estimators that remove
// pre-period means), and the demeaned-metric variance. Used for weights that
// are not chosen by the fit criterion, e.g. uniform weights.
LimitResult evaluate_limit(const LimitSpec& spec, const Eigen::VectorXd& weights,
                           bool centered);

// Asymptotic variance of the effect estimate at the given weights:
//   sigma2 (1 + w'w) + (mu0 - mu'w)' (Omega0 - omega0 omega0') (mu0 - mu'w).
// Returns +inf when nonstationary loadings are present and mismatched.
double gamma_variance(const LimitSpec& spec, const Eigen::VectorXd& weights);

// Closed-form limiting misallocated weight mass in a grouped design with two
// equal groups of J/2 controls: sigma2 / (2 sigma2 + J). J must be even.
double gamma_two_groups(double sigma2, int J);

// Same quantity with J/2 groups of two controls:
//   ((J - 2) / J) * sigma2 / (sigma2 + 2). J must be even and >= 4.
double gamma_many_groups(double sigma2, int J);

// Numerical cross-check: builds the grouped-design LimitSpec for arbitrary
// K dividing J, solves the limiting weight problem, and returns the weight
// mass placed outside the treated unit's group.
double gamma_consistency_check(double sigma2, int J, int K);

// Coefficients of the linear projection of the treated unit's untreated
// outcome on the control outcomes under factor covariance var_lambda:
//   delta = (mu V mu')^+ mu V mu0   (minimal-norm solution),
//   delta1 = post_mean' (mu0 - mu' delta).
// Throws Error(numeric_failure) naming the rank when the normal equations
// are numerically inconsistent.
struct LinearProjection {
  Eigen::VectorXd delta;
  double delta1 = 0.0;
};
LinearProjection linear_projection(const LimitSpec& spec,
                                   const Eigen::MatrixXd& var_lambda);

}  // namespace syncon
