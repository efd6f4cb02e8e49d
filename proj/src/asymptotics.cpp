#include "syncon/asymptotics.hpp"

#include "syncon/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace syncon {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPhiTol = 1e-8;
constexpr double kPsdSlack = 1e-10;

void require_psd(const MatrixXd& M, const char* what) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()));
  double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -kPsdSlack * scale)
    throw_invalid(std::string(what) + " is not positive semidefinite");
}

// Recentered second moment used by estimators that remove pre-period means.
MatrixXd centered_moment(const LimitSpec& spec) {
  return spec.Omega0 - spec.omega0 * spec.omega0.transpose();
}

bool has_nonstationary(const LimitSpec& spec) { return spec.theta.cols() > 0; }

double nonstationary_mismatch(const LimitSpec& spec, const VectorXd& w) {
  if (!has_nonstationary(spec)) return 0.0;
  return (spec.theta0 - spec.theta.transpose() * w).norm();
}

}  // namespace

void LimitSpec::validate() const {
  const int J = controls();
  const int F = factors();
  if (F == 0 || J == 0) throw_invalid("limit spec needs at least one control and one factor");
  if (mu0.size() != F) throw_invalid("mu0 length does not match factor count");
  if (omega0.size() != F) throw_invalid("omega0 length does not match factor count");
  if (Omega0.rows() != F || Omega0.cols() != F)
    throw_invalid("Omega0 must be F x F");
  if (post_mean.size() != F) throw_invalid("post_mean length does not match factor count");
  if (sigma2 < 0.0) throw_invalid("sigma2 must be nonnegative");
  if (theta.cols() > 0) {
    if (theta.rows() != J) throw_invalid("theta row count does not match control count");
    if (theta0.size() != theta.cols())
      throw_invalid("theta0 length does not match nonstationary factor count");
  } else if (theta0.size() != 0) {
    throw_invalid("theta0 given without theta");
  }
  require_psd(Omega0, "Omega0");
  require_psd(Omega0 - omega0 * omega0.transpose(), "Omega0 - omega0 omega0'");
}

double gamma_variance(const LimitSpec& spec, const Eigen::VectorXd& weights) {
  if (weights.size() != spec.controls())
    throw_invalid("weights length does not match control count");
  if (nonstationary_mismatch(spec, weights) > kPhiTol)
    return std::numeric_limits<double>::infinity();
  VectorXd mismatch = spec.mu0 - spec.mu.transpose() * weights;
  return spec.sigma2 * (1.0 + weights.squaredNorm()) +
         mismatch.dot(centered_moment(spec) * mismatch);
}

LimitResult evaluate_limit(const LimitSpec& spec, const Eigen::VectorXd& weights,
                           bool centered) {
  spec.validate();
  if (weights.size() != spec.controls())
    throw_invalid("weights length does not match control count");
  LimitResult res;
  res.weights = weights;
  res.reconstructed_loadings = spec.mu.transpose() * weights;
  VectorXd mismatch = spec.mu0 - res.reconstructed_loadings;
  double theta_miss = nonstationary_mismatch(spec, weights);
  res.in_phi = mismatch.cwiseAbs().maxCoeff() <= kPhiTol && theta_miss <= kPhiTol;
  if (centered) res.intercept = spec.omega0.dot(mismatch);
  VectorXd bias_mean = centered ? VectorXd(spec.post_mean - spec.omega0)
                                : spec.post_mean;
  // The nonstationary factors are mean zero, so a mismatch there leaves the
  // bias finite but makes the variance grow without bound.
  res.asymptotic_bias = bias_mean.dot(mismatch);
  res.asymptotic_variance = gamma_variance(spec, weights);
  if (theta_miss > kPhiTol) {
    res.objective = std::numeric_limits<double>::infinity();
  } else {
    const MatrixXd fit_moment = centered ? centered_moment(spec) : spec.Omega0;
    res.objective = spec.sigma2 * (1.0 + weights.squaredNorm()) +
                    mismatch.dot(fit_moment * mismatch);
  }
  return res;
}

LimitResult limit_weights(const LimitSpec& spec, const ConstraintSet& constraints) {
  spec.validate();
  const int J = spec.controls();

  QpSolution sol;
  if (!has_nonstationary(spec)) {
    QpProblem problem;
    problem.gram = spec.sigma2 * MatrixXd::Identity(J, J) +
                   spec.mu * spec.Omega0 * spec.mu.transpose();
    problem.linear = spec.mu * spec.Omega0 * spec.mu0;
    problem.constant = spec.sigma2 + spec.mu0.dot(spec.Omega0 * spec.mu0);
    problem.constraints = constraints;
    problem.mean_controls = spec.mu * spec.omega0;
    problem.mean_treated = spec.mu0.dot(spec.omega0);
    sol = solve_qp(problem);
  } else {
    // Lexicographic solve. First minimize the nonstationary mismatch, whose
    // scale dominates the criterion; then minimize the stationary objective
    // over the face of mismatch minimizers. The face is characterized by
    // fixing the first objective's curvature image and gradient value.
    MatrixXd Gn = spec.theta * spec.theta.transpose();
    VectorXd ln = spec.theta * spec.theta0;
    GeneralQp phase1;
    phase1.gram = Gn;
    phase1.linear = ln;
    phase1.nonneg = constraints.nonneg;
    if (constraints.sum_to_one) {
      phase1.eq = MatrixXd::Ones(1, J);
      phase1.eq_rhs = VectorXd::Ones(1);
    } else {
      phase1.eq = MatrixXd(0, J);
      phase1.eq_rhs = VectorXd(0);
    }
    QpSolution s1 = solve_general(phase1);
    VectorXd g1 = 2.0 * (Gn * s1.weights - ln);

    MatrixXd Omega = constraints.intercept ? centered_moment(spec) : spec.Omega0;
    GeneralQp phase2;
    phase2.gram = spec.sigma2 * MatrixXd::Identity(J, J) +
                  spec.mu * Omega * spec.mu.transpose();
    phase2.linear = spec.mu * Omega * spec.mu0;
    phase2.nonneg = constraints.nonneg;
    const int extra = static_cast<int>(phase1.eq.rows());
    phase2.eq = MatrixXd(extra + J + 1, J);
    phase2.eq_rhs = VectorXd(extra + J + 1);
    if (extra > 0) {
      phase2.eq.topRows(extra) = phase1.eq;
      phase2.eq_rhs.head(extra) = phase1.eq_rhs;
    }
    phase2.eq.middleRows(extra, J) = Gn;
    phase2.eq_rhs.segment(extra, J) = Gn * s1.weights;
    phase2.eq.row(extra + J) = g1.transpose();
    phase2.eq_rhs[extra + J] = g1.dot(s1.weights);
    sol = solve_general(phase2);
    sol.nonunique = sol.nonunique || s1.nonunique;
    if (constraints.intercept) {
      VectorXd m = spec.mu * spec.omega0;
      sol.intercept = spec.mu0.dot(spec.omega0) - m.dot(sol.weights);
    }
  }

  LimitResult res = evaluate_limit(spec, sol.weights, constraints.intercept);
  res.nonunique = sol.nonunique;
  res.intercept = constraints.intercept ? sol.intercept : 0.0;
  return res;
}

double gamma_two_groups(double sigma2, int J) {
  if (sigma2 < 0.0) throw_invalid("sigma2 must be nonnegative");
  if (J < 2 || J % 2 != 0) throw_invalid("J must be even and at least 2");
  return sigma2 / (2.0 * sigma2 + J);
}

double gamma_many_groups(double sigma2, int J) {
  if (sigma2 < 0.0) throw_invalid("sigma2 must be nonnegative");
  if (J < 4 || J % 2 != 0) throw_invalid("J must be even and at least 4");
  return (static_cast<double>(J - 2) / J) * sigma2 / (sigma2 + 2.0);
}

double gamma_consistency_check(double sigma2, int J, int K) {
  if (K < 1 || J < 1 || J % K != 0)
    throw_invalid("J must be divisible by K");
  const int per_group = J / K;
  LimitSpec spec;
  spec.mu0 = VectorXd::Zero(K);
  spec.mu0[0] = 1.0;
  spec.mu = MatrixXd::Zero(J, K);
  for (int j = 0; j < J; ++j) spec.mu(j, j / per_group) = 1.0;
  spec.omega0 = VectorXd::Zero(K);
  spec.Omega0 = MatrixXd::Identity(K, K);
  spec.sigma2 = sigma2;
  spec.post_mean = VectorXd::Zero(K);

  ConstraintSet simplex;  // nonneg + sum_to_one, no intercept
  LimitResult res = limit_weights(spec, simplex);
  double same_group = res.weights.head(per_group).sum();
  return 1.0 - same_group;
}

LinearProjection linear_projection(const LimitSpec& spec,
                                   const Eigen::MatrixXd& var_lambda) {
  spec.validate();
  const int F = spec.factors();
  if (var_lambda.rows() != F || var_lambda.cols() != F)
    throw_invalid("var_lambda must be F x F");
  require_psd(var_lambda, "var_lambda");

  MatrixXd gram = spec.mu * var_lambda * spec.mu.transpose();
  VectorXd rhs = spec.mu * var_lambda * spec.mu0;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(gram);
  cod.setThreshold(1e-12);
  VectorXd delta = cod.solve(rhs);
  double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if ((gram * delta - rhs).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw_numeric("projection normal equations are inconsistent (rank " +
                  std::to_string(cod.rank()) + " of " +
                  std::to_string(spec.controls()) + ")");

  LinearProjection proj;
  proj.delta = delta;
  proj.delta1 = spec.post_mean.dot(spec.mu0 - spec.mu.transpose() * delta);
  return proj;
}

}  // namespace syncon
