#include "syncon/estimators.hpp"

#include "syncon/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace syncon {

namespace {

void check_weight_size(const Panel& panel, const Eigen::VectorXd& weights,
                       const char* who) {
  if (weights.size() != panel.controls())
    throw_invalid(std::string(who) + ": weight vector has " +
                  std::to_string(weights.size()) + " entries for " +
                  std::to_string(panel.controls()) + " controls");
}

}  // namespace

std::string estimator_name(const EstimatorKind& kind) {
  switch (kind.tag) {
    case EstimatorTag::sc:
      return "sc";
    case EstimatorTag::sc_demeaned:
      return "sc_demeaned";
    case EstimatorTag::did:
      return "did";
    case EstimatorTag::sc_infeasible:
      return "sc_infeasible";
    case EstimatorTag::sc_mean_predictor:
      return "sc_mean_predictor";
    case EstimatorTag::sc_iv:
      return "sc_iv";
    case EstimatorTag::ife:
      return "ife:" + std::to_string(kind.num_factors);
    case EstimatorTag::custom:
      return "custom";
  }
  return "custom";
}

EstimatorKind parse_estimator(const std::string& name) {
  EstimatorKind kind;
  if (name == "sc") {
    kind.tag = EstimatorTag::sc;
  } else if (name == "sc_demeaned") {
    kind.tag = EstimatorTag::sc_demeaned;
    kind.constraints.intercept = true;
  } else if (name == "did") {
    kind.tag = EstimatorTag::did;
  } else if (name == "sc_infeasible") {
    kind.tag = EstimatorTag::sc_infeasible;
  } else if (name == "sc_mean_predictor") {
    kind.tag = EstimatorTag::sc_mean_predictor;
  } else if (name == "sc_iv") {
    kind.tag = EstimatorTag::sc_iv;
  } else if (name.rfind("ife:", 0) == 0) {
    kind.tag = EstimatorTag::ife;
    try {
      size_t used = 0;
      kind.num_factors = std::stoi(name.substr(4), &used);
      if (used != name.size() - 4) throw std::invalid_argument(name);
    } catch (const std::exception&) {
      throw_invalid("estimator '" + name + "': expected ife:<count>");
    }
    if (kind.num_factors < 1)
      throw_invalid("estimator '" + name + "': factor count must be positive");
  } else if (name == "ife") {
    throw_invalid("estimator 'ife' needs a factor count: write ife:<count>");
  } else {
    throw_invalid("unknown estimator '" + name + "'");
  }
  return kind;
}

EstimateReport estimate_with_weights(const Panel& panel,
                                     const Eigen::VectorXd& weights,
                                     bool intercept) {
  panel.validate();
  check_weight_size(panel, weights, "estimate");
  const int T = panel.periods();
  const int t0 = panel.t0;

  const Eigen::VectorXd synthetic =
      panel.control_matrix().transpose() * weights;
  Eigen::VectorXd residual = panel.treated() - synthetic;
  double level = 0.0;
  if (intercept) {
    level = residual.head(t0).mean();
    residual.array() -= level;
  }

  EstimateReport report;
  report.kind.tag = EstimatorTag::custom;
  report.kind.constraints.intercept = intercept;
  report.weights = weights;
  report.intercept = level;
  report.pre_rmspe = std::sqrt(residual.head(t0).squaredNorm() / t0);
  report.effects.effects = residual.tail(T - t0);
  report.effects.period_labels.assign(panel.period_labels.begin() + t0,
                                      panel.period_labels.end());
  return report;
}

EstimateReport estimate(const Panel& panel, const EstimatorKind& kind) {
  switch (kind.tag) {
    case EstimatorTag::sc:
    case EstimatorTag::sc_demeaned:
    case EstimatorTag::custom: {
      ConstraintSet constraints = kind.constraints;
      if (kind.tag == EstimatorTag::sc)
        constraints = ConstraintSet{true, true, false};
      else if (kind.tag == EstimatorTag::sc_demeaned)
        constraints = ConstraintSet{true, true, true};
      QpSolution sol = fit_weights(panel, constraints);
      EstimateReport report =
          estimate_with_weights(panel, sol.weights, constraints.intercept);
      report.kind = kind;
      report.diagnostics = sol.diagnostics;
      report.diagnostics["fit_objective"] = sol.objective;
      report.diagnostics["nonunique"] = sol.nonunique ? 1.0 : 0.0;
      return report;
    }
    case EstimatorTag::did: {
      const int J = panel.controls();
      const Eigen::VectorXd uniform =
          Eigen::VectorXd::Constant(J, 1.0 / J);
      EstimateReport report = estimate_with_weights(panel, uniform, true);
      report.kind = kind;
      return report;
    }
    case EstimatorTag::sc_mean_predictor: {
      QpSolution sol = mean_predictor_weights(panel);
      EstimateReport report = estimate_with_weights(panel, sol.weights, false);
      report.kind = kind;
      report.diagnostics = sol.diagnostics;
      report.diagnostics["fit_objective"] = sol.objective;
      return report;
    }
    case EstimatorTag::sc_iv: {
      QpSolution sol = iv_sc_weights(panel);
      EstimateReport report = estimate_with_weights(panel, sol.weights, false);
      report.kind = kind;
      report.diagnostics = sol.diagnostics;
      report.diagnostics["fit_objective"] = sol.objective;
      return report;
    }
    case EstimatorTag::ife:
      return ife_estimate(panel, kind.num_factors);
    case EstimatorTag::sc_infeasible:
      throw_invalid(
          "sc_infeasible weights come from the generating model; compute "
          "them with infeasible_weights and apply estimate_with_weights");
  }
  throw_invalid("unknown estimator kind");
}

Eigen::VectorXd exact_loading_weights(const Eigen::MatrixXd& mu,
                                      const Eigen::VectorXd& mu0) {
  const int J = static_cast<int>(mu.rows());
  const int F = static_cast<int>(mu.cols());
  if (J < 1) throw_invalid("exact-loading weights need at least one control");
  if (mu0.size() != F)
    throw_invalid("treated loadings have " + std::to_string(mu0.size()) +
                  " entries for " + std::to_string(F) + " factors");

  GeneralQp qp;
  qp.gram = Eigen::MatrixXd::Identity(J, J);
  qp.linear = Eigen::VectorXd::Zero(J);
  qp.eq.resize(F + 1, J);
  qp.eq.row(0).setOnes();
  qp.eq.bottomRows(F) = mu.transpose();
  qp.eq_rhs.resize(F + 1);
  qp.eq_rhs[0] = 1.0;
  qp.eq_rhs.tail(F) = mu0;
  qp.nonneg = true;
  try {
    return solve_general(qp).weights;
  } catch (const Error& error) {
    if (error.code() == ErrorCode::invalid_input)
      throw_invalid("no exact-loading weights exist");
    throw;
  }
}

Eigen::VectorXd infeasible_weights(const FactorDGP& dgp) {
  const LoadingMatrix lm = loading_matrix(dgp);
  const int F = static_cast<int>(lm.mu0.size());
  const int R = static_cast<int>(lm.theta0.size());
  Eigen::MatrixXd loadings(dgp.J, F + R);
  loadings.leftCols(F) = lm.mu;
  loadings.rightCols(R) = lm.theta;
  Eigen::VectorXd target(F + R);
  target.head(F) = lm.mu0;
  target.tail(R) = lm.theta0;
  return exact_loading_weights(loadings, target);
}

QpSolution mean_predictor_weights(const Panel& panel) {
  panel.validate();
  const double treated_mean = panel.treated().head(panel.t0).mean();
  const Eigen::VectorXd control_means =
      panel.control_matrix().leftCols(panel.t0).rowwise().mean();

  QpProblem problem;
  problem.gram = control_means * control_means.transpose();
  problem.linear = treated_mean * control_means;
  problem.constant = treated_mean * treated_mean;
  problem.constraints = ConstraintSet{true, true, false};
  QpSolution sol = solve_qp(problem);

  const double scale = std::max(1.0, treated_mean * treated_mean);
  sol.diagnostics["underdetermined"] =
      (sol.objective <= 1e-14 * scale && sol.nonunique) ? 1.0 : 0.0;
  return sol;
}

QpSolution iv_sc_weights(const Panel& panel) {
  panel.validate();
  const int J = panel.controls();
  const int t0 = panel.t0;
  if (t0 < J + 2)
    throw_invalid("iv fit needs t0 >= J + 2 pre-treatment periods (got t0=" +
                  std::to_string(t0) + ", J=" + std::to_string(J) + ")");

  const Eigen::MatrixXd Y = panel.control_matrix();
  const Eigen::VectorXd y0 = panel.treated();
  const int n = t0 - 1;

  // Sum-to-one is built into the parameterization: the last control's
  // weight is one minus the others, which turns the moment into a system
  // in outcomes differenced against that control.
  Eigen::VectorXd m = Eigen::VectorXd::Zero(J);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(J, J - 1);
  for (int t = 1; t < t0; ++t) {
    const Eigen::VectorXd z = Y.col(t - 1);
    const double base = Y(J - 1, t);
    m += z * (y0[t] - base);
    M += z * (Y.col(t).head(J - 1).array() - base).matrix().transpose();
  }
  m /= n;
  M /= n;

  // Step 1: identity weighting, minimal-norm least squares.
  const Eigen::VectorXd v1 =
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(M).solve(m);

  // Step 2: weight by the inverse estimated moment covariance.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(J, J);
  for (int t = 1; t < t0; ++t) {
    const Eigen::VectorXd z = Y.col(t - 1);
    const double base = Y(J - 1, t);
    const double resid =
        (y0[t] - base) -
        (Y.col(t).head(J - 1).array() - base).matrix().dot(v1);
    S += resid * resid * z * z.transpose();
  }
  S /= n;
  S.diagonal().array() += 1e-8;
  Eigen::LLT<Eigen::MatrixXd> chol(S);
  if (chol.info() != Eigen::Success)
    throw_numeric("iv fit: moment covariance is singular beyond the ridge");
  const Eigen::MatrixXd W = chol.solve(Eigen::MatrixXd::Identity(J, J));

  const Eigen::MatrixXd A = M.transpose() * W * M;
  const Eigen::VectorXd b = M.transpose() * W * m;

  // Directions whose criterion curvature is below 2% of the dominant one
  // are within the moment Jacobian's estimation noise: solving them anyway
  // lets the minimizer wander arbitrarily inside a near-flat valley. Leave
  // their coefficients at zero (the minimal-norm convention in this
  // parameterization) and report the criterion as flat.
  constexpr double kFlatCurvature = 0.02;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(J - 1);
  double kkt = 0.0;
  double lmin = 0.0;
  bool truncated = false;
  if (J >= 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    lmin = eig.eigenvalues()[0];
    const double lmax = eig.eigenvalues()[J - 2];
    const double cut = kFlatCurvature * std::max(lmax, 0.0);
    for (int i = 0; i < J - 1; ++i) {
      const double h = eig.eigenvalues()[i];
      const Eigen::VectorXd u = eig.eigenvectors().col(i);
      if (h > cut && h > 0.0) {
        v += u * (u.dot(b) / h);
      } else {
        truncated = true;
      }
    }
    // Stationarity over the resolved subspace only.
    const Eigen::VectorXd r = A * v - b;
    for (int i = 0; i < J - 1; ++i)
      if (eig.eigenvalues()[i] > cut && eig.eigenvalues()[i] > 0.0)
        kkt += std::pow(eig.eigenvectors().col(i).dot(r), 2);
    kkt = std::sqrt(kkt);
  }

  const Eigen::VectorXd g = m - M * v;
  const double criterion = g.dot(W * g);

  QpSolution sol;
  sol.weights.resize(J);
  sol.weights.head(J - 1) = v;
  sol.weights[J - 1] = 1.0 - v.sum();
  sol.objective = criterion;
  sol.iterations = 2;
  sol.kkt_residual = kkt;
  sol.diagnostics["j_stat"] = n * criterion;

  // Flatness of the criterion around the optimum: the 1%-sub-level set is
  // an ellipsoid whose longest axis is governed by the smallest Hessian
  // eigenvalue; a singular or truncated Hessian makes it unbounded.
  const bool flat =
      truncated || 2.0 * std::sqrt(0.01 * std::max(criterion, 0.0) /
                                   std::max(lmin, 1e-300)) > 0.1;
  sol.nonunique = truncated;
  sol.diagnostics["flat_criterion"] = flat ? 1.0 : 0.0;
  return sol;
}

double iv_criterion(const Panel& panel, const Eigen::VectorXd& weights) {
  panel.validate();
  check_weight_size(panel, weights, "iv criterion");
  const Eigen::MatrixXd Y = panel.control_matrix();
  const Eigen::VectorXd y0 = panel.treated();
  const int n = panel.t0 - 1;
  if (n < 1) throw_invalid("iv criterion needs at least 2 pre periods");

  Eigen::VectorXd g = Eigen::VectorXd::Zero(panel.controls());
  for (int t = 1; t < panel.t0; ++t)
    g += Y.col(t - 1) * (y0[t] - Y.col(t).dot(weights));
  g /= n;
  return g.squaredNorm();
}

EstimateReport ife_estimate(const Panel& panel, int num_factors) {
  panel.validate();
  const int J = panel.controls();
  const int T = panel.periods();
  const int t0 = panel.t0;
  if (num_factors < 1) throw_invalid("ife: factor count must be positive");
  if (num_factors > std::min(J, T) - 1)
    throw_invalid("ife: factor count must be at most min(J, T) - 1 = " +
                  std::to_string(std::min(J, T) - 1));
  if (t0 < num_factors + 1)
    throw_invalid(
        "ife: the loading regression needs at least num_factors + 1 pre "
        "periods (got t0=" +
        std::to_string(t0) + ")");

  // Factor directions come from the controls alone. Controls are never
  // treated, so their whole window is legitimate factor evidence.
  const Eigen::MatrixXd controls = panel.control_matrix();
  const Eigen::VectorXd control_means = controls.rowwise().mean();
  const Eigen::MatrixXd centered = controls.colwise() - control_means;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      (centered * centered.transpose()) / T);
  if (eig.info() != Eigen::Success)
    throw_numeric("ife: eigendecomposition of the control covariance failed");

  Eigen::MatrixXd dirs(J, num_factors);
  Eigen::VectorXd top(num_factors);
  for (int r = 0; r < num_factors; ++r) {
    dirs.col(r) = eig.eigenvectors().col(J - 1 - r);  // descending order
    top[r] = eig.eigenvalues()[J - 1 - r];
  }
  if (top[num_factors - 1] <= 1e-12 * std::max(top[0], 1.0))
    throw_numeric(
        "ife: the control covariance has fewer than num_factors directions "
        "of variation");

  // Idiosyncratic variance from the eigenvalue floor: uncorrelated unit
  // noise of common variance shifts every covariance eigenvalue by that
  // variance while leaving the leading directions on the factor space, so
  // the discarded eigenvalues estimate the noise level. num_factors is
  // capped below J, so at least one floor eigenvalue always exists.
  double noise_floor = 0.0;
  for (int i = 0; i < J - num_factors; ++i) noise_floor += eig.eigenvalues()[i];
  noise_floor = std::max(noise_floor / (J - num_factors), 0.0);

  // Factor values for every period, each normalized to unit second moment
  // over the window.
  const Eigen::VectorXd scale = top.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd factors =
      scale.asDiagonal() * (dirs.transpose() * centered);

  // Regress the treated unit's pre-period outcomes on the pre-period factor
  // values plus an intercept. The factor values carry the controls' noise,
  // so the plain normal equations would attenuate the loadings by a factor
  // that does not vanish with t0; subtracting the estimated noise
  // contribution from the regressor Gram removes that attenuation whenever
  // the common-variance model behind the floor holds.
  const Eigen::VectorXd y0 = panel.treated();
  const Eigen::MatrixXd fpre = factors.leftCols(t0);
  const Eigen::VectorXd fbar = fpre.rowwise().mean();
  const double ybar = y0.head(t0).mean();
  const Eigen::MatrixXd fdev = fpre.colwise() - fbar;
  Eigen::MatrixXd gram = (fdev * fdev.transpose()) / t0;
  const Eigen::VectorXd cross =
      fdev * (y0.head(t0).array() - ybar).matrix() / t0;
  gram.diagonal() -= noise_floor * scale.cwiseAbs2();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible())
    throw_numeric("ife: the pre-period factor regression is rank deficient");
  const Eigen::VectorXd loadings = lu.solve(cross);
  const double level = ybar - loadings.dot(fbar);

  Eigen::VectorXd residual =
      y0 - (factors.transpose() * loadings).eval() -
      Eigen::VectorXd::Constant(T, level);

  EstimateReport report;
  report.kind.tag = EstimatorTag::ife;
  report.kind.num_factors = num_factors;
  report.intercept = level;
  report.pre_rmspe = std::sqrt(residual.head(t0).squaredNorm() / t0);
  report.effects.effects = residual.tail(T - t0);
  report.effects.period_labels.assign(panel.period_labels.begin() + t0,
                                      panel.period_labels.end());
  report.diagnostics["noise_floor"] = noise_floor;
  return report;
}

}  // namespace syncon
