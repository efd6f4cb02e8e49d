#include "syncon/qp.hpp"

#include "syncon/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace syncon {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kFeasTol = 1e-10;
constexpr double kKktTol = 1e-10;
constexpr double kActiveTol = 1e-11;
constexpr double kPsdSlack = 1e-8;

// Gradient of Q(x) = x'Gx - 2l'x.
VectorXd gradient(const MatrixXd& G, const VectorXd& l, const VectorXd& x) {
  return 2.0 * (G * x - l);
}

double objective_value(const MatrixXd& G, const VectorXd& l, const VectorXd& x) {
  return x.dot(G * x) - 2.0 * l.dot(x);
}

// Euclidean projection onto { x : sum x = 1, x >= 0 }.
VectorXd project_simplex(VectorXd v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    cum += u[i];
    double t = (cum - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  for (int i = 0; i < n; ++i) v[i] = std::max(0.0, v[i] - theta);
  return v;
}

// Projection onto { x : Ax = b } (min-norm correction).
VectorXd project_affine(const MatrixXd& A, const VectorXd& b, const VectorXd& x) {
  if (A.rows() == 0) return x;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
  return x - cod.solve(A * x - b);
}

struct ActiveSetResult {
  VectorXd x;
  VectorXd nu;          // equality multipliers at the final working set
  int pivots = 0;
  bool fallback_used = false;
};

enum class EqpKind { point, ray };
enum class PassStatus { converged, exhausted, unbounded };

struct EqpStep {
  EqpKind kind = EqpKind::point;
  VectorXd target;  // absolute minimizer when kind == point
  VectorXd ray;     // feasible direction of infinite descent when kind == ray
  VectorXd nu;      // equality multipliers (g = A'nu convention)
};

// Equality-constrained subproblem on the non-working coordinates. A singular
// reduced Hessian can make the KKT system inconsistent, which means the
// subproblem has no finite minimum; the step then carries a direction of
// infinite descent instead of a target point.
EqpStep solve_eqp(const MatrixXd& G, const VectorXd& l, const MatrixXd& A,
                  const VectorXd& b, const std::vector<bool>& working) {
  const int n = static_cast<int>(l.size());
  const int m = static_cast<int>(A.rows());
  EqpStep out;
  out.target = VectorXd::Zero(n);
  out.nu = VectorXd::Zero(m);
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (!working[i]) free.push_back(i);
  const int f = static_cast<int>(free.size());
  if (f == 0) {
    if (m > 0) {
      // No free variables: multipliers from a least-squares fit to the
      // full gradient, only used for the drop test.
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A.transpose());
      out.nu = cod.solve(gradient(G, l, out.target));
    }
    return out;
  }
  MatrixXd K = MatrixXd::Zero(f + m, f + m);
  VectorXd rhs(f + m);
  for (int r = 0; r < f; ++r) {
    for (int c = 0; c < f; ++c) K(r, c) = 2.0 * G(free[r], free[c]);
    rhs[r] = 2.0 * l[free[r]];
  }
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < f; ++c) {
      K(f + r, c) = A(r, free[c]);
      K(c, f + r) = A(r, free[c]);
    }
    rhs[f + r] = b[r];
  }
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(K);
  VectorXd sol = cod.solve(rhs);
  const double scale = 1.0 + rhs.cwiseAbs().maxCoeff() +
                       K.cwiseAbs().maxCoeff() * sol.cwiseAbs().maxCoeff();
  auto accept_point = [&]() {
    for (int i = 0; i < f; ++i) out.target[free[i]] = sol[i];
    // The block system determines nu with g = -A'nu on the free coordinates;
    // negate so every caller can form bound multipliers as g - A'nu.
    if (m > 0) out.nu = -sol.tail(m);
  };
  if ((K * sol - rhs).cwiseAbs().maxCoeff() <= 1e-8 * scale) {
    accept_point();
    return out;
  }
  // Inconsistent KKT system. Because iterates stay feasible, inconsistency
  // can only come from a direction d with A_f d = 0, G_ff d = 0 and
  // l_f'd != 0; the objective then falls linearly along +-d. Descend along
  // the kernel component of l_f (the slope along +d is -2 l_f'd < 0).
  MatrixXd M(m + f, f);
  for (int c = 0; c < f; ++c) {
    for (int r = 0; r < m; ++r) M(r, c) = A(r, free[c]);
    for (int r = 0; r < f; ++r) M(m + r, c) = G(free[r], free[c]);
  }
  Eigen::FullPivLU<MatrixXd> lu(M);
  MatrixXd N = lu.kernel();
  VectorXd lf(f);
  for (int i = 0; i < f; ++i) lf[i] = l[free[i]];
  if (N.cols() == 0 || N.cwiseAbs().maxCoeff() <= 1e-12) {
    accept_point();  // numerically consistent after all
    return out;
  }
  Eigen::HouseholderQR<MatrixXd> qr(N);
  MatrixXd Q = qr.householderQ() *
               MatrixXd::Identity(f, static_cast<int>(N.cols()));
  VectorXd c = Q * (Q.transpose() * lf);
  if (c.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + lf.cwiseAbs().maxCoeff())) {
    accept_point();
    return out;
  }
  c /= c.cwiseAbs().maxCoeff();
  out.kind = EqpKind::ray;
  out.ray = VectorXd::Zero(n);
  for (int i = 0; i < f; ++i) out.ray[free[i]] = c[i];
  if (m > 0) out.nu = -sol.tail(m);
  return out;
}

// One primal active-set sweep from a feasible point. Mutates x and the
// working set in place; stops at a KKT point, an exhausted pivot budget, or
// proof that the objective is unbounded below over the feasible set.
PassStatus active_set_pass(const MatrixXd& G, const VectorXd& l,
                           const MatrixXd& A, const VectorXd& b, bool nonneg,
                           VectorXd& x, std::vector<bool>& working,
                           VectorXd& nu, int& pivots, int budget) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(A.rows());
  // Degenerate vertices can cycle the most-negative-multiplier drop rule.
  // After a run of pivots that fail to move the iterate, switch to the
  // lowest-eligible-index rule, which cannot revisit a working set.
  int stalled = 0;
  bool blands = false;
  const auto note_stall = [&] {
    if (++stalled > n + 10) blands = true;
  };
  // Trial-drop certification. When the equality rows are rank-deficient the
  // bound multipliers are not unique and their sign is unreliable, so a
  // negative multiplier is only a suggestion: if freeing the coordinate
  // yields no strict improvement and the step immediately re-pins it at
  // zero, the coordinate is certified unhelpful at this point and is not
  // retried until the iterate moves.
  std::vector<bool> taboo(n, false);
  std::vector<bool> freed(n, false);
  while (pivots <= budget) {
    EqpStep step = solve_eqp(G, l, A, b, working);
    nu = step.nu;
    const bool ray = (step.kind == EqpKind::ray);
    VectorXd p;
    if (ray) {
      p = step.ray;
    } else {
      p = step.target - x;
      if (p.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + x.cwiseAbs().maxCoeff())) {
        if (!nonneg) return PassStatus::converged;
        VectorXd g = gradient(G, l, x);
        // Multiplier for the drop test, from the free-coordinate
        // stationarity system at the current point. When the reduced
        // Hessian is singular the EQP block system has many valid
        // multipliers and its joint minimum-norm solution can misprice the
        // bounds, so the estimate is recomputed independently here.
        if (m > 0) {
          std::vector<int> free;
          for (int i = 0; i < n; ++i)
            if (!working[i]) free.push_back(i);
          if (!free.empty()) {
            MatrixXd Af(static_cast<Eigen::Index>(free.size()), m);
            VectorXd gf(static_cast<Eigen::Index>(free.size()));
            for (std::size_t r = 0; r < free.size(); ++r) {
              Af.row(static_cast<Eigen::Index>(r)) =
                  A.col(free[r]).transpose();
              gf[static_cast<Eigen::Index>(r)] = g[free[r]];
            }
            nu = Af.completeOrthogonalDecomposition().solve(gf);
          }
        }
        VectorXd lam = g;
        if (m > 0) lam -= A.transpose() * nu;
        int drop = -1;
        const double threshold = kKktTol * (1.0 + g.cwiseAbs().maxCoeff());
        if (blands) {
          for (int i = 0; i < n; ++i) {
            if (working[i] && !taboo[i] && lam[i] < -threshold) {
              drop = i;
              break;
            }
          }
        } else {
          double most_negative = -threshold;
          for (int i = 0; i < n; ++i) {
            if (working[i] && !taboo[i] && lam[i] < most_negative) {
              most_negative = lam[i];
              drop = i;
            }
          }
        }
        if (drop < 0) return PassStatus::converged;  // KKT satisfied
        freed[drop] = true;
        working[drop] = false;
        ++pivots;
        note_stall();  // a drop by itself never moves the iterate
        continue;
      }
    }
    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    int blocker = -1;
    if (nonneg) {
      for (int i = 0; i < n; ++i) {
        if (!working[i] && p[i] < -1e-14) {
          double a = x[i] / (-p[i]);
          if (a < alpha) {
            alpha = a;
            blocker = i;
          }
        }
      }
    }
    if (ray && blocker < 0) return PassStatus::unbounded;
    if (alpha * p.cwiseAbs().maxCoeff() >
        1e-14 * (1.0 + x.cwiseAbs().maxCoeff())) {
      stalled = 0;
      std::fill(taboo.begin(), taboo.end(), false);
      std::fill(freed.begin(), freed.end(), false);
    } else {
      note_stall();
      if (!ray && blocker >= 0 && freed[blocker]) {
        const double at_x = objective_value(G, l, x);
        const double at_target = objective_value(G, l, step.target);
        if (at_target >= at_x - 1e-12 * (1.0 + std::abs(at_x)))
          taboo[blocker] = true;
      }
    }
    x += alpha * p;
    if (nonneg)
      for (int i = 0; i < n; ++i)
        if (x[i] < 0.0) x[i] = 0.0;
    if (blocker >= 0) {
      working[blocker] = true;
      x[blocker] = 0.0;
      ++pivots;
    }
  }
  return PassStatus::exhausted;
}

// Primal active-set method for min x'Gx - 2l'x s.t. Ax = b, x >= 0 when
// `nonneg`. Requires a feasible start. A projected-gradient polish takes
// over if the pivot budget (10 n^2) is exhausted, followed by one fresh
// active-set pass from the polished point.
ActiveSetResult active_set(const MatrixXd& G, const VectorXd& l,
                           const MatrixXd& A, const VectorXd& b, bool nonneg,
                           VectorXd x) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(A.rows());
  const int max_pivots = 10 * n * n + 20;

  ActiveSetResult res;
  std::vector<bool> working(n, false);
  if (nonneg) {
    for (int i = 0; i < n; ++i) working[i] = (x[i] <= kActiveTol);
  }
  VectorXd nu = VectorXd::Zero(m);
  int pivots = 0;
  PassStatus status =
      active_set_pass(G, l, A, b, nonneg, x, working, nu, pivots, max_pivots);
  res.pivots = pivots;
  if (status == PassStatus::unbounded)
    throw_invalid("objective is unbounded below over the feasible set");
  if (status == PassStatus::exhausted) {
    // Cycling guard: projected gradient until stationary, then one fresh
    // active-set pass from the projected point.
    res.fallback_used = true;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
    double lip = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-12);
    double step = 1.0 / lip;
    bool simplex = nonneg && m == 1 && (A.array() == 1.0).all() &&
                   std::abs(b[0] - 1.0) < 1e-14;
    auto project = [&](VectorXd v) {
      if (simplex) return project_simplex(std::move(v));
      if (!nonneg) return project_affine(A, b, v);
      if (m == 0) return VectorXd(v.cwiseMax(0.0));
      for (int it = 0; it < 100; ++it) {  // alternating projections
        v = project_affine(A, b, v).cwiseMax(0.0);
      }
      return v;
    };
    for (int it = 0; it < 200000; ++it) {
      VectorXd nxt = project(x - step * gradient(G, l, x));
      if ((nxt - x).cwiseAbs().maxCoeff() <= 1e-13) {
        x = nxt;
        break;
      }
      x = nxt;
    }
    for (int i = 0; i < n; ++i) working[i] = nonneg && (x[i] <= kActiveTol);
    pivots = 0;
    status = active_set_pass(G, l, A, b, nonneg, x, working, nu, pivots,
                             max_pivots);
    res.pivots += pivots;
    if (status == PassStatus::unbounded)
      throw_invalid("objective is unbounded below over the feasible set");
  }
  res.x = std::move(x);
  res.nu = std::move(nu);
  return res;
}

// Optimality certificate, recomputed from scratch at the final point.
double kkt_certificate(const MatrixXd& G, const VectorXd& l, const MatrixXd& A,
                       const VectorXd& b, bool nonneg, const VectorXd& x) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(A.rows());
  double residual = 0.0;
  if (m > 0) residual = std::max(residual, (A * x - b).cwiseAbs().maxCoeff());
  if (nonneg && n > 0) residual = std::max(residual, -std::min(0.0, x.minCoeff()));

  VectorXd g = gradient(G, l, x);
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (!nonneg || x[i] > kActiveTol * 10) free.push_back(i);
  VectorXd nu = VectorXd::Zero(m);
  if (m > 0 && !free.empty()) {
    MatrixXd Af(free.size(), m);
    VectorXd gf(free.size());
    for (std::size_t r = 0; r < free.size(); ++r) {
      Af.row(r) = A.col(free[r]).transpose();
      gf[r] = g[free[r]];
    }
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Af);
    nu = cod.solve(gf);
  }
  VectorXd lam = g;
  if (m > 0) lam -= A.transpose() * nu;
  for (int i : free) residual = std::max(residual, std::abs(lam[i]));
  if (nonneg)
    for (int i = 0; i < n; ++i)
      if (x[i] <= kActiveTol * 10) residual = std::max(residual, -std::min(0.0, lam[i]));
  return residual;
}

// The optimal face has dimension >= 1 iff [G; A; g'] loses rank on the
// coordinates strictly inside the feasible region at the solution.
bool detect_nonunique(const MatrixXd& G, const VectorXd& l, const MatrixXd& A,
                      bool nonneg, const VectorXd& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (!nonneg || x[i] > 1e-9) free.push_back(i);
  if (free.empty()) return false;
  VectorXd g = gradient(G, l, x);
  MatrixXd M(n + A.rows() + 1, static_cast<Eigen::Index>(free.size()));
  for (std::size_t c = 0; c < free.size(); ++c) {
    M.col(c).head(n) = G.col(free[c]);
    if (A.rows() > 0) M.col(c).segment(n, A.rows()) = A.col(free[c]);
    M(n + A.rows(), c) = g[free[c]];
  }
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(M);
  cod.setThreshold(1e-10);
  return cod.rank() < static_cast<Eigen::Index>(free.size());
}

// PSD validation with the documented slack; small negative curvature is
// projected out so the line search never sees it.
MatrixXd validated_gram(MatrixXd G) {
  if (G.rows() != G.cols()) throw_numeric("gram matrix must be square");
  double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
  double asym = (G - G.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale)
    throw_numeric("gram matrix is asymmetric (max deviation " +
                  format_double(asym) + ")");
  G = 0.5 * (G + G.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
  double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kPsdSlack * scale)
    throw_numeric("gram matrix is not positive semidefinite (min eigenvalue " +
                  format_double(min_eig) + ")");
  if (min_eig < 0.0) {
    VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    G = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  }
  return G;
}

// Feasible start for Ax=b, x>=0 if nonneg. Runs a phase-1 minimization of
// ||Ax-b||^2 when no closed-form start exists.
VectorXd feasible_start(const MatrixXd& A, const VectorXd& b, bool nonneg,
                        int n) {
  const int m = static_cast<int>(A.rows());
  if (m == 0) return VectorXd::Zero(n);
  if (!nonneg) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
    VectorXd x = cod.solve(b);
    if ((A * x - b).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + b.cwiseAbs().maxCoeff()))
      throw_invalid("equality constraints are inconsistent");
    return x;
  }
  if (m == 1 && (A.array() == 1.0).all() && std::abs(b[0] - 1.0) < 1e-14)
    return VectorXd::Constant(n, 1.0 / n);
  // Phase 1: min ||Ax - b||^2 over x >= 0.
  ActiveSetResult r = active_set(A.transpose() * A, A.transpose() * b,
                                 MatrixXd(0, n), VectorXd(0), true,
                                 VectorXd::Zero(n));
  if ((A * r.x - b).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + b.cwiseAbs().maxCoeff()))
    throw_invalid("constraints admit no feasible point");
  return r.x;
}

QpSolution run_solver(const MatrixXd& G_in, const VectorXd& l, const MatrixXd& A,
                      const VectorXd& b, bool nonneg) {
  const int n = static_cast<int>(l.size());
  MatrixXd G = validated_gram(G_in);
  VectorXd x0 = feasible_start(A, b, nonneg, n);
  ActiveSetResult phase_a = active_set(G, l, A, b, nonneg, x0);

  // Tie-break: minimize ||x||^2 over the optimal face
  //   { feasible x : Gx = G x*, g(x*)'x = g(x*)'x* }.
  VectorXd g = gradient(G, l, phase_a.x);
  MatrixXd A2(A.rows() + n + 1, n);
  VectorXd b2(A.rows() + n + 1);
  if (A.rows() > 0) {
    A2.topRows(A.rows()) = A;
    b2.head(A.rows()) = b;
  }
  A2.middleRows(A.rows(), n) = G;
  b2.segment(A.rows(), n) = G * phase_a.x;
  A2.row(A.rows() + n) = g.transpose();
  b2[A.rows() + n] = g.dot(phase_a.x);
  ActiveSetResult phase_b = active_set(MatrixXd::Identity(n, n),
                                       VectorXd::Zero(n), A2, b2, nonneg,
                                       phase_a.x);

  // Keep the refinement only if it did not degrade the original objective.
  VectorXd x = phase_b.x;
  double obj_a = objective_value(G, l, phase_a.x);
  double obj_b = objective_value(G, l, phase_b.x);
  if (!(obj_b <= obj_a + 1e-10 * (1.0 + std::abs(obj_a)))) x = phase_a.x;

  QpSolution sol;
  sol.weights = x;
  sol.iterations = phase_a.pivots + phase_b.pivots;
  sol.kkt_residual = kkt_certificate(G, l, A, b, nonneg, x);
  sol.nonunique = detect_nonunique(G, l, A, nonneg, x);
  if (phase_a.fallback_used || phase_b.fallback_used)
    sol.diagnostics["fallback"] = 1.0;
  return sol;
}

}  // namespace

QpSolution solve_general(const GeneralQp& qp) {
  const int n = static_cast<int>(qp.linear.size());
  if (qp.gram.rows() != n || qp.gram.cols() != n)
    throw_invalid("gram/linear dimension mismatch");
  if (qp.eq.rows() != qp.eq_rhs.size() || (qp.eq.rows() > 0 && qp.eq.cols() != n))
    throw_invalid("equality constraint dimension mismatch");
  QpSolution sol = run_solver(qp.gram, qp.linear, qp.eq, qp.eq_rhs, qp.nonneg);
  sol.objective = objective_value(qp.gram, qp.linear, sol.weights);
  return sol;
}

QpSolution solve_qp(const QpProblem& problem) {
  const int n = static_cast<int>(problem.linear.size());
  if (problem.gram.rows() != n || problem.gram.cols() != n)
    throw_invalid("gram/linear dimension mismatch");

  MatrixXd G = problem.gram;
  VectorXd l = problem.linear;
  double c = problem.constant;
  VectorXd m = problem.mean_controls;
  double m0 = problem.mean_treated;
  if (problem.constraints.intercept) {
    if (m.size() == 0) m = VectorXd::Zero(n);
    if (m.size() != n) throw_invalid("mean_controls dimension mismatch");
    G -= m * m.transpose();
    l -= m0 * m;
    c -= m0 * m0;
  }

  MatrixXd A(problem.constraints.sum_to_one ? 1 : 0, n);
  VectorXd b(A.rows());
  if (A.rows() > 0) {
    A.setOnes();
    b[0] = 1.0;
  }

  QpSolution sol = run_solver(G, l, A, b, problem.constraints.nonneg);
  sol.objective = objective_value(G, l, sol.weights) + c;
  if (problem.constraints.intercept)
    sol.intercept = m0 - m.dot(sol.weights);
  return sol;
}

QpSolution fit_weights(const Panel& panel, const ConstraintSet& constraints) {
  panel.validate();
  const int J = panel.controls();
  const int T0 = panel.t0;
  Eigen::MatrixXd Y = panel.outcomes.bottomRows(J).leftCols(T0);
  Eigen::VectorXd y0 = panel.outcomes.row(0).head(T0).transpose();

  QpProblem problem;
  problem.gram = (Y * Y.transpose()) / T0;
  problem.linear = (Y * y0) / T0;
  problem.constant = y0.squaredNorm() / T0;
  problem.constraints = constraints;
  problem.mean_controls = Y.rowwise().mean();
  problem.mean_treated = y0.mean();

  QpSolution sol = solve_qp(problem);
  if (T0 < J) sol.diagnostics["overfit"] = 1.0;
  return sol;
}

Eigen::VectorXd brute_force_simplex(const QpProblem& problem, int grid) {
  const int n = static_cast<int>(problem.linear.size());
  if (n < 1 || n > 4) throw_invalid("brute_force_simplex supports 1 <= J <= 4");
  if (grid < 1) throw_invalid("grid must be positive");
  if (!problem.constraints.nonneg || !problem.constraints.sum_to_one)
    throw_invalid("brute_force_simplex requires simplex constraints");

  MatrixXd G = problem.gram;
  VectorXd l = problem.linear;
  if (problem.constraints.intercept) {
    VectorXd m = problem.mean_controls.size() ? problem.mean_controls
                                              : VectorXd::Zero(n);
    G -= m * m.transpose();
    l -= problem.mean_treated * m;
  }

  VectorXd best = VectorXd::Zero(n);
  best[0] = 1.0;
  double best_val = std::numeric_limits<double>::infinity();
  double best_norm = std::numeric_limits<double>::infinity();
  VectorXd w(n);
  std::vector<int> k(n, 0);

  // Odometer over lattice points with coordinates summing to `grid`.
  std::function<void(int, int)> visit = [&](int dim, int remaining) {
    if (dim == n - 1) {
      k[dim] = remaining;
      for (int i = 0; i < n; ++i) w[i] = static_cast<double>(k[i]) / grid;
      double val = objective_value(G, l, w);
      double norm = w.squaredNorm();
      if (val < best_val - 1e-15 * (1.0 + std::abs(best_val)) ||
          (std::abs(val - best_val) <= 1e-15 * (1.0 + std::abs(best_val)) &&
           norm < best_norm)) {
        best_val = val;
        best_norm = norm;
        best = w;
      }
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      k[dim] = v;
      visit(dim + 1, remaining - v);
    }
  };
  visit(0, grid);
  return best;
}

}  // namespace syncon
