// Acceptance gate: every shipped guarantee is one numbered check block that
// prints a single [PASS]/[FAIL] line (with details under failures).  The
// process exits 0 only when every block passes.  All tolerances are pinned
// inline next to the expected values.
//
// Usage: syncon_acceptance --cli /path/to/syncon_cli [--reps N]
//   --cli   command-line binary used by the determinism block
//   --reps  Monte Carlo repetitions per cell (default 5000, minimum 2000;
//           below 5000 the grid tolerances widen by 1.6x)

#include "syncon/asymptotics.hpp"
#include "syncon/dgp.hpp"
#include "syncon/errors.hpp"
#include "syncon/estimators.hpp"
#include "syncon/mc.hpp"
#include "syncon/panel.hpp"
#include "syncon/placebo.hpp"
#include "syncon/qp.hpp"

#include <Eigen/Dense>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace syncon;

namespace {

int g_reps = 5000;
std::string g_cli;

// Collects check results for one criterion.
struct Gate {
  int checks = 0;
  int failed = 0;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& message) {
    ++checks;
    if (!ok) {
      ++failed;
      notes.push_back(message);
    }
  }
  void near(double got, double want, double tol, const std::string& label) {
    char line[256];
    std::snprintf(line, sizeof line, "%s: got %.6g, want %.6g +- %.3g",
                  label.c_str(), got, want, tol);
    check(std::isfinite(got) && std::abs(got - want) <= tol, line);
  }
};

double tolerance_scale() { return g_reps >= 5000 ? 1.0 : 1.6; }

FactorDGP stationary_dgp(double sigma2) {
  FactorDGP dgp;
  dgp.J = 20;
  dgp.K = 10;
  dgp.sigma2 = sigma2;
  return dgp;
}

const McCell* cell_of(const McSummary& summary, const std::string& estimator,
                      int t0, bool asymptotic = false) {
  for (const McCell& cell : summary.cells) {
    if (cell.estimator != estimator || cell.asymptotic != asymptotic) continue;
    if (!asymptotic && cell.t0 != t0) continue;
    return &cell;
  }
  return nullptr;
}

McSummary run_grid(const FactorDGP& dgp, const std::string& label,
                   std::vector<int> t0_grid,
                   const std::vector<std::string>& estimators,
                   std::uint64_t seed, bool asymptotic_row,
                   int reps_floor = 0) {
  McConfig config;
  config.label = label;
  config.dgp = dgp;
  config.t0_grid = std::move(t0_grid);
  config.reps = std::max(g_reps, reps_floor);
  for (const std::string& name : estimators)
    config.estimators.push_back(parse_estimator(name));
  config.base_seed = seed;
  config.include_asymptotic_row = asymptotic_row;
  return run_mc(config, 1);
}

// ---------------------------------------------------------------------
// 1. Closed-form limit masses.

void criterion_closed_forms(Gate& gate) {
  gate.near(gamma_many_groups(1.0, 20), 0.30, 1e-12, "misallocation(1,20)");
  gate.near(gamma_many_groups(0.5, 20), 0.18, 1e-12, "misallocation(0.5,20)");

  for (const double sigma2 : {1.0, 0.5}) {
    const LimitSpec spec = limit_spec(stationary_dgp(sigma2));
    const LimitResult sc = limit_weights(spec, ConstraintSet{true, true, false});
    const double own_group = sc.weights[0] + sc.weights[1];
    char label[64];
    std::snprintf(label, sizeof label, "own-group mass (sigma2=%.1f)", sigma2);
    gate.near(own_group, 1.0 - gamma_many_groups(sigma2, 20), 1e-8, label);
  }

  gate.near(gamma_two_groups(0.0, 20), 0.0, 1e-15, "two-group mass, no noise");
  gate.near(gamma_two_groups(1e12, 20), 0.5, 1e-9,
            "two-group mass, dominant noise");
}

// ---------------------------------------------------------------------
// 2. Worked two-factor example.

void criterion_worked_example(Gate& gate) {
  LimitSpec spec;
  spec.mu0 = Eigen::Vector2d(1.0, 1.0);
  spec.mu.resize(4, 2);
  spec.mu << 0.5, 1.0, 1.5, 1.0, 0.5, 0.0, 1.5, 1.0;
  spec.omega0 = Eigen::Vector2d::Zero();
  spec.Omega0 = Eigen::Matrix2d::Identity();
  spec.sigma2 = 1.0;
  spec.post_mean = Eigen::Vector2d::Zero();

  const LimitResult sc = limit_weights(spec, ConstraintSet{true, true, false});
  gate.near(sc.reconstructed_loadings[0], 1.038, 2e-3, "fit loadings[0]");
  gate.near(sc.reconstructed_loadings[1], 0.8458, 2e-3, "fit loadings[1]");

  const LimitResult did =
      evaluate_limit(spec, Eigen::VectorXd::Constant(4, 0.25), true);
  gate.check(did.reconstructed_loadings[0] == 1.0,
             "uniform loadings[0] not exactly 1");
  gate.check(did.reconstructed_loadings[1] == 0.75,
             "uniform loadings[1] not exactly 0.75");
}

// ---------------------------------------------------------------------
// 3. Limiting standard errors at the reference weights.

void criterion_limit_variance(Gate& gate) {
  const LimitSpec spec = limit_spec(stationary_dgp(1.0));
  const double at_uniform =
      gamma_variance(spec, Eigen::VectorXd::Constant(20, 0.05));
  gate.near(std::sqrt(at_uniform), 1.40, 0.005, "sqrt variance at uniform");

  const LimitResult sc = limit_weights(spec, ConstraintSet{true, true, false});
  gate.near(std::sqrt(gamma_variance(spec, sc.weights)), 1.16, 0.005,
            "sqrt variance at fitted limit");
}

// ---------------------------------------------------------------------
// 4. Stationary-design grid reproduction.

struct GridTarget {
  int t0;
  const char* estimator;
  double mu, bias, se;
};

void check_grid(Gate& gate, const McSummary& summary,
                const std::vector<GridTarget>& targets,
                const std::string& label) {
  const double scale = tolerance_scale();
  for (const GridTarget& target : targets) {
    const McCell* cell = cell_of(summary, target.estimator, target.t0);
    char where[96];
    std::snprintf(where, sizeof where, "%s t0=%d %s", label.c_str(),
                  target.t0, target.estimator);
    if (cell == nullptr || !cell->error.empty()) {
      gate.check(false, std::string(where) + ": cell missing or failed");
      continue;
    }
    gate.near(cell->mu_hat1, target.mu, 0.03 * scale,
              std::string(where) + " mu");
    gate.near(cell->bias, target.bias, 0.05 * scale,
              std::string(where) + " bias");
    gate.near(cell->se, target.se, 0.06 * scale, std::string(where) + " se");
  }
}

void check_limit_row(Gate& gate, const McSummary& summary,
                     const std::string& estimator, double mu, double bias,
                     double se, const std::string& label) {
  const McCell* cell = cell_of(summary, estimator, 0, true);
  if (cell == nullptr || !cell->error.empty()) {
    gate.check(false, label + ": limit row missing or failed");
    return;
  }
  gate.near(cell->mu_hat1, mu, 0.005, label + " limit mu");
  gate.near(cell->bias, bias, 0.005, label + " limit bias");
  gate.near(cell->se, se, 0.005, label + " limit se");
}

void criterion_stationary_grid(Gate& gate) {
  const std::vector<std::string> estimators = {"sc", "sc_demeaned", "did"};

  // The printed reference values carry their own simulation noise (the
  // uniform-weight bias, analytically 0.90 everywhere, is printed as
  // 0.88-0.92 across cells). In full-precision mode this run averages
  // further so that the comparison measures systematic agreement rather
  // than the luck of one seed's draw against another's.
  const int floor_reps = g_reps >= 5000 ? 20000 : 0;
  const McSummary panel_a =
      run_grid(stationary_dgp(1.0), "stationary_a", {20, 50, 100}, estimators,
               1101, true, floor_reps);
  check_grid(gate, panel_a,
             {{20, "sc", 0.49, 0.54, 1.31},
              {20, "sc_demeaned", 0.46, 0.56, 1.35},
              {20, "did", 0.10, 0.92, 1.42},
              {50, "sc", 0.59, 0.40, 1.24},
              {50, "sc_demeaned", 0.58, 0.40, 1.25},
              {50, "did", 0.10, 0.88, 1.42},
              {100, "sc", 0.64, 0.37, 1.20},
              {100, "sc_demeaned", 0.63, 0.38, 1.21},
              {100, "did", 0.10, 0.89, 1.40}},
             "noise=1.0");
  check_limit_row(gate, panel_a, "sc", 0.70, 0.30, 1.16, "noise=1.0 sc");
  check_limit_row(gate, panel_a, "did", 0.10, 0.90, 1.40, "noise=1.0 did");

  const McSummary panel_b =
      run_grid(stationary_dgp(0.5), "stationary_b", {20, 50, 100}, estimators,
               1102, true, floor_reps);
  check_grid(gate, panel_b,
             {{20, "sc", 0.64, 0.39, 0.96},
              {20, "sc_demeaned", 0.61, 0.41, 0.99},
              {20, "did", 0.10, 0.92, 1.21},
              {50, "sc", 0.73, 0.26, 0.89},
              {50, "sc_demeaned", 0.72, 0.27, 0.90},
              {50, "did", 0.10, 0.88, 1.21},
              {100, "sc", 0.76, 0.24, 0.87},
              {100, "sc_demeaned", 0.76, 0.24, 0.87},
              {100, "did", 0.10, 0.89, 1.19}},
             "noise=0.5");
  check_limit_row(gate, panel_b, "sc", 0.82, 0.18, 0.84, "noise=0.5 sc");
  check_limit_row(gate, panel_b, "did", 0.10, 0.90, 1.19, "noise=0.5 did");
}

// ---------------------------------------------------------------------
// 5. Random-walk design: walk-weight recovery and the variance pattern.

void criterion_random_walk_grid(Gate& gate) {
  FactorDGP dgp = stationary_dgp(1.0);
  dgp.R = 2;
  const McSummary summary =
      run_grid(dgp, "walk", {20, 50, 100}, {"sc", "sc_demeaned", "did"},
               2101, false);

  const std::vector<std::pair<int, double>> theta_targets = {
      {20, 0.94}, {50, 0.98}, {100, 0.99}};
  for (const auto& [t0, theta] : theta_targets) {
    const McCell* cell = cell_of(summary, "sc", t0);
    char where[96];
    std::snprintf(where, sizeof where, "walk t0=%d sc theta", t0);
    if (cell == nullptr || !cell->error.empty()) {
      gate.check(false, std::string(where) + ": cell missing or failed");
      continue;
    }
    gate.near(cell->theta_hat1, theta, 0.015, where);
  }

  const auto stat_at = [&](const char* estimator, int t0, bool want_theta) {
    const McCell* cell = cell_of(summary, estimator, t0);
    return cell == nullptr ? std::numeric_limits<double>::quiet_NaN()
                           : (want_theta ? cell->theta_hat1 : cell->se);
  };
  const auto se_at = [&](const char* estimator, int t0) {
    return stat_at(estimator, t0, false);
  };
  gate.check(se_at("did", 20) < se_at("did", 50) &&
                 se_at("did", 50) < se_at("did", 100),
             "uniform-weight se must grow with the fit window");
  gate.check(se_at("sc", 20) > se_at("sc", 50) &&
                 se_at("sc", 50) > se_at("sc", 100),
             "fitted-weight se must shrink with the fit window");
  // The intercept variant shares both qualitative patterns: its se also
  // converges from above, and its walk-group mass climbs toward one. Its
  // level pins are looser than sc's because demeaning removes most of the
  // walk's separating signal in short windows.
  gate.check(se_at("sc_demeaned", 20) > se_at("sc_demeaned", 50) &&
                 se_at("sc_demeaned", 50) > se_at("sc_demeaned", 100),
             "demeaned se must shrink with the fit window");
  gate.check(stat_at("sc_demeaned", 20, true) < stat_at("sc_demeaned", 50, true) &&
                 stat_at("sc_demeaned", 50, true) < stat_at("sc_demeaned", 100, true),
             "demeaned walk-group mass must climb with the fit window");
}

// ---------------------------------------------------------------------
// 6. Fixed-effect designs: demeaning never loses to uniform weights.

void criterion_fixed_effects(Gate& gate) {
  struct Design {
    const char* label;
    std::function<bool(int)> has_effect;  // control index -> shares the level
  };
  const std::vector<Design> designs = {
      {"fe_alternating", [](int c) { return c % 2 == 1; }},
      {"fe_same_groups", [](int c) { return c < 10; }},
      {"fe_other_groups", [](int c) { return c >= 10; }},
  };

  std::uint64_t seed = 3101;
  for (const Design& design : designs) {
    FactorDGP dgp = stationary_dgp(1.0);
    dgp.fixed_effects.assign(21, 0.0);
    dgp.fixed_effects[0] = 1.0;
    for (int c = 0; c < 20; ++c)
      if (design.has_effect(c)) dgp.fixed_effects[1 + c] = 1.0;

    const McSummary summary =
        run_grid(dgp, design.label, {20, 50, 100},
                 {"sc", "sc_demeaned", "did"}, seed++, true);

    for (const int t0 : {20, 50, 100}) {
      const McCell* dem = cell_of(summary, "sc_demeaned", t0);
      const McCell* did = cell_of(summary, "did", t0);
      char where[96];
      std::snprintf(where, sizeof where, "%s t0=%d", design.label, t0);
      if (dem == nullptr || did == nullptr || !dem->error.empty() ||
          !did->error.empty()) {
        gate.check(false, std::string(where) + ": cells missing or failed");
        continue;
      }
      const double slack = 3.0 * (dem->mc_error + did->mc_error);
      char detail[160];
      std::snprintf(detail, sizeof detail,
                    "%s: demeaned bias %.4f must not exceed uniform %.4f "
                    "(+%.4f)", where, dem->bias, did->bias, slack);
      gate.check(dem->bias <= did->bias + slack, detail);
      std::snprintf(detail, sizeof detail,
                    "%s: demeaned se %.4f must not exceed uniform %.4f "
                    "(+%.4f)", where, dem->se, did->se, slack);
      gate.check(dem->se <= did->se + slack, detail);
    }

    const McCell* dem_inf = cell_of(summary, "sc_demeaned", 0, true);
    const McCell* did_inf = cell_of(summary, "did", 0, true);
    if (dem_inf && did_inf && dem_inf->error.empty() &&
        did_inf->error.empty()) {
      gate.check(dem_inf->bias <= did_inf->bias + 1e-9,
                 std::string(design.label) + ": limit bias ordering");
      gate.check(dem_inf->se <= did_inf->se + 1e-9,
                 std::string(design.label) + ": limit se ordering");
    } else {
      gate.check(false, std::string(design.label) + ": limit rows failed");
    }

    if (std::string(design.label) == "fe_alternating") {
      const McCell* sc = cell_of(summary, "sc", 20);
      if (sc == nullptr || !sc->error.empty())
        gate.check(false, "fe_alternating: sc cell missing at t0=20");
      else
        gate.near(sc->fe_hat, 0.72, 0.03, "fe_alternating level recovery");
    }
  }
}

// ---------------------------------------------------------------------
// 7. Factor-projection estimator: calibrated when histories are long,
//    volatile when they are short, biased under heteroskedastic noise.

void criterion_factor_projection(Gate& gate) {
  const double scale = tolerance_scale();
  const McSummary homo =
      run_grid(stationary_dgp(1.0), "projection_homo", {20, 500},
               {"sc_demeaned", "ife:10"}, 4101, false,
               g_reps >= 5000 ? 12000 : 0);

  const McCell* ife_500 = cell_of(homo, "ife:10", 500);
  if (ife_500 == nullptr || !ife_500->error.empty()) {
    gate.check(false, "projection cell missing at t0=500");
  } else {
    gate.near(ife_500->bias, 0.0, 0.05 * scale, "projection bias at t0=500");
    gate.near(ife_500->se, 1.25, 0.10 * scale, "projection se at t0=500");
  }

  const McCell* ife_20 = cell_of(homo, "ife:10", 20);
  const McCell* dem_20 = cell_of(homo, "sc_demeaned", 20);
  if (ife_20 == nullptr || dem_20 == nullptr || !ife_20->error.empty() ||
      !dem_20->error.empty()) {
    gate.check(false, "short-history cells missing");
  } else {
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "short-history projection se %.3f must exceed 5x demeaned "
                  "se %.3f", ife_20->se, dem_20->se);
    gate.check(ife_20->se > 5.0 * dem_20->se, detail);
  }

  FactorDGP hetero = stationary_dgp(1.0);
  hetero.hetero.assign(21, 0.5);
  hetero.hetero[0] = 1.0;
  for (int u = 1; u <= 20; u += 2) hetero.hetero[u] = 1.0;
  // The uneven-noise bias is real but a few hundredths in size, so this
  // cell gets extra replications: the significance test needs the mc error
  // well below the bias for stable power, and extra draws only sharpen a
  // test that the bias is genuinely nonzero.
  const McSummary uneven = run_grid(hetero, "projection_hetero", {500},
                                    {"ife:10"}, 4102, false, 12000);
  const McCell* cell = cell_of(uneven, "ife:10", 500);
  if (cell == nullptr || !cell->error.empty()) {
    gate.check(false, "heteroskedastic cell missing at t0=500");
  } else {
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "heteroskedastic bias %.4f (mc error %.4f) must be "
                  "significant at 5%%", cell->bias, cell->mc_error);
    gate.check(std::abs(cell->bias) > 1.96 * cell->mc_error, detail);
  }
}

// ---------------------------------------------------------------------
// 8. Independent-oracle property suites.

void oracle_brute_force(Gate& gate) {
  std::mt19937_64 rng(8801);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int grid = 140;
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int J = 1 + static_cast<int>(rng() % 3);
    Eigen::MatrixXd B(J + 1, J);
    for (int r = 0; r < J + 1; ++r)
      for (int c = 0; c < J; ++c) B(r, c) = normal(rng);
    QpProblem problem;
    problem.gram = B.transpose() * B;
    problem.linear = Eigen::VectorXd::NullaryExpr(
        J, [&](Eigen::Index) { return normal(rng); });
    problem.constraints = ConstraintSet{true, true, false};

    const QpSolution solved = solve_qp(problem);
    const Eigen::VectorXd lattice = brute_force_simplex(problem, grid);
    const auto value = [&](const Eigen::VectorXd& w) {
      return w.dot(problem.gram * w) - 2.0 * problem.linear.dot(w);
    };

    // The exact minimizer can only undershoot the lattice scan; the lattice
    // can only miss by one step of gradient plus curvature.
    const double step = 1.0 / grid;
    const Eigen::VectorXd gradient =
        2.0 * (problem.gram * solved.weights - problem.linear);
    const double bound = step * gradient.lpNorm<1>() +
                         step * step * J * problem.gram.cwiseAbs().sum() +
                         1e-12;
    const double gap = value(lattice) - value(solved.weights);
    if (!(gap >= -1e-9) || !(gap <= bound)) ++failures;
  }
  char detail[96];
  std::snprintf(detail, sizeof detail,
                "grid-scan cross-check: %d of 200 instances disagreed",
                failures);
  gate.check(failures == 0, detail);
}

Panel random_panel(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Panel panel;
  const int J = 2 + static_cast<int>(rng() % 4);
  const int t0 = 8 + static_cast<int>(rng() % 9);
  const int T = t0 + 3;
  panel.outcomes.resize(J + 1, T);
  for (int u = 0; u <= J; ++u) {
    const double level = 2.0 * normal(rng);
    for (int t = 0; t < T; ++t) panel.outcomes(u, t) = level + normal(rng);
  }
  for (int u = 0; u <= J; ++u)
    panel.unit_labels.push_back("u" + std::to_string(u));
  for (int t = 0; t < T; ++t) panel.period_labels.push_back(t);
  panel.t0 = t0;
  return panel;
}

void oracle_intercept_demeaning(Gate& gate) {
  std::mt19937_64 rng(8802);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Panel panel = random_panel(rng);
    const QpSolution with_intercept =
        fit_weights(panel, ConstraintSet{true, true, true});

    Panel demeaned = panel;
    for (int u = 0; u < demeaned.units(); ++u) {
      const double mean =
          demeaned.outcomes.row(u).head(demeaned.t0).mean();
      demeaned.outcomes.row(u).array() -= mean;
    }
    const QpSolution plain =
        fit_weights(demeaned, ConstraintSet{true, true, false});

    if ((with_intercept.weights - plain.weights).cwiseAbs().maxCoeff() > 1e-9)
      ++failures;
  }
  char detail[96];
  std::snprintf(detail, sizeof detail,
                "intercept vs demeaning: %d of 100 panels disagreed",
                failures);
  gate.check(failures == 0, detail);
}

void oracle_detrend_invariance(Gate& gate) {
  std::mt19937_64 rng(8803);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Panel panel = random_panel(rng);
    const QpSolution raw = fit_weights(panel, ConstraintSet{true, true, false});
    const QpSolution shifted = fit_weights(detrend_by_control_mean(panel),
                                           ConstraintSet{true, true, false});
    if ((raw.weights - shifted.weights).cwiseAbs().maxCoeff() > 1e-9)
      ++failures;
  }
  char detail[96];
  std::snprintf(detail, sizeof detail,
                "control-mean detrending: %d of 100 panels moved the weights",
                failures);
  gate.check(failures == 0, detail);
}

void oracle_variance_dominance(Gate& gate) {
  std::mt19937_64 rng(8804);
  std::normal_distribution<double> normal(0.0, 1.0);
  int failures = 0;
  int phi_checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int J = 2 + static_cast<int>(rng() % 5);
    const int F = 1 + static_cast<int>(rng() % 4);
    LimitSpec spec;
    spec.mu.resize(J, F);
    for (int j = 0; j < J; ++j)
      for (int f = 0; f < F; ++f) spec.mu(j, f) = normal(rng);
    if (trial % 2 == 0) {
      Eigen::VectorXd v(J);
      for (int j = 0; j < J; ++j) v[j] = std::abs(normal(rng)) + 0.01;
      v /= v.sum();
      spec.mu0 = spec.mu.transpose() * v;
    } else {
      spec.mu0 = Eigen::VectorXd::NullaryExpr(
          F, [&](Eigen::Index) { return normal(rng); });
    }
    spec.omega0 = 0.2 * Eigen::VectorXd::NullaryExpr(
                            F, [&](Eigen::Index) { return normal(rng); });
    Eigen::MatrixXd C(F, F);
    for (int r = 0; r < F; ++r)
      for (int c = 0; c < F; ++c) C(r, c) = normal(rng);
    spec.Omega0 = C * C.transpose() / F +
                  0.1 * Eigen::MatrixXd::Identity(F, F) +
                  spec.omega0 * spec.omega0.transpose();
    spec.sigma2 = 0.1 + std::abs(normal(rng));
    spec.post_mean = Eigen::VectorXd::Zero(F);

    const LimitResult dem = limit_weights(spec, ConstraintSet{true, true, true});
    const double at_limit = gamma_variance(spec, dem.weights);
    const double slack = 1e-9 * (1.0 + at_limit);
    if (at_limit >
        gamma_variance(spec, Eigen::VectorXd::Constant(J, 1.0 / J)) + slack)
      ++failures;
    try {
      const Eigen::VectorXd exact = exact_loading_weights(spec.mu, spec.mu0);
      if (at_limit > gamma_variance(spec, exact) + slack) ++failures;
      ++phi_checks;
    } catch (const Error&) {
      if (trial % 2 == 0) ++failures;  // feasible draws must not throw
    }
  }
  char detail[120];
  std::snprintf(detail, sizeof detail,
                "variance dominance: %d violations over 100 draws "
                "(%d exact-matching checks)", failures, phi_checks);
  gate.check(failures == 0 && phi_checks >= 50, detail);
}

void oracle_iv_criterion(Gate& gate) {
  FactorDGP dgp;
  dgp.J = 8;
  dgp.K = 4;
  dgp.sigma2 = 0.0;
  int failures = 0;
  for (int draw = 0; draw < 20; ++draw) {
    const Panel panel =
        simulate(dgp, 18, 1, SimSeed{5000 + static_cast<std::uint64_t>(draw), 0});
    const int J = panel.controls();
    const int t0 = panel.t0;
    const Eigen::MatrixXd Y = panel.control_matrix();
    const Eigen::VectorXd y0 = panel.treated();

    // Moment system in outcomes differenced against the last control,
    // instrumented by the previous period's control outcomes.
    Eigen::VectorXd m = Eigen::VectorXd::Zero(J);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(J, J - 1);
    for (int t = 1; t < t0; ++t) {
      const Eigen::VectorXd z = Y.col(t - 1);
      const double base = Y(J - 1, t);
      m += z * (y0[t] - base);
      M += z * (Y.col(t).head(J - 1).array() - base).matrix().transpose();
    }
    m /= t0 - 1;
    M /= t0 - 1;

    Eigen::VectorXd exact = Eigen::VectorXd::Zero(J - 1);
    exact[0] = exact[1] = 0.5;  // the treated unit's own loading group
    if ((m - M * exact).cwiseAbs().maxCoeff() > 1e-10) ++failures;
  }
  char detail[96];
  std::snprintf(detail, sizeof detail,
                "moment criterion at matching weights: %d of 20 draws "
                "nonzero", failures);
  gate.check(failures == 0, detail);
}

void oracle_placebo_leakage(Gate& gate) {
  const Panel base = load_panel(
      std::string(SYNCON_FIXTURE_DIR) + "/placebo_panel.csv", "aspen", 1989);
  PlaceboConfig config;
  config.window_start = 1985;
  config.window_end = 1986;
  config.methods = {parse_estimator("sc")};
  const PlaceboReport before = run_placebo(base, config);

  // Periods after a target year must be invisible to its prediction.
  Panel later = base;
  for (int t = 17; t < later.periods(); ++t)
    later.outcomes.col(t).array() += 250.0;
  const PlaceboReport after = run_placebo(later, config);
  bool clean = before.cells.size() == after.cells.size();
  for (std::size_t i = 0; clean && i < before.cells.size(); ++i)
    clean = before.cells[i].prediction == after.cells[i].prediction &&
            before.cells[i].truth == after.cells[i].truth;
  gate.check(clean, "perturbing later periods changed a prediction");

  // The predicted unit's own outcome at the target year is held out.
  Panel held = base;
  held.outcomes(0, 16) += 3.25;  // treated row, year 1986
  const PlaceboReport own = run_placebo(held, config);
  const auto find = [](const PlaceboReport& report, std::int64_t year)
      -> const PlaceboCell* {
    for (const PlaceboCell& cell : report.cells)
      if (cell.unit == "aspen" && cell.year == year) return &cell;
    return nullptr;
  };
  const PlaceboCell* a = find(before, 1986);
  const PlaceboCell* b = find(own, 1986);
  gate.check(a != nullptr && b != nullptr &&
                 b->prediction == a->prediction &&
                 b->truth == a->truth + 3.25,
             "target-year outcome leaked into its own prediction");

  // Earlier periods do feed the fit: the mutation test has teeth.
  Panel earlier = base;
  earlier.outcomes(0, 5) += 3.25;
  const PlaceboReport trained = run_placebo(earlier, config);
  const PlaceboCell* c = find(trained, 1986);
  gate.check(a != nullptr && c != nullptr && c->prediction != a->prediction,
             "pre-window perturbation should have moved the prediction");
}

void criterion_oracles(Gate& gate) {
  oracle_brute_force(gate);
  oracle_intercept_demeaning(gate);
  oracle_detrend_invariance(gate);
  oracle_variance_dominance(gate);
  oracle_iv_criterion(gate);
  oracle_placebo_leakage(gate);
}

// ---------------------------------------------------------------------
// 9. Worker-count byte determinism through the command-line binary.

void criterion_determinism(Gate& gate) {
  if (g_cli.empty()) {
    gate.check(false, "--cli not given; cannot exercise the binary");
    return;
  }
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "syncon_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  const fs::path config_path = root / "mc.json";
  {
    std::ofstream config(config_path);
    config << R"({
  "dgp": {"J": 20, "K": 10, "sigma2": 1.0},
  "mc": {"label": "determinism", "t0_grid": [20, 50], "reps": 120,
         "estimators": ["sc", "sc_demeaned", "did"], "base_seed": 777,
         "include_asymptotic_row": true}
})";
  }

  std::vector<std::string> outputs;
  for (const int workers : {1, 4, 16}) {
    const fs::path out_dir = root / ("w" + std::to_string(workers));
    const std::string command = "\"" + g_cli + "\" mc --config \"" +
                                config_path.string() + "\" --out \"" +
                                out_dir.string() + "\" --workers " +
                                std::to_string(workers) + " > /dev/null";
    const int status = std::system(command.c_str());
    const bool exited_ok =
        status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    gate.check(exited_ok, "workers=" + std::to_string(workers) +
                              ": binary exited with failure");
    std::ifstream in(out_dir / "mc_summary.csv", std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    gate.check(in.good() || in.eof(), "workers=" + std::to_string(workers) +
                                          ": mc_summary.csv unreadable");
    outputs.push_back(buffer.str());
  }
  gate.check(!outputs[0].empty(), "first run produced an empty summary");
  gate.check(outputs[0] == outputs[1] && outputs[1] == outputs[2],
             "summary bytes differ across worker counts");
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      g_cli = argv[++i];
    } else if (arg == "--reps" && i + 1 < argc) {
      g_reps = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s --cli PATH [--reps N]\n", argv[0]);
      return 2;
    }
  }
  if (g_reps < 2000) {
    std::fprintf(stderr,
                 "--reps must be at least 2000 for meaningful tolerances\n");
    return 2;
  }

  struct Criterion {
    int id;
    const char* title;
    std::function<void(Gate&)> run;
    double max_seconds;  // 0 = unlimited
  };
  const std::vector<Criterion> criteria = {
      {1, "closed-form limit masses", criterion_closed_forms, 1.0},
      {2, "worked two-factor example", criterion_worked_example, 1.0},
      {3, "limiting standard errors", criterion_limit_variance, 1.0},
      {4, "stationary grid reproduction", criterion_stationary_grid, 0.0},
      {5, "random-walk grid reproduction", criterion_random_walk_grid, 0.0},
      {6, "fixed-effect designs favor demeaning", criterion_fixed_effects,
       0.0},
      {7, "factor-projection calibration", criterion_factor_projection, 0.0},
      {8, "independent-oracle property suites", criterion_oracles, 0.0},
      {9, "worker-count byte determinism", criterion_determinism, 0.0},
  };

  int failed_criteria = 0;
  for (const Criterion& criterion : criteria) {
    Gate gate;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(gate);
    } catch (const std::exception& ex) {
      gate.check(false, std::string("unhandled error: ") + ex.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (criterion.max_seconds > 0.0) {
      char detail[96];
      std::snprintf(detail, sizeof detail, "runtime %.3fs exceeds %.0fs",
                    elapsed, criterion.max_seconds);
      gate.check(elapsed < criterion.max_seconds, detail);
    }

    const bool passed = gate.failed == 0;
    if (!passed) ++failed_criteria;
    std::string suffix;
    if (!passed) suffix = ", " + std::to_string(gate.failed) + " failed";
    std::printf("[%s] %d %s (%.1fs, %d checks%s)\n", passed ? "PASS" : "FAIL",
                criterion.id, criterion.title, elapsed, gate.checks,
                suffix.c_str());
    for (const std::string& note : gate.notes)
      std::printf("       - %s\n", note.c_str());
    std::fflush(stdout);
  }

  std::printf("acceptance: %zu/%zu criteria passed\n",
              criteria.size() - static_cast<std::size_t>(failed_criteria),
              criteria.size());
  return failed_criteria == 0 ? 0 : 1;
}
