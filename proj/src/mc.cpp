#include "syncon/mc.hpp"

#include "syncon/asymptotics.hpp"
#include "syncon/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

namespace syncon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Fixed-order pairwise summation: accuracy of a tree reduction with a
// result that depends only on the slot contents, never on scheduling.
double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double mean_of(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size()) / static_cast<double>(x.size());
}

// One replication's contribution to one cell.
struct Slot {
  double effect = kNaN;
  double mu = kNaN;
  double theta = kNaN;
  double fe = kNaN;
  std::string error;
};

bool limit_row_supported(EstimatorTag tag) {
  return tag == EstimatorTag::sc || tag == EstimatorTag::sc_demeaned ||
         tag == EstimatorTag::did || tag == EstimatorTag::sc_infeasible;
}

void append_limit_rows(const McConfig& config, McSummary& summary) {
  std::optional<LimitSpec> spec;
  std::string spec_error;
  try {
    spec = limit_spec(config.dgp);
  } catch (const std::exception& ex) {
    spec_error = ex.what();
  }

  for (const EstimatorKind& kind : config.estimators) {
    if (!limit_row_supported(kind.tag)) continue;
    McCell cell;
    cell.panel_label = config.label;
    cell.asymptotic = true;
    cell.estimator = estimator_name(kind);
    cell.reps = 0;
    cell.seed = config.base_seed;
    cell.mu_hat1 = cell.theta_hat1 = cell.bias = cell.se = cell.fe_hat = kNaN;
    cell.mc_error = 0.0;
    if (!spec) {
      cell.error = spec_error;
      summary.cells.push_back(cell);
      continue;
    }
    try {
      LimitResult limit;
      switch (kind.tag) {
        case EstimatorTag::sc:
          limit = limit_weights(*spec, ConstraintSet{true, true, false});
          break;
        case EstimatorTag::sc_demeaned:
          limit = limit_weights(*spec, ConstraintSet{true, true, true});
          break;
        case EstimatorTag::did: {
          const Eigen::VectorXd uniform =
              Eigen::VectorXd::Constant(config.dgp.J, 1.0 / config.dgp.J);
          limit = evaluate_limit(*spec, uniform, true);
          break;
        }
        default: {  // sc_infeasible
          const Eigen::VectorXd oracle = infeasible_weights(config.dgp);
          limit = evaluate_limit(*spec, oracle, false);
          break;
        }
      }
      const Misallocation masses = misallocation(limit.weights, config.dgp);
      cell.mu_hat1 = masses.mu_mass;
      cell.theta_hat1 = masses.theta_mass;
      cell.fe_hat = masses.fe_mass;
      cell.bias = limit.asymptotic_bias;
      cell.se = std::sqrt(limit.asymptotic_variance);
    } catch (const std::exception& ex) {
      cell.error = ex.what();
    }
    summary.cells.push_back(cell);
  }
}

std::string csv_number(double value) {
  if (std::isnan(value)) return "";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return format_double(value);
}

}  // namespace

void McConfig::validate() const {
  dgp.validate();
  if (t0_grid.empty()) throw_invalid("mc: t0_grid must not be empty");
  for (int t0 : t0_grid)
    if (t0 < 2)
      throw_invalid("mc: every t0 must be at least 2 (got " +
                    std::to_string(t0) + ")");
  if (t1 < 1) throw_invalid("mc: t1 must be at least 1");
  if (reps < 1) throw_invalid("mc: reps must be at least 1");
  if (estimators.empty()) throw_invalid("mc: estimator list must not be empty");
  for (const EstimatorKind& kind : estimators)
    if (kind.tag == EstimatorTag::ife && kind.num_factors < 1)
      throw_invalid("mc: ife estimator needs a positive factor count");
}

Misallocation misallocation(const Eigen::VectorXd& weights,
                            const FactorDGP& dgp) {
  dgp.validate();
  if (weights.size() != dgp.J)
    throw_invalid("misallocation: weight vector has " +
                  std::to_string(weights.size()) + " entries for " +
                  std::to_string(dgp.J) + " controls");

  Misallocation m;
  for (int c = 0; c < dgp.J; ++c)
    if (dgp.stationary_group(c) == 0) m.mu_mass += weights[c];
  if (dgp.R == 0) {
    m.theta_mass = 1.0;
  } else {
    for (int c = 0; c < dgp.J; ++c)
      if (dgp.walk_group(c) == 0) m.theta_mass += weights[c];
  }
  const double treated_fe =
      dgp.fixed_effects.empty() ? 0.0 : dgp.fixed_effects[0];
  for (int c = 0; c < dgp.J; ++c) {
    const double fe = dgp.fixed_effects.empty() ? 0.0 : dgp.fixed_effects[c + 1];
    if (fe == treated_fe) m.fe_mass += weights[c];
  }
  return m;
}

McSummary run_mc(const McConfig& config, int workers) {
  config.validate();
  const int n_t0 = static_cast<int>(config.t0_grid.size());
  const int n_est = static_cast<int>(config.estimators.size());
  const int reps = config.reps;

  // The oracle weights depend only on the model; resolve them once.
  std::optional<Eigen::VectorXd> oracle;
  std::string oracle_error;
  const bool needs_oracle =
      std::any_of(config.estimators.begin(), config.estimators.end(),
                  [](const EstimatorKind& k) {
                    return k.tag == EstimatorTag::sc_infeasible;
                  });
  if (needs_oracle) {
    try {
      oracle = infeasible_weights(config.dgp);
    } catch (const std::exception& ex) {
      oracle_error = ex.what();
    }
  }

  // Replication r writes only slots [cell][r]; cells never share slots, so
  // any partition of the replications over threads gives identical content.
  std::vector<std::vector<Slot>> slots(
      static_cast<std::size_t>(n_t0) * n_est,
      std::vector<Slot>(static_cast<std::size_t>(reps)));

  auto run_rep = [&](int r) {
    const SimSeed seed{config.base_seed, static_cast<std::uint64_t>(r)};
    for (int ti = 0; ti < n_t0; ++ti) {
      Panel panel;
      try {
        panel = simulate(config.dgp, config.t0_grid[ti], config.t1, seed);
      } catch (const std::exception& ex) {
        for (int ei = 0; ei < n_est; ++ei)
          slots[static_cast<std::size_t>(ti) * n_est + ei][r].error = ex.what();
        continue;
      }
      for (int ei = 0; ei < n_est; ++ei) {
        Slot& slot = slots[static_cast<std::size_t>(ti) * n_est + ei][r];
        const EstimatorKind& kind = config.estimators[ei];
        if (kind.tag == EstimatorTag::sc_infeasible && !oracle) {
          slot.error = oracle_error;
          continue;
        }
        try {
          const EstimateReport report =
              kind.tag == EstimatorTag::sc_infeasible
                  ? estimate_with_weights(panel, *oracle, false)
                  : estimate(panel, kind);
          slot.effect = config.average_post ? report.effects.effects.mean()
                                            : report.effects.effects[0];
          if (report.weights.size() > 0) {
            const Misallocation m = misallocation(report.weights, config.dgp);
            slot.mu = m.mu_mass;
            slot.theta = m.theta_mass;
            slot.fe = m.fe_mass;
          }
        } catch (const std::exception& ex) {
          slot.error = ex.what();
        }
      }
    }
  };

  workers = std::max(1, std::min(workers, reps));
  if (workers == 1) {
    for (int r = 0; r < reps; ++r) run_rep(r);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int r = w; r < reps; r += workers) run_rep(r);
      });
    for (std::thread& t : pool) t.join();
  }

  McSummary summary;
  summary.config = config;
  for (int ti = 0; ti < n_t0; ++ti) {
    for (int ei = 0; ei < n_est; ++ei) {
      const std::vector<Slot>& cell_slots =
          slots[static_cast<std::size_t>(ti) * n_est + ei];
      McCell cell;
      cell.panel_label = config.label;
      cell.t0 = config.t0_grid[ti];
      cell.estimator = estimator_name(config.estimators[ei]);
      cell.reps = reps;
      cell.seed = config.base_seed;

      const auto failed =
          std::find_if(cell_slots.begin(), cell_slots.end(),
                       [](const Slot& s) { return !s.error.empty(); });
      if (failed != cell_slots.end()) {
        cell.mu_hat1 = cell.theta_hat1 = cell.bias = cell.se = cell.mc_error =
            cell.fe_hat = kNaN;
        cell.error = failed->error;
        summary.cells.push_back(cell);
        continue;
      }

      std::vector<double> effect(reps), mu(reps), theta(reps), fe(reps);
      for (int r = 0; r < reps; ++r) {
        effect[r] = cell_slots[r].effect;
        mu[r] = cell_slots[r].mu;
        theta[r] = cell_slots[r].theta;
        fe[r] = cell_slots[r].fe;
      }
      const double effect_mean = mean_of(effect);
      cell.bias = effect_mean - config.dgp.treatment_effect;
      cell.mu_hat1 = mean_of(mu);
      cell.theta_hat1 = mean_of(theta);
      cell.fe_hat = mean_of(fe);
      if (reps >= 2) {
        std::vector<double> sq(reps);
        for (int r = 0; r < reps; ++r) {
          const double d = effect[r] - effect_mean;
          sq[r] = d * d;
        }
        cell.se = std::sqrt(pairwise_sum(sq.data(), sq.size()) / (reps - 1));
        cell.mc_error = cell.se / std::sqrt(static_cast<double>(reps));
      } else {
        cell.se = kNaN;
        cell.mc_error = kNaN;
      }
      summary.cells.push_back(cell);
    }
  }

  if (config.include_asymptotic_row) append_limit_rows(config, summary);
  return summary;
}

std::vector<TrendSeries> finite_t_comparison(const McConfig& config,
                                             int workers) {
  if (config.t0_grid.size() < 2)
    throw_invalid("finite-t comparison needs at least two t0 values");
  const McSummary summary = run_mc(config, workers);

  std::vector<TrendSeries> out;
  for (const EstimatorKind& kind : config.estimators) {
    TrendSeries series;
    series.estimator = estimator_name(kind);
    for (const McCell& cell : summary.cells) {
      if (cell.estimator != series.estimator || !cell.error.empty()) continue;
      if (cell.asymptotic) {
        series.has_limit = true;
        series.limit_mu_hat1 = cell.mu_hat1;
      } else {
        series.t0.push_back(cell.t0);
        series.mu_hat1.push_back(cell.mu_hat1);
      }
    }
    series.nondecreasing = true;
    for (std::size_t i = 1; i < series.mu_hat1.size(); ++i)
      if (series.mu_hat1[i] < series.mu_hat1[i - 1])
        series.nondecreasing = false;
    if (series.has_limit && !series.mu_hat1.empty() &&
        series.limit_mu_hat1 < series.mu_hat1.back())
      series.nondecreasing = false;
    out.push_back(series);
  }
  return out;
}

std::string mc_summary_csv(const McSummary& summary) {
  const bool has_walk = summary.config.dgp.R > 0;
  std::ostringstream csv;
  csv << "panel,t0,estimator,mu_hat1,theta_hat1,bias,se,mc_error,reps,seed\n";
  for (const McCell& cell : summary.cells) {
    csv << cell.panel_label << ',';
    if (cell.asymptotic)
      csv << "inf";
    else
      csv << cell.t0;
    csv << ',' << cell.estimator << ',' << csv_number(cell.mu_hat1) << ','
        << (has_walk ? csv_number(cell.theta_hat1) : std::string()) << ','
        << csv_number(cell.bias) << ',' << csv_number(cell.se) << ','
        << csv_number(cell.mc_error) << ',' << cell.reps << ',' << cell.seed
        << '\n';
  }
  return csv.str();
}

}  // namespace syncon
