#include "syncon/placebo.hpp"

#include "syncon/errors.hpp"
#include "syncon/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace syncon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_number(double value) {
  return std::isnan(value) ? std::string() : format_double(value);
}

}  // namespace

void PlaceboConfig::validate() const {
  if (window_end < window_start)
    throw_invalid("placebo: window end precedes window start");
  if (methods.empty()) throw_invalid("placebo: method list must not be empty");
  if (min_train < 1) throw_invalid("placebo: min_train must be at least 1");
  for (const EstimatorKind& kind : methods) {
    if (kind.tag == EstimatorTag::sc_infeasible)
      throw_invalid("placebo: sc_infeasible needs a generating model");
    if (kind.tag == EstimatorTag::ife && kind.num_factors < 1)
      throw_invalid("placebo: ife method needs a positive factor count");
  }
}

Panel reassign_treated(const Panel& panel, const std::string& unit) {
  panel.validate();
  const auto it =
      std::find(panel.unit_labels.begin(), panel.unit_labels.end(), unit);
  if (it == panel.unit_labels.end())
    throw_invalid("unknown unit '" + unit + "'");
  const int index = static_cast<int>(it - panel.unit_labels.begin());
  if (index == 0) return panel;

  Panel out;
  out.t0 = panel.t0;
  out.period_labels = panel.period_labels;
  out.outcomes.resize(panel.units(), panel.periods());
  out.unit_labels.reserve(panel.units());
  out.outcomes.row(0) = panel.outcomes.row(index);
  out.unit_labels.push_back(panel.unit_labels[index]);
  for (int j = 0; j < panel.units(); ++j) {
    if (j == index) continue;
    out.outcomes.row(static_cast<int>(out.unit_labels.size())) =
        panel.outcomes.row(j);
    out.unit_labels.push_back(panel.unit_labels[j]);
  }
  return out;
}

PlaceboReport run_placebo(const Panel& panel, const PlaceboConfig& config) {
  panel.validate();
  config.validate();

  const auto& periods = panel.period_labels;
  const auto start_it =
      std::find(periods.begin(), periods.end(), config.window_start);
  const auto end_it =
      std::find(periods.begin(), periods.end(), config.window_end);
  if (start_it == periods.end() || end_it == periods.end())
    throw_invalid("placebo: window [" + std::to_string(config.window_start) +
                  ", " + std::to_string(config.window_end) +
                  "] is not covered by the panel's periods");
  const int first = static_cast<int>(start_it - periods.begin());
  const int last = static_cast<int>(end_it - periods.begin());
  if (first < config.min_train)
    throw_invalid("placebo: first window year leaves only " +
                  std::to_string(first) + " training years; " +
                  std::to_string(config.min_train) + " required");

  const int n_units = panel.units();
  const int n_methods = static_cast<int>(config.methods.size());
  const int n_years = last - first + 1;

  PlaceboReport report;
  report.cells.resize(static_cast<std::size_t>(n_units) * n_methods * n_years);

  for (int u = 0; u < n_units; ++u) {
    const std::string& unit = panel.unit_labels[u];
    const Panel turned = reassign_treated(panel, unit);
    for (int ti = first; ti <= last; ++ti) {
      // Truncate at the target year and place the split right before it:
      // the fit can only ever see strictly earlier periods.
      Panel window;
      window.outcomes = turned.outcomes.leftCols(ti + 1);
      window.unit_labels = turned.unit_labels;
      window.period_labels.assign(periods.begin(), periods.begin() + ti + 1);
      window.t0 = ti;

      for (int mi = 0; mi < n_methods; ++mi) {
        PlaceboCell& cell =
            report.cells[(static_cast<std::size_t>(u) * n_methods + mi) *
                             n_years +
                         (ti - first)];
        cell.unit = unit;
        cell.method = estimator_name(config.methods[mi]);
        cell.year = periods[ti];
        cell.truth = turned.outcomes(0, ti);
        try {
          const EstimateReport fit = estimate(window, config.methods[mi]);
          cell.prediction = cell.truth - fit.effects.effects[0];
        } catch (const std::exception& ex) {
          cell.prediction = kNaN;
          cell.error = ex.what();
        }
      }
    }
  }

  report.scores.reserve(static_cast<std::size_t>(n_units) * n_methods);
  for (int u = 0; u < n_units; ++u) {
    for (int mi = 0; mi < n_methods; ++mi) {
      PlaceboScore score;
      score.unit = panel.unit_labels[u];
      score.method = estimator_name(config.methods[mi]);
      double sum_sq = 0.0;
      for (int w = 0; w < n_years; ++w) {
        const PlaceboCell& cell =
            report.cells[(static_cast<std::size_t>(u) * n_methods + mi) *
                             n_years +
                         w];
        if (!cell.error.empty()) {
          ++score.failures;
          continue;
        }
        const double err = cell.truth - cell.prediction;
        sum_sq += err * err;
      }
      score.rmse =
          score.failures == 0 ? std::sqrt(sum_sq / n_years) : kNaN;
      report.scores.push_back(score);
    }
  }
  return report;
}

std::string placebo_scores_csv(const PlaceboReport& report) {
  std::ostringstream csv;
  csv << "unit,method,rmse\n";
  for (const PlaceboScore& s : report.scores)
    csv << s.unit << ',' << s.method << ',' << csv_number(s.rmse) << '\n';
  return csv.str();
}

std::string placebo_cells_csv(const PlaceboReport& report) {
  std::ostringstream csv;
  csv << "unit,method,year,truth,prediction\n";
  for (const PlaceboCell& c : report.cells)
    csv << c.unit << ',' << c.method << ',' << c.year << ','
        << format_double(c.truth) << ',' << csv_number(c.prediction) << '\n';
  return csv.str();
}

std::string placebo_scatter(const PlaceboReport& report,
                            const std::string& method_x,
                            const std::string& method_y) {
  bool seen_x = false, seen_y = false;
  for (const PlaceboScore& s : report.scores) {
    seen_x = seen_x || s.method == method_x;
    seen_y = seen_y || s.method == method_y;
  }
  if (!seen_x || !seen_y)
    throw_invalid("placebo scatter: method '" +
                  (seen_x ? method_y : method_x) + "' is not in the report");

  std::vector<ScatterPoint> points;
  for (const PlaceboScore& sx : report.scores) {
    if (sx.method != method_x) continue;
    for (const PlaceboScore& sy : report.scores) {
      if (sy.method != method_y || sy.unit != sx.unit) continue;
      if (std::isnan(sx.rmse) || std::isnan(sy.rmse)) continue;
      points.push_back({sx.rmse, sy.rmse, sx.unit});
    }
  }
  return svg_scatter(points, method_x + " RMSE", method_y + " RMSE",
                     "one-step-ahead placebo RMSE", true);
}

}  // namespace syncon
