// One-step-ahead placebo exercise: every unit takes a turn as the treated
// unit, every year in a window is predicted from strictly earlier years
// only, and each method is scored by its per-unit RMSE over the window.
#pragma once

#include "syncon/estimators.hpp"
#include "syncon/panel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace syncon {

struct PlaceboConfig {
  std::int64_t window_start = 0;      // inclusive period labels
  std::int64_t window_end = 0;
  std::vector<EstimatorKind> methods;
  int min_train = 5;                  // training years required before every
                                      // window year

  void validate() const;  // panel-independent checks
};

// One prediction cell. `truth` is always filled; a failed fit leaves
// `prediction` NaN and stores the error.
struct PlaceboCell {
  std::string unit;
  std::string method;
  std::int64_t year = 0;
  double truth = 0.0;
  double prediction = 0.0;
  std::string error;  // empty = ok
};

// Window RMSE of one (unit, method) pair; NaN when any of its cells failed.
struct PlaceboScore {
  std::string unit;
  std::string method;
  double rmse = 0.0;
  int failures = 0;
};

struct PlaceboReport {
  std::vector<PlaceboScore> scores;  // unit-major, then method order
  std::vector<PlaceboCell> cells;    // unit, method, year order
};

// Moves the named unit to the treated slot (row 0); all other units keep
// their relative order. Periods and the treatment split are unchanged.
Panel reassign_treated(const Panel& panel, const std::string& unit);

// Runs the full (unit, year, method) grid. For each target year the fit
// sees only strictly earlier periods: the panel is truncated at the target
// year and the treatment split placed immediately before it, so leakage is
// structurally impossible. Every cell is attempted; failures are recorded,
// never silently skipped.
PlaceboReport run_placebo(const Panel& panel, const PlaceboConfig& config);

// CSV artifacts: scores as `unit,method,rmse` (NaN prints empty) and cells
// as `unit,method,year,truth,prediction`.
std::string placebo_scores_csv(const PlaceboReport& report);
std::string placebo_cells_csv(const PlaceboReport& report);

// Scatter of per-unit RMSE under one method against another, identity line
// included; units missing either score are skipped.
std::string placebo_scatter(const PlaceboReport& report,
                            const std::string& method_x,
                            const std::string& method_y);

}  // namespace syncon
