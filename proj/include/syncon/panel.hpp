#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace syncon {

/*
 * Balanced outcome panel with one treated unit and J controls.
 *
 * Row 0 of `outcomes` is the treated unit; rows 1..J are the controls.
 * Columns follow `period_labels` (strictly increasing integers). The first
 * `t0` columns are pre-treatment; everything from column t0 on is post.
 */
struct Panel {
  Eigen::MatrixXd outcomes;                 // (J+1) x T
  std::vector<std::string> unit_labels;     // size J+1, unique, treated first
  std::vector<std::int64_t> period_labels;  // size T, strictly increasing
  int t0 = 0;                               // number of pre-treatment periods

  int units() const { return static_cast<int>(outcomes.rows()); }
  int controls() const { return units() - 1; }
  int periods() const { return static_cast<int>(outcomes.cols()); }
  int post_periods() const { return periods() - t0; }

  // Treated outcomes as a column vector of length T.
  Eigen::VectorXd treated() const { return outcomes.row(0).transpose(); }

  // Control outcomes, J x T.
  Eigen::MatrixXd control_matrix() const {
    return outcomes.bottomRows(controls());
  }

  // Throws Error(invalid_input) when any structural invariant is violated.
  void validate() const;
};

// Treatment-effect path over the post-treatment periods.
struct EffectSeries {
  std::vector<std::int64_t> period_labels;  // size T - t0
  Eigen::VectorXd effects;
};

// Long-format CSV ingestion. The file must carry the exact header
// `unit,period,outcome`; every unit must cover every period. `treat_period`
// is the first post-treatment period: all periods strictly before it are
// pre-treatment. Units keep their order of first appearance, except that the
// treated unit is moved to row 0.
Panel load_panel(const std::string& path, const std::string& treated_unit,
                 std::int64_t treat_period);
Panel parse_panel_csv(const std::string& text, const std::string& treated_unit,
                      std::int64_t treat_period, const std::string& origin);

// Serialization. Long format round-trips through load_panel; values are
// written with 17 significant digits so doubles survive bit-for-bit.
std::string panel_to_long_csv(const Panel& panel);
std::string panel_to_wide_csv(const Panel& panel);
void save_panel(const Panel& panel, const std::string& path, bool wide = false);

// Subtracts each unit's pre-treatment mean from its whole series.
// Idempotent; pre-period means of the result are 0 within 1e-12.
Panel demean_pre(const Panel& panel);

// Subtracts the cross-sectional mean of the CONTROL units at each period
// from every unit (treated included). Removes common factors that load
// equally on all controls; weight vectors with sum 1 keep the same pre-fit
// objective on the transformed panel.
Panel detrend_by_control_mean(const Panel& panel);

// Differences every remaining unit against the named control unit and drops
// it; the result has one control fewer. Differencing re-expresses a
// sum-to-one fit as an unconstrained regression in differences.
Panel difference_against_base(const Panel& panel, const std::string& base_unit);

// 17-significant-digit formatting used by every machine-readable artifact.
std::string format_double(double value);

}  // namespace syncon
