#include "syncon/panel.hpp"

#include "syncon/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace syncon {

namespace {

// One parsed long-format row.
struct LongRow {
  std::string unit;
  std::int64_t period;
  double outcome;
  std::size_t line;  // 1-based, for error messages
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return fields;
}

std::int64_t parse_period(std::string_view field, std::size_t line_no,
                          const std::string& origin) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw_invalid(origin + ": row " + std::to_string(line_no) +
                  ": period '" + std::string(field) + "' is not an integer");
  }
  return value;
}

double parse_outcome(std::string_view field, std::size_t line_no,
                     const std::string& origin) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw_invalid(origin + ": row " + std::to_string(line_no) +
                  ": outcome '" + std::string(field) + "' is not numeric");
  }
  return value;
}

std::string join_periods(const std::vector<std::int64_t>& periods, std::size_t cap) {
  std::string out;
  for (std::size_t i = 0; i < periods.size() && i < cap; ++i) {
    if (i) out += ", ";
    out += std::to_string(periods[i]);
  }
  if (periods.size() > cap) {
    out += " and " + std::to_string(periods.size() - cap) + " more";
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void Panel::validate() const {
  if (outcomes.rows() < 2) throw_invalid("panel needs at least one control unit");
  if (outcomes.cols() < 2) throw_invalid("panel needs at least two periods");
  if (static_cast<int>(unit_labels.size()) != units())
    throw_invalid("unit label count does not match outcome rows");
  if (static_cast<int>(period_labels.size()) != periods())
    throw_invalid("period label count does not match outcome columns");
  if (t0 < 1 || t0 >= periods())
    throw_invalid("t0 must satisfy 1 <= t0 < T (got t0=" + std::to_string(t0) +
                  ", T=" + std::to_string(periods()) + ")");
  for (std::size_t i = 1; i < period_labels.size(); ++i) {
    if (period_labels[i] <= period_labels[i - 1])
      throw_invalid("period labels must be strictly increasing");
  }
  std::unordered_set<std::string> seen;
  for (const auto& label : unit_labels) {
    if (!seen.insert(label).second)
      throw_invalid("duplicate unit label '" + label + "'");
  }
  if (!outcomes.allFinite()) throw_invalid("panel contains non-finite outcomes");
}

Panel parse_panel_csv(const std::string& text, const std::string& treated_unit,
                      std::int64_t treat_period, const std::string& origin) {
  std::vector<LongRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos,
                          (eol == std::string::npos ? text.size() : eol) - pos);
    pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!saw_header) {
      if (fields.size() != 3 || fields[0] != "unit" || fields[1] != "period" ||
          fields[2] != "outcome") {
        throw_invalid(origin + ": expected header 'unit,period,outcome', got '" +
                      std::string(trim(line)) + "'");
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw_invalid(origin + ": row " + std::to_string(line_no) + ": expected 3 fields, got " +
                    std::to_string(fields.size()));
    }
    if (fields[0].empty())
      throw_invalid(origin + ": row " + std::to_string(line_no) + ": empty unit label");
    rows.push_back({std::string(fields[0]),
                    parse_period(fields[1], line_no, origin),
                    parse_outcome(fields[2], line_no, origin), line_no});
  }
  if (!saw_header) throw_invalid(origin + ": file is empty");
  if (rows.empty()) throw_invalid(origin + ": no data rows");

  // Units in first-appearance order; periods sorted ascending.
  std::vector<std::string> units;
  std::unordered_map<std::string, int> unit_index;
  std::set<std::int64_t> period_set;
  for (const auto& row : rows) {
    if (unit_index.emplace(row.unit, static_cast<int>(units.size())).second)
      units.push_back(row.unit);
    period_set.insert(row.period);
  }
  std::vector<std::int64_t> periods(period_set.begin(), period_set.end());
  std::unordered_map<std::int64_t, int> period_index;
  for (std::size_t i = 0; i < periods.size(); ++i)
    period_index[periods[i]] = static_cast<int>(i);

  auto treated_it = unit_index.find(treated_unit);
  if (treated_it == unit_index.end())
    throw_invalid(origin + ": treated unit '" + treated_unit + "' not present");

  // Move the treated unit to row 0, keep everyone else in file order.
  std::vector<int> row_of(units.size());
  {
    int next = 1;
    for (std::size_t u = 0; u < units.size(); ++u)
      row_of[u] = (static_cast<int>(u) == treated_it->second) ? 0 : next++;
  }

  Eigen::MatrixXd outcomes(units.size(), periods.size());
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(units.size(), periods.size());
  for (const auto& row : rows) {
    int u = row_of[unit_index[row.unit]];
    int p = period_index[row.period];
    if (seen(u, p)) {
      throw_invalid(origin + ": row " + std::to_string(row.line) +
                    ": duplicate entry for unit '" + row.unit + "' period " +
                    std::to_string(row.period));
    }
    seen(u, p) = 1;
    outcomes(u, p) = row.outcome;
  }

  // Balanced-panel check with the offending cells spelled out.
  std::string missing_report;
  for (std::size_t u = 0; u < units.size(); ++u) {
    int r = row_of[u];
    std::vector<std::int64_t> missing;
    for (std::size_t p = 0; p < periods.size(); ++p)
      if (!seen(r, p)) missing.push_back(periods[p]);
    if (!missing.empty()) {
      if (!missing_report.empty()) missing_report += "; ";
      missing_report += "unit '" + units[u] + "' missing periods " + join_periods(missing, 5);
    }
  }
  if (!missing_report.empty())
    throw_invalid(origin + ": unbalanced panel: " + missing_report);

  Panel panel;
  panel.outcomes = std::move(outcomes);
  panel.period_labels = std::move(periods);
  panel.unit_labels.resize(units.size());
  for (std::size_t u = 0; u < units.size(); ++u)
    panel.unit_labels[row_of[u]] = units[u];

  auto first_post = std::lower_bound(panel.period_labels.begin(),
                                     panel.period_labels.end(), treat_period);
  panel.t0 = static_cast<int>(first_post - panel.period_labels.begin());
  if (panel.t0 < 1)
    throw_invalid(origin + ": no pre-treatment periods before " +
                  std::to_string(treat_period));
  if (panel.t0 >= panel.periods())
    throw_invalid(origin + ": no post-treatment periods at or after " +
                  std::to_string(treat_period));
  panel.validate();
  return panel;
}

Panel load_panel(const std::string& path, const std::string& treated_unit,
                 std::int64_t treat_period) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_invalid("cannot open panel file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_panel_csv(buf.str(), treated_unit, treat_period, path);
}

std::string panel_to_long_csv(const Panel& panel) {
  std::string out = "unit,period,outcome\n";
  for (int u = 0; u < panel.units(); ++u) {
    for (int p = 0; p < panel.periods(); ++p) {
      out += panel.unit_labels[u];
      out += ',';
      out += std::to_string(panel.period_labels[p]);
      out += ',';
      out += format_double(panel.outcomes(u, p));
      out += '\n';
    }
  }
  return out;
}

std::string panel_to_wide_csv(const Panel& panel) {
  std::string out = "period";
  for (const auto& label : panel.unit_labels) {
    out += ',';
    out += label;
  }
  out += '\n';
  for (int p = 0; p < panel.periods(); ++p) {
    out += std::to_string(panel.period_labels[p]);
    for (int u = 0; u < panel.units(); ++u) {
      out += ',';
      out += format_double(panel.outcomes(u, p));
    }
    out += '\n';
  }
  return out;
}

void save_panel(const Panel& panel, const std::string& path, bool wide) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_invalid("cannot write panel file '" + path + "'");
  out << (wide ? panel_to_wide_csv(panel) : panel_to_long_csv(panel));
}

Panel demean_pre(const Panel& panel) {
  panel.validate();
  Panel out = panel;
  Eigen::VectorXd pre_means =
      panel.outcomes.leftCols(panel.t0).rowwise().mean();
  out.outcomes.colwise() -= pre_means;
  return out;
}

Panel detrend_by_control_mean(const Panel& panel) {
  panel.validate();
  Panel out = panel;
  Eigen::RowVectorXd control_means =
      panel.outcomes.bottomRows(panel.controls()).colwise().mean();
  out.outcomes.rowwise() -= control_means;
  return out;
}

Panel difference_against_base(const Panel& panel, const std::string& base_unit) {
  panel.validate();
  if (base_unit == panel.unit_labels[0])
    throw_invalid("cannot difference against the treated unit '" + base_unit + "'");
  int base_row = -1;
  for (int u = 1; u < panel.units(); ++u)
    if (panel.unit_labels[u] == base_unit) base_row = u;
  if (base_row < 0)
    throw_invalid("base unit '" + base_unit + "' not present");
  if (panel.controls() < 2)
    throw_invalid("differencing needs at least two control units");

  Panel out;
  out.t0 = panel.t0;
  out.period_labels = panel.period_labels;
  out.outcomes.resize(panel.units() - 1, panel.periods());
  out.unit_labels.reserve(panel.units() - 1);
  Eigen::RowVectorXd base = panel.outcomes.row(base_row);
  int r = 0;
  for (int u = 0; u < panel.units(); ++u) {
    if (u == base_row) continue;
    out.outcomes.row(r) = panel.outcomes.row(u) - base;
    out.unit_labels.push_back(panel.unit_labels[u]);
    ++r;
  }
  return out;
}

}  // namespace syncon
