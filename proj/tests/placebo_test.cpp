#include "doctest.h"

#include "syncon/errors.hpp"
#include "syncon/estimators.hpp"
#include "syncon/panel.hpp"
#include "syncon/placebo.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

using namespace syncon;

namespace {

// Small panel of deterministic pseudo-random walks with distinct levels.
Panel walk_panel() {
  std::uint64_t s = 12345;
  const auto draw = [&s] {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 40) / 16777216.0 - 0.5;
  };
  Panel panel;
  panel.unit_labels = {"alder", "beech", "cedar", "dogwood", "elm"};
  panel.outcomes.resize(5, 20);
  for (int u = 0; u < 5; ++u) {
    double level = 1.5 * u + draw();
    for (int t = 0; t < 20; ++t) {
      level += draw();
      panel.outcomes(u, t) = level;
    }
  }
  for (int t = 0; t < 20; ++t) panel.period_labels.push_back(1970 + t);
  panel.t0 = 15;
  return panel;
}

// Wider panel: nine controls make the instrumented fit demand long
// histories (more training periods than early window years can provide).
Panel wide_panel() {
  std::uint64_t s = 98765;
  const auto draw = [&s] {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 40) / 16777216.0 - 0.5;
  };
  Panel panel;
  panel.outcomes.resize(10, 20);
  for (int u = 0; u < 10; ++u) {
    panel.unit_labels.push_back("p" + std::to_string(u));
    double level = 0.8 * u + draw();
    for (int t = 0; t < 20; ++t) {
      level += draw();
      panel.outcomes(u, t) = level;
    }
  }
  for (int t = 0; t < 20; ++t) panel.period_labels.push_back(1970 + t);
  panel.t0 = 15;
  return panel;
}

const Panel& fixture_panel() {
  static const Panel panel = load_panel(
      std::string(SYNCON_FIXTURE_DIR) + "/placebo_panel.csv", "aspen", 1989);
  return panel;
}

const PlaceboReport& fixture_report() {
  static const PlaceboReport report = [] {
    PlaceboConfig config;
    config.window_start = 1980;
    config.window_end = 1988;
    config.methods = {parse_estimator("sc"), parse_estimator("did")};
    return run_placebo(fixture_panel(), config);
  }();
  return report;
}

const PlaceboCell* find_cell(const PlaceboReport& report,
                             const std::string& unit, const std::string& method,
                             std::int64_t year) {
  for (const PlaceboCell& cell : report.cells)
    if (cell.unit == unit && cell.method == method && cell.year == year)
      return &cell;
  return nullptr;
}

const PlaceboScore* find_score(const PlaceboReport& report,
                               const std::string& unit,
                               const std::string& method) {
  for (const PlaceboScore& score : report.scores)
    if (score.unit == unit && score.method == method) return &score;
  return nullptr;
}

// Independent one-step-ahead refit: truncate the panel at the target year
// with the named unit first and read the method's first post-period
// counterfactual.
double oracle_prediction(const Panel& panel, const std::string& unit,
                         const EstimatorKind& method, std::int64_t year) {
  int unit_row = -1, year_col = -1;
  for (int u = 0; u < panel.units(); ++u)
    if (panel.unit_labels[u] == unit) unit_row = u;
  for (int t = 0; t < panel.periods(); ++t)
    if (panel.period_labels[t] == year) year_col = t;
  REQUIRE(unit_row >= 0);
  REQUIRE(year_col >= 1);

  Panel window;
  window.outcomes.resize(panel.units(), year_col + 1);
  window.outcomes.row(0) = panel.outcomes.row(unit_row).head(year_col + 1);
  window.unit_labels.push_back(unit);
  int row = 1;
  for (int u = 0; u < panel.units(); ++u) {
    if (u == unit_row) continue;
    window.outcomes.row(row++) = panel.outcomes.row(u).head(year_col + 1);
    window.unit_labels.push_back(panel.unit_labels[u]);
  }
  window.period_labels.assign(panel.period_labels.begin(),
                              panel.period_labels.begin() + year_col + 1);
  window.t0 = year_col;

  const EstimateReport fit = estimate(window, method);
  return panel.outcomes(unit_row, year_col) - fit.effects.effects[0];
}

// Minimal XML well-formedness check: balanced tags, quoted attributes,
// known entities, a single root element.
bool xml_well_formed(const std::string& text) {
  const std::size_t n = text.size();
  std::size_t i = 0;
  const auto is_space = [&](std::size_t k) {
    return std::isspace(static_cast<unsigned char>(text[k])) != 0;
  };
  while (i < n && is_space(i)) ++i;
  if (text.compare(i, 5, "<?xml") == 0) {
    const std::size_t end = text.find("?>", i);
    if (end == std::string::npos) return false;
    i = end + 2;
  }
  std::vector<std::string> stack;
  bool root_done = false;
  while (i < n) {
    if (text[i] == '<') {
      if (i + 1 < n && text[i + 1] == '/') {
        const std::size_t end = text.find('>', i);
        if (end == std::string::npos) return false;
        const std::string name = text.substr(i + 2, end - i - 2);
        if (stack.empty() || stack.back() != name) return false;
        stack.pop_back();
        if (stack.empty()) root_done = true;
        i = end + 1;
        continue;
      }
      if (root_done) return false;  // a second root element
      std::size_t j = i + 1;
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                       text[j] == '-' || text[j] == '_' || text[j] == ':'))
        ++j;
      if (j == i + 1) return false;
      const std::string name = text.substr(i + 1, j - i - 1);
      bool in_quote = false, self_closing = false;
      while (j < n) {
        const char c = text[j];
        if (in_quote) {
          if (c == '"') in_quote = false;
        } else if (c == '"') {
          in_quote = true;
        } else if (c == '<') {
          return false;
        } else if (c == '/' && j + 1 < n && text[j + 1] == '>') {
          self_closing = true;
          ++j;
          break;
        } else if (c == '>') {
          break;
        }
        ++j;
      }
      if (j >= n || in_quote) return false;
      if (self_closing) {
        if (stack.empty()) root_done = true;
      } else {
        stack.push_back(name);
      }
      i = j + 1;
      continue;
    }
    if (text[i] == '&') {
      static const char* entities[] = {"&amp;", "&lt;", "&gt;", "&quot;",
                                       "&apos;"};
      bool matched = false;
      for (const char* e : entities)
        if (text.compare(i, std::char_traits<char>::length(e), e) == 0) {
          i += std::char_traits<char>::length(e);
          matched = true;
          break;
        }
      if (!matched) return false;
      continue;
    }
    if (stack.empty() && !is_space(i)) return false;  // text outside elements
    ++i;
  }
  return stack.empty() && root_done;
}

struct Circle {
  double cx = 0.0;
  double cy = 0.0;
  std::string label;
};

std::vector<Circle> parse_circles(const std::string& svg) {
  std::vector<Circle> out;
  std::size_t pos = 0;
  while ((pos = svg.find("<circle ", pos)) != std::string::npos) {
    const std::size_t cx_at = svg.find("cx=\"", pos);
    const std::size_t cy_at = svg.find("cy=\"", pos);
    const std::size_t title_at = svg.find("<title>", pos);
    const std::size_t title_end = svg.find("</title>", pos);
    REQUIRE(cx_at != std::string::npos);
    REQUIRE(cy_at != std::string::npos);
    REQUIRE(title_at != std::string::npos);
    REQUIRE(title_end != std::string::npos);
    Circle c;
    c.cx = std::strtod(svg.c_str() + cx_at + 4, nullptr);
    c.cy = std::strtod(svg.c_str() + cy_at + 4, nullptr);
    c.label = svg.substr(title_at + 7, title_end - title_at - 7);
    out.push_back(c);
    pos = title_end + 8;
  }
  return out;
}

// Reimplementation of the scatter's shared data-to-pixel map: 5%-padded
// joint range (degenerate ranges split by +-1) over a 466x450 plot area
// anchored at (70, 46).
struct ScatterOracle {
  double lo = 0.0, hi = 1.0;
  bool seen = false;

  void include(double v) {
    if (!std::isfinite(v)) return;
    if (!seen) {
      lo = hi = v;
      seen = true;
      return;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!seen) {
      lo = 0.0;
      hi = 1.0;
      return;
    }
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
      return;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  double sx(double v) const { return 70.0 + (v - lo) / (hi - lo) * 466.0; }
  double sy(double v) const {
    return 46.0 + 450.0 - (v - lo) / (hi - lo) * 450.0;
  }
};

}  // namespace

TEST_CASE("identical units give every method a zero placebo error") {
  Panel panel;
  panel.outcomes.resize(6, 24);
  for (int t = 0; t < 24; ++t) {
    const double value = 0.3 * t + 2.0 * std::sin(0.5 * t);
    for (int u = 0; u < 6; ++u) panel.outcomes(u, t) = value;
    panel.period_labels.push_back(2000 + t);
  }
  panel.unit_labels = {"a", "b", "c", "d", "e", "f"};
  panel.t0 = 18;

  PlaceboConfig config;
  config.window_start = 2012;
  config.window_end = 2016;
  config.methods = {parse_estimator("sc"),  parse_estimator("sc_demeaned"),
                    parse_estimator("did"), parse_estimator("sc_mean_predictor"),
                    parse_estimator("sc_iv"), parse_estimator("ife:1")};

  const PlaceboReport report = run_placebo(panel, config);
  REQUIRE(report.scores.size() == 6 * 6);
  for (const PlaceboScore& score : report.scores) {
    CHECK(score.failures == 0);
    CHECK(score.rmse <= 1e-8);
  }
  for (const PlaceboCell& cell : report.cells) {
    CHECK(cell.error.empty());
    CHECK(std::abs(cell.prediction - cell.truth) <= 1e-8);
  }
}

TEST_CASE("every grid cell equals a from-scratch refit") {
  const Panel panel = walk_panel();
  PlaceboConfig config;
  config.window_start = 1978;
  config.window_end = 1983;
  config.methods = {parse_estimator("sc"), parse_estimator("sc_demeaned"),
                    parse_estimator("did")};

  const PlaceboReport report = run_placebo(panel, config);
  REQUIRE(report.cells.size() == 5 * 3 * 6);

  for (const PlaceboCell& cell : report.cells) {
    REQUIRE(cell.error.empty());
    const double oracle = oracle_prediction(
        panel, cell.unit, parse_estimator(cell.method), cell.year);
    CHECK(cell.prediction == doctest::Approx(oracle).epsilon(1e-9));
  }

  // Scores reduce their own cells exactly.
  for (const PlaceboScore& score : report.scores) {
    double sum_sq = 0.0;
    int count = 0;
    for (const PlaceboCell& cell : report.cells) {
      if (cell.unit != score.unit || cell.method != score.method) continue;
      const double err = cell.truth - cell.prediction;
      sum_sq += err * err;
      ++count;
    }
    REQUIRE(count == 6);
    CHECK(score.rmse == std::sqrt(sum_sq / 6));
  }
}

TEST_CASE("predictions never see the target year or anything after it") {
  const Panel base = walk_panel();
  PlaceboConfig config;
  config.window_start = 1978;
  config.window_end = 1983;
  config.methods = {parse_estimator("sc"), parse_estimator("did")};
  const PlaceboReport before = run_placebo(base, config);

  SUBCASE("later periods are invisible") {
    // Perturbing every unit at periods after 1980 cannot change any
    // prediction for 1980 or earlier.
    Panel mutated = base;
    for (int t = 11; t < 20; ++t)
      mutated.outcomes.col(t).array() += 1000.0;
    const PlaceboReport after = run_placebo(mutated, config);
    bool saw_late_change = false;
    for (std::size_t i = 0; i < before.cells.size(); ++i) {
      const PlaceboCell& a = before.cells[i];
      const PlaceboCell& b = after.cells[i];
      REQUIRE(a.unit == b.unit);
      REQUIRE(a.year == b.year);
      if (a.year <= 1980) {
        CHECK(b.prediction == a.prediction);
        CHECK(b.truth == a.truth);
      } else if (b.prediction != a.prediction) {
        saw_late_change = true;
      }
    }
    CHECK(saw_late_change);  // the mutation was not a no-op
  }

  SUBCASE("the predicted unit's own target-year outcome is held out") {
    Panel mutated = base;
    mutated.outcomes(2, 10) += 7.5;  // cedar, 1980
    const PlaceboReport after = run_placebo(mutated, config);
    const PlaceboCell* a = find_cell(before, "cedar", "sc", 1980);
    const PlaceboCell* b = find_cell(after, "cedar", "sc", 1980);
    REQUIRE(a != nullptr);
    REQUIRE(b != nullptr);
    CHECK(b->prediction == a->prediction);
    CHECK(b->truth == doctest::Approx(a->truth + 7.5).epsilon(1e-12));

    // The same outcome is training data for cedar's later years.
    const PlaceboCell* a_later = find_cell(before, "cedar", "sc", 1982);
    const PlaceboCell* b_later = find_cell(after, "cedar", "sc", 1982);
    REQUIRE(a_later != nullptr);
    REQUIRE(b_later != nullptr);
    CHECK(b_later->prediction != a_later->prediction);
  }

  SUBCASE("earlier periods do feed the fit") {
    Panel mutated = base;
    mutated.outcomes(2, 5) += 7.5;  // cedar, before the window
    const PlaceboReport after = run_placebo(mutated, config);
    const PlaceboCell* a = find_cell(before, "cedar", "sc", 1980);
    const PlaceboCell* b = find_cell(after, "cedar", "sc", 1980);
    REQUIRE(a != nullptr);
    REQUIRE(b != nullptr);
    CHECK(b->prediction != a->prediction);
  }
}

TEST_CASE("an off-hull unit needs the intercept: demeaning rescues it") {
  // Common unit slope, treated level far above every control: weights that
  // sum to one cannot close the gap, an intercept closes it exactly.
  Panel panel;
  panel.outcomes.resize(4, 16);
  const double levels[4] = {10.0, 0.0, 1.0, 2.0};
  for (int t = 0; t < 16; ++t) {
    for (int u = 0; u < 4; ++u) panel.outcomes(u, t) = levels[u] + 1.0 * t;
    panel.period_labels.push_back(1990 + t);
  }
  panel.unit_labels = {"high", "low0", "low1", "low2"};
  panel.t0 = 12;

  PlaceboConfig config;
  config.window_start = 2000;
  config.window_end = 2004;
  config.methods = {parse_estimator("sc"), parse_estimator("sc_demeaned")};
  const PlaceboReport report = run_placebo(panel, config);

  const PlaceboScore* plain = find_score(report, "high", "sc");
  const PlaceboScore* demeaned = find_score(report, "high", "sc_demeaned");
  REQUIRE(plain != nullptr);
  REQUIRE(demeaned != nullptr);
  CHECK(plain->rmse == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(demeaned->rmse <= 1e-9);
}

TEST_CASE("fixture sweep: recomputable scores and artifact shape") {
  const PlaceboReport& report = fixture_report();
  const int n_units = fixture_panel().units();
  REQUIRE(static_cast<int>(report.scores.size()) == n_units * 2);
  REQUIRE(static_cast<int>(report.cells.size()) == n_units * 2 * 9);

  for (const PlaceboScore& score : report.scores) {
    CHECK(score.failures == 0);
    double sum_sq = 0.0;
    int count = 0;
    for (const PlaceboCell& cell : report.cells) {
      if (cell.unit != score.unit || cell.method != score.method) continue;
      const double err = cell.truth - cell.prediction;
      sum_sq += err * err;
      ++count;
    }
    REQUIRE(count == 9);
    CHECK(score.rmse == std::sqrt(sum_sq / 9));
  }

  // Spot refits against the independent oracle.
  for (const std::string unit : {"aspen", "hazel", "willow"}) {
    for (std::int64_t year : {1980, 1984, 1988}) {
      const PlaceboCell* cell = find_cell(report, unit, "sc", year);
      REQUIRE(cell != nullptr);
      const double oracle = oracle_prediction(fixture_panel(), unit,
                                              parse_estimator("sc"), year);
      CHECK(cell->prediction == doctest::Approx(oracle).epsilon(1e-9));
    }
  }

  const std::string scores_csv = placebo_scores_csv(report);
  CHECK(scores_csv.rfind("unit,method,rmse\n", 0) == 0);
  const std::string cells_csv = placebo_cells_csv(report);
  CHECK(cells_csv.rfind("unit,method,year,truth,prediction\n", 0) == 0);
  std::size_t rows = 0;
  for (char c : cells_csv)
    if (c == '\n') ++rows;
  CHECK(rows == report.cells.size() + 1);
}

TEST_CASE("scatter artifact mirrors the report") {
  SUBCASE("fixture scatter: coordinates recompute from the scores") {
    const PlaceboReport& report = fixture_report();
    const std::string svg = placebo_scatter(report, "sc", "did");
    CHECK(xml_well_formed(svg));
    const std::vector<Circle> circles = parse_circles(svg);
    REQUIRE(static_cast<int>(circles.size()) == fixture_panel().units());

    ScatterOracle oracle;
    for (const PlaceboScore& s : report.scores) oracle.include(s.rmse);
    oracle.finish();

    for (const Circle& c : circles) {
      const PlaceboScore* sx = find_score(report, c.label, "sc");
      const PlaceboScore* sy = find_score(report, c.label, "did");
      REQUIRE(sx != nullptr);
      REQUIRE(sy != nullptr);
      CHECK(std::abs(c.cx - oracle.sx(sx->rmse)) <= 0.011);
      CHECK(std::abs(c.cy - oracle.sy(sy->rmse)) <= 0.011);
    }
  }

  SUBCASE("equal scores land on the identity line") {
    PlaceboReport report;
    for (double rmse : {1.0, 2.0, 3.5}) {
      const std::string unit = "u" + std::to_string(static_cast<int>(rmse * 2));
      report.scores.push_back({unit, "sc", rmse, 0});
      report.scores.push_back({unit, "did", rmse, 0});
    }
    const std::string svg = placebo_scatter(report, "sc", "did");
    const std::vector<Circle> circles = parse_circles(svg);
    REQUIRE(circles.size() == 3);
    for (const Circle& c : circles) {
      const double fx = (c.cx - 70.0) / 466.0;
      const double fy = (46.0 + 450.0 - c.cy) / 450.0;
      CHECK(std::abs(fx - fy) <= 1e-4);
    }
  }

  SUBCASE("single point still renders a well-formed document") {
    PlaceboReport report;
    report.scores.push_back({"only", "sc", 1.25, 0});
    report.scores.push_back({"only", "did", 0.75, 0});
    const std::string svg = placebo_scatter(report, "sc", "did");
    CHECK(xml_well_formed(svg));
    CHECK(parse_circles(svg).size() == 1);
  }

  SUBCASE("units missing a score are skipped") {
    PlaceboReport report;
    report.scores.push_back({"a", "sc", 1.0, 0});
    report.scores.push_back({"a", "did", 1.5, 0});
    report.scores.push_back(
        {"b", "sc", std::numeric_limits<double>::quiet_NaN(), 2});
    report.scores.push_back({"b", "did", 1.5, 0});
    CHECK(parse_circles(placebo_scatter(report, "sc", "did")).size() == 1);
  }

  SUBCASE("asking for an absent method is an error") {
    CHECK_THROWS_AS(placebo_scatter(fixture_report(), "sc", "ife:4"), Error);
  }
}

TEST_CASE("reassign_treated moves one unit and nothing else") {
  const Panel panel = walk_panel();
  const Panel turned = reassign_treated(panel, "dogwood");
  REQUIRE(turned.unit_labels.size() == 5);
  CHECK(turned.unit_labels[0] == "dogwood");
  CHECK(turned.unit_labels[1] == "alder");
  CHECK(turned.unit_labels[2] == "beech");
  CHECK(turned.unit_labels[3] == "cedar");
  CHECK(turned.unit_labels[4] == "elm");
  CHECK((turned.outcomes.row(0).array() == panel.outcomes.row(3).array()).all());
  CHECK((turned.outcomes.row(4).array() == panel.outcomes.row(4).array()).all());
  CHECK(turned.t0 == panel.t0);
  CHECK(turned.period_labels == panel.period_labels);

  const Panel same = reassign_treated(panel, "alder");
  CHECK((same.outcomes.array() == panel.outcomes.array()).all());
  CHECK(same.unit_labels == panel.unit_labels);

  CHECK_THROWS_AS(reassign_treated(panel, "sequoia"), Error);
}

TEST_CASE("window and configuration validation") {
  const Panel panel = walk_panel();
  PlaceboConfig good;
  good.window_start = 1978;
  good.window_end = 1983;
  good.methods = {parse_estimator("sc")};
  CHECK_NOTHROW(run_placebo(panel, good));

  PlaceboConfig c = good;
  c.window_end = 1977;
  CHECK_THROWS_AS(run_placebo(panel, c), Error);

  c = good;
  c.methods.clear();
  CHECK_THROWS_AS(run_placebo(panel, c), Error);

  c = good;
  c.min_train = 0;
  CHECK_THROWS_AS(run_placebo(panel, c), Error);

  c = good;
  c.methods = {parse_estimator("sc_infeasible")};
  CHECK_THROWS_AS(run_placebo(panel, c), Error);

  c = good;
  c.methods = {EstimatorKind{EstimatorTag::ife, 0}};
  CHECK_THROWS_AS(run_placebo(panel, c), Error);

  c = good;
  c.window_start = 1969;  // not a panel period
  CHECK_THROWS_AS(run_placebo(panel, c), Error);

  c = good;
  c.window_end = 1995;  // not a panel period
  CHECK_THROWS_AS(run_placebo(panel, c), Error);

  // The first window year must leave min_train training years.
  c = good;
  c.window_start = 1973;  // only 3 earlier periods
  CHECK_THROWS_AS(run_placebo(panel, c), Error);
  c.window_start = 1975;  // exactly 5: allowed
  CHECK_NOTHROW(run_placebo(panel, c));
}

TEST_CASE("per-cell failures are explicit and scores turn undefined") {
  // The instrumented fit needs more training periods than any window year
  // provides here, so every one of its cells fails while other methods
  // stay healthy.
  const Panel panel = wide_panel();
  PlaceboConfig config;
  config.window_start = 1975;
  config.window_end = 1977;
  config.methods = {parse_estimator("sc"), parse_estimator("sc_iv")};
  const PlaceboReport report = run_placebo(panel, config);

  for (const PlaceboScore& score : report.scores) {
    if (score.method == "sc_iv") {
      CHECK(score.failures == 3);
      CHECK(std::isnan(score.rmse));
    } else {
      CHECK(score.failures == 0);
      CHECK(std::isfinite(score.rmse));
    }
  }
  for (const PlaceboCell& cell : report.cells) {
    if (cell.method == "sc_iv") {
      CHECK_FALSE(cell.error.empty());
      CHECK(std::isnan(cell.prediction));
      CHECK(std::isfinite(cell.truth));
    }
  }

  // Undefined scores print as empty fields, failed cells keep their truth.
  const std::string scores_csv = placebo_scores_csv(report);
  CHECK(scores_csv.find("p0,sc_iv,\n") != std::string::npos);
  const std::string cells_csv = placebo_cells_csv(report);
  CHECK(cells_csv.find("p0,sc_iv,1975,") != std::string::npos);
}
