#include "syncon/config.hpp"

#include "syncon/asymptotics.hpp"
#include "syncon/dgp.hpp"
#include "syncon/errors.hpp"
#include "syncon/estimators.hpp"
#include "syncon/mc.hpp"
#include "syncon/panel.hpp"
#include "syncon/placebo.hpp"
#include "syncon/qp.hpp"
#include "syncon/svg.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#ifndef SYNCON_VERSION
#define SYNCON_VERSION "0.0.0"
#endif

namespace syncon {

namespace {

using nlohmann::json;

std::string key_path(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return it.key() == k; });
    if (!known)
      throw_invalid("config: unknown key '" +
                    (path.empty() ? it.key() : path + "." + it.key()) + "'");
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

[[noreturn]] void wrong_type(const std::string& path, const char* key,
                             const char* want) {
  throw_invalid("config: " + key_path(path, key) + " must be " + want);
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) wrong_type(path, key, "a number");
  return v->get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key,
            int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) wrong_type(path, key, "an integer");
  return v->get<int>();
}

int require_int(const json& obj, const std::string& path, const char* key) {
  if (!find(obj, key))
    throw_invalid("config: missing " + key_path(path, key));
  return get_int(obj, path, key, 0);
}

std::uint64_t get_uint64(const json& obj, const std::string& path,
                         const char* key, std::uint64_t fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (v->is_number_unsigned()) return v->get<std::uint64_t>();
  if (v->is_number_integer() && v->get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v->get<std::int64_t>());
  wrong_type(path, key, "a nonnegative integer");
}

bool get_bool(const json& obj, const std::string& path, const char* key,
              bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) wrong_type(path, key, "a boolean");
  return v->get<bool>();
}

std::string require_string(const json& obj, const std::string& path,
                           const char* key) {
  const json* v = find(obj, key);
  if (!v) throw_invalid("config: missing " + key_path(path, key));
  if (!v->is_string()) wrong_type(path, key, "a string");
  return v->get<std::string>();
}

std::vector<double> get_double_array(const json& obj, const std::string& path,
                                     const char* key) {
  const json* v = find(obj, key);
  if (!v) return {};
  if (!v->is_array()) wrong_type(path, key, "an array of numbers");
  std::vector<double> out;
  out.reserve(v->size());
  for (const json& e : *v) {
    if (!e.is_number()) wrong_type(path, key, "an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> get_int_array(const json& obj, const std::string& path,
                               const char* key) {
  const json* v = find(obj, key);
  if (!v) return {};
  if (!v->is_array()) wrong_type(path, key, "an array of integers");
  std::vector<int> out;
  out.reserve(v->size());
  for (const json& e : *v) {
    if (!e.is_number_integer()) wrong_type(path, key, "an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::vector<std::string> get_string_array(const json& obj,
                                          const std::string& path,
                                          const char* key) {
  const json* v = find(obj, key);
  if (!v) return {};
  if (!v->is_array()) wrong_type(path, key, "an array of strings");
  std::vector<std::string> out;
  out.reserve(v->size());
  for (const json& e : *v) {
    if (!e.is_string()) wrong_type(path, key, "an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<long>(values.size()));
}

Eigen::MatrixXd get_matrix(const json& obj, const std::string& path,
                           const char* key) {
  const json* v = find(obj, key);
  if (!v) return {};
  if (!v->is_array()) wrong_type(path, key, "an array of number rows");
  const std::size_t rows = v->size();
  Eigen::MatrixXd out;
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = (*v)[i];
    if (!row.is_array()) wrong_type(path, key, "an array of number rows");
    if (i == 0) out.resize(rows, row.size());
    if (static_cast<long>(row.size()) != out.cols())
      throw_invalid("config: " + key_path(path, key) +
                    " rows have inconsistent lengths");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j].is_number()) wrong_type(path, key, "an array of number rows");
      out(static_cast<long>(i), static_cast<long>(j)) = row[j].get<double>();
    }
  }
  return out;
}

// ---------------------------------------------------------------------
// Document validation: one pass over every present section so that an
// unknown key anywhere is reported no matter which command runs.

const json* section(const json& doc, const char* name) {
  const json* s = find(doc, name);
  if (s && !s->is_object())
    throw_invalid("config: section '" + std::string(name) +
                  "' must be an object");
  return s;
}

void validate_document(const json& doc) {
  if (!doc.is_object()) throw_invalid("config: top level must be an object");
  check_keys(doc, "", {"panel", "dgp", "mc", "limit", "placebo", "output",
                       "fit", "simulate"});
  if (const json* s = section(doc, "panel"))
    check_keys(*s, "panel", {"path", "treated", "treatment_period"});
  if (const json* s = section(doc, "dgp"))
    check_keys(*s, "dgp",
               {"J", "K", "R", "sigma2", "rho", "delta_variance", "post_shift",
                "fixed_effects", "trend", "hetero", "treatment_effect"});
  if (const json* s = section(doc, "mc"))
    check_keys(*s, "mc",
               {"label", "t0_grid", "t1", "reps", "estimators", "base_seed",
                "include_asymptotic_row", "average_post"});
  if (const json* s = section(doc, "limit"))
    check_keys(*s, "limit",
               {"mu0", "mu", "omega0", "Omega0", "sigma2", "post_mean",
                "theta0", "theta"});
  if (const json* s = section(doc, "placebo"))
    check_keys(*s, "placebo", {"window", "methods", "min_train"});
  if (const json* s = section(doc, "output")) {
    check_keys(*s, "output", {"directory", "formats"});
    for (const std::string& f : get_string_array(*s, "output", "formats"))
      if (f != "csv" && f != "json" && f != "svg")
        throw_invalid("config: output.formats entries must be csv, json or "
                      "svg (got '" + f + "')");
  }
  if (const json* s = section(doc, "fit"))
    check_keys(*s, "fit", {"method", "nonneg", "sum_to_one", "intercept"});
  if (const json* s = section(doc, "simulate"))
    check_keys(*s, "simulate", {"t0", "t1", "seed", "wide"});
}

// ---------------------------------------------------------------------
// Section readers.

Panel read_panel(const json& doc, const char* command) {
  const json* s = section(doc, "panel");
  if (!s)
    throw_invalid(std::string("config: ") + command +
                  " needs a panel section");
  const std::string path = require_string(*s, "panel", "path");
  const std::string treated = require_string(*s, "panel", "treated");
  const json* period = find(*s, "treatment_period");
  if (!period || !period->is_number_integer())
    throw_invalid("config: panel.treatment_period must be an integer");
  return load_panel(path, treated, period->get<std::int64_t>());
}

FactorDGP read_dgp(const json& doc, const char* command) {
  const json* s = section(doc, "dgp");
  if (!s)
    throw_invalid(std::string("config: ") + command + " needs a dgp section");
  FactorDGP dgp;
  dgp.J = get_int(*s, "dgp", "J", dgp.J);
  dgp.K = get_int(*s, "dgp", "K", dgp.K);
  dgp.R = get_int(*s, "dgp", "R", dgp.R);
  dgp.sigma2 = get_number(*s, "dgp", "sigma2", dgp.sigma2);
  dgp.rho = get_number(*s, "dgp", "rho", dgp.rho);
  dgp.delta_variance = get_number(*s, "dgp", "delta_variance",
                                  dgp.delta_variance);
  dgp.post_shift = get_number(*s, "dgp", "post_shift", dgp.post_shift);
  dgp.fixed_effects = get_double_array(*s, "dgp", "fixed_effects");
  dgp.trend = get_int(*s, "dgp", "trend", dgp.trend);
  dgp.hetero = get_double_array(*s, "dgp", "hetero");
  dgp.treatment_effect =
      get_number(*s, "dgp", "treatment_effect", dgp.treatment_effect);
  dgp.validate();
  return dgp;
}

EstimatorKind read_estimator(const std::string& name) {
  return parse_estimator(name);
}

McConfig read_mc(const json& doc) {
  const json* s = section(doc, "mc");
  if (!s) throw_invalid("config: mc needs an mc section");
  McConfig config;
  config.dgp = read_dgp(doc, "mc");
  const json* label = find(*s, "label");
  if (label) {
    if (!label->is_string()) wrong_type("mc", "label", "a string");
    config.label = label->get<std::string>();
  }
  config.t0_grid = get_int_array(*s, "mc", "t0_grid");
  config.t1 = get_int(*s, "mc", "t1", config.t1);
  config.reps = get_int(*s, "mc", "reps", config.reps);
  for (const std::string& name : get_string_array(*s, "mc", "estimators"))
    config.estimators.push_back(read_estimator(name));
  config.base_seed = get_uint64(*s, "mc", "base_seed", config.base_seed);
  config.include_asymptotic_row =
      get_bool(*s, "mc", "include_asymptotic_row", false);
  config.average_post = get_bool(*s, "mc", "average_post", false);
  config.validate();
  return config;
}

LimitSpec read_limit(const json& s) {
  LimitSpec spec;
  spec.mu0 = to_vector(get_double_array(s, "limit", "mu0"));
  spec.mu = get_matrix(s, "limit", "mu");
  if (spec.mu0.size() == 0 || spec.mu.size() == 0)
    throw_invalid("config: limit needs mu0 and mu");
  const int F = static_cast<int>(spec.mu0.size());
  const auto omega0 = get_double_array(s, "limit", "omega0");
  spec.omega0 =
      omega0.empty() ? Eigen::VectorXd::Zero(F).eval() : to_vector(omega0);
  const Eigen::MatrixXd Omega0 = get_matrix(s, "limit", "Omega0");
  spec.Omega0 =
      Omega0.size() == 0 ? Eigen::MatrixXd::Identity(F, F).eval() : Omega0;
  spec.sigma2 = get_number(s, "limit", "sigma2", 0.0);
  const auto post_mean = get_double_array(s, "limit", "post_mean");
  spec.post_mean = post_mean.empty() ? Eigen::VectorXd::Zero(F).eval()
                                     : to_vector(post_mean);
  spec.theta0 = to_vector(get_double_array(s, "limit", "theta0"));
  spec.theta = get_matrix(s, "limit", "theta");
  if (spec.theta.size() == 0 && spec.theta0.size() == 0) {
    spec.theta0.resize(0);
    spec.theta.resize(spec.mu.rows(), 0);
  }
  spec.validate();
  return spec;
}

PlaceboConfig read_placebo(const json& doc) {
  const json* s = section(doc, "placebo");
  if (!s) throw_invalid("config: placebo needs a placebo section");
  PlaceboConfig config;
  const std::vector<int> window = get_int_array(*s, "placebo", "window");
  if (window.size() != 2)
    throw_invalid("config: placebo.window must be [first_year, last_year]");
  config.window_start = window[0];
  config.window_end = window[1];
  for (const std::string& name : get_string_array(*s, "placebo", "methods"))
    config.methods.push_back(read_estimator(name));
  config.min_train = get_int(*s, "placebo", "min_train", config.min_train);
  config.validate();
  return config;
}

// ---------------------------------------------------------------------
// Shared artifact helpers.

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string manifest_json(const std::string& command, const json& doc,
                          std::uint64_t seed) {
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(doc.dump())));
  json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = hash;
  manifest["seed"] = seed;
  manifest["version"] = SYNCON_VERSION;
  return manifest.dump(2) + "\n";
}

json diagnostics_json(const std::map<std::string, double>& diagnostics) {
  json out = json::object();
  for (const auto& [key, value] : diagnostics) out[key] = value;
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// ---------------------------------------------------------------------
// Commands.

ArtifactMap cmd_fit(const json& doc) {
  const json* s = section(doc, "fit");
  if (!s) throw_invalid("config: fit needs a fit section");
  const std::string method = require_string(*s, "fit", "method");
  EstimatorKind kind;
  if (method == "custom") {
    kind.tag = EstimatorTag::custom;
    kind.constraints.nonneg = get_bool(*s, "fit", "nonneg", true);
    kind.constraints.sum_to_one = get_bool(*s, "fit", "sum_to_one", true);
    kind.constraints.intercept = get_bool(*s, "fit", "intercept", false);
  } else {
    kind = read_estimator(method);
  }
  const Panel panel = read_panel(doc, "fit");
  const EstimateReport report = estimate(panel, kind);

  std::ostringstream weights;
  weights << "unit,weight\n";
  for (long j = 0; j < report.weights.size(); ++j)
    weights << panel.unit_labels[static_cast<std::size_t>(j) + 1] << ','
            << format_double(report.weights[j]) << '\n';

  std::ostringstream effects;
  effects << "period,effect\n";
  for (long t = 0; t < report.effects.effects.size(); ++t)
    effects << report.effects.period_labels[static_cast<std::size_t>(t)] << ','
            << format_double(report.effects.effects[t]) << '\n';

  json summary;
  summary["method"] = estimator_name(report.kind);
  summary["pre_rmspe"] = report.pre_rmspe;
  summary["intercept"] = report.intercept;
  summary["diagnostics"] = diagnostics_json(report.diagnostics);

  ArtifactMap artifacts;
  artifacts["weights.csv"] = weights.str();
  artifacts["effects.csv"] = effects.str();
  artifacts["summary.json"] = summary.dump(2) + "\n";
  artifacts["manifest.json"] = manifest_json("fit", doc, 0);
  return artifacts;
}

ArtifactMap cmd_simulate(const json& doc) {
  const FactorDGP dgp = read_dgp(doc, "simulate");
  const json* s = section(doc, "simulate");
  if (!s) throw_invalid("config: simulate needs a simulate section");
  const int t0 = require_int(*s, "simulate", "t0");
  const int t1 = require_int(*s, "simulate", "t1");
  const std::uint64_t seed = get_uint64(*s, "simulate", "seed", 0);
  const bool wide = get_bool(*s, "simulate", "wide", false);

  const Panel panel = simulate(dgp, t0, t1, SimSeed{seed, 0});
  ArtifactMap artifacts;
  artifacts["panel.csv"] =
      wide ? panel_to_wide_csv(panel) : panel_to_long_csv(panel);
  artifacts["manifest.json"] = manifest_json("simulate", doc, seed);
  return artifacts;
}

json mc_summary_json(const McSummary& summary) {
  const bool has_walk = summary.config.dgp.R > 0;
  json cells = json::array();
  for (const McCell& cell : summary.cells) {
    json c;
    c["panel"] = cell.panel_label;
    if (cell.asymptotic)
      c["t0"] = "inf";
    else
      c["t0"] = cell.t0;
    c["estimator"] = cell.estimator;
    c["mu_hat1"] = cell.mu_hat1;
    c["theta_hat1"] = has_walk ? json(cell.theta_hat1) : json();
    c["bias"] = cell.bias;
    c["se"] = cell.se;
    c["mc_error"] = cell.mc_error;
    c["reps"] = cell.reps;
    c["seed"] = cell.seed;
    if (!cell.error.empty()) c["error"] = cell.error;
    cells.push_back(c);
  }
  json out;
  out["label"] = summary.config.label;
  out["cells"] = cells;
  return out;
}

ArtifactMap cmd_mc(const json& doc, int workers) {
  const McConfig config = read_mc(doc);
  const McSummary summary = run_mc(config, workers);
  ArtifactMap artifacts;
  artifacts["mc_summary.csv"] = mc_summary_csv(summary);
  artifacts["mc_summary.json"] = mc_summary_json(summary).dump(2) + "\n";
  artifacts["manifest.json"] = manifest_json("mc", doc, config.base_seed);
  return artifacts;
}

ArtifactMap cmd_asymptotics(const json& doc) {
  const json* limit_section = section(doc, "limit");
  const json* dgp_section = section(doc, "dgp");
  if (!limit_section && !dgp_section)
    throw_invalid("config: asymptotics needs a limit or dgp section");

  FactorDGP dgp;
  const bool has_dgp = dgp_section != nullptr && !limit_section;
  LimitSpec spec;
  if (limit_section) {
    spec = read_limit(*limit_section);
  } else {
    dgp = read_dgp(doc, "asymptotics");
    spec = limit_spec(dgp);
  }
  const int J = spec.controls();

  struct Row {
    std::string estimator;
    LimitResult limit;
    std::string error;
  };
  std::vector<Row> rows;
  rows.push_back({"sc", {}, {}});
  rows.push_back({"sc_demeaned", {}, {}});
  rows.push_back({"did", {}, {}});
  rows.push_back({"sc_infeasible", {}, {}});
  for (Row& row : rows) {
    try {
      if (row.estimator == "sc")
        row.limit = limit_weights(spec, ConstraintSet{true, true, false});
      else if (row.estimator == "sc_demeaned")
        row.limit = limit_weights(spec, ConstraintSet{true, true, true});
      else if (row.estimator == "did")
        row.limit = evaluate_limit(
            spec, Eigen::VectorXd::Constant(J, 1.0 / J), true);
      else {
        Eigen::MatrixXd loadings(J, spec.factors() + spec.theta.cols());
        loadings.leftCols(spec.factors()) = spec.mu;
        loadings.rightCols(spec.theta.cols()) = spec.theta;
        Eigen::VectorXd target(spec.factors() + spec.theta0.size());
        target.head(spec.factors()) = spec.mu0;
        target.tail(spec.theta0.size()) = spec.theta0;
        row.limit = evaluate_limit(
            spec, exact_loading_weights(loadings, target), false);
      }
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
  }

  std::ostringstream csv;
  csv << "estimator,mu_hat1,theta_hat1,bias,se\n";
  json detail;
  for (const Row& row : rows) {
    json entry;
    if (!row.error.empty()) {
      entry["error"] = row.error;
      detail[row.estimator] = entry;
      continue;
    }
    const double se = std::sqrt(row.limit.asymptotic_variance);
    std::string mu_mass, theta_mass;
    if (has_dgp) {
      const Misallocation masses = misallocation(row.limit.weights, dgp);
      mu_mass = format_double(masses.mu_mass);
      theta_mass = dgp.R > 0 ? format_double(masses.theta_mass) : "";
      entry["mu_mass"] = masses.mu_mass;
      if (dgp.R > 0) entry["theta_mass"] = masses.theta_mass;
      entry["fe_mass"] = masses.fe_mass;
    }
    csv << row.estimator << ',' << mu_mass << ',' << theta_mass << ','
        << format_double(row.limit.asymptotic_bias) << ','
        << (std::isinf(se) ? "inf" : format_double(se)) << '\n';
    entry["weights"] = vector_json(row.limit.weights);
    entry["reconstructed_loadings"] =
        vector_json(row.limit.reconstructed_loadings);
    entry["intercept"] = row.limit.intercept;
    entry["bias"] = row.limit.asymptotic_bias;
    entry["variance"] = row.limit.asymptotic_variance;
    entry["se"] = se;
    entry["objective"] = row.limit.objective;
    entry["in_phi"] = row.limit.in_phi;
    entry["nonunique"] = row.limit.nonunique;
    detail[row.estimator] = entry;
  }

  // Closed-form cross-checks where the grouped designs apply.
  if (has_dgp && dgp.R == 0 && dgp.trend == 0 && dgp.fixed_effects.empty()) {
    json closed;
    if (dgp.K == 2 && dgp.J % 2 == 0)
      closed["gamma_two_groups"] = gamma_two_groups(dgp.sigma2, dgp.J);
    if (dgp.J == 2 * dgp.K && dgp.J >= 4 && dgp.J % 2 == 0)
      closed["gamma_many_groups"] = gamma_many_groups(dgp.sigma2, dgp.J);
    closed["limit_outside_group_mass"] =
        gamma_consistency_check(dgp.sigma2, dgp.J, dgp.K);
    detail["closed_form"] = closed;
  }

  ArtifactMap artifacts;
  artifacts["asymptotics.csv"] = csv.str();
  artifacts["asymptotics.json"] = detail.dump(2) + "\n";
  artifacts["manifest.json"] = manifest_json("asymptotics", doc, 0);
  return artifacts;
}

ArtifactMap cmd_placebo(const json& doc) {
  const Panel panel = read_panel(doc, "placebo");
  const PlaceboConfig config = read_placebo(doc);
  const PlaceboReport report = run_placebo(panel, config);

  ArtifactMap artifacts;
  artifacts["placebo_scores.csv"] = placebo_scores_csv(report);
  artifacts["placebo_cells.csv"] = placebo_cells_csv(report);
  if (config.methods.size() >= 2)
    artifacts["placebo_scatter.svg"] =
        placebo_scatter(report, estimator_name(config.methods[0]),
                        estimator_name(config.methods[1]));
  artifacts["manifest.json"] = manifest_json("placebo", doc, 0);
  return artifacts;
}

ArtifactMap cmd_detrend(const json& doc) {
  const Panel panel = read_panel(doc, "detrend");
  const Panel detrended = detrend_by_control_mean(panel);

  // One simplex fit serves both views: with the weights summing to one the
  // fit criterion is unchanged by the transformation.
  const QpSolution fit = fit_weights(panel, ConstraintSet{true, true, false});
  const Eigen::VectorXd synthetic_level =
      panel.control_matrix().transpose() * fit.weights;
  const Eigen::VectorXd synthetic_detrended =
      detrended.control_matrix().transpose() * fit.weights;

  std::vector<double> x(panel.periods());
  for (int t = 0; t < panel.periods(); ++t)
    x[t] = static_cast<double>(panel.period_labels[t]);
  const double marker = static_cast<double>(panel.period_labels[panel.t0]);

  auto chart = [&](const char* title, const Eigen::VectorXd& treated,
                   const Eigen::VectorXd& synthetic) {
    ChartSpec spec;
    spec.title = title;
    spec.marker_x = marker;
    LineSeries a{"treated", x, {treated.data(), treated.data() + treated.size()}};
    LineSeries b{"synthetic", x,
                 {synthetic.data(), synthetic.data() + synthetic.size()}};
    spec.series = {a, b};
    return spec;
  };

  ArtifactMap artifacts;
  artifacts["detrended.csv"] = panel_to_long_csv(detrended);
  artifacts["detrend.svg"] =
      svg_two_panel(chart("outcome level", panel.treated(), synthetic_level),
                    chart("control-mean detrended", detrended.treated(),
                          synthetic_detrended));
  artifacts["manifest.json"] = manifest_json("detrend", doc, 0);
  return artifacts;
}

}  // namespace

ArtifactMap run_command(const std::string& command,
                        const std::string& config_json, int workers) {
  json doc = json::parse(config_json, nullptr, false);
  if (doc.is_discarded())
    throw_invalid("config: document is not valid JSON");
  validate_document(doc);

  if (command == "fit") return cmd_fit(doc);
  if (command == "simulate") return cmd_simulate(doc);
  if (command == "mc") return cmd_mc(doc, workers);
  if (command == "asymptotics") return cmd_asymptotics(doc);
  if (command == "placebo") return cmd_placebo(doc);
  if (command == "detrend") return cmd_detrend(doc);
  throw_invalid("unknown command '" + command + "'");
}

}  // namespace syncon
