#include "syncon.h"

#include "syncon/config.hpp"
#include "syncon/errors.hpp"
#include "syncon/estimators.hpp"
#include "syncon/panel.hpp"

#include <cstring>
#include <string>
#include <utility>
#include <vector>

#ifndef SYNCON_VERSION
#define SYNCON_VERSION "0.0.0"
#endif

namespace {

thread_local std::string g_error;
thread_local int g_status = 0;

void clear_error() {
  g_error.clear();
  g_status = 0;
}

// Runs the callable, translating exceptions into the thread-local status.
// Returns fallback on failure.
template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  clear_error();
  try {
    return f();
  } catch (const syncon::Error& ex) {
    g_error = ex.what();
    g_status = static_cast<int>(ex.code());
  } catch (const std::exception& ex) {
    g_error = ex.what();
    g_status = 3;
  }
  return {};
}

}  // namespace

struct syncon_artifacts {
  std::vector<std::pair<std::string, std::string>> items;
};

struct syncon_panel {
  syncon::Panel panel;
};

struct syncon_report {
  syncon::EstimateReport report;
};

extern "C" {

const char* syncon_version(void) { return SYNCON_VERSION; }

const char* syncon_last_error(void) { return g_error.c_str(); }

int syncon_last_status(void) { return g_status; }

syncon_artifacts* syncon_run(const char* command, const char* config_json,
                             int workers) {
  return guarded([&]() -> syncon_artifacts* {
    if (command == nullptr || config_json == nullptr)
      syncon::throw_invalid("syncon_run: command and config must be non-null");
    syncon::ArtifactMap artifacts =
        syncon::run_command(command, config_json, workers);
    auto* out = new syncon_artifacts;
    out->items.assign(artifacts.begin(), artifacts.end());
    return out;
  });
}

size_t syncon_artifacts_count(const syncon_artifacts* artifacts) {
  return artifacts == nullptr ? 0 : artifacts->items.size();
}

const char* syncon_artifacts_name(const syncon_artifacts* artifacts,
                                  size_t index) {
  if (artifacts == nullptr || index >= artifacts->items.size()) return nullptr;
  return artifacts->items[index].first.c_str();
}

const char* syncon_artifacts_data(const syncon_artifacts* artifacts,
                                  size_t index) {
  if (artifacts == nullptr || index >= artifacts->items.size()) return nullptr;
  return artifacts->items[index].second.c_str();
}

const char* syncon_artifacts_find(const syncon_artifacts* artifacts,
                                  const char* name) {
  if (artifacts == nullptr || name == nullptr) return nullptr;
  for (const auto& [key, value] : artifacts->items)
    if (key == name) return value.c_str();
  return nullptr;
}

void syncon_artifacts_free(syncon_artifacts* artifacts) { delete artifacts; }

syncon_panel* syncon_panel_load(const char* path, const char* treated_unit,
                                int64_t treat_period) {
  return guarded([&]() -> syncon_panel* {
    if (path == nullptr || treated_unit == nullptr)
      syncon::throw_invalid(
          "syncon_panel_load: path and treated unit must be non-null");
    auto* out = new syncon_panel;
    out->panel = syncon::load_panel(path, treated_unit, treat_period);
    return out;
  });
}

int syncon_panel_units(const syncon_panel* panel) {
  return panel == nullptr ? 0 : panel->panel.units();
}

int syncon_panel_periods(const syncon_panel* panel) {
  return panel == nullptr ? 0 : panel->panel.periods();
}

int syncon_panel_pre_periods(const syncon_panel* panel) {
  return panel == nullptr ? 0 : panel->panel.t0;
}

double syncon_panel_outcome(const syncon_panel* panel, int unit, int period) {
  return guarded([&]() -> double {
    if (panel == nullptr) syncon::throw_invalid("null panel handle");
    if (unit < 0 || unit >= panel->panel.units() || period < 0 ||
        period >= panel->panel.periods())
      syncon::throw_invalid("panel index out of range");
    return panel->panel.outcomes(unit, period);
  });
}

const char* syncon_panel_unit_label(const syncon_panel* panel, int unit) {
  if (panel == nullptr || unit < 0 || unit >= panel->panel.units())
    return nullptr;
  return panel->panel.unit_labels[static_cast<std::size_t>(unit)].c_str();
}

int64_t syncon_panel_period_label(const syncon_panel* panel, int period) {
  if (panel == nullptr || period < 0 || period >= panel->panel.periods())
    return 0;
  return panel->panel.period_labels[static_cast<std::size_t>(period)];
}

void syncon_panel_free(syncon_panel* panel) { delete panel; }

syncon_report* syncon_estimate(const syncon_panel* panel, const char* method) {
  return guarded([&]() -> syncon_report* {
    if (panel == nullptr || method == nullptr)
      syncon::throw_invalid(
          "syncon_estimate: panel and method must be non-null");
    const syncon::EstimatorKind kind = syncon::parse_estimator(method);
    auto* out = new syncon_report;
    out->report = syncon::estimate(panel->panel, kind);
    return out;
  });
}

int syncon_report_weight_count(const syncon_report* report) {
  return report == nullptr ? 0
                           : static_cast<int>(report->report.weights.size());
}

double syncon_report_weight(const syncon_report* report, int control) {
  if (report == nullptr || control < 0 ||
      control >= report->report.weights.size())
    return 0.0;
  return report->report.weights[control];
}

double syncon_report_intercept(const syncon_report* report) {
  return report == nullptr ? 0.0 : report->report.intercept;
}

double syncon_report_pre_rmspe(const syncon_report* report) {
  return report == nullptr ? 0.0 : report->report.pre_rmspe;
}

int syncon_report_effect_count(const syncon_report* report) {
  return report == nullptr
             ? 0
             : static_cast<int>(report->report.effects.effects.size());
}

double syncon_report_effect(const syncon_report* report, int index) {
  if (report == nullptr || index < 0 ||
      index >= report->report.effects.effects.size())
    return 0.0;
  return report->report.effects.effects[index];
}

int64_t syncon_report_effect_period(const syncon_report* report, int index) {
  if (report == nullptr || index < 0 ||
      static_cast<std::size_t>(index) >=
          report->report.effects.period_labels.size())
    return 0;
  return report->report.effects.period_labels[static_cast<std::size_t>(index)];
}

int syncon_report_diagnostic(const syncon_report* report, const char* name,
                             double* value) {
  if (report == nullptr || name == nullptr || value == nullptr) return 0;
  const auto it = report->report.diagnostics.find(name);
  if (it == report->report.diagnostics.end()) return 0;
  *value = it->second;
  return 1;
}

void syncon_report_free(syncon_report* report) { delete report; }

}  // extern "C"
