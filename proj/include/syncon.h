/* C interface to the synthetic-control library.

   Every entry point reports failure through a status code instead of an
   exception: 0 means success, 2 means the inputs were rejected, 3 means a
   numeric procedure could not complete.  After a failure the thread-local
   message from syncon_last_error() describes what went wrong, and
   syncon_last_status() repeats the code.  Functions returning pointers
   yield NULL on failure.

   All returned objects are opaque handles owned by the caller; release
   them with the matching *_free function.  Strings returned by accessors
   stay valid until their owning handle is freed. */

#ifndef SYNCON_H
#define SYNCON_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Library version as "major.minor.patch". */
const char* syncon_version(void);

/* Thread-local description of the most recent failure ("" when the last
   call on this thread succeeded), and its status code (0, 2 or 3). */
const char* syncon_last_error(void);
int syncon_last_status(void);

/* ------------------------------------------------------------------ */
/* Command runner: executes one subcommand against a JSON configuration
   document and returns the set of artifacts it produced as named text
   blobs (CSV, JSON or SVG).  Commands: fit, simulate, mc, asymptotics,
   placebo, detrend.  workers bounds the Monte Carlo thread count and
   never changes any output byte. */

typedef struct syncon_artifacts syncon_artifacts;

syncon_artifacts* syncon_run(const char* command, const char* config_json,
                             int workers);
size_t syncon_artifacts_count(const syncon_artifacts* artifacts);
const char* syncon_artifacts_name(const syncon_artifacts* artifacts,
                                  size_t index);
const char* syncon_artifacts_data(const syncon_artifacts* artifacts,
                                  size_t index);
/* Convenience lookup by artifact name; NULL when absent (not an error). */
const char* syncon_artifacts_find(const syncon_artifacts* artifacts,
                                  const char* name);
void syncon_artifacts_free(syncon_artifacts* artifacts);

/* ------------------------------------------------------------------ */
/* Panel handle: balanced outcome panel with the treated unit first. */

typedef struct syncon_panel syncon_panel;

/* Loads a long-format CSV with header unit,period,outcome.  treat_period
   is the label of the first post-treatment period. */
syncon_panel* syncon_panel_load(const char* path, const char* treated_unit,
                                int64_t treat_period);
int syncon_panel_units(const syncon_panel* panel);
int syncon_panel_periods(const syncon_panel* panel);
int syncon_panel_pre_periods(const syncon_panel* panel);
double syncon_panel_outcome(const syncon_panel* panel, int unit, int period);
const char* syncon_panel_unit_label(const syncon_panel* panel, int unit);
int64_t syncon_panel_period_label(const syncon_panel* panel, int period);
void syncon_panel_free(syncon_panel* panel);

/* ------------------------------------------------------------------ */
/* Estimation: fits one method ("sc", "sc_demeaned", "did",
   "sc_mean_predictor", "sc_iv", "ife:<rank>") on a panel and exposes the
   fitted weights, intercept and per-period treatment effects. */

typedef struct syncon_report syncon_report;

syncon_report* syncon_estimate(const syncon_panel* panel, const char* method);
int syncon_report_weight_count(const syncon_report* report);
double syncon_report_weight(const syncon_report* report, int control);
double syncon_report_intercept(const syncon_report* report);
double syncon_report_pre_rmspe(const syncon_report* report);
int syncon_report_effect_count(const syncon_report* report);
double syncon_report_effect(const syncon_report* report, int index);
int64_t syncon_report_effect_period(const syncon_report* report, int index);
/* Returns 1 and stores the value when the named diagnostic exists,
   returns 0 otherwise. */
int syncon_report_diagnostic(const syncon_report* report, const char* name,
                             double* value);
void syncon_report_free(syncon_report* report);

#ifdef __cplusplus
}
#endif

#endif /* SYNCON_H */
