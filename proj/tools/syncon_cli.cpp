/* Command-line front end.

   Every subcommand assembles one JSON configuration document — the config
   file (when given) with command-line flags merged on top — and hands it to
   the shared library through the C interface.  The library returns named
   text artifacts; this program only decides where to write them.  Exit
   codes: 0 success, 2 invalid input, 3 numeric failure.  Failures print a
   single "error: ..." line on stderr. */

#include "syncon.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

int fail(int code, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return code == 0 ? 3 : code;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  out = buffer.str();
  return true;
}

/* Flag values gathered by CLI11; presence decides whether each one
   overrides the config document. */
struct Flags {
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::uint64_t seed = 0;
  int reps = 0;
  std::string panel_path;
  std::string treated;
  std::int64_t treat_period = 0;
  std::string method;
  std::string constraints;
};

/* True when the option both exists on this subcommand and was given. */
bool flag_given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* option = cmd->get_option_no_throw(name);
  return option != nullptr && option->count() > 0;
}

void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "JSON configuration file; flags override its values");
  cmd->add_option("--out", flags.out_dir,
                  "output directory (overrides output.directory)");
  cmd->add_option("--workers", flags.workers,
                  "worker thread bound; results never depend on it");
}

int resolve_workers(const CLI::App* cmd, const Flags& flags, int& workers) {
  workers = 1;
  if (const char* env = std::getenv("SYNCON_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 1)
      return fail(2, "SYNCON_WORKERS must be a positive integer, got '" +
                         std::string(env) + "'");
    workers = static_cast<int>(value);
  }
  if (flag_given(cmd, "--workers")) {
    if (flags.workers < 1) return fail(2, "--workers must be at least 1");
    workers = flags.workers;
  }
  return 0;
}

/* Folds the parsed flags into the configuration document for one
   subcommand, so that the manifest hash covers the effective inputs. */
int merge_flags(const std::string& command, const CLI::App* cmd,
                const Flags& flags, json& doc) {
  if (!doc.is_object()) {
    if (!doc.is_null()) return fail(2, "config: top level must be an object");
    doc = json::object();
  }
  if (flag_given(cmd, "--out")) doc["output"]["directory"] = flags.out_dir;
  if (flag_given(cmd, "--seed")) {
    if (command == "mc")
      doc["mc"]["base_seed"] = flags.seed;
    else
      doc["simulate"]["seed"] = flags.seed;
  }
  if (flag_given(cmd, "--reps")) doc["mc"]["reps"] = flags.reps;
  if (flag_given(cmd, "--panel")) doc["panel"]["path"] = flags.panel_path;
  if (flag_given(cmd, "--treated")) doc["panel"]["treated"] = flags.treated;
  if (flag_given(cmd, "--treat-period"))
    doc["panel"]["treatment_period"] = flags.treat_period;
  if (flag_given(cmd, "--method")) doc["fit"]["method"] = flags.method;
  if (flag_given(cmd, "--constraints")) {
    if (flag_given(cmd, "--method") && flags.method != "sc" &&
        flags.method != "custom")
      return fail(2, "--constraints only applies to --method sc or custom");
    std::set<std::string> picked;
    std::stringstream tokens(flags.constraints);
    std::string token;
    while (std::getline(tokens, token, ',')) {
      if (token != "nonneg" && token != "sum1" && token != "intercept")
        return fail(2, "--constraints tokens must be nonneg, sum1 or "
                       "intercept, got '" + token + "'");
      picked.insert(token);
    }
    doc["fit"]["method"] = "custom";
    doc["fit"]["nonneg"] = picked.count("nonneg") > 0;
    doc["fit"]["sum_to_one"] = picked.count("sum1") > 0;
    doc["fit"]["intercept"] = picked.count("intercept") > 0;
  }
  return 0;
}

int run(const std::string& command, const CLI::App* cmd, const Flags& flags) {
  json doc;
  if (flag_given(cmd, "--config")) {
    std::string text;
    if (!read_file(flags.config_path, text))
      return fail(2, "cannot read config file '" + flags.config_path + "'");
    doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
      return fail(2, "config: document is not valid JSON");
  }
  if (const int code = merge_flags(command, cmd, flags, doc)) return code;

  int workers = 1;
  if (const int code = resolve_workers(cmd, flags, workers)) return code;

  /* Output routing is the CLI's job; pull it out before the library call
     so the document it hashes is exactly what was validated. */
  std::string directory = ".";
  std::set<std::string> formats = {"csv", "json", "svg"};
  if (doc.contains("output") && doc["output"].is_object()) {
    const json& output = doc["output"];
    if (output.contains("directory") && output["directory"].is_string())
      directory = output["directory"].get<std::string>();
    if (output.contains("formats") && output["formats"].is_array()) {
      formats.clear();
      for (const json& f : output["formats"])
        if (f.is_string()) formats.insert(f.get<std::string>());
    }
  }

  syncon_artifacts* artifacts =
      syncon_run(command.c_str(), doc.dump().c_str(), workers);
  if (artifacts == nullptr)
    return fail(syncon_last_status(), syncon_last_error());

  std::error_code fs_error;
  std::filesystem::create_directories(directory, fs_error);
  if (fs_error) {
    syncon_artifacts_free(artifacts);
    return fail(2, "cannot create output directory '" + directory + "'");
  }

  int written = 0;
  for (size_t i = 0; i < syncon_artifacts_count(artifacts); ++i) {
    const std::string name = syncon_artifacts_name(artifacts, i);
    const std::string extension =
        std::filesystem::path(name).extension().string();
    const std::string format =
        extension.empty() ? extension : extension.substr(1);
    if (name != "manifest.json" && formats.count(format) == 0) continue;
    const std::filesystem::path path =
        std::filesystem::path(directory) / name;
    std::ofstream out(path, std::ios::binary);
    out << syncon_artifacts_data(artifacts, i);
    if (!out) {
      syncon_artifacts_free(artifacts);
      return fail(2, "cannot write '" + path.string() + "'");
    }
    std::cout << "wrote " << path.string() << "\n";
    ++written;
  }
  syncon_artifacts_free(artifacts);
  if (written == 0) std::cout << "no artifacts matched output.formats\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic-control estimation toolkit"};
  app.set_version_flag("--version", syncon_version());
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
  };
  const std::vector<Sub> subs = {
      {"fit", "fit one estimator on a panel CSV"},
      {"simulate", "draw one synthetic panel from the factor process"},
      {"mc", "run a Monte Carlo grid and summarize each cell"},
      {"asymptotics", "solve the limiting weight problem and variances"},
      {"placebo", "one-step-ahead placebo errors for every unit"},
      {"detrend", "subtract the control-unit mean and plot the overlay"},
  };

  std::vector<Flags> flags(subs.size());
  std::vector<CLI::App*> cmds;
  for (size_t i = 0; i < subs.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    Flags& f = flags[i];
    add_common(cmd, f);
    const std::string name = subs[i].name;
    if (name == "mc" || name == "simulate")
      cmd->add_option("--seed", f.seed, "base seed for the random streams");
    if (name == "mc")
      cmd->add_option("--reps", f.reps, "Monte Carlo repetitions per cell");
    if (name == "fit" || name == "placebo" || name == "detrend") {
      cmd->add_option("--panel", f.panel_path,
                      "long-format CSV with header unit,period,outcome");
      cmd->add_option("--treated", f.treated, "label of the treated unit");
      cmd->add_option("--treat-period", f.treat_period,
                      "first post-treatment period label");
    }
    if (name == "fit") {
      cmd->add_option("--method", f.method,
                      "sc | sc_demeaned | did | sc_mean_predictor | sc_iv | "
                      "ife:<rank> | custom");
      cmd->add_option("--constraints", f.constraints,
                      "comma list of nonneg,sum1,intercept; implies a custom "
                      "weight fit with exactly these constraints");
    }
    cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, e.what());
  }

  for (size_t i = 0; i < subs.size(); ++i)
    if (cmds[i]->parsed()) return run(subs[i].name, cmds[i], flags[i]);
  return fail(2, "no subcommand given");
}
