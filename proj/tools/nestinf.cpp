/*
   Copyright 2026 nestinf contributors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// nestinf command-line front end.
//
// Subcommands:
//   analyze   per-subject effect estimation from raw nested samples,
//             then group-level combination and testing
//   meta      group-level combination of pre-computed per-subject summaries
//   simulate  Monte Carlo calibration / power scenarios (sim1, sim2,
//             pooling-demo)
//   stouffer  combine one-sided per-subject p-values
//
// Exit codes: 0 success, 2 usage error, 3 input parse error,
// 4 estimation / degenerate-data error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nestinf/combine.hpp"
#include "nestinf/effect.hpp"
#include "nestinf/io.hpp"
#include "nestinf/report.hpp"
#include "nestinf/simulate.hpp"
#include "nestinf/version.hpp"

namespace {

using namespace nestinf;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitEstimation = 4;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("NESTINF_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
    throw Error(std::string("NESTINF_SEED is not an unsigned integer: ") + env);
  }
  return 42;
}

Model parse_model(const std::string& s) {
  if (s == "fe") return Model::FixedEffect;
  if (s == "re") return Model::RandomEffectsDL;
  throw Error("unknown model '" + s + "' (expected fe or re)");
}

WeightScheme parse_scheme(const std::string& s) {
  if (s == "equal") return WeightScheme::EqualWeights;
  if (s == "invvar") return WeightScheme::InverseVariance;
  throw Error("unknown scheme '" + s + "' (expected equal or invvar)");
}

ReferencePolicy parse_policy(const std::string& s) {
  if (s == "z") return ReferencePolicy::ZTest;
  if (s == "t") return ReferencePolicy::TTestSMinus1;
  throw Error("unknown policy '" + s + "' (expected z or t)");
}

struct GroupFlags {
  std::string input;
  std::string output;
  std::string model = "re";
  std::string scheme = "invvar";
  std::string policy = "z";
  double theta0 = 0.0;
};

void add_group_flags(CLI::App* cmd, GroupFlags& flags) {
  cmd->add_option("-i,--input", flags.input, "input CSV file")->required();
  cmd->add_option("-o,--out", flags.output, "output JSON report")->required();
  cmd->add_option("--model", flags.model, "group model: fe or re (default re)");
  cmd->add_option("--scheme", flags.scheme,
                  "weighting: equal or invvar (default invvar)");
  cmd->add_option("--policy", flags.policy,
                  "reference distribution: z or t (default z)");
  cmd->add_option("--theta0", flags.theta0, "null value of the group effect");
}

struct AnalyzeFlags : GroupFlags {
  std::string effect = "welch";
  std::string subjects_out;
  std::string class_x = "X";
  std::string class_y = "Y";
};

// Wraps per-subject estimation so failures name the offending subject.
template <class Fn>
SubjectRecord estimate_subject(const std::string& id, Fn&& fn) {
  try {
    return {id, fn()};
  } catch (const Error& e) {
    throw Error("subject '" + id + "': " + e.what());
  }
}

std::vector<SubjectRecord> estimate_effects(const AnalyzeFlags& flags,
                                            const CsvTable& table) {
  std::vector<SubjectRecord> records;
  const std::string& effect = flags.effect;
  if (effect == "mean") {
    for (const auto& s : load_value_rows(table))
      records.push_back(
          estimate_subject(s.id, [&] { return mean_effect(s.values); }));
  } else if (effect == "paired") {
    for (const auto& s : load_paired_rows(table))
      records.push_back(
          estimate_subject(s.id, [&] { return paired_diff_effect(s.pairs); }));
  } else if (effect == "welch") {
    for (const auto& s : load_two_sample_rows(table, flags.class_x, flags.class_y))
      records.push_back(
          estimate_subject(s.id, [&] { return welch_diff_effect(s.data); }));
  } else if (effect == "auc") {
    for (const auto& s : load_two_sample_rows(table, flags.class_x, flags.class_y))
      records.push_back(
          estimate_subject(s.id, [&] { return auc_effect(s.data); }));
  } else if (effect == "pearson") {
    for (const auto& s : load_paired_rows(table))
      records.push_back(
          estimate_subject(s.id, [&] { return pearson_effect(s.pairs); }));
  } else if (effect.rfind("ols:", 0) == 0) {
    char* end = nullptr;
    const unsigned long k = std::strtoul(effect.c_str() + 4, &end, 10);
    if (!end || *end != '\0')
      throw Error("bad effect spec '" + effect + "' (expected ols:<index>)");
    for (const auto& s : load_regression_rows(table))
      records.push_back(estimate_subject(s.id, [&] {
        return ols_coef_effect(ols_fit(s.data), k);
      }));
  } else {
    throw Error("unknown effect '" + effect +
                "' (expected mean|paired|welch|auc|pearson|ols:<k>)");
  }
  return records;
}

void write_report(const std::string& path, const Json& j) {
  atomic_write_file(path, j.dump(2) + "\n");
}

int run_analyze(const AnalyzeFlags& flags, bool theta0_given) {
  const CsvTable table = read_csv(flags.input);
  std::vector<SubjectRecord> records = estimate_effects(flags, table);
  // the natural null for an AUC is chance level
  const double theta0 =
      (!theta0_given && flags.effect == "auc") ? 0.5 : flags.theta0;

  Json config;
  config["command"] = "analyze";
  config["input"] = flags.input;
  config["effect"] = flags.effect;
  config["model"] = flags.model;
  config["scheme"] = flags.scheme;
  config["policy"] = flags.policy;
  config["theta0"] = theta0;
  config["class_x"] = flags.class_x;
  config["class_y"] = flags.class_y;

  const GroupReport report =
      make_group_report(std::move(records), parse_model(flags.model),
                        parse_scheme(flags.scheme), parse_policy(flags.policy),
                        theta0);
  write_report(flags.output, group_report_to_json(report, std::move(config)));
  if (!flags.subjects_out.empty())
    atomic_write_file(flags.subjects_out, subjects_to_csv(report.subjects));
  std::cout << group_report_to_text(report);
  return kExitOk;
}

int run_meta(const GroupFlags& flags) {
  const CsvTable table = read_csv(flags.input);
  std::vector<SubjectRecord> records;
  for (const auto& row : load_summary_table(table)) {
    SubjectEffect e;
    e.theta_hat = row.theta_hat;
    e.var_hat = row.var_hat;
    if (row.n) e.n.n_x = static_cast<std::size_t>(*row.n);
    records.push_back({row.id, e});
  }

  Json config;
  config["command"] = "meta";
  config["input"] = flags.input;
  config["model"] = flags.model;
  config["scheme"] = flags.scheme;
  config["policy"] = flags.policy;
  config["theta0"] = flags.theta0;

  const GroupReport report =
      make_group_report(std::move(records), parse_model(flags.model),
                        parse_scheme(flags.scheme), parse_policy(flags.policy),
                        flags.theta0);
  write_report(flags.output,
               group_report_to_json(report, std::move(config), false));
  std::cout << group_report_to_text(report);
  return kExitOk;
}

struct SimulateFlags {
  std::string scenario;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int reps = 1000;
  unsigned threads = 1;
};

int run_simulate(const SimulateFlags& flags) {
  const std::uint64_t seed = flags.seed ? *flags.seed : default_seed();
  if (flags.reps < 1) throw Error("--reps must be >= 1");
  const std::filesystem::path dir(flags.out_dir);
  std::filesystem::create_directories(dir);

  if (flags.scenario == "pooling-demo") {
    const PoolingDemoReport report = pooling_demo(seed);
    write_report((dir / "pooling_demo.json").string(),
                 pooling_demo_to_json(report));
    std::cout << pooling_demo_to_text(report);
    return kExitOk;
  }

  std::vector<Panel> panels;
  if (flags.scenario == "sim1")
    panels = run_simulation1(seed, flags.reps, flags.threads);
  else if (flags.scenario == "sim2")
    panels = run_simulation2(seed, flags.reps, flags.threads);
  else
    throw CLI::ValidationError(
        "scenario", "expected sim1, sim2 or pooling-demo, got '" +
                        flags.scenario + "'");

  std::vector<std::string> files;
  for (const auto& panel : panels) {
    const std::string file = flags.scenario + "_" + panel.name + ".csv";
    atomic_write_file(dir / file, panel_to_csv(panel));
    files.push_back(file);
    std::cout << "wrote " << (dir / file).string() << "\n";
  }
  const Json manifest =
      simulation_manifest(flags.scenario, seed, flags.reps, panels, files);
  const std::string manifest_file = flags.scenario + "_manifest.json";
  atomic_write_file(dir / manifest_file, manifest.dump(2) + "\n");
  std::cout << "wrote " << (dir / manifest_file).string() << "\n";
  return kExitOk;
}

struct StoufferFlags {
  std::string input;
  std::string output;
};

int run_stouffer(const StoufferFlags& flags) {
  const CsvTable table = read_csv(flags.input);
  const auto rows = load_p_values(table);
  // Input p-values are one-sided in the common reporting convention: small
  // values are evidence for the shared direction of interest. Each maps to
  // z = -Phi^-1(p), so p = 0.025 contributes z = +1.96.
  std::vector<double> z;
  z.reserve(rows.size());
  for (const auto& [id, p] : rows) z.push_back(-std_normal_inv_cdf(p));
  const TestResult combined = stouffer_from_z(z);

  Json config;
  config["command"] = "stouffer";
  config["input"] = flags.input;
  write_report(flags.output,
               stouffer_report_to_json(rows, z, combined, std::move(config)));
  std::cout << stouffer_report_to_text(rows, combined);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group-level statistical inference for nested data"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  AnalyzeFlags analyze_flags;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "estimate per-subject effects from raw samples and combine");
  add_group_flags(analyze, analyze_flags);
  analyze->add_option(
      "--effect", analyze_flags.effect,
      "effect size: mean | paired | welch | auc | pearson | ols:<k>");
  analyze->add_option("--subjects-out", analyze_flags.subjects_out,
                      "also write the per-subject summary CSV");
  analyze->add_option("--class-x", analyze_flags.class_x,
                      "condition label of class X (default X)");
  analyze->add_option("--class-y", analyze_flags.class_y,
                      "condition label of class Y (default Y)");

  GroupFlags meta_flags;
  CLI::App* meta = app.add_subcommand(
      "meta", "combine pre-computed per-subject (theta_hat, var_hat) rows");
  add_group_flags(meta, meta_flags);

  SimulateFlags sim_flags;
  CLI::App* simulate =
      app.add_subcommand("simulate", "run a Monte Carlo scenario");
  simulate->add_option("scenario", sim_flags.scenario,
                       "sim1 | sim2 | pooling-demo")
      ->required();
  simulate->add_option("--seed", sim_flags.seed,
                       "RNG seed (default: NESTINF_SEED env var, else 42)");
  simulate->add_option("--reps", sim_flags.reps,
                       "replications per cell (default 1000)");
  simulate->add_option("--out-dir", sim_flags.out_dir,
                       "output directory (default .)");
  simulate->add_option("--threads", sim_flags.threads,
                       "worker threads, 0 = hardware (default 1)");

  StoufferFlags stouffer_flags;
  CLI::App* stouffer = app.add_subcommand(
      "stouffer", "combine one-sided per-subject p-values");
  stouffer->add_option("-i,--input", stouffer_flags.input, "input CSV file")
      ->required();
  stouffer->add_option("-o,--out", stouffer_flags.output, "output JSON report")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*analyze)
      return run_analyze(analyze_flags,
                         analyze->count("--theta0") > 0);
    if (*meta) return run_meta(meta_flags);
    if (*simulate) return run_simulate(sim_flags);
    if (*stouffer) return run_stouffer(stouffer_flags);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
