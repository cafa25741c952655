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

// Report assembly for the command-line front end: JSON documents with fixed
// field names (theta_hat, var_hat, tau2, z, p_two, q, q_p, ci_low, ci_high),
// their human-readable rendering, and the simulation output files.
// This layer depends on the vendored nlohmann/json single header.

#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestinf/combine.hpp"
#include "nestinf/io.hpp"
#include "nestinf/simulate.hpp"
#include "nestinf/version.hpp"

namespace nestinf {

using Json = nlohmann::ordered_json;

struct SubjectRecord {
  std::string id;
  SubjectEffect effect;
};

inline Json subject_to_json(const SubjectRecord& s, bool with_kind = true) {
  Json j;
  j["subject_id"] = s.id;
  j["theta_hat"] = s.effect.theta_hat;
  j["var_hat"] = s.effect.var_hat;
  if (with_kind) j["kind"] = to_string(s.effect.kind);
  j["n"] = s.effect.n.total();
  if (s.effect.df) j["df"] = *s.effect.df;
  return j;
}

/// Report of a group-level analysis (used by both the raw-data and the
/// summary-table entry points).
struct GroupReport {
  std::vector<SubjectRecord> subjects;
  GroupResult group;
  TestResult test;
  std::optional<TestResult> heterogeneity;  // Cochran's Q, when S >= 2
  Interval ci;
  std::optional<CorrelationGroup> correlation;  // Fisher-z analyses only
};

inline GroupReport make_group_report(std::vector<SubjectRecord> subjects,
                                     Model model, WeightScheme scheme,
                                     ReferencePolicy policy, double theta0) {
  std::vector<SubjectEffect> effects;
  effects.reserve(subjects.size());
  for (const auto& s : subjects) effects.push_back(s.effect);

  GroupReport report;
  report.subjects = std::move(subjects);
  report.group = combine_effects(effects, model, scheme);
  report.test = group_test(report.group, theta0, policy);
  if (effects.size() >= 2) report.heterogeneity = cochran_q(effects);
  report.ci = group_confidence_interval(report.group);
  if (!effects.empty() && effects.front().kind == EffectKind::FisherZ)
    report.correlation = correlation_group(effects, model, scheme);
  return report;
}

inline Json group_report_to_json(const GroupReport& report, Json config,
                                 bool with_kind = true) {
  Json j;
  j["version"] = std::string(kVersion);
  j["config"] = std::move(config);
  Json subjects = Json::array();
  for (const auto& s : report.subjects)
    subjects.push_back(subject_to_json(s, with_kind));
  j["subjects"] = std::move(subjects);
  j["theta_hat"] = report.group.theta_hat;
  j["var_hat"] = report.group.var_hat;
  j["tau2"] = report.group.tau2;
  j["weights"] = report.group.weights;
  j["model"] = to_string(report.group.model);
  j["scheme"] = to_string(report.group.scheme);
  j["z"] = report.test.statistic;
  j["ref_dist"] = to_string(report.test.ref_dist);
  j["p_one_low"] = report.test.p_one_low;
  j["p_one_high"] = report.test.p_one_high;
  j["p_two"] = report.test.p_two;
  j["ci_low"] = report.ci.lo;
  j["ci_high"] = report.ci.hi;
  if (report.heterogeneity) {
    j["q"] = report.heterogeneity->statistic;
    j["q_df"] = report.heterogeneity->ref_dist.df;
    j["q_p"] = report.heterogeneity->p_one_high;
  } else {
    j["q"] = nullptr;
    j["q_df"] = nullptr;
    j["q_p"] = nullptr;
  }
  if (report.correlation) {
    j["rho"] = report.correlation->rho;
    j["rho_ci_low"] = report.correlation->rho_ci_lo;
    j["rho_ci_high"] = report.correlation->rho_ci_hi;
  }
  j["warnings"] = report.group.warnings;
  return j;
}

inline std::string group_report_to_text(const GroupReport& report) {
  std::ostringstream out;
  out << "subjects: " << report.subjects.size() << "\n";
  out << "  id  theta_hat  var_hat  weight\n";
  for (std::size_t s = 0; s < report.subjects.size(); ++s) {
    out << "  " << report.subjects[s].id << "  "
        << format_double(report.subjects[s].effect.theta_hat) << "  "
        << format_double(report.subjects[s].effect.var_hat) << "  "
        << format_double(report.group.weights[s]) << "\n";
  }
  out << "model: " << to_string(report.group.model)
      << "  scheme: " << to_string(report.group.scheme) << "\n";
  out << "tau2: " << format_double(report.group.tau2) << "\n";
  out << "combined theta_hat: " << format_double(report.group.theta_hat)
      << "  var_hat: " << format_double(report.group.var_hat) << "\n";
  out << "95% CI: [" << format_double(report.ci.lo) << ", "
      << format_double(report.ci.hi) << "]\n";
  out << "statistic: " << format_double(report.test.statistic) << " ~ "
      << to_string(report.test.ref_dist)
      << "  p_two: " << format_double(report.test.p_two) << "\n";
  if (report.heterogeneity)
    out << "Cochran Q: " << format_double(report.heterogeneity->statistic)
        << " (df " << format_double(report.heterogeneity->ref_dist.df)
        << ")  p: " << format_double(report.heterogeneity->p_one_high) << "\n";
  if (report.correlation)
    out << "rho: " << format_double(report.correlation->rho) << "  95% CI: ["
        << format_double(report.correlation->rho_ci_lo) << ", "
        << format_double(report.correlation->rho_ci_hi) << "]\n";
  for (const auto& w : report.group.warnings) out << "warning: " << w << "\n";
  return out.str();
}

/// Per-subject summary table in the exact shape the `meta` command ingests.
inline std::string subjects_to_csv(const std::vector<SubjectRecord>& subjects) {
  std::ostringstream out;
  out << "subject_id,theta_hat,var_hat,n\n";
  for (const auto& s : subjects)
    out << s.id << ',' << format_double(s.effect.theta_hat) << ','
        << format_double(s.effect.var_hat) << ',' << s.effect.n.total() << "\n";
  return out.str();
}

// ---- Stouffer report ---------------------------------------------------

inline Json stouffer_report_to_json(
    const std::vector<std::pair<std::string, double>>& rows,
    const std::vector<double>& z_scores, const TestResult& combined,
    Json config) {
  Json j;
  j["version"] = std::string(kVersion);
  j["config"] = std::move(config);
  Json subjects = Json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Json row;
    row["subject_id"] = rows[i].first;
    row["p_one_sided"] = rows[i].second;
    row["z"] = z_scores[i];
    subjects.push_back(std::move(row));
  }
  j["subjects"] = std::move(subjects);
  j["z"] = combined.statistic;
  j["p_one_low"] = combined.p_one_low;
  j["p_one_high"] = combined.p_one_high;
  j["p_two"] = combined.p_two;
  return j;
}

inline std::string stouffer_report_to_text(
    const std::vector<std::pair<std::string, double>>& rows,
    const TestResult& combined) {
  std::ostringstream out;
  out << "subjects: " << rows.size() << "\n";
  out << "combined z: " << format_double(combined.statistic)
      << "  p_one_low: " << format_double(combined.p_one_low)
      << "  p_one_high: " << format_double(combined.p_one_high)
      << "  p_two: " << format_double(combined.p_two) << "\n";
  return out.str();
}

// ---- simulation outputs ------------------------------------------------

inline Json sim_config_to_json(const SimConfig& c) {
  Json j;
  j["n_subjects"] = c.n_subjects;
  j["d_grid"] = c.d_grid;
  j["sigma_rand"] = c.sigma_rand;
  j["family"] = to_string(c.family);
  j["n_min"] = c.n_min;
  j["n_max"] = c.n_max;
  j["v_min"] = c.v_min;
  j["v_max"] = c.v_max;
  j["mu_min"] = c.mu_min;
  j["mu_max"] = c.mu_max;
  j["reps"] = c.reps;
  j["alpha"] = c.alpha;
  j["seed"] = c.seed;
  return j;
}

/// Plot-ready rejection curves: one row per (method, d).
inline std::string panel_to_csv(const Panel& panel) {
  std::ostringstream out;
  out << "method,d,rejection_rate,se,reps,seed\n";
  for (const auto& curve : panel.curves)
    for (std::size_t i = 0; i < curve.d_values.size(); ++i)
      out << method_name(curve.method) << ',' << format_double(curve.d_values[i])
          << ',' << format_double(curve.rates[i]) << ','
          << format_double(curve.std_errors[i]) << ',' << curve.reps << ','
          << curve.seed << "\n";
  return out.str();
}

inline Json simulation_manifest(const std::string& scenario,
                                std::uint64_t master_seed, int reps,
                                const std::vector<Panel>& panels,
                                const std::vector<std::string>& files) {
  Json j;
  j["version"] = std::string(kVersion);
  j["scenario"] = scenario;
  j["seed"] = master_seed;
  j["reps"] = reps;
  Json panel_list = Json::array();
  for (std::size_t i = 0; i < panels.size(); ++i) {
    Json p;
    p["name"] = panels[i].name;
    p["file"] = files[i];
    p["config"] = sim_config_to_json(panels[i].config);
    Json methods = Json::array();
    for (const auto& c : panels[i].curves)
      methods.push_back(std::string(method_name(c.method)));
    p["methods"] = std::move(methods);
    panel_list.push_back(std::move(p));
  }
  j["panels"] = std::move(panel_list);
  return j;
}

inline Json pooling_demo_to_json(const PoolingDemoReport& r) {
  Json j;
  j["version"] = std::string(kVersion);
  j["seed"] = r.seed;
  Json config;
  config["n_subjects"] = r.config.n_subjects;
  config["n_per_subject"] = r.config.n_per_subject;
  config["offset_sd"] = r.config.offset_sd;
  config["class_shift"] = r.config.class_shift;
  config["within_sd"] = r.config.within_sd;
  j["config"] = std::move(config);
  j["subject_welch_p"] = r.subject_welch_p;
  j["subject_rho"] = r.subject_rho;
  j["subject_pearson_p"] = r.subject_pearson_p;
  j["pooled_welch_p"] = r.pooled_welch_p;
  j["pooled_rho"] = r.pooled_rho;
  j["pooled_pearson_p"] = r.pooled_pearson_p;
  return j;
}

inline std::string pooling_demo_to_text(const PoolingDemoReport& r) {
  std::ostringstream out;
  out << "pooling demo (seed " << r.seed << ")\n";
  out << "  subject  welch_p      rho          pearson_p\n";
  for (std::size_t s = 0; s < r.subject_welch_p.size(); ++s)
    out << "  " << s + 1 << "        " << format_double(r.subject_welch_p[s])
        << "  " << format_double(r.subject_rho[s]) << "  "
        << format_double(r.subject_pearson_p[s]) << "\n";
  out << "  pooled   " << format_double(r.pooled_welch_p) << "  "
      << format_double(r.pooled_rho) << "  "
      << format_double(r.pooled_pearson_p) << "\n";
  return out.str();
}

}  // namespace nestinf
