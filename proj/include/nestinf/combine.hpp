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

// Group-level inference on subject effects: convex combination under a
// fixed-effect or random-effects model, DerSimonian-Laird between-subject
// variance, Stouffer's method, Cochran's Q, and the (invalid) pooling
// baseline.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nestinf/effect.hpp"

namespace nestinf {

enum class Model { FixedEffect, RandomEffectsDL };
enum class WeightScheme { EqualWeights, InverseVariance };

/// Reference distribution used for the combined z statistic. The z-test is
/// the default; the t(S-1) alternative is deliberately more conservative.
enum class ReferencePolicy { ZTest, TTestSMinus1 };

inline std::string to_string(Model m) {
  return m == Model::FixedEffect ? "fe" : "re";
}
inline std::string to_string(WeightScheme s) {
  return s == WeightScheme::EqualWeights ? "equal" : "invvar";
}
inline std::string to_string(ReferencePolicy p) {
  return p == ReferencePolicy::ZTest ? "z" : "t";
}

/// Combined group effect. weights holds the normalized view (sums to one).
/// tau2 is the estimated between-subject variance; it is zero under the
/// fixed-effect model by definition.
struct GroupResult {
  double theta_hat = 0.0;
  double var_hat = 0.0;
  std::vector<double> weights;
  double tau2 = 0.0;
  Model model = Model::FixedEffect;
  WeightScheme scheme = WeightScheme::InverseVariance;
  std::size_t n_subjects = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void require_positive_variances(std::span<const SubjectEffect> effects,
                                       const char* who) {
  for (std::size_t s = 0; s < effects.size(); ++s)
    if (!(effects[s].var_hat > 0.0))
      throw DegenerateDataError(std::string(who) + ": subject " +
                                std::to_string(s) +
                                " has non-positive variance");
}

struct FixedEffectFit {
  std::vector<double> alpha;  // 1 / sigma_s^2
  double sum_alpha = 0.0;
  double sum_alpha_sq = 0.0;
  double theta_fe = 0.0;
  double q = 0.0;  // weighted squared deviation from theta_fe
};

inline FixedEffectFit fixed_effect_fit(std::span<const SubjectEffect> effects) {
  FixedEffectFit f;
  f.alpha.reserve(effects.size());
  double weighted_theta = 0.0;
  for (const auto& e : effects) {
    const double a = 1.0 / e.var_hat;
    f.alpha.push_back(a);
    f.sum_alpha += a;
    f.sum_alpha_sq += a * a;
    weighted_theta += a * e.theta_hat;
  }
  f.theta_fe = weighted_theta / f.sum_alpha;
  for (std::size_t s = 0; s < effects.size(); ++s) {
    const double d = effects[s].theta_hat - f.theta_fe;
    f.q += f.alpha[s] * d * d;
  }
  return f;
}

}  // namespace detail

/// DerSimonian-Laird estimate of the between-subject variance:
///   tau2 = max{0, [Q - (S - 1)] / [sum a - sum a^2 / sum a]}
/// with fixed-effect weights a_s = 1 / sigma_s^2 and Q the weighted squared
/// deviation from the fixed-effect mean. Non-iterative by construction.
inline double dl_tau_squared(std::span<const SubjectEffect> effects) {
  const std::size_t s_count = effects.size();
  if (s_count < 2)
    throw InsufficientDataError("dl_tau_squared: need at least 2 subjects");
  detail::require_positive_variances(effects, "dl_tau_squared");
  const detail::FixedEffectFit f = detail::fixed_effect_fit(effects);
  const double numerator = f.q - static_cast<double>(s_count - 1);
  const double denominator = f.sum_alpha - f.sum_alpha_sq / f.sum_alpha;
  return std::max(0.0, numerator / denominator);
}

/// Raw (unnormalized) combination weights. Equal weighting returns 1/S for
/// every subject; inverse-variance weighting returns 1/(sigma_s^2 + tau2)
/// with tau2 = 0 under the fixed-effect model.
inline std::vector<double> weights(std::span<const SubjectEffect> effects,
                                   Model model, WeightScheme scheme) {
  const std::size_t s_count = effects.size();
  if (s_count == 0) throw InsufficientDataError("weights: no subjects");
  if (scheme == WeightScheme::EqualWeights)
    return std::vector<double>(s_count, 1.0 / static_cast<double>(s_count));
  detail::require_positive_variances(effects, "weights");
  const double tau2 =
      (model == Model::RandomEffectsDL && s_count >= 2) ? dl_tau_squared(effects)
                                                        : 0.0;
  std::vector<double> w;
  w.reserve(s_count);
  for (const auto& e : effects) w.push_back(1.0 / (e.var_hat + tau2));
  return w;
}

/// Combine subject effects into a group effect.
///
/// theta_hat is the convex combination sum(a theta) / sum(a); its variance
/// is sum(a^2 V_s) / (sum a)^2 with V_s = sigma_s^2 + tau2, which reduces to
/// 1 / sum(a) under inverse-variance weighting.
///
/// A single subject is passed through unchanged (with a warning); nothing
/// is combined in that case.
inline GroupResult combine_effects(std::span<const SubjectEffect> effects,
                                   Model model, WeightScheme scheme) {
  const std::size_t s_count = effects.size();
  if (s_count == 0) throw InsufficientDataError("combine_effects: no subjects");

  GroupResult g;
  g.model = model;
  g.scheme = scheme;
  g.n_subjects = s_count;

  if (s_count == 1) {
    g.theta_hat = effects[0].theta_hat;
    g.var_hat = effects[0].var_hat;
    g.weights = {1.0};
    g.tau2 = 0.0;
    g.warnings.push_back(
        "single subject: group result is the subject effect, nothing was "
        "combined");
    return g;
  }

  detail::require_positive_variances(effects, "combine_effects");
  g.tau2 = (model == Model::RandomEffectsDL) ? dl_tau_squared(effects) : 0.0;
  if (model == Model::RandomEffectsDL && s_count < 10)
    g.warnings.push_back(
        "random-effects tau^2 is estimated from fewer than 10 subjects; "
        "p-values may be too small");

  std::vector<double> alpha;
  alpha.reserve(s_count);
  if (scheme == WeightScheme::EqualWeights) {
    alpha.assign(s_count, 1.0 / static_cast<double>(s_count));
  } else {
    for (const auto& e : effects) alpha.push_back(1.0 / (e.var_hat + g.tau2));
  }

  double sum_a = 0.0;
  double sum_at = 0.0;
  for (std::size_t s = 0; s < s_count; ++s) {
    sum_a += alpha[s];
    sum_at += alpha[s] * effects[s].theta_hat;
  }
  g.theta_hat = sum_at / sum_a;

  if (scheme == WeightScheme::InverseVariance) {
    g.var_hat = 1.0 / sum_a;
  } else {
    double acc = 0.0;
    for (std::size_t s = 0; s < s_count; ++s)
      acc += alpha[s] * alpha[s] * (effects[s].var_hat + g.tau2);
    g.var_hat = acc / (sum_a * sum_a);
  }

  g.weights.reserve(s_count);
  for (double a : alpha) g.weights.push_back(a / sum_a);
  return g;
}

/// Test of H0: theta == theta0 on a combined group effect.
inline TestResult group_test(const GroupResult& result, double theta0,
                             ReferencePolicy policy = ReferencePolicy::ZTest) {
  if (!(result.var_hat > 0.0))
    throw DegenerateDataError("group_test: non-positive group variance");
  const double stat = (result.theta_hat - theta0) / std::sqrt(result.var_hat);
  if (policy == ReferencePolicy::TTestSMinus1) {
    if (result.n_subjects < 2)
      throw InsufficientDataError("group_test: t policy needs S >= 2");
    return make_test_result(
        stat, RefDist::student_t(static_cast<double>(result.n_subjects - 1)));
  }
  return make_test_result(stat, RefDist::normal());
}

/// 95% confidence interval theta_hat +/- 1.959964 sqrt(var_hat).
inline constexpr double kZCritical95 = 1.959964;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline Interval group_confidence_interval(const GroupResult& g) {
  const double h = kZCritical95 * std::sqrt(g.var_hat);
  return {g.theta_hat - h, g.theta_hat + h};
}

/// The naive summary statistic: a one-sample t-test that treats the
/// subject-level effect sizes as plain observations, ignoring their
/// estimated variances. Valid under both models, but weaker than the
/// variance-aware combination.
inline TestResult naive_summary_test(std::span<const double> thetas,
                                     double theta0) {
  if (thetas.size() < 2)
    throw InsufficientDataError("naive_summary_test: need at least 2 subjects");
  return one_sample_t(thetas, theta0);
}

/// Stouffer combination of per-subject z-scores: z = sum(z_s) / sqrt(S),
/// standard normal under the global (fixed-effect) null.
inline TestResult stouffer_from_z(std::span<const double> z_scores) {
  if (z_scores.empty())
    throw InsufficientDataError("stouffer_from_z: no z-scores");
  double sum = 0.0;
  for (double z : z_scores) {
    if (!std::isfinite(z))
      throw DomainError("stouffer_from_z: non-finite z-score");
    sum += z;
  }
  const double z = sum / std::sqrt(static_cast<double>(z_scores.size()));
  return make_test_result(z, RefDist::normal());
}

/// Stouffer's method on one-sided p-values, all computed for the same
/// direction: p_s = Pr(T <= t_s | H0). Each p is mapped through the normal
/// quantile z_s = Phi^-1(p_s) and the z-scores are combined; the two-tailed
/// p doubles the smaller tail, so the direction of the effect is resolved
/// post hoc. Boundary values 0 and 1 have infinite quantiles and are
/// rejected; callers that can produce them must clamp first.
inline TestResult stouffer_combine(std::span<const double> p_one_sided) {
  if (p_one_sided.empty())
    throw InsufficientDataError("stouffer_combine: no p-values");
  std::vector<double> z;
  z.reserve(p_one_sided.size());
  for (double p : p_one_sided) {
    if (!(p > 0.0) || !(p < 1.0))
      throw DomainError("stouffer_combine: p-values must lie strictly in (0, 1)");
    z.push_back(std_normal_inv_cdf(p));
  }
  return stouffer_from_z(z);
}

/// Cochran's Q heterogeneity test: Q = sum a_s (theta_s - theta_fe)^2 with
/// fixed-effect weights, chi-squared with S-1 df under homogeneity. Only
/// the upper tail indicates heterogeneity, so p_one_high is the p-value of
/// interest.
inline TestResult cochran_q(std::span<const SubjectEffect> effects) {
  if (effects.size() < 2)
    throw InsufficientDataError("cochran_q: need at least 2 subjects");
  detail::require_positive_variances(effects, "cochran_q");
  const detail::FixedEffectFit f = detail::fixed_effect_fit(effects);
  return make_test_result(
      f.q, RefDist::chi_squared(static_cast<double>(effects.size() - 1)));
}

/// Pooling baseline: concatenates every subject's samples per class and
/// runs one Welch test on the pooled data. Ignores the nested structure and
/// is provided as the documented-invalid comparison method, not for actual
/// inference.
inline TestResult pool_and_test(std::span<const TwoSampleData> subjects) {
  if (subjects.empty())
    throw InsufficientDataError("pool_and_test: no subjects");
  TwoSampleData pooled;
  for (const auto& s : subjects) {
    pooled.x.insert(pooled.x.end(), s.x.begin(), s.x.end());
    pooled.y.insert(pooled.y.end(), s.y.begin(), s.y.end());
  }
  return welch_test(pooled, 0.0);
}

/// Correlation combination result: the group effect lives in the Fisher
/// z-domain; rho and its interval are mapped back with tanh.
struct CorrelationGroup {
  GroupResult group;
  double rho = 0.0;
  double rho_ci_lo = 0.0;
  double rho_ci_hi = 0.0;
};

inline CorrelationGroup correlation_group(std::span<const SubjectEffect> effects,
                                          Model model, WeightScheme scheme) {
  for (const auto& e : effects)
    if (e.kind != EffectKind::FisherZ)
      throw KindError("correlation_group: effects must be Fisher-z transforms");
  CorrelationGroup r;
  r.group = combine_effects(effects, model, scheme);
  const Interval ci = group_confidence_interval(r.group);
  r.rho = fisher_z_inv(r.group.theta_hat);
  r.rho_ci_lo = fisher_z_inv(ci.lo);
  r.rho_ci_hi = fisher_z_inv(ci.hi);
  return r;
}

}  // namespace nestinf
