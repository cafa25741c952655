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

// Monte Carlo harness measuring H0 rejection rates of the group-level
// methods on synthetic nested two-sample data.
//
// Generative recipe per subject: the subject's true mean difference is
// d_s = d + xi_s with xi_s ~ N(0, sigma_rand^2); class sizes are uniform
// integers in [n_min, n_max], the class standard deviation v_s is uniform in
// [v_min, v_max], and the class-X mean mu_x is uniform in [mu_min, mu_max].
// Class X samples have mean mu_x and class Y samples mean mu_x + d_s, both
// with standard deviation v_s, drawn either from Gaussians or from F(2, 5)
// variates rescaled to the required mean and variance.

#pragma once

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "nestinf/combine.hpp"
#include "nestinf/effect.hpp"
#include "nestinf/rng.hpp"

namespace nestinf {

enum class Family { Gaussian, FScaled };

inline std::string to_string(Family f) {
  return f == Family::Gaussian ? "gaussian" : "fscaled";
}

/// Full generative specification of one Monte Carlo scenario.
struct SimConfig {
  std::size_t n_subjects = 20;
  std::vector<double> d_grid = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  double sigma_rand = 0.0;  // between-subject SD of the true effect
  Family family = Family::Gaussian;
  int n_min = 50;  // class sizes drawn uniformly, both ends inclusive
  int n_max = 80;
  double v_min = 0.5;  // class SD range
  double v_max = 2.0;
  double mu_min = -3.0;  // class-X mean range
  double mu_max = 3.0;
  int reps = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 42;
  unsigned threads = 1;  // 0 = hardware concurrency

  void validate() const {
    if (n_subjects < 1) throw DomainError("SimConfig: need at least 1 subject");
    if (reps < 1) throw DomainError("SimConfig: reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
      throw DomainError("SimConfig: alpha must lie in (0, 1)");
    if (n_min < 1 || n_min > n_max) throw DomainError("SimConfig: bad n range");
    if (!(v_min >= 0.0) || v_min > v_max)
      throw DomainError("SimConfig: bad v range");
    if (mu_min > mu_max) throw DomainError("SimConfig: bad mu range");
    if (!(sigma_rand >= 0.0))
      throw DomainError("SimConfig: sigma_rand must be >= 0");
  }
};

enum class Method {
  Pooling,
  NaivePairedT,
  NaiveSignedRank,
  SssFeEqual,
  SssFeInvVar,
  SssReEqual,
  SssReInvVar,
  Stouffer,
  SssReInvVarAuc,
};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::Pooling: return "pooling";
    case Method::NaivePairedT: return "naive_paired_t";
    case Method::NaiveSignedRank: return "naive_signed_rank";
    case Method::SssFeEqual: return "sss_fe_equal";
    case Method::SssFeInvVar: return "sss_fe_invvar";
    case Method::SssReEqual: return "sss_re_equal";
    case Method::SssReInvVar: return "sss_re_invvar";
    case Method::Stouffer: return "stouffer";
    case Method::SssReInvVarAuc: return "sss_re_invvar_auc";
  }
  return "?";
}

/// One subject's generated data plus the parameters it was drawn with.
struct SubjectDraw {
  TwoSampleData data;
  double d_s = 0.0;
  double mu_x = 0.0;
  double v_s = 0.0;
};

// Subject-level p-values passed to Stouffer are clamped away from {0, 1}
// before the quantile transform.
inline constexpr double kStoufferClampLo = 1e-15;
inline constexpr double kStoufferClampHi = 1.0 - 1e-15;

inline SubjectDraw gen_subject_draw(const SimConfig& config, RngState& rng,
                                    double d) {
  config.validate();
  SubjectDraw out;
  out.d_s = d + sample_normal(rng, 0.0, config.sigma_rand);
  const auto n_x =
      static_cast<std::size_t>(rng.uniform_int(config.n_min, config.n_max));
  const auto n_y =
      static_cast<std::size_t>(rng.uniform_int(config.n_min, config.n_max));
  out.v_s = rng.uniform_real(config.v_min, config.v_max);
  out.mu_x = rng.uniform_real(config.mu_min, config.mu_max);
  const double mu_y = out.mu_x + out.d_s;

  out.data.x.reserve(n_x);
  out.data.y.reserve(n_y);
  if (config.family == Family::Gaussian) {
    for (std::size_t i = 0; i < n_x; ++i)
      out.data.x.push_back(sample_normal(rng, out.mu_x, out.v_s));
    for (std::size_t i = 0; i < n_y; ++i)
      out.data.y.push_back(sample_normal(rng, mu_y, out.v_s));
  } else {
    // rescale F(2,5) draws to the target mean and SD
    const double f_mu = f_distribution_mean(5.0);            // 5/3
    const double f_sd = std::sqrt(f_distribution_variance(2.0, 5.0));  // sqrt(250/18)
    const double scale = out.v_s / f_sd;
    for (std::size_t i = 0; i < n_x; ++i)
      out.data.x.push_back(out.mu_x + (sample_f(rng, 2.0, 5.0) - f_mu) * scale);
    for (std::size_t i = 0; i < n_y; ++i)
      out.data.y.push_back(mu_y + (sample_f(rng, 2.0, 5.0) - f_mu) * scale);
  }
  return out;
}

/// Generates one subject's two-sample data for true mean difference d.
inline TwoSampleData gen_subject(const SimConfig& config, RngState& rng,
                                 double d) {
  return gen_subject_draw(config, rng, d).data;
}

namespace detail {

inline double clamp_p(double p) {
  return std::min(kStoufferClampHi, std::max(kStoufferClampLo, p));
}

// Rejection decisions of one replication, as a bitmask indexed by the
// position of each method in `methods`. Pure function of
// (cell_seed, rep, config, d), so ordering and threading are irrelevant.
inline std::uint16_t replication_rejections(const SimConfig& config,
                                            std::uint64_t cell_seed,
                                            std::uint64_t rep, double d,
                                            const std::vector<Method>& methods) {
  const std::size_t s_count = config.n_subjects;
  std::vector<TwoSampleData> data(s_count);
  for (std::size_t s = 0; s < s_count; ++s) {
    RngState rng = RngState::substream(cell_seed, rep, s);
    data[s] = gen_subject(config, rng, d);
  }

  bool needs_welch = false;
  bool needs_auc = false;
  for (Method m : methods) {
    if (m == Method::SssReInvVarAuc)
      needs_auc = true;
    else if (m != Method::Pooling)
      needs_welch = true;
  }

  std::vector<SubjectEffect> welch;
  std::vector<double> thetas;
  if (needs_welch) {
    welch.reserve(s_count);
    thetas.reserve(s_count);
    for (const auto& sd : data) {
      welch.push_back(welch_diff_effect(sd));
      thetas.push_back(welch.back().theta_hat);
    }
  }
  std::vector<SubjectEffect> auc;
  if (needs_auc) {
    auc.reserve(s_count);
    for (const auto& sd : data) auc.push_back(auc_effect(sd));
  }

  std::uint16_t bits = 0;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    double p_two = 1.0;
    switch (methods[i]) {
      case Method::Pooling:
        p_two = pool_and_test(data).p_two;
        break;
      case Method::NaivePairedT:
        p_two = naive_summary_test(thetas, 0.0).p_two;
        break;
      case Method::NaiveSignedRank:
        p_two = wilcoxon_signed_rank(thetas).p_two;
        break;
      case Method::SssFeEqual:
        p_two = group_test(combine_effects(welch, Model::FixedEffect,
                                           WeightScheme::EqualWeights),
                           0.0)
                    .p_two;
        break;
      case Method::SssFeInvVar:
        p_two = group_test(combine_effects(welch, Model::FixedEffect,
                                           WeightScheme::InverseVariance),
                           0.0)
                    .p_two;
        break;
      case Method::SssReEqual:
        p_two = group_test(combine_effects(welch, Model::RandomEffectsDL,
                                           WeightScheme::EqualWeights),
                           0.0)
                    .p_two;
        break;
      case Method::SssReInvVar:
        p_two = group_test(combine_effects(welch, Model::RandomEffectsDL,
                                           WeightScheme::InverseVariance),
                           0.0)
                    .p_two;
        break;
      case Method::Stouffer: {
        // one-sided p-values of the subject-level Welch tests, all for the
        // same (lower-tail) direction
        std::vector<double> p_low;
        p_low.reserve(s_count);
        for (const auto& e : welch) {
          const double t = e.theta_hat / std::sqrt(e.var_hat);
          p_low.push_back(clamp_p(student_t_cdf(t, e.df.value())));
        }
        p_two = stouffer_combine(p_low).p_two;
        break;
      }
      case Method::SssReInvVarAuc:
        p_two = group_test(combine_effects(auc, Model::RandomEffectsDL,
                                           WeightScheme::InverseVariance),
                           0.5)
                    .p_two;
        break;
    }
    if (p_two < config.alpha) bits |= static_cast<std::uint16_t>(1u << i);
  }
  return bits;
}

}  // namespace detail

/// Rejection rate of each requested method over config.reps replications at
/// true mean difference d. Estimator failures in any replication abort the
/// run with a diagnostic; replications are never silently skipped.
///
/// The per-replication data are a pure function of (config.seed, d, rep,
/// subject), so serial and threaded execution produce identical rates.
inline std::map<Method, double> run_cell(const SimConfig& config, double d,
                                         const std::vector<Method>& methods) {
  config.validate();
  if (methods.empty()) throw DomainError("run_cell: no methods requested");
  if (methods.size() > 16) throw DomainError("run_cell: too many methods");

  const std::uint64_t cell_seed =
      fold_seed(config.seed, std::bit_cast<std::uint64_t>(d));
  const int reps = config.reps;
  std::vector<std::uint16_t> rejected(static_cast<std::size_t>(reps), 0);

  unsigned threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));

  auto run_rep = [&](int rep) {
    try {
      rejected[static_cast<std::size_t>(rep)] = detail::replication_rejections(
          config, cell_seed, static_cast<std::uint64_t>(rep), d, methods);
    } catch (const Error& e) {
      throw Error("run_cell: replication " + std::to_string(rep) +
                  " failed: " + e.what());
    }
  };

  if (threads <= 1) {
    for (int rep = 0; rep < reps; ++rep) run_rep(rep);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const int rep = next.fetch_add(1);
        if (rep >= reps) return;
        try {
          run_rep(rep);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::map<Method, double> rates;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    long count = 0;
    for (std::uint16_t bits : rejected)
      if (bits & (1u << i)) ++count;
    rates[methods[i]] = static_cast<double>(count) / static_cast<double>(reps);
  }
  return rates;
}

/// Rejection-rate curve of one method over a d grid.
struct RejectionCurve {
  Method method = Method::Pooling;
  std::vector<double> d_values;
  std::vector<double> rates;
  std::vector<double> std_errors;  // binomial SE sqrt(r(1-r)/reps)
  int reps = 0;
  std::uint64_t seed = 0;  // master seed of the simulation run
};

struct Panel {
  std::string name;
  SimConfig config;
  std::vector<RejectionCurve> curves;
};

inline double binomial_se(double rate, int reps) {
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
}

namespace detail {

inline Panel run_panel(std::string name, const SimConfig& config,
                       const std::vector<Method>& methods,
                       std::uint64_t master_seed) {
  Panel panel;
  panel.name = std::move(name);
  panel.config = config;
  panel.curves.reserve(methods.size());
  for (Method m : methods) {
    RejectionCurve c;
    c.method = m;
    c.reps = config.reps;
    c.seed = master_seed;
    panel.curves.push_back(std::move(c));
  }
  for (double d : config.d_grid) {
    const std::map<Method, double> rates = run_cell(config, d, methods);
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const double r = rates.at(methods[i]);
      panel.curves[i].d_values.push_back(d);
      panel.curves[i].rates.push_back(r);
      panel.curves[i].std_errors.push_back(binomial_se(r, config.reps));
    }
  }
  return panel;
}

}  // namespace detail

/// Gaussian data, fixed-effect and random-effects models, S in {5, 20}:
/// four panels comparing pooling, the naive paired t-test, the four
/// weighting variants and Stouffer's method.
inline std::vector<Panel> run_simulation1(std::uint64_t seed, int reps = 1000,
                                          unsigned threads = 1) {
  const std::vector<Method> methods = {
      Method::Pooling,     Method::NaivePairedT, Method::SssFeEqual,
      Method::SssFeInvVar, Method::SssReEqual,   Method::SssReInvVar,
      Method::Stouffer};
  struct Spec {
    const char* name;
    double sigma_rand;
    std::size_t s;
  };
  const Spec specs[] = {{"fe_s5", 0.0, 5},
                        {"fe_s20", 0.0, 20},
                        {"re_s5", 0.2, 5},
                        {"re_s20", 0.2, 20}};
  std::vector<Panel> panels;
  panels.reserve(4);
  for (std::size_t i = 0; i < 4; ++i) {
    SimConfig config;
    config.n_subjects = specs[i].s;
    config.sigma_rand = specs[i].sigma_rand;
    config.family = Family::Gaussian;
    config.reps = reps;
    config.threads = threads;
    config.seed = fold_seed(seed, i);
    panels.push_back(detail::run_panel(specs[i].name, config, methods, seed));
  }
  return panels;
}

/// S = 20 panels contrasting parametric and rank-based methods on rescaled
/// F(2,5) data (fixed and random effects) and on Gaussian random-effects
/// data.
inline std::vector<Panel> run_simulation2(std::uint64_t seed, int reps = 1000,
                                          unsigned threads = 1) {
  const std::vector<Method> methods = {
      Method::SssReInvVar, Method::SssReInvVarAuc, Method::NaivePairedT,
      Method::NaiveSignedRank};
  struct Spec {
    const char* name;
    Family family;
    double sigma_rand;
  };
  const Spec specs[] = {{"fscaled_fe_s20", Family::FScaled, 0.0},
                        {"fscaled_re_s20", Family::FScaled, 0.2},
                        {"gaussian_re_s20", Family::Gaussian, 0.2}};
  std::vector<Panel> panels;
  panels.reserve(3);
  for (std::size_t i = 0; i < 3; ++i) {
    SimConfig config;
    config.n_subjects = 20;
    config.sigma_rand = specs[i].sigma_rand;
    config.family = specs[i].family;
    config.reps = reps;
    config.threads = threads;
    config.seed = fold_seed(seed, 100 + i);
    panels.push_back(detail::run_panel(specs[i].name, config, methods, seed));
  }
  return panels;
}

/// Generative constants of the pooling illustration: S subjects with
/// subject offsets mu_s ~ N(0, offset_sd^2); per subject, N samples per
/// variable with x ~ N(mu_s - class_shift, within_sd^2) and
/// y ~ N(mu_s + class_shift, within_sd^2).
struct PoolingDemoConfig {
  std::size_t n_subjects = 4;
  std::size_t n_per_subject = 20;
  double offset_sd = 15.0;
  double class_shift = 1.0;
  double within_sd = 2.0;
};

/// Subject-level versus pooled conclusions on one generated dataset.
struct PoolingDemoReport {
  PoolingDemoConfig config;
  std::uint64_t seed = 0;
  std::vector<double> subject_welch_p;    // per-subject mean-difference tests
  std::vector<double> subject_rho;        // per-subject Pearson correlations
  std::vector<double> subject_pearson_p;
  double pooled_welch_p = 1.0;
  double pooled_rho = 0.0;
  double pooled_pearson_p = 1.0;
};

inline PoolingDemoReport pooling_demo(const PoolingDemoConfig& config,
                                      std::uint64_t seed) {
  PoolingDemoReport report;
  report.config = config;
  report.seed = seed;

  std::vector<TwoSampleData> subjects;
  PairedData pooled_pairs;
  subjects.reserve(config.n_subjects);
  for (std::size_t s = 0; s < config.n_subjects; ++s) {
    RngState rng = RngState::substream(seed, 0, s);
    const double mu_s = sample_normal(rng, 0.0, config.offset_sd);
    TwoSampleData data;
    data.x.reserve(config.n_per_subject);
    data.y.reserve(config.n_per_subject);
    for (std::size_t i = 0; i < config.n_per_subject; ++i)
      data.x.push_back(
          sample_normal(rng, mu_s - config.class_shift, config.within_sd));
    for (std::size_t i = 0; i < config.n_per_subject; ++i)
      data.y.push_back(
          sample_normal(rng, mu_s + config.class_shift, config.within_sd));

    report.subject_welch_p.push_back(welch_test(data).p_two);
    PairedData pairs{data.x, data.y};
    report.subject_rho.push_back(pearson_rho(pairs));
    report.subject_pearson_p.push_back(
        subject_z_test(pearson_effect(pairs), 0.0).p_two);
    pooled_pairs.x.insert(pooled_pairs.x.end(), data.x.begin(), data.x.end());
    pooled_pairs.y.insert(pooled_pairs.y.end(), data.y.begin(), data.y.end());
    subjects.push_back(std::move(data));
  }

  report.pooled_welch_p = pool_and_test(subjects).p_two;
  report.pooled_rho = pearson_rho(pooled_pairs);
  report.pooled_pearson_p =
      subject_z_test(pearson_effect(pooled_pairs), 0.0).p_two;
  return report;
}

inline PoolingDemoReport pooling_demo(std::uint64_t seed) {
  return pooling_demo(PoolingDemoConfig{}, seed);
}

}  // namespace nestinf
