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

// Subject-level effect-size estimators with analytic variances. Every
// estimator returns a SubjectEffect carrying the point estimate, its
// estimated variance and the sample sizes, which is all the group level
// needs to know about a subject.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "nestinf/errors.hpp"
#include "nestinf/rng.hpp"
#include "nestinf/test_result.hpp"

namespace nestinf {

enum class EffectKind { Mean, PairedDiff, WelchDiff, Auc, FisherZ, OlsCoef };

inline std::string to_string(EffectKind k) {
  switch (k) {
    case EffectKind::Mean: return "mean";
    case EffectKind::PairedDiff: return "paired_diff";
    case EffectKind::WelchDiff: return "welch_diff";
    case EffectKind::Auc: return "auc";
    case EffectKind::FisherZ: return "fisher_z";
    case EffectKind::OlsCoef: return "ols_coef";
  }
  return "?";
}

struct SampleSizes {
  std::size_t n_x = 0;  // N for one-sample kinds
  std::size_t n_y = 0;  // 0 for one-sample kinds
  std::size_t total() const { return n_x + n_y; }
};

/// One subject's estimated effect size and its estimated variance; the unit
/// of exchange between the subject and group levels.
struct SubjectEffect {
  double theta_hat = 0.0;
  double var_hat = 0.0;
  EffectKind kind = EffectKind::Mean;
  SampleSizes n;
  std::optional<double> df;  // subject-level reference df, if meaningful
};

struct TwoSampleData {
  std::vector<double> x;  // condition X
  std::vector<double> y;  // condition Y
};

struct PairedData {
  std::vector<double> x;
  std::vector<double> y;  // same length as x
};

/// Regression samples. The intercept column of ones is implicit, so
/// predictors holds N x K entries (row-major) and the fitted coefficient
/// vector has K+1 entries with index 0 = intercept.
struct RegressionData {
  std::size_t n_predictors = 0;
  std::vector<double> predictors;  // row-major, n_rows x n_predictors
  std::vector<double> response;

  std::size_t n_rows() const { return response.size(); }
};

namespace detail {

inline double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v, double m) {
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

inline double sample_variance(std::span<const double> v) {
  return sample_variance(v, mean(v));
}

inline void require_paired(const PairedData& d) {
  if (d.x.size() != d.y.size())
    throw ShapeError("paired data: x and y lengths differ");
}

}  // namespace detail

/// Sample mean with variance sigma^2 / N (unbiased sample variance).
inline SubjectEffect mean_effect(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2)
    throw InsufficientDataError("mean_effect: need at least 2 samples");
  const double m = detail::mean(samples);
  const double var = detail::sample_variance(samples, m) / static_cast<double>(n);
  return {m, var, EffectKind::Mean, {n, 0}, static_cast<double>(n - 1)};
}

/// One-sample t-test of H0: mean == theta0.
inline TestResult one_sample_t(std::span<const double> samples, double theta0) {
  const std::size_t n = samples.size();
  if (n < 2)
    throw InsufficientDataError("one_sample_t: need at least 2 samples");
  const double m = detail::mean(samples);
  const double s2 = detail::sample_variance(samples, m);
  if (!(s2 > 0.0))
    throw DegenerateDataError("one_sample_t: zero sample variance");
  const double t = (m - theta0) / std::sqrt(s2 / static_cast<double>(n));
  return make_test_result(t, RefDist::student_t(static_cast<double>(n - 1)));
}

/// Mean of paired differences x_i - y_i; reduces to mean_effect on x - y.
inline SubjectEffect paired_diff_effect(const PairedData& data) {
  detail::require_paired(data);
  std::vector<double> diff(data.x.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = data.x[i] - data.y[i];
  SubjectEffect e = mean_effect(diff);
  e.kind = EffectKind::PairedDiff;
  return e;
}

/// Difference of unpaired class means, Var = s_x^2/N_x + s_y^2/N_y, with
/// Welch-Satterthwaite degrees of freedom.
inline SubjectEffect welch_diff_effect(const TwoSampleData& data) {
  const std::size_t nx = data.x.size();
  const std::size_t ny = data.y.size();
  if (nx < 2 || ny < 2)
    throw InsufficientDataError(
        "welch_diff_effect: need at least 2 samples per class");
  const double mx = detail::mean(data.x);
  const double my = detail::mean(data.y);
  const double ax = detail::sample_variance(data.x, mx) / static_cast<double>(nx);
  const double ay = detail::sample_variance(data.y, my) / static_cast<double>(ny);
  SubjectEffect e;
  e.theta_hat = mx - my;
  e.var_hat = ax + ay;
  e.kind = EffectKind::WelchDiff;
  e.n = {nx, ny};
  if (ax + ay > 0.0) {
    const double den = ax * ax / static_cast<double>(nx - 1) +
                       ay * ay / static_cast<double>(ny - 1);
    e.df = (ax + ay) * (ax + ay) / den;
  }
  return e;
}

/// Welch's two-sample t-test of H0: mean(x) - mean(y) == theta0.
inline TestResult welch_test(const TwoSampleData& data, double theta0 = 0.0) {
  const SubjectEffect e = welch_diff_effect(data);
  if (!(e.var_hat > 0.0) || !e.df)
    throw DegenerateDataError("welch_test: zero variance in both classes");
  const double t = (e.theta_hat - theta0) / std::sqrt(e.var_hat);
  return make_test_result(t, RefDist::student_t(*e.df));
}

/// Ranks starting at one; tied values share the average of their positional
/// ranks. Ranks always sum to N(N+1)/2.
inline std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the midrank
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

struct RankSumStats {
  double w = 0.0;  // rank sum of class X over the pooled sample
  double u = 0.0;  // Mann-Whitney U
  double auc = 0.0;
};

inline RankSumStats rank_sum_stats(const TwoSampleData& data) {
  const std::size_t nx = data.x.size();
  const std::size_t ny = data.y.size();
  std::vector<double> pooled;
  pooled.reserve(nx + ny);
  pooled.insert(pooled.end(), data.x.begin(), data.x.end());
  pooled.insert(pooled.end(), data.y.begin(), data.y.end());
  const std::vector<double> ranks = midranks(pooled);
  RankSumStats s;
  for (std::size_t i = 0; i < nx; ++i) s.w += ranks[i];
  s.u = s.w - 0.5 * static_cast<double>(nx) * static_cast<double>(nx + 1);
  s.auc = s.u / (static_cast<double>(nx) * static_cast<double>(ny));
  return s;
}

}  // namespace detail

/// AUC estimate A = U / (N_x N_y) from pooled midranks, with the
/// Hanley-McNeil variance approximation. With midranks, A equals the
/// fraction of (x, y) pairs with x > y, ties counted half.
///
/// The variance is floored at 1 / (N_x N_y (N_x + N_y)) so that perfect
/// separation (A in {0, 1}, where the Hanley-McNeil formula collapses to
/// zero) still yields a finite inverse-variance weight.
inline SubjectEffect auc_effect(const TwoSampleData& data) {
  const std::size_t nx = data.x.size();
  const std::size_t ny = data.y.size();
  if (nx == 0 || ny == 0)
    throw InsufficientDataError("auc_effect: empty class");
  if (nx + ny < 3)
    throw InsufficientDataError("auc_effect: variance needs N_x + N_y >= 3");
  const detail::RankSumStats s = detail::rank_sum_stats(data);
  const double a = s.auc;
  const double q1 = a / (2.0 - a);
  const double q2 = 2.0 * a * a / (1.0 + a);
  const double nxd = static_cast<double>(nx);
  const double nyd = static_cast<double>(ny);
  double var = (a * (1.0 - a) + (nxd - 1.0) * (q1 - a * a) +
                (nyd - 1.0) * (q2 - a * a)) /
               (nxd * nyd);
  const double floor = 1.0 / (nxd * nyd * (nxd + nyd));
  var = std::max(var, floor);
  return {a, var, EffectKind::Auc, {nx, ny}, std::nullopt};
}

/// z-test of H0: A == 0.5 using the distribution-free null variance
/// Var(A) = (N_x + N_y + 1) / (12 N_x N_y).
///
/// The normal approximation is customarily considered adequate for
/// N_x + N_y >= 20; smaller samples are accepted but the guideline is not
/// enforced. The null variance additionally assumes i.i.d. ordinal
/// observations with equal class variances.
inline TestResult auc_null_test(const TwoSampleData& data) {
  const std::size_t nx = data.x.size();
  const std::size_t ny = data.y.size();
  if (nx == 0 || ny == 0)
    throw InsufficientDataError("auc_null_test: empty class");
  const detail::RankSumStats s = detail::rank_sum_stats(data);
  const double nxd = static_cast<double>(nx);
  const double nyd = static_cast<double>(ny);
  const double var0 = (nxd + nyd + 1.0) / (12.0 * nxd * nyd);
  const double z = (s.auc - 0.5) / std::sqrt(var0);
  return make_test_result(z, RefDist::normal());
}

/// Fisher z-transform arctanh(rho), defined for |rho| < 1.
inline double fisher_z(double rho) {
  if (!(std::fabs(rho) < 1.0))
    throw DomainError("fisher_z: |rho| must be < 1");
  return std::atanh(rho);
}

/// Inverse Fisher transform tanh(z).
inline double fisher_z_inv(double z) {
  if (!std::isfinite(z)) throw DomainError("fisher_z_inv: non-finite input");
  return std::tanh(z);
}

/// Sample Pearson product-moment correlation of the pairs.
inline double pearson_rho(const PairedData& data) {
  detail::require_paired(data);
  const std::size_t n = data.x.size();
  if (n < 2) throw InsufficientDataError("pearson_rho: need at least 2 pairs");
  const double mx = detail::mean(data.x);
  const double my = detail::mean(data.y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = data.x[i] - mx;
    const double dy = data.y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw DegenerateDataError("pearson_rho: a coordinate has zero variance");
  return sxy / std::sqrt(sxx * syy);
}

/// Fisher-transformed correlation with variance 1/(N-3). theta_hat lives in
/// the z-domain; the correlation is recovered with fisher_z_inv.
/// Perfect correlation is rejected rather than clamped: its transform is
/// infinite and would silently dominate any weighted average.
inline SubjectEffect pearson_effect(const PairedData& data) {
  detail::require_paired(data);
  const std::size_t n = data.x.size();
  if (n < 4)
    throw InsufficientDataError("pearson_effect: need at least 4 pairs");
  const double rho = pearson_rho(data);
  if (!(std::fabs(rho) < 1.0))
    throw DegenerateDataError("pearson_effect: perfect correlation (|rho| = 1)");
  SubjectEffect e;
  e.theta_hat = std::atanh(rho);
  e.var_hat = 1.0 / static_cast<double>(n - 3);
  e.kind = EffectKind::FisherZ;
  e.n = {n, 0};
  return e;
}

/// Coefficient of determination rho^2. Non-directional and biased as a
/// group-level effect: do not feed it into inverse-variance combination.
inline double r_squared(double rho_hat) {
  if (!(std::fabs(rho_hat) <= 1.0))
    throw DomainError("r_squared: |rho| must be <= 1");
  return rho_hat * rho_hat;
}

/// OLS fit summary: coefficients, their covariance, residual variance.
struct OlsFit {
  std::vector<double> beta;      // K+1 entries, index 0 = intercept
  std::vector<double> coef_cov;  // (K+1) x (K+1), row-major
  double sigma2_eta = 0.0;       // unbiased residual variance
  double df = 0.0;               // N - (K+1)

  std::size_t n_coefs() const { return beta.size(); }
  double coef_var(std::size_t k) const { return coef_cov[k * beta.size() + k]; }
};

/// Least-squares fit by Householder QR. The normal-equations inverse is
/// never formed; the coefficient covariance sigma2 * (X'X)^-1 is assembled
/// from the inverse of the triangular factor.
inline OlsFit ols_fit(const RegressionData& data) {
  const std::size_t n = data.n_rows();
  const std::size_t k = data.n_predictors;
  const std::size_t p = k + 1;
  if (data.predictors.size() != n * k)
    throw ShapeError("ols_fit: predictor matrix size mismatch");
  if (n <= p)
    throw InsufficientDataError("ols_fit: need more rows than coefficients");

  // column-major working copy with the implicit intercept column
  std::vector<double> a(n * p);
  for (std::size_t i = 0; i < n; ++i) a[i] = 1.0;
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i)
      a[(j + 1) * n + i] = data.predictors[i * k + j];
  std::vector<double> qty(data.response.begin(), data.response.end());

  for (std::size_t j = 0; j < p; ++j) {
    double* col = &a[j * n];
    double sigma = 0.0;
    for (std::size_t i = j + 1; i < n; ++i) sigma += col[i] * col[i];
    const double x0 = col[j];
    const double normx = std::sqrt(x0 * x0 + sigma);
    if (normx == 0.0) throw SingularDesignError("ols_fit: rank-deficient design");
    const double v0 = x0 + (x0 >= 0.0 ? normx : -normx);
    const double vnorm2 = v0 * v0 + sigma;
    col[j] = (x0 >= 0.0 ? -normx : normx);  // R_jj
    if (vnorm2 > 0.0) {
      const double beta = 2.0 / vnorm2;
      // reflect the remaining columns and the response
      for (std::size_t jj = j + 1; jj < p; ++jj) {
        double* c = &a[jj * n];
        double dot = v0 * c[j];
        for (std::size_t i = j + 1; i < n; ++i) dot += col[i] * c[i];
        const double f = beta * dot;
        c[j] -= f * v0;
        for (std::size_t i = j + 1; i < n; ++i) c[i] -= f * col[i];
      }
      double dot = v0 * qty[j];
      for (std::size_t i = j + 1; i < n; ++i) dot += col[i] * qty[i];
      const double f = beta * dot;
      qty[j] -= f * v0;
      for (std::size_t i = j + 1; i < n; ++i) qty[i] -= f * col[i];
    }
  }

  // rank check on the triangular diagonal
  double max_diag = 0.0;
  for (std::size_t j = 0; j < p; ++j)
    max_diag = std::max(max_diag, std::fabs(a[j * n + j]));
  for (std::size_t j = 0; j < p; ++j)
    if (std::fabs(a[j * n + j]) <= max_diag * 1e-12)
      throw SingularDesignError("ols_fit: rank-deficient design");

  OlsFit fit;
  fit.beta.assign(p, 0.0);
  for (std::size_t jj = p; jj-- > 0;) {
    double s = qty[jj];
    for (std::size_t m = jj + 1; m < p; ++m) s -= a[m * n + jj] * fit.beta[m];
    fit.beta[jj] = s / a[jj * n + jj];
  }

  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fitted = fit.beta[0];
    for (std::size_t j = 0; j < k; ++j)
      fitted += fit.beta[j + 1] * data.predictors[i * k + j];
    const double r = data.response[i] - fitted;
    rss += r * r;
  }
  fit.df = static_cast<double>(n - p);
  fit.sigma2_eta = rss / fit.df;

  // R^-1 by back-substitution, then cov = sigma2 * R^-1 R^-T
  std::vector<double> rinv(p * p, 0.0);  // row-major
  for (std::size_t col = 0; col < p; ++col) {
    for (std::size_t row = col + 1; row-- > 0;) {
      double s = (row == col) ? 1.0 : 0.0;
      for (std::size_t m = row + 1; m <= col; ++m)
        s -= a[m * n + row] * rinv[m * p + col];
      rinv[row * p + col] = s / a[row * n + row];
    }
  }
  fit.coef_cov.assign(p * p, 0.0);
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t c = 0; c < p; ++c) {
      double s = 0.0;
      for (std::size_t m = std::max(r, c); m < p; ++m)
        s += rinv[r * p + m] * rinv[c * p + m];
      fit.coef_cov[r * p + c] = fit.sigma2_eta * s;
    }
  return fit;
}

/// Coefficient k of an OLS fit as a subject-level effect.
inline SubjectEffect ols_coef_effect(const OlsFit& fit, std::size_t coef_index) {
  if (coef_index >= fit.n_coefs())
    throw DomainError("ols_coef_effect: coefficient index out of range");
  SubjectEffect e;
  e.theta_hat = fit.beta[coef_index];
  e.var_hat = fit.coef_var(coef_index);
  e.kind = EffectKind::OlsCoef;
  e.n = {static_cast<std::size_t>(fit.df) + fit.n_coefs(), 0};
  e.df = fit.df;
  return e;
}

struct SignedRankSum {
  double w_plus = 0.0;     // rank sum of the positive differences
  std::size_t n_used = 0;  // differences remaining after zeros are dropped
};

/// W+ over the midranks of |diffs|; exact zeros are discarded first.
inline SignedRankSum signed_rank_sum(std::span<const double> diffs) {
  std::vector<double> abs_d;
  std::vector<bool> positive;
  abs_d.reserve(diffs.size());
  for (double d : diffs) {
    if (d == 0.0) continue;
    abs_d.push_back(std::fabs(d));
    positive.push_back(d > 0.0);
  }
  if (abs_d.empty())
    throw DegenerateDataError("signed_rank_sum: all differences are zero");
  const std::vector<double> ranks = midranks(abs_d);
  SignedRankSum s;
  s.n_used = abs_d.size();
  for (std::size_t i = 0; i < abs_d.size(); ++i)
    if (positive[i]) s.w_plus += ranks[i];
  return s;
}

/// Wilcoxon signed-rank test with the normal approximation
/// z = (W+ - n(n+1)/4) / sqrt(n(n+1)(2n+1)/24). A half-step continuity
/// adjustment toward the mean is applied, which keeps small-sample tail
/// areas close to the exact sign-flip distribution.
inline TestResult wilcoxon_signed_rank(std::span<const double> diffs) {
  const SignedRankSum s = signed_rank_sum(diffs);
  const double n = static_cast<double>(s.n_used);
  const double mu = n * (n + 1.0) / 4.0;
  const double sigma = std::sqrt(n * (n + 1.0) * (2.0 * n + 1.0) / 24.0);
  const double dev = s.w_plus - mu;
  const double adj = std::copysign(std::max(0.0, std::fabs(dev) - 0.5), dev);
  return make_test_result(adj / sigma, RefDist::normal());
}

/// Wald z-test of H0: theta == theta0 for an effect with estimated variance.
inline TestResult subject_z_test(const SubjectEffect& effect, double theta0) {
  if (!(effect.var_hat > 0.0))
    throw DegenerateDataError("subject_z_test: non-positive variance");
  const double z = (effect.theta_hat - theta0) / std::sqrt(effect.var_hat);
  return make_test_result(z, RefDist::normal());
}

/// Empirical variance of a statistic over b_replicates with-replacement
/// resamples of the input. The statistic is any callable taking a
/// std::span<const T>.
template <class T, class Stat>
double bootstrap_variance(std::span<const T> samples, Stat&& statistic,
                          int b_replicates, RngState& rng) {
  if (b_replicates < 2)
    throw DomainError("bootstrap_variance: need at least 2 replicates");
  if (samples.empty())
    throw InsufficientDataError("bootstrap_variance: empty sample");
  const std::size_t n = samples.size();
  std::vector<T> resample(n);
  std::vector<double> stats(static_cast<std::size_t>(b_replicates));
  for (auto& s : stats) {
    for (std::size_t i = 0; i < n; ++i)
      resample[i] = samples[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(n) - 1))];
    s = statistic(std::span<const T>(resample));
  }
  return detail::sample_variance(stats);
}

}  // namespace nestinf
