#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nestinf/dist.hpp"
#include "nestinf/effect.hpp"
#include "nestinf/rng.hpp"

using namespace nestinf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// independent oracle: half-credit pair counting, no ranking involved
double auc_brute_force(const TwoSampleData& d) {
  double credit = 0.0;
  for (double x : d.x)
    for (double y : d.y) {
      if (x > y)
        credit += 1.0;
      else if (x == y)
        credit += 0.5;
    }
  return credit / (static_cast<double>(d.x.size()) * static_cast<double>(d.y.size()));
}

// independent oracle: exact two-sided p of the signed-rank statistic by
// enumerating every sign assignment of the given absolute ranks
double signed_rank_exact_p_two(std::span<const double> diffs) {
  std::vector<double> abs_d;
  for (double d : diffs)
    if (d != 0.0) abs_d.push_back(std::fabs(d));
  const std::vector<double> ranks = midranks(abs_d);
  const std::size_t n = ranks.size();
  double w_obs = 0.0;
  {
    std::size_t k = 0;
    for (double d : diffs) {
      if (d == 0.0) continue;
      if (d > 0.0) w_obs += ranks[k];
      ++k;
    }
  }
  const double total = std::accumulate(ranks.begin(), ranks.end(), 0.0);
  const double mu = total / 2.0;
  const double dev_obs = std::fabs(w_obs - mu);
  long hits = 0;
  const std::size_t patterns = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) w += ranks[i];
    if (std::fabs(w - mu) >= dev_obs - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(patterns);
}

// independent oracle: normal equations solved by long double Gaussian
// elimination with partial pivoting, including the full inverse
struct NormalEquationsOracle {
  std::vector<double> beta;
  std::vector<double> cov;  // sigma2 * (X'X)^-1, row-major
  double sigma2 = 0.0;
};

NormalEquationsOracle solve_normal_equations(const RegressionData& data) {
  const std::size_t n = data.n_rows();
  const std::size_t k = data.n_predictors;
  const std::size_t p = k + 1;
  auto x_at = [&](std::size_t i, std::size_t j) -> long double {
    return j == 0 ? 1.0L : static_cast<long double>(data.predictors[i * k + (j - 1)]);
  };
  // augmented [XtX | Xty | I]
  std::vector<std::vector<long double>> m(p,
                                          std::vector<long double>(2 * p + 1, 0.0L));
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) {
      long double s = 0.0L;
      for (std::size_t i = 0; i < n; ++i) s += x_at(i, r) * x_at(i, c);
      m[r][c] = s;
    }
    long double s = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      s += x_at(i, r) * static_cast<long double>(data.response[i]);
    m[r][p] = s;
    m[r][p + 1 + r] = 1.0L;
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::fabs(static_cast<double>(m[r][col])) >
          std::fabs(static_cast<double>(m[pivot][col])))
        pivot = r;
    std::swap(m[col], m[pivot]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const long double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < 2 * p + 1; ++c) m[r][c] -= f * m[col][c];
    }
  }
  NormalEquationsOracle out;
  out.beta.resize(p);
  for (std::size_t r = 0; r < p; ++r)
    out.beta[r] = static_cast<double>(m[r][p] / m[r][r]);
  long double rss = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double fitted = 0.0L;
    for (std::size_t j = 0; j < p; ++j)
      fitted += static_cast<long double>(out.beta[j]) * x_at(i, j);
    const long double r = static_cast<long double>(data.response[i]) - fitted;
    rss += r * r;
  }
  out.sigma2 = static_cast<double>(rss / static_cast<long double>(n - p));
  out.cov.resize(p * p);
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t c = 0; c < p; ++c)
      out.cov[r * p + c] =
          static_cast<double>(m[r][p + 1 + c] / m[r][r]) * out.sigma2;
  return out;
}

}  // namespace

// ---- mean / t-test ---------------------------------------------------------

TEST_CASE("mean_effect on a small sample", "[effect]") {
  const std::vector<double> v = {1.0, 2.0, 3.0};
  const SubjectEffect e = mean_effect(v);
  REQUIRE(e.theta_hat == 2.0);
  REQUIRE(e.var_hat == 1.0 / 3.0);
  REQUIRE(e.kind == EffectKind::Mean);
  REQUIRE(e.df.value() == 2.0);
  REQUIRE(e.n.n_x == 3);
}

TEST_CASE("mean_effect of a constant sample has zero variance", "[effect]") {
  const std::vector<double> v = {5.0, 5.0, 5.0, 5.0};
  const SubjectEffect e = mean_effect(v);
  REQUIRE(e.theta_hat == 5.0);
  REQUIRE(e.var_hat == 0.0);
}

TEST_CASE("mean_effect translation equivariance", "[effect]") {
  RngState rng(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(10);
    for (auto& x : v) x = sample_normal(rng, 0.0, 2.0);
    const double c = rng.uniform_real(-5.0, 5.0);
    std::vector<double> shifted = v;
    for (auto& x : shifted) x += c;
    const SubjectEffect a = mean_effect(v);
    const SubjectEffect b = mean_effect(shifted);
    REQUIRE_THAT(b.theta_hat - a.theta_hat, WithinAbs(c, 1e-12));
    REQUIRE_THAT(b.var_hat, WithinAbs(a.var_hat, 1e-12));
  }
}

TEST_CASE("mean_effect needs two samples", "[effect]") {
  const std::vector<double> v = {1.0};
  REQUIRE_THROWS_AS(mean_effect(v), InsufficientDataError);
}

TEST_CASE("one-sample t at the null is exactly centered", "[effect]") {
  const std::vector<double> v = {1.0, 2.0, 3.0};
  const TestResult r = one_sample_t(v, 2.0);
  REQUIRE(r.statistic == 0.0);
  REQUIRE(r.p_two == 1.0);
}

TEST_CASE("one-sample t worked example", "[effect]") {
  const std::vector<double> v = {1.0, 2.0, 3.0};
  const TestResult r = one_sample_t(v, 0.0);
  REQUIRE_THAT(r.statistic, WithinAbs(2.0 / std::sqrt(1.0 / 3.0), 1e-12));
  REQUIRE(r.ref_dist == RefDist::student_t(2.0));
}

TEST_CASE("one-sample t sign flip mirrors the statistic", "[effect]") {
  const std::vector<double> v = {0.3, -1.2, 2.2, 0.9, -0.4};
  const TestResult plus = one_sample_t(v, 0.0);
  std::vector<double> neg(v.size());
  std::transform(v.begin(), v.end(), neg.begin(), [](double x) { return -x; });
  const TestResult minus = one_sample_t(neg, 0.0);
  REQUIRE_THAT(minus.statistic, WithinAbs(-plus.statistic, 1e-12));
  REQUIRE_THAT(minus.p_two, WithinAbs(plus.p_two, 1e-12));
}

TEST_CASE("one-sample t p_two is affine invariant", "[effect]") {
  RngState rng(4);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(12);
    for (auto& x : v) x = sample_normal(rng, 1.0, 2.0);
    const double theta0 = rng.uniform_real(-1.0, 1.0);
    const double a = rng.uniform_real(0.1, 3.0) * (i % 2 ? 1.0 : -1.0);
    const double b = rng.uniform_real(-4.0, 4.0);
    std::vector<double> mapped(v.size());
    std::transform(v.begin(), v.end(), mapped.begin(),
                   [&](double x) { return a * x + b; });
    const double p1 = one_sample_t(v, theta0).p_two;
    const double p2 = one_sample_t(mapped, a * theta0 + b).p_two;
    REQUIRE_THAT(p2, WithinAbs(p1, 1e-10));
  }
}

TEST_CASE("one-sample t rejects zero variance", "[effect]") {
  const std::vector<double> v = {2.0, 2.0, 2.0};
  REQUIRE_THROWS_AS(one_sample_t(v, 0.0), DegenerateDataError);
}

// ---- paired ----------------------------------------------------------------

TEST_CASE("paired differences with constant offset", "[effect]") {
  const PairedData d{{2.0, 4.0}, {1.0, 3.0}};
  const SubjectEffect e = paired_diff_effect(d);
  REQUIRE(e.theta_hat == 1.0);
  REQUIRE(e.var_hat == 0.0);
  REQUIRE(e.kind == EffectKind::PairedDiff);
}

TEST_CASE("identical conditions give zero paired effect", "[effect]") {
  const PairedData d{{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}};
  REQUIRE(paired_diff_effect(d).theta_hat == 0.0);
}

TEST_CASE("paired effect equals mean_effect of the differences", "[effect]") {
  RngState rng(5);
  for (int i = 0; i < 50; ++i) {
    PairedData d;
    std::vector<double> diff;
    for (int j = 0; j < 15; ++j) {
      d.x.push_back(sample_normal(rng, 0.5, 1.0));
      d.y.push_back(sample_normal(rng, 0.0, 1.0));
      diff.push_back(d.x.back() - d.y.back());
    }
    const SubjectEffect a = paired_diff_effect(d);
    const SubjectEffect b = mean_effect(diff);
    REQUIRE(a.theta_hat == b.theta_hat);
    REQUIRE(a.var_hat == b.var_hat);
  }
}

TEST_CASE("paired length mismatch is a shape error", "[effect]") {
  const PairedData d{{1.0, 2.0}, {1.0}};
  REQUIRE_THROWS_AS(paired_diff_effect(d), ShapeError);
}

// ---- Welch -----------------------------------------------------------------

TEST_CASE("welch df reduces to 2(n-1) for equal variances and sizes",
          "[effect]") {
  const TwoSampleData d{{1.0, 2.0, 4.0, 7.0}, {0.0, 1.0, 3.0, 6.0}};
  const SubjectEffect e = welch_diff_effect(d);
  REQUIRE_THAT(e.df.value(), WithinAbs(6.0, 1e-10));
}

TEST_CASE("welch effect on identical samples", "[effect]") {
  const TwoSampleData d{{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}};
  const SubjectEffect e = welch_diff_effect(d);
  REQUIRE(e.theta_hat == 0.0);
  // s^2 = 1 per class: Var = 1/3 + 1/3
  REQUIRE(e.var_hat == 2.0 / 3.0);
  REQUIRE(e.n.n_x == 3);
  REQUIRE(e.n.n_y == 3);
}

TEST_CASE("welch variance composes from the class means' variances",
          "[effect]") {
  RngState rng(6);
  for (int i = 0; i < 50; ++i) {
    TwoSampleData d;
    for (int j = 0; j < 9; ++j) d.x.push_back(sample_normal(rng, 1.0, 2.0));
    for (int j = 0; j < 14; ++j) d.y.push_back(sample_normal(rng, 0.0, 0.5));
    const SubjectEffect w = welch_diff_effect(d);
    const SubjectEffect mx = mean_effect(d.x);
    const SubjectEffect my = mean_effect(d.y);
    REQUIRE(w.var_hat == mx.var_hat + my.var_hat);
    REQUIRE(w.theta_hat == mx.theta_hat - my.theta_hat);
  }
}

TEST_CASE("swapping classes negates theta and keeps var and df", "[effect]") {
  const TwoSampleData d{{0.2, 1.4, -0.5, 2.2}, {1.0, 0.1, 0.7}};
  const SubjectEffect a = welch_diff_effect(d);
  const SubjectEffect b = welch_diff_effect({d.y, d.x});
  REQUIRE_THAT(b.theta_hat, WithinAbs(-a.theta_hat, 1e-15));
  REQUIRE_THAT(b.var_hat, WithinAbs(a.var_hat, 1e-15));
  REQUIRE_THAT(b.df.value(), WithinAbs(a.df.value(), 1e-10));
}

TEST_CASE("welch needs two samples per class", "[effect]") {
  REQUIRE_THROWS_AS(welch_diff_effect({{1.0}, {1.0, 2.0}}),
                    InsufficientDataError);
  REQUIRE_THROWS_AS(welch_diff_effect({{1.0, 2.0}, {}}), InsufficientDataError);
}

// ---- ranks and AUC ----------------------------------------------------------

TEST_CASE("midranks of distinct values", "[effect]") {
  const std::vector<double> v = {10.0, 20.0, 30.0};
  REQUIRE(midranks(v) == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("midranks average over ties", "[effect]") {
  const std::vector<double> v = {5.0, 5.0};
  REQUIRE(midranks(v) == std::vector<double>{1.5, 1.5});
  const std::vector<double> w = {3.0, 1.0, 3.0, 3.0, 0.0};
  REQUIRE(midranks(w) == std::vector<double>{4.0, 2.0, 4.0, 4.0, 1.0});
}

TEST_CASE("midranks sum to N(N+1)/2 and are permutation equivariant",
          "[effect]") {
  RngState rng(9);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(20);
    for (auto& x : v)
      x = static_cast<double>(rng.uniform_int(0, 8));  // force ties
    const std::vector<double> r = midranks(v);
    REQUIRE_THAT(std::accumulate(r.begin(), r.end(), 0.0),
                 WithinAbs(20.0 * 21.0 / 2.0, 1e-9));
    // apply a random cyclic shift; ranks must shift identically
    const std::size_t k = static_cast<std::size_t>(rng.uniform_int(0, 19));
    std::vector<double> shifted(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
      shifted[j] = v[(j + k) % v.size()];
    const std::vector<double> rs = midranks(shifted);
    for (std::size_t j = 0; j < v.size(); ++j)
      REQUIRE(rs[j] == r[(j + k) % v.size()]);
  }
}

TEST_CASE("auc worked example", "[effect]") {
  const TwoSampleData d{{1.0, 3.0, 5.0}, {2.0, 4.0}};
  const SubjectEffect e = auc_effect(d);
  // W = 1 + 3 + 5 = 9, U = 9 - 6 = 3, A = 3/6
  REQUIRE(e.theta_hat == 0.5);
  REQUIRE(e.kind == EffectKind::Auc);
  REQUIRE(e.theta_hat == auc_brute_force(d));
}

TEST_CASE("perfect separation and the variance floor", "[effect]") {
  const TwoSampleData d{{4.0, 5.0, 6.0}, {1.0, 2.0}};
  const SubjectEffect e = auc_effect(d);
  REQUIRE(e.theta_hat == 1.0);
  REQUIRE(e.var_hat == 1.0 / (3.0 * 2.0 * 5.0));
}

TEST_CASE("label swap complements the auc", "[effect]") {
  RngState rng(10);
  for (int i = 0; i < 50; ++i) {
    TwoSampleData d;
    for (int j = 0; j < 6; ++j)
      d.x.push_back(static_cast<double>(rng.uniform_int(0, 9)));
    for (int j = 0; j < 5; ++j)
      d.y.push_back(static_cast<double>(rng.uniform_int(0, 9)));
    const double a = auc_effect(d).theta_hat;
    const double b = auc_effect({d.y, d.x}).theta_hat;
    REQUIRE_THAT(b, WithinAbs(1.0 - a, 1e-12));
  }
}

TEST_CASE("auc equals brute-force pair counting exactly", "[effect]") {
  RngState rng(12);
  for (int i = 0; i < 1000; ++i) {
    TwoSampleData d;
    const int nx = static_cast<int>(rng.uniform_int(1, 12));
    const int ny = static_cast<int>(rng.uniform_int(1, 12));
    if (nx + ny < 3) continue;
    for (int j = 0; j < nx; ++j)
      d.x.push_back(static_cast<double>(rng.uniform_int(0, 6)));
    for (int j = 0; j < ny; ++j)
      d.y.push_back(static_cast<double>(rng.uniform_int(0, 6)));
    REQUIRE(auc_effect(d).theta_hat == auc_brute_force(d));
  }
}

TEST_CASE("auc variance is nonnegative and bounded A in [0,1]", "[effect]") {
  RngState rng(14);
  for (int i = 0; i < 500; ++i) {
    TwoSampleData d;
    const int nx = static_cast<int>(rng.uniform_int(2, 10));
    const int ny = static_cast<int>(rng.uniform_int(2, 10));
    for (int j = 0; j < nx; ++j) d.x.push_back(sample_normal(rng, 0.5, 1.0));
    for (int j = 0; j < ny; ++j) d.y.push_back(sample_normal(rng, 0.0, 1.0));
    const SubjectEffect e = auc_effect(d);
    REQUIRE(e.var_hat > 0.0);
    REQUIRE(e.theta_hat >= 0.0);
    REQUIRE(e.theta_hat <= 1.0);
  }
}

TEST_CASE("auc rejects an empty class", "[effect]") {
  REQUIRE_THROWS_AS(auc_effect({{}, {1.0, 2.0}}), InsufficientDataError);
  REQUIRE_THROWS_AS(auc_null_test({{1.0}, {}}), InsufficientDataError);
}

TEST_CASE("auc null test at chance level", "[effect]") {
  const TwoSampleData d{{1.0, 3.0, 5.0}, {2.0, 4.0}};
  const TestResult r = auc_null_test(d);
  REQUIRE(r.statistic == 0.0);
  REQUIRE(r.p_two == 1.0);
  REQUIRE(r.ref_dist == RefDist::normal());
}

TEST_CASE("null variance formula for equal class sizes", "[effect]") {
  // E(U) = NxNy/2 = 50, Var(U) = NxNy(Nx+Ny+1)/12 = 175 for Nx = Ny = 10;
  // on the A scale that is Var(A) = 175 / (NxNy)^2
  TwoSampleData d;
  for (int i = 0; i < 10; ++i) d.x.push_back(static_cast<double>(i) + 100.0);
  for (int i = 0; i < 10; ++i) d.y.push_back(static_cast<double>(i));
  const TestResult r = auc_null_test(d);  // perfect separation: A = 1
  const double var_a = 175.0 / (100.0 * 100.0);
  REQUIRE_THAT(r.statistic, WithinAbs(0.5 / std::sqrt(var_a), 1e-12));
}

TEST_CASE("auc z is standard normal under label permutations", "[effect]") {
  // permutation oracle: reassign class labels of a fixed pooled sample many
  // times; with distinct values the stated null mean and variance of U are
  // exact, so z should be centered with unit spread
  const std::size_t nx = 30, ny = 30, n = nx + ny;
  RngState rng(15);
  std::vector<double> pooled(n);
  for (auto& v : pooled) v = sample_normal(rng, 0.0, 1.0);
  const std::vector<double> ranks = midranks(pooled);
  const double var0 =
      (static_cast<double>(n) + 1.0) / (12.0 * static_cast<double>(nx * ny));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const int reps = 100000;
  double sum = 0.0, ss = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    // partial Fisher-Yates: the first nx entries become class X
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t j = static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(i),
                          static_cast<std::int64_t>(n - 1)));
      std::swap(idx[i], idx[j]);
    }
    double w = 0.0;
    for (std::size_t i = 0; i < nx; ++i) w += ranks[idx[i]];
    const double u = w - 0.5 * nx * (nx + 1);
    const double a = u / static_cast<double>(nx * ny);
    const double z = (a - 0.5) / std::sqrt(var0);
    sum += z;
    ss += z * z;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt(ss / reps - mean * mean);
  REQUIRE_THAT(mean, WithinAbs(0.0, 0.02));
  REQUIRE_THAT(sd, WithinAbs(1.0, 0.02));
}

// ---- Fisher z / Pearson ------------------------------------------------------

TEST_CASE("fisher transform basics", "[effect]") {
  REQUIRE(fisher_z(0.0) == 0.0);
  REQUIRE_THAT(fisher_z(0.5), WithinAbs(0.549306, 1e-6));
  REQUIRE_THROWS_AS(fisher_z(1.0), DomainError);
  REQUIRE_THROWS_AS(fisher_z(-1.0), DomainError);
}

TEST_CASE("fisher transform is odd and invertible", "[effect]") {
  RngState rng(16);
  for (int i = 0; i < 200; ++i) {
    const double r = rng.uniform_real(-0.999, 0.999);
    REQUIRE_THAT(fisher_z(-r), WithinAbs(-fisher_z(r), 1e-14));
    REQUIRE_THAT(fisher_z_inv(fisher_z(r)), WithinAbs(r, 1e-12));
  }
}

TEST_CASE("pearson worked example", "[effect]") {
  const PairedData d{{1.0, 2.0, 3.0, 4.0}, {1.0, 3.0, 2.0, 4.0}};
  REQUIRE(pearson_rho(d) == 0.8);
  const SubjectEffect e = pearson_effect(d);
  REQUIRE_THAT(e.theta_hat, WithinAbs(1.0986122886681098, 1e-12));
  REQUIRE(e.var_hat == 1.0);
  REQUIRE(e.kind == EffectKind::FisherZ);
  REQUIRE_THAT(fisher_z_inv(e.theta_hat), WithinAbs(0.8, 1e-12));
}

TEST_CASE("perfect anticorrelation is rejected", "[effect]") {
  const PairedData d{{1.0, 2.0, 3.0, 4.0}, {-1.0, -2.0, -3.0, -4.0}};
  REQUIRE_THROWS_AS(pearson_effect(d), DegenerateDataError);
}

TEST_CASE("pearson is invariant under positive affine rescaling", "[effect]") {
  RngState rng(18);
  for (int i = 0; i < 50; ++i) {
    PairedData d;
    for (int j = 0; j < 12; ++j) {
      const double x = sample_normal(rng, 0.0, 1.0);
      d.x.push_back(x);
      d.y.push_back(0.7 * x + sample_normal(rng, 0.0, 0.8));
    }
    PairedData scaled;
    for (std::size_t j = 0; j < d.x.size(); ++j) {
      scaled.x.push_back(2.5 * d.x[j] - 1.0);
      scaled.y.push_back(0.3 * d.y[j] + 4.0);
    }
    REQUIRE_THAT(pearson_effect(scaled).theta_hat,
                 WithinAbs(pearson_effect(d).theta_hat, 1e-10));
  }
}

TEST_CASE("pearson preconditions", "[effect]") {
  REQUIRE_THROWS_AS(pearson_effect({{1.0, 2.0, 3.0}, {2.0, 1.0, 3.0}}),
                    InsufficientDataError);
  REQUIRE_THROWS_AS(
      pearson_effect({{1.0, 1.0, 1.0, 1.0}, {2.0, 1.0, 3.0, 0.0}}),
      DegenerateDataError);
}

TEST_CASE("r_squared", "[effect]") {
  REQUIRE(r_squared(0.0) == 0.0);
  REQUIRE(r_squared(-0.5) == 0.25);
  REQUIRE(r_squared(1.0) == 1.0);
  REQUIRE_THROWS_AS(r_squared(1.5), DomainError);
}

// ---- OLS ---------------------------------------------------------------------

TEST_CASE("noiseless line is recovered exactly", "[effect]") {
  RegressionData d;
  d.n_predictors = 1;
  d.predictors = {0.0, 1.0, 2.0, 3.0};
  d.response = {3.0, 5.0, 7.0, 9.0};  // y = 3 + 2x
  const OlsFit fit = ols_fit(d);
  REQUIRE_THAT(fit.beta[0], WithinAbs(3.0, 1e-12));
  REQUIRE_THAT(fit.beta[1], WithinAbs(2.0, 1e-12));
  REQUIRE_THAT(fit.sigma2_eta, WithinAbs(0.0, 1e-20));
  REQUIRE(fit.df == 2.0);
  REQUIRE_THAT(ols_coef_effect(fit, 1).var_hat, WithinAbs(0.0, 1e-20));
}

TEST_CASE("intercept-only model reduces to the sample mean", "[effect]") {
  RegressionData d;
  d.n_predictors = 0;
  d.response = {1.0, 4.0, 2.0, 7.0, 1.0};
  const OlsFit fit = ols_fit(d);
  const SubjectEffect m = mean_effect(d.response);
  REQUIRE_THAT(fit.beta[0], WithinAbs(m.theta_hat, 1e-13));
  REQUIRE_THAT(fit.coef_cov[0], WithinAbs(m.var_hat, 1e-13));
}

TEST_CASE("ols matches the normal-equations oracle", "[effect]") {
  RngState rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    RegressionData d;
    d.n_predictors = 3;
    const std::size_t n = 40;
    const double b0 = 1.5, b1 = -2.0, b2 = 0.3, b3 = 4.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x1 = sample_normal(rng, 0.0, 1.0);
      const double x2 = sample_normal(rng, 2.0, 3.0);
      const double x3 = rng.uniform_real(-1.0, 1.0);
      d.predictors.insert(d.predictors.end(), {x1, x2, x3});
      d.response.push_back(b0 + b1 * x1 + b2 * x2 + b3 * x3 +
                           sample_normal(rng, 0.0, 0.7));
    }
    const OlsFit fit = ols_fit(d);
    const NormalEquationsOracle oracle = solve_normal_equations(d);
    for (std::size_t j = 0; j < 4; ++j) {
      REQUIRE_THAT(fit.beta[j], WithinAbs(oracle.beta[j], 1e-10));
      REQUIRE_THAT(fit.coef_cov[j * 4 + j],
                   WithinAbs(oracle.cov[j * 4 + j], 1e-10));
    }
    REQUIRE_THAT(fit.sigma2_eta, WithinAbs(oracle.sigma2, 1e-10));
    // t statistic route against the same oracle
    const SubjectEffect e = ols_coef_effect(fit, 1);
    REQUIRE_THAT(e.theta_hat / std::sqrt(e.var_hat),
                 WithinAbs(oracle.beta[1] / std::sqrt(oracle.cov[1 * 4 + 1]),
                           1e-8));
  }
}

TEST_CASE("scaling a predictor column rescales its coefficient", "[effect]") {
  RngState rng(20);
  RegressionData d;
  d.n_predictors = 2;
  for (std::size_t i = 0; i < 25; ++i) {
    const double x1 = sample_normal(rng, 0.0, 1.0);
    const double x2 = sample_normal(rng, 0.0, 1.0);
    d.predictors.insert(d.predictors.end(), {x1, x2});
    d.response.push_back(1.0 + 2.0 * x1 - x2 + sample_normal(rng, 0.0, 0.5));
  }
  RegressionData scaled = d;
  const double c = 4.0;
  for (std::size_t i = 0; i < 25; ++i) scaled.predictors[i * 2] *= c;
  const SubjectEffect a = ols_coef_effect(ols_fit(d), 1);
  const SubjectEffect b = ols_coef_effect(ols_fit(scaled), 1);
  REQUIRE_THAT(b.theta_hat, WithinAbs(a.theta_hat / c, 1e-10));
  REQUIRE_THAT(b.var_hat, WithinAbs(a.var_hat / (c * c), 1e-12));
}

TEST_CASE("rank-deficient designs are rejected", "[effect]") {
  RegressionData d;
  d.n_predictors = 2;
  // second predictor is an exact copy of the first
  for (int i = 0; i < 10; ++i) {
    const double x = static_cast<double>(i);
    d.predictors.insert(d.predictors.end(), {x, x});
    d.response.push_back(x * 2.0 + 1.0);
  }
  REQUIRE_THROWS_AS(ols_fit(d), SingularDesignError);
}

TEST_CASE("ols needs more rows than coefficients", "[effect]") {
  RegressionData d;
  d.n_predictors = 2;
  d.predictors = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  d.response = {1.0, 2.0, 3.0};
  REQUIRE_THROWS_AS(ols_fit(d), InsufficientDataError);
  REQUIRE_THROWS_AS(ols_coef_effect(OlsFit{{1.0}, {1.0}, 1.0, 1.0}, 3),
                    DomainError);
}

// ---- signed rank --------------------------------------------------------------

TEST_CASE("signed-rank statistic on a symmetric sample", "[effect]") {
  const std::vector<double> diffs = {-2.0, -1.0, 1.0, 2.0};
  const SignedRankSum s = signed_rank_sum(diffs);
  REQUIRE(s.w_plus == 5.0);  // n(n+1)/4
  const TestResult r = wilcoxon_signed_rank(diffs);
  REQUIRE(r.statistic == 0.0);
  REQUIRE(r.p_two == 1.0);
}

TEST_CASE("all-positive differences maximize the statistic", "[effect]") {
  const std::vector<double> diffs = {0.5, 1.0, 2.0, 3.0, 4.0};
  const SignedRankSum s = signed_rank_sum(diffs);
  REQUIRE(s.w_plus == 15.0);  // n(n+1)/2
  REQUIRE(wilcoxon_signed_rank(diffs).statistic > 0.0);
}

TEST_CASE("zero differences are discarded before ranking", "[effect]") {
  const std::vector<double> with_zeros = {0.0, -2.0, 0.0, -1.0, 1.0, 2.0, 0.0};
  const std::vector<double> without = {-2.0, -1.0, 1.0, 2.0};
  REQUIRE(wilcoxon_signed_rank(with_zeros).statistic ==
          wilcoxon_signed_rank(without).statistic);
  const std::vector<double> zeros = {0.0, 0.0};
  REQUIRE_THROWS_AS(wilcoxon_signed_rank(zeros), DegenerateDataError);
}

TEST_CASE("signed-rank approximation tracks exact enumeration at n = 6",
          "[effect]") {
  const std::vector<double> diffs = {0.8, 1.3, -0.4, 2.1, 1.7, 0.9};
  const double exact = signed_rank_exact_p_two(diffs);
  const double approx = wilcoxon_signed_rank(diffs).p_two;
  REQUIRE_THAT(approx, WithinAbs(exact, 0.02));
}

TEST_CASE("signed-rank and t-test usually agree on strong effects",
          "[effect]") {
  RngState rng(21);
  int agree = 0;
  const int reps = 200;
  for (int i = 0; i < reps; ++i) {
    std::vector<double> v(60);
    for (auto& x : v) x = sample_normal(rng, 0.5, 1.0);
    const bool t_rejects = one_sample_t(v, 0.0).p_two < 0.05;
    const bool w_rejects = wilcoxon_signed_rank(v).p_two < 0.05;
    if (t_rejects == w_rejects) ++agree;
  }
  REQUIRE(agree >= static_cast<int>(0.8 * reps));
}

// ---- bootstrap -----------------------------------------------------------------

TEST_CASE("bootstrap variance of a constant statistic is zero", "[effect]") {
  RngState rng(22);
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const double var = bootstrap_variance(
      std::span<const double>(v), [](std::span<const double>) { return 7.0; },
      100, rng);
  REQUIRE(var == 0.0);
}

TEST_CASE("bootstrap variance of the mean tracks sigma^2/N", "[effect]") {
  RngState rng(23);
  std::vector<double> v(200);
  for (auto& x : v) x = sample_normal(rng, 0.0, 1.0);
  const double analytic = mean_effect(v).var_hat;
  const double boot = bootstrap_variance(
      std::span<const double>(v),
      [](std::span<const double> s) { return nestinf::detail::mean(s); }, 2000,
      rng);
  REQUIRE(std::fabs(boot - analytic) <= 0.25 * analytic);
}

TEST_CASE("bootstrap is deterministic for a fixed seed", "[effect]") {
  const std::vector<double> v = {0.4, -1.0, 2.2, 0.3, 1.7};
  auto stat = [](std::span<const double> s) {
    return nestinf::detail::sample_variance(s);
  };
  RngState a(77), b(77);
  REQUIRE(bootstrap_variance(std::span<const double>(v), stat, 500, a) ==
          bootstrap_variance(std::span<const double>(v), stat, 500, b));
  RngState c(77);
  REQUIRE_THROWS_AS(
      bootstrap_variance(std::span<const double>(v), stat, 1, c), DomainError);
}

// ---- cross-cutting properties ----------------------------------------------------

TEST_CASE("estimated variances are never negative", "[effect]") {
  RngState rng(24);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> v(static_cast<std::size_t>(rng.uniform_int(2, 30)));
    for (auto& x : v) x = sample_normal(rng, 0.0, rng.uniform_real(0.0, 3.0));
    REQUIRE(mean_effect(v).var_hat >= 0.0);

    TwoSampleData d;
    for (int j = 0; j < 8; ++j) d.x.push_back(sample_normal(rng, 0.0, 1.0));
    for (int j = 0; j < 8; ++j) d.y.push_back(sample_normal(rng, 1.0, 2.0));
    REQUIRE(welch_diff_effect(d).var_hat >= 0.0);
    REQUIRE(auc_effect(d).var_hat >= 0.0);
  }
}

TEST_CASE("one-sided p-values of continuous tests sum to one", "[effect]") {
  RngState rng(25);
  for (int i = 0; i < 200; ++i) {
    const double stat = rng.uniform_real(-5.0, 5.0);
    const TestResult n = make_test_result(stat, RefDist::normal());
    REQUIRE_THAT(n.p_one_low + n.p_one_high, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(n.p_two,
                 WithinAbs(std::min(1.0, 2.0 * std::min(n.p_one_low,
                                                        n.p_one_high)),
                           1e-15));
    const TestResult t =
        make_test_result(stat, RefDist::student_t(rng.uniform_real(1.0, 80.0)));
    REQUIRE_THAT(t.p_one_low + t.p_one_high, WithinAbs(1.0, 1e-12));
  }
}
