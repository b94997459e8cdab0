#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fox/regression.hpp"
#include "fox/rng.hpp"
#include "test_oracle_ls.hpp"

using namespace fox;

namespace {

struct Problem {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
};

Problem random_problem(Rng& rng, long n, int features, double noise) {
  Problem p;
  std::vector<double> beta(features + 1);
  for (double& b : beta) b = rng.uniform_real() * 2.0 - 1.0;
  p.X.resize(n, std::vector<double>(features));
  p.y.resize(n);
  for (long i = 0; i < n; ++i) {
    double y = beta[0];
    for (int j = 0; j < features; ++j) {
      p.X[i][j] = rng.uniform_real() * 4.0 - 2.0;
      y += beta[j + 1] * p.X[i][j];
    }
    p.y[i] = y + (noise > 0 ? rng.normal(0.0, noise) : 0.0);
  }
  return p;
}

}  // namespace

TEST_CASE("fit recovers an exact linear relationship", "[regression]") {
  Rng rng(1);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) {
    const double x = rng.uniform_real() * 10.0;
    X.push_back({x});
    y.push_back(2.5 * x - 1.25);
  }
  const RegressionModel m = fit(X, y);
  CHECK(m.coefficients[0] == Catch::Approx(-1.25).margin(1e-10));
  CHECK(m.coefficients[1] == Catch::Approx(2.5).margin(1e-10));
  CHECK(m.r_squared == Catch::Approx(1.0).margin(1e-12));
  CHECK(m.sse == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("constant target gives zero slopes and the degenerate flag",
          "[regression]") {
  Rng rng(2);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 25; ++i) {
    X.push_back({rng.uniform_real(), rng.uniform_real()});
    y.push_back(7.25);
  }
  const RegressionModel m = fit(X, y);
  CHECK(m.coefficients[0] == Catch::Approx(7.25).margin(1e-10));
  CHECK(std::fabs(m.coefficients[1]) < 1e-10);
  CHECK(std::fabs(m.coefficients[2]) < 1e-10);
  CHECK(m.r_squared == 0.0);
  CHECK(m.degenerate_target);
}

TEST_CASE("fit matches the brute-force normal equations", "[regression]") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int features = 1 + static_cast<int>(rng.uniform_index(3));  // k <= 4
    const long n = 10 + static_cast<long>(rng.uniform_index(41));     // n <= 50
    const Problem p = random_problem(rng, n, features, 0.3);
    const RegressionModel m = fit(p.X, p.y);
    const test::NormalEquationsFit oracle = test::normal_equations_fit(p.X, p.y);
    for (int j = 0; j < m.k; ++j) {
      CHECK(m.coefficients[j] == Catch::Approx(oracle.coefficients[j]).margin(1e-8));
      CHECK(m.standard_errors[j] ==
            Catch::Approx(oracle.standard_errors[j]).margin(1e-8));
    }
  }
}

TEST_CASE("planted coefficients are covered by 3 standard errors",
          "[regression]") {
  // 38 features, n = 300, noise sigma = 0.1: across 100 trials at least 95%
  // of coefficients must land within 3 S of truth.
  Rng rng(4);
  long covered = 0;
  long total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> beta(39);
    for (double& b : beta) b = rng.uniform_real() * 2.0 - 1.0;
    std::vector<std::vector<double>> X(300, std::vector<double>(38));
    std::vector<double> y(300);
    for (int i = 0; i < 300; ++i) {
      double v = beta[0];
      for (int j = 0; j < 38; ++j) {
        X[i][j] = rng.uniform_real();
        v += beta[j + 1] * X[i][j];
      }
      y[i] = v + rng.normal(0.0, 0.1);
    }
    const RegressionModel m = fit(X, y);
    for (int j = 0; j < 39; ++j) {
      total++;
      if (std::fabs(m.coefficients[j] - beta[j]) <= 3.0 * m.standard_errors[j])
        covered++;
    }
  }
  CHECK(static_cast<double>(covered) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("a planted zero coefficient stays insignificant", "[regression]") {
  // Feature 0 has true coefficient zero; |t| < 2 should hold in about 95%
  // of trials.
  Rng rng(5);
  int small_t = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> X(50, std::vector<double>(3));
    std::vector<double> y(50);
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 3; ++j) X[i][j] = rng.uniform_real() * 2.0 - 1.0;
      y[i] = 1.0 + 0.8 * X[i][1] - 0.6 * X[i][2] + rng.normal(0.0, 0.5);
    }
    const RegressionModel m = fit(X, y);
    if (std::fabs(t_values(m)[1]) < 2.0) small_t++;
  }
  CHECK(small_t >= 88);
  CHECK(small_t <= 100);
}

TEST_CASE("t-value definition and sentinels", "[regression]") {
  RegressionModel m;
  m.coefficients = {0.4, 0.0, -0.3};
  m.standard_errors = {0.1, 0.5, 0.0};
  m.n = 20;
  m.k = 3;
  const std::vector<double> t = t_values(m);
  CHECK(t[0] == Catch::Approx(4.0));
  CHECK(t[1] == 0.0);
  CHECK(std::isinf(t[2]));
  CHECK(t[2] < 0.0);

  const std::vector<double> p = p_values(t, 10.0);
  CHECK(p[1] == 1.0);
  CHECK(p[2] == 0.0);
}

TEST_CASE("r_stats arithmetic", "[regression]") {
  SECTION("perfect fit") {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
    const RStats s = r_stats(y, y, 1);
    CHECK(s.sse == 0.0);
    CHECK(s.r_squared == 1.0);
    CHECK(s.adjusted_r_squared == 1.0);
  }

  SECTION("predicting the mean gives R^2 = 0") {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0, 5.0};
    const std::vector<double> y_hat(5, 3.0);
    const RStats s = r_stats(y, y_hat, 1);
    CHECK(s.r_squared == Catch::Approx(0.0).margin(1e-15));
  }

  SECTION("adjustment at n = 300, k = 39") {
    // R^2 = 0.95 -> adjusted = 1 - 0.05 * 299 / 261.
    std::vector<double> y(300), y_hat(300);
    // Construct data with TSS = 1 and SSE = 0.05 exactly.
    for (int i = 0; i < 300; ++i) {
      y[i] = (i % 2 == 0) ? 1.0 : -1.0;
      y_hat[i] = y[i];
    }
    double tss = 300.0;
    const double target_sse = 0.05 * tss;
    y_hat[0] = y[0] - std::sqrt(target_sse);
    const RStats s = r_stats(y, y_hat, 39);
    CHECK(s.r_squared == Catch::Approx(0.95).margin(1e-12));
    CHECK(s.adjusted_r_squared ==
          Catch::Approx(1.0 - 0.05 * 299.0 / 261.0).margin(1e-12));
    CHECK(s.adjusted_r_squared == Catch::Approx(0.9427).margin(1e-4));
  }

  SECTION("adjusted never exceeds plain R^2") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      const Problem p = random_problem(rng, 40, 3, 0.4);
      const RegressionModel m = fit(p.X, p.y);
      CHECK(m.adjusted_r_squared <= m.r_squared + 1e-15);
    }
  }
}

TEST_CASE("predict follows the linear form", "[regression]") {
  RegressionModel m;
  m.coefficients = {1.5, 2.0, -1.0};
  m.standard_errors = {0.0, 0.0, 0.0};
  m.k = 3;
  m.n = 10;
  CHECK(predict(m, {0.0, 0.0}) == 1.5);
  CHECK(predict(m, {1.0, 0.0}) == 3.5);
  CHECK(predict(m, {0.0, 1.0}) == 0.5);
  CHECK_THROWS_AS(predict(m, {1.0}), InvalidInput);
}

TEST_CASE("residual report", "[regression]") {
  SECTION("zero-noise fit has all-zero residuals and flat Q-Q") {
    Rng rng(7);
    const Problem p = random_problem(rng, 40, 2, 0.0);
    const RegressionModel m = fit(p.X, p.y);
    const FitDiagnostics d = residual_report(m, p.X, p.y);
    for (double e : d.residuals) CHECK(std::fabs(e) < 1e-9);
    for (const auto& [theo, sample] : d.qq_pairs) CHECK(sample == 0.0);
  }

  SECTION("residuals sum to zero with an intercept") {
    Rng rng(8);
    const Problem p = random_problem(rng, 120, 4, 1.0);
    const RegressionModel m = fit(p.X, p.y);
    const FitDiagnostics d = residual_report(m, p.X, p.y);
    const double sum = std::accumulate(d.residuals.begin(), d.residuals.end(), 0.0);
    CHECK(std::fabs(sum) < 1e-8);
    // Training row: prediction equals measurement minus residual.
    for (int i : {0, 17, 119})
      CHECK(predict(m, p.X[i]) == Catch::Approx(p.y[i] - d.residuals[i]).margin(1e-12));
  }

  SECTION("standard-normal residuals stay inside the Kolmogorov band") {
    // n = 300 standard-normal draws: the sample-vs-theoretical quantile gap,
    // measured in probability units through the normal CDF, stays below 0.25
    // at every position in at least 95% of seeds. (On the raw quantile scale
    // the extreme order statistics fluctuate with sd ~ 0.45, so a 0.25 band
    // only holds on the CDF scale.)
    auto normal_cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    int ok = 0;
    const int seeds = 100;
    for (int seed = 0; seed < seeds; ++seed) {
      Rng rng(1000 + seed);
      std::vector<double> values(300);
      for (double& v : values) v = rng.normal();
      const auto pairs = normal_qq_pairs(values);
      double max_gap = 0.0;
      for (const auto& [theo, sample] : pairs)
        max_gap = std::max(max_gap, std::fabs(normal_cdf(sample) - normal_cdf(theo)));
      if (max_gap < 0.25) ok++;
    }
    CHECK(ok >= 95);
  }
}

TEST_CASE("scale equivariance", "[regression]") {
  Rng rng(9);
  const Problem p = random_problem(rng, 60, 3, 0.3);
  const RegressionModel base = fit(p.X, p.y);

  const double c = 12.5;
  Problem scaled = p;
  for (auto& row : scaled.X) row[1] *= c;
  const RegressionModel s = fit(scaled.X, scaled.y);

  CHECK(s.coefficients[2] == Catch::Approx(base.coefficients[2] / c).margin(1e-10));
  CHECK(s.standard_errors[2] ==
        Catch::Approx(base.standard_errors[2] / c).margin(1e-10));
  const std::vector<double> t_base = t_values(base);
  const std::vector<double> t_scaled = t_values(s);
  for (int j = 0; j < base.k; ++j)
    CHECK(t_scaled[j] == Catch::Approx(t_base[j]).margin(1e-8));
  CHECK(s.r_squared == Catch::Approx(base.r_squared).margin(1e-10));
}

TEST_CASE("row permutation leaves the fit unchanged", "[regression]") {
  Rng rng(10);
  Problem p = random_problem(rng, 50, 3, 0.5);
  const RegressionModel base = fit(p.X, p.y);

  std::vector<std::size_t> order(p.y.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  Problem shuffled;
  for (std::size_t i : order) {
    shuffled.X.push_back(p.X[i]);
    shuffled.y.push_back(p.y[i]);
  }
  const RegressionModel perm = fit(shuffled.X, shuffled.y);
  for (int j = 0; j < base.k; ++j) {
    CHECK(perm.coefficients[j] == Catch::Approx(base.coefficients[j]).margin(1e-9));
    CHECK(perm.standard_errors[j] ==
          Catch::Approx(base.standard_errors[j]).margin(1e-9));
  }
  CHECK(perm.r_squared == Catch::Approx(base.r_squared).margin(1e-12));
}

TEST_CASE("error paths", "[regression]") {
  SECTION("collinear design names a dependent column") {
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
      const double a = rng.uniform_real();
      const double b = rng.uniform_real();
      X.push_back({a, b, 2.0 * a - b});  // exact dependence
      y.push_back(a + b + rng.normal(0.0, 0.1));
    }
    CHECK_THROWS_AS(fit(X, y), CollinearError);
  }

  SECTION("n <= k raises insufficient data") {
    std::vector<std::vector<double>> X(3, std::vector<double>{1.0, 2.0, 3.0});
    X[1] = {2.0, 1.0, 0.0};
    X[2] = {0.5, 0.25, 1.0};
    const std::vector<double> y{1.0, 2.0, 3.0};
    try {
      fit(X, y);
      FAIL("expected InsufficientDataError");
    } catch (const InsufficientDataError& e) {
      CHECK(e.n == 3);
      CHECK(e.k == 4);
    }
  }

  SECTION("non-finite entries are rejected") {
    std::vector<std::vector<double>> X(10, std::vector<double>{1.0});
    std::vector<double> y(10, 1.0);
    Rng rng(12);
    for (int i = 0; i < 10; ++i) {
      X[i][0] = rng.uniform_real();
      y[i] = X[i][0] * 2.0;
    }
    X[4][0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit(X, y), InvalidInput);
  }

  SECTION("p_values rejects df < 1") {
    CHECK_THROWS_AS(p_values({1.0}, 0.0), InvalidInput);
  }
}
