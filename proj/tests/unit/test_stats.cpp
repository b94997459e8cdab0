#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "fox/stats.hpp"

using namespace fox;

TEST_CASE("regularized incomplete beta basics", "[stats]") {
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, 1) = x.
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.37) == Catch::Approx(0.37).margin(1e-12));
  // I_x(a, b) + I_{1-x}(b, a) = 1.
  const double lhs = regularized_incomplete_beta(3.5, 1.25, 0.3);
  const double rhs = regularized_incomplete_beta(1.25, 3.5, 0.7);
  CHECK(lhs + rhs == Catch::Approx(1.0).margin(1e-12));
  // I_x(2, 2) = x^2 (3 - 2x).
  const double x = 0.42;
  CHECK(regularized_incomplete_beta(2.0, 2.0, x) ==
        Catch::Approx(x * x * (3 - 2 * x)).margin(1e-12));
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), InvalidInput);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, -0.1), InvalidInput);
}

TEST_CASE("student t two-sided tail", "[stats]") {
  SECTION("t = 0 carries the full two-sided mass") {
    CHECK(student_t_two_sided_p(0.0, 1.0) == 1.0);
    CHECK(student_t_two_sided_p(0.0, 100.0) == 1.0);
  }

  SECTION("critical value from the standard table") {
    // P(|T_10| >= 2.228) = 0.050.
    CHECK(student_t_two_sided_p(2.228, 10.0) == Catch::Approx(0.050).margin(1e-3));
    // P(|T_1| >= 12.706) = 0.050 (Cauchy-like heavy tail).
    CHECK(student_t_two_sided_p(12.706, 1.0) == Catch::Approx(0.050).margin(1e-3));
    // P(|T_30| >= 2.042) = 0.050.
    CHECK(student_t_two_sided_p(2.042, 30.0) == Catch::Approx(0.050).margin(1e-3));
  }

  SECTION("df = 1 closed form: p = 1 - (2/pi) atan(t)") {
    for (double t : {0.5, 1.0, 3.0, 10.0}) {
      const double expected = 1.0 - 2.0 / M_PI * std::atan(t);
      CHECK(student_t_two_sided_p(t, 1.0) == Catch::Approx(expected).margin(1e-8));
    }
  }

  SECTION("symmetry and limits") {
    CHECK(student_t_two_sided_p(-2.5, 7.0) ==
          Catch::Approx(student_t_two_sided_p(2.5, 7.0)).margin(1e-14));
    CHECK(student_t_two_sided_p(1e8, 10.0) < 1e-12);
    CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 5.0) == 0.0);
  }

  SECTION("monotone in |t|") {
    double prev = 1.0;
    for (double t = 0.25; t < 6.0; t += 0.25) {
      const double p = student_t_two_sided_p(t, 12.0);
      CHECK(p < prev);
      prev = p;
    }
  }

  SECTION("df below 1 is rejected") {
    CHECK_THROWS_AS(student_t_two_sided_p(1.0, 0.5), InvalidInput);
  }
}

TEST_CASE("normal quantile", "[stats]") {
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-14));
  CHECK(normal_quantile(0.975) == Catch::Approx(1.9599639845400545).margin(1e-9));
  CHECK(normal_quantile(0.84134474606854293) == Catch::Approx(1.0).margin(1e-9));
  CHECK(normal_quantile(0.025) == Catch::Approx(-1.9599639845400545).margin(1e-9));

  SECTION("round-trips through the normal CDF") {
    for (double p = 0.0005; p < 1.0; p += 0.0163) {
      const double x = normal_quantile(p);
      const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
      CHECK(cdf == Catch::Approx(p).margin(1e-10));
    }
  }

  CHECK_THROWS_AS(normal_quantile(0.0), InvalidInput);
  CHECK_THROWS_AS(normal_quantile(1.0), InvalidInput);
}
