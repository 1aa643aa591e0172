#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "treewalk/exact.hpp"
#include "treewalk/genfun.hpp"

using namespace treewalk;

namespace {

std::vector<Rational> lambda_grid(int d) {
  return {Rational(1, 2), Rational(1), Rational(3, 2), Rational(d - 1), Rational(2 * (d - 1))};
}

}  // namespace

TEST_CASE("catalan numbers match Dyck path enumeration") {
  CHECK(catalan_number(0) == 1);
  CHECK(catalan_number(3) == 5);
  CHECK(catalan_number(10) == 16796);
  for (int k = 0; k <= 10; ++k) CHECK(catalan_number(k) == oracles::dyck_path_count(k));

  // convolution recurrence c_{k+1} = sum c_i c_{k-i}
  for (int k = 0; k <= 30; ++k) {
    BigInt acc = 0;
    for (int i = 0; i <= k; ++i) acc += catalan_number(i) * catalan_number(k - i);
    CHECK(catalan_number(k + 1) == acc);
  }
}

TEST_CASE("n-step return DP against direct path enumeration") {
  auto p31 = make_params(3, Rational(1));
  auto table = pn_return_dp<Rational>(p31, 12);
  CHECK(table.values[0] == 1);
  CHECK(table.values[2] == Rational(1, 3));
  CHECK(table.values[4] == Rational(5, 27));
  CHECK(table.values[6] == Rational(29, 243));

  for (auto params : {p31, make_params(3, Rational(2)), make_params(2, Rational(1, 2)),
                      make_params(4, Rational(3))}) {
    auto dp = pn_return_dp<Rational>(params, 12);
    for (int n = 0; n <= 12; ++n) CHECK(dp.values[n] == oracles::enumerate_return_prob(params, n));
  }
}

TEST_CASE("critical-case returns are central binomial") {
  auto table = pn_return_dp<Rational>(make_params(3, Rational(2)), 12);
  CHECK(table.values[2] == Rational(1, 2));
  CHECK(table.values[4] == Rational(3, 8));
  // (2n)! / (2^(2n) n!^2)
  for (int n = 1; 2 * n <= 12; ++n) {
    BigInt binom = 1;
    for (int i = 1; i <= n; ++i) binom = binom * (n + i) / i;
    CHECK(table.values[2 * n] == Rational(binom) / pow_n(Rational(4), n));
  }
}

TEST_CASE("first-return DP against direct path enumeration") {
  auto p31 = make_params(3, Rational(1));
  auto f = first_return_dp<Rational>(p31, 12);
  CHECK(f.values[0] == 0);
  CHECK(f.values[2] == Rational(1, 3));
  CHECK(f.values[3] == 0);
  CHECK(f.values[4] == Rational(2, 27));

  for (auto params : {p31, make_params(3, Rational(2)), make_params(2, Rational(1, 2)),
                      make_params(4, Rational(3))}) {
    auto dp = first_return_dp<Rational>(params, 12);
    for (int n = 1; n <= 12; ++n)
      CHECK(dp.values[n] == oracles::enumerate_first_return_prob(params, n));
  }
}

TEST_CASE("catalan closed form equals the first-return DP") {
  auto p31 = make_params(3, Rational(1));
  CHECK(first_return_catalan<Rational>(p31, 1) == Rational(1, 3));
  CHECK(first_return_catalan<Rational>(p31, 3) == Rational(8, 243));
  CHECK(first_return_catalan<Rational>(make_params(3, Rational(2)), 2) == Rational(1, 8));

  for (int d : {2, 3, 4, 5}) {
    for (const auto& lambda : lambda_grid(d)) {
      auto params = make_params(d, lambda);
      auto dp = first_return_dp<Rational>(params, 60);
      for (int n = 1; n <= 30; ++n)
        CHECK(dp.values[2 * n] == first_return_catalan<Rational>(params, n));
    }
  }
}

TEST_CASE("renewal convolution rebuilds the n-step table") {
  auto p31 = make_params(3, Rational(1));
  auto f = first_return_dp<Rational>(p31, 12);
  auto conv = convolve_first_return(f);
  CHECK(conv.values[1] == 0);
  CHECK(conv.values[4] == f.values[2] * conv.values[2] + f.values[4]);
  CHECK(conv.values[4] == Rational(5, 27));

  auto crit = convolve_first_return(first_return_dp<Rational>(make_params(3, Rational(2)), 6));
  CHECK(crit.values[6] == Rational(5, 16));

  for (int d : {2, 3, 4, 5}) {
    for (const auto& lambda : lambda_grid(d)) {
      auto params = make_params(d, lambda);
      auto dp = pn_return_dp<Rational>(params, 60);
      auto rebuilt = convolve_first_return(first_return_dp<Rational>(params, 60));
      for (int n = 0; n <= 60; ++n) CHECK(rebuilt.values[n] == dp.values[n]);
    }
  }
}

TEST_CASE("table shape invariants") {
  auto params = make_params(3, Rational(1));
  auto p = pn_return_dp<Rational>(params, 31);
  auto f = first_return_dp<Rational>(params, 31);
  for (int n = 1; n <= 31; n += 2) {
    CHECK(p.values[n] == 0);
    CHECK(f.values[n] == 0);
  }
  for (int n = 0; n <= 31; ++n) {
    CHECK(p.values[n] >= 0);
    CHECK(p.values[n] <= 1);
    CHECK(f.values[n] >= 0);
    CHECK(f.values[n] <= 1);
  }
}

TEST_CASE("first-return mass is bounded by the total return probability") {
  for (int d : {2, 3, 5}) {
    for (const auto& lambda : lambda_grid(d)) {
      auto params = make_params(d, lambda);
      const Rational bound =
          std::min(lambda, Rational(d - 1)) / Rational(d - 1);  // P(tau+ < inf)
      auto f = first_return_dp<Rational>(params, 40);
      Rational partial{0};
      for (int n = 0; n <= 40; ++n) {
        partial += f.values[n];
        CHECK(partial <= bound);
      }
    }
  }
  // float mode, looser tolerance
  auto f = first_return_dp<ScaledFloat>(make_params(3, 1.0), 400);
  double partial = 0;
  for (int n = 0; n <= 400; ++n) {
    partial += f.values[n].to_double();
    CHECK(partial <= 0.5 + 1e-12);
  }
}

TEST_CASE("scaled-float tables track the rational tables") {
  for (auto params : {make_params(3, Rational(1)), make_params(3, Rational(2)),
                      make_params(4, Rational(3, 2))}) {
    auto exact_p = pn_return_dp<Rational>(params, 60);
    auto float_p = pn_return_dp<ScaledFloat>(params, 60);
    auto exact_f = first_return_dp<Rational>(params, 60);
    auto float_f = first_return_dp<ScaledFloat>(params, 60);
    for (int n = 2; n <= 60; n += 2) {
      CHECK(rel_diff(float_p.values[n], ScaledFloat::from_rational(exact_p.values[n])) < 1e-12);
      CHECK(rel_diff(float_f.values[n], ScaledFloat::from_rational(exact_f.values[n])) < 1e-12);
    }
  }
}

TEST_CASE("scaled floats reach far below double underflow") {
  // p^(n) ~ rho^n decays to ~1e-775 by step 8000 here, far outside double
  // range, yet the stored log must stay consistent with n * log(rho).
  auto params = make_params(5, 1.0);
  const double rho = 2.0 * std::sqrt(4.0) / 5.0;  // 0.8
  auto table = pn_return_dp<ScaledFloat>(params, 8000);
  const double log_p = table.values[8000].log();
  CHECK(table.values[8000].to_double() == 0.0);  // genuinely sub-double
  CHECK(log_p / (8000 * std::log(rho)) == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("n-th root of the return probabilities approaches the spectral radius") {
  auto params = make_params(3, 1.0);
  const double rho = 2.0 * std::sqrt(2.0) / 3.0;
  auto table = pn_return_dp<ScaledFloat>(params, 4000);
  double prev_err = 1.0;
  for (long n : {250L, 500L, 1000L, 2000L}) {
    const double root = std::exp(table.values[2 * n].log() / (2.0 * n));
    const double err = std::abs(root - rho);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 1e-2);
}

TEST_CASE("rational capacity cap") {
  auto params = make_params(3, Rational(1));
  CHECK_THROWS_MATCHES(pn_return_dp<Rational>(params, 2001), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == ErrorCode::CapacityExceeded; }));
  CHECK_THROWS_AS(first_return_dp<Rational>(params, 5000), Error);
  CHECK_NOTHROW(pn_return_dp<ScaledFloat>(params, 2001));
  // the cap is adjustable in both directions
  CHECK_THROWS_AS(pn_return_dp<Rational>(params, 50, 40), Error);
  CHECK_NOTHROW(pn_return_dp<Rational>(params, 50, 50));
}

TEST_CASE("rational mode requires an exact lambda") {
  auto params = make_params(3, 0.37);
  CHECK_THROWS_MATCHES(pn_return_dp<Rational>(params, 10), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == ErrorCode::RationalRequired; }));
  CHECK_NOTHROW(pn_return_dp<ScaledFloat>(params, 10));
}

TEST_CASE("degenerate dp sizes") {
  auto params = make_params(3, Rational(1));
  auto p0 = pn_return_dp<Rational>(params, 0);
  CHECK(p0.values.size() == 1);
  CHECK(p0.values[0] == 1);
  auto f2 = first_return_dp<Rational>(params, 2);
  CHECK(f2.values[2] == Rational(1, 3));
  CHECK_THROWS_AS(first_return_dp<Rational>(params, 1), Error);
  CHECK_THROWS_AS(pn_return_dp<Rational>(params, -1), Error);
}
