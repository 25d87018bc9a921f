#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "igo/correlation.hpp"
#include "igo/gaussian.hpp"
#include "igo/rng.hpp"
#include "igo/weights.hpp"
#include "oracles.hpp"

using igo::GaussianParams;
using igo::Matrix;
using igo::QuadraticObjective;
using igo::RngStream;
using igo::Vector;
using igo::WeightScheme;

namespace {

std::vector<double> random_values(int n, double tie_rate, RngStream& rng) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0 && rng.next_double() < tie_rate) {
      v[i] = v[static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i))];
    } else {
      v[i] = rng.next_normal();
    }
  }
  return v;
}

}  // namespace

TEST_SUITE("correlation") {

TEST_CASE("fast rank correlation agrees bitwise with the quadratic-time count") {
  RngStream rng = RngStream::derive(31, "tau_vs_brute");
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 60);
    const double tie_rate = (trial % 3 == 0) ? 0.4 : 0.0;
    const auto f = random_values(n, tie_rate, rng);
    const auto g = random_values(n, tie_rate, rng);
    const bool f_const = std::all_of(f.begin(), f.end(), [&](double x) { return x == f[0]; });
    const bool g_const = std::all_of(g.begin(), g.end(), [&](double x) { return x == g[0]; });
    if (f_const || g_const) continue;
    const double fast = igo::kendall_tau_b(f, g);
    const double brute = oracle::kendall_tau_brute(f, g);
    CHECK(fast == brute);
  }
}

TEST_CASE("rank correlation hits the exact endpoints") {
  RngStream rng = RngStream::derive(32, "tau_endpoints");
  std::vector<double> f(40);
  for (auto& x : f) x = rng.next_normal();
  std::vector<double> g = f;
  CHECK(igo::kendall_tau_b(f, g) == 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -f[i];
  CHECK(igo::kendall_tau_b(f, g) == -1.0);
}

TEST_CASE("rank correlation rejects constant and mismatched input") {
  const std::vector<double> c{1.0, 1.0, 1.0};
  const std::vector<double> v{1.0, 2.0, 3.0};
  CHECK_THROWS_AS((void)igo::kendall_tau_b(c, v), std::domain_error);
  CHECK_THROWS_AS((void)igo::kendall_tau_b(v, c), std::domain_error);
  const std::vector<double> short_v{1.0, 2.0};
  CHECK_THROWS_AS((void)igo::kendall_tau_b(v, short_v), std::invalid_argument);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS((void)igo::kendall_tau_b(one, one), std::invalid_argument);
}

TEST_CASE("linear correlation is exactly one on identical input") {
  RngStream rng = RngStream::derive(33, "rho_exact");
  std::vector<double> x(64);
  for (auto& v : x) v = rng.next_normal();
  CHECK(igo::pearson_weights(x, x) == 1.0);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = -x[i];
  CHECK(igo::pearson_weights(x, y) == -1.0);

  const std::vector<double> c{2.0, 2.0, 2.0};
  const std::vector<double> v{1.0, 2.0, 3.0};
  CHECK_THROWS_AS((void)igo::pearson_weights(c, v), std::domain_error);
  CHECK_THROWS_AS((void)igo::pearson_weights(v, c), std::domain_error);
}

TEST_CASE("linear correlation matches a direct evaluation") {
  const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
  const std::vector<double> y{1.0, 3.0, 2.0, 5.0};
  const double mx = 3.75, my = 2.75;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  CHECK(igo::pearson_weights(x, y) ==
        doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-15));
}

TEST_CASE("empirical distribution evaluation handles all edges") {
  const std::vector<double> ref{1.0, 2.0, 2.0, 5.0};
  CHECK(igo::empirical_quantile(ref, 0.5) == 0.0);
  CHECK(igo::empirical_quantile(ref, 1.0) == 0.25);
  CHECK(igo::empirical_quantile(ref, 1.5) == 0.25);
  CHECK(igo::empirical_quantile(ref, 2.0) == 0.75);
  CHECK(igo::empirical_quantile(ref, 5.0) == 1.0);
  CHECK(igo::empirical_quantile(ref, 9.0) == 1.0);
  CHECK_THROWS_AS((void)igo::empirical_quantile({}, 0.0), std::invalid_argument);
}

TEST_CASE("pairwise concordance of a function with its negation is minus one") {
  const QuadraticObjective obj(Matrix::Identity(2, 2) * 2.0, Vector::Zero(2));
  const GaussianParams theta(Vector::Constant(2, 1.0), Matrix::Identity(2, 2));
  const auto f = [&](const Vector& x) { return obj(x); };
  const auto g = [&](const Vector& x) { return -obj(x); };
  const auto est = igo::population_tau(f, g, theta, 20000, RngStream::derive(34, "pop_tau"));
  CHECK(est.n_samples == 20000);
  // Ties have probability zero, so the estimate is exactly -1 with se 0.
  CHECK(est.value == -1.0);
  CHECK(est.std_error == 0.0);

  const auto self = igo::population_tau(f, f, theta, 20000, RngStream::derive(34, "pop_tau2"));
  CHECK(self.value == 1.0);
  CHECK_THROWS_AS((void)igo::population_tau(f, g, theta, 100, RngStream::derive(34, "few")),
                  std::invalid_argument);
}

TEST_CASE("expected-weight correlation of a function with itself is near one") {
  const QuadraticObjective obj(Matrix::Identity(2, 2), Vector::Zero(2));
  const GaussianParams theta(Vector::Constant(2, 0.5), Matrix::Identity(2, 2));
  const auto f = [&](const Vector& x) { return obj(x); };
  const WeightScheme scheme = WeightScheme::truncation(8);
  const auto est = igo::population_rho(f, f, theta, scheme, 20000, 20000,
                                       RngStream::derive(35, "pop_rho"));
  // Identical functions share the reference; what remains is sampling noise
  // plus the O(L_u^2 / reference) bias of the empirical distribution.
  CHECK(std::abs(est.value - 1.0) <= 4.0 * est.std_error + 0.01);
  CHECK(est.std_error > 0.0);
  CHECK_THROWS_AS((void)igo::population_rho(f, f, theta, scheme, 100, 20000,
                                            RngStream::derive(35, "few")),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)igo::population_rho(f, f, theta, scheme, 20000, 100,
                                            RngStream::derive(35, "few_ref")),
                  std::invalid_argument);
}

TEST_CASE("mean squared weight gap for a two-point scheme against negation") {
  // u(p) = 2(1-p), so u(P(f)) - u(1-P(f)) = 2 - 4P(f) and the gap squared
  // integrates to 16/12 = 4/3.
  const QuadraticObjective obj(Matrix::Identity(1, 1), Vector::Zero(1));
  const GaussianParams theta(Vector::Zero(1), Matrix::Identity(1, 1));
  const auto f = [&](const Vector& x) { return obj(x); };
  const auto g = [&](const Vector& x) { return -obj(x); };
  const WeightScheme scheme({1.0, 0.0});
  const auto kw = igo::estimate_Kw(f, g, theta, scheme, 40000, 100000,
                                   RngStream::derive(36, "kw"));
  CHECK(std::abs(kw.estimate - 4.0 / 3.0) < 4.0 * kw.std_error + 1e-3);
  CHECK(kw.std_error > 0.0);
  CHECK(kw.std_error < 0.02);
  CHECK(kw.quantile_bias == doctest::Approx(4.0 / 100000.0).epsilon(1e-12));
  CHECK(kw.n_samples == 40000);

  // The squared gap is also the s = 2 absolute moment.
  const auto m2 = igo::utility_gap_moment(f, g, theta, scheme, 2.0, 40000, 100000,
                                          RngStream::derive(36, "gap2"));
  CHECK(std::abs(m2.mean - kw.estimate) < 4.0 * (m2.std_error + kw.std_error) + 1e-3);

  // s = 1 moment of |2 - 4P| with P uniform: 1.
  const auto m1 = igo::utility_gap_moment(f, g, theta, scheme, 1.0, 40000, 100000,
                                          RngStream::derive(36, "gap1"));
  CHECK(std::abs(m1.mean - 1.0) < 4.0 * m1.std_error + 1e-3);
  CHECK_THROWS_AS((void)igo::utility_gap_moment(f, g, theta, scheme, 0.5, 40000, 100000,
                                                RngStream::derive(36, "bad_s")),
                  std::invalid_argument);
}

TEST_CASE("identity gap is exactly zero through the shared reference") {
  const QuadraticObjective obj(Matrix::Identity(2, 2), Vector::Zero(2));
  const GaussianParams theta(Vector::Zero(2), Matrix::Identity(2, 2));
  const auto f = [&](const Vector& x) { return obj(x); };
  const auto kw = igo::estimate_Kw(f, f, theta, WeightScheme::truncation(4), 20000, 20000,
                                   RngStream::derive(37, "kw_self"));
  CHECK(kw.estimate == 0.0);
  CHECK(kw.std_error == 0.0);
}

TEST_CASE("running average seeds on first update and mixes afterwards") {
  igo::EmaTracker ema(0.25);
  CHECK_FALSE(ema.initialized());
  CHECK_THROWS_AS((void)ema.value(), std::logic_error);
  ema.update(4.0);
  CHECK(ema.initialized());
  CHECK(ema.value() == 4.0);
  ema.update(8.0);
  CHECK(ema.value() == doctest::Approx(0.25 * 8.0 + 0.75 * 4.0).epsilon(1e-15));
  ema.update(0.0);
  CHECK(ema.value() == doctest::Approx(0.75 * 5.0).epsilon(1e-15));

  CHECK_THROWS_AS(igo::EmaTracker(0.0), std::invalid_argument);
  CHECK_THROWS_AS(igo::EmaTracker(1.0 + 1e-9), std::invalid_argument);
  igo::EmaTracker full(1.0);
  full.update(3.0);
  full.update(7.0);
  CHECK(full.value() == 7.0);
}

}  // TEST_SUITE
