#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "igo/surrogate.hpp"
#include "igo/rng.hpp"

using igo::CorrelationKind;
using igo::GaussianParams;
using igo::Matrix;
using igo::QuadraticObjective;
using igo::RngStream;
using igo::Surrogate;
using igo::Vector;
using igo::WeightScheme;

namespace {

QuadraticObjective sphere2() {
  return QuadraticObjective(Matrix::Identity(2, 2), Vector::Zero(2));
}

}  // namespace

TEST_SUITE("surrogate") {

TEST_CASE("kind names") {
  CHECK(std::string(igo::to_string(Surrogate::Kind::exact)) == "exact");
  CHECK(std::string(igo::to_string(Surrogate::Kind::negated)) == "negated");
  CHECK(std::string(igo::to_string(Surrogate::Kind::additive_noise)) == "additive_noise");
  CHECK(std::string(igo::to_string(Surrogate::Kind::hessian_perturbed)) == "hessian_perturbed");
  CHECK(std::string(igo::to_string(Surrogate::Kind::block_swap)) == "block_swap");
  CHECK(std::string(igo::to_string(Surrogate::Kind::external)) == "external");
}

TEST_CASE("exact and negated mirror the objective") {
  const QuadraticObjective obj = sphere2();
  const Surrogate ex = Surrogate::exact(obj);
  const Surrogate neg = Surrogate::negated(obj);
  Vector x(2);
  x << 1.5, -2.0;
  CHECK(ex(x) == obj(x));
  CHECK(neg(x) == -obj(x));
  CHECK(ex.kind() == Surrogate::Kind::exact);
  CHECK(ex.base()(x) == obj(x));
}

TEST_CASE("noisy evaluations are frozen per point") {
  const QuadraticObjective obj = sphere2();
  const Surrogate s = Surrogate::additive_noise(obj, 0.5, 12345);
  Vector x(2), y(2);
  x << 0.25, 0.75;
  y << 0.25, 0.75000000001;
  CHECK(s(x) == s(x));  // same point, same value — no hidden state
  CHECK(s(x) != s(y));
  CHECK(s(x) != obj(x));

  const Surrogate other = Surrogate::additive_noise(obj, 0.5, 54321);
  CHECK(s(x) != other(x));

  // The noise is scale-true: averaging (g - f)^2 over many points gives
  // sigma^2.
  RngStream rng = RngStream::derive(41, "noise_scale");
  double sum_sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Vector p(2);
    p << rng.next_normal(), rng.next_normal();
    const double d = s(p) - obj(p);
    sum_sq += d * d;
  }
  CHECK(std::abs(sum_sq / n - 0.25) < 0.02);

  CHECK_THROWS_AS(Surrogate::additive_noise(obj, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(Surrogate::additive_noise(obj, -1.0, 1), std::invalid_argument);
}

TEST_CASE("perturbed-curvature surrogate is its own quadratic") {
  const QuadraticObjective obj = sphere2();
  Matrix a_tilde(2, 2);
  a_tilde << 4.0, 1.0, 1.0, 2.0;
  Vector x_tilde(2);
  x_tilde << 0.3, -0.7;
  const Surrogate s = Surrogate::hessian_perturbed(obj, a_tilde, x_tilde);
  Vector x(2);
  x << 1.0, 1.0;
  const Vector d = x - x_tilde;
  CHECK(s(x) == doctest::Approx(0.5 * d.dot(a_tilde * d)).epsilon(1e-15));
  CHECK(s.kind() == Surrogate::Kind::hessian_perturbed);

  CHECK_THROWS_AS(Surrogate::hessian_perturbed(obj, Matrix::Identity(3, 3), Vector::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("block rearrangement reverses order inside each block") {
  const QuadraticObjective obj = sphere2();
  const GaussianParams theta_ref(Vector::Zero(2), Matrix::Identity(2, 2));
  RngStream rng = RngStream::derive(42, "block_ref");
  const Surrogate s = Surrogate::block_swap(obj, 8, 4, theta_ref, 20000, rng);
  CHECK(s.cut() == 0.5);
  REQUIRE(s.reference().size() == 20000);
  CHECK(std::is_sorted(s.reference().begin(), s.reference().end()));

  // Walk the objective level sets upward: quantiles rise, so within each
  // block the surrogate must fall, and every good-block value must sit
  // strictly below every bad-block value.
  RngStream sampler = RngStream::derive(42, "block_points");
  std::vector<std::pair<double, double>> good, bad;  // (q, g)
  for (int i = 0; i < 2000; ++i) {
    Vector x(2);
    x << sampler.next_normal(), sampler.next_normal();
    const double q = igo::empirical_quantile(s.reference(), obj(x));
    const double g = s(x);
    if (q <= s.cut()) {
      good.emplace_back(q, g);
      CHECK(g == s.cut() - q);
      CHECK(g >= 0.0);
      CHECK(g <= s.cut());
    } else {
      bad.emplace_back(q, g);
      CHECK(g == 2.0 - q);
      CHECK(g >= 1.0);
      CHECK(g < 2.0 - s.cut() + 1e-15);
    }
  }
  REQUIRE(good.size() > 100);
  REQUIRE(bad.size() > 100);
  for (std::size_t i = 1; i < good.size(); ++i) {
    if (good[i].first > good[i - 1].first) CHECK(good[i].second < good[i - 1].second);
    if (good[i].first < good[i - 1].first) CHECK(good[i].second > good[i - 1].second);
  }

  CHECK_THROWS_AS(Surrogate::block_swap(obj, 8, 0, theta_ref, 100, rng), std::invalid_argument);
  CHECK_THROWS_AS(Surrogate::block_swap(obj, 8, 8, theta_ref, 100, rng), std::invalid_argument);
  CHECK_THROWS_AS(Surrogate::block_swap(obj, 1, 1, theta_ref, 100, rng), std::invalid_argument);
  CHECK_THROWS_AS(Surrogate::block_swap(obj, 8, 4, theta_ref, 0, rng), std::invalid_argument);
}

TEST_CASE("caller-supplied evaluators propagate failures usefully") {
  const QuadraticObjective obj = sphere2();
  Vector x = Vector::Zero(2);

  const Surrogate ok = Surrogate::external(obj, [](const Vector& v) { return v.sum() + 1.0; });
  CHECK(ok(x) == 1.0);

  const Surrogate thrower = Surrogate::external(
      obj, [](const Vector&) -> double { throw std::runtime_error("backend down"); });
  try {
    (void)thrower(x);
    FAIL("expected propagation");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "backend down");
  }

  const Surrogate wrapped = Surrogate::external(
      obj, [](const Vector&) -> double { throw std::logic_error("bad state"); });
  try {
    (void)wrapped(x);
    FAIL("expected wrapping");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("external surrogate evaluation failed") != std::string::npos);
    CHECK(msg.find("bad state") != std::string::npos);
  }

  const Surrogate nan_fn = Surrogate::external(
      obj, [](const Vector&) { return std::numeric_limits<double>::quiet_NaN(); });
  try {
    (void)nan_fn(x);
    FAIL("expected non-finite rejection");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }

  CHECK_THROWS_AS(Surrogate::external(obj, nullptr), std::invalid_argument);
}

TEST_CASE("the plain-function view owns a copy") {
  const QuadraticObjective obj = sphere2();
  igo::ObjectiveFn fn;
  Vector x(2);
  x << 2.0, 0.0;
  {
    const Surrogate s = Surrogate::negated(obj);
    fn = s.as_function();
  }  // original destroyed; the view must keep working
  CHECK(fn(x) == -obj(x));
}

TEST_CASE("gate admits exactly at the threshold") {
  igo::CorrelationEstimate m{0.95, 0.01, 1000};
  const auto at = igo::gate(m, 0.95, CorrelationKind::kendall);
  CHECK(at.use_surrogate);
  CHECK(at.threshold == 0.95);
  CHECK(at.measured.value == 0.95);
  CHECK(at.kind == CorrelationKind::kendall);

  m.value = 0.9499999;
  CHECK_FALSE(igo::gate(m, 0.95, CorrelationKind::kendall).use_surrogate);
  m.value = 1.0;
  CHECK(igo::gate(m, 0.95, CorrelationKind::pearson).use_surrogate);
  CHECK_THROWS_AS(igo::gate(m, 1.5, CorrelationKind::kendall), std::invalid_argument);
  CHECK_THROWS_AS(igo::gate(m, -1.5, CorrelationKind::kendall), std::invalid_argument);
}

TEST_CASE("gate thresholds and the utility bound agree") {
  const WeightScheme two({1.0, 0.0});
  CHECK(igo::admissible_threshold(two, CorrelationKind::kendall) ==
        igo::admissible_lower_bound(two, CorrelationKind::kendall));
  CHECK(igo::admissible_threshold(two, CorrelationKind::pearson) ==
        igo::admissible_lower_bound(two, CorrelationKind::pearson));
  const WeightScheme trunc = WeightScheme::truncation(8);
  CHECK(igo::admissible_threshold(trunc, CorrelationKind::kendall) ==
        igo::admissible_lower_bound(trunc, CorrelationKind::kendall));
}

}  // TEST_SUITE
