#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "igo/gaussian.hpp"
#include "igo/rng.hpp"
#include "oracles.hpp"

using igo::CorrelationKind;
using igo::GaussianParams;
using igo::Matrix;
using igo::QuadraticObjective;
using igo::RngStream;
using igo::Vector;
using igo::WeightScheme;

namespace {

GaussianParams simple_theta() {
  Vector m(2);
  m << 1.0, -0.5;
  Matrix c(2, 2);
  c << 2.0, 0.3, 0.3, 1.0;
  return GaussianParams(m, c);
}

QuadraticObjective simple_obj() {
  Matrix a(2, 2);
  a << 3.0, 0.5, 0.5, 1.0;
  Vector x_star(2);
  x_star << 0.5, 2.0;
  return QuadraticObjective(a, x_star);
}

}  // namespace

TEST_SUITE("gaussian") {

TEST_CASE("construction rejects asymmetric and non-positive-definite inputs") {
  Matrix asym(2, 2);
  asym << 1.0, 0.1, 0.1000001, 1.0;
  CHECK_THROWS_AS(GaussianParams(Vector::Zero(2), asym), std::invalid_argument);

  Matrix indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  CHECK_THROWS_AS(GaussianParams(Vector::Zero(2), indef), std::invalid_argument);

  Matrix sem(2, 2);
  sem << 1.0, 1.0, 1.0, 1.0;  // singular
  CHECK_THROWS_AS(GaussianParams(Vector::Zero(2), sem), std::invalid_argument);

  CHECK_THROWS_AS(QuadraticObjective(indef, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(GaussianParams(Vector::Zero(3), Matrix::Identity(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("quadratic evaluates its definition") {
  const QuadraticObjective obj = simple_obj();
  Vector x(2);
  x << 2.0, 1.0;
  const Vector d = x - obj.x_star();
  CHECK(obj(x) == doctest::Approx(0.5 * d.dot(obj.a() * d)).epsilon(1e-15));
  CHECK(obj(obj.x_star()) == 0.0);
}

TEST_CASE("log-density gradient at the mean is (0, -C)") {
  const GaussianParams theta = simple_theta();
  const auto g = igo::natural_grad_loglik(theta, theta.mean());
  CHECK(g.d_mean.norm() == 0.0);
  CHECK((g.d_cov + theta.cov()).norm() == 0.0);
}

TEST_CASE("log-density gradient matches its closed form") {
  const GaussianParams theta = simple_theta();
  Vector x(2);
  x << 0.3, 0.9;
  const auto g = igo::natural_grad_loglik(theta, x);
  const Vector d = x - theta.mean();
  CHECK((g.d_mean - d).norm() == 0.0);
  CHECK((g.d_cov - (d * d.transpose() - theta.cov())).norm() == 0.0);
}

TEST_CASE("samples reproduce mean and covariance") {
  const GaussianParams theta = simple_theta();
  RngStream rng = RngStream::derive(10, "sample_moments");
  const int n = 100000;
  Vector mean = Vector::Zero(2);
  Matrix second = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const Vector x = igo::sample_one(theta, rng);
    mean += x;
    second += x * x.transpose();
  }
  mean /= n;
  second /= n;
  const Matrix cov = second - mean * mean.transpose();
  CHECK((mean - theta.mean()).norm() < 0.02);
  CHECK((cov - theta.cov()).norm() < 0.05);
}

TEST_CASE("population sampling is the stream-ordered stacking of single draws") {
  const GaussianParams theta = simple_theta();
  RngStream a = RngStream::derive(11, "pop");
  RngStream b = RngStream::derive(11, "pop");
  const auto pop = igo::sample_population(theta, 5, a);
  REQUIRE(pop.size() == 5);
  for (const auto& x : pop) {
    const Vector y = igo::sample_one(theta, b);
    CHECK((x - y).norm() == 0.0);
  }
}

TEST_CASE("assembled update is the weighted sum of per-sample gradients") {
  const GaussianParams theta = simple_theta();
  RngStream rng = RngStream::derive(12, "assemble");
  const auto pop = igo::sample_population(theta, 4, rng);
  const std::vector<double> w{0.5, 0.0, -0.25, 0.75};
  const auto step = igo::assemble_delta(theta, pop, w);
  Vector dm = Vector::Zero(2);
  Matrix dc = Matrix::Zero(2, 2);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto g = igo::natural_grad_loglik(theta, pop[i]);
    dm += w[i] * g.d_mean;
    dc += w[i] * g.d_cov;
  }
  CHECK((step.d_mean - dm).norm() < 1e-12);
  CHECK((step.d_cov - dc).norm() < 1e-12);
  CHECK_FALSE(step.degenerate);

  const auto zero = igo::assemble_delta(theta, pop, {0.0, 0.0, 0.0, 0.0});
  CHECK(zero.degenerate);
  CHECK(zero.d_mean.norm() == 0.0);
}

TEST_CASE("steps keep or reject positive definiteness") {
  const GaussianParams theta = simple_theta();
  igo::NaturalGradientStep step;
  step.d_mean = Vector::Constant(2, 0.1);
  step.d_cov = Matrix::Identity(2, 2);
  const auto ok = igo::apply_step(theta, step, 0.5);
  REQUIRE(ok.accepted());
  CHECK((ok.params->mean() - (theta.mean() + 0.5 * step.d_mean)).norm() == 0.0);
  CHECK((ok.params->cov() - (theta.cov() + 0.5 * step.d_cov)).norm() == 0.0);

  step.d_cov = -theta.cov() * 2.0;  // alpha = 1 drives C negative definite
  const auto bad = igo::apply_step(theta, step, 1.0);
  CHECK_FALSE(bad.accepted());
  CHECK(bad.min_eigenvalue < 0.0);

  CHECK_THROWS_AS(igo::apply_step(theta, step, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(igo::apply_step(theta, step, -0.1), std::invalid_argument);
}

TEST_CASE("expected objective closed form matches Monte Carlo") {
  const GaussianParams theta = simple_theta();
  const QuadraticObjective obj = simple_obj();
  RngStream rng = RngStream::derive(13, "exp_obj");
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += obj(igo::sample_one(theta, rng));
  const double j = igo::expected_objective(theta, obj);
  CHECK(std::abs(sum / n - j) < 0.05);

  // Hand expansion: 0.5 (m-x*)^T A (m-x*) + 0.5 Tr(A C).
  const Vector d = theta.mean() - obj.x_star();
  CHECK(j == doctest::Approx(0.5 * d.dot(obj.a() * d) +
                             0.5 * (obj.a() * theta.cov()).trace()).epsilon(1e-14));
}

TEST_CASE("objective gradient matches finite differences of the closed form") {
  const GaussianParams theta = simple_theta();
  const QuadraticObjective obj = simple_obj();
  const auto grad = igo::grad_expected_objective(theta, obj);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Vector mp = theta.mean();
    mp[i] += h;
    Vector mm = theta.mean();
    mm[i] -= h;
    const double fd = (igo::expected_objective(GaussianParams(mp, theta.cov()), obj) -
                       igo::expected_objective(GaussianParams(mm, theta.cov()), obj)) /
                      (2.0 * h);
    CHECK(grad.d_mean[i] == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK((grad.d_cov - 0.5 * obj.a()).norm() == 0.0);
}

TEST_CASE("metric norm equals the gradient's inverse-metric energy") {
  const GaussianParams theta = simple_theta();
  const QuadraticObjective obj = simple_obj();
  // Independent evaluation: v^T C v + 0.5 Tr((A C)^2) with v = A (m - x*).
  const Vector v = obj.a() * (theta.mean() - obj.x_star());
  const Matrix ac = obj.a() * theta.cov();
  const double want = v.dot(theta.cov() * v) + 0.5 * (ac * ac).trace();
  CHECK(igo::metric_norm(theta, obj) == doctest::Approx(want).epsilon(1e-14));
  CHECK(igo::trace_finv_h(theta, obj) == doctest::Approx(ac.trace()).epsilon(1e-14));
}

TEST_CASE("metric norm equals the objective variance by Monte Carlo") {
  const GaussianParams theta = simple_theta();
  const QuadraticObjective obj = simple_obj();
  RngStream rng = RngStream::derive(14, "var_mc");
  const int n = 400000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = obj(igo::sample_one(theta, rng));
    sum += f;
    sum_sq += f * f;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  const double mf = igo::metric_norm(theta, obj);
  CHECK(std::abs(var - mf) / mf < 0.05);
}

TEST_CASE("decrease rates follow their closed forms") {
  const WeightScheme scheme({1.0, 0.0});
  const double thr = 1.0 - 1e-4;
  const auto r = igo::theory_rates(scheme, 4, thr, CorrelationKind::kendall);
  // beta = M_w / (6 sqrt(d) N_w) = (1/3) / (6 * 2 * 4) = 1/144.
  CHECK(r.beta == doctest::Approx(1.0 / 144.0).epsilon(1e-14));
  // gamma = 3 L_u sqrt(1-thr) / M_w = 3 * 2 * 1e-2 / (1/3) = 0.18.
  CHECK(r.gamma == doctest::Approx(0.18).epsilon(1e-10));
  CHECK(r.alpha_max == doctest::Approx(2.0 * r.beta * (1.0 - r.gamma)).epsilon(1e-14));
  CHECK(r.alpha_opt == doctest::Approx(r.beta * (1.0 - r.gamma)).epsilon(1e-14));

  const auto rp = igo::theory_rates(scheme, 1, 1.0 - 1e-4, CorrelationKind::pearson);
  // gamma = 6 sqrt(U_u (1-thr)) / M_w = 6 sqrt(1/3 * 1e-4) * 3 = 18 sqrt(1/3) * 1e-2.
  CHECK(rp.gamma == doctest::Approx(18.0 * std::sqrt(1.0 / 3.0) * 1e-2).epsilon(1e-10));

  // Threshold 1 is allowed and gives gamma = 0.
  const auto r1 = igo::theory_rates(scheme, 1, 1.0, CorrelationKind::kendall);
  CHECK(r1.gamma == 0.0);
  CHECK(r1.alpha_max == doctest::Approx(2.0 * r1.beta).epsilon(1e-14));
}

TEST_CASE("rates reject inadmissible thresholds and bad dimensions") {
  const WeightScheme scheme({1.0, 0.0});
  // Just below the admissible endpoint 323/324.
  CHECK_THROWS_AS(igo::theory_rates(scheme, 2, 323.0 / 324.0 - 1e-6, CorrelationKind::kendall),
                  std::invalid_argument);
  CHECK_THROWS_AS(igo::theory_rates(scheme, 2, 1.0 + 1e-9, CorrelationKind::kendall),
                  std::invalid_argument);
  CHECK_THROWS_AS(igo::theory_rates(scheme, 0, 1.0, CorrelationKind::kendall),
                  std::invalid_argument);
  CHECK_THROWS_AS(igo::theory_rates(WeightScheme::equal(4), 2, 1.0, CorrelationKind::kendall),
                  std::invalid_argument);
  // The admissibility error names the bound so users can fix their config.
  try {
    (void)igo::theory_rates(scheme, 2, 0.5, CorrelationKind::kendall);
    FAIL("expected admissibility error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("admissible") != std::string::npos);
  }
}

TEST_CASE("random rotations are orthonormal") {
  RngStream rng = RngStream::derive(15, "rotation");
  for (int d : {1, 2, 5, 9}) {
    const Matrix q = igo::random_rotation(d, rng);
    CHECK((q.transpose() * q - Matrix::Identity(d, d)).norm() < 1e-12);
  }
}

TEST_CASE("random quadratic keeps its spectrum under rotation") {
  RngStream rng = RngStream::derive(16, "quad_spectrum");
  const std::vector<double> spectrum{0.5, 2.0, 7.0};
  Vector x_star(3);
  x_star << 1.0, 2.0, 3.0;
  const QuadraticObjective obj = igo::make_quadratic(spectrum, true, x_star, rng);
  CHECK((obj.x_star() - x_star).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(obj.a());
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(es.eigenvalues()[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(es.eigenvalues()[2] == doctest::Approx(7.0).epsilon(1e-10));

  RngStream rng2 = RngStream::derive(16, "quad_diag");
  const QuadraticObjective diag = igo::make_quadratic(spectrum, false, x_star, rng2);
  CHECK(diag.a()(0, 0) == 0.5);
  CHECK(diag.a()(1, 1) == 2.0);
  CHECK(diag.a()(0, 1) == 0.0);

  CHECK_THROWS_AS(igo::make_quadratic({1.0, -1.0}, false, Vector::Zero(2), rng),
                  std::invalid_argument);
}

TEST_CASE("random search distributions are valid and reproducible") {
  RngStream a = RngStream::derive(17, "params");
  RngStream b = RngStream::derive(17, "params");
  const GaussianParams p = igo::make_random_params(4, 1.5, a);
  const GaussianParams q = igo::make_random_params(4, 1.5, b);
  CHECK((p.mean() - q.mean()).norm() == 0.0);
  CHECK((p.cov() - q.cov()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.cov());
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

}  // TEST_SUITE
