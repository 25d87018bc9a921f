#include "igo/gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace igo {

namespace {

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": matrix must be square");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (m(i, j) != m(j, i)) {
        throw std::invalid_argument(std::string(what) + ": matrix must be exactly symmetric");
      }
    }
  }
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": matrix must be finite");
}

Matrix cholesky_or_throw(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(what) + ": matrix must be positive definite");
  }
  return llt.matrixL();
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

GaussianParams::GaussianParams(Vector mean, Matrix cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0) throw std::invalid_argument("GaussianParams: dimension must be positive");
  if (!mean_.allFinite()) throw std::invalid_argument("GaussianParams: mean must be finite");
  if (cov_.rows() != mean_.size()) {
    throw std::invalid_argument("GaussianParams: covariance dimension must match the mean");
  }
  require_symmetric(cov_, "GaussianParams");
  chol_ = cholesky_or_throw(cov_, "GaussianParams");
}

QuadraticObjective::QuadraticObjective(Matrix a, Vector x_star)
    : a_(std::move(a)), x_star_(std::move(x_star)) {
  if (x_star_.size() == 0) throw std::invalid_argument("QuadraticObjective: dimension must be positive");
  if (!x_star_.allFinite()) throw std::invalid_argument("QuadraticObjective: optimum must be finite");
  if (a_.rows() != x_star_.size()) {
    throw std::invalid_argument("QuadraticObjective: matrix dimension must match the optimum");
  }
  require_symmetric(a_, "QuadraticObjective");
  cholesky_or_throw(a_, "QuadraticObjective");
}

double QuadraticObjective::operator()(const Vector& x) const {
  if (x.size() != x_star_.size()) {
    throw std::invalid_argument("QuadraticObjective: point dimension mismatch");
  }
  const Vector d = x - x_star_;
  return 0.5 * d.dot(a_ * d);
}

NaturalGradientStep natural_grad_loglik(const GaussianParams& theta, const Vector& x) {
  if (x.size() != theta.mean().size()) {
    throw std::invalid_argument("natural_grad_loglik: point dimension mismatch");
  }
  const Vector v = x - theta.mean();
  return {v, v * v.transpose() - theta.cov(), false};
}

Vector sample_one(const GaussianParams& theta, RngStream& rng) {
  Vector z(theta.dim());
  for (int i = 0; i < theta.dim(); ++i) z(i) = rng.next_normal();
  return theta.mean() + theta.chol_lower() * z;
}

std::vector<Vector> sample_population(const GaussianParams& theta, int lambda, RngStream& rng) {
  if (lambda < 1) throw std::invalid_argument("sample_population: lambda must be positive");
  std::vector<Vector> pop;
  pop.reserve(static_cast<std::size_t>(lambda));
  for (int i = 0; i < lambda; ++i) pop.push_back(sample_one(theta, rng));
  return pop;
}

NaturalGradientStep assemble_delta(const GaussianParams& theta,
                                   const std::vector<Vector>& population,
                                   const std::vector<double>& selection_weights) {
  if (population.size() != selection_weights.size()) {
    throw std::invalid_argument("assemble_delta: population and weight counts differ");
  }
  if (population.empty()) throw std::invalid_argument("assemble_delta: empty population");

  const int d = theta.dim();
  NaturalGradientStep step{Vector::Zero(d), Matrix::Zero(d, d), true};
  for (std::size_t i = 0; i < population.size(); ++i) {
    const double wi = selection_weights[i];
    if (wi == 0.0) continue;
    step.degenerate = false;
    const Vector v = population[i] - theta.mean();
    step.d_mean.noalias() += wi * v;
    step.d_cov.noalias() += wi * (v * v.transpose() - theta.cov());
  }
  return step;
}

StepResult apply_step(const GaussianParams& theta, const NaturalGradientStep& step, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("apply_step: alpha must be positive");
  if (step.d_mean.size() != theta.mean().size() || step.d_cov.rows() != theta.cov().rows()) {
    throw std::invalid_argument("apply_step: step dimension mismatch");
  }
  const Vector m = theta.mean() + alpha * step.d_mean;
  const Matrix c = theta.cov() + alpha * step.d_cov;
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success) {
    return {std::nullopt, min_eigenvalue(c)};
  }
  StepResult r;
  r.params.emplace(m, c);
  r.min_eigenvalue = 0.0;
  return r;
}

double expected_objective(const GaussianParams& theta, const QuadraticObjective& obj) {
  const Vector d = theta.mean() - obj.x_star();
  const double tr = obj.a().cwiseProduct(theta.cov()).sum();
  return 0.5 * d.dot(obj.a() * d) + 0.5 * tr;
}

ObjectiveGradient grad_expected_objective(const GaussianParams& theta, const QuadraticObjective& obj) {
  return {obj.a() * (theta.mean() - obj.x_star()), 0.5 * obj.a()};
}

double metric_norm(const GaussianParams& theta, const QuadraticObjective& obj) {
  const Vector v = obj.a() * (theta.mean() - obj.x_star());
  const Matrix ac = obj.a() * theta.cov();
  return v.dot(theta.cov() * v) + 0.5 * (ac * ac).trace();
}

double trace_finv_h(const GaussianParams& theta, const QuadraticObjective& obj) {
  return obj.a().cwiseProduct(theta.cov()).sum();
}

TheoryRates theory_rates(const WeightScheme& scheme, int dimension, double threshold,
                         CorrelationKind kind) {
  if (dimension < 1) throw std::invalid_argument("theory_rates: dimension must be positive");
  if (!scheme.monotone()) {
    throw std::invalid_argument(
        "theory_rates requires a monotone scheme: weights non-increasing with w_1 > w_lambda");
  }
  const double lower = admissible_lower_bound(scheme, kind);
  if (!(threshold > lower && threshold <= 1.0)) {
    throw std::invalid_argument("theory_rates: threshold " + std::to_string(threshold) +
                                " outside the admissible interval (" + std::to_string(lower) +
                                ", 1]");
  }
  const double mw = selection_gap(scheme);
  const double nw = n_w_constant(scheme);
  const double beta = mw / (6.0 * std::sqrt(static_cast<double>(dimension)) * nw);
  double gamma;
  if (kind == CorrelationKind::kendall) {
    const double lu = lipschitz_constant(UtilityPolynomial(scheme));
    gamma = 3.0 * lu * std::sqrt(1.0 - threshold) / mw;
  } else {
    const double uu = weight_variance(scheme);
    gamma = 6.0 * std::sqrt(uu * (1.0 - threshold)) / mw;
  }
  return {beta, gamma, 2.0 * beta * (1.0 - gamma), beta * (1.0 - gamma)};
}

Matrix random_rotation(int dim, RngStream& rng) {
  if (dim < 1) throw std::invalid_argument("random_rotation: dimension must be positive");
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng.next_normal();
  }
  const Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

QuadraticObjective make_quadratic(const std::vector<double>& spectrum, bool rotate,
                                  const Vector& x_star, RngStream& rng) {
  const int d = static_cast<int>(x_star.size());
  if (static_cast<int>(spectrum.size()) != d) {
    throw std::invalid_argument("make_quadratic: spectrum size must match the dimension");
  }
  Vector eig(d);
  for (int i = 0; i < d; ++i) {
    if (!(spectrum[static_cast<std::size_t>(i)] > 0.0)) {
      throw std::invalid_argument("make_quadratic: spectrum must be positive");
    }
    eig(i) = spectrum[static_cast<std::size_t>(i)];
  }
  Matrix a;
  if (rotate) {
    const Matrix q = random_rotation(d, rng);
    a = q * eig.asDiagonal() * q.transpose();
    a = ((a + a.transpose()) * 0.5).eval();  // restore exact symmetry after the products
  } else {
    a = eig.asDiagonal();
  }
  return QuadraticObjective(a, x_star);
}

GaussianParams make_random_params(int dim, double spread, RngStream& rng) {
  if (!(spread > 0.0)) throw std::invalid_argument("make_random_params: spread must be positive");
  Vector m(dim);
  for (int i = 0; i < dim; ++i) m(i) = spread * rng.next_normal();
  const Matrix q = random_rotation(dim, rng);
  Vector eig(dim);
  for (int i = 0; i < dim; ++i) {
    eig(i) = std::exp(std::log(0.1) + (std::log(10.0) - std::log(0.1)) * rng.next_double());
  }
  Matrix c = q * eig.asDiagonal() * q.transpose();
  c = ((c + c.transpose()) * 0.5).eval();
  return GaussianParams(std::move(m), std::move(c));
}

}  // namespace igo
