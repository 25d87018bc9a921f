#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "igo/common.hpp"
#include "igo/rng.hpp"
#include "igo/utility_poly.hpp"
#include "igo/weights.hpp"

namespace igo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Mean and covariance of a Gaussian search distribution. Construction
// validates exact symmetry and positive definiteness (Cholesky succeeds with
// zero tolerance) and caches the lower Cholesky factor for sampling.
class GaussianParams {
 public:
  GaussianParams(Vector mean, Matrix cov);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  const Matrix& chol_lower() const { return chol_; }

 private:
  Vector mean_;
  Matrix cov_;
  Matrix chol_;
};

// f(x) = 0.5 (x - x*)^T A (x - x*) with A symmetric positive definite.
class QuadraticObjective {
 public:
  QuadraticObjective(Matrix a, Vector x_star);

  int dim() const { return static_cast<int>(x_star_.size()); }
  const Matrix& a() const { return a_; }
  const Vector& x_star() const { return x_star_; }

  double operator()(const Vector& x) const;

 private:
  Matrix a_;
  Vector x_star_;
};

// A natural-gradient update direction in (mean, covariance) coordinates.
// degenerate is set when every selection weight was zero and the step is
// identically zero.
struct NaturalGradientStep {
  Vector d_mean;
  Matrix d_cov;
  bool degenerate = false;
};

// Natural gradient of the log-density at x: (x - m, (x-m)(x-m)^T - C).
NaturalGradientStep natural_grad_loglik(const GaussianParams& theta, const Vector& x);

Vector sample_one(const GaussianParams& theta, RngStream& rng);
std::vector<Vector> sample_population(const GaussianParams& theta, int lambda, RngStream& rng);

// Weighted sum of per-sample natural gradients, in sample order.
NaturalGradientStep assemble_delta(const GaussianParams& theta,
                                   const std::vector<Vector>& population,
                                   const std::vector<double>& selection_weights);

// theta + alpha * step when the resulting covariance stays positive
// definite. On rejection params is empty and min_eigenvalue reports the
// smallest eigenvalue of the offending candidate so the caller can decide
// how to shrink alpha.
struct StepResult {
  std::optional<GaussianParams> params;
  double min_eigenvalue = 0.0;
  bool accepted() const { return params.has_value(); }
};
StepResult apply_step(const GaussianParams& theta, const NaturalGradientStep& step, double alpha);

// J(theta) = E[f(X)] = 0.5 (m-x*)^T A (m-x*) + 0.5 Tr(A C).
double expected_objective(const GaussianParams& theta, const QuadraticObjective& obj);

struct ObjectiveGradient {
  Vector d_mean;  // A (m - x*)
  Matrix d_cov;   // A / 2
};
ObjectiveGradient grad_expected_objective(const GaussianParams& theta, const QuadraticObjective& obj);

// M_f = grad J^T F^{-1} grad J = (m-x*)^T A C A (m-x*) + 0.5 Tr((A C)^2),
// which also equals Var[f(X)].
double metric_norm(const GaussianParams& theta, const QuadraticObjective& obj);

// Tr(F^{-1} H) for the quadratic's Hessian H = A, i.e. Tr(C A).
double trace_finv_h(const GaussianParams& theta, const QuadraticObjective& obj);

// The guaranteed-decrease rates for a monotone scheme on a d-dimensional
// convex quadratic under a gate threshold:
//   beta      = M_w / (6 sqrt(d) N_w)
//   gamma     = 3 L_u sqrt(1-thr) / M_w   (Kendall)
//             = 6 sqrt(U_u (1-thr)) / M_w (Pearson)
//   alpha_max = 2 beta (1 - gamma), alpha_opt = beta (1 - gamma).
// The threshold must exceed the admissible lower bound (and be <= 1).
struct TheoryRates {
  double beta;
  double gamma;
  double alpha_max;
  double alpha_opt;
};
TheoryRates theory_rates(const WeightScheme& scheme, int dimension, double threshold,
                         CorrelationKind kind);

// Deterministic random-instance builders used by the verification suite.
Matrix random_rotation(int dim, RngStream& rng);
QuadraticObjective make_quadratic(const std::vector<double>& spectrum, bool rotate,
                                  const Vector& x_star, RngStream& rng);
GaussianParams make_random_params(int dim, double spread, RngStream& rng);

}  // namespace igo
