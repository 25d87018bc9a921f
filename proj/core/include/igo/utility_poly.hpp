#pragma once

#include "igo/common.hpp"
#include "igo/weights.hpp"

namespace igo {

// The expected-selection-weight polynomial of a scheme,
//   u(p) = lambda * sum_i w_i * C(lambda-1, i-1) p^{i-1} (1-p)^{lambda-i},
// i.e. lambda * E[weight of a point whose objective quantile is p]. Stored
// in Bernstein form and evaluated with de Casteljau's recurrence, which is
// numerically stable up to the supported lambda <= 256.
class UtilityPolynomial {
 public:
  explicit UtilityPolynomial(WeightScheme scheme);

  // u(p); p must lie in [0, 1].
  double operator()(double p) const;

  // du/dp; p must lie in [0, 1]. Identically zero for lambda == 1.
  double derivative(double p) const;

  const WeightScheme& scheme() const { return scheme_; }

 private:
  WeightScheme scheme_;
  std::vector<double> bern_;   // degree lambda-1 coefficients, lambda * w_i
  std::vector<double> dbern_;  // derivative coefficients, degree lambda-2
};

// max_p |du/dp| on [0,1], located by a 10001-point grid scan refined with
// golden-section search to an interval of width 1e-12.
double lipschitz_constant(const UtilityPolynomial& u);

// The closed-form overestimate lambda*(lambda-1)*max_k |w_{k+1} - w_k|.
double lipschitz_upper_bound(const WeightScheme& scheme);

// M_w = sum_k w_k (1 - 2k/(lambda+1)). Positive for monotone schemes; the
// selection-gap constant that drives every descent rate.
double selection_gap(const WeightScheme& scheme);

// U_u = Var[u(P)] for P uniform on [0,1], evaluated by the closed-form
// double sum over binomial ratios. Exact integer binomials for lambda <= 20,
// log-gamma arithmetic above that, rejected above lambda = 256.
double weight_variance(const WeightScheme& scheme);

struct UtilityIntegrals {
  double mean;         // integral of u over [0,1]  (= sum of weights)
  double mean_square;  // integral of u^2 over [0,1] (= U_u + mean^2)
};
UtilityIntegrals utility_integrals(const WeightScheme& scheme);

// Exclusive lower endpoint of the admissible gate-threshold interval:
// 1 - M_w^2/(9 L_u^2) for Kendall, 1 - M_w^2/(36 U_u) for Pearson.
// Requires a monotone scheme.
double admissible_lower_bound(const WeightScheme& scheme, CorrelationKind kind);

}  // namespace igo
