#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "igo/common.hpp"
#include "igo/gaussian.hpp"
#include "igo/rng.hpp"
#include "igo/utility_poly.hpp"
#include "igo/weights.hpp"

namespace igo {

using ObjectiveFn = std::function<double(const Vector&)>;

// Sample Kendall tau-b: (concordant - discordant) / (sqrt(P - T_f) sqrt(P - T_g))
// with P the pair count and T the tied-pair counts. Computed with a
// merge-sort inversion count in O(n log n); agrees exactly with the O(n^2)
// four-counter definition. Undefined when either argument is constant.
double kendall_tau_b(std::span<const double> f, std::span<const double> g);

// Centered sample Pearson correlation. The denominator is the single square
// root of the product of the two sums of squares, so bitwise-identical
// inputs give exactly 1. Undefined when either argument is constant.
double pearson_weights(std::span<const double> x, std::span<const double> y);

// Right-continuous empirical CDF value: the fraction of reference values <= s.
// reference must be sorted ascending and non-empty.
double empirical_quantile(const std::vector<double>& sorted_reference, double s);

struct CorrelationEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
};

// Population Kendall correlation between f and g under theta:
// Pr[concordant] - Pr[discordant] over independent sample pairs.
CorrelationEstimate population_tau(const ObjectiveFn& f, const ObjectiveFn& g,
                                   const GaussianParams& theta, std::int64_t n_pairs,
                                   RngStream stream, int threads = 0);

// Population Pearson correlation between the expected selection weights
// u(P_f(f(X))) and u(P_g(g(X))), estimated with the known mean (integral of
// u) and known variance U_u, and the true CDFs replaced by one shared
// empirical reference sample. Undefined for schemes with U_u = 0.
CorrelationEstimate population_rho(const ObjectiveFn& f, const ObjectiveFn& g,
                                   const GaussianParams& theta, const WeightScheme& scheme,
                                   std::int64_t n_samples, std::int64_t reference_size,
                                   RngStream stream, int threads = 0);

struct KwEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  // Order bound on the bias introduced by the finite empirical reference,
  // L_u^2 / reference_size.
  double quantile_bias = 0.0;
  std::int64_t n_samples = 0;
};

// K_w = E[(u(P_g(g(X))) - u(P_f(f(X))))^2], the mean squared gap between
// surrogate-ranked and objective-ranked expected weights.
KwEstimate estimate_Kw(const ObjectiveFn& f, const ObjectiveFn& g, const GaussianParams& theta,
                       const WeightScheme& scheme, std::int64_t n_samples,
                       std::int64_t reference_size, RngStream stream, int threads = 0);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
};

// E[|u(P_g(g(X))) - u(P_f(f(X)))|^s] for a moment order s >= 1.
MomentEstimate utility_gap_moment(const ObjectiveFn& f, const ObjectiveFn& g,
                                  const GaussianParams& theta, const WeightScheme& scheme,
                                  double s, std::int64_t n_samples, std::int64_t reference_size,
                                  RngStream stream, int threads = 0);

// Exponential moving average: value <- decay * x + (1 - decay) * value,
// seeded with the first observation.
class EmaTracker {
 public:
  explicit EmaTracker(double decay = 0.5);
  void update(double x);
  double value() const;
  bool initialized() const { return has_; }

 private:
  double decay_;
  double v_ = 0.0;
  bool has_ = false;
};

}  // namespace igo
