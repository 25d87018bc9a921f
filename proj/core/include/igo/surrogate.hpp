#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "igo/common.hpp"
#include "igo/correlation.hpp"
#include "igo/gaussian.hpp"

namespace igo {

// A cheap stand-in for the objective. Every variant is a deterministic pure
// function of its input: evaluating the same point twice gives the same
// value (AdditiveNoise freezes its noise by hashing the point's bits).
class Surrogate {
 public:
  enum class Kind : std::uint8_t { exact, negated, additive_noise, hessian_perturbed, block_swap, external };

  // g = f.
  static Surrogate exact(QuadraticObjective base);

  // g = -f; every pair is discordant.
  static Surrogate negated(QuadraticObjective base);

  // g(x) = f(x) + sigma * z(x) with z a standard normal frozen per point:
  // the draw is keyed by (noise_seed, hash of x's bytes).
  static Surrogate additive_noise(QuadraticObjective base, double sigma, std::uint64_t noise_seed);

  // g(x) = 0.5 (x - x_tilde)^T A_tilde (x - x_tilde) for a perturbed
  // quadratic.
  static Surrogate hessian_perturbed(QuadraticObjective base, Matrix a_tilde, Vector x_tilde);

  // Quantile rearrangement against a frozen reference sample of f under
  // theta_ref: with q = P_ref(f(x)) and cut c = mu/lambda,
  //   g(x) = c - q   for q <= c   (the good block, order reversed)
  //   g(x) = 2 - q   for q >  c   (the bad block, order reversed, shifted
  //                                strictly above the good block).
  static Surrogate block_swap(QuadraticObjective base, int lambda, int mu,
                              const GaussianParams& theta_ref, std::int64_t reference_size,
                              RngStream stream);

  // Caller-supplied evaluator; exceptions it throws are propagated as
  // surrogate-evaluation errors.
  static Surrogate external(QuadraticObjective base, std::function<double(const Vector&)> fn);

  double operator()(const Vector& x) const;

  Kind kind() const { return kind_; }
  const QuadraticObjective& base() const { return base_; }
  double sigma() const { return sigma_; }

  // Block-swap internals, exposed for verification.
  const std::vector<double>& reference() const { return reference_; }
  double cut() const { return cut_; }

  ObjectiveFn as_function() const;

 private:
  Surrogate(Kind kind, QuadraticObjective base);

  Kind kind_;
  QuadraticObjective base_;
  double sigma_ = 0.0;
  std::uint64_t noise_seed_ = 0;
  std::shared_ptr<const QuadraticObjective> perturbed_;
  std::vector<double> reference_;
  double cut_ = 0.0;
  std::function<double(const Vector&)> external_;
};

const char* to_string(Surrogate::Kind k);

// Outcome of the correlation gate for one iteration.
struct GateDecision {
  bool use_surrogate = false;
  CorrelationEstimate measured;
  double threshold = 0.0;
  CorrelationKind kind = CorrelationKind::kendall;
};

// Use the surrogate iff the measured correlation is >= threshold (a
// measurement exactly at the threshold passes).
GateDecision gate(const CorrelationEstimate& measured, double threshold, CorrelationKind kind);

// Exclusive lower bound of gate thresholds for which the decrease guarantee
// has a positive learning-rate window. Requires a monotone scheme.
double admissible_threshold(const WeightScheme& scheme, CorrelationKind kind);

}  // namespace igo
