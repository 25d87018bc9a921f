#include "igo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace igo {

namespace {

std::uint64_t hash_point(const Vector& x) {
  const auto* bytes = reinterpret_cast<const char*>(x.data());
  return fnv1a64(std::string_view(bytes, static_cast<std::size_t>(x.size()) * sizeof(double)));
}

}  // namespace

Surrogate::Surrogate(Kind kind, QuadraticObjective base) : kind_(kind), base_(std::move(base)) {}

Surrogate Surrogate::exact(QuadraticObjective base) {
  return Surrogate(Kind::exact, std::move(base));
}

Surrogate Surrogate::negated(QuadraticObjective base) {
  return Surrogate(Kind::negated, std::move(base));
}

Surrogate Surrogate::additive_noise(QuadraticObjective base, double sigma, std::uint64_t noise_seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("additive_noise: sigma must be positive");
  Surrogate s(Kind::additive_noise, std::move(base));
  s.sigma_ = sigma;
  s.noise_seed_ = noise_seed;
  return s;
}

Surrogate Surrogate::hessian_perturbed(QuadraticObjective base, Matrix a_tilde, Vector x_tilde) {
  QuadraticObjective perturbed(std::move(a_tilde), std::move(x_tilde));
  if (perturbed.dim() != base.dim()) {
    throw std::invalid_argument("hessian_perturbed: dimension mismatch");
  }
  Surrogate s(Kind::hessian_perturbed, std::move(base));
  s.perturbed_ = std::make_shared<const QuadraticObjective>(std::move(perturbed));
  return s;
}

Surrogate Surrogate::block_swap(QuadraticObjective base, int lambda, int mu,
                                const GaussianParams& theta_ref, std::int64_t reference_size,
                                RngStream stream) {
  if (lambda < 2 || mu < 1 || mu >= lambda) {
    throw std::invalid_argument("block_swap: need lambda >= 2 and 1 <= mu < lambda");
  }
  if (reference_size < 1) throw std::invalid_argument("block_swap: reference size must be positive");
  if (theta_ref.dim() != base.dim()) throw std::invalid_argument("block_swap: dimension mismatch");
  Surrogate s(Kind::block_swap, std::move(base));
  s.cut_ = static_cast<double>(mu) / static_cast<double>(lambda);
  s.reference_.reserve(static_cast<std::size_t>(reference_size));
  for (std::int64_t i = 0; i < reference_size; ++i) {
    s.reference_.push_back(s.base_(sample_one(theta_ref, stream)));
  }
  std::sort(s.reference_.begin(), s.reference_.end());
  return s;
}

Surrogate Surrogate::external(QuadraticObjective base, std::function<double(const Vector&)> fn) {
  if (!fn) throw std::invalid_argument("external surrogate: evaluator must be callable");
  Surrogate s(Kind::external, std::move(base));
  s.external_ = std::move(fn);
  return s;
}

double Surrogate::operator()(const Vector& x) const {
  switch (kind_) {
    case Kind::exact:
      return base_(x);
    case Kind::negated:
      return -base_(x);
    case Kind::additive_noise: {
      const double f = base_(x);
      RngStream noise(noise_seed_, hash_point(x));
      return f + sigma_ * noise.next_normal();
    }
    case Kind::hessian_perturbed:
      return (*perturbed_)(x);
    case Kind::block_swap: {
      const double q = empirical_quantile(reference_, base_(x));
      return q <= cut_ ? cut_ - q : 2.0 - q;
    }
    case Kind::external:
      try {
        const double v = external_(x);
        if (!std::isfinite(v)) {
          throw std::runtime_error("external surrogate returned a non-finite value");
        }
        return v;
      } catch (const std::runtime_error&) {
        throw;
      } catch (const std::exception& e) {
        throw std::runtime_error(std::string("external surrogate evaluation failed: ") + e.what());
      }
  }
  throw std::logic_error("surrogate: unknown kind");
}

ObjectiveFn Surrogate::as_function() const {
  auto copy = std::make_shared<const Surrogate>(*this);
  return [copy](const Vector& x) { return (*copy)(x); };
}

const char* to_string(Surrogate::Kind k) {
  switch (k) {
    case Surrogate::Kind::exact: return "exact";
    case Surrogate::Kind::negated: return "negated";
    case Surrogate::Kind::additive_noise: return "additive_noise";
    case Surrogate::Kind::hessian_perturbed: return "hessian_perturbed";
    case Surrogate::Kind::block_swap: return "block_swap";
    case Surrogate::Kind::external: return "external";
  }
  return "unknown";
}

GateDecision gate(const CorrelationEstimate& measured, double threshold, CorrelationKind kind) {
  if (!(threshold >= -1.0 && threshold <= 1.0)) {
    throw std::invalid_argument("gate: threshold must lie in [-1, 1]");
  }
  return {measured.value >= threshold, measured, threshold, kind};
}

double admissible_threshold(const WeightScheme& scheme, CorrelationKind kind) {
  return admissible_lower_bound(scheme, kind);
}

}  // namespace igo
