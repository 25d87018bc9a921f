#include "igo/utility_poly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace igo {

namespace {

constexpr int kMaxLambda = 256;

double de_casteljau(std::vector<double> b, double p) {
  if (b.empty()) return 0.0;
  const double q = 1.0 - p;
  for (std::size_t len = b.size(); len > 1; --len) {
    for (std::size_t i = 0; i + 1 < len; ++i) b[i] = q * b[i] + p * b[i + 1];
  }
  return b[0];
}

void require_unit_interval(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": argument must lie in [0, 1]");
  }
}

std::int64_t binomial_exact(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;  // divides exactly at every step
  }
  return r;
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

}  // namespace

UtilityPolynomial::UtilityPolynomial(WeightScheme scheme) : scheme_(std::move(scheme)) {
  const int lambda = scheme_.lambda();
  if (lambda > kMaxLambda) {
    throw std::invalid_argument("utility polynomial supports lambda <= 256");
  }
  const auto& w = scheme_.weights();
  bern_.resize(static_cast<std::size_t>(lambda));
  for (int i = 0; i < lambda; ++i) {
    bern_[static_cast<std::size_t>(i)] = static_cast<double>(lambda) * w[static_cast<std::size_t>(i)];
  }
  if (lambda >= 2) {
    dbern_.resize(static_cast<std::size_t>(lambda - 1));
    const double scale = static_cast<double>(lambda) * (lambda - 1);
    for (int j = 0; j + 1 < lambda; ++j) {
      dbern_[static_cast<std::size_t>(j)] =
          scale * (w[static_cast<std::size_t>(j + 1)] - w[static_cast<std::size_t>(j)]);
    }
  }
}

double UtilityPolynomial::operator()(double p) const {
  require_unit_interval(p, "u_eval");
  return de_casteljau(bern_, p);
}

double UtilityPolynomial::derivative(double p) const {
  require_unit_interval(p, "u_derivative");
  return de_casteljau(dbern_, p);
}

double lipschitz_constant(const UtilityPolynomial& u) {
  constexpr int kGrid = 10000;  // 10001 points including both endpoints
  double best = 0.0;
  int best_k = 0;
  for (int k = 0; k <= kGrid; ++k) {
    const double p = static_cast<double>(k) / kGrid;
    const double v = std::abs(u.derivative(p));
    if (v > best) {
      best = v;
      best_k = k;
    }
  }

  double lo = static_cast<double>(std::max(best_k - 1, 0)) / kGrid;
  double hi = static_cast<double>(std::min(best_k + 1, kGrid)) / kGrid;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = std::abs(u.derivative(x1));
  double f2 = std::abs(u.derivative(x2));
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = std::abs(u.derivative(x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = std::abs(u.derivative(x1));
    }
    best = std::max(best, std::max(f1, f2));
  }
  return best;
}

double lipschitz_upper_bound(const WeightScheme& scheme) {
  const auto& w = scheme.weights();
  const int lambda = scheme.lambda();
  double max_jump = 0.0;
  for (int k = 0; k + 1 < lambda; ++k) {
    max_jump = std::max(max_jump, std::abs(w[static_cast<std::size_t>(k + 1)] - w[static_cast<std::size_t>(k)]));
  }
  return static_cast<double>(lambda) * (lambda - 1) * max_jump;
}

double selection_gap(const WeightScheme& scheme) {
  const auto& w = scheme.weights();
  const int lambda = scheme.lambda();
  KahanSum acc;
  for (int k = 1; k <= lambda; ++k) {
    acc.add(w[static_cast<std::size_t>(k - 1)] * (1.0 - 2.0 * k / (lambda + 1.0)));
  }
  return acc.s;
}

double weight_variance(const WeightScheme& scheme) {
  const int lambda = scheme.lambda();
  if (lambda > kMaxLambda) {
    throw std::invalid_argument("weight_variance supports lambda <= 256");
  }
  const auto& w = scheme.weights();
  const double front = static_cast<double>(lambda) * lambda / (2.0 * lambda - 1.0);

  KahanSum acc;
  if (lambda <= 20) {
    std::vector<std::int64_t> c_small(static_cast<std::size_t>(lambda));
    for (int i = 0; i < lambda; ++i) c_small[static_cast<std::size_t>(i)] = binomial_exact(lambda - 1, i);
    std::vector<long double> c_big(static_cast<std::size_t>(2 * lambda - 1));
    for (int k = 0; k <= 2 * lambda - 2; ++k) {
      c_big[static_cast<std::size_t>(k)] = static_cast<long double>(binomial_exact(2 * lambda - 2, k));
    }
    for (int i = 1; i <= lambda; ++i) {
      for (int j = 1; j <= lambda; ++j) {
        const long double ratio =
            static_cast<long double>(c_small[static_cast<std::size_t>(i - 1)]) *
            static_cast<long double>(c_small[static_cast<std::size_t>(j - 1)]) /
            c_big[static_cast<std::size_t>(i + j - 2)];
        const double term = static_cast<double>(front * ratio - 1.0L);
        acc.add(w[static_cast<std::size_t>(i - 1)] * w[static_cast<std::size_t>(j - 1)] * term);
      }
    }
  } else {
    const double log_front = std::log(front);
    std::vector<double> lc_small(static_cast<std::size_t>(lambda));
    for (int i = 0; i < lambda; ++i) lc_small[static_cast<std::size_t>(i)] = log_binomial(lambda - 1, i);
    std::vector<double> lc_big(static_cast<std::size_t>(2 * lambda - 1));
    for (int k = 0; k <= 2 * lambda - 2; ++k) lc_big[static_cast<std::size_t>(k)] = log_binomial(2 * lambda - 2, k);
    for (int i = 1; i <= lambda; ++i) {
      for (int j = 1; j <= lambda; ++j) {
        const double lr = log_front + lc_small[static_cast<std::size_t>(i - 1)] +
                          lc_small[static_cast<std::size_t>(j - 1)] - lc_big[static_cast<std::size_t>(i + j - 2)];
        acc.add(w[static_cast<std::size_t>(i - 1)] * w[static_cast<std::size_t>(j - 1)] * std::expm1(lr));
      }
    }
  }
  return acc.s;
}

UtilityIntegrals utility_integrals(const WeightScheme& scheme) {
  KahanSum sum_w;
  for (double w : scheme.weights()) sum_w.add(w);
  const double uu = weight_variance(scheme);
  return {sum_w.s, uu + sum_w.s * sum_w.s};
}

double admissible_lower_bound(const WeightScheme& scheme, CorrelationKind kind) {
  if (!scheme.monotone()) {
    throw std::invalid_argument(
        "admissible threshold requires a monotone scheme: weights non-increasing "
        "with w_1 > w_lambda");
  }
  const double mw = selection_gap(scheme);
  if (kind == CorrelationKind::kendall) {
    const double lu = lipschitz_constant(UtilityPolynomial(scheme));
    return 1.0 - (mw * mw) / (9.0 * lu * lu);
  }
  const double uu = weight_variance(scheme);
  return 1.0 - (mw * mw) / (36.0 * uu);
}

}  // namespace igo
