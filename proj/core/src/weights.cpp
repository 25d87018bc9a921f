#include "igo/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace igo {

WeightScheme::WeightScheme(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw std::invalid_argument("weight scheme needs at least one weight");
  for (double w : w_) {
    if (!std::isfinite(w)) throw std::invalid_argument("weights must be finite");
  }
  bool non_increasing = true;
  for (std::size_t i = 0; i + 1 < w_.size(); ++i) {
    if (w_[i] < w_[i + 1]) {
      non_increasing = false;
      break;
    }
  }
  monotone_ = non_increasing && w_.size() >= 2 && w_.front() > w_.back();
}

WeightScheme WeightScheme::truncation(int lambda) {
  if (lambda < 2) throw std::invalid_argument("truncation scheme needs lambda >= 2");
  const int mu = lambda / 2;
  std::vector<double> w(static_cast<std::size_t>(lambda), 0.0);
  for (int i = 0; i < mu; ++i) w[static_cast<std::size_t>(i)] = 1.0 / mu;
  return WeightScheme(std::move(w));
}

WeightScheme WeightScheme::equal(int lambda) {
  if (lambda < 1) throw std::invalid_argument("equal scheme needs lambda >= 1");
  return WeightScheme(std::vector<double>(static_cast<std::size_t>(lambda), 1.0 / lambda));
}

RankCounts rank_counts(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("rank_counts needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("rank_counts values must be finite");
  }

  std::vector<std::int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::int32_t a, std::int32_t b) { return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)]; });

  RankCounts rc;
  rc.strict.resize(n);
  rc.weak.resize(n);
  std::size_t a = 0;
  while (a < n) {
    std::size_t b = a + 1;
    const double va = values[static_cast<std::size_t>(order[a])];
    while (b < n && values[static_cast<std::size_t>(order[b])] == va) ++b;
    for (std::size_t k = a; k < b; ++k) {
      rc.strict[static_cast<std::size_t>(order[k])] = static_cast<std::int32_t>(a);
      rc.weak[static_cast<std::size_t>(order[k])] = static_cast<std::int32_t>(b);
    }
    a = b;
  }
  return rc;
}

std::vector<double> utilities(std::span<const double> values, const WeightScheme& scheme) {
  const std::size_t n = values.size();
  if (static_cast<int>(n) != scheme.lambda()) {
    throw std::invalid_argument("utilities: value count must equal the scheme's lambda");
  }
  const RankCounts rc = rank_counts(values);

  const auto& w = scheme.weights();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + w[k];

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto lo = static_cast<std::size_t>(rc.strict[i]);
    const auto hi = static_cast<std::size_t>(rc.weak[i]);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

double n_w_constant(const WeightScheme& scheme) {
  double max_sq = 0.0;
  for (double w : scheme.weights()) max_sq = std::max(max_sq, w * w);
  const double lambda = static_cast<double>(scheme.lambda());
  return lambda * lambda * max_sq;
}

}  // namespace igo
