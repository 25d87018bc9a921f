#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace igo {

// A rank-based weight vector w_1..w_lambda. Ranks are 1-based in the math
// and 0-based in the API (weights()[r] is the weight of rank r+1). The
// scheme is "monotone" when the weights are non-increasing and the first
// strictly exceeds the last; every theorem-facing constant assumes that.
class WeightScheme {
 public:
  explicit WeightScheme(std::vector<double> weights);

  // w_i = 1/mu for the best mu = floor(lambda/2) ranks, 0 elsewhere.
  static WeightScheme truncation(int lambda);

  // w_i = 1/lambda for every rank. Not monotone; useful as the degenerate
  // boundary case in tests.
  static WeightScheme equal(int lambda);

  int lambda() const { return static_cast<int>(w_.size()); }
  const std::vector<double>& weights() const { return w_; }
  bool monotone() const { return monotone_; }

 private:
  std::vector<double> w_;
  bool monotone_;
};

// For each value, how many others are strictly smaller (strict) and how many
// are smaller or equal including itself (weak). With no ties, weak[i] ==
// strict[i] + 1 and strict is a permutation of 0..n-1.
struct RankCounts {
  std::vector<std::int32_t> strict;
  std::vector<std::int32_t> weak;
};

RankCounts rank_counts(std::span<const double> values);

// Selection weight W_i of each value: the average of the scheme weights over
// the rank block [strict_i+1, weak_i]. Without ties this is just the weight
// of the value's rank. Tied values share one averaged weight, so the result
// is invariant under permutations of the input.
std::vector<double> utilities(std::span<const double> values, const WeightScheme& scheme);

// lambda^2 * max_k w_k^2, the constant bounding the second moment of the
// assembled update.
double n_w_constant(const WeightScheme& scheme);

}  // namespace igo
