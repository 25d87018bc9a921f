#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace igo {

// One block of the Philox4x64 keyed bijection, 10 rounds. Output agrees word
// for word with numpy.random.Philox given the same key/counter (note numpy
// advances its counter before emitting a block, so its first block is the
// one at counter+1).
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key);

std::uint64_t fnv1a64(std::string_view s);

// splitmix64 finalizer; bijective on u64.
std::uint64_t mix64(std::uint64_t x);

// Counter-based random stream. The key holds (seed, label hash); the counter
// lanes hold (block index, replicate, split path, 0). Distinct labels,
// replicate indices or split paths give statistically independent streams,
// and a stream's output depends only on its identity, never on how many
// draws other streams have made. That is what makes thread-count-invariant
// Monte Carlo possible: give every job its own stream keyed by job index.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t label_hash);

  static RngStream derive(std::uint64_t seed, std::string_view label,
                          std::uint64_t replicate = 0);

  // Child stream with a distinct split-path lane. Independent of the
  // parent's draw position; splitting the same parent with the same index
  // always yields the same child.
  RngStream split(std::uint64_t child_index) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit mantissa.
  double next_double();

  // Standard normal via the Marsaglia polar method (no trig); pairs are
  // generated together and the spare is cached.
  double next_normal();

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> lanes_;  // lane 0 is the running block index
  std::array<std::uint64_t, 4> block_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;

  void refill();
};

}  // namespace igo
