#pragma once

#include "msp/types.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace msp {

/// SplitMix64 finalizer; the key-mixing primitive behind all stream
/// derivation in this library. Fixed for reproducibility: outputs are part
/// of the persisted-experiment contract.
std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a on bytes, used to hash stream labels and method names.
std::uint64_t fnv1a(std::string_view s);

/// Deterministic random stream with cheap, order-insensitive substream
/// derivation. Each stream owns an mt19937_64 seeded from its key; children
/// are keyed by mixing the parent key with a label, so generating task 7's
/// data never depends on whether task 6 was generated first.
///
/// Gaussians come from Box-Muller on 53-bit uniforms rather than
/// std::normal_distribution, whose output is implementation-defined.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t key);

  StreamRng stream(std::uint64_t label) const;
  StreamRng stream(std::string_view label) const;
  StreamRng stream(std::string_view label, std::uint64_t index) const;

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double gaussian();
  double rademacher();  // +1 or -1

  /// Fisher-Yates draw of k distinct indices from [0, n).
  std::vector<Index> sample_without_replacement(Index n, Index k);

 private:
  std::uint64_t key_;
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Row-major fills so a matrix's content is a pure function of (key, shape).
Matrix gaussian_matrix(StreamRng& rng, Index rows, Index cols);
Vector gaussian_vector(StreamRng& rng, Index n);
Matrix rademacher_matrix(StreamRng& rng, Index rows, Index cols);

}  // namespace msp
