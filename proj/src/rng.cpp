#include "msp/rng.hpp"

#include <cmath>
#include <numbers>

namespace msp {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kStreamTag = 0xa0761d6478bd642fULL;
}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

StreamRng::StreamRng(std::uint64_t key) : key_(key), gen_(splitmix64(key)) {}

StreamRng StreamRng::stream(std::uint64_t label) const {
  return StreamRng(splitmix64(key_ ^ splitmix64(label ^ kStreamTag)));
}

StreamRng StreamRng::stream(std::string_view label) const { return stream(fnv1a(label)); }

StreamRng StreamRng::stream(std::string_view label, std::uint64_t index) const {
  return stream(fnv1a(label)).stream(index);
}

std::uint64_t StreamRng::next_u64() { return gen_(); }

double StreamRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double StreamRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double StreamRng::rademacher() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

std::vector<Index> StreamRng::sample_without_replacement(Index n, Index k) {
  if (k < 0 || k > n) throw std::invalid_argument("sample_without_replacement: k out of range");
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(next_u64() % static_cast<std::uint64_t>(n - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

Matrix gaussian_matrix(StreamRng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  return m;
}

Vector gaussian_vector(StreamRng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

Matrix rademacher_matrix(StreamRng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.rademacher();
  return m;
}

}  // namespace msp
