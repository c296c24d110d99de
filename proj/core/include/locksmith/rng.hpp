#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace locksmith::rng {

// std::mt19937_64 output is pinned by the standard; the std distributions are
// not. Sampling helpers below draw from raw engine words so results are
// byte-identical across standard libraries.
using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, n) without modulo bias.
inline std::uint64_t below(Engine& eng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t x = eng();
  while (x > limit) x = eng();
  return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline bool coin(Engine& eng) { return (eng() >> 63) != 0; }

// Uniform double in [-a, a].
inline double symmetric(Engine& eng, double a) { return (unit(eng) * 2.0 - 1.0) * a; }

template <typename T>
void shuffle(Engine& eng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(below(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Draws k distinct indices from [0, n). Order of draws is preserved.
std::vector<std::size_t> inline sample_distinct(Engine& eng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k && !pool.empty(); ++i) {
    std::size_t j = static_cast<std::size_t>(below(eng, pool.size()));
    out.push_back(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
  }
  return out;
}

}  // namespace locksmith::rng
