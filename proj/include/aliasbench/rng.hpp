#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace aliasbench {

// Seeded random stream used everywhere randomness is needed.  Scaling from
// the raw mt19937_64 output is done by hand so the produced values do not
// depend on the standard library's distribution implementations; the same
// seed yields the same stream on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // [0, n)
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

private:
  std::mt19937_64 gen_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.index(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace aliasbench
