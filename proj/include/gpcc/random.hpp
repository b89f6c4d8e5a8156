#ifndef GPCC__RANDOM_HPP_
#define GPCC__RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

namespace gpcc
{

/// Seeded generator with a platform-independent mapping from bits to values.
/// std::uniform_real_distribution is implementation-defined, so it is not used.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in [0, n). Rejection sampling keeps it unbiased.
  std::size_t index(std::size_t n)
  {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r = engine_();
    while (r >= limit) {
      r = engine_();
    }
    return static_cast<std::size_t>(r % bound);
  }

  template <typename Container>
  void shuffle(Container & c)
  {
    for (std::size_t i = c.size(); i > 1; --i) {
      std::swap(c[i - 1], c[index(i)]);
    }
  }

  std::uint64_t next() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

}  // namespace gpcc

#endif  // GPCC__RANDOM_HPP_
