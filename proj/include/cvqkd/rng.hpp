#ifndef CVQKD_RNG_HPP
#define CVQKD_RNG_HPP

#include <cstdint>
#include <cmath>

namespace cvqkd {

// Counter-based generator: every draw is splitmix64(seed, counter++), so the
// stream is a pure function of (seed, counter) and bit-stable across
// platforms. The normal transform is Box-Muller with two dedicated uniforms
// per draw (no caching), documented for reproducibility.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t next_u64() { return splitmix64(seed_ ^ splitmix64(counter_++)); }

  // uniform in (0, 1]
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53; }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace cvqkd

#endif  // CVQKD_RNG_HPP
