#pragma once

#include <cstdint>
#include <cmath>

namespace stoqlab {

// Counter-based random stream built on SplitMix64. A stream is addressed by
// (seed, stream_id); streams with different ids are independent, so Monte
// Carlo samples can be assigned one stream per sample index and evaluated in
// any order (or in parallel) with identical results.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : state_(mix(seed ^ mix(stream_id + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // uniform in [0,1), 53-bit resolution, bit-reproducible across platforms
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in {0, ..., n-1}
  int next_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  bool next_bernoulli(double p) { return next_uniform() < p; }

  // Knuth product method; lambda is split into chunks so the running product
  // never underflows. Fine for the moderate intensities used here.
  int next_poisson(double lambda) {
    int total = 0;
    while (lambda > 30.0) {
      total += poisson_knuth(30.0);
      lambda -= 30.0;
    }
    return total + poisson_knuth(lambda);
  }

 private:
  int poisson_knuth(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    double prod = 1.0;
    int k = 0;
    do {
      prod *= next_uniform();
      ++k;
    } while (prod > limit);
    return k - 1;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace stoqlab
