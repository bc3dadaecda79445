// Timing comparison of the OpenMP kernels against their serial references:
// algebra convolution, dense matrix product, Gibbs enumeration, and the
// Monte Carlo reduction. Usage: bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "stoqlab/groupoid.hpp"
#include "stoqlab/ising.hpp"
#include "stoqlab/linalg.hpp"
#include "stoqlab/parallel.hpp"
#include "stoqlab/qgibbs.hpp"
#include "stoqlab/rng.hpp"

using namespace stoqlab;
using lattice::Point;
using lattice::Region;

namespace {

template <class F>
double time_ms(int repeats, F f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    if (ms < best) best = ms;
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.2f ms   omp %9.2f ms   speedup %.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d\n", max_threads());

  {
    std::vector<Point> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(Point{i});
    const auto spec = groupoid::make_spec(Region(std::move(pts)), 2);
    RngStream rng(1);
    groupoid::AlgebraElement f1(spec), f2(spec);
    for (std::size_t g = 0; g < spec->order(); ++g)
      for (std::size_t s = 0; s < spec->order(); ++s) {
        f1.at(g, s) = {rng.next_uniform(), rng.next_uniform()};
        f2.at(g, s) = {rng.next_uniform(), rng.next_uniform()};
      }
    const double serial = time_ms(repeats, [&] { (void)groupoid::convolve_serial(f1, f2); });
    const double parallel = time_ms(repeats, [&] { (void)groupoid::convolve(f1, f2); });
    report("convolution (8 sites)", serial, parallel);
    if (groupoid::convolve(f1, f2).max_abs_diff(groupoid::convolve_serial(f1, f2)) != 0.0) {
      std::printf("MISMATCH in convolution kernels\n");
      return 1;
    }
  }

  {
    RngStream rng(2);
    linalg::CMatrix a(256), b(256);
    for (std::size_t i = 0; i < 256; ++i)
      for (std::size_t j = 0; j < 256; ++j) {
        a.at(i, j) = {rng.next_uniform(), rng.next_uniform()};
        b.at(i, j) = {rng.next_uniform(), rng.next_uniform()};
      }
    const double serial = time_ms(repeats, [&] { (void)linalg::multiply_serial(a, b); });
    const double parallel = time_ms(repeats, [&] { (void)(a * b); });
    report("matrix product (256)", serial, parallel);
  }

  {
    const Region box = Region::box(Point{0, 0}, Point{4, 3});
    const ising::CouplingSpec cs{1.0, 3.0, false};
    const ising::FieldSpec fs{0.1, 1.0, 0.0};
    const ising::System sys(box, -1, cs, fs, 24);
    // serial reference: direct mask loop; omp path inside gibbs_exact
    const double serial = time_ms(repeats, [&] {
      double z = 0.0;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << 20); ++mask)
        z += std::exp(-0.6 * sys.energy_mask(mask));
      volatile double sink = z;
      (void)sink;
    });
    const double parallel =
        time_ms(repeats, [&] { (void)ising::gibbs_exact(box, -1, 0.6, cs, fs, 24); });
    report("gibbs enumeration (2^20)", serial, parallel);
  }

  {
    const Region lam({Point{0}, Point{1}});
    const auto phi = qgibbs::tfim(lam, 1.0, 0.7);
    const qgibbs::PppSampler sampler(phi, lam);
    const auto term = [&](std::int64_t i) {
      RngStream rng(3, static_cast<std::uint64_t>(i));
      return sampler.draw(0, 0.8, rng).weight.real();
    };
    const double serial =
        time_ms(repeats, [&] { (void)chunked_sum_serial<double>(1000000, term); });
    const double parallel = time_ms(repeats, [&] { (void)chunked_sum<double>(1000000, term); });
    report("mc reduction (1e6 draws)", serial, parallel);
    if (chunked_sum<double>(100000, term) != chunked_sum_serial<double>(100000, term)) {
      std::printf("MISMATCH in mc reduction kernels\n");
      return 1;
    }
  }

  return 0;
}
