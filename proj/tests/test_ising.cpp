#include <doctest.h>

#include <cmath>

#include "stoqlab/ising.hpp"
#include "stoqlab/rng.hpp"

using namespace stoqlab;
using contours::SpinConfig;
using ising::CouplingSpec;
using ising::FieldSpec;
using lattice::Point;
using lattice::Region;

TEST_CASE("hamiltonian hand counts") {
  const CouplingSpec nn{1.0, 3.0, true};
  const FieldSpec no_field{0.0, 1.0, 0.0};
  // 1x2 chain, all plus, plus boundary: 1 internal bond + 6 boundary bonds in d=1? ->
  // d=1 domain {0,1}: internal bond 1, boundary bonds: site 0 to -1 and site 1 to 2
  const Region dom = Region({Point{0}, Point{1}});
  const auto sigma = SpinConfig::constant(dom, +1, +1);
  CHECK(ising::hamiltonian(sigma, +1, nn, no_field, 8) == doctest::Approx(-3.0));

  // single site with field only
  const Region site({Point{0}});
  const FieldSpec only_field{0.7, 1.0, 0.0};
  const CouplingSpec zero{0.0, 3.0, true};
  CHECK(ising::hamiltonian(SpinConfig::constant(site, +1, +1), +1, zero, only_field, 4) ==
        doctest::Approx(-0.7));
  CHECK(ising::hamiltonian(SpinConfig::constant(site, -1, +1), +1, zero, only_field, 4) ==
        doctest::Approx(+0.7));

  // global spin flip with flipped boundary leaves the pair energy unchanged
  const CouplingSpec lr{1.0, 3.0, false};
  const Region box = Region::box(Point{0, 0}, Point{2, 1});
  RngStream rng(2);
  SpinConfig a = SpinConfig::constant(box, -1, -1);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    a.values[i] = rng.next_bernoulli(0.5) ? 1 : -1;
  SpinConfig b = a;
  for (auto& v : b.values) v = static_cast<std::int8_t>(-v);
  b.outside = +1;
  CHECK(ising::hamiltonian(a, -1, lr, no_field, 24) ==
        doctest::Approx(ising::hamiltonian(b, +1, lr, no_field, 24)));
}

TEST_CASE("surface energy") {
  const CouplingSpec nn{1.5, 3.0, true};
  const Region box = Region::box(Point{0, 0}, Point{1, 1});
  const auto bracket = ising::surface_energy(box, nn, 8);
  CHECK(bracket.lower == doctest::Approx(1.5 * 8));  // J |edge boundary|
  CHECK(bracket.upper == doctest::Approx(bracket.lower));

  const auto empty = ising::surface_energy(Region{}, nn, 8);
  CHECK(empty.lower == 0.0);
  CHECK(empty.upper == 0.0);

  // long-range bracket contains a larger-cutoff refinement
  const CouplingSpec lr{1.0, 3.0, false};
  const auto coarse = ising::surface_energy(box, lr, 12);
  const auto fine = ising::surface_energy(box, lr, 48);
  CHECK(coarse.lower <= fine.lower + 1e-12);
  CHECK(fine.lower <= coarse.upper + 1e-12);
  CHECK(fine.upper <= coarse.upper + 1e-12);
}

TEST_CASE("field sums") {
  const FieldSpec fs{1.0, 1.0, 0.0};
  CHECK(ising::field_sum(Region({Point{0, 0}}), fs) == doctest::Approx(1.0));
  CHECK(ising::field_bound_check(lattice::ball(Point{0, 0}, 5), fs));
  // truncated field vanishes on a region inside the truncation radius
  const FieldSpec truncated{1.0, 1.0, 10.0};
  CHECK(ising::field_sum(lattice::ball(Point{0, 0}, 3), truncated) == 0.0);
}

TEST_CASE("exact Gibbs table") {
  const CouplingSpec nn{1.0, 3.0, true};
  const FieldSpec no_field{0.0, 1.0, 0.0};
  // beta = 0: uniform
  const auto uniform = ising::gibbs_exact(Region::box(Point{0, 0}, Point{1, 1}), +1, 0.0, nn,
                                          no_field, 8);
  for (double p : uniform.probability) CHECK(p == doctest::Approx(1.0 / 16.0));

  // single site with plus boundary: logistic closed form
  const double beta = 0.8;
  const auto single = ising::gibbs_exact(Region({Point{0, 0}}), +1, beta, nn, no_field, 8);
  const double expected = std::exp(2.0 * beta * 4.0) / (std::exp(2.0 * beta * 4.0) + 1.0);
  CHECK(single.probability[1] == doctest::Approx(expected).epsilon(1e-12));

  // normalization
  const auto table = ising::gibbs_exact(Region::box(Point{0, 0}, Point{2, 1}), -1, 0.6, nn,
                                        no_field, 8);
  double total = 0.0;
  for (double p : table.probability) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-12);

  // enumeration budget is 2^20
  CHECK_THROWS(ising::gibbs_exact(Region::box(Point{0, 0}, Point{6, 2}), -1, 0.6, nn,
                                  no_field, 8));
}

TEST_CASE("DLR residual vanishes") {
  const CouplingSpec nn{1.0, 3.0, true};
  const FieldSpec fs{0.3, 1.0, 0.0};
  const Region box = Region::box(Point{0, 0}, Point{2, 2});
  const Region sub({Point{1, 1}});
  const auto f = [](const SpinConfig& sigma) { return static_cast<double>(sigma.at(Point{1, 1})); };
  CHECK(ising::dlr_residual(box, sub, +1, 0.9, nn, fs, f, 8) <= 1e-12);
  // sub = box and constant observables give zero residual
  const auto g = [](const SpinConfig&) { return 2.5; };
  CHECK(ising::dlr_residual(box, box, +1, 0.9, nn, fs, g, 8) <= 1e-14);
  CHECK(ising::dlr_residual(box, sub, +1, 0.9, nn, fs, g, 8) <= 1e-14);
}

TEST_CASE("contour energy gap for the droplet") {
  const CouplingSpec nn{1.0, 3.0, true};
  const Region box = Region::box(Point{-4, -4}, Point{4, 4});
  SpinConfig sigma = SpinConfig::constant(box, -1, -1).with_value(Point{0, 0}, +1);
  contours::PartitionParams params;
  params.M = 1.0;
  params.a = 2.0;
  params.r = 2;
  const auto family = contours::label_contours(sigma, contours::build_partition(sigma, params));
  REQUIRE(family.size() == 1);
  // flipping the plus spin breaks 4 bonds: gap 2 J * 4
  CHECK(ising::contour_energy_gap(sigma, family[0], nn, 8) == doctest::Approx(8.0));

  // ferromagnetic gaps are nonnegative on sampled droplet configurations
  RngStream rng(4);
  const CouplingSpec lr{1.0, 3.0, false};
  for (int rep = 0; rep < 10; ++rep) {
    const auto chain = ising::metropolis_sample(box, -1, 0.9, lr, FieldSpec{}, 4000,
                                                40 + static_cast<std::uint64_t>(rep));
    const Region bdry = contours::boundary(chain);
    if (bdry.empty()) continue;
    const auto parts = contours::build_partition(bdry, params);
    const auto contours_list = contours::label_contours(chain, parts);
    for (std::size_t idx : contours::external_indices(contours_list)) {
      if (contours_list[idx].exterior_label != -1) continue;
      CHECK(ising::contour_energy_gap(chain, contours_list[idx], lr, 32) >= -1e-9);
    }
  }
}

TEST_CASE("gap bound check needs M above threshold") {
  const CouplingSpec lr{1.0, 3.0, false};
  contours::PartitionParams small;
  small.M = 1.0;
  small.a = 3.1;
  small.r = 6;
  const Region box = Region::box(Point{-3, -3}, Point{3, 3});
  SpinConfig sigma = SpinConfig::constant(box, -1, -1).with_value(Point{0, 0}, +1);
  const auto family = contours::label_contours(sigma, contours::build_partition(sigma, small));
  REQUIRE(family.size() == 1);
  const double gap = ising::contour_energy_gap(sigma, family[0], lr, 32);
  CHECK(!ising::contour_gap_bound_check(gap, family[0], lr, small, 2, 32).has_value());

  const auto big = contours::PartitionParams::defaults(2, 3.0, 0.1, 1.0);
  const auto fam_big = contours::label_contours(sigma, contours::build_partition(sigma, big));
  REQUIRE(fam_big.size() == 1);
  const double gap_big = ising::contour_energy_gap(sigma, fam_big[0], lr, 32);
  const auto verdict = ising::contour_gap_bound_check(gap_big, fam_big[0], lr, big, 2, 32);
  REQUIRE(verdict.has_value());
  CHECK(*verdict);
}

TEST_CASE("metropolis detailed balance and determinism") {
  const CouplingSpec nn{1.0, 3.0, true};
  const FieldSpec fs{0.1, 1.0, 0.0};
  const Region box = Region::box(Point{0, 0}, Point{3, 3});
  const ising::System sys(box, -1, nn, fs, 8);
  const double beta = 0.7;
  RngStream rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    const std::uint64_t mask = rng.next_u64() & 0xffff;
    const std::size_t site = static_cast<std::size_t>(rng.next_int(16));
    const std::uint64_t flipped = mask ^ (std::uint64_t{1} << site);
    const double lhs = ising::metropolis_acceptance(sys, mask, site, beta) *
                       std::exp(-beta * sys.energy_mask(mask));
    const double rhs = ising::metropolis_acceptance(sys, flipped, site, beta) *
                       std::exp(-beta * sys.energy_mask(flipped));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }

  const auto a = ising::metropolis_sample(box, -1, beta, nn, fs, 5000, 12345);
  const auto b = ising::metropolis_sample(box, -1, beta, nn, fs, 5000, 12345);
  CHECK(a.values == b.values);
  // steps = 0 returns the seeded initial configuration deterministically
  const auto c0 = ising::metropolis_sample(box, -1, beta, nn, fs, 0, 7);
  const auto c1 = ising::metropolis_sample(box, -1, beta, nn, fs, 0, 7);
  CHECK(c0.values == c1.values);
}

TEST_CASE("peierls conditioning") {
  const CouplingSpec lr{1.0, 3.0, false};
  const FieldSpec fs{0.1, 2.0, 0.0};
  contours::PartitionParams params;
  params.M = 1.0;
  params.a = 2.0;
  params.r = 2;
  // a 4x4 box is fully forced by the inner-boundary conditioning: every site
  // sits within distance one of the boundary ring
  const Region small = Region::box(Point{-2, -2}, Point{1, 1});
  const auto degenerate = ising::peierls_probability(small, 1.0, lr, fs, params, 32);
  CHECK(degenerate.n_conditioned == 1);
  CHECK(degenerate.exact == 0.0);
  CHECK(degenerate.contour_bound == 0.0);

  // 6x6 leaves a free 2x2 core: nondegenerate probabilities and bound
  const Region box = Region::box(Point{-3, -3}, Point{2, 2});
  const auto res = ising::peierls_probability(box, 1.0, lr, fs, params, 32);
  CHECK(res.n_conditioned == 16);
  CHECK(res.exact > 0.0);
  CHECK(res.exact < 1.0);
  CHECK(res.contour_bound >= res.exact);
  CHECK(res.n_contours > 0);
}
