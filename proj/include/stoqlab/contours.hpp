#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stoqlab/lattice.hpp"
#include "stoqlab/multiscale.hpp"

namespace stoqlab::contours {

using lattice::Point;
using lattice::Region;

// Closed-form constants used by the partition machinery and the energy
// estimates. All formulas take the l1 geometry of Z^d as given.
namespace constants {
double riemann_zeta(double s);            // s > 1
double c_d(int d);                        // 2 (d-1)^{d-1}, with 0^0 = 1
double k_d(int d);                        // (e d)^{1/d} / (2 (2e+1))
double lattice_sum(int d, double alpha);  // sum_{y != 0} |y|^{-alpha}
// entropy constants: c from the subordinated-count bound, b from the
// bounded-total-volume count, c1 from the contour count at the origin
double subordinated_c(int d, int r);
double volume_count_b(int d, int r);
double contour_count_c1(int d, double M, double a, int r);
// total-volume-versus-size constant
double kappa(int d, double M, double a, int r);
// energy-gap constants (valid for M above threshold_M)
double k_alpha_1(int d, double alpha, double J, double a, int r);
double threshold_M(int d, double alpha, double J, double a, int r);
double gap_c2(int d, double alpha, double J, double M, double a, int r);
double gap_c3(int d, double alpha, double J, double M, double a, int r);
double gap_c4(int d, double alpha, double J, double M, double a, int r);
// field-sum constant (delta < d)
double field_c5(int d, double delta, double h_star);
// surface-energy constant; the min makes both proven inequalities usable
double surface_K_alpha(double J, double alpha, int d);
}  // namespace constants

struct PartitionParams {
  double M = 1.0;
  double a = 2.0;
  int r = 2;

  int max_family_size() const { return (1 << r) - 1; }
  // a = max{(d+1+eps)/(alpha-d), d+1+eps}, r = ceil(log2(a+1)) + d + 1,
  // M = max{(2^r-1)^{d+1}/k_d^d, M1, M2}
  static PartitionParams defaults(int d, double alpha, double epsilon, double J = 1.0);
};

// +-1 valued configuration on a finite domain, constant outside it.
struct SpinConfig {
  Region domain;
  std::vector<std::int8_t> values;  // aligned with domain order
  std::int8_t outside = -1;

  static SpinConfig constant(Region domain, std::int8_t value, std::int8_t outside);
  int at(const Point& p) const;
  SpinConfig with_value(const Point& p, std::int8_t v) const;
};

// all points whose radius-1 ball is not monochromatic
Region boundary(const SpinConfig& sigma);

struct PartitionPart {
  Region support;                // gamma-bar
  std::vector<Region> subfamily;  // recorded at birth: support cap cube
  int birth_scale = 0;
};

// Scale-by-scale peeling of Prop-style cube covers: extract graph components
// of at most 2^r - 1 cubes, remove their points, move one scale up.
std::vector<PartitionPart> build_partition(const SpinConfig& sigma, const PartitionParams& p);
std::vector<PartitionPart> build_partition(const Region& bdry, const PartitionParams& p);

struct CheckReport {
  bool pass = true;
  std::vector<std::string> failures;

  void fail(std::string msg) {
    pass = false;
    failures.push_back(std::move(msg));
  }
};

// Conditions (A) and (B) against the recorded subfamilies. Failures are
// report entries, never exceptions.
CheckReport check_partition(const std::vector<PartitionPart>& parts, const Region& bdry,
                            const PartitionParams& p);

// Common refinement {gamma cap gamma'}; each output records the restricted
// subfamily (from whichever input gives the smaller max diameter).
std::vector<PartitionPart> intersect_partitions(const std::vector<PartitionPart>& g1,
                                                const std::vector<PartitionPart>& g2,
                                                const PartitionParams& p);

struct Contour {
  PartitionPart part;
  int exterior_label = -1;           // sign of sigma on the inner boundary of V
  std::vector<int> interior_labels;  // one per interior component of sp
  Region interior_plus;
  Region interior_minus;
  Region volume;  // sp together with its interior

  const Region& support() const { return part.support; }
  std::int64_t size() const { return static_cast<std::int64_t>(part.support.size()); }
};

std::vector<Contour> label_contours(const SpinConfig& sigma,
                                    const std::vector<PartitionPart>& parts);

// contours of the family that are external (their external components are
// not swallowed by any other contour's volume)
std::vector<std::size_t> external_indices(const std::vector<Contour>& family);

// tau: sigma on I_- and outside V, flipped on I_+, -1 on the supports
SpinConfig erase_contours(const SpinConfig& sigma, const std::vector<Contour>& chosen);

// Brute force over configurations on `box` with minus outside: distinct
// supports of external minus-contours of size m whose volume contains the
// origin. Throws when 2^{|box|} exceeds the budget.
std::vector<Region> enumerate_contours_at_origin(int m, const Region& box,
                                                 const PartitionParams& p,
                                                 std::int64_t budget = (1 << 20));

// All valid partitions of a small boundary by exhaustive set-partition
// enumeration. Exact for r = 1 (the subfamily is forced); for larger r the
// subfamily is the singleton family whenever it fits, else the block is
// rejected. Throws when the enumeration exceeds the budget.
std::vector<std::vector<PartitionPart>> enumerate_partitions(const Region& bdry,
                                                             const PartitionParams& p,
                                                             std::int64_t budget = 2'000'000);

}  // namespace stoqlab::contours
