#pragma once

#include <complex>
#include <vector>

namespace sci {

/// Finite stand-in for a nonempty compact subset of C: a point cloud plus a
/// resolution radius (the set represents any compact within d_H <= resolution).
/// Points are deduplicated within 1e-12 on construction.
class SpectralSet {
 public:
  SpectralSet(std::vector<std::complex<double>> points, double resolution);

  const std::vector<std::complex<double>>& points() const { return points_; }
  double resolution() const { return resolution_; }

 private:
  std::vector<std::complex<double>> points_;
  double resolution_;
};

/// Exact max-min Hausdorff distance between the point clouds (the resolution
/// fields are metadata and are not folded in).
double hausdorff_distance(const SpectralSet& a, const SpectralSet& b);

/// Directed distance sup_{a in A} dist(a, B).
double directed_distance(const SpectralSet& a, const SpectralSet& b);

/// {exp(2*pi*i*j/L) : 0 <= j < L}, resolution 0.
SpectralSet roots_of_unity(std::int64_t L);

/// 2n equally spaced unit-modulus points; resolution = chord 2 sin(pi/(2n)).
SpectralSet circle_grid(int n);

struct DyadicRootApproximant {
  std::complex<double> root;  // exp(2*pi*i*floor(2^r theta)/2^r)
  double error;               // |root - z0| <= 2*pi*2^(-r)
};

/// Nearest-below dyadic root of order 2^r for a unit-modulus z0.
DyadicRootApproximant dyadic_root_approximant(std::complex<double> z0, int r);

struct DecreasingLimitReport {
  /// d_H(set_m, set_last) for each m.
  std::vector<double> distance_to_last;
  /// Directed overshoot of set_{m+1} outside set_m beyond the resolution slack.
  std::vector<double> nesting_violation;
  bool approximately_nested;  // all violations within the resolution slack
};

DecreasingLimitReport decreasing_limit_diagnostic(const std::vector<SpectralSet>& sets);

}  // namespace sci
