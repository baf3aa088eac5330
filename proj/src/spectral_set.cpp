#include "sci/spectral_set.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sci {

namespace {
constexpr double kDedupTol = 1e-12;
}

SpectralSet::SpectralSet(std::vector<std::complex<double>> points, double resolution)
    : resolution_(resolution) {
  if (points.empty()) throw std::invalid_argument("SpectralSet: points must be nonempty");
  if (resolution < 0.0) throw std::invalid_argument("SpectralSet: resolution must be >= 0");
  for (const auto& p : points) {
    bool dup = false;
    for (const auto& q : points_)
      if (std::abs(p - q) <= kDedupTol) { dup = true; break; }
    if (!dup) points_.push_back(p);
  }
}

double directed_distance(const SpectralSet& a, const SpectralSet& b) {
  double worst = 0.0;
  for (const auto& p : a.points()) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b.points()) best = std::min(best, std::abs(p - q));
    worst = std::max(worst, best);
  }
  return worst;
}

double hausdorff_distance(const SpectralSet& a, const SpectralSet& b) {
  return std::max(directed_distance(a, b), directed_distance(b, a));
}

SpectralSet roots_of_unity(std::int64_t L) {
  if (L < 1) throw std::invalid_argument("roots_of_unity: L >= 1 required");
  std::vector<std::complex<double>> pts;
  pts.reserve(static_cast<std::size_t>(L));
  for (std::int64_t j = 0; j < L; ++j) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(L);
    pts.emplace_back(std::cos(th), std::sin(th));
  }
  return SpectralSet(std::move(pts), 0.0);
}

SpectralSet circle_grid(int n) {
  if (n < 1) throw std::invalid_argument("circle_grid: n >= 1 required");
  std::vector<std::complex<double>> pts;
  pts.reserve(static_cast<std::size_t>(2 * n));
  for (int j = 0; j < 2 * n; ++j) {
    const double th = std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    pts.emplace_back(std::cos(th), std::sin(th));
  }
  return SpectralSet(std::move(pts), 2.0 * std::sin(std::numbers::pi / (2.0 * n)));
}

DyadicRootApproximant dyadic_root_approximant(std::complex<double> z0, int r) {
  if (std::abs(std::abs(z0) - 1.0) > 1e-9)
    throw std::domain_error("dyadic_root_approximant: |z0| must be 1");
  if (r < 0) throw std::invalid_argument("dyadic_root_approximant: r >= 0 required");
  double theta = std::arg(z0) / (2.0 * std::numbers::pi);
  if (theta < 0.0) theta += 1.0;
  const double scale = std::ldexp(1.0, r);  // 2^r
  double p = std::floor(scale * theta);
  if (p >= scale) p = scale - 1.0;  // guards theta rounding to 1.0
  const double th = 2.0 * std::numbers::pi * p / scale;
  const std::complex<double> root(std::cos(th), std::sin(th));
  return {root, std::abs(root - z0)};
}

DecreasingLimitReport decreasing_limit_diagnostic(const std::vector<SpectralSet>& sets) {
  if (sets.size() < 2)
    throw std::invalid_argument("decreasing_limit_diagnostic: need at least 2 sets");
  DecreasingLimitReport rep;
  const SpectralSet& last = sets.back();
  for (const auto& s : sets) rep.distance_to_last.push_back(hausdorff_distance(s, last));
  rep.approximately_nested = true;
  for (std::size_t m = 0; m + 1 < sets.size(); ++m) {
    const double slack = sets[m].resolution() + sets[m + 1].resolution();
    const double over = directed_distance(sets[m + 1], sets[m]);
    const double viol = std::max(0.0, over - slack);
    rep.nesting_violation.push_back(viol);
    if (viol > 1e-12) rep.approximately_nested = false;
  }
  return rep;
}

}  // namespace sci
