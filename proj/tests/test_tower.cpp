#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <random>

#include "sci/experiment.hpp"
#include "sci/tower.hpp"

using namespace sci;

namespace {

// Independent lattice-count oracle: points (k+il)/n with k^2+l^2 <= n^4.
std::int64_t grid_count_oracle(int n) {
  const std::int64_t b = static_cast<std::int64_t>(n) * n;  // |k|, |l| <= n^2
  std::int64_t count = 0;
  for (std::int64_t k = -b; k <= b; ++k)
    for (std::int64_t l = -b; l <= b; ++l)
      if (k * k + l * l <= b * b) ++count;
  return count;
}

SpectralSet sampled_disk(std::complex<double> center, double radius) {
  std::vector<std::complex<double>> pts;
  for (int i = 0; i <= 40; ++i) {
    const double rho = radius * i / 40.0;
    for (int j = 0; j < 72; ++j) {
      const double th = 2 * std::numbers::pi * j / 72.0;
      pts.push_back(center + std::polar(rho, th));
    }
  }
  return SpectralSet(std::move(pts), 0.0);
}

}  // namespace

TEST_CASE("spectral grid enumeration") {
  const SpectralGrid g1 = spectral_grid(1);
  CHECK(g1.points.size() == 5);
  for (const auto& want : {std::complex<double>(0, 0), {1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
    bool found = false;
    for (const auto& p : g1.points)
      if (std::abs(p - want) < 1e-15) found = true;
    CHECK(found);
  }
  // grid rule: |(k+il)/n| <= n, i.e. k^2+l^2 <= n^4 (49 points at n=2)
  CHECK(grid_count_oracle(2) == 49);
  for (int n = 1; n <= 4; ++n)
    CHECK(static_cast<std::int64_t>(spectral_grid(n).points.size()) == grid_count_oracle(n));
  CHECK(spectral_grid(3).mesh() == doctest::Approx(std::sqrt(2.0) / 3.0));
  // every grid point lies in the closed radius-n disk
  const SpectralGrid g2 = spectral_grid(2);
  for (const auto& p : g2.points) CHECK(std::abs(p) <= 2.0 + 1e-12);

  // truncation keeps only the capped disk
  const SpectralGrid t = spectral_grid(4, 1.5);
  for (const auto& p : t.points) CHECK(std::abs(p) <= 1.5 + 1e-9);
  CHECK(t.points.size() < spectral_grid(4).points.size());

  // refinement: every point of G_n is within 1/n of a point of G_2n
  for (int n : {1, 2}) {
    const SpectralGrid coarse = spectral_grid(n), fine = spectral_grid(2 * n);
    for (const auto& p : coarse.points) {
      double best = 1e9;
      for (const auto& q : fine.points) best = std::min(best, std::abs(p - q));
      CHECK(best <= 1.0 / n + 1e-12);
    }
  }
}

TEST_CASE("residual fields") {
  const SpectralGrid grid = spectral_grid(4, 2.0);
  const ResidualField id = residual_field(identity_map(), 2, 2, 2, grid);
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    // h(z) = |1 - z| for the identity
    CHECK(id.values[i] == doctest::Approx(std::abs(1.0 - grid.points[i])).epsilon(1e-9));
  }

  // tau_0 at n2=2: zeros exactly at the 4th roots on the grid
  const ResidualField t0 = residual_field(translation_map(0), 2, 2, 2, grid);
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const bool is_root = std::abs(std::pow(grid.points[i], 4.0) - 1.0) < 1e-9 &&
                         std::abs(std::abs(grid.points[i]) - 1.0) < 1e-9;
    if (is_root) CHECK(t0.values[i] < 1e-10);
    else CHECK(t0.values[i] > 1e-10);
  }

  // 1-Lipschitz in z across neighboring grid points
  const double mesh = grid.mesh();
  for (std::size_t i = 0; i < grid.points.size(); ++i)
    for (std::size_t j = i + 1; j < grid.points.size(); ++j) {
      const double dz = std::abs(grid.points[i] - grid.points[j]);
      if (dz > mesh * 1.01) continue;
      CHECK(std::abs(t0.values[i] - t0.values[j]) <= dz * (1.0 + 1e-9) + 1e-12);
    }

  // threaded evaluation matches single-threaded exactly
  const ResidualField t0p = residual_field(translation_map(0), 2, 2, 2, grid,
                                           LowerNormMethod::automatic, 4);
  CHECK(t0p.values == t0.values);
}

TEST_CASE("gamma sets") {
  const SpectralGrid grid = spectral_grid(4, 2.0);
  const ResidualField id = residual_field(identity_map(), 4, 4, 2, grid);
  const SpectralSet g = gamma_set(id, 0.5, 4);
  for (const auto& p : g.points()) CHECK(std::abs(p - std::complex<double>(1.0, 0.0)) < 0.25);
  // every grid point well inside the threshold ball is included
  for (std::size_t i = 0; i < grid.points.size(); ++i)
    if (std::abs(1.0 - grid.points[i]) < 0.25 - 1e-6) {
      double best = 1e9;
      for (const auto& p : g.points()) best = std::min(best, std::abs(p - grid.points[i]));
      CHECK(best < 1e-12);
    }

  // placeholder {0} when eps <= 1/n2, with the diagnostic flag raised
  GammaDiagnostics diag;
  const SpectralSet ph = gamma_set(id, 0.2, 4, &diag);
  CHECK(ph.points().size() == 1);
  CHECK(std::abs(ph.points()[0]) == 0.0);
  CHECK(diag.placeholder_used);

  // an empty threshold set also falls back to the placeholder: push the grid
  // far from every residual zero
  const SpectralGrid far_grid = spectral_grid(2, 0.4);
  GammaDiagnostics diag2;
  const SpectralSet ph2 =
      gamma_set(residual_field(translation_map(0), 3, 3, 2, far_grid), 0.6, 3, &diag2);
  CHECK(ph2.points().size() == 1);
  CHECK(diag2.placeholder_used);

  // guard-band exclusions are logged: h(0) = 1 for tau_0 at threshold 1
  const SpectralGrid origin_grid = spectral_grid(2, 0.1);
  GammaDiagnostics diag3;
  gamma_set(residual_field(translation_map(0), 2, 2, 2, origin_grid), 1.0 + 1.0 / 2.0, 2, &diag3);
  CHECK(!diag3.guard_band_exclusions.empty());

  // monotone in eps
  const SpectralSet lo = gamma_set(id, 0.4, 4), hi = gamma_set(id, 0.6, 4);
  CHECK(directed_distance(lo, hi) < 1e-12);
  CHECK(lo.points().size() <= hi.points().size());
}

TEST_CASE("pseudospectrum tower: identity converges to the eps-disk at 1") {
  TowerSchedule sched;
  sched.n2_list = {8, 12, 16};
  sched.one_index = true;
  const TowerResult res = run_pseudospectrum_tower(identity_map(), 0.3, sched);
  const double budget = res.final_mesh + 1.0 / res.final_n2;
  const double d = hausdorff_distance(res.set, sampled_disk({1.0, 0.0}, 0.3));
  CHECK(d <= budget + 0.06);  // disk sampling slack
  // trace indices strictly increase lexicographically
  for (std::size_t i = 1; i < res.trace.stages.size(); ++i)
    CHECK(res.trace.stages[i].indices > res.trace.stages[i - 1].indices);
}

TEST_CASE("pseudospectrum tower: single toggle lands near T union {1}") {
  TowerSchedule sched;
  sched.n2_list = {16};  // threshold 0.1 - 1/n2 needs n2 > 10
  sched.one_index = true;
  const SymbolicMap F = single_toggle_map(2, 2);
  const TowerResult res = run_pseudospectrum_tower(F, 0.1, sched);
  const SpectralSet target = block_union_spectrum({SpectralSet({{1.0, 0.0}}, 0.0),
                                                   circle_grid(256)});
  // every output point sits near the predicted union
  CHECK(directed_distance(res.set, target) <= 0.1 + res.final_mesh + 1e-9);
  // and the fixed block keeps a neighborhood of 1 in the output
  double near_one = 1e9;
  for (const auto& p : res.set.points())
    near_one = std::min(near_one, std::abs(p - std::complex<double>(1.0, 0.0)));
  CHECK(near_one <= res.final_mesh + 1e-9);
}

TEST_CASE("two-index sweep stabilizes immediately on exact RS norms") {
  TowerSchedule sched;
  sched.n2_list = {4, 6};
  sched.one_index = false;  // force the inner n1 sweep
  sched.inner_budget = 4;
  const TowerResult res = run_pseudospectrum_tower(translation_map(0), 0.4, sched);
  CHECK(res.trace.inner_stabilized);
  CHECK(res.set.points().size() >= 1);
}

TEST_CASE("one-index collapse: Gamma_{n2} equals Gamma_{n2,n1} for n1 >= n2") {
  const FiniteTree S = silver_tree({1}, Word::from_string("1111"), 4);
  const std::vector<SymbolicMap> gadgets = {identity_map(), translation_map(1),
                                            single_toggle_map(2, 1),
                                            build_tree_map(S, TreeMapVersion::odometer)};
  for (const auto& F : gadgets) {
    for (int n2 = 2; n2 <= 4; ++n2) {
      REQUIRE(one_index_schedule(F, n2) == n2);
      const SpectralGrid grid = spectral_grid(n2, 2.2);
      const SpectralSet base =
          gamma_set(residual_field(F, n2, n2, 2, grid), 0.6, n2);
      for (int n1 = n2 + 1; n1 <= n2 + 3; ++n1) {
        const SpectralSet refined =
            gamma_set(residual_field(F, n2, n1, 2, grid), 0.6, n2);
        CHECK(hausdorff_distance(base, refined) == 0.0);
        CHECK(base.points().size() == refined.points().size());
      }
    }
  }
  // uncertified modulus refuses the collapse
  CHECK_THROWS_AS(one_index_schedule(build_tree_map(S, TreeMapVersion::dump), 3),
                  std::invalid_argument);
}

TEST_CASE("sigma_ap tower: identity shrinks to {1}") {
  TowerSchedule sched;
  sched.n2_list = {8};
  const SigmaApResult res = run_sigma_ap_tower(identity_map(), sched, 4);
  const SpectralSet one({{1.0, 0.0}}, 0.0);
  for (int m = 1; m <= 4; ++m) {
    const double bound = 1.0 / m + res.stages[static_cast<std::size_t>(m - 1)].resolution() + 1e-9;
    CHECK(hausdorff_distance(res.stages[static_cast<std::size_t>(m - 1)], one) <= bound);
  }
  // decreasing d_H(A_m, A_last) profile
  for (std::size_t m = 0; m + 1 < res.distance_to_last.size(); ++m)
    CHECK(res.distance_to_last[m] >= res.distance_to_last[m + 1] - 1e-9);
}

TEST_CASE("sigma_ap tower: tau_r stages approach the circle from outside") {
  TowerSchedule sched;
  sched.n2_list = {6, 12};
  const SigmaApResult res = run_sigma_ap_tower(translation_map(0), sched, 3);
  const SpectralSet circle = circle_grid(128);
  double prev = 1e9;
  for (const auto& stage : res.stages) {
    const double d = hausdorff_distance(stage, circle);
    CHECK(d <= prev + 1e-9);
    prev = d;
  }
  // by stage m the set hugs the attainable roots within 1/m + mesh + root gap
  const double final_d = hausdorff_distance(res.stages.back(), circle);
  CHECK(final_d <= 1.0 / 3.0 + res.stages.back().resolution() + 0.3);
}

TEST_CASE("query budget depends only on the indices, never on map values") {
  for (const auto& [n2, n1] : std::vector<std::pair<int, int>>{{2, 2}, {2, 4}, {3, 3}}) {
    const FiniteSection a = assemble_section(identity_map(), n2, n1);
    const FiniteSection b = assemble_section(translation_map(1), n2, n1);
    const FiniteSection c = assemble_section(single_toggle_map(1, 2), n2, n1);
    CHECK(a.query_log == b.query_log);
    CHECK(a.query_log == c.query_log);
    CHECK(static_cast<std::int64_t>(a.query_log.size()) == (std::int64_t{1} << n1));
  }
}

TEST_CASE("Gamma sandwich at exact fields (permutation sections)") {
  const double eps = 0.45;
  for (const auto& F : {translation_map(0), single_toggle_map(1, 1)}) {
    for (int n2 : {4, 6}) {
      const SpectralGrid grid = spectral_grid(n2, 1.8);
      const FiniteSection sec = assemble_section(F, n2, n2);
      REQUIRE(sec.is_permutation);
      const ResidualField field = residual_field(F, n2, n2, 2, grid);
      const SpectralSet gamma = gamma_set(field, eps, n2);
      // h_true from cycle_exact: inner sandwich set included, outer respected
      for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const double h_true = lower_norm(sec, grid.points[i], 2,
                                         LowerNormMethod::cycle_exact).value;
        double dist_to_gamma = 1e9;
        for (const auto& p : gamma.points())
          dist_to_gamma = std::min(dist_to_gamma, std::abs(p - grid.points[i]));
        if (h_true <= eps - 2.0 / n2) CHECK(dist_to_gamma == 0.0);
        if (dist_to_gamma == 0.0) CHECK(h_true <= eps);
      }
    }
  }
}

TEST_CASE("Hausdorff convergence on gadgets: 2*mesh + 2/n2 at the final stage") {
  for (const auto& F : {identity_map(), translation_map(1)}) {
    TowerSchedule sched;
    sched.n2_list = {8, 12};
    const double eps = 0.4;
    const TowerResult res = run_pseudospectrum_tower(F, eps, sched);
    // analytic target on the final grid: h_true thresholded at eps
    const SpectralGrid grid = spectral_grid(res.final_n2, res.grid_radius);
    const FiniteSection sec = assemble_section(F, res.final_n2, res.final_n2);
    std::vector<std::complex<double>> target;
    for (const auto& z : grid.points)
      if (lower_norm(sec, z, 2, LowerNormMethod::cycle_exact).value <= eps) target.push_back(z);
    REQUIRE(!target.empty());
    const double d = hausdorff_distance(res.set, SpectralSet(target, 0.0));
    CHECK(d <= 2.0 * res.final_mesh + 2.0 / res.final_n2 + 1e-12);
  }
}

TEST_CASE("consistency axiom replay harness") {
  // the base-stage pipeline: assemble a section, threshold one field value
  auto algorithm = [](const SymbolicMap& F) {
    const SpectralGrid grid = spectral_grid(2, 1.5);
    const ResidualField field = residual_field(F, 2, 2, 2, grid);
    const SpectralSet g = gamma_set(field, 0.6, 2);
    json out = json::array();
    for (const auto& p : g.points()) out.push_back(json::array({p.real(), p.imag()}));
    return out.dump();
  };

  // identical maps trivially agree
  const ConsistencyReport same = consistency_check(algorithm, identity_map(), identity_map());
  CHECK(same.applicable);
  CHECK(same.pass);

  // tree maps truncated at matching depth: queries only reach shallow blocks
  const FiniteTree full6 = FiniteTree::full(6);
  std::vector<std::vector<Word>> pruned_levels;
  for (int m = 0; m <= 6; ++m) pruned_levels.push_back(full6.level(m));
  pruned_levels[6].resize(pruned_levels[6].size() / 2);  // differ only at depth 6
  const FiniteTree pruned(6, pruned_levels);
  const ConsistencyReport trees = consistency_check(
      algorithm, build_tree_map(full6, TreeMapVersion::odometer),
      build_tree_map(pruned, TreeMapVersion::odometer));
  CHECK(trees.applicable);
  CHECK(trees.pass);

  // maps differing at a queried node: the harness reports the witness
  const ConsistencyReport diff = consistency_check(algorithm, identity_map(), translation_map(0));
  CHECK(!diff.applicable);
  CHECK(!diff.disagreeing_queries.empty());
}
