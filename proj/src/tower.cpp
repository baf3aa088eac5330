#include "sci/tower.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace sci {

SpectralGrid spectral_grid(int n, double radius_cap) {
  if (n < 1) throw std::invalid_argument("spectral_grid: n >= 1 required");
  SpectralGrid g;
  g.n = n;
  const double radius = radius_cap < 0.0 ? static_cast<double>(n)
                                         : std::min(static_cast<double>(n), radius_cap);
  g.radius = radius;
  const std::int64_t K = static_cast<std::int64_t>(std::floor(radius * n)) ;
  const double r2 = radius * radius;
  for (std::int64_t k = -K; k <= K; ++k) {
    for (std::int64_t l = -K; l <= K; ++l) {
      const double re = static_cast<double>(k) / n;
      const double im = static_cast<double>(l) / n;
      if (re * re + im * im <= r2 * (1.0 + 1e-12)) g.points.emplace_back(re, im);
    }
  }
  return g;
}

ResidualField residual_field(const SymbolicMap& F, int n2, int n1, int p,
                             const SpectralGrid& grid, LowerNormMethod method, int threads) {
  const FiniteSection sec = assemble_section(F, n2, n1);
  ResidualField field;
  field.grid = grid;
  field.values.assign(grid.points.size(), 0.0);
  auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      field.values[i] = lower_norm(sec, grid.points[i], p, method).value;
  };
  const int T = std::max(1, threads);
  if (T == 1 || grid.points.size() < 64) {
    worker(0, grid.points.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (grid.points.size() + T - 1) / T;
    for (int t = 0; t < T; ++t) {
      const std::size_t lo = static_cast<std::size_t>(t) * chunk;
      const std::size_t hi = std::min(grid.points.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  LowerNormResult probe = lower_norm(sec, {0.0, 0.0}, p, method);
  field.provenance = ResidualProvenance{n2, n1, p,
                                        probe.method_used == LowerNormMethod::cycle_exact
                                            ? "cycle_exact"
                                            : (probe.method_used == LowerNormMethod::svd
                                                   ? "svd"
                                                   : "heuristic")};
  return field;
}

SpectralSet gamma_set(const ResidualField& field, double eps, int n2,
                      GammaDiagnostics* diagnostics) {
  const double threshold = eps - 1.0 / static_cast<double>(n2);
  if (threshold <= 0.0) {
    if (diagnostics) diagnostics->placeholder_used = true;
    return SpectralSet({{0.0, 0.0}}, field.grid.mesh());
  }
  constexpr double kGuard = 1e-12;
  std::vector<std::complex<double>> pts;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    if (field.values[i] < threshold - kGuard) {
      pts.push_back(field.grid.points[i]);
    } else if (diagnostics && field.values[i] < threshold + kGuard) {
      diagnostics->guard_band_exclusions.push_back(field.grid.points[i]);
    }
  }
  if (pts.empty()) {
    if (diagnostics) diagnostics->placeholder_used = true;
    return SpectralSet({{0.0, 0.0}}, field.grid.mesh());
  }
  return SpectralSet(std::move(pts), field.grid.mesh());
}

namespace {

double operator_norm_estimate(const SymbolicMap& F) {
  if (F.descriptor().measure_preserving_certified()) return 1.0;
  // Fall back to the density sup at a small exhaustive depth.
  const int d = std::min(6, exhaustive_depth_cap());
  return estimate_density(F, d).sup_ratio.to_double();
}

}  // namespace

TowerResult run_pseudospectrum_tower(const SymbolicMap& F, double eps,
                                     const TowerSchedule& schedule) {
  if (schedule.n2_list.empty())
    throw std::invalid_argument("run_pseudospectrum_tower: empty schedule");
  if (schedule.one_index && !F.descriptor().lipschitz_certified())
    throw std::invalid_argument(
        "run_pseudospectrum_tower: one_index requires a 1-Lipschitz-certified map");
  const double radius = schedule.grid_radius_abs > 0.0
                            ? schedule.grid_radius_abs
                            : operator_norm_estimate(F) + eps + schedule.grid_radius_pad;

  TowerResult result{SpectralSet({{0.0, 0.0}}, 0.0), {}, 0.0, 0, radius};
  std::optional<SpectralSet> prev_outer;
  double prev_envelope = 0.0;
  int outer_stable_run = 0;
  // An honest strict tolerance between different grid resolutions is
  // unreachable (consecutive outputs differ by ~mesh even after convergence),
  // so the outer gap is judged against the a-priori convergence envelope
  // 2*mesh + 2/n2 of each stage plus the configured tolerance. Diagnostics,
  // never proofs.
  const int outer_window =
      std::max(1, std::min<int>(schedule.stabilization_window,
                                static_cast<int>(schedule.n2_list.size())));

  for (std::size_t oi = 0; oi < schedule.n2_list.size(); ++oi) {
    const int n2 = schedule.n2_list[oi];
    const int dict = schedule.dict_cap > 0 ? std::min(schedule.dict_cap, n2) : n2;
    const SpectralGrid grid = spectral_grid(n2, radius);

    SpectralSet inner_set({{0.0, 0.0}}, 0.0);
    if (schedule.one_index) {
      const int n1 = one_index_schedule(F, dict);
      const ResidualField field =
          residual_field(F, dict, n1, schedule.p, grid, schedule.method, schedule.threads);
      inner_set = gamma_set(field, eps, n2);
      result.trace.stages.push_back(TowerStage{{n2, n1}, inner_set});
    } else {
      // Inner n1 sweep on a fixed grid: strict-tolerance stabilization.
      const int start = std::max(dict, F.info_depth(dict));
      std::optional<SpectralSet> prev;
      int stable_run = 0;
      bool stabilized = false;
      const int inner_window =
          std::max(1, std::min(schedule.stabilization_window, schedule.inner_budget + 1));
      for (int n1 = start; n1 <= start + schedule.inner_budget; ++n1) {
        const ResidualField field =
            residual_field(F, dict, n1, schedule.p, grid, schedule.method, schedule.threads);
        SpectralSet cur = gamma_set(field, eps, n2);
        result.trace.stages.push_back(TowerStage{{n2, n1}, cur});
        if (prev && hausdorff_distance(cur, *prev) <= schedule.tolerance) ++stable_run;
        else stable_run = 0;
        prev = std::move(cur);
        if (stable_run + 1 >= inner_window) { stabilized = true; break; }
      }
      if (!stabilized) result.trace.inner_stabilized = false;
      inner_set = *prev;
    }

    const double envelope = 2.0 * (grid.mesh() + 1.0 / n2);
    if (prev_outer && hausdorff_distance(inner_set, *prev_outer) <=
                          schedule.tolerance + envelope + prev_envelope)
      ++outer_stable_run;
    else
      outer_stable_run = 0;
    prev_outer = inner_set;
    prev_envelope = envelope;
    result.set = inner_set;
    result.final_mesh = grid.mesh();
    result.final_n2 = n2;
  }
  result.trace.outer_stabilized = (outer_stable_run + 1 >= outer_window);
  return result;
}

SigmaApResult run_sigma_ap_tower(const SymbolicMap& F, const TowerSchedule& schedule,
                                 int m_max) {
  if (m_max < 1) throw std::invalid_argument("run_sigma_ap_tower: m_max >= 1 required");
  SigmaApResult res{SpectralSet({{0.0, 0.0}}, 0.0), {}, {}, true};
  for (int m = 1; m <= m_max; ++m) {
    TowerSchedule stage = schedule;
    stage.n2_list.clear();
    for (int n2 : schedule.n2_list)
      if (n2 > m) stage.n2_list.push_back(n2);
    if (stage.n2_list.empty()) stage.n2_list = {2 * m, 2 * m + std::max(2, m)};
    const TowerResult tower = run_pseudospectrum_tower(F, 1.0 / static_cast<double>(m), stage);
    if (!tower.trace.outer_stabilized) res.all_stabilized = false;
    res.stages.push_back(tower.set);
  }
  res.set = res.stages.back();
  for (const auto& s : res.stages) res.distance_to_last.push_back(hausdorff_distance(s, res.set));
  return res;
}

int one_index_schedule(const SymbolicMap& F, int n2, bool probe_certified) {
  if (!F.descriptor().lipschitz_certified() && !probe_certified)
    throw std::invalid_argument(
        "one_index_schedule: map is not modulus-certified; use the two-index tower");
  return n2;  // locally constant integrands: the RS norm is exact at depth n2
}

ConsistencyReport consistency_check(
    const std::function<std::string(const SymbolicMap&)>& algorithm, const SymbolicMap& F,
    const SymbolicMap& G) {
  ConsistencyReport rep;
  auto log = std::make_shared<std::vector<CantorPoint>>();
  rep.output_f = algorithm(F.with_query_log(log));
  for (const auto& q : *log) {
    if (!(F(q) == G(q))) rep.disagreeing_queries.push_back(q.to_string());
  }
  if (!rep.disagreeing_queries.empty()) {
    // The axiom has nothing to say: G is distinguishable from F on the log.
    rep.applicable = false;
    rep.pass = true;
    return rep;
  }
  rep.output_g = algorithm(G);
  rep.pass = (rep.output_f == rep.output_g);
  return rep;
}

}  // namespace sci
