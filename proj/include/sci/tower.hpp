#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sci/dynamics.hpp"
#include "sci/koopman.hpp"
#include "sci/spectral_set.hpp"

namespace sci {

/// Lattice grid (k+il)/n over the disk |z| <= n, optionally truncated to a
/// smaller radius. Mesh (nearest-neighbor spacing bound) is sqrt(2)/n.
struct SpectralGrid {
  int n = 1;
  double radius = 0.0;  // effective truncation radius actually applied
  std::vector<std::complex<double>> points;
  double mesh() const { return std::sqrt(2.0) / static_cast<double>(n); }
};

/// radius_cap < 0 means the full untruncated grid (radius n).
SpectralGrid spectral_grid(int n, double radius_cap = -1.0);

struct ResidualProvenance {
  int n2 = 0;
  int n1 = 0;
  int p = 2;
  std::string method;
};

struct ResidualField {
  SpectralGrid grid;
  std::vector<double> values;  // h at each grid point, aligned with grid.points
  ResidualProvenance provenance;
};

/// h_{n2,n1} over the grid via koopman::lower_norm on the (n2,n1) section.
ResidualField residual_field(const SymbolicMap& F, int n2, int n1, int p,
                             const SpectralGrid& grid,
                             LowerNormMethod method = LowerNormMethod::automatic,
                             int threads = 1);

struct GammaDiagnostics {
  /// Grid points whose h value fell inside the 1e-12 tie guard band and were
  /// excluded by the strict threshold comparison.
  std::vector<std::complex<double>> guard_band_exclusions;
  bool placeholder_used = false;
};

/// Threshold set Gamma = {z in grid : h(z) < eps - 1/n2 - guard}. When
/// eps - 1/n2 <= 0 returns the placeholder {0}; never returns an empty set
/// (grid points landing inside the 1e-12 guard band are excluded and logged).
SpectralSet gamma_set(const ResidualField& field, double eps, int n2,
                      GammaDiagnostics* diagnostics = nullptr);

struct TowerStage {
  std::vector<int> indices;  // e.g. {n2, n1}
  SpectralSet set;
};

struct TowerTrace {
  std::vector<TowerStage> stages;
  bool inner_stabilized = true;
  bool outer_stabilized = true;
};

struct TowerSchedule {
  std::vector<int> n2_list = {2, 4, 8};
  bool one_index = true;       // collapse the inner limit (1-Lipschitz maps only)
  int inner_budget = 4;        // extra n1 steps past the required resolution
  int stabilization_window = 3;
  double tolerance = 1e-9;
  int dict_cap = -1;           // <0: dictionary depth follows n2 (coupled tower)
  double grid_radius_pad = 1.0;  // grid truncated at ||K|| + eps + pad ...
  double grid_radius_abs = -1.0; // ... unless an absolute cap is given here
  int p = 2;
  LowerNormMethod method = LowerNormMethod::automatic;
  int threads = 1;
};

struct TowerResult {
  SpectralSet set;
  TowerTrace trace;
  double final_mesh = 0.0;
  int final_n2 = 0;
  double grid_radius = 0.0;  // truncation radius actually applied
};

/// Two-index pseudospectrum tower: inner n1 sweep to (empirical) stabilization
/// per n2, then the n2 sweep. Stabilization flags are diagnostics, never
/// proofs. one_index requires a 1-Lipschitz-certified map and collapses the
/// inner limit at n1 = n2 exactly.
TowerResult run_pseudospectrum_tower(const SymbolicMap& F, double eps,
                                     const TowerSchedule& schedule);

struct SigmaApResult {
  SpectralSet set;                      // A_{m_max}
  std::vector<SpectralSet> stages;      // A_m for m = 1..m_max
  std::vector<double> distance_to_last; // d_H(A_m, A_{m_max}) diagnostics
  bool all_stabilized = true;
};

/// Third limit eps_m = 1/m: runs the pseudospectrum tower per m. Each stage
/// filters the base n2 schedule to n2 > m (the threshold eps_m - 1/n2 must be
/// positive to leave the placeholder regime) and falls back to {2m, 2m+max(2,m)}
/// when the filter empties.
SigmaApResult run_sigma_ap_tower(const SymbolicMap& F, const TowerSchedule& schedule, int m_max);

/// One-index inner resolution for modulus-certified maps with the cylinder
/// dictionary: n1(n2) = n2 (integrands are locally constant at depth n2).
/// Certification comes from the map's construction, or from a modulus_probe
/// result supplied by the caller; uncertified maps are refused.
int one_index_schedule(const SymbolicMap& F, int n2, bool probe_certified = false);

struct ConsistencyReport {
  bool pass = false;
  bool applicable = true;  // false when G disagrees with F on a queried point
  std::vector<std::string> disagreeing_queries;
  std::string output_f;
  std::string output_g;
};

/// Replays a base-stage procedure on F with query logging; when G agrees with
/// F at every queried point, asserts the outputs coincide (the general-
/// algorithm consistency axiom). The procedure must serialize its output.
ConsistencyReport consistency_check(
    const std::function<std::string(const SymbolicMap&)>& algorithm, const SymbolicMap& F,
    const SymbolicMap& G);

}  // namespace sci
