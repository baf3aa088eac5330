#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sci/cantor.hpp"
#include "sci/dynamics.hpp"
#include "sci/spectral_set.hpp"

namespace sci {

/// Finite section of K_F in the depth-n2 cylinder indicator dictionary,
/// sampled on the depth-n1 quadrature. action[P] is the lex index of the
/// depth-n2 cylinder containing F(x_P).
struct FiniteSection {
  int dict_depth = 0;  // n2
  int quad_depth = 0;  // n1 >= n2
  std::vector<std::int64_t> action;       // size 2^n1, values in [0, 2^n2)
  bool is_permutation = false;            // induced depth-n2 cylinder map is a bijection
  std::vector<std::int64_t> cycle_lengths;  // unique induced-cycle lengths (permutations only)
  std::vector<std::string> query_log;     // queried node points, serialized

  std::int64_t dict_size() const { return std::int64_t{1} << dict_depth; }
  std::int64_t node_count() const { return std::int64_t{1} << quad_depth; }
  Dyadic node_weight() const { return Dyadic::pow2(-quad_depth); }
  /// Lex index of the node's own depth-n2 cylinder.
  std::int64_t own_cylinder(std::int64_t node) const {
    return node >> (quad_depth - dict_depth);
  }
  /// Induced permutation on depth-n2 cylinders; only valid when is_permutation.
  std::vector<std::int64_t> induced_cylinder_map() const;
};

/// Records F(x_P) cylinders for every quadrature node. Throws a resolution
/// error when n1 cannot determine the first n2 output bits.
FiniteSection assemble_section(const SymbolicMap& F, int n2, int n1);

/// Node samples of (K_F - zI)g for a coefficient vector over depth-n2 cylinders.
std::vector<std::complex<double>> residual_values(const FiniteSection& sec,
                                                  const std::vector<std::complex<double>>& g,
                                                  std::complex<double> z);

enum class LowerNormMethod { automatic, svd, cycle_exact, heuristic };

struct LowerNormResult {
  double value = 0.0;
  LowerNormMethod method_used = LowerNormMethod::automatic;
  bool certified = true;  // false = heuristic upper bound on the infimum
};

/// sigma_inf of the section residual in the Riemann-sum p-norm over the unit
/// RS-sphere of V_{n2}. p=2 svd is exact to machine precision; cycle_exact
/// needs a permutation section (exact closed forms for p in {1,2,inf}); the
/// p in {1,inf} fallback is a certified upper bound from multistart descent.
LowerNormResult lower_norm(const FiniteSection& sec, std::complex<double> z, int p,
                           LowerNormMethod method = LowerNormMethod::automatic);

struct CycleDecomposition {
  struct Cycle {
    std::int64_t length;
    std::vector<Word> members;  // depth-n2 cylinder words
  };
  std::vector<Cycle> cycles;
};

/// Disjoint cycles of the induced cylinder permutation; throws on
/// non-permutation sections.
CycleDecomposition cycle_decomposition(const FiniteSection& sec);

/// Union over L of the L-th roots of unity, deduplicated, resolution 0.
SpectralSet exact_cycle_spectrum(const std::vector<std::int64_t>& lengths);

/// Union of point clouds; resolution = max of the parts' resolutions.
SpectralSet block_union_spectrum(const std::vector<SpectralSet>& parts);

/// Closed-form approximate point spectrum prediction for a tree map:
/// dump version {1,-1} union of U_{2^k_m}; odometer version union of U_{2^k_m};
/// orders capped at 2^r_max.
SpectralSet predicted_spectrum_tree(const FiniteTree& S, TreeMapVersion version, int r_max);

/// Builds the character chi_{m,k} on the depth-m section of tau_r and returns
/// the worst node deviation from the exact eigenrelation with eigenvalue
/// exp(2*pi*i*k*2^r/2^m).
double verify_character_eigenpair(int r, int m, std::int64_t k);

/// Smallest singular value of a dense complex matrix (rows >= cols) via
/// one-sided Jacobi; high relative accuracy for tiny singular values.
double smallest_singular_value(std::vector<std::vector<std::complex<double>>> columns);

/// Exact lower norm of (shift - zI) on a single L-cycle in the p-norm:
/// p=2: min_j |omega_L^j - z|;  p in {1,inf}: |1 - z^L| / sum_{i<L} |z|^i.
double cycle_lower_norm(std::int64_t L, std::complex<double> z, int p);

}  // namespace sci
