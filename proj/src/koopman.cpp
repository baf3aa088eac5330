#include "sci/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sci {

std::vector<std::int64_t> FiniteSection::induced_cylinder_map() const {
  if (!is_permutation)
    throw std::domain_error("FiniteSection: induced map requested on a non-permutation section");
  std::vector<std::int64_t> perm(static_cast<std::size_t>(dict_size()));
  const std::int64_t per = node_count() / dict_size();
  for (std::int64_t c = 0; c < dict_size(); ++c)
    perm[static_cast<std::size_t>(c)] = action[static_cast<std::size_t>(c * per)];
  return perm;
}

FiniteSection assemble_section(const SymbolicMap& F, int n2, int n1) {
  if (n2 < 0 || n1 < n2) throw std::invalid_argument("assemble_section: need 0 <= n2 <= n1");
  const int required = F.info_depth(n2);
  if (n1 < required)
    throw std::invalid_argument("assemble_section: resolution error, need n1 >= " +
                                std::to_string(required) + " for dict depth " +
                                std::to_string(n2));
  const QuadratureScheme scheme = quadrature(n1);
  FiniteSection sec;
  sec.dict_depth = n2;
  sec.quad_depth = n1;
  sec.action.resize(static_cast<std::size_t>(scheme.node_count()));
  sec.query_log.reserve(static_cast<std::size_t>(scheme.node_count()));
  for (std::int64_t P = 0; P < scheme.node_count(); ++P) {
    const CantorPoint x = scheme.node_point(P);
    sec.query_log.push_back(x.to_string());
    sec.action[static_cast<std::size_t>(P)] =
        static_cast<std::int64_t>(F(x).first_bits(n2).lex_rank());
  }
  // Permutation test on the induced depth-n2 cylinder map: constant per
  // cylinder and bijective.
  const std::int64_t per = sec.node_count() / sec.dict_size();
  bool consistent = true;
  std::vector<bool> hit(static_cast<std::size_t>(sec.dict_size()), false);
  for (std::int64_t c = 0; c < sec.dict_size() && consistent; ++c) {
    const std::int64_t img = sec.action[static_cast<std::size_t>(c * per)];
    for (std::int64_t o = 1; o < per && consistent; ++o)
      if (sec.action[static_cast<std::size_t>(c * per + o)] != img) consistent = false;
    if (consistent) {
      if (hit[static_cast<std::size_t>(img)]) consistent = false;
      else hit[static_cast<std::size_t>(img)] = true;
    }
  }
  sec.is_permutation = consistent;
  if (sec.is_permutation) {
    const auto perm = sec.induced_cylinder_map();
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t s = 0; s < perm.size(); ++s) {
      if (seen[s]) continue;
      std::int64_t len = 0;
      std::size_t c = s;
      while (!seen[c]) { seen[c] = true; c = static_cast<std::size_t>(perm[c]); ++len; }
      sec.cycle_lengths.push_back(len);
    }
    std::sort(sec.cycle_lengths.begin(), sec.cycle_lengths.end());
    sec.cycle_lengths.erase(std::unique(sec.cycle_lengths.begin(), sec.cycle_lengths.end()),
                            sec.cycle_lengths.end());
  }
  return sec;
}

std::vector<std::complex<double>> residual_values(const FiniteSection& sec,
                                                  const std::vector<std::complex<double>>& g,
                                                  std::complex<double> z) {
  if (static_cast<std::int64_t>(g.size()) != sec.dict_size())
    throw std::invalid_argument("residual_values: coefficient count != dictionary size");
  std::vector<std::complex<double>> out(static_cast<std::size_t>(sec.node_count()));
  for (std::int64_t P = 0; P < sec.node_count(); ++P)
    out[static_cast<std::size_t>(P)] =
        g[static_cast<std::size_t>(sec.action[static_cast<std::size_t>(P)])] -
        z * g[static_cast<std::size_t>(sec.own_cylinder(P))];
  return out;
}

double smallest_singular_value(std::vector<std::vector<std::complex<double>>> cols) {
  const std::size_t n = cols.size();
  if (n == 0) throw std::invalid_argument("smallest_singular_value: empty matrix");
  const std::size_t m = cols[0].size();
  for (const auto& c : cols)
    if (c.size() != m) throw std::invalid_argument("smallest_singular_value: ragged columns");
  // One-sided Jacobi: orthogonalize column pairs until all inner products are
  // negligible; singular values are the final column norms. Working on the
  // columns directly (never forming A^H A) keeps tiny singular values accurate.
  const double tol = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        std::complex<double> gamma(0.0, 0.0);
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          gamma += std::conj(cols[p][i]) * cols[q][i];
          a += std::norm(cols[p][i]);
          b += std::norm(cols[q][i]);
        }
        const double g = std::abs(gamma);
        if (g <= tol * std::sqrt(a * b) || g == 0.0) continue;
        rotated = true;
        const std::complex<double> phase = gamma / g;
        const double zeta = (b - a) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const std::complex<double> u = cols[p][i];
          const std::complex<double> v = cols[q][i] / phase;
          cols[p][i] = c * u - s * v;
          cols[q][i] = s * u + c * v;
        }
      }
    }
    if (!rotated) break;
  }
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& col : cols) {
    double nrm = 0.0;
    for (const auto& v : col) nrm += std::norm(v);
    smin = std::min(smin, std::sqrt(nrm));
  }
  return smin;
}

double cycle_lower_norm(std::int64_t L, std::complex<double> z, int p) {
  if (L < 1) throw std::invalid_argument("cycle_lower_norm: L >= 1 required");
  if (p == 2) {
    // min_j |omega_L^j - z|: the nearest root in chord distance is the nearest
    // in angle, so only the two angular neighbors need checking.
    const double theta = std::arg(z);
    const double scaled = theta * static_cast<double>(L) / (2.0 * std::numbers::pi);
    double best = std::numeric_limits<double>::infinity();
    for (double cand : {std::floor(scaled), std::floor(scaled) + 1.0, std::round(scaled)}) {
      const double phi = 2.0 * std::numbers::pi * cand / static_cast<double>(L);
      best = std::min(best, std::abs(std::complex<double>(std::cos(phi), std::sin(phi)) - z));
    }
    return best;
  }
  if (p == 1 || p == 0) {
    // |1 - z^L| / sum_{i<L} |z|^i, from the circulant inverse's row/column sums.
    const double az = std::abs(z);
    if (az == 0.0) return 1.0;
    const double logaz = std::log(az);
    if (static_cast<double>(L) * std::abs(logaz) > 500.0) {
      // asymptotic regime: z^L over/underflows; the ratio tends to ||z| - 1|
      return std::abs(az - 1.0);
    }
    const std::complex<double> zL = std::pow(z, static_cast<double>(L));
    double denom;
    if (std::abs(az - 1.0) < 1e-14) denom = static_cast<double>(L);
    else denom = (std::pow(az, static_cast<double>(L)) - 1.0) / (az - 1.0);
    return std::abs(1.0 - zL) / denom;
  }
  throw std::invalid_argument("cycle_lower_norm: p must be 1, 2 or 0 (=infinity)");
}

namespace {

double rs_norm_of_dict_vector(const FiniteSection& sec, const std::vector<std::complex<double>>& g,
                              int p) {
  // RS norm of the dictionary function sampled at the quadrature nodes. All
  // nodes of one cylinder share the value, so weights aggregate to 2^-n2.
  const double w = std::ldexp(1.0, -sec.dict_depth);
  switch (p) {
    case 1: {
      double s = 0.0;
      for (const auto& v : g) s += w * std::abs(v);
      return s;
    }
    case 2: {
      double s = 0.0;
      for (const auto& v : g) s += w * std::norm(v);
      return std::sqrt(s);
    }
    case 0: {
      double s = 0.0;
      for (const auto& v : g) s = std::max(s, std::abs(v));
      return s;
    }
    default:
      throw std::invalid_argument("lower_norm: p must be 1, 2 or 0 (=infinity)");
  }
}

double rs_norm_of_node_values(const FiniteSection& sec,
                              const std::vector<std::complex<double>>& vals, int p) {
  const double w = std::ldexp(1.0, -sec.quad_depth);
  switch (p) {
    case 1: {
      double s = 0.0;
      for (const auto& v : vals) s += w * std::abs(v);
      return s;
    }
    case 2: {
      double s = 0.0;
      for (const auto& v : vals) s += w * std::norm(v);
      return std::sqrt(s);
    }
    default: {
      double s = 0.0;
      for (const auto& v : vals) s = std::max(s, std::abs(v));
      return s;
    }
  }
}

double residual_ratio(const FiniteSection& sec, const std::vector<std::complex<double>>& g,
                      std::complex<double> z, int p) {
  const double den = rs_norm_of_dict_vector(sec, g, p);
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return rs_norm_of_node_values(sec, residual_values(sec, g, z), p) / den;
}

double svd_lower_norm(const FiniteSection& sec, std::complex<double> z) {
  // min ||W^(1/2) A g|| over ||W^(1/2) B g|| = 1 reduces to a plain smallest
  // singular value: the weighted sampling matrix of the dictionary has
  // orthogonal columns of norm 2^(-n2/2).
  const std::size_t nodes = static_cast<std::size_t>(sec.node_count());
  const std::size_t dict = static_cast<std::size_t>(sec.dict_size());
  const double sqw = std::sqrt(std::ldexp(1.0, -sec.quad_depth));
  std::vector<std::vector<std::complex<double>>> cols(
      dict, std::vector<std::complex<double>>(nodes, {0.0, 0.0}));
  for (std::size_t P = 0; P < nodes; ++P) {
    const auto a = static_cast<std::size_t>(sec.action[P]);
    const auto c = static_cast<std::size_t>(sec.own_cylinder(static_cast<std::int64_t>(P)));
    cols[a][P] += sqw;
    cols[c][P] -= z * sqw;
  }
  const double smin = smallest_singular_value(std::move(cols));
  return smin * std::sqrt(static_cast<double>(sec.dict_size()));
}

double heuristic_lower_norm(const FiniteSection& sec, std::complex<double> z, int p) {
  // Multistart projected descent on the residual ratio. The result is an
  // upper bound on the infimum: every iterate is feasible after normalization.
  const std::size_t dict = static_cast<std::size_t>(sec.dict_size());
  std::mt19937 rng(20240811u);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::vector<std::complex<double>>> starts;
  {  // constant vector: exact minimizer at z = 1 for measure-preserving maps
    starts.emplace_back(dict, std::complex<double>(1.0, 0.0));
  }
  if (sec.is_permutation) {  // eigenvector-style start from the largest cycle
    auto perm = sec.induced_cylinder_map();
    std::vector<std::complex<double>> v(dict, {0.0, 0.0});
    std::vector<bool> seen(dict, false);
    std::size_t best_start = 0, best_len = 0;
    for (std::size_t s = 0; s < dict; ++s) {
      if (seen[s]) continue;
      std::size_t len = 0, c = s;
      while (!seen[c]) { seen[c] = true; c = static_cast<std::size_t>(perm[c]); ++len; }
      if (len > best_len) { best_len = len; best_start = s; }
    }
    const double arg = std::arg(z);
    std::size_t c = best_start;
    for (std::size_t j = 0; j < best_len; ++j) {
      v[c] = std::polar(1.0, -arg * static_cast<double>(j));
      c = static_cast<std::size_t>(perm[c]);
    }
    starts.push_back(std::move(v));
  }
  for (int s = 0; s < 6; ++s) {
    std::vector<std::complex<double>> v(dict);
    for (auto& x : v) x = {gauss(rng), gauss(rng)};
    starts.push_back(std::move(v));
  }

  // The ratio is scale-invariant, so descent must stay projected on the unit
  // RS-sphere (otherwise norm inflation counts as improvement forever) and
  // accept only relative gains.
  auto normalize = [&](std::vector<std::complex<double>>& g) {
    const double den = rs_norm_of_dict_vector(sec, g, p);
    if (den > 1e-300)
      for (auto& x : g) x /= den;
  };
  double best = std::numeric_limits<double>::infinity();
  for (auto& g : starts) {
    normalize(g);
    double cur = residual_ratio(sec, g, z, p);
    double step = 0.5;
    int sweeps = 0;
    while (step > 1e-7 && sweeps < 2000 && cur > 1e-13) {
      bool improved = false;
      for (std::size_t j = 0; j < dict; ++j) {
        static const std::complex<double> dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& d : dirs) {
          const std::complex<double> old = g[j];
          g[j] = old + step * d;
          const double trial = residual_ratio(sec, g, z, p);
          if (trial < cur * (1.0 - 1e-12) - 1e-15) { cur = trial; improved = true; }
          else g[j] = old;
        }
      }
      ++sweeps;
      if (improved) normalize(g);
      else step *= 0.5;
    }
    best = std::min(best, cur);
  }
  if (dict <= 8) {
    // low dimensions get a brute-force sphere-sampling cross-check; both
    // routes are upper bounds, so the smaller one is kept
    for (int probe = 0; probe < 20000; ++probe) {
      std::vector<std::complex<double>> g(dict);
      for (auto& x : g) x = {gauss(rng), gauss(rng)};
      best = std::min(best, residual_ratio(sec, g, z, p));
    }
  }
  return best;
}

}  // namespace

LowerNormResult lower_norm(const FiniteSection& sec, std::complex<double> z, int p,
                           LowerNormMethod method) {
  if (method == LowerNormMethod::cycle_exact && !sec.is_permutation)
    throw std::domain_error("lower_norm: cycle_exact needs a permutation section");
  if (method == LowerNormMethod::automatic) {
    if (sec.is_permutation) method = LowerNormMethod::cycle_exact;
    else if (p == 2) method = LowerNormMethod::svd;
    else method = LowerNormMethod::heuristic;
  }
  LowerNormResult res;
  res.method_used = method;
  switch (method) {
    case LowerNormMethod::cycle_exact: {
      if (sec.cycle_lengths.empty())
        throw std::domain_error("lower_norm: cycle_exact needs a permutation section");
      double best = std::numeric_limits<double>::infinity();
      for (const auto L : sec.cycle_lengths) best = std::min(best, cycle_lower_norm(L, z, p));
      res.value = best;
      res.certified = true;
      return res;
    }
    case LowerNormMethod::svd: {
      if (p != 2) throw std::invalid_argument("lower_norm: svd method is p=2 only");
      res.value = svd_lower_norm(sec, z);
      res.certified = true;
      return res;
    }
    case LowerNormMethod::heuristic: {
      res.value = heuristic_lower_norm(sec, z, p);
      res.certified = false;  // upper bound on the infimum
      return res;
    }
    default:
      throw std::logic_error("lower_norm: unresolved method");
  }
}

CycleDecomposition cycle_decomposition(const FiniteSection& sec) {
  if (!sec.is_permutation)
    throw std::domain_error("cycle_decomposition: section is not a permutation");
  const auto perm = sec.induced_cylinder_map();
  CycleDecomposition dec;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t s = 0; s < perm.size(); ++s) {
    if (seen[s]) continue;
    CycleDecomposition::Cycle cyc;
    std::size_t c = s;
    while (!seen[c]) {
      seen[c] = true;
      cyc.members.push_back(Word::from_lex_rank(static_cast<std::uint64_t>(c), sec.dict_depth));
      c = static_cast<std::size_t>(perm[c]);
    }
    cyc.length = static_cast<std::int64_t>(cyc.members.size());
    dec.cycles.push_back(std::move(cyc));
  }
  return dec;
}

SpectralSet exact_cycle_spectrum(const std::vector<std::int64_t>& lengths) {
  if (lengths.empty()) throw std::invalid_argument("exact_cycle_spectrum: empty length list");
  std::vector<std::complex<double>> pts;
  for (const auto L : lengths) {
    const SpectralSet roots = roots_of_unity(L);
    for (const auto& p : roots.points()) pts.push_back(p);
  }
  return SpectralSet(std::move(pts), 0.0);
}

SpectralSet block_union_spectrum(const std::vector<SpectralSet>& parts) {
  if (parts.empty()) throw std::invalid_argument("block_union_spectrum: empty part list");
  std::vector<std::complex<double>> pts;
  double res = 0.0;
  for (const auto& part : parts) {
    res = std::max(res, part.resolution());
    for (const auto& p : part.points()) pts.push_back(p);
  }
  return SpectralSet(std::move(pts), res);
}

SpectralSet predicted_spectrum_tree(const FiniteTree& S, TreeMapVersion version, int r_max) {
  const auto ks = star_counts(S);
  std::vector<std::int64_t> orders;
  orders.push_back(1);  // the fixed all-ones block always contributes {1}
  for (int k : ks) orders.push_back(std::int64_t{1} << std::min(k, r_max));
  std::vector<SpectralSet> parts;
  for (auto L : orders) parts.push_back(roots_of_unity(L));
  if (version == TreeMapVersion::dump)
    parts.push_back(roots_of_unity(2));  // the dump 2-cycles contribute {1,-1}
  return block_union_spectrum(parts);
}

double verify_character_eigenpair(int r, int m, std::int64_t k) {
  if (m <= r) throw std::invalid_argument("verify_character_eigenpair: need m >= r+1");
  const FiniteSection sec = assemble_section(translation_map(r), m, m);
  const std::int64_t dim = std::int64_t{1} << m;
  std::vector<std::complex<double>> chi(static_cast<std::size_t>(dim));
  for (std::int64_t c = 0; c < dim; ++c) {
    // s_m of the cylinder word c (lex rank -> LSB value via the word itself).
    const std::uint64_t s = Word::from_lex_rank(static_cast<std::uint64_t>(c), m).lsb_value();
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) *
                      static_cast<double>(s) / std::ldexp(1.0, m);
    chi[static_cast<std::size_t>(c)] = {std::cos(th), std::sin(th)};
  }
  const double mu_th = 2.0 * std::numbers::pi * static_cast<double>(k) *
                       std::ldexp(1.0, r) / std::ldexp(1.0, m);
  const std::complex<double> mu(std::cos(mu_th), std::sin(mu_th));
  double worst = 0.0;
  for (std::int64_t P = 0; P < sec.node_count(); ++P) {
    const auto a = static_cast<std::size_t>(sec.action[static_cast<std::size_t>(P)]);
    const auto c = static_cast<std::size_t>(sec.own_cylinder(P));
    worst = std::max(worst, std::abs(chi[a] - mu * chi[c]));
  }
  return worst;
}

}  // namespace sci
