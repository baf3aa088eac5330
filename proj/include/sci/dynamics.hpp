#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sci/cantor.hpp"
#include "sci/dyadic.hpp"

namespace sci {

/// Template word over {0,1,*}. Symbol values: 0, 1, and kStar.
class TemplateWord {
 public:
  static constexpr std::uint8_t kStar = 2;

  TemplateWord() = default;
  explicit TemplateWord(std::vector<std::uint8_t> symbols);
  /// Parses e.g. "0*1*" ('*' for the free symbol).
  static TemplateWord from_string(const std::string& s);

  int size() const { return static_cast<int>(symbols_.size()); }
  std::uint8_t at(int i) const { return symbols_[static_cast<std::size_t>(i)]; }
  /// Number of '*' symbols (the star count k(u)).
  int star_count() const;
  /// Positions (0-based) of the '*' symbols, increasing.
  std::vector<int> star_positions() const;
  TemplateWord extended(std::uint8_t symbol) const;
  /// Sigma(u): all words matching u on its non-star coordinates.
  std::vector<Word> completions() const;
  /// Does w match u on the non-star coordinates?
  bool matches(const Word& w) const;

  std::string to_string() const;
  bool operator==(const TemplateWord& o) const { return symbols_ == o.symbols_; }

 private:
  std::vector<std::uint8_t> symbols_;
};

/// Finite downward-closed binary tree: levels S cap 2^m for m = 0..max_depth.
class FiniteTree {
 public:
  FiniteTree(int max_depth, std::vector<std::vector<Word>> levels);
  /// Full binary tree to the given depth.
  static FiniteTree full(int max_depth);
  /// Single branch following the given bits.
  static FiniteTree single_branch(const Word& branch);

  int max_depth() const { return max_depth_; }
  const std::vector<Word>& level(int m) const { return levels_[static_cast<std::size_t>(m)]; }
  bool contains(const Word& w) const;
  bool downward_closed() const;

 private:
  int max_depth_;
  std::vector<std::vector<Word>> levels_;        // sorted lexicographically per level
  std::vector<std::set<std::string>> member_;    // membership index
};

/// Silver tree S_{A,x} truncated at depth M: level m holds every length-m word
/// agreeing with x on the coordinates of A below m. A uses 0-based positions.
FiniteTree silver_tree(const std::set<int>& A, const Word& x_bits, int M);

/// Structured tag describing how a map was built; serializes to JSON.
struct MapDescriptor {
  enum class Kind { identity, translation, single_toggle, tree_dump, tree_odometer, composite };
  Kind kind = Kind::identity;
  int r = 0;          // translation / single_toggle
  int n = 0;          // single_toggle block index
  int tree_depth = 0; // tree maps
  std::string detail; // free-form (e.g. tree summary)

  std::string kind_name() const;
  /// Maps whose construction guarantees 1-Lipschitz regularity.
  bool lipschitz_certified() const;
  /// Maps whose construction guarantees Bernoulli-measure preservation.
  bool measure_preserving_certified() const;
};

/// Finite-information evaluator of a continuous self-map of Cantor space.
/// Contract: the first k output bits depend only on the first info_depth(k)
/// input bits, and evaluation is total on eventually periodic points.
class SymbolicMap {
 public:
  using Evaluator = std::function<CantorPoint(const CantorPoint&)>;
  using InfoDepth = std::function<int(int)>;

  SymbolicMap(Evaluator eval, InfoDepth info_depth, MapDescriptor desc);

  CantorPoint operator()(const CantorPoint& x) const { return eval_(x); }
  int info_depth(int k) const { return info_depth_(k); }
  const MapDescriptor& descriptor() const { return desc_; }

  /// Same map, with every queried input appended to the shared log.
  SymbolicMap with_query_log(std::shared_ptr<std::vector<CantorPoint>> log) const;

 private:
  Evaluator eval_;
  InfoDepth info_depth_;
  MapDescriptor desc_;
};

SymbolicMap identity_map();

/// 2-adic translation by 2^r; measure preserving, 1-Lipschitz, and uniformly
/// within 2^(-(r+1)) of the identity.
SymbolicMap translation_map(int r);

/// Identity outside U_n and at the all-ones point; on U_n conjugates the
/// 2-adic translation by 2^r through the prefix strip 1^(n-1)0 t -> t.
SymbolicMap single_toggle_map(int n, int r);

/// Star-priority nested witness u_m(S) with order * < 0 < 1, or nullopt at bot.
std::optional<TemplateWord> star_priority_witness(const FiniteTree& S, int m);

/// Permutation of the 2^m depth-m words: identity on P, lexicographic pairing
/// (rho1 rho2)(rho3 rho4)... on the complement, last element fixed when the
/// complement size is odd. Squares to the identity.
class DumpInvolution {
 public:
  DumpInvolution(int m, std::vector<Word> P);
  Word apply(const Word& w) const;
  int m() const { return m_; }

 private:
  int m_;
  std::vector<std::uint64_t> pattern_;  // sorted lex ranks of P
};

DumpInvolution dump_involution(int m, std::vector<Word> P);

/// Dyadic odometer on a template: non-star coordinates fixed; on the star
/// coordinates (increasing order) performs LSB-first add-1 with carry chain.
/// Identity when the template has no stars.
Word dyadic_odometer(const TemplateWord& u, const Word& w);

enum class TreeMapVersion { dump, odometer };

/// The tree-coded block dynamics: fixes the all-ones point, on each Y_m with
/// m <= S.max_depth rewrites block bits m+1..2m (dump: cyclic successor on
/// P_m(S) in lex order plus the dump involution off it; odometer: the dyadic
/// odometer on u_m(S) over the whole block), and acts as the identity on Y_m
/// for m beyond the tree depth.
SymbolicMap build_tree_map(const FiniteTree& S, TreeMapVersion version);

/// k_m = star count of u_m(S) for m = 1..max_depth, 0 at bot.
std::vector<int> star_counts(const FiniteTree& S);

struct MeasureReport {
  Dyadic max_deviation;   // max over depth-D cylinders of |w(F^-1 C) - w(C)|
  int depth;
  int enumerated_depth;   // info_depth(depth) actually enumerated
};

/// Exact pushforward check: enumerates all depth-L(D) words, bins exact
/// dyadic masses by image cylinder, and reports the worst deviation.
MeasureReport check_measure_preservation(const SymbolicMap& F, int depth);

struct DensityReport {
  /// ratio[c] = w(F^-1 C)/w(C) for each depth-D cylinder c (lex order), exact.
  std::vector<Dyadic> ratios;
  Dyadic sup_ratio;
  bool all_unit;  // true iff every ratio equals 1 (measure preserving at D)
};

DensityReport estimate_density(const SymbolicMap& F, int depth);

struct ModulusReport {
  /// worst_output_distance[l] = max d(Fx,Fy) over depth-D pairs with first
  /// disagreement at index l+1 (so input distance 2^-(l+1)), l = 0..depth-1.
  std::vector<double> worst_output_distance;
  bool one_lipschitz;  // d(Fx,Fy) <= d(x,y) throughout the probe
  int depth;
};

/// Exhaustive modulus-of-continuity probe over depth-D representatives.
ModulusReport modulus_probe(const SymbolicMap& F, int depth);

/// Exhaustive-check cap: SCI_EXHAUSTIVE_DEPTH env var, default 16.
int exhaustive_depth_cap();

}  // namespace sci
