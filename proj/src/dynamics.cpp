#include "sci/dynamics.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace sci {

TemplateWord::TemplateWord(std::vector<std::uint8_t> symbols) : symbols_(std::move(symbols)) {
  for (auto s : symbols_)
    if (s > kStar) throw std::invalid_argument("TemplateWord: symbols are 0, 1 or *");
}

TemplateWord TemplateWord::from_string(const std::string& s) {
  std::vector<std::uint8_t> syms;
  syms.reserve(s.size());
  for (char c : s) {
    if (c == '0') syms.push_back(0);
    else if (c == '1') syms.push_back(1);
    else if (c == '*') syms.push_back(kStar);
    else throw std::invalid_argument("TemplateWord: expected '0', '1' or '*'");
  }
  return TemplateWord(std::move(syms));
}

int TemplateWord::star_count() const {
  int k = 0;
  for (auto s : symbols_)
    if (s == kStar) ++k;
  return k;
}

std::vector<int> TemplateWord::star_positions() const {
  std::vector<int> pos;
  for (int i = 0; i < size(); ++i)
    if (symbols_[static_cast<std::size_t>(i)] == kStar) pos.push_back(i);
  return pos;
}

TemplateWord TemplateWord::extended(std::uint8_t symbol) const {
  auto syms = symbols_;
  syms.push_back(symbol);
  return TemplateWord(std::move(syms));
}

bool TemplateWord::matches(const Word& w) const {
  if (w.size() != size()) return false;
  for (int i = 0; i < size(); ++i) {
    const auto s = symbols_[static_cast<std::size_t>(i)];
    if (s != kStar && s != w.at(i)) return false;
  }
  return true;
}

std::vector<Word> TemplateWord::completions() const {
  const auto stars = star_positions();
  const int k = static_cast<int>(stars.size());
  if (k > 30) throw std::overflow_error("TemplateWord::completions: too many stars");
  std::vector<Word> out;
  out.reserve(static_cast<std::size_t>(1) << k);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(size()));
    for (int i = 0; i < size(); ++i) {
      const auto s = symbols_[static_cast<std::size_t>(i)];
      bits[static_cast<std::size_t>(i)] = (s == kStar) ? 0 : s;
    }
    for (int j = 0; j < k; ++j)
      bits[static_cast<std::size_t>(stars[static_cast<std::size_t>(j)])] =
          static_cast<std::uint8_t>((mask >> j) & 1u);
    out.emplace_back(std::move(bits));
  }
  return out;
}

std::string TemplateWord::to_string() const {
  std::string s;
  for (auto c : symbols_) s.push_back(c == kStar ? '*' : (c ? '1' : '0'));
  return s;
}

FiniteTree::FiniteTree(int max_depth, std::vector<std::vector<Word>> levels)
    : max_depth_(max_depth), levels_(std::move(levels)) {
  if (max_depth < 0) throw std::invalid_argument("FiniteTree: negative depth");
  if (static_cast<int>(levels_.size()) != max_depth + 1)
    throw std::invalid_argument("FiniteTree: need one level per depth 0..max_depth");
  for (int m = 0; m <= max_depth_; ++m) {
    auto& lv = levels_[static_cast<std::size_t>(m)];
    for (const auto& w : lv)
      if (w.size() != m) throw std::invalid_argument("FiniteTree: word length != level");
    std::sort(lv.begin(), lv.end());
    lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  }
  if (levels_[0].empty()) throw std::invalid_argument("FiniteTree: root must be present");
  member_.resize(levels_.size());
  for (std::size_t m = 0; m < levels_.size(); ++m)
    for (const auto& w : levels_[m]) member_[m].insert(w.to_string());
}

FiniteTree FiniteTree::full(int max_depth) {
  std::vector<std::vector<Word>> levels(static_cast<std::size_t>(max_depth) + 1);
  for (int m = 0; m <= max_depth; ++m)
    for (std::uint64_t r = 0; r < (std::uint64_t{1} << m); ++r)
      levels[static_cast<std::size_t>(m)].push_back(Word::from_lex_rank(r, m));
  return FiniteTree(max_depth, std::move(levels));
}

FiniteTree FiniteTree::single_branch(const Word& branch) {
  const int M = branch.size();
  std::vector<std::vector<Word>> levels(static_cast<std::size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) levels[static_cast<std::size_t>(m)].push_back(branch.prefix(m));
  return FiniteTree(M, std::move(levels));
}

bool FiniteTree::contains(const Word& w) const {
  if (w.size() > max_depth_) return false;
  return member_[static_cast<std::size_t>(w.size())].count(w.to_string()) > 0;
}

bool FiniteTree::downward_closed() const {
  for (int m = 1; m <= max_depth_; ++m)
    for (const auto& w : levels_[static_cast<std::size_t>(m)])
      if (!contains(w.prefix(m - 1))) return false;
  return true;
}

FiniteTree silver_tree(const std::set<int>& A, const Word& x_bits, int M) {
  if (x_bits.size() < M) throw std::invalid_argument("silver_tree: |x_bits| >= M required");
  for (int a : A)
    if (a < 0 || a >= M) throw std::invalid_argument("silver_tree: A must lie in [0, M)");
  std::vector<std::vector<Word>> levels(static_cast<std::size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) {
    std::vector<int> free_pos;
    for (int i = 0; i < m; ++i)
      if (!A.count(i)) free_pos.push_back(i);
    const int k = static_cast<int>(free_pos.size());
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      std::vector<std::uint8_t> bits(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i)
        bits[static_cast<std::size_t>(i)] = A.count(i) ? x_bits.at(i) : 0;
      for (int j = 0; j < k; ++j)
        bits[static_cast<std::size_t>(free_pos[static_cast<std::size_t>(j)])] =
            static_cast<std::uint8_t>((mask >> j) & 1u);
      levels[static_cast<std::size_t>(m)].emplace_back(std::move(bits));
    }
  }
  return FiniteTree(M, std::move(levels));
}

std::string MapDescriptor::kind_name() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::translation: return "translation";
    case Kind::single_toggle: return "single_toggle";
    case Kind::tree_dump: return "tree_dump";
    case Kind::tree_odometer: return "tree_odometer";
    case Kind::composite: return "composite";
  }
  return "?";
}

bool MapDescriptor::lipschitz_certified() const {
  switch (kind) {
    case Kind::identity:
    case Kind::translation:
    case Kind::single_toggle:
    case Kind::tree_odometer:
      return true;
    default:
      return false;
  }
}

bool MapDescriptor::measure_preserving_certified() const {
  switch (kind) {
    case Kind::identity:
    case Kind::translation:
    case Kind::single_toggle:
    case Kind::tree_dump:
    case Kind::tree_odometer:
      return true;
    default:
      return false;
  }
}

SymbolicMap::SymbolicMap(Evaluator eval, InfoDepth info_depth, MapDescriptor desc)
    : eval_(std::move(eval)), info_depth_(std::move(info_depth)), desc_(desc) {}

SymbolicMap SymbolicMap::with_query_log(std::shared_ptr<std::vector<CantorPoint>> log) const {
  auto inner = eval_;
  return SymbolicMap(
      [inner, log](const CantorPoint& x) {
        log->push_back(x);
        return inner(x);
      },
      info_depth_, desc_);
}

SymbolicMap identity_map() {
  MapDescriptor d;
  d.kind = MapDescriptor::Kind::identity;
  return SymbolicMap([](const CantorPoint& x) { return x; }, [](int k) { return k; }, d);
}

SymbolicMap translation_map(int r) {
  if (r < 0) throw std::invalid_argument("translation_map: r >= 0 required");
  const std::uint64_t step = std::uint64_t{1} << r;
  MapDescriptor d;
  d.kind = MapDescriptor::Kind::translation;
  d.r = r;
  return SymbolicMap([step](const CantorPoint& x) { return add_2adic(x, step); },
                     [](int k) { return k; }, d);
}

SymbolicMap single_toggle_map(int n, int r) {
  if (n < 1 || r < 1) throw std::invalid_argument("single_toggle_map: n, r >= 1 required");
  const std::uint64_t step = std::uint64_t{1} << r;
  MapDescriptor d;
  d.kind = MapDescriptor::Kind::single_toggle;
  d.n = n;
  d.r = r;
  return SymbolicMap(
      [n, step](const CantorPoint& x) {
        for (int j = 1; j < n; ++j)
          if (x.bit_at(j) == 0) return x;  // not in U_n (first zero too early)
        if (x.bit_at(n) == 1) return x;    // not in U_n (covers the all-ones point)
        const CantorPoint tail = x.drop(n);
        return add_2adic(tail, step).prepend(clopen_block(n).word);
      },
      [](int k) { return k; }, d);
}

std::optional<TemplateWord> star_priority_witness(const FiniteTree& S, int m) {
  if (m < 0 || m > S.max_depth())
    throw std::invalid_argument("star_priority_witness: m out of range");
  TemplateWord u;  // u_0 = empty word
  for (int level = 1; level <= m; ++level) {
    bool found = false;
    for (std::uint8_t sym : {TemplateWord::kStar, std::uint8_t{0}, std::uint8_t{1}}) {
      TemplateWord cand = u.extended(sym);
      bool inside = true;
      for (const auto& w : cand.completions())
        if (!S.contains(w)) { inside = false; break; }
      if (inside) {
        u = std::move(cand);
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  return u;
}

DumpInvolution::DumpInvolution(int m, std::vector<Word> P) : m_(m) {
  pattern_.reserve(P.size());
  for (const auto& w : P) {
    if (w.size() != m) throw std::invalid_argument("DumpInvolution: |P words| != m");
    pattern_.push_back(w.lex_rank());
  }
  std::sort(pattern_.begin(), pattern_.end());
  pattern_.erase(std::unique(pattern_.begin(), pattern_.end()), pattern_.end());
}

Word DumpInvolution::apply(const Word& w) const {
  if (w.size() != m_) throw std::invalid_argument("DumpInvolution: word length != m");
  const std::uint64_t rank = w.lex_rank();
  if (std::binary_search(pattern_.begin(), pattern_.end(), rank)) return w;
  const std::uint64_t total = std::uint64_t{1} << m_;
  const std::uint64_t ell = total - pattern_.size();
  // 1-based position of w in the lexicographically listed complement.
  const std::uint64_t below =
      static_cast<std::uint64_t>(std::lower_bound(pattern_.begin(), pattern_.end(), rank) -
                                 pattern_.begin());
  const std::uint64_t j = rank - below + 1;
  std::uint64_t partner_j;
  if (j == ell && (ell % 2) == 1) partner_j = j;  // odd tail element stays fixed
  else partner_j = (j % 2 == 1) ? j + 1 : j - 1;
  // Invert: the partner is the complement element of 1-based index partner_j.
  std::uint64_t lo = 0, hi = total - 1, target = partner_j - 1;  // 0-based complement rank
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    const std::uint64_t inP = static_cast<std::uint64_t>(
        std::upper_bound(pattern_.begin(), pattern_.end(), mid) - pattern_.begin());
    if (mid + 1 - inP >= target + 1) hi = mid;
    else lo = mid + 1;
  }
  return Word::from_lex_rank(lo, m_);
}

DumpInvolution dump_involution(int m, std::vector<Word> P) {
  return DumpInvolution(m, std::move(P));
}

Word dyadic_odometer(const TemplateWord& u, const Word& w) {
  if (u.size() != w.size()) throw std::invalid_argument("dyadic_odometer: |u| != |w|");
  std::vector<std::uint8_t> out(w.bits());
  std::uint8_t carry = 1;
  for (int i : u.star_positions()) {
    const std::uint8_t b = w.at(i);
    out[static_cast<std::size_t>(i)] = b ^ carry;
    carry = b & carry;
  }
  return Word(std::move(out));
}

namespace {

/// Per-level block permutation tables for a tree map, built once.
struct TreeBlocks {
  struct Level {
    std::optional<TemplateWord> witness;
    std::vector<std::uint64_t> pattern_lex;  // sorted lex ranks of P_m(S)
  };
  std::vector<Level> levels;  // index m-1 for m = 1..max_depth
  TreeMapVersion version = TreeMapVersion::odometer;
  int max_depth = 0;

  Word rewrite(int m, const Word& tau) const {
    const Level& lv = levels[static_cast<std::size_t>(m - 1)];
    if (version == TreeMapVersion::odometer) {
      if (!lv.witness) return tau;  // bot: star count 0, block untouched
      return dyadic_odometer(*lv.witness, tau);
    }
    // Dump version: cyclic successor on P (lex order), dump involution off it.
    const auto& P = lv.pattern_lex;
    const std::uint64_t rank = tau.lex_rank();
    auto it = std::lower_bound(P.begin(), P.end(), rank);
    if (it != P.end() && *it == rank) {
      auto next = it + 1;
      return Word::from_lex_rank(next == P.end() ? P.front() : *next, m);
    }
    std::vector<Word> pwords;
    pwords.reserve(P.size());
    for (auto pr : P) pwords.push_back(Word::from_lex_rank(pr, m));
    return DumpInvolution(m, pwords).apply(tau);
  }
};

}  // namespace

SymbolicMap build_tree_map(const FiniteTree& S, TreeMapVersion version) {
  if (!S.downward_closed())
    throw std::invalid_argument("build_tree_map: tree is not downward closed");
  auto blocks = std::make_shared<TreeBlocks>();
  blocks->version = version;
  blocks->max_depth = S.max_depth();
  for (int m = 1; m <= S.max_depth(); ++m) {
    TreeBlocks::Level lv;
    lv.witness = star_priority_witness(S, m);
    if (lv.witness) {
      for (const auto& w : lv.witness->completions()) lv.pattern_lex.push_back(w.lex_rank());
      std::sort(lv.pattern_lex.begin(), lv.pattern_lex.end());
    }
    blocks->levels.push_back(std::move(lv));
  }

  MapDescriptor d;
  d.kind = version == TreeMapVersion::dump ? MapDescriptor::Kind::tree_dump
                                           : MapDescriptor::Kind::tree_odometer;
  d.tree_depth = S.max_depth();
  const int M = S.max_depth();

  auto eval = [blocks, M](const CantorPoint& x) {
    // Locate the block Y_m via the first zero bit; the all-ones point and any
    // point whose first zero lies past the tree depth are fixed.
    int m = 0;
    const int scan_cap = std::max(M, x.prefix().size()) + x.period().size();
    for (int j = 1; j <= scan_cap; ++j) {
      if (x.bit_at(j) == 0) { m = j; break; }
    }
    if (m == 0 || m > M) return x;
    const TreeBlocks::Level& lv = blocks->levels[static_cast<std::size_t>(m - 1)];
    if (blocks->version == TreeMapVersion::dump && !lv.witness && lv.pattern_lex.empty()) {
      // bot witness: P empty, whole block under the involution
    }
    Word tau = x.drop(m).first_bits(m);
    Word tau2 = blocks->rewrite(m, tau);
    if (tau2 == tau) return x;
    return x.drop(2 * m).prepend(tau2).prepend(x.first_bits(m));
  };
  auto info = [M, version](int k) {
    if (version == TreeMapVersion::odometer) return k;  // 1-Lipschitz, prefix preserving
    const int mstar = std::min(k - 1, M);
    return std::max(k, 2 * std::max(mstar, 0));
  };
  return SymbolicMap(eval, info, d);
}

std::vector<int> star_counts(const FiniteTree& S) {
  std::vector<int> ks;
  ks.reserve(static_cast<std::size_t>(S.max_depth()));
  for (int m = 1; m <= S.max_depth(); ++m) {
    auto u = star_priority_witness(S, m);
    ks.push_back(u ? u->star_count() : 0);
  }
  return ks;
}

int exhaustive_depth_cap() {
  if (const char* env = std::getenv("SCI_EXHAUSTIVE_DEPTH")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 16;
}

namespace {

/// Exact pushforward masses at the given cylinder depth: enumerates all
/// depth-L words (L = info_depth(depth)) and bins masses by image cylinder.
std::vector<Dyadic> pushforward_masses(const SymbolicMap& F, int depth) {
  const int L = F.info_depth(depth);
  if (depth > exhaustive_depth_cap() || L > exhaustive_depth_cap() + 10)
    throw std::invalid_argument("pushforward: depth exceeds the exhaustive bound");
  const std::int64_t total = std::int64_t{1} << L;
  std::vector<Dyadic> mass(static_cast<std::size_t>(1) << depth, Dyadic::zero());
  const Dyadic cell = Dyadic::pow2(-L);
  for (std::int64_t w = 0; w < total; ++w) {
    const CantorPoint x = CantorPoint::zeros_tail(Word::from_lex_rank(
        static_cast<std::uint64_t>(w), L));
    const Word img = F(x).first_bits(depth);
    auto& m = mass[static_cast<std::size_t>(img.lex_rank())];
    m = m + cell;
  }
  return mass;
}

}  // namespace

MeasureReport check_measure_preservation(const SymbolicMap& F, int depth) {
  const auto mass = pushforward_masses(F, depth);
  const Dyadic target = Dyadic::pow2(-depth);
  Dyadic worst = Dyadic::zero();
  for (const auto& m : mass) {
    const Dyadic dev = (m - target).abs();
    if (worst < dev) worst = dev;
  }
  return MeasureReport{worst, depth, F.info_depth(depth)};
}

DensityReport estimate_density(const SymbolicMap& F, int depth) {
  const auto mass = pushforward_masses(F, depth);
  DensityReport rep;
  rep.ratios.reserve(mass.size());
  const Dyadic scale = Dyadic::pow2(depth);  // 1 / w(C)
  rep.sup_ratio = Dyadic::zero();
  rep.all_unit = true;
  for (const auto& m : mass) {
    const Dyadic ratio = m * scale;
    if (ratio != Dyadic::one()) rep.all_unit = false;
    if (rep.sup_ratio < ratio) rep.sup_ratio = ratio;
    rep.ratios.push_back(ratio);
  }
  return rep;
}

ModulusReport modulus_probe(const SymbolicMap& F, int depth) {
  if (depth > exhaustive_depth_cap())
    throw std::invalid_argument("modulus_probe: depth exceeds the exhaustive bound");
  const std::int64_t total = std::int64_t{1} << depth;
  // Cache the first `depth` output bits per representative, packed MSB-first.
  std::vector<std::uint32_t> out(static_cast<std::size_t>(total));
  for (std::int64_t w = 0; w < total; ++w) {
    const CantorPoint x =
        CantorPoint::zeros_tail(Word::from_lex_rank(static_cast<std::uint64_t>(w), depth));
    out[static_cast<std::size_t>(w)] =
        static_cast<std::uint32_t>(F(x).first_bits(depth).lex_rank());
  }
  ModulusReport rep;
  rep.depth = depth;
  rep.worst_output_distance.assign(static_cast<std::size_t>(depth), 0.0);
  rep.one_lipschitz = true;
  for (std::int64_t a = 0; a < total; ++a) {
    for (std::int64_t b = a + 1; b < total; ++b) {
      const std::uint32_t xin = static_cast<std::uint32_t>(a ^ b);
      // First disagreement of inputs: index of highest set bit (MSB-first pack).
      const int lead_in = depth - (32 - __builtin_clz(xin));  // 0-based level
      const std::uint32_t xout =
          out[static_cast<std::size_t>(a)] ^ out[static_cast<std::size_t>(b)];
      double dout;
      if (xout == 0) {
        dout = std::ldexp(1.0, -(depth + 1));  // agree through depth: d <= 2^-(D+1)
      } else {
        const int lead_out = depth - (32 - __builtin_clz(xout));
        dout = std::ldexp(1.0, -(lead_out + 1));
      }
      const double din = std::ldexp(1.0, -(lead_in + 1));
      auto& cell = rep.worst_output_distance[static_cast<std::size_t>(lead_in)];
      cell = std::max(cell, dout);
      if (dout > din) rep.one_lipschitz = false;
    }
  }
  return rep;
}

}  // namespace sci
