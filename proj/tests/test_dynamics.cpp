#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "sci/dynamics.hpp"

using namespace sci;

namespace {

// Closed-form oracle for the witness of an (untruncated) Silver tree:
// stars exactly off A, the branch bits on A.
TemplateWord silver_witness_oracle(const std::set<int>& A, const Word& x, int m) {
  std::vector<std::uint8_t> syms(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    syms[static_cast<std::size_t>(i)] = A.count(i) ? x.at(i) : TemplateWord::kStar;
  return TemplateWord(std::move(syms));
}

std::set<int> random_coordinate_set(std::mt19937& rng, int M) {
  std::set<int> A;
  std::uniform_int_distribution<int> coin(0, 2);
  for (int i = 0; i < M; ++i)
    if (coin(rng) == 0) A.insert(i);
  return A;
}

Word random_word(std::mt19937& rng, int len) {
  std::uniform_int_distribution<int> bit(0, 1);
  Word w;
  for (int i = 0; i < len; ++i) w.push_back(static_cast<std::uint8_t>(bit(rng)));
  return w;
}

}  // namespace

TEST_CASE("identity and translation basics") {
  const SymbolicMap id = identity_map();
  CHECK(id(CantorPoint::all_ones()) == CantorPoint::all_ones());
  CHECK(id(CantorPoint::from_string("01|10")) == CantorPoint::from_string("01|10"));
  CHECK(id.descriptor().kind == MapDescriptor::Kind::identity);

  const SymbolicMap t0 = translation_map(0);
  CHECK(t0(CantorPoint::all_zeros()) == CantorPoint::from_string("1|0"));

  // sup over depth-12 points of d(F x, x) for r = 4 is <= 2^-5
  const SymbolicMap t4 = translation_map(4);
  Dyadic sup = Dyadic::zero();
  for (std::uint64_t w = 0; w < (1u << 12); ++w) {
    const CantorPoint x = CantorPoint::zeros_tail(Word::from_lex_rank(w, 12));
    const Dyadic d = ultrametric_distance(t4(x), x);
    if (sup < d) sup = d;
  }
  CHECK(sup <= Dyadic::pow2(-5));

  // truncations act as +2^r mod 2^m
  for (int r = 0; r <= 3; ++r) {
    const SymbolicMap tr = translation_map(r);
    for (int m = 1; m <= 12; m += 3) {
      for (std::uint64_t w = 0; w < 32; ++w) {
        const CantorPoint x = CantorPoint::zeros_tail(Word::from_lex_rank(w % (1u << 5), 5));
        const std::uint64_t lhs = truncate_2adic(tr(x), m);
        const std::uint64_t rhs =
            (truncate_2adic(x, m) + (std::uint64_t{1} << r)) & ((std::uint64_t{1} << m) - 1);
        CHECK(lhs == rhs);
      }
    }
  }
}

TEST_CASE("single toggle map") {
  const SymbolicMap f = single_toggle_map(3, 1);
  // identity off U_3 and at the all-ones point
  CHECK(f(CantorPoint::all_ones()) == CantorPoint::all_ones());
  CHECK(f(CantorPoint::from_string("0|0")) == CantorPoint::from_string("0|0"));
  CHECK(f(CantorPoint::from_string("10|1")) == CantorPoint::from_string("10|1"));
  // x = 110 000... in U_3, r=1: first 3 bits kept, tail += 2
  CHECK(f(CantorPoint::from_string("110|0")) == CantorPoint::from_string("11001|0"));

  // invariance: U_n maps into U_n, identity elsewhere (exhaustive depth n+6)
  for (int n = 1; n <= 3; ++n) {
    const SymbolicMap g = single_toggle_map(n, 2);
    const int D = n + 6;
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << D); ++w) {
      const CantorPoint x = CantorPoint::zeros_tail(Word::from_lex_rank(w, D));
      const CantorPoint y = g(x);
      bool in_un = true;
      for (int j = 1; j < n; ++j)
        if (x.bit_at(j) == 0) in_un = false;
      if (x.bit_at(n) == 1) in_un = false;
      if (in_un) {
        for (int j = 1; j < n; ++j) CHECK(y.bit_at(j) == 1);
        CHECK(y.bit_at(n) == 0);
      } else {
        CHECK(y == x);
      }
    }
  }

  // ||F - id||_inf over a depth-14 sample <= 2^-(r+1)
  const int r = 4;
  const SymbolicMap h = single_toggle_map(2, r);
  std::mt19937 rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const CantorPoint x = CantorPoint::zeros_tail(random_word(rng, 14));
    CHECK(ultrametric_distance(h(x), x) <= Dyadic::pow2(-(r + 1)));
  }
}

TEST_CASE("star priority witness") {
  // full tree: u_m = *^m
  const FiniteTree full = FiniteTree::full(5);
  for (int m = 0; m <= 5; ++m) {
    const auto u = star_priority_witness(full, m);
    REQUIRE(u.has_value());
    CHECK(u->star_count() == m);
  }
  // all-zeros branch: the witness is forced to the branch
  const FiniteTree branch = FiniteTree::single_branch(Word::from_string("00000"));
  const auto u2 = star_priority_witness(branch, 2);
  REQUIRE(u2.has_value());
  CHECK(u2->to_string() == "00");

  // Silver trees: closed-form witness pattern, randomized over (A, x, M)
  std::mt19937 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int M = 2 + static_cast<int>(rng() % 7);  // M <= 8
    const std::set<int> A = random_coordinate_set(rng, M);
    const Word x = random_word(rng, M);
    const FiniteTree S = silver_tree(A, x, M);
    for (int m = 0; m <= M; ++m) {
      const auto u = star_priority_witness(S, m);
      REQUIRE(u.has_value());
      CHECK(*u == silver_witness_oracle(A, x, m));
    }
  }
}

TEST_CASE("witness nesting: u_m extends u_{m-1}") {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    // random downward-closed tree by pruning the full tree
    const int M = 5;
    std::vector<std::vector<Word>> levels(M + 1);
    levels[0].push_back(Word());
    for (int m = 1; m <= M; ++m) {
      for (const auto& parent : levels[m - 1]) {
        for (std::uint8_t b : {0, 1}) {
          if ((rng() % 8) == 0) continue;  // prune
          Word child = parent;
          child.push_back(b);
          levels[m].push_back(child);
        }
      }
    }
    if (levels[1].empty()) continue;
    const FiniteTree S(M, levels);
    std::optional<TemplateWord> prev = star_priority_witness(S, 0);
    for (int m = 1; m <= M; ++m) {
      const auto u = star_priority_witness(S, m);
      if (prev && u) {
        for (int i = 0; i < prev->size(); ++i) CHECK(u->at(i) == prev->at(i));
      }
      if (!prev) CHECK(!u);
      prev = u;
    }
  }
}

TEST_CASE("dump involution") {
  // m=1, P empty: swap 0 <-> 1
  const DumpInvolution d1 = dump_involution(1, {});
  CHECK(d1.apply(Word::from_string("0")) == Word::from_string("1"));
  CHECK(d1.apply(Word::from_string("1")) == Word::from_string("0"));
  // m=1, P={"0"}: "1" is the odd last element, fixed
  const DumpInvolution d2 = dump_involution(1, {Word::from_string("0")});
  CHECK(d2.apply(Word::from_string("1")) == Word::from_string("1"));
  CHECK(d2.apply(Word::from_string("0")) == Word::from_string("0"));
  // m=2, P={"00","01"}: complement (10,11) paired
  const DumpInvolution d3 =
      dump_involution(2, {Word::from_string("00"), Word::from_string("01")});
  CHECK(d3.apply(Word::from_string("10")) == Word::from_string("11"));
  CHECK(d3.apply(Word::from_string("11")) == Word::from_string("10"));

  // involution law, exhaustive over all P for m <= 3
  for (int m = 1; m <= 3; ++m) {
    const std::uint64_t total = std::uint64_t{1} << m;
    for (std::uint64_t pmask = 0; pmask < (std::uint64_t{1} << total); ++pmask) {
      std::vector<Word> P;
      for (std::uint64_t i = 0; i < total; ++i)
        if ((pmask >> i) & 1u) P.push_back(Word::from_lex_rank(i, m));
      const DumpInvolution inv = dump_involution(m, P);
      for (std::uint64_t i = 0; i < total; ++i) {
        const Word w = Word::from_lex_rank(i, m);
        CHECK(inv.apply(inv.apply(w)) == w);
        if ((pmask >> i) & 1u) CHECK(inv.apply(w) == w);
      }
    }
  }
  // sampled above m = 3, against an explicit list-based reconstruction
  std::mt19937 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 5);
    std::vector<Word> P;
    std::set<std::uint64_t> pset;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << m); ++i)
      if ((rng() % 3) == 0) {
        P.push_back(Word::from_lex_rank(i, m));
        pset.insert(i);
      }
    // oracle: list the complement lexicographically and pair neighbors
    std::vector<std::uint64_t> comp;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << m); ++i)
      if (!pset.count(i)) comp.push_back(i);
    std::map<std::uint64_t, std::uint64_t> expected;
    for (std::size_t j = 0; j + 1 < comp.size(); j += 2) {
      expected[comp[j]] = comp[j + 1];
      expected[comp[j + 1]] = comp[j];
    }
    if (comp.size() % 2 == 1) expected[comp.back()] = comp.back();
    const DumpInvolution inv = dump_involution(m, P);
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << m); ++i) {
      const Word w = Word::from_lex_rank(i, m);
      const std::uint64_t want = pset.count(i) ? i : expected.at(i);
      CHECK(inv.apply(w).lex_rank() == want);
    }
  }
}

TEST_CASE("dyadic odometer") {
  // no stars: identity
  CHECK(dyadic_odometer(TemplateWord::from_string("01"), Word::from_string("01")) ==
        Word::from_string("01"));
  CHECK(dyadic_odometer(TemplateWord::from_string("01"), Word::from_string("11")) ==
        Word::from_string("11"));
  // u = **: one 4-cycle 00 -> 10 -> 01 -> 11 -> 00
  const TemplateWord uss = TemplateWord::from_string("**");
  CHECK(dyadic_odometer(uss, Word::from_string("00")) == Word::from_string("10"));
  CHECK(dyadic_odometer(uss, Word::from_string("10")) == Word::from_string("01"));
  CHECK(dyadic_odometer(uss, Word::from_string("01")) == Word::from_string("11"));
  CHECK(dyadic_odometer(uss, Word::from_string("11")) == Word::from_string("00"));
  // u = *0: 2-cycles on the star bit, second coordinate fixed
  const TemplateWord us0 = TemplateWord::from_string("*0");
  CHECK(dyadic_odometer(us0, Word::from_string("00")) == Word::from_string("10"));
  CHECK(dyadic_odometer(us0, Word::from_string("10")) == Word::from_string("00"));

  // order is exactly 2^k(u) on every fiber, exhaustive templates for m <= 5
  std::mt19937 rng(37);
  for (int m = 1; m <= 5; ++m) {
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<std::uint8_t> syms(static_cast<std::size_t>(m));
      for (auto& s : syms) s = static_cast<std::uint8_t>(rng() % 3);
      const TemplateWord u(syms);
      const std::int64_t order = std::int64_t{1} << u.star_count();
      for (std::uint64_t w0 = 0; w0 < (std::uint64_t{1} << m); ++w0) {
        Word w = Word::from_lex_rank(w0, m);
        Word cur = w;
        for (std::int64_t step = 1; step <= order; ++step) {
          cur = dyadic_odometer(u, cur);
          if (step < order && u.star_count() > 0) CHECK(cur != w);
        }
        CHECK(cur == w);
        // non-star coordinates never move
        for (int i = 0; i < m; ++i)
          if (u.at(i) != TemplateWord::kStar)
            CHECK(dyadic_odometer(u, w).at(i) == w.at(i));
      }
    }
  }
}

TEST_CASE("silver tree level counts") {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    const int M = 2 + static_cast<int>(rng() % 9);  // M <= 10
    const std::set<int> A = random_coordinate_set(rng, M);
    const Word x = random_word(rng, M);
    const FiniteTree S = silver_tree(A, x, M);
    CHECK(S.downward_closed());
    for (int m = 0; m <= M; ++m) {
      int free_count = 0;
      for (int i = 0; i < m; ++i)
        if (!A.count(i)) ++free_count;
      CHECK(static_cast<std::int64_t>(S.level(m).size()) == (std::int64_t{1} << free_count));
    }
  }
  // degenerate cases
  const FiniteTree full = silver_tree({}, Word::from_string("0000"), 4);
  CHECK(full.level(4).size() == 16);
  const FiniteTree single = silver_tree({0, 1, 2, 3}, Word::from_string("1011"), 4);
  CHECK(single.level(4).size() == 1);
  CHECK(single.level(4)[0] == Word::from_string("1011"));
}

TEST_CASE("star counts") {
  const FiniteTree full = FiniteTree::full(6);
  const auto kf = star_counts(full);
  for (int m = 1; m <= 6; ++m) CHECK(kf[static_cast<std::size_t>(m - 1)] == m);

  const FiniteTree branch = FiniteTree::single_branch(Word::from_string("010101"));
  for (int k : star_counts(branch)) CHECK(k == 0);

  std::mt19937 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const int M = 3 + static_cast<int>(rng() % 6);
    const std::set<int> A = random_coordinate_set(rng, M);
    const Word x = random_word(rng, M);
    const auto ks = star_counts(silver_tree(A, x, M));
    for (int m = 1; m <= M; ++m) {
      int free_count = 0;
      for (int i = 0; i < m; ++i)
        if (!A.count(i)) ++free_count;
      CHECK(ks[static_cast<std::size_t>(m - 1)] >= free_count);
    }
  }
}

TEST_CASE("tree maps: fixed points and block structure") {
  const FiniteTree full = FiniteTree::full(4);
  for (const auto version : {TreeMapVersion::dump, TreeMapVersion::odometer}) {
    const SymbolicMap F = build_tree_map(full, version);
    CHECK(F(CantorPoint::all_ones()) == CantorPoint::all_ones());
    // on Y_m: coordinates <= m and > 2m unchanged
    std::mt19937 rng(53);
    for (int trial = 0; trial < 200; ++trial) {
      const int m = 1 + static_cast<int>(rng() % 4);
      Word w = clopen_block(m).word;
      for (int j = 0; j < m + 5; ++j) w.push_back(static_cast<std::uint8_t>(rng() % 2));
      const CantorPoint x = CantorPoint::zeros_tail(w);
      const CantorPoint y = F(x);
      for (int j = 1; j <= m; ++j) CHECK(y.bit_at(j) == x.bit_at(j));
      for (int j = 2 * m + 1; j <= 2 * m + 8; ++j) CHECK(y.bit_at(j) == x.bit_at(j));
    }
    // beyond the tree depth the blocks act as the identity
    const CantorPoint deep = CantorPoint::zeros_tail(clopen_block(5).word);
    CHECK(F(deep) == deep);
  }

  // full tree odometer on Y_1: the block bit flips
  const SymbolicMap Fo = build_tree_map(full, TreeMapVersion::odometer);
  CHECK(Fo(CantorPoint::from_string("00|0")) == CantorPoint::from_string("01|0"));
  CHECK(Fo(CantorPoint::from_string("01|0")) == CantorPoint::from_string("00|0"));

  // a tree dying at level 1 is legal (vacuously downward closed); its witness
  // is bot and the blocks act as the identity
  const SymbolicMap dead = build_tree_map(FiniteTree(1, {{Word()}, {}}), TreeMapVersion::odometer);
  CHECK(dead(CantorPoint::from_string("00|0")) == CantorPoint::from_string("00|0"));
}

TEST_CASE("tree maps: non-downward-closed input refused") {
  std::vector<std::vector<Word>> levels(3);
  levels[0].push_back(Word());
  levels[1].push_back(Word::from_string("0"));
  levels[2].push_back(Word::from_string("10"));  // parent "1" missing
  CHECK_THROWS_AS(build_tree_map(FiniteTree(2, levels), TreeMapVersion::dump),
                  std::invalid_argument);
}

TEST_CASE("measure preservation is exact for the gadget gallery") {
  CHECK(check_measure_preservation(identity_map(), 8).max_deviation.is_zero());
  CHECK(check_measure_preservation(translation_map(2), 8).max_deviation.is_zero());
  CHECK(check_measure_preservation(single_toggle_map(2, 3), 8).max_deviation.is_zero());
  const FiniteTree S = silver_tree({1}, Word::from_string("111"), 3);
  CHECK(check_measure_preservation(build_tree_map(S, TreeMapVersion::dump), 8)
            .max_deviation.is_zero());
  CHECK(check_measure_preservation(build_tree_map(S, TreeMapVersion::odometer), 8)
            .max_deviation.is_zero());
  CHECK_THROWS_AS(check_measure_preservation(identity_map(), 40), std::invalid_argument);
}

TEST_CASE("density ratios") {
  const DensityReport id_rep = estimate_density(identity_map(), 6);
  CHECK(id_rep.all_unit);
  CHECK(id_rep.sup_ratio == Dyadic::one());
  CHECK(estimate_density(identity_map(), 6).sup_ratio.to_double() == 1.0);

  // constant map to the all-zeros point: ratio 2^D at the zero cylinder
  MapDescriptor cd;
  cd.kind = MapDescriptor::Kind::composite;
  cd.detail = "constant_zero";
  const SymbolicMap constant(
      [](const CantorPoint&) { return CantorPoint::all_zeros(); }, [](int) { return 0; }, cd);
  for (int D : {3, 5, 7}) {
    const DensityReport rep = estimate_density(constant, D);
    CHECK(rep.sup_ratio == Dyadic::pow2(D));
    CHECK(rep.ratios[0] == Dyadic::pow2(D));
    for (std::size_t c = 1; c < rep.ratios.size(); ++c) CHECK(rep.ratios[c].is_zero());
  }
}

TEST_CASE("modulus probe") {
  const ModulusReport id_rep = modulus_probe(identity_map(), 8);
  CHECK(id_rep.one_lipschitz);
  for (int l = 0; l < 8; ++l)
    CHECK(id_rep.worst_output_distance[static_cast<std::size_t>(l)] ==
          doctest::Approx(std::ldexp(1.0, -(l + 1))));

  CHECK(modulus_probe(translation_map(1), 10).one_lipschitz);
  CHECK(modulus_probe(single_toggle_map(2, 2), 10).one_lipschitz);
  CHECK_THROWS_AS(modulus_probe(identity_map(), exhaustive_depth_cap() + 1),
                  std::invalid_argument);

  const FiniteTree full = FiniteTree::full(3);
  CHECK(modulus_probe(build_tree_map(full, TreeMapVersion::odometer), 8).one_lipschitz);
  // the dump version breaks 1-Lipschitz at block level 2 (01 -> 10 in one step)
  CHECK(!modulus_probe(build_tree_map(full, TreeMapVersion::dump), 8).one_lipschitz);
}

TEST_CASE("locality contract: bits beyond info_depth cannot leak") {
  std::mt19937 rng(61);
  const FiniteTree S = silver_tree({0}, Word::from_string("1111"), 4);
  const std::vector<SymbolicMap> gadgets = {
      identity_map(), translation_map(1), single_toggle_map(2, 2),
      build_tree_map(S, TreeMapVersion::dump), build_tree_map(S, TreeMapVersion::odometer)};
  for (const auto& F : gadgets) {
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 1 + static_cast<int>(rng() % 6);
      const int L = F.info_depth(k);
      const Word head = random_word(rng, L);
      // same first L bits, tails mutated arbitrarily
      CantorPoint x = CantorPoint::zeros_tail(head);
      Word tail1 = head, tail2 = head;
      for (int j = 0; j < 6; ++j) {
        tail1.push_back(static_cast<std::uint8_t>(rng() % 2));
        tail2.push_back(static_cast<std::uint8_t>(rng() % 2));
      }
      const CantorPoint y1 = F(CantorPoint::zeros_tail(tail1));
      const CantorPoint y2 = F(CantorPoint::zeros_tail(tail2));
      CHECK(y1.first_bits(k) == y2.first_bits(k));
      CHECK(F(x).first_bits(k) == y1.first_bits(k));
    }
  }
}

TEST_CASE("x_infinity is fixed by every gadget") {
  const FiniteTree S = silver_tree({1}, Word::from_string("0101"), 4);
  const std::vector<SymbolicMap> gadgets = {
      identity_map(), translation_map(0), translation_map(3), single_toggle_map(1, 1),
      build_tree_map(S, TreeMapVersion::dump)};
  for (const auto& F : gadgets) {
    if (F.descriptor().kind == MapDescriptor::Kind::translation) continue;  // moves x_inf
    CHECK(F(CantorPoint::all_ones()) == CantorPoint::all_ones());
  }
  // odometer version too
  CHECK(build_tree_map(S, TreeMapVersion::odometer)(CantorPoint::all_ones()) ==
        CantorPoint::all_ones());
}
