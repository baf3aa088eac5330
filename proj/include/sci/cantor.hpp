#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "sci/dyadic.hpp"

namespace sci {

/// Finite bit word over {0,1}. Position 0 is the first (leftmost) symbol.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<std::uint8_t> bits);
  /// Parses "0110"; the empty string is the empty word.
  static Word from_string(const std::string& s);
  /// Word of given length whose bits are the LSB-first digits of value,
  /// i.e. bit j carries value 2^j (the s_m coding of the 2-adic model).
  static Word from_lsb_value(std::uint64_t value, int length);

  int size() const { return static_cast<int>(bits_.size()); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t at(int i) const { return bits_[static_cast<std::size_t>(i)]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  void push_back(std::uint8_t b);
  Word prefix(int len) const;

  /// LSB-first numeric value: sum of bit j * 2^j. Requires size <= 62.
  std::uint64_t lsb_value() const;
  /// Lexicographic rank among words of the same length (MSB-first value).
  std::uint64_t lex_rank() const;
  static Word from_lex_rank(std::uint64_t rank, int length);

  std::string to_string() const;

  bool operator==(const Word& o) const { return bits_ == o.bits_; }
  bool operator!=(const Word& o) const { return bits_ != o.bits_; }
  bool operator<(const Word& o) const { return bits_ < o.bits_; }  // lex on equal lengths

 private:
  std::vector<std::uint8_t> bits_;
};

/// Point of the Cantor space 2^N, represented exactly as an eventually
/// periodic bit stream prefix (period)^inf. Canonicalized on construction to
/// the minimal period and then the minimal prefix, so equality is structural.
class CantorPoint {
 public:
  /// period must be nonempty.
  CantorPoint(Word prefix, Word period);
  /// Parses "prefix|period", e.g. "10|01". An empty prefix is allowed: "|1".
  static CantorPoint from_string(const std::string& s);
  /// The all-ones point, the distinguished fixed point of the block gadgets.
  static CantorPoint all_ones();
  static CantorPoint all_zeros();
  /// word followed by the all-zeros tail.
  static CantorPoint zeros_tail(const Word& word);

  const Word& prefix() const { return prefix_; }
  const Word& period() const { return period_; }

  /// i-th bit of the expanded stream, 1-indexed.
  std::uint8_t bit_at(std::int64_t i) const;
  /// First n bits as a word.
  Word first_bits(int n) const;
  /// Drops the first n bits (tail projection pi_n strips a known prefix).
  CantorPoint drop(int n) const;
  /// Prepends a word.
  CantorPoint prepend(const Word& w) const;

  bool operator==(const CantorPoint& o) const {
    return prefix_ == o.prefix_ && period_ == o.period_;
  }
  bool operator!=(const CantorPoint& o) const { return !(*this == o); }

  /// "prefix|period" serialization.
  std::string to_string() const;

 private:
  void canonicalize();
  Word prefix_;
  Word period_;
};

/// Clopen cylinder of all streams extending a fixed word.
struct DyadicCylinder {
  Word word;
  /// Bernoulli mass 2^(-|word|), exact.
  Dyadic measure() const { return Dyadic::pow2(-word.size()); }
};

/// First disagreement index (1-based) of two points, or 0 if equal.
/// Decidable on eventually periodic representations.
std::int64_t first_disagreement(const CantorPoint& x, const CantorPoint& y);

/// Cantor ultrametric 2^(-N) with N the first disagreement index; exact.
Dyadic ultrametric_distance(const CantorPoint& x, const CantorPoint& y);

Dyadic cylinder_measure(const DyadicCylinder& c);

/// U_n = {x : x_1 = ... = x_{n-1} = 1, x_n = 0}; diam(U_n) <= 2^(-(n+1)).
DyadicCylinder clopen_block(int n);
Dyadic clopen_block_diameter_bound(int n);

/// s_m(x) = sum_{j<=m} x_j 2^(j-1); m <= 62.
std::uint64_t truncate_2adic(const CantorPoint& x, int m);

/// The point with 2-adic value iota(x) + t. Carries are resolved exactly:
/// a carry entering an all-ones period flips the tail to zeros, otherwise it
/// dies inside one period copy.
CantorPoint add_2adic(const CantorPoint& x, std::uint64_t t);

/// Fixed map-independent quadrature: one node per depth-n word, node point =
/// word followed by the all-zeros tail, weight 2^(-n). Node order is
/// lexicographic in the word.
class QuadratureScheme {
 public:
  explicit QuadratureScheme(int depth);

  int depth() const { return depth_; }
  std::int64_t node_count() const { return std::int64_t{1} << depth_; }
  /// Node point for lexicographic node index.
  CantorPoint node_point(std::int64_t index) const;
  Word node_word(std::int64_t index) const;
  Dyadic node_weight(std::int64_t) const { return Dyadic::pow2(-depth_); }

 private:
  int depth_;
};

QuadratureScheme quadrature(int n);

/// Riemann-sum norm of sampled values at the scheme's nodes.
/// p = 1: sum w|v|;  p = 2: (sum w|v|^2)^(1/2);  p = 0 stands for infinity: max |v|.
double riemann_norm(const std::vector<std::complex<double>>& values,
                    const QuadratureScheme& scheme, int p);

}  // namespace sci
