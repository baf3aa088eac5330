#include "sci/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sci {

Word::Word(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_)
    if (b > 1) throw std::invalid_argument("Word: bits must be 0 or 1");
}

Word Word::from_string(const std::string& s) {
  std::vector<std::uint8_t> bits;
  bits.reserve(s.size());
  for (char c : s) {
    if (c == '0') bits.push_back(0);
    else if (c == '1') bits.push_back(1);
    else throw std::invalid_argument("Word: expected only '0'/'1', got '" + std::string(1, c) + "'");
  }
  return Word(std::move(bits));
}

Word Word::from_lsb_value(std::uint64_t value, int length) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(length));
  for (int j = 0; j < length; ++j) bits[static_cast<std::size_t>(j)] = (value >> j) & 1u;
  return Word(std::move(bits));
}

void Word::push_back(std::uint8_t b) {
  if (b > 1) throw std::invalid_argument("Word: bits must be 0 or 1");
  bits_.push_back(b);
}

Word Word::prefix(int len) const {
  return Word(std::vector<std::uint8_t>(bits_.begin(), bits_.begin() + len));
}

std::uint64_t Word::lsb_value() const {
  if (size() > 62) throw std::overflow_error("Word::lsb_value: word too long");
  std::uint64_t v = 0;
  for (int j = 0; j < size(); ++j) v |= static_cast<std::uint64_t>(bits_[j]) << j;
  return v;
}

std::uint64_t Word::lex_rank() const {
  if (size() > 62) throw std::overflow_error("Word::lex_rank: word too long");
  std::uint64_t v = 0;
  for (int j = 0; j < size(); ++j) v = (v << 1) | bits_[j];
  return v;
}

Word Word::from_lex_rank(std::uint64_t rank, int length) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(length));
  for (int j = 0; j < length; ++j)
    bits[static_cast<std::size_t>(j)] = (rank >> (length - 1 - j)) & 1u;
  return Word(std::move(bits));
}

std::string Word::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

CantorPoint::CantorPoint(Word prefix, Word period)
    : prefix_(std::move(prefix)), period_(std::move(period)) {
  if (period_.empty()) throw std::invalid_argument("CantorPoint: period must be nonempty");
  canonicalize();
}

CantorPoint CantorPoint::from_string(const std::string& s) {
  auto bar = s.find('|');
  if (bar == std::string::npos)
    throw std::invalid_argument("CantorPoint: expected \"prefix|period\"");
  return CantorPoint(Word::from_string(s.substr(0, bar)), Word::from_string(s.substr(bar + 1)));
}

CantorPoint CantorPoint::all_ones() { return CantorPoint(Word(), Word::from_string("1")); }
CantorPoint CantorPoint::all_zeros() { return CantorPoint(Word(), Word::from_string("0")); }
CantorPoint CantorPoint::zeros_tail(const Word& word) {
  return CantorPoint(word, Word::from_string("0"));
}

void CantorPoint::canonicalize() {
  // Reduce the period to its primitive root.
  const int q = period_.size();
  for (int d = 1; d <= q / 2; ++d) {
    if (q % d != 0) continue;
    bool repeats = true;
    for (int j = d; j < q && repeats; ++j)
      if (period_.at(j) != period_.at(j % d)) repeats = false;
    if (repeats) {
      period_ = period_.prefix(d);
      break;
    }
  }
  // Absorb prefix tail symbols matching the period's last symbol: the stream
  // p.c.(w)^inf equals p.(rot_right(w))^inf when c is the last symbol of w.
  while (!prefix_.empty() && prefix_.at(prefix_.size() - 1) == period_.at(period_.size() - 1)) {
    std::vector<std::uint8_t> rot;
    rot.reserve(static_cast<std::size_t>(period_.size()));
    rot.push_back(period_.at(period_.size() - 1));
    for (int j = 0; j + 1 < period_.size(); ++j) rot.push_back(period_.at(j));
    period_ = Word(std::move(rot));
    std::vector<std::uint8_t> shorter(prefix_.bits().begin(), prefix_.bits().end() - 1);
    prefix_ = Word(std::move(shorter));
  }
}

std::uint8_t CantorPoint::bit_at(std::int64_t i) const {
  if (i < 1) throw std::invalid_argument("CantorPoint::bit_at: index is 1-based");
  const std::int64_t p = prefix_.size();
  if (i <= p) return prefix_.at(static_cast<int>(i - 1));
  return period_.at(static_cast<int>((i - p - 1) % period_.size()));
}

Word CantorPoint::first_bits(int n) const {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) bits[static_cast<std::size_t>(j - 1)] = bit_at(j);
  return Word(std::move(bits));
}

CantorPoint CantorPoint::drop(int n) const {
  if (n < 0) throw std::invalid_argument("CantorPoint::drop: negative count");
  if (n < prefix_.size()) {
    std::vector<std::uint8_t> rest(prefix_.bits().begin() + n, prefix_.bits().end());
    return CantorPoint(Word(std::move(rest)), period_);
  }
  const int off = static_cast<int>((n - prefix_.size()) % period_.size());
  std::vector<std::uint8_t> rot;
  rot.reserve(static_cast<std::size_t>(period_.size()));
  for (int j = 0; j < period_.size(); ++j) rot.push_back(period_.at((off + j) % period_.size()));
  return CantorPoint(Word(), Word(std::move(rot)));
}

CantorPoint CantorPoint::prepend(const Word& w) const {
  std::vector<std::uint8_t> bits(w.bits());
  bits.insert(bits.end(), prefix_.bits().begin(), prefix_.bits().end());
  return CantorPoint(Word(std::move(bits)), period_);
}

std::string CantorPoint::to_string() const {
  return prefix_.to_string() + "|" + period_.to_string();
}

std::int64_t first_disagreement(const CantorPoint& x, const CantorPoint& y) {
  if (x == y) return 0;  // canonical forms are equal iff the streams are
  const std::int64_t p = std::max(x.prefix().size(), y.prefix().size());
  const std::int64_t q = std::lcm<std::int64_t>(x.period().size(), y.period().size());
  const std::int64_t bound = p + q;
  for (std::int64_t i = 1; i <= bound; ++i)
    if (x.bit_at(i) != y.bit_at(i)) return i;
  // Streams agreeing through prefix + lcm of periods agree everywhere.
  throw std::logic_error("first_disagreement: canonicalization out of sync");
}

Dyadic ultrametric_distance(const CantorPoint& x, const CantorPoint& y) {
  const std::int64_t n = first_disagreement(x, y);
  if (n == 0) return Dyadic::zero();
  return Dyadic::pow2(static_cast<int>(-n));
}

Dyadic cylinder_measure(const DyadicCylinder& c) { return c.measure(); }

DyadicCylinder clopen_block(int n) {
  if (n < 1) throw std::invalid_argument("clopen_block: n >= 1 required");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 1);
  bits.back() = 0;
  return DyadicCylinder{Word(std::move(bits))};
}

Dyadic clopen_block_diameter_bound(int n) { return Dyadic::pow2(-(n + 1)); }

std::uint64_t truncate_2adic(const CantorPoint& x, int m) {
  if (m < 0 || m > 62) throw std::invalid_argument("truncate_2adic: need 0 <= m <= 62");
  std::uint64_t v = 0;
  for (int j = 1; j <= m; ++j) v |= static_cast<std::uint64_t>(x.bit_at(j)) << (j - 1);
  return v;
}

CantorPoint add_2adic(const CantorPoint& x, std::uint64_t t) {
  std::vector<std::uint8_t> out;
  std::uint8_t carry = 0;
  std::int64_t i = 0;
  // Full adder while the addend has bits or we are still inside the prefix.
  while (t != 0 || i < x.prefix().size()) {
    ++i;
    const std::uint8_t xb = x.bit_at(i);
    const std::uint8_t tb = static_cast<std::uint8_t>(t & 1u);
    t >>= 1;
    const std::uint8_t s = static_cast<std::uint8_t>(xb + tb + carry);
    out.push_back(s & 1u);
    carry = s >> 1;
  }
  const int q = x.period().size();
  auto tail_from = [&](std::int64_t pos) {
    // Periodic tail starting after stream position pos, as a rotation.
    const int off = static_cast<int>((pos - x.prefix().size()) % q);
    std::vector<std::uint8_t> rot;
    rot.reserve(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j) rot.push_back(x.period().at((off + j) % q));
    return Word(std::move(rot));
  };
  if (carry == 0) return CantorPoint(Word(std::move(out)), tail_from(i));

  bool all_ones = true;
  for (int j = 0; j < q; ++j)
    if (x.period().at(j) == 0) all_ones = false;
  if (all_ones) {
    // ...111 + 1 carries out forever: the tail becomes all zeros.
    return CantorPoint(Word(std::move(out)), Word::from_string("0"));
  }
  // The carry dies at the first 0 inside one period copy.
  while (true) {
    ++i;
    if (x.bit_at(i) == 1) {
      out.push_back(0);
    } else {
      out.push_back(1);
      break;
    }
  }
  return CantorPoint(Word(std::move(out)), tail_from(i));
}

QuadratureScheme::QuadratureScheme(int depth) : depth_(depth) {
  if (depth < 0 || depth > 26)
    throw std::invalid_argument("QuadratureScheme: depth out of range [0,26]");
}

CantorPoint QuadratureScheme::node_point(std::int64_t index) const {
  return CantorPoint::zeros_tail(node_word(index));
}

Word QuadratureScheme::node_word(std::int64_t index) const {
  if (index < 0 || index >= node_count())
    throw std::out_of_range("QuadratureScheme: node index");
  return Word::from_lex_rank(static_cast<std::uint64_t>(index), depth_);
}

QuadratureScheme quadrature(int n) { return QuadratureScheme(n); }

double riemann_norm(const std::vector<std::complex<double>>& values,
                    const QuadratureScheme& scheme, int p) {
  if (static_cast<std::int64_t>(values.size()) != scheme.node_count())
    throw std::invalid_argument("riemann_norm: value count does not match node count");
  const double w = scheme.node_weight(0).to_double();
  switch (p) {
    case 1: {
      double s = 0.0;
      for (const auto& v : values) s += w * std::abs(v);
      return s;
    }
    case 2: {
      double s = 0.0;
      for (const auto& v : values) s += w * std::norm(v);
      return std::sqrt(s);
    }
    case 0: {  // infinity
      double s = 0.0;
      for (const auto& v : values) s = std::max(s, std::abs(v));
      return s;
    }
    default:
      throw std::invalid_argument("riemann_norm: p must be 1, 2 or 0 (=infinity)");
  }
}

}  // namespace sci
