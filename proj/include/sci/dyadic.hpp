#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sci {

/// Exact dyadic rational m * 2^e with a 64-bit mantissa.
///
/// Normal form: mantissa is odd or zero (zero has exponent 0), so equality is
/// structural. All arithmetic is exact and throws std::overflow_error instead
/// of silently wrapping; the quantities handled here (cylinder masses, node
/// weights, measure deviations) stay far below the representable range.
class Dyadic {
 public:
  Dyadic() : mant_(0), exp_(0) {}
  explicit Dyadic(std::int64_t integer) : mant_(integer), exp_(0) { normalize(); }
  Dyadic(std::int64_t mantissa, int exponent) : mant_(mantissa), exp_(exponent) { normalize(); }

  /// 2^k (k may be negative).
  static Dyadic pow2(int k) { return Dyadic(1, k); }
  static Dyadic zero() { return Dyadic(); }
  static Dyadic one() { return Dyadic(1, 0); }

  std::int64_t mantissa() const { return mant_; }
  int exponent() const { return exp_; }
  bool is_zero() const { return mant_ == 0; }

  Dyadic operator-() const { return Dyadic(-mant_, exp_); }

  Dyadic operator+(const Dyadic& o) const {
    if (mant_ == 0) return o;
    if (o.mant_ == 0) return *this;
    int e = exp_ < o.exp_ ? exp_ : o.exp_;
    __int128 a = shifted(mant_, exp_ - e);
    __int128 b = shifted(o.mant_, o.exp_ - e);
    return from_wide(a + b, e);
  }
  Dyadic operator-(const Dyadic& o) const { return *this + (-o); }

  Dyadic operator*(const Dyadic& o) const {
    __int128 p = static_cast<__int128>(mant_) * static_cast<__int128>(o.mant_);
    return from_wide(p, exp_ + o.exp_);
  }

  bool operator==(const Dyadic& o) const { return mant_ == o.mant_ && exp_ == o.exp_; }
  bool operator!=(const Dyadic& o) const { return !(*this == o); }
  bool operator<(const Dyadic& o) const { return (*this - o).mant_ < 0; }
  bool operator<=(const Dyadic& o) const { return (*this - o).mant_ <= 0; }
  bool operator>(const Dyadic& o) const { return o < *this; }
  bool operator>=(const Dyadic& o) const { return o <= *this; }

  Dyadic abs() const { return mant_ < 0 ? -*this : *this; }

  double to_double() const {
    double v = static_cast<double>(mant_);
    int e = exp_;
    while (e > 0) { v *= 2.0; --e; }
    while (e < 0) { v *= 0.5; ++e; }
    return v;
  }

  /// "m*2^e" or plain integer when e == 0.
  std::string to_string() const {
    if (exp_ == 0) return std::to_string(mant_);
    return std::to_string(mant_) + "*2^" + std::to_string(exp_);
  }

 private:
  static __int128 shifted(std::int64_t m, int up) {
    if (up > 100) throw std::overflow_error("Dyadic: exponent spread too large");
    __int128 v = m;
    return v << up;
  }

  static Dyadic from_wide(__int128 v, int e) {
    if (v == 0) return Dyadic();
    while ((v & 1) == 0) { v >>= 1; ++e; }
    constexpr __int128 lo = -(((__int128)1) << 62);
    constexpr __int128 hi = (((__int128)1) << 62);
    if (v <= lo || v >= hi) throw std::overflow_error("Dyadic: mantissa overflow");
    Dyadic d;
    d.mant_ = static_cast<std::int64_t>(v);
    d.exp_ = e;
    return d;
  }

  void normalize() {
    if (mant_ == 0) { exp_ = 0; return; }
    while ((mant_ & 1) == 0) { mant_ >>= 1; ++exp_; }
  }

  std::int64_t mant_;
  int exp_;
};

}  // namespace sci
