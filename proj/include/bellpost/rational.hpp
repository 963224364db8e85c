#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <string>

#include "bellpost/errors.hpp"

namespace bellpost {

// Exact rational number with 64-bit numerator and denominator.
// Intermediate products use 128-bit integers; results that do not fit throw.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(implicit)
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  // Best rational approximation with denominator <= max_den. Throws when the
  // approximation is not within tol of the input (relative to max(1, |value|)).
  static Rational from_double(double value, std::int64_t max_den = 1'000'000'000,
                              double tol = 1e-12) {
    if (!std::isfinite(value)) throw InvalidArgument("non-finite coefficient");
    const double target = value;
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double x = value;
    for (int i = 0; i < 64; ++i) {
      const double fl = std::floor(x);
      if (std::fabs(fl) > 9.0e15) break;
      const auto a = static_cast<std::int64_t>(fl);
      const __int128 h2 = static_cast<__int128>(a) * h1 + h0;
      const __int128 k2 = static_cast<__int128>(a) * k1 + k0;
      if (k2 > max_den || h2 > INT64_MAX || h2 < INT64_MIN) break;
      h0 = h1;
      h1 = static_cast<std::int64_t>(h2);
      k0 = k1;
      k1 = static_cast<std::int64_t>(k2);
      if (std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - target) <=
          1e-15 * std::max(1.0, std::fabs(target)))
        break;
      const double frac = x - fl;
      if (frac == 0.0) break;
      x = 1.0 / frac;
    }
    if (k1 == 0) throw InvalidArgument("coefficient out of rational range");
    Rational r(h1, k1);
    if (std::fabs(r.to_double() - target) > tol * std::max(1.0, std::fabs(target)))
      throw InvalidArgument("coefficient " + std::to_string(value) +
                            " has no small-denominator rational form");
    return r;
  }

  constexpr std::int64_t num() const noexcept { return num_; }
  constexpr std::int64_t den() const noexcept { return den_; }
  constexpr bool is_integer() const noexcept { return den_ == 1; }
  constexpr bool is_zero() const noexcept { return num_ == 0; }
  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Rational operator+(const Rational& l, const Rational& r) {
    return make(static_cast<__int128>(l.num_) * r.den_ + static_cast<__int128>(r.num_) * l.den_,
                static_cast<__int128>(l.den_) * r.den_);
  }
  friend Rational operator-(const Rational& l, const Rational& r) {
    return make(static_cast<__int128>(l.num_) * r.den_ - static_cast<__int128>(r.num_) * l.den_,
                static_cast<__int128>(l.den_) * r.den_);
  }
  friend Rational operator*(const Rational& l, const Rational& r) {
    return make(static_cast<__int128>(l.num_) * r.num_, static_cast<__int128>(l.den_) * r.den_);
  }
  friend Rational operator/(const Rational& l, const Rational& r) {
    if (r.num_ == 0) throw InvalidArgument("rational division by zero");
    return make(static_cast<__int128>(l.num_) * r.den_, static_cast<__int128>(l.den_) * r.num_);
  }
  Rational operator-() const { return make(-static_cast<__int128>(num_), den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational& l, const Rational& r) noexcept {
    return l.num_ == r.num_ && l.den_ == r.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& l, const Rational& r) noexcept {
    const __int128 lhs = static_cast<__int128>(l.num_) * r.den_;
    const __int128 rhs = static_cast<__int128>(r.num_) * l.den_;
    return lhs <=> rhs;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational make(__int128 num, __int128 den) {
    if (den == 0) throw InvalidArgument("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const __int128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num > INT64_MAX || num < INT64_MIN || den > INT64_MAX)
      throw InvalidArgument("rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  void assign(std::int64_t num, std::int64_t den) { *this = make(num, den); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace bellpost
