#ifndef CVXGEO_RATIONAL_HPP
#define CVXGEO_RATIONAL_HPP

#include "cvxgeo/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

namespace cvx {

// Exact rational arithmetic on 128-bit integers. Wide enough for every fixed
// inequality this library checks exactly (denominators stay below 2^52 and
// all cross-products below 2^110); reduction after each operation keeps the
// representation canonical with den > 0.
class Rational {
 public:
  using Int = __int128;

  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}
  Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

  static Rational from_int128(Int n, Int d) {
    Rational r;
    r.num_ = n;
    r.den_ = d;
    r.normalize();
    return r;
  }

  Int num() const { return num_; }
  Int den() const { return den_; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_int128(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_int128(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_int128(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) fail(ErrorCode::domain_error, "rational division by zero");
    return from_int128(a.num_ * b.den_, a.den_ * b.num_);
  }
  Rational operator-() const { return from_int128(-num_, den_); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ <= b.num_ * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

  Rational pow(int e) const {
    if (e < 0) return Rational(1) / pow(-e);
    Rational out(1);
    Rational base = *this;
    while (e > 0) {
      if (e & 1) out = out * base;
      base = base * base;
      e >>= 1;
    }
    return out;
  }

  // Exact cube root when the value is a perfect rational cube.
  std::optional<Rational> exact_cbrt() const {
    if (num_ < 0) {
      auto r = (-*this).exact_cbrt();
      if (!r) return std::nullopt;
      return -*r;
    }
    auto root = [](Int v) -> std::optional<Int> {
      if (v == 0) return Int(0);
      Int lo = 0, hi = 1;
      while (hi * hi * hi < v) {
        lo = hi;
        hi *= 2;
      }
      while (lo < hi) {
        Int mid = lo + (hi - lo) / 2;
        if (mid * mid * mid < v) {
          lo = mid + 1;
        } else {
          hi = mid;
        }
      }
      if (lo * lo * lo == v) return lo;
      return std::nullopt;
    };
    auto rn = root(num_);
    auto rd = root(den_);
    if (!rn || !rd) return std::nullopt;
    return from_int128(*rn, *rd);
  }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  std::string str() const {
    auto digits = [](Int v) {
      if (v == 0) return std::string("0");
      bool neg = v < 0;
      if (neg) v = -v;
      std::string s;
      while (v > 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
      }
      return neg ? "-" + s : s;
    };
    if (den_ == 1) return digits(num_);
    return digits(num_) + "/" + digits(den_);
  }

 private:
  static Int gcd(Int a, Int b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      Int t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  void normalize() {
    if (den_ == 0) fail(ErrorCode::domain_error, "rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    Int g = gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  Int num_;
  Int den_;
};

}  // namespace cvx

#endif  // CVXGEO_RATIONAL_HPP
