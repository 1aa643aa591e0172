#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace treewalk {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class ErrorCode {
  DegreeTooSmall,
  NonPositiveLambda,
  NonFinite,
  DomainError,
  NotTransient,
  NotCoveredRegime,
  CapacityExceeded,
  RationalRequired,
  InvalidConfig,
  CrossCheckFailed,
  ParseError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline constexpr double kLn2 = 0.6931471805599453094172321;

/// Natural log of a positive big integer. Uses the top 53 bits plus the bit
/// length, so it stays accurate long after the value overflows a double.
inline double log_value(const BigInt& v) {
  if (v <= 0) throw Error(ErrorCode::DomainError, "log_value: nonpositive integer");
  const auto bits = boost::multiprecision::msb(v);  // index of highest set bit
  if (bits <= 52) return std::log(v.convert_to<double>());
  const BigInt top = v >> (bits - 52);
  return std::log(top.convert_to<double>()) + static_cast<double>(bits - 52) * kLn2;
}

inline double log_value(const Rational& v) {
  if (v <= 0) throw Error(ErrorCode::DomainError, "log_value: nonpositive rational");
  return log_value(numerator(v)) - log_value(denominator(v));
}

inline double to_double(const Rational& v) { return v.convert_to<double>(); }

/// Nonnegative floating value stored as frac * 2^exp with frac in [0.5, 1).
/// Keeps probabilities representable far below the double underflow threshold;
/// the DP tables at large step counts need this.
class ScaledFloat {
 public:
  ScaledFloat() = default;
  explicit ScaledFloat(double v) : frac_(v), exp_(0) {
    if (v < 0 || !std::isfinite(v)) throw Error(ErrorCode::DomainError, "ScaledFloat: negative or non-finite");
    canonicalize();
  }
  ScaledFloat(int v) : ScaledFloat(static_cast<double>(v)) {}

  static ScaledFloat from_parts(double frac, std::int64_t exp) {
    ScaledFloat r;
    r.frac_ = frac;
    r.exp_ = exp;
    r.canonicalize();
    return r;
  }

  static ScaledFloat from_bigint(const BigInt& v) {
    if (v < 0) throw Error(ErrorCode::DomainError, "ScaledFloat: negative integer");
    if (v == 0) return ScaledFloat();
    const auto bits = boost::multiprecision::msb(v);
    if (bits <= 52) return ScaledFloat(v.convert_to<double>());
    const BigInt top = v >> (bits - 52);
    return from_parts(top.convert_to<double>(), static_cast<std::int64_t>(bits) - 52);
  }

  static ScaledFloat from_rational(const Rational& v) {
    return from_bigint(numerator(v)) / from_bigint(denominator(v));
  }

  bool is_zero() const { return frac_ == 0.0; }
  double fraction() const { return frac_; }
  /// Power-of-two scale; this is the per-entry exponent a ProbTable exposes.
  std::int64_t exponent() const { return exp_; }

  double to_double() const {
    if (frac_ == 0.0) return 0.0;
    if (exp_ < -1100) return 0.0;
    if (exp_ > 1024) return std::numeric_limits<double>::infinity();
    return std::ldexp(frac_, static_cast<int>(exp_));
  }

  /// Natural log; -inf for zero.
  double log() const {
    if (frac_ == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(frac_) + static_cast<double>(exp_) * kLn2;
  }

  friend ScaledFloat operator+(const ScaledFloat& a, const ScaledFloat& b) {
    if (a.frac_ == 0.0) return b;
    if (b.frac_ == 0.0) return a;
    const ScaledFloat& hi = (a.exp_ >= b.exp_) ? a : b;
    const ScaledFloat& lo = (a.exp_ >= b.exp_) ? b : a;
    const std::int64_t shift = lo.exp_ - hi.exp_;
    if (shift < -1075) return hi;
    return from_parts(hi.frac_ + std::ldexp(lo.frac_, static_cast<int>(shift)), hi.exp_);
  }

  friend ScaledFloat operator*(const ScaledFloat& a, const ScaledFloat& b) {
    if (a.frac_ == 0.0 || b.frac_ == 0.0) return ScaledFloat();
    return from_parts(a.frac_ * b.frac_, a.exp_ + b.exp_);
  }

  friend ScaledFloat operator/(const ScaledFloat& a, const ScaledFloat& b) {
    if (b.frac_ == 0.0) throw Error(ErrorCode::DomainError, "ScaledFloat: division by zero");
    if (a.frac_ == 0.0) return ScaledFloat();
    return from_parts(a.frac_ / b.frac_, a.exp_ - b.exp_);
  }

  ScaledFloat& operator+=(const ScaledFloat& o) { return *this = *this + o; }
  ScaledFloat& operator*=(const ScaledFloat& o) { return *this = *this * o; }

  friend bool operator==(const ScaledFloat& a, const ScaledFloat& b) {
    return a.frac_ == b.frac_ && a.exp_ == b.exp_;
  }
  friend bool operator<(const ScaledFloat& a, const ScaledFloat& b) {
    if (a.frac_ == 0.0) return b.frac_ != 0.0;
    if (b.frac_ == 0.0) return false;
    if (a.exp_ != b.exp_) return a.exp_ < b.exp_;
    return a.frac_ < b.frac_;
  }
  friend bool operator<=(const ScaledFloat& a, const ScaledFloat& b) { return a == b || a < b; }
  friend bool operator>(const ScaledFloat& a, const ScaledFloat& b) { return b < a; }
  friend bool operator>=(const ScaledFloat& a, const ScaledFloat& b) { return b <= a; }

 private:
  void canonicalize() {
    if (frac_ == 0.0) {
      exp_ = 0;
      return;
    }
    int e = 0;
    frac_ = std::frexp(frac_, &e);
    exp_ += e;
  }

  double frac_ = 0.0;  // 0, or in [0.5, 1)
  std::int64_t exp_ = 0;
};

/// Relative difference |a/b - 1| evaluated via logs when needed, so it works
/// for values far outside double range. b must be nonzero.
inline double rel_diff(const ScaledFloat& a, const ScaledFloat& b) {
  if (b.is_zero()) throw Error(ErrorCode::DomainError, "rel_diff: zero reference");
  if (a.is_zero()) return 1.0;
  return std::abs((a / b).to_double() - 1.0);
}

inline double rel_diff(double a, double b) { return std::abs(a / b - 1.0); }

}  // namespace treewalk
