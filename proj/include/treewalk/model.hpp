#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>

#include "treewalk/arith.hpp"

namespace treewalk {

enum class Regime { Transient, Critical, Recurrent };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Transient: return "transient";
    case Regime::Critical: return "critical";
    case Regime::Recurrent: return "recurrent";
  }
  return "?";
}

/// Parameters of the lambda-biased walk on the d-regular tree.
///
/// lambda is kept in dual form: an exact rational when the caller supplied
/// one, plus the binary-float image used on floating paths. Regime
/// classification compares the stored representation against d-1 exactly,
/// so lambda == d-1 is classified critical without rounding surprises.
class WalkParams {
 public:
  int degree() const { return d_; }
  double lambda() const { return lambda_; }
  const std::optional<Rational>& lambda_exact() const { return lambda_exact_; }
  bool has_exact_lambda() const { return lambda_exact_.has_value(); }

  Regime regime() const {
    const int dm1 = d_ - 1;
    if (lambda_exact_) {
      if (*lambda_exact_ < dm1) return Regime::Transient;
      if (*lambda_exact_ == dm1) return Regime::Critical;
      return Regime::Recurrent;
    }
    if (lambda_ < dm1) return Regime::Transient;
    if (lambda_ == dm1) return Regime::Critical;
    return Regime::Recurrent;
  }

  /// lambda in the requested arithmetic. The Rational form requires an exact
  /// lambda and throws RationalRequired otherwise.
  template <class Real>
  Real lambda_as() const {
    if constexpr (std::is_same_v<Real, Rational>) {
      if (!lambda_exact_)
        throw Error(ErrorCode::RationalRequired, "exact arithmetic requires a rational lambda");
      return *lambda_exact_;
    } else if constexpr (std::is_same_v<Real, ScaledFloat>) {
      return ScaledFloat(lambda_);
    } else {
      return lambda_;
    }
  }

  friend WalkParams make_params(int d, double lambda);
  friend WalkParams make_params(int d, const Rational& lambda);

 private:
  WalkParams(int d, double lambda, std::optional<Rational> exact)
      : d_(d), lambda_(lambda), lambda_exact_(std::move(exact)) {}

  int d_;
  double lambda_;
  std::optional<Rational> lambda_exact_;
};

inline WalkParams make_params(int d, double lambda) {
  if (d < 2) throw Error(ErrorCode::DegreeTooSmall, "degree must be at least 2");
  if (!std::isfinite(lambda)) throw Error(ErrorCode::NonFinite, "lambda must be finite");
  if (lambda <= 0) throw Error(ErrorCode::NonPositiveLambda, "lambda must be positive");
  return WalkParams(d, lambda, std::nullopt);
}

inline WalkParams make_params(int d, const Rational& lambda) {
  if (d < 2) throw Error(ErrorCode::DegreeTooSmall, "degree must be at least 2");
  if (lambda <= 0) throw Error(ErrorCode::NonPositiveLambda, "lambda must be positive");
  return WalkParams(d, to_double(lambda), lambda);
}

/// Parse lambda from CLI text. "3", "-1/2", "7/4" are taken as exact
/// rationals; anything else is parsed as a decimal and stored as a binary
/// float only.
inline WalkParams make_params(int d, const std::string& lambda_text) {
  auto is_rational_literal = [](const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    bool seen_slash = false, digit_before = false, digit_after = false;
    for (; i < s.size(); ++i) {
      const char c = s[i];
      if (c == '/') {
        if (seen_slash || !digit_before) return false;
        seen_slash = true;
      } else if (c >= '0' && c <= '9') {
        (seen_slash ? digit_after : digit_before) = true;
      } else {
        return false;
      }
    }
    return digit_before && (!seen_slash || digit_after);
  };
  if (is_rational_literal(lambda_text)) {
    Rational r;
    try {
      r = Rational(lambda_text);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "cannot parse lambda '" + lambda_text + "'");
    }
    return make_params(d, r);
  }
  double v = 0;
  const char* b = lambda_text.data();
  const char* e = b + lambda_text.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw Error(ErrorCode::ParseError, "cannot parse lambda '" + lambda_text + "'");
  return make_params(d, v);
}

/// Transition kernel of the distance-to-root chain on the nonnegative
/// integers: from 0 the walk moves to 1 with probability one; from level
/// x >= 1 it moves down with probability lambda/(d-1+lambda) and up with the
/// complementary probability.
template <class Real>
struct RadialKernel {
  Real p_origin_up;
  Real p_down;
  Real p_up;
};

template <class Real>
RadialKernel<Real> radial_kernel(const WalkParams& params) {
  const Real lambda = params.template lambda_as<Real>();
  const Real denom = Real(params.degree() - 1) + lambda;
  return RadialKernel<Real>{Real(1), lambda / denom, Real(params.degree() - 1) / denom};
}

/// One row of the full tree kernel, grouped by symmetry: a vertex at the
/// given depth, the probability of the edge toward the root, and the common
/// probability of each child edge.
template <class Real>
struct TreeKernelRow {
  int vertex_depth;
  Real prob_toward_root;
  Real prob_per_child;
  int child_count;
};

template <class Real>
TreeKernelRow<Real> tree_kernel_row(const WalkParams& params, int depth) {
  if (depth < 0) throw Error(ErrorCode::DomainError, "depth must be nonnegative");
  const int d = params.degree();
  if (depth == 0) return {0, Real(0), Real(1) / Real(d), d};
  const Real lambda = params.template lambda_as<Real>();
  const Real denom = Real(d - 1) + lambda;
  return {depth, lambda / denom, Real(1) / denom, d - 1};
}

/// Number of vertices at distance n from the root: 1, d, d(d-1), ...
inline BigInt sphere_size(const WalkParams& params, int n) {
  if (n < 0) throw Error(ErrorCode::DomainError, "n must be nonnegative");
  if (n == 0) return 1;
  BigInt r = params.degree();
  for (int i = 1; i < n; ++i) r *= params.degree() - 1;
  return r;
}

/// Limit of sphere_size(n)^(1/n); equals d-1 on the d-regular tree.
inline double growth_rate(const WalkParams& params) { return params.degree() - 1; }

/// Bias threshold between transience and recurrence; equals d-1, and so
/// coincides with growth_rate.
inline double critical_lambda(const WalkParams& params) { return params.degree() - 1; }

}  // namespace treewalk
