#pragma once

#include <algorithm>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "treewalk/arith.hpp"
#include "treewalk/model.hpp"

namespace treewalk {

enum class TableKind { StepReturn, FirstReturn };

/// Return probabilities indexed by step count. values[n] is p^(n)(o,o) for
/// StepReturn and the probability of a first return at step n for
/// FirstReturn. Odd entries are zero; the walk has period two.
///
/// Real = Rational gives exact values; Real = ScaledFloat carries a
/// per-entry power-of-two exponent (ScaledFloat::exponent) so entries survive
/// far below double underflow.
template <class Real>
struct ProbTable {
  TableKind kind;
  int max_step;
  std::vector<Real> values;  // size max_step + 1
};

inline constexpr int kDefaultRationalCap = 2000;

template <class Real>
Real real_from_bigint(const BigInt& v) {
  if constexpr (std::is_same_v<Real, Rational>) {
    return Rational(v);
  } else if constexpr (std::is_same_v<Real, ScaledFloat>) {
    return ScaledFloat::from_bigint(v);
  } else {
    return ScaledFloat::from_bigint(v).to_double();
  }
}

template <class Real>
Real pow_n(Real base, long e) {
  Real r(1);
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

namespace detail {

template <class Real>
void check_capacity(int max_step, int rational_cap) {
  if constexpr (std::is_same_v<Real, Rational>) {
    if (max_step > rational_cap)
      throw Error(ErrorCode::CapacityExceeded,
                  "rational mode capped at max_step = " + std::to_string(rational_cap));
  }
}

// Forward DP over the radial chain. The state at time t is the probability
// vector over levels 0..t with parity t mod 2; levels above max_step - t are
// dropped, which is exact because such mass cannot reach level 0 within the
// table horizon. record_first_return switches the table to first-return
// semantics: level-0 mass is recorded and then zeroed at every intermediate
// step, so the same kernel drives both tables.
template <class Real>
ProbTable<Real> run_radial_dp(const WalkParams& params, int max_step, bool record_first_return,
                              int rational_cap) {
  check_capacity<Real>(max_step, rational_cap);
  const auto kernel = radial_kernel<Real>(params);
  const Real zero(0);

  ProbTable<Real> table{record_first_return ? TableKind::FirstReturn : TableKind::StepReturn,
                        max_step, std::vector<Real>(static_cast<std::size_t>(max_step) + 1, zero)};
  if (!record_first_return) table.values[0] = Real(1);
  if (max_step == 0) return table;

  std::vector<Real> cur(static_cast<std::size_t>(max_step) + 2, zero);
  std::vector<Real> nxt(static_cast<std::size_t>(max_step) + 2, zero);
  cur[0] = Real(1);
  int lo = 0, hi = 0;  // occupied band at the previous step

  for (int t = 1; t <= max_step; ++t) {
    const int cap = max_step - t;             // levels above cap cannot reach 0 in time
    const int up_hi = std::min(hi + 1, cap);  // highest up-move target kept
    const int clear_hi = std::min(hi + 1, max_step + 1);
    for (int lvl = 0; lvl <= clear_hi; ++lvl) nxt[lvl] = zero;
    for (int lvl = lo; lvl <= hi; lvl += 2) {
      if (cur[lvl] == zero) continue;
      if (lvl == 0) {
        if (1 <= up_hi) nxt[1] += cur[0];
      } else {
        nxt[lvl - 1] += cur[lvl] * kernel.p_down;  // lvl-1 <= cap always holds
        if (lvl + 1 <= up_hi) nxt[lvl + 1] += cur[lvl] * kernel.p_up;
      }
    }
    if (t % 2 == 0) {
      table.values[t] = nxt[0];
      if (record_first_return) nxt[0] = zero;
    }
    cur.swap(nxt);
    lo = t % 2;
    hi = std::max(up_hi, lo);
    if ((hi - lo) % 2 != 0) --hi;
  }
  return table;
}

}  // namespace detail

/// p^(n)(o,o) for n = 0..max_step by forward DP on the radial chain.
template <class Real>
ProbTable<Real> pn_return_dp(const WalkParams& params, int max_step,
                             int rational_cap = kDefaultRationalCap) {
  if (max_step < 0) throw Error(ErrorCode::DomainError, "max_step must be nonnegative");
  return detail::run_radial_dp<Real>(params, max_step, false, rational_cap);
}

/// First-return-time distribution: values[n] = P(first return to the root at
/// step n), for n = 0..max_step.
template <class Real>
ProbTable<Real> first_return_dp(const WalkParams& params, int max_step,
                                int rational_cap = kDefaultRationalCap) {
  if (max_step < 2) throw Error(ErrorCode::DomainError, "max_step must be at least 2");
  return detail::run_radial_dp<Real>(params, max_step, true, rational_cap);
}

/// k-th Catalan number, exact.
inline BigInt catalan_number(int k) {
  if (k < 0) throw Error(ErrorCode::DomainError, "k must be nonnegative");
  BigInt c = 1;
  for (int i = 1; i <= k; ++i) {
    c *= 2 * (2 * i - 1);
    c /= i + 1;  // exact: Catalan numbers are integers
  }
  return c;
}

/// Closed form for the 2n-step first-return probability: the walk makes one
/// forced step out, n-1 further up-steps, n down-steps, and the excursion
/// shape is counted by the (n-1)-st Catalan number.
template <class Real>
Real first_return_catalan(const WalkParams& params, int n) {
  if (n < 1) throw Error(ErrorCode::DomainError, "n must be positive");
  if constexpr (std::is_same_v<Real, double>) {
    return first_return_catalan<ScaledFloat>(params, n).to_double();
  } else {
    const Real lambda = params.template lambda_as<Real>();
    const Real denom = Real(params.degree() - 1) + lambda;
    const Real up = Real(params.degree() - 1) / denom;
    const Real down = lambda / denom;
    return real_from_bigint<Real>(catalan_number(n - 1)) * pow_n(up, n - 1) * pow_n(down, n);
  }
}

/// Renewal convolution: rebuilds the n-step return table from a first-return
/// table via p[n] = sum_k f[k] p[n-k], p[0] = 1.
template <class Real>
ProbTable<Real> convolve_first_return(const ProbTable<Real>& f) {
  if (f.kind != TableKind::FirstReturn)
    throw Error(ErrorCode::DomainError, "convolve_first_return expects a first-return table");
  const Real zero(0);
  ProbTable<Real> p{TableKind::StepReturn, f.max_step,
                    std::vector<Real>(static_cast<std::size_t>(f.max_step) + 1, zero)};
  p.values[0] = Real(1);
  for (int n = 2; n <= f.max_step; n += 2) {
    Real acc = zero;
    for (int k = 2; k <= n; k += 2) acc += f.values[k] * p.values[n - k];
    p.values[n] = acc;
  }
  return p;
}

/// Partial sum of a table up to and including max_n.
template <class Real>
Real table_partial_sum(const ProbTable<Real>& t, int max_n) {
  Real acc(0);
  for (int n = 0; n <= max_n && n <= t.max_step; ++n) acc += t.values[n];
  return acc;
}

}  // namespace treewalk
