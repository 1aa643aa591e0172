#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "treewalk/arith.hpp"
#include "treewalk/model.hpp"

namespace treewalk {

/// RNG contract, pinned because fixed seeds appear in regression baselines:
/// per-path stream k is a splitmix64 sequence whose initial state is
/// mix64(master_seed + (k+1) * 0x9e3779b97f4a7c15). Identical configs give
/// bit-identical results at any thread count; paths own disjoint streams and
/// reductions are integer sums.
inline constexpr const char* kRngId = "splitmix64/v1";

namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline SplitMix64 path_stream(std::uint64_t master_seed, std::uint64_t path_index) {
  return SplitMix64(mix64(master_seed + (path_index + 1) * 0x9e3779b97f4a7c15ull));
}

}  // namespace rng

struct SimConfig {
  WalkParams params;
  std::uint64_t num_paths;
  std::int64_t max_steps;  // truncation horizon, even
  std::uint64_t master_seed;
};

inline SimConfig make_sim_config(const WalkParams& params, std::uint64_t num_paths,
                                 std::int64_t max_steps, std::uint64_t master_seed) {
  if (num_paths < 1) throw Error(ErrorCode::InvalidConfig, "num_paths must be at least 1");
  if (max_steps < 2 || max_steps % 2 != 0)
    throw Error(ErrorCode::InvalidConfig, "max_steps must be even and at least 2");
  return SimConfig{params, num_paths, max_steps, master_seed};
}

struct McEstimate {
  double estimate;
  double std_error;
  std::uint64_t num_paths;
  double truncated_fraction;  // paths with no return within the horizon
  std::uint64_t seed;
};

struct FirstReturnSample {
  /// histogram[t] = number of paths whose first return happened at step t.
  std::vector<std::uint64_t> histogram;
  /// Estimate of P(tau+ <= max_steps); a lower bound on the total return
  /// probability, short by at most rho^max_steps in the transient regime.
  McEstimate return_within_horizon;
};

namespace detail {

inline unsigned& max_workers_override() {
  static unsigned value = 0;  // 0 = pick automatically
  return value;
}

inline unsigned worker_count(std::uint64_t num_paths) {
  unsigned hw = max_workers_override();
  if (hw == 0) hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const std::uint64_t per_thread_floor = 4096;
  const std::uint64_t useful = (num_paths + per_thread_floor - 1) / per_thread_floor;
  return static_cast<unsigned>(std::min<std::uint64_t>(hw, useful));
}

template <class Body>
void run_paths(std::uint64_t num_paths, const Body& body) {
  const unsigned workers = worker_count(num_paths);
  if (workers <= 1) {
    body(0, num_paths, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::uint64_t chunk = num_paths / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = w * chunk;
    const std::uint64_t end = (w + 1 == workers) ? num_paths : begin + chunk;
    pool.emplace_back([=, &body] { body(begin, end, w); });
  }
  for (auto& th : pool) th.join();
}

inline McEstimate binomial_estimate(std::uint64_t hits, std::uint64_t num_paths,
                                    std::uint64_t truncated, std::uint64_t seed) {
  const double p = static_cast<double>(hits) / static_cast<double>(num_paths);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(num_paths));
  const double trunc = static_cast<double>(truncated) / static_cast<double>(num_paths);
  return McEstimate{p, se, num_paths, trunc, seed};
}

}  // namespace detail

/// Cap the simulation thread count (0 restores automatic selection). Results
/// are identical at any setting; this exists for benchmarking and for tests
/// that prove it.
inline void set_max_workers(unsigned n) { detail::max_workers_override() = n; }

/// Simulate first returns of the radial chain. Each path starts at the root,
/// takes the forced step to level 1, then follows the radial kernel until it
/// hits the root again or the horizon runs out. A path is also abandoned as
/// soon as its level exceeds the steps remaining, which cannot change any
/// within-horizon outcome.
inline FirstReturnSample simulate_first_return(const SimConfig& config) {
  const double p_down = radial_kernel<double>(config.params).p_down;
  const std::int64_t horizon = config.max_steps;
  const unsigned workers = detail::worker_count(config.num_paths);

  std::vector<std::vector<std::uint64_t>> hist(workers,
                                               std::vector<std::uint64_t>(horizon + 1, 0));
  std::vector<std::uint64_t> returned(workers, 0);

  detail::run_paths(config.num_paths, [&](std::uint64_t begin, std::uint64_t end, unsigned w) {
    auto& h = hist[w];
    std::uint64_t r = 0;
    for (std::uint64_t path = begin; path < end; ++path) {
      auto gen = rng::path_stream(config.master_seed, path);
      std::int64_t level = 1;  // after the forced first step
      for (std::int64_t t = 2; t <= horizon; ++t) {
        level += (gen.next_unit() < p_down) ? -1 : +1;
        if (level == 0) {
          ++h[t];
          ++r;
          break;
        }
        if (level > horizon - t) break;  // cannot return within the horizon
      }
    }
    returned[w] = r;
  });

  FirstReturnSample out;
  out.histogram.assign(horizon + 1, 0);
  std::uint64_t total_returned = 0;
  for (unsigned w = 0; w < workers; ++w) {
    total_returned += returned[w];
    for (std::int64_t t = 0; t <= horizon; ++t) out.histogram[t] += hist[w][t];
  }
  out.return_within_horizon = detail::binomial_estimate(
      total_returned, config.num_paths, config.num_paths - total_returned, config.master_seed);
  return out;
}

/// Fraction of paths sitting at the root at step n, with binomial standard
/// error. n must be even (odd-step returns are impossible) and within the
/// horizon.
inline McEstimate estimate_pn_return(const SimConfig& config, std::int64_t n) {
  if (n < 2 || n % 2 != 0)
    throw Error(ErrorCode::DomainError, "n must be even and at least 2");
  if (n > config.max_steps)
    throw Error(ErrorCode::DomainError, "n exceeds the configured horizon");
  const double p_down = radial_kernel<double>(config.params).p_down;
  const unsigned workers = detail::worker_count(config.num_paths);
  std::vector<std::uint64_t> hits(workers, 0);

  detail::run_paths(config.num_paths, [&](std::uint64_t begin, std::uint64_t end, unsigned w) {
    std::uint64_t h = 0;
    for (std::uint64_t path = begin; path < end; ++path) {
      auto gen = rng::path_stream(config.master_seed, path);
      std::int64_t level = 0;
      for (std::int64_t t = 1; t <= n; ++t) {
        if (level == 0) {
          level = 1;  // forced move away from the root
        } else {
          level += (gen.next_unit() < p_down) ? -1 : +1;
        }
      }
      if (level == 0) ++h;
    }
    hits[w] = h;
  });

  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return detail::binomial_estimate(total, config.num_paths, 0, config.master_seed);
}

}  // namespace treewalk
