// treewalk: exact, asymptotic, and Monte Carlo return probabilities of
// lambda-biased random walks on d-regular trees, emitted as CSV or JSON
// tables.
//
// Exit codes: 0 success, 2 usage error, 3 rational-mode capacity exceeded,
// 4 internal cross-check failure.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treewalk/treewalk.hpp"

namespace {

using namespace treewalk;

constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitCrossCheck = 4;

struct CommonFlags {
  int d = 3;
  std::string lambda = "1";
  std::string format = "csv";
  std::string precision = "rational";
  std::string out_path;  // empty = stdout
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, const std::string& precision_help =
                                                        "arithmetic backend") {
  cmd->add_option("--d", flags.d, "vertex degree of the tree (>= 2)")->required();
  cmd->add_option("--format", flags.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--precision", flags.precision, precision_help)
      ->check(CLI::IsMember({"rational", "float"}))
      ->capture_default_str();
  cmd->add_option("--out", flags.out_path, "write the table here instead of stdout");
  cmd->add_flag("--timing", flags.timing, "include wall-clock runtime in the metadata");
}

void add_lambda(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--lambda", flags.lambda, "bias: rational like 1/2 or 2, or decimal like 0.5")
      ->required();
}

constexpr const char* kFloatOnlyPrecisionHelp = "accepted for symmetry; this table is always float";

// For the exact-arithmetic commands: a rational backend needs a rational bias.
WalkParams params_from(const CommonFlags& flags) {
  auto params = make_params(flags.d, flags.lambda);
  if (flags.precision == "rational" && !params.has_exact_lambda())
    throw Error(ErrorCode::RationalRequired,
                "--precision rational needs a rational --lambda (use num/den or an integer)");
  return params;
}

void echo_params(OutputRecord& rec, const WalkParams& params, const std::string& lambda_text) {
  rec.params.emplace_back("d", std::to_string(params.degree()));
  rec.params.emplace_back("lambda", lambda_text);
  rec.params.emplace_back("lambda_kind", params.has_exact_lambda() ? "rational" : "float");
  rec.params.emplace_back("regime", to_string(params.regime()));
}

void emit(const OutputRecord& rec, const CommonFlags& flags,
          std::chrono::steady_clock::time_point start) {
  OutputRecord final_rec = rec;
  if (flags.timing) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    final_rec.metadata.emplace_back("runtime_ms", std::to_string(elapsed.count()));
  }
  const std::string text = render(final_rec, flags.format);
  validate_record_text(text);  // every emission must pass the schema validator
  if (flags.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(flags.out_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ParseError, "cannot open " + flags.out_path);
    out << text;
  }
}

// ---------------------------------------------------------------------------
// exact: n, p_exact, f_exact, f_catalan, p_from_convolution
// ---------------------------------------------------------------------------

struct ExactFlags : CommonFlags {
  int n_max = 20;
  bool inject_corruption = false;
};

std::string cell_of(const Rational& v) { return format_rational(v); }
std::string cell_of(const ScaledFloat& v) { return format_double(v.to_double()); }

template <class Real>
OutputRecord exact_table(const WalkParams& params, const ExactFlags& flags) {
  auto p = pn_return_dp<Real>(params, flags.n_max);
  auto f = first_return_dp<Real>(params, std::max(flags.n_max, 2));
  if (flags.inject_corruption && f.max_step >= 2) f.values[2] += Real(1) / Real(64);
  auto conv = convolve_first_return(f);

  for (int n = 2; n <= flags.n_max; n += 2) {
    const Real catalan = first_return_catalan<Real>(params, n / 2);
    bool f_ok, p_ok;
    if constexpr (std::is_same_v<Real, Rational>) {
      f_ok = f.values[n] == catalan;
      p_ok = conv.values[n] == p.values[n];
    } else {
      f_ok = rel_diff(f.values[n], catalan) < 1e-10;
      p_ok = rel_diff(conv.values[n], p.values[n]) < 1e-10;
    }
    if (!f_ok)
      throw Error(ErrorCode::CrossCheckFailed,
                  "first-return DP disagrees with the Catalan closed form at n = " +
                      std::to_string(n));
    if (!p_ok)
      throw Error(ErrorCode::CrossCheckFailed,
                  "renewal convolution disagrees with the n-step DP at n = " + std::to_string(n));
  }

  OutputRecord rec;
  rec.command = "exact";
  rec.columns = {"n", "p_exact", "f_exact", "f_catalan", "p_from_convolution"};
  for (int n = 0; n <= flags.n_max; ++n) {
    const std::string fc =
        (n >= 2 && n % 2 == 0) ? cell_of(first_return_catalan<Real>(params, n / 2))
                               : cell_of(Real(0));
    rec.rows.push_back({std::to_string(n), cell_of(p.values[n]),
                        n >= 2 ? cell_of(f.values[n]) : cell_of(Real(0)), fc,
                        cell_of(conv.values[n])});
  }
  return rec;
}

int run_exact(const ExactFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  auto params = params_from(flags);
  if (flags.n_max < 0) throw CLI::ValidationError("--n-max must be nonnegative");
  OutputRecord rec = flags.precision == "rational"
                         ? exact_table<Rational>(params, flags)
                         : exact_table<ScaledFloat>(params, flags);
  echo_params(rec, params, flags.lambda);
  rec.metadata.emplace_back("precision", flags.precision);
  emit(rec, flags, start);
  return 0;
}

// ---------------------------------------------------------------------------
// series: n, f_coeff, p_coeff  (coefficients of U and G)
// ---------------------------------------------------------------------------

struct SeriesFlags : CommonFlags {
  int order = 20;
};

template <class Real>
OutputRecord series_table(const WalkParams& params, const SeriesFlags& flags) {
  auto u = series_u<Real>(params, flags.order);
  auto g = series_g<Real>(params, flags.order);
  if constexpr (std::is_same_v<Real, Rational>) {
    // coefficient-level cross-checks against the DP tables
    auto pdp = pn_return_dp<Rational>(params, flags.order);
    auto fdp = flags.order >= 2 ? first_return_dp<Rational>(params, flags.order)
                                : ProbTable<Rational>{TableKind::FirstReturn, 0, {Rational(0)}};
    for (int n = 0; n <= flags.order; ++n) {
      if (g.coefficients[n] != pdp.values[n])
        throw Error(ErrorCode::CrossCheckFailed,
                    "series coefficient disagrees with the DP at n = " + std::to_string(n));
      if (n >= 2 && n <= fdp.max_step && u.coefficients[n] != fdp.values[n])
        throw Error(ErrorCode::CrossCheckFailed,
                    "series coefficient disagrees with the first-return DP at n = " +
                        std::to_string(n));
    }
  }
  OutputRecord rec;
  rec.command = "series";
  rec.columns = {"n", "f_coeff", "p_coeff"};
  for (int n = 0; n <= flags.order; ++n)
    rec.rows.push_back({std::to_string(n), cell_of(u.coefficients[n]), cell_of(g.coefficients[n])});
  return rec;
}

int run_series(const SeriesFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  auto params = params_from(flags);
  if (flags.order < 0) throw CLI::ValidationError("--order must be nonnegative");
  OutputRecord rec = flags.precision == "rational" ? series_table<Rational>(params, flags)
                                                   : series_table<ScaledFloat>(params, flags);
  echo_params(rec, params, flags.lambda);
  rec.metadata.emplace_back("precision", flags.precision);
  emit(rec, flags, start);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep: lambda, rho, regime, return_prob
// ---------------------------------------------------------------------------

struct SweepFlags : CommonFlags {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int points = 2;
};

int run_sweep(const SweepFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  if (!(flags.lambda_min > 0) || !(flags.lambda_max > flags.lambda_min))
    throw CLI::ValidationError("need 0 < --lambda-min < --lambda-max");
  if (flags.points < 2) throw CLI::ValidationError("--points must be at least 2");

  OutputRecord rec;
  rec.command = "sweep";
  rec.columns = {"lambda", "rho", "regime", "return_prob"};
  for (int i = 0; i < flags.points; ++i) {
    const double lambda =
        flags.lambda_min +
        (flags.lambda_max - flags.lambda_min) * static_cast<double>(i) / (flags.points - 1);
    auto params = make_params(flags.d, lambda);
    rec.rows.push_back({format_double(lambda), format_double(spectral_radius(params)),
                        to_string(params.regime()), format_double(return_probability(params))});
  }
  rec.params.emplace_back("d", std::to_string(flags.d));
  rec.params.emplace_back("lambda", format_double(flags.lambda_min) + ".." +
                                        format_double(flags.lambda_max));
  rec.params.emplace_back("points", std::to_string(flags.points));
  rec.metadata.emplace_back("precision", "float");
  emit(rec, flags, start);
  return 0;
}

// ---------------------------------------------------------------------------
// asymptote: n, p_exact, p_asym, ratio_p, f_exact, f_asym, ratio_f
// ---------------------------------------------------------------------------

struct AsymptoteFlags : CommonFlags {
  std::vector<long> n_list;
};

int run_asymptote(const AsymptoteFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  auto params = make_params(flags.d, flags.lambda);
  if (flags.n_list.empty()) throw CLI::ValidationError("--n-list must not be empty");
  for (long n : flags.n_list)
    if (n < 1) throw CLI::ValidationError("--n-list entries must be positive");
  auto sorted = flags.n_list;
  std::sort(sorted.begin(), sorted.end());

  const bool p_covered = params.regime() != Regime::Recurrent;
  if (!p_covered)
    std::cerr << "warning: no p-asymptotic above the critical bias; "
                 "omitting p_asym and ratio_p columns\n";

  const long max_n = sorted.back();
  auto p_table = pn_return_dp<ScaledFloat>(params, static_cast<int>(2 * max_n));

  OutputRecord rec;
  rec.command = "asymptote";
  rec.columns = p_covered
                    ? std::vector<std::string>{"n", "p_exact", "p_asym", "ratio_p",
                                               "f_exact", "f_asym", "ratio_f"}
                    : std::vector<std::string>{"n", "p_exact", "f_exact", "f_asym", "ratio_f"};
  for (long n : sorted) {
    const ScaledFloat p_exact = p_table.values[2 * n];
    // exact Catalan value, evaluated in the log domain via the scaled floats
    const ScaledFloat f_exact = first_return_catalan<ScaledFloat>(params, static_cast<int>(n));
    const double ratio_f = std::exp(f_exact.log() - f_asymptotic_log(params, n));
    std::vector<std::string> row{std::to_string(n), format_double(p_exact.to_double())};
    if (p_covered) {
      const double ratio_p = std::exp(p_exact.log() - p_asymptotic_log(params, n));
      row.push_back(format_double(p_asymptotic(params, n)));
      row.push_back(format_double(ratio_p));
    }
    row.push_back(format_double(f_exact.to_double()));
    row.push_back(format_double(f_asymptotic(params, n)));
    row.push_back(format_double(ratio_f));
    rec.rows.push_back(std::move(row));
  }
  echo_params(rec, params, flags.lambda);
  rec.metadata.emplace_back("precision", "float");
  emit(rec, flags, start);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate: estimand, estimate, std_error, exact, z_score
// ---------------------------------------------------------------------------

struct SimulateFlags : CommonFlags {
  std::uint64_t paths = 100000;
  std::int64_t max_steps = 10000;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  auto params = make_params(flags.d, flags.lambda);
  const std::uint64_t seed = flags.seed ? *flags.seed : std::random_device{}();
  auto config = make_sim_config(params, flags.paths, flags.max_steps, seed);

  auto sample = simulate_first_return(config);
  const auto& ret = sample.return_within_horizon;

  OutputRecord rec;
  rec.command = "simulate";
  rec.columns = {"estimand", "estimate", "std_error", "exact", "z_score"};
  auto add_row = [&rec](const std::string& name, double est, double se, double exact) {
    const double z = se > 0 ? (est - exact) / se : 0.0;
    rec.rows.push_back({name, format_double(est), format_double(se), format_double(exact),
                        format_double(z)});
  };
  add_row("return_prob", ret.estimate, ret.std_error, return_probability(params));
  for (int n = 1; n <= 4; ++n) {
    const double expected = first_return_catalan<double>(params, n);
    const double got =
        static_cast<double>(sample.histogram[2 * n]) / static_cast<double>(flags.paths);
    const double se =
        std::sqrt(expected * (1.0 - expected) / static_cast<double>(flags.paths));
    add_row("f[" + std::to_string(2 * n) + "]", got, se, expected);
  }
  for (std::int64_t n : {2, 4}) {
    auto est = estimate_pn_return(config, n);
    auto dp = pn_return_dp<ScaledFloat>(params, static_cast<int>(n));
    add_row("p[" + std::to_string(n) + "]", est.estimate, est.std_error,
            dp.values[n].to_double());
  }

  echo_params(rec, params, flags.lambda);
  rec.params.emplace_back("paths", std::to_string(flags.paths));
  rec.params.emplace_back("max_steps", std::to_string(flags.max_steps));
  rec.metadata.emplace_back("precision", "float");
  rec.metadata.emplace_back("seed", std::to_string(seed));
  rec.metadata.emplace_back("rng", kRngId);
  rec.metadata.emplace_back("truncated_fraction", format_double(ret.truncated_fraction));
  emit(rec, flags, start);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"return probabilities of biased random walks on regular trees"};
  app.require_subcommand(1);

  ExactFlags exact_flags;
  auto* exact_cmd = app.add_subcommand("exact", "exact n-step and first-return tables");
  add_common(exact_cmd, exact_flags);
  add_lambda(exact_cmd, exact_flags);
  exact_cmd->add_option("--n-max", exact_flags.n_max, "largest step count")->required();
  exact_cmd->add_flag("--inject-corruption", exact_flags.inject_corruption)->group("");

  SeriesFlags series_flags;
  auto* series_cmd =
      app.add_subcommand("series", "power-series coefficients of U and the Green function");
  add_common(series_cmd, series_flags);
  add_lambda(series_cmd, series_flags);
  series_cmd->add_option("--order", series_flags.order, "series truncation order")->required();

  SweepFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "spectral radius over a lambda grid");
  add_common(sweep_cmd, sweep_flags, kFloatOnlyPrecisionHelp);
  sweep_cmd->add_option("--lambda-min", sweep_flags.lambda_min, "grid start")->required();
  sweep_cmd->add_option("--lambda-max", sweep_flags.lambda_max, "grid end")->required();
  sweep_cmd->add_option("--points", sweep_flags.points, "grid size")->capture_default_str();

  AsymptoteFlags asym_flags;
  auto* asym_cmd =
      app.add_subcommand("asymptote", "exact versus asymptotic laws at selected n");
  add_common(asym_cmd, asym_flags, kFloatOnlyPrecisionHelp);
  add_lambda(asym_cmd, asym_flags);
  asym_cmd->add_option("--n-list", asym_flags.n_list, "half-step indices n of p^(2n)")
      ->required()
      ->delimiter(',');

  SimulateFlags sim_flags;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo cross-check of the radial chain");
  add_common(sim_cmd, sim_flags, kFloatOnlyPrecisionHelp);
  add_lambda(sim_cmd, sim_flags);
  sim_cmd->add_option("--paths", sim_flags.paths, "number of simulated paths")
      ->capture_default_str();
  sim_cmd->add_option("--max-steps", sim_flags.max_steps, "truncation horizon (even)")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim_flags.seed,
                      "master seed; omitted = random, echoed in metadata");

  try {
    app.parse(argc, argv);
    if (*exact_cmd) return run_exact(exact_flags);
    if (*series_cmd) return run_series(series_flags);
    if (*sweep_cmd) return run_sweep(sweep_flags);
    if (*asym_cmd) return run_asymptote(asym_flags);
    if (*sim_cmd) return run_simulate(sim_flags);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::CapacityExceeded:
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapacity;
      case ErrorCode::CrossCheckFailed:
        std::cerr << "error: " << e.what() << "\n";
        return kExitCrossCheck;
      default:
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
