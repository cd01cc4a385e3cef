#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "kss/conditional.hpp"
#include "kss/errors.hpp"
#include "kss/json_io.hpp"
#include "kss/moments.hpp"
#include "kss/series.hpp"
#include "kss/zerocount.hpp"

namespace kss::cli {
namespace {

constexpr int kReportFormat = 1;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> threads;
  std::optional<int> trials;
  std::optional<int> starts;
  std::optional<double> residual_tol;
  std::optional<std::uint64_t> samples;
  std::optional<int> nodes;
};

struct Table {
  std::string file;
  std::string header;
  std::vector<std::string> rows;
};

struct Outcome {
  Json result;
  std::optional<Table> table;
  bool flagged = false;  // saturation or degeneracy
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) {
    if (!s.empty()) s += ',';
    s += c;
  }
  return s;
}

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
    return j;
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": " + e.what());
  }
}

// Reads config[key], writing `fallback` into the config when absent so the
// embedded config is complete.
template <typename T>
T take(Json& config, const char* key, T fallback) {
  if (!config.contains(key)) config[key] = fallback;
  try {
    return config[key].get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string(key) + ": wrong type");
  }
}

int positive(Json& config, const char* key, int fallback) {
  const int v = take<int>(config, key, fallback);
  if (v < 1) throw ConfigError(std::string(key) + ": must be >= 1");
  return v;
}

SystemSpec system_of(const Json& config) {
  if (!config.contains("system")) throw ConfigError("system: missing");
  return system_spec_from_json(config["system"]);
}

QuadratureRule quadrature_of(Json& config) {
  if (!config.contains("quadrature")) config["quadrature"] = Json::object();
  Json& q = config["quadrature"];
  if (!q.is_object()) throw ConfigError("quadrature: expected an object");
  QuadratureRule rule;
  rule.nodes = positive(q, "nodes", rule.nodes);
  const auto sub = take<std::string>(q, "substitution", "cosine");
  if (sub == "cosine") {
    rule.substitution = Substitution::kCosine;
  } else if (sub == "none") {
    rule.substitution = Substitution::kNone;
  } else {
    throw ConfigError("quadrature.substitution: expected \"cosine\" or \"none\"");
  }
  rule.adaptive = take<bool>(q, "adaptive", rule.adaptive);
  rule.rel_tol = take<double>(q, "rel_tol", rule.rel_tol);
  rule.max_nodes = positive(q, "max_nodes", rule.max_nodes);
  return rule;
}

std::pair<double, double> interval_of(Json& config) {
  const auto iv = take<std::vector<double>>(config, "interval", {-1.0, 1.0});
  if (iv.size() != 2) throw ConfigError("interval: expected [lo, hi]");
  return {iv[0], iv[1]};
}

Outcome cmd_expect(Json& config, int) {
  const SystemSpec spec = system_of(config);
  return {to_json(expected_zero_measure(spec)), std::nullopt, false};
}

Outcome cmd_var_bound(Json& config, int) {
  const SystemSpec spec = system_of(config);
  const QuadratureRule rule = quadrature_of(config);
  const auto [lo, hi] = interval_of(config);
  VarianceBoundOptions opts;
  opts.phi_as_one = take<bool>(config, "phi_as_one", false);
  const VarianceBound bound = variance_upper_bound(spec, lo, hi, rule, opts);
  const double ez = expected_zero_measure(spec).first_moment;

  Table table{"integrand.csv", "r,integrand,phi,density", {}};
  for (const auto& [node, value] : bound.quadrature.samples) {
    table.rows.push_back(join({num(node.overlap.r), num(value),
                               num(phi(spec, node.overlap)),
                               num(density_at_zero(spec.spectra(), node.overlap))}));
  }
  Json result = {{"first_moment", ez},
                 {"bound", bound.value},
                 {"bound_over_first_moment_sq", bound.value / (ez * ez)},
                 {"nodes", bound.quadrature.nodes},
                 {"converged", bound.quadrature.converged}};
  return {result, table, false};
}

Outcome cmd_kr2(Json& config, int threads) {
  const SystemSpec spec = system_of(config);
  QuadratureRule rule = quadrature_of(config);
  const auto [lo, hi] = interval_of(config);
  const auto samples = take<std::uint64_t>(config, "samples_per_node", 10000);
  const auto seed = config["seed"].get<std::uint64_t>();
  const KacRiceReport report = second_moment_mc(spec, rule, samples, seed, threads, lo, hi);

  Table table{"nodes.csv", "r,D_hat,D_se,integrand,cumulative", {}};
  for (const auto& n : report.nodes) {
    table.rows.push_back(join({num(n.r), num(n.d_hat), num(n.d_se),
                               num(n.integrand), num(n.cumulative)}));
  }
  return {to_json(report), table, false};
}

Table trial_table(const EmpiricalMoments& m) {
  Table table{"trials.csv", "trial,count_or_measure,saturated", {}};
  for (std::size_t t = 0; t < m.values.size(); ++t) {
    table.rows.push_back(join({std::to_string(t), num(m.values[t]),
                               m.saturated_flags[t] ? "1" : "0"}));
  }
  return table;
}

EmpiricalOptions empirical_options(Json& config, int threads) {
  EmpiricalOptions opts;
  opts.n_starts = take<int>(config, "starts", 0);
  opts.residual_tol = take<double>(config, "residual_tol", opts.residual_tol);
  opts.crofton_slices = positive(config, "slices", opts.crofton_slices);
  opts.threads = threads;
  return opts;
}

Outcome moments_outcome(const EmpiricalMoments& m) {
  return {to_json(m), trial_table(m), m.saturated > 0 || m.degenerate > 0};
}

Outcome cmd_mc(Json& config, int threads) {
  const SystemSpec spec = system_of(config);
  const int trials = positive(config, "trials", 1000);
  const EmpiricalOptions opts = empirical_options(config, threads);
  return moments_outcome(
      empirical_moments(spec, trials, config["seed"].get<std::uint64_t>(), opts));
}

Outcome cmd_count(Json& config, int threads) {
  if (config.contains("polynomial")) {
    // A fixed system: count its zeros once.
    const PolynomialSystem system = polynomial_system_from_json(config["polynomial"]);
    if (system.equation_count() != system.sphere_dim()) {
      throw DomainError("count: needs K = N; use crofton for K < N");
    }
    SphereCountOptions opts;
    opts.n_starts = take<int>(config, "starts", 0);
    opts.residual_tol = take<double>(config, "residual_tol", opts.residual_tol);
    opts.seed = config["seed"].get<std::uint64_t>();
    if (opts.n_starts == 0) opts.n_starts = 500;
    const ZeroCountResult r = system.sphere_dim() == 1 ? count_zeros_circle(system)
                                                        : count_zeros_sphere(system, opts);
    Table table{"trials.csv", "trial,count_or_measure,saturated", {}};
    table.rows.push_back(join({"0", num(r.measure), r.saturated ? "1" : "0"}));
    return {to_json(r, true), table, r.saturated || r.degenerate};
  }
  const SystemSpec spec = system_of(config);
  if (spec.equation_count() != spec.sphere_dim()) {
    throw DomainError("count: needs K = N; use crofton for K < N");
  }
  const int trials = positive(config, "trials", 1);
  if (trials == 1) {
    // Single draw: report the roots as well.
    const auto seed = config["seed"].get<std::uint64_t>();
    const PolynomialSystem system = sample_system(spec, seed);
    SphereCountOptions opts;
    opts.n_starts = take<int>(config, "starts", 0);
    opts.residual_tol = take<double>(config, "residual_tol", opts.residual_tol);
    opts.expected = expected_zero_measure(spec).first_moment;
    opts.seed = substream_seed(seed, 1u << 20);
    const ZeroCountResult r = spec.sphere_dim() == 1 ? count_zeros_circle(system)
                                                      : count_zeros_sphere(system, opts);
    Table table{"trials.csv", "trial,count_or_measure,saturated", {}};
    table.rows.push_back(join({"0", num(r.measure), r.saturated ? "1" : "0"}));
    Json result = to_json(r, true);
    result["expected"] = opts.expected;
    return {result, table, r.saturated || r.degenerate};
  }
  const EmpiricalOptions opts = empirical_options(config, threads);
  return moments_outcome(
      empirical_moments(spec, trials, config["seed"].get<std::uint64_t>(), opts));
}

Outcome cmd_crofton(Json& config, int threads) {
  const SystemSpec spec = system_of(config);
  if (spec.equation_count() >= spec.sphere_dim()) {
    throw DomainError("crofton: needs K < N; use count for K = N");
  }
  const int trials = positive(config, "trials", 100);
  const EmpiricalOptions opts = empirical_options(config, threads);
  return moments_outcome(
      empirical_moments(spec, trials, config["seed"].get<std::uint64_t>(), opts));
}

Outcome cmd_series_check(Json& config, int) {
  const int trials = positive(config, "trials", 100);
  const int n_max = positive(config, "n_max", 3);
  const int degree_max = positive(config, "degree_max", 3);
  const auto seed = config["seed"].get<std::uint64_t>();

  Table table{"trials.csv", "trial,min_coefficient", {}};
  double overall_min = std::numeric_limits<double>::infinity();
  double worst_derivative = 0.0;
  for (int t = 0; t < trials; ++t) {
    Engine rng = make_engine(seed, static_cast<std::uint64_t>(t));
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n_max));
    const int d = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(degree_max));
    const BlockPairCovariance bpc = random_block_pair(n, rng);
    const PolyObservable f = random_observable(n, d, rng);
    const auto alpha = lambda_series(bpc, f);
    const double lowest = *std::min_element(alpha.begin(), alpha.end());
    overall_min = std::min(overall_min, lowest);
    table.rows.push_back(join({std::to_string(t), num(lowest)}));

    // Same family with Sigma1 = 0, where the derivative formula applies.
    const BlockPairCovariance reduced(bpc.sigma0(), Eigen::MatrixXd::Zero(n, n), bpc.sigma());
    const auto beta = lambda_series(reduced, f);
    double factorial = 1.0;
    for (int k = 0; k <= 3 && k < static_cast<int>(beta.size()); ++k) {
      if (k > 0) factorial *= k;
      const double formula = derivative_formula(reduced, f, k);
      const double rel = std::abs(factorial * beta[static_cast<std::size_t>(k)] - formula) /
                         std::max(1.0, std::abs(formula));
      worst_derivative = std::max(worst_derivative, rel);
    }
  }
  Json result = {{"trials", trials},
                 {"min_coefficient", overall_min},
                 {"nonnegative", overall_min >= -1e-8},
                 {"max_derivative_rel_error", worst_derivative}};
  return {result, table, false};
}

Outcome cmd_blowup(Json& config, int) {
  const int p = positive(config, "p", 10000);
  const int n = positive(config, "N", 8);
  const int grid = positive(config, "grid", 200);
  const auto points = blowup_diagnostic(p, n, grid);
  Table table{"grid.csv", "r,m1,l,lower_bound,holds", {}};
  bool all = true;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& pt : points) {
    all = all && pt.holds;
    worst = std::min(worst, pt.m1 * pt.l / pt.lower_bound);
    table.rows.push_back(join({num(pt.r), num(pt.m1), num(pt.l), num(pt.lower_bound),
                               pt.holds ? "1" : "0"}));
  }
  Json result = {{"p", p}, {"N", n}, {"grid_points", grid},
                 {"holds_everywhere", all}, {"min_ratio", worst}};
  return {result, table, false};
}

using Handler = Outcome (*)(Json&, int);

struct Command {
  const char* name;
  const char* help;
  Handler handler;
  bool needs_config;
};

const Command kCommands[] = {
    {"expect", "closed-form expected zero count or measure", cmd_expect, true},
    {"var-bound", "Cauchy-Schwarz upper bound on the second moment", cmd_var_bound, true},
    {"kr2", "second moment by Kac-Rice quadrature with Monte Carlo D(r)", cmd_kr2, true},
    {"mc", "empirical moments of Z over sampled systems", cmd_mc, true},
    {"count", "count zeros of sampled systems (K = N)", cmd_count, true},
    {"crofton", "Crofton estimates of the zero-set measure (K < N)", cmd_crofton, true},
    {"series-check", "nonnegativity of the Gaussian pair power series", cmd_series_check, false},
    {"blowup", "growth diagnostic for the blow-up spectrum", cmd_blowup, false},
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int execute(const Command& cmd, const Flags& flags, std::ostream& out) {
  Json config = flags.config_path.empty() ? Json::object() : load_config(flags.config_path);

  std::uint64_t seed = 0;
  if (flags.seed) {
    seed = *flags.seed;
  } else if (const char* env = std::getenv("KSS_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("KSS_SEED: not an unsigned integer: ") + env);
    }
  } else if (config.contains("seed")) {
    seed = take<std::uint64_t>(config, "seed", 0);
  }
  config["seed"] = seed;

  int threads = 1;
  if (config.contains("threads")) threads = take<int>(config, "threads", 1);
  config.erase("threads");
  if (flags.threads) threads = *flags.threads;
  if (threads <= 0) threads = default_threads();

  if (flags.trials) config["trials"] = *flags.trials;
  if (flags.starts) config["starts"] = *flags.starts;
  if (flags.residual_tol) config["residual_tol"] = *flags.residual_tol;
  if (flags.samples) config["samples_per_node"] = *flags.samples;
  if (flags.nodes) config["quadrature"]["nodes"] = *flags.nodes;

  const auto start = std::chrono::steady_clock::now();
  Outcome outcome = cmd.handler(config, threads);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json report = {{"format", kReportFormat},
                 {"version", KSS_VERSION},
                 {"command", cmd.name},
                 {"config", config},
                 {"config_hash", config_hash(config)},
                 {"seed", seed},
                 {"threads", threads},
                 {"wall_time_s", wall},
                 {"flagged", outcome.flagged},
                 {"result", outcome.result}};

  if (flags.out_dir.empty()) {
    out << report.dump(2) << '\n';
  } else {
    const std::filesystem::path dir(flags.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", report.dump(2) + "\n");
    if (outcome.table) {
      std::string csv = outcome.table->header + "\n";
      for (const auto& row : outcome.table->rows) csv += row + "\n";
      write_file(dir / outcome.table->file, csv);
    }
  }
  return outcome.flagged ? kDiagnostics : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random polynomial systems on spheres: moments, Kac-Rice, zero counts"};
  app.require_subcommand(1);
  Flags flags;
  const Command* chosen = nullptr;
  for (const auto& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    auto* config = sub->add_option("--config", flags.config_path, "experiment config (JSON)")
                       ->check(CLI::ExistingFile);
    if (cmd.needs_config) config->required();
    sub->add_option("--seed", flags.seed, "root seed (overrides KSS_SEED and the config)");
    sub->add_option("--out", flags.out_dir, "output directory for report.json and CSV");
    sub->add_option("--threads", flags.threads, "worker threads (0: all cores)");
    sub->add_option("--trials", flags.trials, "number of trials");
    sub->add_option("--starts", flags.starts, "Newton starts per system (0: default)");
    sub->add_option("--residual-tol", flags.residual_tol, "root residual tolerance");
    sub->add_option("--samples", flags.samples, "Monte Carlo samples per quadrature node");
    sub->add_option("--nodes", flags.nodes, "quadrature nodes");
    sub->callback([&chosen, &cmd] { chosen = &cmd; });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "kss: " << e.what() << '\n';
    return kConfig;
  }

  try {
    return execute(*chosen, flags, out);
  } catch (const ConfigError& e) {
    err << "kss " << chosen->name << ": config error: " << e.what() << '\n';
    return kConfig;
  } catch (const Json::exception& e) {
    err << "kss " << chosen->name << ": config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    err << "kss " << chosen->name << ": domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const DiagnosticsError& e) {
    err << "kss " << chosen->name << ": diagnostics: " << e.what() << '\n';
    return kDiagnostics;
  } catch (const std::exception& e) {
    err << "kss " << chosen->name << ": error: " << e.what() << '\n';
    return kDomain;
  }
}

}  // namespace kss::cli
