#include "homog/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "homog/experiments.hpp"
#include "homog/expr.hpp"
#include "homog/field.hpp"
#include "homog/integrate.hpp"
#include "homog/scheme.hpp"
#include "homog/slope.hpp"
#include "homog/transport.hpp"
#include "homog/util.hpp"

namespace homog {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBoundViolated = 2;

// Applies config-file values to variables whose flags were not passed,
// so flags always win over the file.
class ConfigMerge {
 public:
  void bind(CLI::Option* opt, std::string key,
            std::function<void(const json&)> apply) {
    entries_.push_back({opt, std::move(key), std::move(apply)});
  }

  void run(const json& j) const {
    for (const auto& entry : entries_) {
      if (entry.opt != nullptr && entry.opt->count() > 0) continue;
      if (!j.contains(entry.key)) continue;
      try {
        entry.apply(j.at(entry.key));
      } catch (const json::exception& e) {
        throw std::runtime_error("config key \"" + entry.key +
                                 "\": " + e.what());
      }
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::string key;
    std::function<void(const json&)> apply;
  };
  std::vector<Entry> entries_;
};

template <typename T>
void bind_value(ConfigMerge& merge, CLI::Option* opt, const std::string& key,
                T& var) {
  merge.bind(opt, key, [&var](const json& v) { var = v.get<T>(); });
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
}

struct FieldOptions {
  std::string problem;
  std::vector<double> params;
  std::string expression;
  double alpha = -1;
  double beta = -1;
  double lipschitz = -1;
  std::vector<double> u_box;

  void add(CLI::App* cmd, ConfigMerge& merge) {
    auto* p = cmd->add_option("--problem", problem,
                              "Built-in field name (example1, example2, "
                              "example3, constant, shifted_cosine)");
    auto* pr = cmd->add_option("--params", params,
                               "Built-in parameters, comma separated")
                   ->delimiter(',');
    auto* f = cmd->add_option(
        "--f", expression,
        "Field expression in v, tau, u, t (needs --alpha, --beta, --L)");
    auto* a = cmd->add_option("--alpha", alpha,
                              "Declared Lipschitz constant in (u, t)");
    auto* b = cmd->add_option("--beta", beta, "Declared sup bound of |f|");
    auto* l = cmd->add_option("--L", lipschitz,
                              "Declared Lipschitz constant in v");
    auto* box = cmd->add_option("--u-box", u_box, "State box as lo,hi")
                    ->delimiter(',')
                    ->expected(2);
    bind_value(merge, p, "problem", problem);
    bind_value(merge, pr, "params", params);
    bind_value(merge, f, "f", expression);
    bind_value(merge, a, "alpha", alpha);
    bind_value(merge, b, "beta", beta);
    bind_value(merge, l, "L", lipschitz);
    bind_value(merge, box, "u_box", u_box);
  }

  ProblemField resolve() const {
    ProblemField field;
    if (!problem.empty()) {
      if (!expression.empty())
        throw std::runtime_error("--problem and --f are mutually exclusive");
      field = builtin_field(problem, params);
    } else if (!expression.empty()) {
      if (!(beta > 0.0) || alpha < 0.0 || lipschitz < 0.0)
        throw std::runtime_error(
            "expression fields need --alpha, --beta and --L");
      Interval box;
      if (!u_box.empty()) box = Interval{u_box[0], u_box[1]};
      field = expression_field(
          expr::parse(expression, {"v", "tau", "u", "t"}), alpha, beta,
          lipschitz, box);
      return field;
    } else {
      throw std::runtime_error("one of --problem or --f is required");
    }

    if (!u_box.empty()) {
      const Interval box{u_box[0], u_box[1]};
      if (!(box.lo < box.hi))
        throw std::runtime_error("--u-box needs lo < hi");
      const bool narrower =
          box.lo >= field.u_box.lo && box.hi <= field.u_box.hi;
      field.u_box = box;
      field.bounds_certified = field.bounds_certified && narrower;
    }
    return field;
  }
};

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  int jobs = 1;
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double quad_tol = 1e-11;

  void add(CLI::App* cmd, ConfigMerge& merge) {
    cmd->add_option("--config", config_path,
                    "JSON config file; flags override its values");
    auto* o = cmd->add_option("--out", out_path,
                              "Output file (default: standard output)");
    auto* j = cmd->add_option("--jobs", jobs, "Worker thread count")
                  ->check(CLI::PositiveNumber);
    auto* r = cmd->add_option("--rel-tol", rel_tol,
                              "Integrator relative tolerance");
    auto* a = cmd->add_option("--abs-tol", abs_tol,
                              "Integrator absolute tolerance");
    auto* q = cmd->add_option("--quad-tol", quad_tol,
                              "Quadrature tolerance per unit length");
    bind_value(merge, o, "out", out_path);
    bind_value(merge, j, "jobs", jobs);
    bind_value(merge, r, "rel_tol", rel_tol);
    bind_value(merge, a, "abs_tol", abs_tol);
    bind_value(merge, q, "quad_tol", quad_tol);
  }

  ToleranceSpec tol() const { return {rel_tol, abs_tol}; }
  QuadratureOptions quad() const {
    QuadratureOptions options;
    options.tol = quad_tol;
    return options;
  }
};

struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream* stream = nullptr;
};

Sink open_sink(const std::string& path, std::ostream& fallback) {
  Sink sink;
  if (path.empty()) {
    sink.stream = &fallback;
    return sink;
  }
  sink.file = std::make_unique<std::ofstream>(path);
  if (!*sink.file)
    throw std::runtime_error("cannot open output file " + path);
  sink.stream = sink.file.get();
  return sink;
}

std::vector<double> expand_grid(const std::vector<double>& spec,
                                const std::string& flag) {
  if (spec.size() != 3)
    throw std::runtime_error(flag + " expects lo,hi,count");
  const double lo = spec[0], hi = spec[1];
  const double count = spec[2];
  if (!(count >= 1.0) || count != std::floor(count))
    throw std::runtime_error(flag + " count must be a positive integer");
  const std::size_t n = static_cast<std::size_t>(count);
  if (n == 1) return {lo};
  if (!(hi > lo)) throw std::runtime_error(flag + " needs lo < hi");
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                       static_cast<double>(n - 1);
  return grid;
}

std::vector<std::pair<double, double>> parse_offsets(const std::string& raw) {
  std::vector<std::pair<double, double>> offsets;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("malformed offset \"" + item +
                               "\" (expected dv:ds)");
    offsets.emplace_back(std::stod(item.substr(0, colon)),
                         std::stod(item.substr(colon + 1)));
  }
  if (offsets.empty()) throw std::runtime_error("empty offset list");
  return offsets;
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------------------

struct ValidateOptions {
  FieldOptions field;
  CommonOptions common;
  std::size_t samples = 10000;
  std::uint64_t seed = 12345;
};

int run_validate(const ValidateOptions& o, std::ostream& fallback) {
  ProblemField field = o.field.resolve();
  const BoundsReport report = validate_field(field, o.samples, o.seed);
  const bool ok = bounds_ok(report, field);
  Sink sink = open_sink(o.common.out_path, fallback);
  std::ostream& out = *sink.stream;
  out << "source=" << field.source << '\n'
      << "samples=" << report.sample_count << '\n'
      << "seed=" << o.seed << '\n'
      << "declared_beta=" << format_double(field.beta) << '\n'
      << "sampled_beta=" << format_double(report.sampled_beta) << '\n'
      << "declared_alpha=" << format_double(field.alpha) << '\n'
      << "sampled_alpha=" << format_double(report.sampled_alpha) << '\n'
      << "lipschitz_v=" << format_double(field.lipschitz_v) << '\n'
      << "periodicity_defect=" << format_double(report.periodicity_defect)
      << '\n'
      << "monotonicity_defect=" << format_double(report.monotonicity_defect)
      << '\n'
      << "u_box=" << format_double(field.u_box.lo) << ','
      << format_double(field.u_box.hi) << '\n'
      << "xi=" << format_double(field.xi()) << '\n'
      << "xi_bar=" << format_double(field.xi_bar()) << '\n'
      << "bounds_ok=" << bool_str(ok) << '\n';
  return ok ? kExitOk : kExitBoundViolated;
}

struct SolveEpsOptions {
  FieldOptions field;
  CommonOptions common;
  double epsilon = 0;
  double u0 = 0;
  double t_end = 0;
};

int run_solve_eps(const SolveEpsOptions& o, std::ostream& fallback) {
  const ProblemField field = o.field.resolve();
  if (!(o.epsilon > 0.0) || !(o.epsilon < 1.0))
    throw std::runtime_error("--epsilon must lie in (0, 1)");
  if (!(o.t_end > 0.0)) throw std::runtime_error("--t-end must be positive");
  const Trajectory traj =
      solve_oscillatory(field, o.epsilon, o.u0, o.t_end, o.common.tol(), true);
  Sink sink = open_sink(o.common.out_path, fallback);
  write_csv(*sink.stream, traj);
  return kExitOk;
}

struct SlopeOptions {
  FieldOptions field;
  CommonOptions common;
  double u = 0;
  double t = 0;
  double horizon = 1e4;
  double v0 = 0;
  double total = 0;
  double window = 0;
  double stride = 0;
  std::vector<double> u_grid_spec;
  std::vector<double> t_grid_spec;
  std::string offsets_raw;
  std::vector<std::pair<double, double>> offsets;
  bool window_mode = false;
  bool grid_mode = false;
};

int run_slope(const SlopeOptions& o, std::ostream& fallback,
              std::ostream& err) {
  const ProblemField field = o.field.resolve();
  const ToleranceSpec tol = o.common.tol();
  const QuadratureOptions quad = o.common.quad();
  Sink sink = open_sink(o.common.out_path, fallback);
  std::ostream& out = *sink.stream;

  if (!o.offsets_raw.empty() || !o.offsets.empty()) {
    const auto offsets =
        o.offsets_raw.empty() ? o.offsets : parse_offsets(o.offsets_raw);
    const auto rows =
        modulus_probe(field, o.u, o.t, offsets, o.horizon, tol, quad);
    out << "dv,ds,lhs,slack,bound\n";
    bool violated = false;
    for (const auto& row : rows) {
      out << format_double(row.dv) << ',' << format_double(row.ds) << ','
          << format_double(row.lhs) << ',' << format_double(row.lhs_slack)
          << ',' << format_double(row.rhs_bound) << '\n';
      if (row.lhs - row.lhs_slack > row.rhs_bound) violated = true;
    }
    if (violated) {
      err << "modulus bound violated beyond measurement slack\n";
      return kExitBoundViolated;
    }
    return kExitOk;
  }

  if (o.window_mode) {
    const WindowBracket bracket =
        estimate_window(field, o.u, o.t, o.total, o.window, o.stride, tol);
    out << "lambda_minus=" << format_double(bracket.lambda_minus)
        << " lambda_plus=" << format_double(bracket.lambda_plus)
        << " window=" << format_double(o.window)
        << " total=" << format_double(o.total) << '\n';
    return kExitOk;
  }

  if (o.grid_mode) {
    const std::vector<double> u_grid = expand_grid(o.u_grid_spec, "--u-grid");
    const std::vector<double> t_grid =
        o.t_grid_spec.empty() ? std::vector<double>{0.0}
                              : expand_grid(o.t_grid_spec, "--t-grid");
    const SlopeTable table = effective_field(field, u_grid, t_grid, o.horizon,
                                             tol, quad, o.common.jobs);
    write_csv(out, table);
    return kExitOk;
  }

  const SlopeEstimate traj =
      estimate_trajectory(field, o.u, o.t, o.horizon, tol, o.v0);
  out << "lambda=" << format_double(traj.value)
      << " radius=" << format_double(traj.certified_radius)
      << " method=" << to_string(traj.method)
      << " horizon=" << format_double(traj.horizon)
      << " xi=" << format_double(traj.xi)
      << " certified=" << bool_str(traj.certified) << '\n';

  if (field.flags.tau_independent) {
    try {
      const SlopeEstimate q = estimate_quadrature(field, o.u, o.t, quad, tol);
      out << "lambda=" << format_double(q.value)
          << " radius=" << format_double(q.certified_radius)
          << " method=" << to_string(q.method) << '\n';
      const double gap = std::fabs(traj.value - q.value);
      const double slack = traj.certified_radius + q.certified_radius;
      if (gap > slack) {
        err << "trajectory and quadrature estimates disagree by "
            << format_double(gap) << ", beyond combined radius "
            << format_double(slack) << '\n';
        return kExitBoundViolated;
      }
    } catch (const NotSignDefinite& e) {
      err << "quadrature cross-check unavailable: " << e.what() << '\n';
    }
  }
  return kExitOk;
}

struct HomogenizeOptions {
  FieldOptions field;
  CommonOptions common;
  double v0 = 0;
  double dt = 0;
  std::size_t steps = 0;
  double horizon = 1e4;
  bool reference = false;
  double t_end = 0;
  double dt_ref = 0;
};

int run_homogenize(const HomogenizeOptions& o, std::ostream& fallback) {
  const ProblemField field = o.field.resolve();
  const ToleranceSpec tol = o.common.tol();
  const QuadratureOptions quad = o.common.quad();
  HomogenizedPath path;
  if (o.reference) {
    if (!(o.t_end > 0.0) || !(o.dt_ref > 0.0))
      throw std::runtime_error("--reference needs --t-end and --dt-ref");
    path = reference_solution(field, o.v0, o.t_end, o.dt_ref, tol, quad,
                              o.horizon);
  } else {
    if (!(o.dt > 0.0) || o.steps == 0)
      throw std::runtime_error("--dt and --steps are required");
    path = run_scheme(direct_source(field, o.horizon, tol, quad), o.v0, o.dt,
                      o.steps);
  }
  Sink sink = open_sink(o.common.out_path, fallback);
  write_csv(*sink.stream, path);
  return kExitOk;
}

struct RateOptions {
  FieldOptions field;
  CommonOptions common;
  double u0 = 0;
  double T = 0;
  double T_scaled = 0;
  std::vector<double> eps;
  double C = 1.0;
  double horizon = 1e4;
  bool deep = false;
  bool has_T = false;
  bool has_T_scaled = false;
};

int run_rate(const RateOptions& o, std::ostream& out_summary,
             std::ostream& fallback, std::ostream& err) {
  const ProblemField field = o.field.resolve();
  if (o.has_T == o.has_T_scaled)
    throw std::runtime_error("exactly one of --T or --T-scaled is required");
  if (o.eps.empty()) throw std::runtime_error("--eps list is required");
  if (!o.deep)
    for (double e : o.eps)
      if (e <= 1e-6)
        throw std::runtime_error(
            "epsilon at or below 1e-6 takes long; pass --deep to allow it");

  const TSpec tspec =
      o.has_T ? TSpec::fixed(o.T) : TSpec::scaled(o.T_scaled);
  const ErrorReport report =
      rate_experiment(field, o.u0, tspec, o.eps, o.C, o.common.tol(),
                      o.common.quad(), o.horizon, o.common.jobs);
  Sink sink = open_sink(o.common.out_path, fallback);
  write_csv(*sink.stream, report);
  out_summary << "fitted_c=" << format_double(report.fitted_c) << '\n';

  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const RateRow& prev = report.rows[i - 1];
    const RateRow& next = report.rows[i];
    const double decades = std::log10(prev.epsilon / next.epsilon);
    if (next.product > prev.product * std::pow(2.0, decades) * (1.0 + 1e-12)) {
      err << "error product grew faster than 2x per decade between eps="
          << format_double(prev.epsilon) << " and eps="
          << format_double(next.epsilon) << '\n';
      return kExitBoundViolated;
    }
  }
  return kExitOk;
}

struct SharpnessOptions {
  CommonOptions common;
  double delta = 0;
  std::vector<double> eps;
};

int run_sharpness(const SharpnessOptions& o, std::ostream& fallback) {
  if (o.eps.empty()) throw std::runtime_error("--eps list is required");
  const auto rows = sharpness_experiment(o.delta, o.eps, o.common.tol());
  Sink sink = open_sink(o.common.out_path, fallback);
  write_csv(*sink.stream, rows);
  return kExitOk;
}

struct StabilityOptions {
  FieldOptions field;
  CommonOptions common;
  std::vector<double> gammas;
  double horizon = 1e4;
  int sign = 1;
  double freeze_u = 0;
  double freeze_t = 0;
  bool has_freeze = false;
};

int run_stability(const StabilityOptions& o, std::ostream& out_summary,
                  std::ostream& fallback, std::ostream& err) {
  ProblemField field = o.field.resolve();
  if (o.has_freeze) field = freeze_field(field, o.freeze_u, o.freeze_t);
  if (o.gammas.empty()) throw std::runtime_error("--gammas list is required");
  const StabilityReport report =
      stability_experiment(field, o.gammas, o.horizon, o.sign, o.common.tol(),
                           o.common.quad(), o.common.jobs);
  Sink sink = open_sink(o.common.out_path, fallback);
  write_csv(*sink.stream, report);
  out_summary << "xi_bar=" << format_double(report.xi_bar) << '\n';
  for (const StabilityRow& row : report.rows)
    if (row.delta_lambda - row.radius_sum > row.bound) {
      err << "stability bound violated at gamma=" << format_double(row.gamma)
          << '\n';
      return kExitBoundViolated;
    }
  return kExitOk;
}

struct TransportOptions {
  FieldOptions field;
  CommonOptions common;
  double epsilon = 0;
  std::string V0 = "x1";
  double lip_V0 = 1.0;
  std::vector<double> x1_grid_spec;
  std::vector<double> x2_grid_spec;
  std::vector<double> times;
  std::size_t table_u = 41;
  std::size_t table_t = 41;
  double horizon = 1e4;
  bool check_better = false;
  double probe_h = 0;
};

int run_transport(const TransportOptions& o, std::ostream& out_summary,
                  std::ostream& fallback, std::ostream& err) {
  TransportProblem problem;
  problem.field = o.field.resolve();
  problem.initial_data = expr::parse(o.V0, {"x1", "x2"});
  problem.lip_V0 = o.lip_V0;
  problem.x1_grid = expand_grid(o.x1_grid_spec, "--x1-grid");
  problem.x2_grid = expand_grid(o.x2_grid_spec, "--x2-grid");
  problem.times = o.times;
  problem.epsilon = o.epsilon;
  if (problem.times.empty()) throw std::runtime_error("--times is required");
  if (!(problem.epsilon > 0.0) || !(problem.epsilon < 1.0))
    throw std::runtime_error("--epsilon must lie in (0, 1)");

  const SlopeTable table = transport_slope_table(
      problem.field, problem.x1_grid, problem.x2_grid, problem.times,
      o.table_u, o.table_t, o.horizon, o.common.tol(), o.common.quad(),
      o.common.jobs);
  const TransportSolution solution =
      solve_transport(problem, table, o.common.tol(), o.common.jobs);

  Sink sink = open_sink(o.common.out_path, fallback);
  write_csv(*sink.stream, problem, solution);
  out_summary << "sup_error=" << format_double(solution.sup_error)
              << " char_radius=" << format_double(solution.char_radius)
              << '\n';

  bool violated = false;
  if (o.check_better) {
    const double bound = problem.field.xi() * problem.lip_V0 * problem.epsilon;
    out_summary << "better_bound=" << format_double(bound) << '\n';
    if (solution.sup_error > bound + solution.char_radius * problem.lip_V0) {
      err << "transport error exceeds xi * Lip(V0) * epsilon\n";
      violated = true;
    }
  }
  if (o.probe_h > 0.0) {
    const double quotient = lipschitz_probe(problem, table, o.probe_h);
    const double bound = 2.1 * problem.field.beta;
    out_summary << "lipschitz_quotient=" << format_double(quotient)
                << " lipschitz_bound=" << format_double(bound) << '\n';
    if (quotient > bound) {
      err << "effective characteristic moves faster in x2 than its bound\n";
      violated = true;
    }
  }
  return violated ? kExitBoundViolated : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "Effective-slope estimation, averaged-dynamics solvers, and error "
      "measurement for rapidly oscillating scalar ODEs"};
  app.name("homog");
  app.require_subcommand(1);

  int exit_code = kExitOk;

  // validate ---------------------------------------------------------------
  auto validate_opts = std::make_shared<ValidateOptions>();
  auto validate_merge = std::make_shared<ConfigMerge>();
  {
    CLI::App* cmd = app.add_subcommand(
        "validate", "Sample a field and audit its declared bounds");
    validate_opts->field.add(cmd, *validate_merge);
    validate_opts->common.add(cmd, *validate_merge);
    auto* s = cmd->add_option("--samples", validate_opts->samples,
                              "Sample count (at least 100)");
    auto* r = cmd->add_option("--rng-seed", validate_opts->seed,
                              "Seed for the random half of the sampler");
    bind_value(*validate_merge, s, "samples", validate_opts->samples);
    bind_value(*validate_merge, r, "rng_seed", validate_opts->seed);
    cmd->callback([&, validate_opts, validate_merge] {
      if (!validate_opts->common.config_path.empty())
        validate_merge->run(load_config(validate_opts->common.config_path));
      exit_code = run_validate(*validate_opts, out);
    });
  }

  // solve-eps --------------------------------------------------------------
  auto solve_opts = std::make_shared<SolveEpsOptions>();
  auto solve_merge = std::make_shared<ConfigMerge>();
  {
    CLI::App* cmd = app.add_subcommand(
        "solve-eps", "Integrate the oscillatory problem and emit t,u");
    solve_opts->field.add(cmd, *solve_merge);
    solve_opts->common.add(cmd, *solve_merge);
    auto* e = cmd->add_option("--epsilon", solve_opts->epsilon,
                              "Oscillation scale");
    auto* u = cmd->add_option("--u0", solve_opts->u0, "Initial value");
    auto* t = cmd->add_option("--t-end", solve_opts->t_end, "Final time");
    bind_value(*solve_merge, e, "epsilon", solve_opts->epsilon);
    bind_value(*solve_merge, u, "u0", solve_opts->u0);
    bind_value(*solve_merge, t, "t_end", solve_opts->t_end);
    cmd->callback([&, solve_opts, solve_merge] {
      if (!solve_opts->common.config_path.empty())
        solve_merge->run(load_config(solve_opts->common.config_path));
      exit_code = run_solve_eps(*solve_opts, out);
    });
  }

  // slope ------------------------------------------------------------------
  auto slope_opts = std::make_shared<SlopeOptions>();
  auto slope_merge = std::make_shared<ConfigMerge>();
  {
    CLI::App* cmd = app.add_subcommand(
        "slope",
        "Estimate the effective slope: single point, sliding window, grid "
        "table, or modulus probe");
    slope_opts->field.add(cmd, *slope_merge);
    slope_opts->common.add(cmd, *slope_merge);
    auto* u = cmd->add_option("--u", slope_opts->u, "Frozen state");
    auto* t = cmd->add_option("--t", slope_opts->t, "Frozen time");
    auto* h = cmd->add_option("--horizon", slope_opts->horizon,
                              "Averaging horizon (at least 10)");
    auto* v = cmd->add_option("--v0", slope_opts->v0,
                              "Cell initial value for trajectory averaging");
    auto* total = cmd->add_option("--total", slope_opts->total,
                                  "Window mode: total horizon");
    auto* window = cmd->add_option("--window", slope_opts->window,
                                   "Window mode: window length");
    auto* stride = cmd->add_option("--stride", slope_opts->stride,
                                   "Window mode: window start spacing");
    auto* ug = cmd->add_option("--u-grid", slope_opts->u_grid_spec,
                               "Grid mode: u axis as lo,hi,count")
                   ->delimiter(',')
                   ->expected(3);
    auto* tg = cmd->add_option("--t-grid", slope_opts->t_grid_spec,
                               "Grid mode: t axis as lo,hi,count")
                   ->delimiter(',')
                   ->expected(3);
    auto* off = cmd->add_option(
        "--modulus-offsets", slope_opts->offsets_raw,
        "Modulus probe offsets as dv:ds[,dv:ds]; emits lhs vs bound");
    bind_value(*slope_merge, u, "u", slope_opts->u);
    bind_value(*slope_merge, t, "t", slope_opts->t);
    bind_value(*slope_merge, h, "horizon", slope_opts->horizon);
    bind_value(*slope_merge, v, "v0", slope_opts->v0);
    bind_value(*slope_merge, total, "total", slope_opts->total);
    bind_value(*slope_merge, window, "window", slope_opts->window);
    bind_value(*slope_merge, stride, "stride", slope_opts->stride);
    bind_value(*slope_merge, ug, "u_grid", slope_opts->u_grid_spec);
    bind_value(*slope_merge, tg, "t_grid", slope_opts->t_grid_spec);
    slope_merge->bind(off, "modulus_offsets", [slope_opts](const json& v) {
      for (const auto& pair : v)
        slope_opts->offsets.emplace_back(pair.at(0).get<double>(),
                                         pair.at(1).get<double>());
    });
    cmd->callback([&, slope_opts, slope_merge] {
      if (!slope_opts->common.config_path.empty())
        slope_merge->run(load_config(slope_opts->common.config_path));
      slope_opts->window_mode = slope_opts->total > 0.0;
      slope_opts->grid_mode = !slope_opts->u_grid_spec.empty();
      exit_code = run_slope(*slope_opts, out, err);
    });
  }

  // homogenize -------------------------------------------------------------
  auto hom_opts = std::make_shared<HomogenizeOptions>();
  auto hom_merge = std::make_shared<ConfigMerge>();
  {
    CLI::App* cmd = app.add_subcommand(
        "homogenize",
        "Run the effective-slope recursion and emit the piecewise path");
    hom_opts->field.add(cmd, *hom_merge);
    hom_opts->common.add(cmd, *hom_merge);
    auto* v = cmd->add_option("--v0", hom_opts->v0, "Initial value");
    auto* d = cmd->add_option("--dt", hom_opts->dt, "Time step");
    auto* s = cmd->add_option("--steps", hom_opts->steps, "Step count");
    auto* h = cmd->add_option("--horizon", hom_opts->horizon,
                              "Averaging horizon per slope call");
    auto* ref = cmd->add_flag("--reference", hom_opts->reference,
                              "Fine-step mode sized by --t-end and --dt-ref");
    auto* te = cmd->add_option("--t-end", hom_opts->t_end,
                               "Reference mode: final time");
    auto* dr = cmd->add_option("--dt-ref", hom_opts->dt_ref,
                               "Reference mode: step ceiling");
    bind_value(*hom_merge, v, "v0", hom_opts->v0);
    bind_value(*hom_merge, d, "dt", hom_opts->dt);
    bind_value(*hom_merge, s, "steps", hom_opts->steps);
    bind_value(*hom_merge, h, "horizon", hom_opts->horizon);
    bind_value(*hom_merge, ref, "reference", hom_opts->reference);
    bind_value(*hom_merge, te, "t_end", hom_opts->t_end);
    bind_value(*hom_merge, dr, "dt_ref", hom_opts->dt_ref);
    cmd->callback([&, hom_opts, hom_merge] {
      if (!hom_opts->common.config_path.empty())
        hom_merge->run(load_config(hom_opts->common.config_path));
      exit_code = run_homogenize(*hom_opts, out);
    });
  }

  // rate -------------------------------------------------------------------
  auto rate_opts = std::make_shared<RateOptions>();
  auto rate_merge = std::make_shared<ConfigMerge>();
  {
    CLI::App* cmd = app.add_subcommand(
        "rate",
        "Measure the oscillatory-to-effective gap across an epsilon sweep");
    rate_opts->field.add(cmd, *rate_merge);
    rate_opts->common.add(cmd, *rate_merge);
    auto* u = cmd->add_option("--u0", rate_opts->u0, "Initial value");
    auto* T = cmd->add_option("--T", rate_opts->T, "Fixed final time");
    auto* Ts = cmd->add_option("--T-scaled", rate_opts->T_scaled,
                               "Final time delta * eps * |log eps|");
    auto* e = cmd->add_option("--eps", rate_opts->eps,
                              "Epsilon sweep, comma separated")
                  ->delimiter(',');
    auto* c = cmd->add_option("--C", rate_opts->C,
                              "Scale constant in the resolvability floor");
    auto* h = cmd->add_option("--horizon", rate_opts->horizon,
                              "Averaging horizon per slope call");
    cmd->add_flag("--deep", rate_opts->deep,
                  "Allow epsilon at or below 1e-6");
    bind_value(*rate_merge, u, "u0", rate_opts->u0);
    bind_value(*rate_merge, T, "T", rate_opts->T);
    bind_value(*rate_merge, Ts, "T_scaled", rate_opts->T_scaled);
    bind_value(*rate_merge, e, "eps", rate_opts->eps);
    bind_value(*rate_merge, c, "C", rate_opts->C);
    bind_value(*rate_merge, h, "horizon", rate_opts->horizon);
    cmd->callback([&, rate_opts, rate_merge, T, Ts] {
      if (!rate_opts->common.config_path.empty()) {
        const json j = load_config(rate_opts->common.config_path);
        rate_merge->run(j);
        rate_opts->has_T = T->count() > 0 || j.contains("T");
        rate_opts->has_T_scaled = Ts->count() > 0 || j.contains("T_scaled");
      } else {
        rate_opts->has_T = T->count() > 0;
        rate_opts->has_T_scaled = Ts->count() > 0;
      }
      exit_code = run_rate(*rate_opts, out, out, err);
    });
  }

  // sharpness --------------------------------------------------------------
  auto sharp_opts = std::make_shared<SharpnessOptions>();
  auto sharp_merge = std::make_shared<ConfigMerge>();
  {
    CLI::App* cmd = app.add_subcommand(
        "sharpness",
        "Exactly solvable pinned field: gap at t = delta eps |log eps| vs "
        "its closed-form prediction");
    sharp_opts->common.add(cmd, *sharp_merge);
    auto* d = cmd->add_option("--delta", sharp_opts->delta,
                              "Time-scale multiplier (positive)");
    auto* e = cmd->add_option("--eps", sharp_opts->eps,
                              "Epsilon sweep, comma separated")
                  ->delimiter(',');
    bind_value(*sharp_merge, d, "delta", sharp_opts->delta);
    bind_value(*sharp_merge, e, "eps", sharp_opts->eps);
    cmd->callback([&, sharp_opts, sharp_merge] {
      if (!sharp_opts->common.config_path.empty())
        sharp_merge->run(load_config(sharp_opts->common.config_path));
      exit_code = run_sharpness(*sharp_opts, out);
    });
  }

  // stability --------------------------------------------------------------
  auto stab_opts = std::make_shared<StabilityOptions>();
  auto stab_merge = std::make_shared<ConfigMerge>();
  {
    CLI::App* cmd = app.add_subcommand(
        "stability",
        "Shift the cell field by gamma and compare the slope change to its "
        "logarithmic bound");
    stab_opts->field.add(cmd, *stab_merge);
    stab_opts->common.add(cmd, *stab_merge);
    auto* g = cmd->add_option("--gammas", stab_opts->gammas,
                              "Shift sizes in (0,1), comma separated")
                  ->delimiter(',');
    auto* h = cmd->add_option("--horizon", stab_opts->horizon,
                              "Averaging horizon per slope call");
    auto* s = cmd->add_option("--sign", stab_opts->sign,
                              "Shift direction, +1 or -1");
    auto* fu = cmd->add_option("--freeze-u", stab_opts->freeze_u,
                               "Freeze the state argument at this value");
    auto* ft = cmd->add_option("--freeze-t", stab_opts->freeze_t,
                               "Freeze the time argument at this value");
    bind_value(*stab_merge, g, "gammas", stab_opts->gammas);
    bind_value(*stab_merge, h, "horizon", stab_opts->horizon);
    bind_value(*stab_merge, s, "sign", stab_opts->sign);
    bind_value(*stab_merge, fu, "freeze_u", stab_opts->freeze_u);
    bind_value(*stab_merge, ft, "freeze_t", stab_opts->freeze_t);
    cmd->callback([&, stab_opts, stab_merge, fu, ft] {
      bool frozen = fu->count() > 0 || ft->count() > 0;
      if (!stab_opts->common.config_path.empty()) {
        const json j = load_config(stab_opts->common.config_path);
        stab_merge->run(j);
        frozen = frozen || j.contains("freeze_u") || j.contains("freeze_t");
      }
      stab_opts->has_freeze = frozen;
      exit_code = run_stability(*stab_opts, out, out, err);
    });
  }

  // transport --------------------------------------------------------------
  auto trans_opts = std::make_shared<TransportOptions>();
  auto trans_merge = std::make_shared<ConfigMerge>();
  {
    CLI::App* cmd = app.add_subcommand(
        "transport",
        "Linear transport via characteristics: oscillatory vs effective "
        "solution on a grid");
    trans_opts->field.add(cmd, *trans_merge);
    trans_opts->common.add(cmd, *trans_merge);
    auto* e = cmd->add_option("--epsilon", trans_opts->epsilon,
                              "Oscillation scale");
    auto* v0 = cmd->add_option("--V0", trans_opts->V0,
                               "Initial data expression in x1, x2");
    auto* lip = cmd->add_option("--lip-V0", trans_opts->lip_V0,
                                "Lipschitz constant of the initial data");
    auto* x1 = cmd->add_option("--x1-grid", trans_opts->x1_grid_spec,
                               "x1 axis as lo,hi,count")
                   ->delimiter(',')
                   ->expected(3);
    auto* x2 = cmd->add_option("--x2-grid", trans_opts->x2_grid_spec,
                               "x2 axis as lo,hi,count")
                   ->delimiter(',')
                   ->expected(3);
    auto* ts = cmd->add_option("--times", trans_opts->times,
                               "Query times, comma separated")
                   ->delimiter(',');
    auto* tu = cmd->add_option("--table-u", trans_opts->table_u,
                               "Slope table nodes along u");
    auto* tt = cmd->add_option("--table-t", trans_opts->table_t,
                               "Slope table nodes along the time slot");
    auto* h = cmd->add_option("--horizon", trans_opts->horizon,
                              "Averaging horizon per slope call");
    cmd->add_flag("--check-better", trans_opts->check_better,
                  "Check sup_error against xi * Lip(V0) * epsilon");
    auto* ph = cmd->add_option("--probe-h", trans_opts->probe_h,
                               "Probe step for the x2 difference quotient");
    bind_value(*trans_merge, e, "epsilon", trans_opts->epsilon);
    bind_value(*trans_merge, v0, "V0", trans_opts->V0);
    bind_value(*trans_merge, lip, "lip_V0", trans_opts->lip_V0);
    bind_value(*trans_merge, x1, "x1_grid", trans_opts->x1_grid_spec);
    bind_value(*trans_merge, x2, "x2_grid", trans_opts->x2_grid_spec);
    bind_value(*trans_merge, ts, "times", trans_opts->times);
    bind_value(*trans_merge, tu, "table_u", trans_opts->table_u);
    bind_value(*trans_merge, tt, "table_t", trans_opts->table_t);
    bind_value(*trans_merge, h, "horizon", trans_opts->horizon);
    bind_value(*trans_merge, ph, "probe_h", trans_opts->probe_h);
    cmd->callback([&, trans_opts, trans_merge] {
      if (!trans_opts->common.config_path.empty())
        trans_merge->run(load_config(trans_opts->common.config_path));
      exit_code = run_transport(*trans_opts, out, out, err);
    });
  }

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  } catch (const expr::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return exit_code;
}

}  // namespace homog
