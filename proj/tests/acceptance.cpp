// End-to-end acceptance checks, one printed line per criterion. Exits
// nonzero if any criterion fails. Pass --jobs N to parallelize the sweeps.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "homog/experiments.hpp"
#include "homog/expr.hpp"
#include "homog/field.hpp"
#include "homog/integrate.hpp"
#include "homog/scheme.hpp"
#include "homog/slope.hpp"
#include "homog/transport.hpp"
#include "homog/util.hpp"

using namespace homog;

namespace {

int g_jobs = 1;
int g_failures = 0;
double g_rate_fitted_c = 0;  // criterion 4's example1 constant, reused by 8

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

void report(int id, const std::string& name, const Outcome& outcome,
            Clock::time_point started) {
  const double secs =
      std::chrono::duration<double>(Clock::now() - started).count();
  std::ostringstream line;
  line << (outcome.pass ? "[PASS] " : "[FAIL] ") << id << ' ' << name << ": "
       << outcome.detail << " [" << format_double(std::round(secs * 10) / 10)
       << "s]";
  std::cout << line.str() << std::endl;
  if (!outcome.pass) ++g_failures;
}

std::string fmt(double x) { return format_double(x); }

// 1. Trajectory and quadrature slopes vs the closed form -sqrt(u^2-1),
//    and quadrature vs a frozen 1e7-node Riemann-sum value.
Outcome closed_form_slope() {
  const ProblemField field = builtin_field("example1");
  const double us[] = {1.5, 2.0, 3.0};
  const double riemann[] = {-1.118033988750, -1.732050807569, -2.828427124746};
  Outcome o;
  o.pass = true;
  double worst_traj = 0, worst_quad = 0, worst_riemann = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = -std::sqrt(us[i] * us[i] - 1.0);
    const SlopeEstimate traj = estimate_trajectory(field, us[i], 0.0, 1e4);
    const SlopeEstimate quad = estimate_quadrature(field, us[i], 0.0);
    const double combined = traj.certified_radius + quad.certified_radius;
    worst_traj = std::max(worst_traj, std::fabs(traj.value - exact));
    worst_quad = std::max(worst_quad, std::fabs(quad.value - exact));
    worst_riemann = std::max(worst_riemann, std::fabs(quad.value - riemann[i]));
    if (std::fabs(traj.value - exact) > combined) o.pass = false;
    if (std::fabs(quad.value - exact) > combined) o.pass = false;
  }
  if (worst_riemann > 1e-8) o.pass = false;
  o.detail = "max|traj-exact|=" + fmt(worst_traj) + " max|quad-exact|=" +
             fmt(worst_quad) + " max|quad-riemann|=" + fmt(worst_riemann) +
             " (allowed 1e-8)";
  return o;
}

// 2. The pinned field's oscillatory-effective gap equals (eps/2)(1-e^{-t/eps})
//    up to ten times the integrator tolerance, uniformly on [0,1].
Outcome pinned_field_exactness() {
  const ProblemField field = builtin_field("example3");
  Outcome o;
  o.pass = true;
  std::string parts;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const Trajectory traj = solve_oscillatory(field, eps, 0.0, 1.0);
    double worst = 0;
    const auto probe = [&](double t) {
      const double gap = traj.eval(t) + t;
      const double model = 0.5 * eps * (1.0 - std::exp(-t / eps));
      worst = std::max(worst, std::fabs(gap - model));
    };
    for (double t : traj.times) probe(t);
    for (int k = 0; k <= 2000; ++k) probe(static_cast<double>(k) / 2000.0);
    if (worst > 1e-8) o.pass = false;
    if (!parts.empty()) parts += ' ';
    parts += "eps=" + fmt(eps) + ":" + fmt(worst);
  }
  o.detail = "max|gap-model| " + parts + " (allowed 1e-8)";
  return o;
}

// 3. At t = eps|log eps| the measured gap stays within [1-2eps, 1] of the
//    predicted t / (2 |log eps|).
Outcome log_rate_sharpness() {
  const auto rows = sharpness_experiment(1.0, {1e-3, 1e-4, 1e-5});
  Outcome o;
  o.pass = true;
  std::string parts;
  for (const SharpnessRow& row : rows) {
    if (!(row.ratio >= 1.0 - 2.0 * row.epsilon && row.ratio <= 1.0))
      o.pass = false;
    if (!parts.empty()) parts += ' ';
    parts += "eps=" + fmt(row.epsilon) + ":" + fmt(row.ratio);
  }
  o.detail = "gap/predicted " + parts + " (allowed [1-2eps, 1])";
  return o;
}

// 4. Rate law: the pinned field at T = eps|log eps| gives products near 1/2;
//    the smooth-slope field at T = 1 has products falling at least 2x per
//    decade, all below one fitted constant.
Outcome rate_law() {
  Outcome o;
  o.pass = true;
  const ErrorReport pinned =
      rate_experiment(builtin_field("example3"), 0.0, TSpec::scaled(1.0),
                      {1e-3, 1e-4, 1e-5}, 1.0, {}, {}, 1e4, g_jobs);
  std::string parts;
  for (const RateRow& row : pinned.rows) {
    if (!(row.product >= 0.45 && row.product <= 0.51)) o.pass = false;
    if (!parts.empty()) parts += ' ';
    parts += fmt(row.product);
  }

  const ErrorReport smooth =
      rate_experiment(builtin_field("example1"), 2.0, TSpec::fixed(1.0),
                      {1e-2, 1e-3, 1e-4}, 1.0, {}, {}, 1e4, g_jobs);
  std::string parts1;
  for (std::size_t i = 0; i < smooth.rows.size(); ++i) {
    const RateRow& row = smooth.rows[i];
    if (row.product > smooth.fitted_c * (1.0 + 1e-12)) o.pass = false;
    if (i > 0) {
      const double decades =
          std::log10(smooth.rows[i - 1].epsilon / row.epsilon);
      if (row.product > smooth.rows[i - 1].product * std::pow(0.5, decades))
        o.pass = false;
    }
    if (!parts1.empty()) parts1 += ' ';
    parts1 += fmt(row.product);
  }
  g_rate_fitted_c = smooth.fitted_c;
  o.detail = "pinned products " + parts + " (allowed [0.45,0.51]); smooth " +
             parts1 + " fall >=2x/decade, fitted_c=" + fmt(smooth.fitted_c);
  return o;
}

// 5. Shifting |sin 2pi v| by gamma moves the slope by at most
//    xi_bar/|log gamma|, and the scaled slope climbs toward its limit.
Outcome shift_stability() {
  const ProblemField cell = freeze_field(builtin_field("example2"), 0.0, 0.0);
  const StabilityReport report =
      stability_experiment(cell, {1e-2, 1e-4, 1e-6}, 1e4, 1, {}, {}, g_jobs);
  Outcome o;
  o.pass = true;
  const double half_pi = std::acos(-1.0) / 2.0;
  double prev_scaled = 0;
  std::string parts;
  for (const StabilityRow& row : report.rows) {
    if (row.delta_lambda - row.radius_sum > row.bound) o.pass = false;
    const double scaled =
        row.lambda_gamma * std::fabs(std::log(row.gamma)) / half_pi;
    if (scaled <= prev_scaled) o.pass = false;
    prev_scaled = scaled;
    if (!parts.empty()) parts += ' ';
    parts += fmt(scaled);
  }
  if (!(prev_scaled >= 0.85 && prev_scaled <= 1.0)) o.pass = false;
  o.detail = "xi_bar=" + fmt(report.xi_bar) + " scaled slopes " + parts +
             " (increasing, last in [0.85,1])";
  return o;
}

// 6. Slope changes under small argument offsets stay below the logarithmic
//    modulus bound, radii counted.
Outcome slope_modulus() {
  const auto rows = modulus_probe(builtin_field("example2"), -1e-2, 0.0,
                                  {{-1e-4, 0.0}, {-1e-6, 0.0}}, 1e4);
  Outcome o;
  o.pass = true;
  std::string parts;
  for (const ModulusProbeRow& row : rows) {
    if (row.lhs - row.lhs_slack > row.rhs_bound) o.pass = false;
    if (!parts.empty()) parts += ' ';
    parts += "lhs=" + fmt(row.lhs) + "<=bound=" + fmt(row.rhs_bound);
  }
  o.detail = parts;
  return o;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return grid;
}

// 7. Transport by a time-free oscillatory drift: the effective solution is
//    accurate to xi * Lip(V0) * eps, an order better than the generic rate.
Outcome transport_better_bound() {
  TransportProblem problem;
  problem.field = builtin_field("shifted_cosine", {2.0});
  problem.initial_data = expr::parse("x1", {"x1", "x2"});
  problem.lip_V0 = 1.0;
  problem.x1_grid = linspace(0.0, 1.0, 21);
  problem.x2_grid = linspace(0.0, 1.0, 21);
  problem.times = {0.25, 0.5, 1.0};
  const SlopeTable table =
      transport_slope_table(problem.field, problem.x1_grid, problem.x2_grid,
                            problem.times, 41, 5, 1e4, {}, {}, g_jobs);
  const double bound_rate = problem.field.xi() * problem.lip_V0;
  Outcome o;
  o.pass = true;
  std::string parts;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    problem.epsilon = eps;
    const TransportSolution solution =
        solve_transport(problem, table, {}, g_jobs);
    const double scaled = solution.sup_error / eps;
    if (scaled > bound_rate) o.pass = false;
    if (!parts.empty()) parts += ' ';
    parts += "eps=" + fmt(eps) + ":" + fmt(scaled);
  }
  o.detail = "sup_error/eps " + parts + " (allowed " + fmt(bound_rate) + ")";
  return o;
}

// Shared by criteria 8 and 9: transport driven by the state-dependent field.
struct StateTransport {
  TransportProblem problem;
  std::unique_ptr<SlopeTable> table;
};

StateTransport& state_transport() {
  static StateTransport st;
  if (!st.table) {
    st.problem.field = builtin_field("example1");
    st.problem.initial_data = expr::parse("x1", {"x1", "x2"});
    st.problem.lip_V0 = 1.0;
    st.problem.x1_grid = linspace(2.0, 3.0, 21);
    st.problem.x2_grid = linspace(0.0, 1.0, 21);
    st.problem.times = {0.25, 0.5, 1.0};
    st.table = std::make_unique<SlopeTable>(transport_slope_table(
        st.problem.field, st.problem.x1_grid, st.problem.x2_grid,
        st.problem.times, 901, 2, 1e4, {}, {}, g_jobs));
  }
  return st;
}

// 8. Transport error tracks the ODE sweep's fitted constant: sup_error is
//    within factor 1.5 of fitted_c * T / |log eps|.
Outcome transport_rate() {
  Outcome o;
  if (g_rate_fitted_c <= 0) {
    o.detail = "needs the rate-law criterion's fitted constant";
    return o;
  }
  StateTransport& st = state_transport();
  const double T = 1.0;
  o.pass = true;
  std::string parts;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    st.problem.epsilon = eps;
    const TransportSolution solution =
        solve_transport(st.problem, *st.table, {}, g_jobs);
    const double bound = 1.5 * g_rate_fitted_c * T / std::fabs(std::log(eps));
    if (solution.sup_error > bound) o.pass = false;
    if (!parts.empty()) parts += ' ';
    parts += "eps=" + fmt(eps) + ":" + fmt(solution.sup_error) + "<=" +
             fmt(bound);
  }
  o.detail = parts;
  return o;
}

// 9. The effective flow moves at most 2.1 * beta per unit of x2.
Outcome flow_x2_lipschitz() {
  StateTransport& st = state_transport();
  const double quotient = lipschitz_probe(st.problem, *st.table, 1e-3);
  const double bound = 2.1 * st.problem.field.beta;
  Outcome o;
  o.pass = quotient <= bound;
  o.detail = "max quotient " + fmt(quotient) + " (allowed " + fmt(bound) + ")";
  return o;
}

expr::Ast leaf_number(double value) {
  auto node = std::make_shared<expr::Node>();
  node->kind = expr::Kind::number;
  node->value = value;
  return node;
}

expr::Ast leaf_variable(const std::string& name) {
  auto node = std::make_shared<expr::Node>();
  node->kind = expr::Kind::variable;
  node->name = name;
  return node;
}

expr::Ast random_ast(std::mt19937& gen, int depth) {
  static const std::vector<std::string> vars{"v", "tau", "u", "t"};
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 5);
  switch (pick(gen)) {
    case 0: {
      std::uniform_real_distribution<double> val(0.0, 10.0);
      return leaf_number(val(gen));
    }
    case 1: {
      std::uniform_int_distribution<int> which(0, 3);
      return leaf_variable(vars[which(gen)]);
    }
    case 2: {
      auto node = std::make_shared<expr::Node>();
      node->kind = expr::Kind::negate;
      node->args = {random_ast(gen, depth - 1)};
      return node;
    }
    case 3: {
      static const char ops[] = {'+', '-', '*', '/', '^'};
      std::uniform_int_distribution<int> which(0, 4);
      auto node = std::make_shared<expr::Node>();
      node->kind = expr::Kind::binary;
      node->op = ops[which(gen)];
      node->args = {random_ast(gen, depth - 1), random_ast(gen, depth - 1)};
      return node;
    }
    case 4: {
      static const char* names[] = {"sin", "cos",  "abs",
                                    "exp", "sqrt", "floor"};
      std::uniform_int_distribution<int> which(0, 5);
      auto node = std::make_shared<expr::Node>();
      node->kind = expr::Kind::call;
      node->name = names[which(gen)];
      node->args = {random_ast(gen, depth - 1)};
      return node;
    }
    default: {
      static const char* names[] = {"min", "max"};
      std::uniform_int_distribution<int> which(0, 1);
      auto node = std::make_shared<expr::Node>();
      node->kind = expr::Kind::call;
      node->name = names[which(gen)];
      node->args = {random_ast(gen, depth - 1), random_ast(gen, depth - 1)};
      return node;
    }
  }
}

// 10. Invariant sweeps: order preservation, start-point independence of the
//     slope, monotonicity in u, the ergodic envelope, window-bracket width,
//     and parser round-trips. Zero violations allowed.
Outcome property_suites() {
  const ProblemField field = builtin_field("example1");
  int violations = 0;
  std::string parts;
  const auto record = [&](const std::string& name, int bad) {
    violations += bad;
    if (!parts.empty()) parts += ' ';
    parts += name + ":" + std::to_string(bad);
  };

  {
    int bad = 0;
    const Trajectory lo = solve_oscillatory(field, 0.02, 1.8, 1.0);
    const Trajectory hi = solve_oscillatory(field, 0.02, 2.0, 1.0);
    for (int k = 0; k <= 100; ++k) {
      const double t = static_cast<double>(k) / 100.0;
      if (!(lo.eval(t) < hi.eval(t))) ++bad;
    }
    record("order", bad);
  }

  const SlopeEstimate quad = estimate_quadrature(field, 2.0, 0.0);
  {
    const SlopeEstimate a = estimate_trajectory(field, 2.0, 0.0, 2000.0);
    const SlopeEstimate b =
        estimate_trajectory(field, 2.0, 0.0, 2000.0, {}, 0.37);
    const double gap = std::fabs(a.value - b.value);
    record("start-free",
           gap <= a.certified_radius + b.certified_radius ? 0 : 1);
  }

  {
    int bad = 0;
    double prev = 1e9;
    for (double u : {1.5, 2.0, 2.5, 3.0}) {
      const double lambda = estimate_quadrature(field, u, 0.0).value;
      if (!(lambda < prev)) ++bad;
      prev = lambda;
    }
    record("monotone", bad);
  }

  {
    int bad = 0;
    const Trajectory cell = solve_cell(field, 2.0, 0.0, 0.0, 1000.0);
    for (int k = 1; k <= 100; ++k) {
      const double tau = 10.0 * static_cast<double>(k);
      if (std::fabs(cell.eval(tau) - quad.value * tau) > field.xi() + 1e-6)
        ++bad;
    }
    record("envelope", bad);
  }

  {
    const WindowBracket bracket =
        estimate_window(field, 2.0, 0.0, 2000.0, 100.0, 100.0);
    const double width = bracket.lambda_plus - bracket.lambda_minus;
    int bad = 0;
    if (width > 2.0 * field.xi() / 100.0 + 1e-9) ++bad;
    if (quad.value < bracket.lambda_minus - quad.certified_radius ||
        quad.value > bracket.lambda_plus + quad.certified_radius)
      ++bad;
    record("window", bad);
  }

  {
    int bad = 0;
    std::mt19937 gen(20260822);
    for (int i = 0; i < 100; ++i) {
      const expr::Ast ast = random_ast(gen, 4);
      const expr::Ast back =
          expr::parse(expr::print(ast), {"v", "tau", "u", "t"});
      if (!expr::equal(ast, back)) ++bad;
    }
    record("round-trip", bad);
  }

  Outcome o;
  o.pass = violations == 0;
  o.detail = "violations " + parts;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--jobs" && i + 1 < argc) {
      g_jobs = std::atoi(argv[++i]);
      if (g_jobs < 1) g_jobs = 1;
    }
  }

  const struct {
    int id;
    const char* name;
    Outcome (*run)();
  } criteria[] = {
      {1, "closed-form slope", closed_form_slope},
      {2, "pinned-field exactness", pinned_field_exactness},
      {3, "log-rate sharpness", log_rate_sharpness},
      {4, "rate law", rate_law},
      {5, "shift stability", shift_stability},
      {6, "slope modulus", slope_modulus},
      {7, "transport better bound", transport_better_bound},
      {8, "transport rate", transport_rate},
      {9, "flow x2-lipschitz", flow_x2_lipschitz},
      {10, "property suites", property_suites},
  };
  for (const auto& criterion : criteria) {
    const auto started = Clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    report(criterion.id, criterion.name, outcome, started);
  }
  std::cout << (g_failures == 0 ? "all criteria passed"
                                : std::to_string(g_failures) +
                                      " criterion(s) failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
