#include "homog/transport.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "homog/integrate.hpp"
#include "homog/util.hpp"

namespace homog {

namespace {

void check_grids(const TransportProblem& problem) {
  if (problem.x1_grid.empty() || problem.x2_grid.empty() ||
      problem.times.empty())
    throw std::invalid_argument("transport grids and times must be non-empty");
  for (double t : problem.times)
    if (!(t > 0.0)) throw std::invalid_argument("query times must be positive");
  if (!(problem.epsilon > 0.0))
    throw std::invalid_argument("epsilon must be positive");
}

double eval_initial(const expr::Ast& V0, double x1, double x2) {
  return expr::eval(V0, {{"x1", x1}, {"x2", x2}});
}

}  // namespace

double characteristic_eps(const TransportProblem& problem, double x1, double x2,
                          double t, const ToleranceSpec& tol) {
  const double eps = problem.epsilon;
  const auto f = problem.field.evaluate;
  const auto rhs = [f, eps, x2](double tau, double X) {
    return f(fast_phase(X, eps), fast_phase(x2 - tau, eps), X, x2 - tau);
  };
  const Trajectory traj =
      integrate_scalar(rhs, 0.0, x1, t, tol, eps / 10.0, eps, false);
  return traj.end_value();
}

HomCharacteristic characteristic_hom(const SlopeTable& table, double x1,
                                     double x2, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("time must be positive");
  const double h0 = std::min(1e-3, t / 100.0);
  const std::size_t n =
      static_cast<std::size_t>(std::ceil(t / h0 - 1e-9));
  const double h = t / static_cast<double>(n);
  HomCharacteristic result;
  double X = x1;
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = static_cast<double>(k) * h;
    const double slot = x2 - tau;
    result.radius += table.radius(X, slot) * h;
    X += table.lambda(X, slot) * h;
  }
  result.value = X;
  return result;
}

TransportSolution solve_transport(const TransportProblem& problem,
                                  const SlopeTable& table,
                                  const ToleranceSpec& tol, int jobs) {
  check_grids(problem);
  const std::size_t n1 = problem.x1_grid.size();
  const std::size_t n2 = problem.x2_grid.size();
  const std::size_t nt = problem.times.size();
  const double t_max =
      *std::max_element(problem.times.begin(), problem.times.end());

  TransportSolution solution;
  solution.values_eps.assign(nt * n1 * n2, 0.0);
  solution.values_hom.assign(nt * n1 * n2, 0.0);
  std::vector<double> radii(n1 * n2, 0.0);

  parallel_for(n1 * n2, jobs, [&](std::size_t k) {
    const std::size_t i1 = k / n2;
    const std::size_t i2 = k % n2;
    const double x1 = problem.x1_grid[i1];
    const double x2 = problem.x2_grid[i2];

    // One dense oscillatory solve per grid point covers every query time.
    const double eps = problem.epsilon;
    const auto f = problem.field.evaluate;
    const auto rhs = [f, eps, x2](double tau, double X) {
      return f(fast_phase(X, eps), fast_phase(x2 - tau, eps), X, x2 - tau);
    };
    const Trajectory traj =
        integrate_scalar(rhs, 0.0, x1, t_max, tol, eps / 10.0, eps, true);

    double worst_radius = 0;
    for (std::size_t it = 0; it < nt; ++it) {
      const double t = problem.times[it];
      const double X_eps = traj.eval(t);
      const HomCharacteristic hom = characteristic_hom(table, x1, x2, t);
      const std::size_t idx = (it * n1 + i1) * n2 + i2;
      solution.values_eps[idx] =
          eval_initial(problem.initial_data, X_eps, x2 - t);
      solution.values_hom[idx] =
          eval_initial(problem.initial_data, hom.value, x2 - t);
      worst_radius = std::max(worst_radius, hom.radius);
    }
    radii[k] = worst_radius;
  });

  for (std::size_t i = 0; i < solution.values_eps.size(); ++i)
    solution.sup_error =
        std::max(solution.sup_error,
                 std::fabs(solution.values_eps[i] - solution.values_hom[i]));
  for (double r : radii) solution.char_radius = std::max(solution.char_radius, r);
  return solution;
}

double lipschitz_probe(const TransportProblem& problem, const SlopeTable& table,
                       double h) {
  check_grids(problem);
  if (!(h > 0.0)) throw std::invalid_argument("probe step must be positive");
  double worst = 0;
  for (double t : problem.times)
    for (double x1 : problem.x1_grid)
      for (double x2 : problem.x2_grid) {
        const double base = characteristic_hom(table, x1, x2, t).value;
        const double shifted = characteristic_hom(table, x1, x2 + h, t).value;
        worst = std::max(worst, std::fabs(shifted - base) / h);
      }
  return worst;
}

SlopeTable transport_slope_table(const ProblemField& field,
                                 const std::vector<double>& x1_grid,
                                 const std::vector<double>& x2_grid,
                                 const std::vector<double>& times,
                                 std::size_t nu, std::size_t nt, double horizon,
                                 const ToleranceSpec& tol,
                                 const QuadratureOptions& options, int jobs) {
  if (x1_grid.empty() || x2_grid.empty() || times.empty())
    throw std::invalid_argument("transport grids and times must be non-empty");
  if (nu < 2 || nt < 2)
    throw std::invalid_argument("table needs at least two nodes per axis");
  const double t_max = *std::max_element(times.begin(), times.end());
  const auto [x1_lo, x1_hi] =
      std::minmax_element(x1_grid.begin(), x1_grid.end());
  const auto [x2_lo, x2_hi] =
      std::minmax_element(x2_grid.begin(), x2_grid.end());

  // The characteristic moves at most beta per unit time, so pad the state
  // range by beta * t_max; the time slot runs down to min(x2) - t_max.
  double u_lo = *x1_lo - field.beta * t_max;
  double u_hi = *x1_hi + field.beta * t_max;
  double s_lo = *x2_lo - t_max;
  double s_hi = *x2_hi;
  const double u_pad = 0.02 * (u_hi - u_lo) + 1e-6;
  const double s_pad = 0.02 * (s_hi - s_lo) + 0.05;
  u_lo -= u_pad;
  u_hi += u_pad;
  s_lo -= s_pad;
  s_hi += s_pad;

  const auto linspace = [](double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
      g[i] = lo + (hi - lo) * static_cast<double>(i) /
                      static_cast<double>(n - 1);
    return g;
  };
  return effective_field(field, linspace(u_lo, u_hi, nu),
                         linspace(s_lo, s_hi, nt), horizon, tol, options, jobs);
}

void write_csv(std::ostream& out, const TransportProblem& problem,
               const TransportSolution& solution) {
  out << "t,x1,x2,V_eps,V_hom,abs_err\n";
  const std::size_t n1 = problem.x1_grid.size();
  const std::size_t n2 = problem.x2_grid.size();
  for (std::size_t it = 0; it < problem.times.size(); ++it)
    for (std::size_t i1 = 0; i1 < n1; ++i1)
      for (std::size_t i2 = 0; i2 < n2; ++i2) {
        const std::size_t idx = (it * n1 + i1) * n2 + i2;
        const double ve = solution.values_eps[idx];
        const double vh = solution.values_hom[idx];
        out << format_double(problem.times[it]) << ','
            << format_double(problem.x1_grid[i1]) << ','
            << format_double(problem.x2_grid[i2]) << ','
            << format_double(ve) << ',' << format_double(vh) << ','
            << format_double(std::fabs(ve - vh)) << '\n';
      }
}

}  // namespace homog
