#include "homog/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "homog/integrate.hpp"
#include "homog/util.hpp"

namespace homog {

TSpec TSpec::fixed(double T) {
  if (!(T > 0.0)) throw std::invalid_argument("final time must be positive");
  return {false, T};
}

TSpec TSpec::scaled(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  return {true, delta};
}

double TSpec::resolve(double epsilon) const {
  return is_scaled ? value * epsilon * std::fabs(std::log(epsilon)) : value;
}

namespace {

double sup_gap(const Trajectory& traj, const HomogenizedPath& ref, double T) {
  const auto limit = [&ref](double t) {
    return ref.analytic ? ref.analytic(t) : ref.eval(t);
  };
  double sup = 0;
  constexpr int probes = 1000;
  for (int i = 0; i <= probes; ++i) {
    const double t = T * static_cast<double>(i) / probes;
    sup = std::max(sup, std::fabs(traj.eval(t) - limit(t)));
  }
  for (std::size_t k = 0; k <= ref.steps(); ++k) {
    const double t = std::min(static_cast<double>(k) * ref.dt, T);
    sup = std::max(sup, std::fabs(traj.eval(t) - limit(t)));
  }
  return sup;
}

}  // namespace

ErrorReport rate_experiment(const ProblemField& field, double u0,
                            const TSpec& tspec,
                            const std::vector<double>& eps_list, double C,
                            const ToleranceSpec& tol,
                            const QuadratureOptions& options, double horizon,
                            int jobs) {
  if (eps_list.empty()) throw std::invalid_argument("epsilon list is empty");
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  std::string offenders;
  for (double eps : eps_list) {
    if (!(eps > 0.0) || !(eps < 1.0))
      throw std::invalid_argument("epsilon values must lie in (0, 1)");
    const double T = tspec.resolve(eps);
    const double dt_exp = C * eps * std::fabs(std::log(eps));
    if (T < dt_exp * (1.0 - 1e-12))
      offenders += (offenders.empty() ? "" : ", ") + format_double(eps);
  }
  if (!offenders.empty())
    throw std::invalid_argument(
        "final time is below the resolvable scale C*eps*|log eps| for eps = " +
        offenders);

  std::vector<double> eps_sorted = eps_list;
  std::sort(eps_sorted.rbegin(), eps_sorted.rend());

  ErrorReport report;
  report.rows.resize(eps_sorted.size());
  bool analytic = false;
  {
    // Probe once whether the reference carries a closed form.
    const HomogenizedPath probe =
        reference_solution(field, u0, 1.0, 0.5, tol, options, horizon);
    analytic = static_cast<bool>(probe.analytic);
  }
  report.analytic_reference = analytic;

  parallel_for(eps_sorted.size(), jobs, [&](std::size_t i) {
    const double eps = eps_sorted[i];
    const double T = tspec.resolve(eps);
    const double abs_log = std::fabs(std::log(eps));
    const double dt_exp = C * eps * abs_log;
    const double dt_ref = std::min(dt_exp / 8.0, T / 5e4);
    const HomogenizedPath ref =
        reference_solution(field, u0, T, dt_ref, tol, options, horizon);
    const Trajectory traj = solve_oscillatory(field, eps, u0, T, tol, true);
    RateRow row;
    row.epsilon = eps;
    row.T = T;
    row.sup_error = sup_gap(traj, ref, T);
    row.product = row.sup_error * abs_log / T;
    row.dt_used = dt_ref;
    report.rows[i] = row;
  });

  for (const RateRow& row : report.rows)
    report.fitted_c = std::max(report.fitted_c, row.product);
  return report;
}

std::vector<SharpnessRow> sharpness_experiment(
    double delta, const std::vector<double>& eps_list,
    const ToleranceSpec& tol) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const ProblemField field = builtin_field("example3");
  std::vector<SharpnessRow> rows;
  rows.reserve(eps_list.size());
  std::vector<double> eps_sorted = eps_list;
  std::sort(eps_sorted.rbegin(), eps_sorted.rend());
  for (double eps : eps_sorted) {
    if (!(eps > 0.0) || !(eps < std::exp(-1.0)))
      throw std::invalid_argument("epsilon must lie in (0, 1/e)");
    const double abs_log = std::fabs(std::log(eps));
    const double t_star = delta * eps * abs_log;
    const Trajectory traj = solve_oscillatory(field, eps, 0.0, t_star, tol, false);
    SharpnessRow row;
    row.epsilon = eps;
    row.t = t_star;
    row.measured_gap = traj.end_value() + t_star;  // limit path is -t
    row.predicted = t_star / (2.0 * delta * abs_log);
    row.ratio = row.measured_gap / row.predicted;
    rows.push_back(row);
  }
  return rows;
}

StabilityReport stability_experiment(const ProblemField& cell_field,
                                     const std::vector<double>& gammas,
                                     double horizon, int sign,
                                     const ToleranceSpec& tol,
                                     const QuadratureOptions& options,
                                     int jobs) {
  if (gammas.empty()) throw std::invalid_argument("gamma list is empty");
  for (double g : gammas)
    if (!(g > 0.0) || !(g < 1.0))
      throw std::invalid_argument("gamma values must lie in (0, 1)");

  StabilityReport report;
  report.xi_bar = cell_field.xi_bar();
  const SlopeEstimate base =
      estimate_best(cell_field, 0.0, 0.0, horizon, tol, options);

  std::vector<double> sorted = gammas;
  std::sort(sorted.rbegin(), sorted.rend());
  report.rows.resize(sorted.size());
  parallel_for(sorted.size(), jobs, [&](std::size_t i) {
    const double gamma = sorted[i];
    const ProblemField shifted = perturb_field(cell_field, gamma, sign);
    const SlopeEstimate est =
        estimate_best(shifted, 0.0, 0.0, horizon, tol, options);
    StabilityRow row;
    row.gamma = gamma;
    row.lambda_gamma = est.value;
    row.lambda_0 = base.value;
    row.delta_lambda = std::fabs(est.value - base.value);
    row.bound = report.xi_bar / (-std::log(gamma));
    row.radius_sum = est.certified_radius + base.certified_radius;
    report.rows[i] = row;
  });
  return report;
}

void write_csv(std::ostream& out, const ErrorReport& report) {
  out << "epsilon,T,sup_error,product,dt_ref\n";
  for (const RateRow& row : report.rows)
    out << format_double(row.epsilon) << ',' << format_double(row.T) << ','
        << format_double(row.sup_error) << ',' << format_double(row.product)
        << ',' << format_double(row.dt_used) << '\n';
}

void write_csv(std::ostream& out, const std::vector<SharpnessRow>& rows) {
  out << "epsilon,t,measured_gap,predicted,ratio\n";
  for (const SharpnessRow& row : rows)
    out << format_double(row.epsilon) << ',' << format_double(row.t) << ','
        << format_double(row.measured_gap) << ','
        << format_double(row.predicted) << ',' << format_double(row.ratio)
        << '\n';
}

void write_csv(std::ostream& out, const StabilityReport& report) {
  out << "gamma,lambda_gamma,lambda_0,delta,bound,slack\n";
  for (const StabilityRow& row : report.rows)
    out << format_double(row.gamma) << ',' << format_double(row.lambda_gamma)
        << ',' << format_double(row.lambda_0) << ','
        << format_double(row.delta_lambda) << ',' << format_double(row.bound)
        << ',' << format_double(row.radius_sum) << '\n';
}

}  // namespace homog
