#include "homog/scheme.hpp"

#include <cmath>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "homog/util.hpp"

namespace homog {

SlopeSource direct_source(const ProblemField& field, double horizon,
                          const ToleranceSpec& tol,
                          const QuadratureOptions& options) {
  if (field.flags.u_independent && field.flags.t_independent) {
    // One slope serves every state; compute it once.
    auto cache = std::make_shared<std::optional<SlopeEstimate>>();
    auto mutex = std::make_shared<std::mutex>();
    return [field, horizon, tol, options, cache, mutex](double u, double t) {
      std::lock_guard<std::mutex> lock(*mutex);
      if (!cache->has_value())
        *cache = estimate_best(field, u, t, horizon, tol, options);
      return **cache;
    };
  }
  return [field, horizon, tol, options](double u, double t) {
    return estimate_best(field, u, t, horizon, tol, options);
  };
}

SlopeSource table_source(const SlopeTable& table) {
  return [&table](double u, double t) {
    SlopeEstimate est;
    est.value = table.lambda(u, t);
    est.certified_radius = table.radius(u, t);
    est.method = SlopeMethod::trajectory;
    return est;
  };
}

double HomogenizedPath::eval(double t) const {
  if (t < -1e-12 * std::max(1.0, t_end()) ||
      t > t_end() + 1e-12 * std::max(1.0, t_end()))
    throw std::out_of_range("time outside the scheme's span");
  const long long k = std::llround(t / dt);
  const long long n = static_cast<long long>(steps());
  if (k >= 0 && k <= n && static_cast<double>(k) * dt == t)
    return values[static_cast<std::size_t>(k)];
  long long j = static_cast<long long>(std::floor(t / dt));
  j = std::max(0LL, std::min(j, n - 1));
  const std::size_t i = static_cast<std::size_t>(j);
  return values[i] + slopes[i] * (t - static_cast<double>(j) * dt);
}

double HomogenizedPath::radius_within(double t) const {
  double sum = 0;
  for (std::size_t k = 0; k < steps(); ++k) {
    const double lo = static_cast<double>(k) * dt;
    if (lo >= t) break;
    const double hi = std::min(t, lo + dt);
    sum += estimates[k].certified_radius * (hi - lo);
  }
  return sum;
}

double HomogenizedPath::max_radius() const {
  double m = 0;
  for (const auto& est : estimates) m = std::max(m, est.certified_radius);
  return m;
}

HomogenizedPath run_scheme(const SlopeSource& source, double v0, double dt,
                           std::size_t steps) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (steps == 0) throw std::invalid_argument("step count must be positive");
  HomogenizedPath path;
  path.dt = dt;
  path.values.reserve(steps + 1);
  path.slopes.reserve(steps);
  path.estimates.reserve(steps);
  double v = v0;
  path.values.push_back(v);
  for (std::size_t k = 0; k < steps; ++k) {
    const SlopeEstimate est = source(v, static_cast<double>(k) * dt);
    path.estimates.push_back(est);
    path.slopes.push_back(est.value);
    v += est.value * dt;
    path.values.push_back(v);
  }
  return path;
}

namespace {

std::optional<std::function<double(double)>> closed_form(
    const ProblemField& field, double u0) {
  if (field.source.rfind("constant(", 0) == 0) {
    const double c = field.evaluate(0, 0, 0, 0);
    return [u0, c](double t) { return u0 + c * t; };
  }
  if (field.source.rfind("example3", 0) == 0)
    return [u0](double t) { return u0 - t; };
  return std::nullopt;
}

}  // namespace

HomogenizedPath reference_solution(const ProblemField& field, double u0,
                                   double t_end, double dt_ref,
                                   const ToleranceSpec& tol,
                                   const QuadratureOptions& options,
                                   double horizon) {
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(dt_ref > 0.0)) throw std::invalid_argument("dt_ref must be positive");
  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(t_end / dt_ref - 1e-12));
  const double dt = t_end / static_cast<double>(steps);
  HomogenizedPath path =
      run_scheme(direct_source(field, horizon, tol, options), u0, dt, steps);
  if (auto analytic = closed_form(field, u0)) path.analytic = *analytic;
  return path;
}

std::vector<ModulusProbeRow> modulus_probe(
    const ProblemField& field, double u, double t,
    const std::vector<std::pair<double, double>>& offsets, double horizon,
    const ToleranceSpec& tol, const QuadratureOptions& options) {
  std::vector<ModulusProbeRow> rows;
  rows.reserve(offsets.size());
  const SlopeEstimate base = estimate_best(field, u, t, horizon, tol, options);
  for (const auto& [dv, ds] : offsets) {
    const double r = std::fabs(dv) + std::fabs(ds);
    if (field.alpha > 0.0 && !(r < 1.0 / field.alpha))
      throw std::domain_error(
          "offset magnitude must stay below 1/alpha for the modulus bound");
    const SlopeEstimate shifted =
        estimate_best(field, u + dv, t + ds, horizon, tol, options);
    ModulusProbeRow row;
    row.dv = dv;
    row.ds = ds;
    row.lhs = std::fabs(shifted.value - base.value);
    row.lhs_slack = base.certified_radius + shifted.certified_radius;
    const double ar = field.alpha * r;
    row.rhs_bound = ar > 0.0 ? field.xi_bar() / (-std::log(ar)) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

void write_csv(std::ostream& out, const HomogenizedPath& path) {
  out << "k,t,v,lambda,radius\n";
  for (std::size_t k = 0; k < path.steps(); ++k)
    out << k << ',' << format_double(static_cast<double>(k) * path.dt) << ','
        << format_double(path.values[k]) << ',' << format_double(path.slopes[k])
        << ',' << format_double(path.estimates[k].certified_radius) << '\n';
  const std::size_t n = path.steps();
  out << n << ',' << format_double(path.t_end()) << ','
      << format_double(path.values[n]) << ",,\n";
}

}  // namespace homog
