#include "homog/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <ostream>

#include "homog/util.hpp"

namespace homog {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

double Trajectory::eval(double t) const {
  const double span_tol = 1e-9 * std::max(1.0, end_time() - start_time());
  if (t <= start_time()) {
    if (t < start_time() - span_tol)
      throw std::out_of_range("time before the start of the trajectory");
    return values.front();
  }
  if (t >= end_time()) {
    if (t > end_time() + span_tol)
      throw std::out_of_range("time past the end of the trajectory");
    return values.back();
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  const double t0 = times[i], t1 = times[i + 1];
  const double h = t1 - t0;
  const double th = (t - t0) / h;
  const double om = 1.0 - th;
  const double h00 = (1.0 + 2.0 * th) * om * om;
  const double h10 = th * om * om;
  const double h01 = th * th * (3.0 - 2.0 * th);
  const double h11 = th * th * (th - 1.0);
  return h00 * values[i] + h10 * h * derivs[i] + h01 * values[i + 1] +
         h11 * h * derivs[i + 1];
}

Trajectory integrate_scalar(const std::function<double(double, double)>& rhs,
                            double t0, double y0, double t_end,
                            const ToleranceSpec& tol, double max_step,
                            double epsilon_tag, bool dense) {
  if (!(t_end > t0)) throw IntegrationError("integration span must be positive");
  if (!(max_step > 0.0)) throw IntegrationError("max_step must be positive");
  if (!(tol.rel > 0.0) || !(tol.abs > 0.0))
    throw IntegrationError("tolerances must be positive");

  Trajectory tr;
  tr.epsilon = epsilon_tag;
  tr.rel_tol = tol.rel;
  tr.abs_tol = tol.abs;
  tr.max_step = max_step;

  // Oscillatory solves spend almost every step at the cap; a dyadic cap makes
  // those increments exact in both t and y, which is what lets a trajectory
  // that has settled on a semi-stable rest point stay there.
  const double step_cap =
      epsilon_tag > 0.0 ? std::exp2(std::floor(std::log2(max_step))) : max_step;

  double t = t0, y = y0;
  double k1 = rhs(t, y);
  ++tr.rhs_evals;
  if (!std::isfinite(k1))
    throw IntegrationError("non-finite right-hand side at the initial point");
  const double k1_initial = k1;

  if (dense) {
    tr.times.push_back(t);
    tr.values.push_back(y);
    tr.derivs.push_back(k1);
  }

  double h = std::min(step_cap, t_end - t0);
  double errold = 1e-4;
  bool done = false;
  while (!done) {
    h = std::min(h, step_cap);
    bool final = false;
    if (h >= t_end - t) {
      // A zero-length closing step is well defined, so tolerate a clock that
      // landed on t_end an ulp early.
      h = std::max(t_end - t, 0.0);
      final = true;
    }
    if (!final && h < 1e-15 * std::max(1.0, std::fabs(t)))
      throw IntegrationError("step underflow at t=" + format_double(t));

    const double k2 = rhs(t + c2 * h, y + h * (a21 * k1));
    const double k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const double k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 =
        rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 =
        rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double y1 =
        y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double k7 = rhs(t + h, y1);
    tr.rhs_evals += 6;
    if (!std::isfinite(y1) || !std::isfinite(k7))
      throw IntegrationError("non-finite right-hand side at t=" +
                             format_double(t + h));

    const double err_raw =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double scale = tol.abs + tol.rel * std::max(std::fabs(y), std::fabs(y1));
    const double err = std::fabs(err_raw) / scale;

    if (err <= 1.0) {
      t = final ? t_end : t + h;
      y = y1;
      k1 = k7;
      if (dense) {
        tr.times.push_back(t);
        tr.values.push_back(y);
        tr.derivs.push_back(k1);
      }
      if (final) {
        done = true;
      } else {
        const double fac = err < 1e-30
                               ? 5.0
                               : 0.9 * std::pow(err, -0.14) * std::pow(errold, 0.08);
        h *= clamp(fac, 0.2, 5.0);
        errold = std::max(err, 1e-4);
      }
    } else {
      h *= clamp(0.9 * std::pow(err, -0.2), 0.1, 0.7);
    }
  }

  if (!dense) {
    tr.times = {t0, t_end};
    tr.values = {y0, y};
    tr.derivs = {k1_initial, k1};
  }
  return tr;
}

Trajectory solve_oscillatory(const ProblemField& field, double epsilon, double u0,
                             double t_end, const ToleranceSpec& tol, bool dense) {
  if (!(epsilon > 0.0)) throw IntegrationError("epsilon must be positive");
  if (u0 <= field.u_box.lo || u0 >= field.u_box.hi)
    std::cerr << "warning: initial value " << format_double(u0)
              << " lies outside the interior of the declared u-box ["
              << format_double(field.u_box.lo) << ", "
              << format_double(field.u_box.hi)
              << "]; bound metadata may not apply\n";
  const auto f = field.evaluate;
  const auto rhs = [f, epsilon](double t, double u) {
    return f(fast_phase(u, epsilon), fast_phase(t, epsilon), u, t);
  };
  return integrate_scalar(rhs, 0.0, u0, t_end, tol, epsilon / 10.0, epsilon,
                          dense);
}

Trajectory solve_cell(const ProblemField& field, double u_frozen, double t_frozen,
                      double v0, double tau_end, const ToleranceSpec& tol) {
  const auto f = field.evaluate;
  const auto rhs = [f, u_frozen, t_frozen](double tau, double v) {
    return f(v, tau, u_frozen, t_frozen);
  };
  return integrate_scalar(rhs, 0.0, v0, tau_end, tol, 0.05, 0.0, true);
}

void write_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "t,u\n";
  for (std::size_t i = 0; i < trajectory.size(); ++i)
    out << format_double(trajectory.times[i]) << ','
        << format_double(trajectory.values[i]) << '\n';
}

}  // namespace homog
