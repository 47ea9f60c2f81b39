#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "homog/field.hpp"

namespace homog {

struct ToleranceSpec {
  double rel = 1e-9;
  double abs = 1e-9;
};

// Phase of x on the unit cell at scale epsilon, a valid fast argument for any
// field by periodicity. Dividing x directly rounds at the magnitude of
// x / epsilon and scrambles the low bits that carry the phase once that ratio
// is large; the exact remainder keeps them.
inline double fast_phase(double x, double epsilon) {
  return std::fmod(x, epsilon) / epsilon;
}

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense sampled solution of a scalar ODE, one node per accepted step.
struct Trajectory {
  double epsilon = 0.0;  // 0 when no oscillation scale applies (cell problems)
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  double max_step = 0.0;
  std::uint64_t rhs_evals = 0;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> derivs;  // right-hand side at each node

  std::size_t size() const { return times.size(); }
  double start_time() const { return times.front(); }
  double end_time() const { return times.back(); }
  double end_value() const { return values.back(); }

  // Cubic Hermite interpolation on the step mesh; exact at the nodes.
  // Only meaningful for trajectories recorded with dense = true.
  double eval(double t) const;
};

// Adaptive solve of y' = rhs(t, y) with an embedded 5(4) pair, PI step
// control, and steps capped at max_step. With dense = false only the two
// endpoint nodes are recorded. When epsilon_tag > 0 a capped step is snapped
// down to the largest power of two not exceeding max_step: binary-fraction
// steps keep the long t and y accumulations exact, so a trajectory resting
// on a semi-stable point stays put instead of being random-walked across it
// by per-step rounding.
Trajectory integrate_scalar(const std::function<double(double, double)>& rhs,
                            double t0, double y0, double t_end,
                            const ToleranceSpec& tol, double max_step,
                            double epsilon_tag = 0.0, bool dense = true);

// u' = f(u/eps, t/eps, u, t) on [0, t_end]; steps capped at eps/10.
Trajectory solve_oscillatory(const ProblemField& field, double epsilon, double u0,
                             double t_end, const ToleranceSpec& tol = {},
                             bool dense = true);

// Frozen-coefficient cell problem v' = f(v, tau, u_frozen, t_frozen) on
// [0, tau_end]; steps capped at one twentieth of the unit period.
Trajectory solve_cell(const ProblemField& field, double u_frozen, double t_frozen,
                      double v0, double tau_end, const ToleranceSpec& tol = {});

// Columns t,u.
void write_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace homog
