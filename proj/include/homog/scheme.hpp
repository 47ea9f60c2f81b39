#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "homog/field.hpp"
#include "homog/slope.hpp"

namespace homog {

// Supplies the effective slope at a macroscopic state; implementations may
// compute it directly or look it up in a precomputed table.
using SlopeSource = std::function<SlopeEstimate(double u, double t)>;

SlopeSource direct_source(const ProblemField& field, double horizon,
                          const ToleranceSpec& tol = {},
                          const QuadratureOptions& options = {});

SlopeSource table_source(const SlopeTable& table);

// Piecewise-linear path produced by the explicit effective-slope scheme.
struct HomogenizedPath {
  double dt = 0;
  std::vector<double> values;          // v^0 .. v^n
  std::vector<double> slopes;          // slope used on [k dt, (k+1) dt)
  std::vector<SlopeEstimate> estimates;
  std::function<double(double)> analytic;  // closed form when one is known

  std::size_t steps() const { return slopes.size(); }
  double t_end() const { return dt * static_cast<double>(steps()); }
  double eval(double t) const;
  double radius_within(double t) const;
  double max_radius() const;
};

HomogenizedPath run_scheme(const SlopeSource& source, double v0, double dt,
                           std::size_t steps);

// Homogenized path fine enough to serve as the limit when measuring the
// oscillatory-to-effective gap; attaches the closed form where one exists.
HomogenizedPath reference_solution(const ProblemField& field, double u0,
                                   double t_end, double dt_ref,
                                   const ToleranceSpec& tol = {},
                                   const QuadratureOptions& options = {},
                                   double horizon = 1e4);

struct ModulusProbeRow {
  double dv = 0;
  double ds = 0;
  double lhs = 0;
  double lhs_slack = 0;
  double rhs_bound = 0;
};

// Measured change of the effective slope under small argument offsets,
// compared against the logarithmic modulus bound.
std::vector<ModulusProbeRow> modulus_probe(
    const ProblemField& field, double u, double t,
    const std::vector<std::pair<double, double>>& offsets, double horizon = 1e4,
    const ToleranceSpec& tol = {}, const QuadratureOptions& options = {});

void write_csv(std::ostream& out, const HomogenizedPath& path);

}  // namespace homog
