#pragma once

#include <iosfwd>
#include <vector>

#include "homog/expr.hpp"
#include "homog/field.hpp"
#include "homog/slope.hpp"

namespace homog {

// Linear transport in the plane solved by tracing the first coordinate of
// the characteristic backward through the oscillatory velocity field.
struct TransportProblem {
  ProblemField field;
  expr::Ast initial_data;  // V0(x1, x2)
  double lip_V0 = 1.0;
  std::vector<double> x1_grid;
  std::vector<double> x2_grid;
  std::vector<double> times;
  double epsilon = 1e-3;
};

struct TransportSolution {
  // Flattened [time][x1][x2] with x2 fastest.
  std::vector<double> values_eps;
  std::vector<double> values_hom;
  double sup_error = 0;
  double char_radius = 0;
};

// First component of the oscillatory characteristic after time t.
double characteristic_eps(const TransportProblem& problem, double x1, double x2,
                          double t, const ToleranceSpec& tol = {});

struct HomCharacteristic {
  double value = 0;
  double radius = 0;
};

// Effective characteristic driven by the slope table; the radius accumulates
// the table's certification along the path.
HomCharacteristic characteristic_hom(const SlopeTable& table, double x1,
                                     double x2, double t);

TransportSolution solve_transport(const TransportProblem& problem,
                                  const SlopeTable& table,
                                  const ToleranceSpec& tol = {}, int jobs = 1);

// Largest difference quotient of the effective characteristic in x2,
// sampled over the problem's grid and times.
double lipschitz_probe(const TransportProblem& problem, const SlopeTable& table,
                       double h);

// Slope table whose box covers every state the characteristics can visit.
SlopeTable transport_slope_table(const ProblemField& field,
                                 const std::vector<double>& x1_grid,
                                 const std::vector<double>& x2_grid,
                                 const std::vector<double>& times,
                                 std::size_t nu = 41, std::size_t nt = 41,
                                 double horizon = 1e4,
                                 const ToleranceSpec& tol = {},
                                 const QuadratureOptions& options = {},
                                 int jobs = 1);

void write_csv(std::ostream& out, const TransportProblem& problem,
               const TransportSolution& solution);

}  // namespace homog
