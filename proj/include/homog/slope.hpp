#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "homog/field.hpp"
#include "homog/integrate.hpp"

namespace homog {

enum class SlopeMethod { trajectory, quadrature, window };

std::string to_string(SlopeMethod method);

// One effective-slope measurement together with an explicit error radius.
// When `certified` is set, the radius follows from the field's declared
// bounds; otherwise it is the same formula evaluated on unverified metadata.
struct SlopeEstimate {
  double value = 0;
  double certified_radius = 0;
  double horizon = 0;
  SlopeMethod method = SlopeMethod::trajectory;
  double xi = 0;
  bool certified = false;
};

struct NotTauIndependent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSignDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TableCoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
  double tol = 1e-11;
  double sign_floor = 1e-8;
};

// Long-run average slope of the cell trajectory started at v0.
SlopeEstimate estimate_trajectory(const ProblemField& field, double u, double t,
                                  double horizon, const ToleranceSpec& tol = {},
                                  double v0 = 0.0);

// Exact reciprocal-integral formula, valid when the cell right-hand side has
// no tau dependence and one sign on the whole period.
SlopeEstimate estimate_quadrature(const ProblemField& field, double u, double t,
                                  const QuadratureOptions& options = {},
                                  const ToleranceSpec& tol = {});

// Quadrature when admissible, trajectory averaging otherwise.
SlopeEstimate estimate_best(const ProblemField& field, double u, double t,
                            double horizon, const ToleranceSpec& tol = {},
                            const QuadratureOptions& options = {});

struct WindowBracket {
  double lambda_minus = 0;
  double lambda_plus = 0;
};

// Range of sliding-window difference quotients along one cell trajectory.
WindowBracket estimate_window(const ProblemField& field, double u, double t,
                              double total, double window, double stride,
                              const ToleranceSpec& tol = {});

// Effective slope sampled on a rectangular grid, bilinear in between.
class SlopeTable {
 public:
  SlopeTable(std::vector<double> u_grid, std::vector<double> t_grid,
             std::vector<SlopeEstimate> cells);

  const std::vector<double>& u_grid() const { return u_grid_; }
  const std::vector<double>& t_grid() const { return t_grid_; }
  const SlopeEstimate& at(std::size_t iu, std::size_t it) const;

  double lambda(double u, double t) const;
  double radius(double u, double t) const;
  double max_radius() const;
  bool covers(double u, double t) const;

 private:
  std::vector<double> u_grid_;
  std::vector<double> t_grid_;
  std::vector<SlopeEstimate> cells_;  // row-major, iu * t_grid_.size() + it
};

SlopeTable effective_field(const ProblemField& field,
                           const std::vector<double>& u_grid,
                           const std::vector<double>& t_grid, double horizon,
                           const ToleranceSpec& tol = {},
                           const QuadratureOptions& options = {}, int jobs = 1);

void write_csv(std::ostream& out, const SlopeTable& table);

}  // namespace homog
