#pragma once

#include <iosfwd>
#include <vector>

#include "homog/field.hpp"
#include "homog/scheme.hpp"

namespace homog {

// Final time for a convergence run: either fixed, or scaled with the
// oscillation period as delta * eps * |log eps|.
struct TSpec {
  static TSpec fixed(double T);
  static TSpec scaled(double delta);
  double resolve(double epsilon) const;

  bool is_scaled = false;
  double value = 0;
};

struct RateRow {
  double epsilon = 0;
  double T = 0;
  double sup_error = 0;
  double product = 0;  // sup_error * |log eps| / T
  double dt_used = 0;
};

struct ErrorReport {
  std::vector<RateRow> rows;  // descending epsilon
  double fitted_c = 0;        // max of the products
  bool analytic_reference = false;
};

ErrorReport rate_experiment(const ProblemField& field, double u0,
                            const TSpec& tspec,
                            const std::vector<double>& eps_list, double C = 1.0,
                            const ToleranceSpec& tol = {},
                            const QuadratureOptions& options = {},
                            double horizon = 1e4, int jobs = 1);

struct SharpnessRow {
  double epsilon = 0;
  double t = 0;
  double measured_gap = 0;
  double predicted = 0;
  double ratio = 0;
};

// Measures the exactly-solvable pinned field's gap at t = delta eps |log eps|
// against its closed-form prediction, exhibiting the logarithmic rate.
std::vector<SharpnessRow> sharpness_experiment(
    double delta, const std::vector<double>& eps_list,
    const ToleranceSpec& tol = {});

struct StabilityRow {
  double gamma = 0;
  double lambda_gamma = 0;
  double lambda_0 = 0;
  double delta_lambda = 0;
  double bound = 0;       // xi_bar / |log gamma|
  double radius_sum = 0;  // measurement slack for both slopes
};

struct StabilityReport {
  std::vector<StabilityRow> rows;  // descending gamma
  double xi_bar = 0;
};

StabilityReport stability_experiment(const ProblemField& cell_field,
                                     const std::vector<double>& gammas,
                                     double horizon, int sign = 1,
                                     const ToleranceSpec& tol = {},
                                     const QuadratureOptions& options = {},
                                     int jobs = 1);

void write_csv(std::ostream& out, const ErrorReport& report);
void write_csv(std::ostream& out, const std::vector<SharpnessRow>& rows);
void write_csv(std::ostream& out, const StabilityReport& report);

}  // namespace homog
