#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "homog/expr.hpp"

namespace homog {

struct Interval {
  double lo = -4.0;
  double hi = 4.0;

  double width() const { return hi - lo; }
  bool contains(double u) const { return u >= lo && u <= hi; }
};

struct FieldFlags {
  bool tau_independent = false;
  bool u_independent = false;
  bool t_independent = false;
};

// Oscillatory right-hand side f(v, tau, u, t): 1-periodic in v and tau,
// non-increasing in u. The bound metadata (alpha, beta, lipschitz_v) is
// declared over u_box; every certified radius downstream is built from it.
struct ProblemField {
  std::function<double(double v, double tau, double u, double t)> evaluate;
  double alpha = 0.0;        // Lipschitz constant over the declared box
  double beta = 0.0;         // sup-norm bound over the declared box
  double lipschitz_v = 0.0;  // Lipschitz constant in v alone
  Interval u_box{};
  FieldFlags flags{};
  std::string source;
  bool bounds_certified = false;

  // Ergodicity radius constant and its perturbation-stability counterpart.
  double xi() const { return 1.0 + 2.0 * beta; }
  double xi_bar() const { return (3.0 + 2.0 * xi()) * (1.0 + 2.0 * lipschitz_v); }
};

struct BoundsReport {
  double sampled_beta = 0.0;
  double sampled_alpha = 0.0;
  double periodicity_defect = 0.0;
  double monotonicity_defect = 0.0;
  std::size_t sample_count = 0;
};

// Built-in names: example1, example2, example3, constant (params: c),
// shifted_cosine (params: a, giving f = -a + cos(2 pi v)).
ProblemField builtin_field(const std::string& name, const std::vector<double>& params = {});

// Wraps an expression in the variables (v, tau, u, t). The declared bounds
// are taken on trust until certify_field confirms them by sampling.
ProblemField expression_field(const expr::Ast& f, double alpha, double beta,
                              double lipschitz_v, Interval u_box = {});

// Freezes (u, t), producing a bare cell profile. alpha and lipschitz_v are
// kept; beta is narrowed to a sampled sup over (v, tau) plus a Lipschitz
// margin, so the frozen profile carries its own honest ergodicity constant.
ProblemField freeze_field(const ProblemField& field, double u_frozen, double t_frozen);

// f + sign*gamma, with beta widened accordingly.
ProblemField perturb_field(const ProblemField& field, double gamma, int sign);

// Samples periodicity (shifts by 1, 2, 3 in v, tau, and the diagonal),
// monotonicity in u, and the declared bounds over [0,1]^2 x u_box x [0,10].
// Half the budget is a low-discrepancy lattice, half is seeded Monte Carlo.
BoundsReport validate_field(const ProblemField& field, std::size_t samples,
                            std::uint64_t seed = 12345);

// Defects at most 1e-9 and sampled bounds within the declared ones.
bool bounds_ok(const BoundsReport& report, const ProblemField& field);

// validate_field + sets field.bounds_certified from bounds_ok.
BoundsReport certify_field(ProblemField& field, std::size_t samples,
                           std::uint64_t seed = 12345);

}  // namespace homog
