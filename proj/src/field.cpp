#include "homog/field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "homog/util.hpp"

namespace homog {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap01(double w) { return w - std::floor(w); }

void need_params(const std::string& name, const std::vector<double>& params,
                 std::size_t count) {
  if (params.size() != count)
    throw std::invalid_argument("field '" + name + "' expects " +
                                std::to_string(count) + " parameter(s), got " +
                                std::to_string(params.size()));
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

ProblemField builtin_field(const std::string& name, const std::vector<double>& params) {
  ProblemField f;
  f.source = name;
  f.bounds_certified = true;
  if (name == "example1") {
    need_params(name, params, 0);
    f.evaluate = [](double v, double, double u, double) {
      return -u + std::cos(two_pi * v);
    };
    f.alpha = two_pi;
    f.beta = 5.0;
    f.lipschitz_v = two_pi;
    f.flags = {true, false, true};
  } else if (name == "example2") {
    need_params(name, params, 0);
    f.evaluate = [](double v, double, double u, double) {
      return -u + std::fabs(std::sin(two_pi * v));
    };
    f.alpha = two_pi;
    f.beta = 5.0;
    f.lipschitz_v = two_pi;
    f.flags = {true, false, true};
  } else if (name == "example3") {
    need_params(name, params, 0);
    f.evaluate = [](double v, double tau, double, double) {
      return std::fabs(wrap01(v + tau) - 0.5) - 1.0;
    };
    f.alpha = 1.0;
    f.beta = 1.0;
    f.lipschitz_v = 1.0;
    f.flags = {false, true, true};
  } else if (name == "constant") {
    need_params(name, params, 1);
    const double c = params[0];
    f.evaluate = [c](double, double, double, double) { return c; };
    f.alpha = 0.0;
    f.beta = std::fabs(c);
    f.lipschitz_v = 0.0;
    f.flags = {true, true, true};
    f.source = "constant(" + format_double(c) + ")";
  } else if (name == "shifted_cosine") {
    need_params(name, params, 1);
    const double a = params[0];
    f.evaluate = [a](double v, double, double, double) {
      return -a + std::cos(two_pi * v);
    };
    f.alpha = two_pi;
    f.beta = std::fabs(a) + 1.0;
    f.lipschitz_v = two_pi;
    f.flags = {true, true, true};
    f.source = "shifted_cosine(" + format_double(a) + ")";
  } else {
    throw std::invalid_argument("unknown built-in field '" + name + "'");
  }
  return f;
}

ProblemField expression_field(const expr::Ast& ast, double alpha, double beta,
                              double lipschitz_v, Interval u_box) {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(lipschitz_v >= 0.0))
    throw std::invalid_argument("declared field bounds must be non-negative");
  if (!(u_box.lo < u_box.hi))
    throw std::invalid_argument("u_box must be a non-degenerate interval");
  ProblemField f;
  f.evaluate = [ast](double v, double tau, double u, double t) {
    const std::map<std::string, double> bindings{
        {"v", v}, {"tau", tau}, {"u", u}, {"t", t}};
    return expr::eval(ast, bindings);
  };
  f.alpha = alpha;
  f.beta = beta;
  f.lipschitz_v = lipschitz_v;
  f.u_box = u_box;
  f.flags.tau_independent = !expr::uses_variable(ast, "tau");
  f.flags.u_independent = !expr::uses_variable(ast, "u");
  f.flags.t_independent = !expr::uses_variable(ast, "t");
  f.source = expr::print(ast);
  f.bounds_certified = false;
  return f;
}

ProblemField freeze_field(const ProblemField& field, double u_frozen, double t_frozen) {
  ProblemField out = field;
  const auto base = field.evaluate;
  out.evaluate = [base, u_frozen, t_frozen](double v, double tau, double, double) {
    return base(v, tau, u_frozen, t_frozen);
  };
  out.flags.u_independent = true;
  out.flags.t_independent = true;
  out.source = field.source + " frozen(u=" + format_double(u_frozen) +
               ",t=" + format_double(t_frozen) + ")";

  // Sampled sup over one period per active oscillatory variable; with the
  // Lipschitz margin this upper-bounds the true sup, so the narrowed beta
  // stays a valid bound.
  double sup = 0.0;
  if (field.flags.tau_independent) {
    const int n = 1 << 14;
    for (int i = 0; i < n; ++i)
      sup = std::max(sup, std::fabs(out.evaluate(double(i) / n, 0.0, 0.0, 0.0)));
    sup += field.alpha * 0.5 / n;
  } else {
    const int n = 1 << 10;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        sup = std::max(sup, std::fabs(out.evaluate(double(i) / n, double(j) / n,
                                                   0.0, 0.0)));
    sup += field.alpha * 1.0 / n;
  }
  out.beta = std::min(field.beta, sup);
  return out;
}

ProblemField perturb_field(const ProblemField& field, double gamma, int sign) {
  if (!(gamma >= 0.0))
    throw std::invalid_argument("perturbation size must be non-negative");
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("perturbation sign must be +1 or -1");
  ProblemField out = field;
  const auto base = field.evaluate;
  const double shift = sign * gamma;
  out.evaluate = [base, shift](double v, double tau, double u, double t) {
    return base(v, tau, u, t) + shift;
  };
  out.beta = field.beta + gamma;
  out.source = field.source + (sign > 0 ? " + " : " - ") + format_double(gamma);
  return out;
}

BoundsReport validate_field(const ProblemField& field, std::size_t samples,
                            std::uint64_t seed) {
  if (samples < 100)
    throw std::invalid_argument("validation needs at least 100 samples");
  BoundsReport rep;
  rep.sample_count = samples;

  const double t_ref = 10.0;
  const double u_lo = field.u_box.lo;
  const double u_span = field.u_box.width();
  std::mt19937_64 gen(seed);

  // Kronecker lattice directions (fractional parts of sqrt primes).
  const double g1 = frac(std::sqrt(2.0)), g2 = frac(std::sqrt(3.0));
  const double g3 = frac(std::sqrt(5.0)), g4 = frac(std::sqrt(7.0));
  const double g5 = frac(std::sqrt(11.0));

  const std::size_t lattice = samples / 2;
  const double h = 1e-5;
  for (std::size_t i = 0; i < samples; ++i) {
    double v, tau, uf, tf, m;
    if (i < lattice) {
      const double k = double(i) + 1.0;
      v = frac(k * g1);
      tau = frac(k * g2);
      uf = frac(k * g3);
      tf = frac(k * g4);
      m = frac(k * g5);
    } else {
      v = u01(gen);
      tau = u01(gen);
      uf = u01(gen);
      tf = u01(gen);
      m = u01(gen);
    }
    const double u = u_lo + u_span * uf;
    const double t = t_ref * tf;
    const double f0 = field.evaluate(v, tau, u, t);
    rep.sampled_beta = std::max(rep.sampled_beta, std::fabs(f0));

    for (int k = 1; k <= 3; ++k) {
      const double dv = std::fabs(field.evaluate(v + k, tau, u, t) - f0);
      const double dtau = std::fabs(field.evaluate(v, tau + k, u, t) - f0);
      const double ddiag = std::fabs(field.evaluate(v + k, tau + k, u, t) - f0);
      rep.periodicity_defect =
          std::max({rep.periodicity_defect, dv, dtau, ddiag});
    }

    // Second u draw above the first; any increase of f is a defect.
    const double u2 = u + m * (field.u_box.hi - u);
    if (u2 > u) {
      const double rise = field.evaluate(v, tau, u2, t) - f0;
      rep.monotonicity_defect = std::max(rep.monotonicity_defect, rise);
    }

    const double qs[4] = {
        std::fabs(field.evaluate(v + h, tau, u, t) - f0) / h,
        std::fabs(field.evaluate(v, tau + h, u, t) - f0) / h,
        u + h <= field.u_box.hi
            ? std::fabs(field.evaluate(v, tau, u + h, t) - f0) / h
            : 0.0,
        std::fabs(field.evaluate(v, tau, u, t + h) - f0) / h,
    };
    rep.sampled_alpha = std::max({rep.sampled_alpha, qs[0], qs[1], qs[2], qs[3]});
  }
  return rep;
}

bool bounds_ok(const BoundsReport& report, const ProblemField& field) {
  const double alpha_tol = std::max(1e-9, 1e-6 * field.alpha);
  return report.periodicity_defect <= 1e-9 &&
         report.monotonicity_defect <= 1e-9 &&
         report.sampled_beta <= field.beta + 1e-9 &&
         report.sampled_alpha <= field.alpha + alpha_tol;
}

BoundsReport certify_field(ProblemField& field, std::size_t samples, std::uint64_t seed) {
  const BoundsReport rep = validate_field(field, samples, seed);
  field.bounds_certified = bounds_ok(rep, field);
  return rep;
}

}  // namespace homog
