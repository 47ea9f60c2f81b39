#include "homog/slope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "homog/util.hpp"

namespace homog {

namespace {

struct SignScan {
  int sign = 0;          // +1 or -1 when one sign holds on the sample grid
  double min_abs = 0;    // smallest |g| seen after refinement
};

// Golden-section refinement of |g| around the coarse minimiser.
double refine_min_abs(const std::function<double(double)>& g, double lo,
                      double hi) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = std::fabs(g(x1));
  double f2 = std::fabs(g(x2));
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = std::fabs(g(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = std::fabs(g(x2));
    }
  }
  return std::min(f1, f2);
}

SignScan scan_sign(const std::function<double(double)>& g, double sign_floor) {
  constexpr int n = 10000;
  SignScan scan;
  double min_abs = std::numeric_limits<double>::infinity();
  int arg_min = 0;
  int sign = 0;
  for (int i = 0; i <= n; ++i) {
    const double v = static_cast<double>(i) / n;
    const double gv = g(v);
    const int s = gv > 0.0 ? 1 : (gv < 0.0 ? -1 : 0);
    if (s == 0) throw NotSignDefinite("cell right-hand side vanishes at v=" +
                                      format_double(v));
    if (sign == 0) sign = s;
    if (s != sign)
      throw NotSignDefinite("cell right-hand side changes sign near v=" +
                            format_double(v));
    if (std::fabs(gv) < min_abs) {
      min_abs = std::fabs(gv);
      arg_min = i;
    }
  }
  const double lo = static_cast<double>(std::max(arg_min - 1, 0)) / n;
  const double hi = static_cast<double>(std::min(arg_min + 1, n)) / n;
  scan.min_abs = std::min(min_abs, refine_min_abs(g, lo, hi));
  scan.sign = sign;
  if (scan.min_abs <= sign_floor)
    throw NotSignDefinite("cell right-hand side approaches zero (min |g| = " +
                          format_double(scan.min_abs) + ")");
  return scan;
}

struct PanelResult {
  double value = 0;
  double error = 0;
};

double simpson(const std::function<double(double)>& h, double a, double fa,
               double m, double fm, double b, double fb) {
  (void)h;
  (void)m;
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

PanelResult adaptive_panel(const std::function<double(double)>& h, double a,
                           double fa, double b, double fb, double m, double fm,
                           double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = h(lm);
  const double frm = h(rm);
  const double left = simpson(h, a, fa, lm, flm, m, fm);
  const double right = simpson(h, m, fm, rm, frm, b, fb);
  const double s2 = left + right;
  const double diff = s2 - whole;
  if (depth >= 30 || std::fabs(diff) / 15.0 <= tol * (b - a))
    return {s2 + diff / 15.0, std::fabs(diff) / 15.0};
  const PanelResult l =
      adaptive_panel(h, a, fa, m, fm, lm, flm, left, tol, depth + 1);
  const PanelResult r =
      adaptive_panel(h, m, fm, b, fb, rm, frm, right, tol, depth + 1);
  return {l.value + r.value, l.error + r.error};
}

PanelResult integrate_reciprocal(const std::function<double(double)>& g,
                                 double tol) {
  const auto h = [&g](double v) { return 1.0 / g(v); };
  constexpr int panels = 64;
  PanelResult total;
  double fa = h(0.0);
  for (int i = 0; i < panels; ++i) {
    const double a = static_cast<double>(i) / panels;
    const double b = static_cast<double>(i + 1) / panels;
    const double m = 0.5 * (a + b);
    const double fb = h(b);
    const double fm = h(m);
    const double whole = simpson(h, a, fa, m, fm, b, fb);
    const PanelResult p = adaptive_panel(h, a, fa, b, fb, m, fm, whole, tol, 0);
    total.value += p.value;
    total.error += p.error;
    fa = fb;
  }
  return total;
}

}  // namespace

std::string to_string(SlopeMethod method) {
  switch (method) {
    case SlopeMethod::trajectory: return "trajectory";
    case SlopeMethod::quadrature: return "quadrature";
    case SlopeMethod::window: return "window";
  }
  return "unknown";
}

SlopeEstimate estimate_trajectory(const ProblemField& field, double u, double t,
                                  double horizon, const ToleranceSpec& tol,
                                  double v0) {
  if (!(horizon >= 10.0))
    throw std::invalid_argument("averaging horizon must be at least 10");
  const Trajectory cell = solve_cell(field, u, t, v0, horizon, tol);
  SlopeEstimate est;
  est.value = (cell.end_value() - v0) / horizon;
  est.xi = field.xi();
  est.certified_radius =
      est.xi / horizon + 10.0 * (tol.rel + tol.abs) * (1.0 + horizon) / horizon;
  est.horizon = horizon;
  est.method = SlopeMethod::trajectory;
  est.certified = field.bounds_certified;
  return est;
}

SlopeEstimate estimate_quadrature(const ProblemField& field, double u, double t,
                                  const QuadratureOptions& options,
                                  const ToleranceSpec& tol) {
  (void)tol;
  if (!field.flags.tau_independent)
    throw NotTauIndependent(
        "reciprocal quadrature needs a tau-independent cell right-hand side");
  const auto f = field.evaluate;
  const auto g = [f, u, t](double v) { return f(v, 0.0, u, t); };
  scan_sign(g, options.sign_floor);
  const PanelResult integral = integrate_reciprocal(g, options.tol);
  SlopeEstimate est;
  est.value = 1.0 / integral.value;
  est.certified_radius =
      integral.error / (integral.value * integral.value) * 2.0;
  est.horizon = 0;
  est.method = SlopeMethod::quadrature;
  est.xi = field.xi();
  est.certified = field.bounds_certified;
  return est;
}

SlopeEstimate estimate_best(const ProblemField& field, double u, double t,
                            double horizon, const ToleranceSpec& tol,
                            const QuadratureOptions& options) {
  if (field.flags.tau_independent) {
    try {
      return estimate_quadrature(field, u, t, options, tol);
    } catch (const NotSignDefinite&) {
    }
  }
  return estimate_trajectory(field, u, t, horizon, tol);
}

WindowBracket estimate_window(const ProblemField& field, double u, double t,
                              double total, double window, double stride,
                              const ToleranceSpec& tol) {
  if (!(window > 0.0) || !(window <= total / 2.0))
    throw std::invalid_argument(
        "window length must be positive and at most half the total horizon");
  if (!(stride > 0.0)) throw std::invalid_argument("stride must be positive");
  const Trajectory cell = solve_cell(field, u, t, 0.0, total, tol);
  WindowBracket bracket;
  bracket.lambda_minus = std::numeric_limits<double>::infinity();
  bracket.lambda_plus = -std::numeric_limits<double>::infinity();
  for (double tau = 0.0; tau + window <= total + 1e-12; tau += stride) {
    const double hi = std::min(tau + window, total);
    const double q = (cell.eval(hi) - cell.eval(tau)) / window;
    bracket.lambda_minus = std::min(bracket.lambda_minus, q);
    bracket.lambda_plus = std::max(bracket.lambda_plus, q);
  }
  return bracket;
}

SlopeTable::SlopeTable(std::vector<double> u_grid, std::vector<double> t_grid,
                       std::vector<SlopeEstimate> cells)
    : u_grid_(std::move(u_grid)),
      t_grid_(std::move(t_grid)),
      cells_(std::move(cells)) {
  if (u_grid_.empty() || t_grid_.empty())
    throw std::invalid_argument("slope table grids must be non-empty");
  if (cells_.size() != u_grid_.size() * t_grid_.size())
    throw std::invalid_argument("slope table cell count does not match grids");
  const auto strictly_increasing = [](const std::vector<double>& g) {
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i] > g[i - 1])) return false;
    return true;
  };
  if (!strictly_increasing(u_grid_) || !strictly_increasing(t_grid_))
    throw std::invalid_argument("slope table grids must be strictly increasing");
}

const SlopeEstimate& SlopeTable::at(std::size_t iu, std::size_t it) const {
  return cells_.at(iu * t_grid_.size() + it);
}

bool SlopeTable::covers(double u, double t) const {
  const double su = 1e-9 * std::max(1.0, u_grid_.back() - u_grid_.front());
  const double st = 1e-9 * std::max(1.0, t_grid_.back() - t_grid_.front());
  return u >= u_grid_.front() - su && u <= u_grid_.back() + su &&
         t >= t_grid_.front() - st && t <= t_grid_.back() + st;
}

namespace {

struct CellIndex {
  std::size_t i0, i1;
  double theta;
};

CellIndex locate(const std::vector<double>& grid, double x) {
  CellIndex idx{0, 0, 0.0};
  if (grid.size() == 1) return idx;
  const double clamped = std::clamp(x, grid.front(), grid.back());
  auto it = std::upper_bound(grid.begin(), grid.end(), clamped);
  if (it == grid.end()) --it;
  std::size_t i1 = static_cast<std::size_t>(it - grid.begin());
  if (i1 == 0) i1 = 1;
  idx.i0 = i1 - 1;
  idx.i1 = i1;
  idx.theta = (clamped - grid[idx.i0]) / (grid[idx.i1] - grid[idx.i0]);
  return idx;
}

}  // namespace

double SlopeTable::lambda(double u, double t) const {
  if (!covers(u, t))
    throw TableCoverageError("point (" + format_double(u) + ", " +
                             format_double(t) + ") lies outside the table");
  const CellIndex iu = locate(u_grid_, u);
  const CellIndex it = locate(t_grid_, t);
  const double v00 = at(iu.i0, it.i0).value;
  const double v01 = at(iu.i0, it.i1).value;
  const double v10 = at(iu.i1, it.i0).value;
  const double v11 = at(iu.i1, it.i1).value;
  const double lo = v00 + it.theta * (v01 - v00);
  const double hi = v10 + it.theta * (v11 - v10);
  return lo + iu.theta * (hi - lo);
}

double SlopeTable::radius(double u, double t) const {
  if (!covers(u, t))
    throw TableCoverageError("point (" + format_double(u) + ", " +
                             format_double(t) + ") lies outside the table");
  const CellIndex iu = locate(u_grid_, u);
  const CellIndex it = locate(t_grid_, t);
  return std::max(std::max(at(iu.i0, it.i0).certified_radius,
                           at(iu.i0, it.i1).certified_radius),
                  std::max(at(iu.i1, it.i0).certified_radius,
                           at(iu.i1, it.i1).certified_radius));
}

double SlopeTable::max_radius() const {
  double m = 0;
  for (const auto& cell : cells_) m = std::max(m, cell.certified_radius);
  return m;
}

SlopeTable effective_field(const ProblemField& field,
                           const std::vector<double>& u_grid,
                           const std::vector<double>& t_grid, double horizon,
                           const ToleranceSpec& tol,
                           const QuadratureOptions& options, int jobs) {
  if (u_grid.empty() || t_grid.empty())
    throw std::invalid_argument("slope table grids must be non-empty");

  // Dimensions the field ignores collapse to a single computed row.
  const std::size_t nu = field.flags.u_independent ? 1 : u_grid.size();
  const std::size_t nt = field.flags.t_independent ? 1 : t_grid.size();

  std::vector<SlopeEstimate> active(nu * nt);
  parallel_for(nu * nt, jobs, [&](std::size_t k) {
    const std::size_t iu = k / nt;
    const std::size_t it = k % nt;
    active[k] = estimate_best(field, u_grid[iu], t_grid[it], horizon, tol, options);
  });

  std::vector<SlopeEstimate> cells(u_grid.size() * t_grid.size());
  for (std::size_t iu = 0; iu < u_grid.size(); ++iu)
    for (std::size_t it = 0; it < t_grid.size(); ++it) {
      const std::size_t src_u = field.flags.u_independent ? 0 : iu;
      const std::size_t src_t = field.flags.t_independent ? 0 : it;
      cells[iu * t_grid.size() + it] = active[src_u * nt + src_t];
    }
  return SlopeTable(u_grid, t_grid, std::move(cells));
}

void write_csv(std::ostream& out, const SlopeTable& table) {
  out << "u,t,lambda,radius,method\n";
  for (std::size_t iu = 0; iu < table.u_grid().size(); ++iu)
    for (std::size_t it = 0; it < table.t_grid().size(); ++it) {
      const SlopeEstimate& cell = table.at(iu, it);
      out << format_double(table.u_grid()[iu]) << ','
          << format_double(table.t_grid()[it]) << ','
          << format_double(cell.value) << ','
          << format_double(cell.certified_radius) << ','
          << to_string(cell.method) << '\n';
    }
}

}  // namespace homog
