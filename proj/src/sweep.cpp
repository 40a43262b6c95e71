#include "madelung/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "madelung/error.hpp"

namespace madelung {

namespace {

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

std::vector<double> distinct(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(), same), v.end());
  return v;
}

double max_abs(std::initializer_list<double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

double normalized(double residual, double scale) { return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual); }

std::string describe(const char* what, const char* axis, double fixed, double a, double b) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at " << axis << " = " << fixed << " between " << a << " and " << b;
  return os.str();
}

StateRow solve_row(const Params& p, const SweepOptions& opts) {
  StateRow row;
  row.state.params = p;
  row.solver_rtol = opts.solver.rtol;
  row.quadrature_tol = opts.quadrature.rel_tol;
  try {
    const RadialSolution s = integrate_radial(p, opts.solver);
    row.state = compute_state(s, opts.quadrature);
    if (!s.monotone) {
      row.status = "non_monotone";
    } else if (!s.positive_sensitivity) {
      row.status = "nonpositive_sensitivity";
    }
  } catch (const Error& e) {
    row.status = std::string(to_string(e.code()));
  }
  return row;
}

}  // namespace

std::vector<double> StateTable::T_values() const {
  std::vector<double> v;
  for (const auto& row : rows) v.push_back(row.state.params.T);
  return distinct(std::move(v));
}

std::vector<double> StateTable::X_values() const {
  std::vector<double> v;
  for (const auto& row : rows) v.push_back(row.state.params.X);
  return distinct(std::move(v));
}

std::vector<const StateRow*> StateTable::at_X(double X) const {
  std::vector<const StateRow*> out;
  for (const auto& row : rows) {
    if (row.ok() && same(row.state.params.X, X)) out.push_back(&row);
  }
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->state.params.T < b->state.params.T; });
  return out;
}

std::vector<const StateRow*> StateTable::at_T(double T) const {
  std::vector<const StateRow*> out;
  for (const auto& row : rows) {
    if (row.ok() && same(row.state.params.T, T)) out.push_back(&row);
  }
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->state.params.X < b->state.params.X; });
  return out;
}

const StateRow* StateTable::find(double T, double X) const {
  for (const auto& row : rows) {
    if (same(row.state.params.T, T) && same(row.state.params.X, X)) return &row;
  }
  return nullptr;
}

ThermoState solve_state(const Params& params, const SweepOptions& opts) {
  return compute_state(integrate_radial(params, opts.solver), opts.quadrature);
}

StateTable sweep(std::span<const double> T_values, std::span<const double> X_values, const SweepOptions& opts,
                 const Params& units) {
  opts.solver.validate();
  opts.quadrature.validate();
  std::vector<Params> grid;
  for (double T : T_values) {
    for (double X : X_values) {
      Params p = units;
      p.T = T;
      p.X = X;
      p.validate();
      grid.push_back(p);
    }
  }
  StateTable table;
  table.rows.resize(grid.size());
  unsigned n = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(grid.size(), 1)));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) table.rows[i] = solve_row(grid[i], opts);
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  return table;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw Error(ErrorCode::InvalidArgument, "log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

std::string_view to_string(FitModel model) noexcept {
  switch (model) {
    case FitModel::PowerLawT: return "power_law_T";
    case FitModel::PowerLawX: return "power_law_X";
    case FitModel::PowerLaw: return "power_law";
  }
  return "unknown";
}

FitResult fit_power_law(std::span<const double> x, std::span<const double> y, FitWindow window, std::size_t min_points) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "fit needs x and y of equal length");
  if (!(window.lo > 0.0) || !(window.hi >= window.lo)) throw Error(ErrorCode::InvalidArgument, "fit window must satisfy 0 < lo <= hi");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double tol = 1e-12 * x[i];
    if (x[i] >= window.lo - tol && x[i] <= window.hi + tol && x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < std::max<std::size_t>(min_points, 2)) {
    throw Error(ErrorCode::InsufficientData, "fit window [" + std::to_string(window.lo) + ", " + std::to_string(window.hi) +
                                                 "] holds " + std::to_string(lx.size()) + " points, need " +
                                                 std::to_string(min_points));
  }
  const auto n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InsufficientData, "fit window holds a single distinct abscissa");
  FitResult fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.coefficient = std::exp(intercept);
  double ss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + fit.exponent * lx[i]);
    ss += r * r;
  }
  fit.residual_norm = std::sqrt(ss / n);
  fit.window = window;
  fit.points = lx.size();
  return fit;
}

FitResult fit_scaling_T(const StateTable& table, double X, FitWindow window) {
  std::vector<double> T, U;
  for (const StateRow* row : table.at_X(X)) {
    T.push_back(row->state.params.T);
    U.push_back(row->state.Ubar);
  }
  FitResult fit = fit_power_law(T, U, window);
  fit.model = FitModel::PowerLawT;
  return fit;
}

ScalingXFit fit_scaling_X(const StateTable& table, double T, FitWindow small, FitWindow large) {
  std::vector<double> X, U;
  for (const StateRow* row : table.at_T(T)) {
    X.push_back(row->state.params.X);
    U.push_back(row->state.Ubar);
  }
  ScalingXFit out{fit_power_law(X, U, small), fit_power_law(X, U, large)};
  out.small.model = FitModel::PowerLawX;
  out.large.model = FitModel::PowerLawX;
  return out;
}

MonotonicityReport check_monotonicity(const StateTable& table) {
  MonotonicityReport rep;
  for (double X : table.X_values()) {
    const auto rows = table.at_X(X);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const ThermoState& a = rows[i - 1]->state;
      const ThermoState& b = rows[i]->state;
      rep.checked += 3;
      if (!(b.Ubar > a.Ubar)) rep.violations.push_back(describe("Ubar not increasing in T", "X", X, a.params.T, b.params.T));
      if (!(b.Kbar > a.Kbar)) rep.violations.push_back(describe("Kbar not increasing in T", "X", X, a.params.T, b.params.T));
      if (!(b.r_m < a.r_m)) rep.violations.push_back(describe("r_m not decreasing in T", "X", X, a.params.T, b.params.T));
    }
  }
  for (double T : table.T_values()) {
    const auto rows = table.at_T(T);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const ThermoState& a = rows[i - 1]->state;
      const ThermoState& b = rows[i]->state;
      rep.checked += 2;
      if (!(b.Ubar > a.Ubar)) rep.violations.push_back(describe("Ubar not increasing in X", "T", T, a.params.X, b.params.X));
      if (!(b.r_m < a.r_m)) rep.violations.push_back(describe("r_m not decreasing in X", "T", T, a.params.X, b.params.X));
    }
  }
  return rep;
}

StateProvider solving_provider(const SweepOptions& opts) {
  return [opts](const Params& p) { return solve_state(p, opts); };
}

StateProvider table_provider(const StateTable& table) {
  return [&table](const Params& p) {
    const StateRow* row = table.find(p.T, p.X);
    if (row == nullptr || !row->ok()) {
      throw Error(ErrorCode::InsufficientData,
                  "state table has no usable row at T = " + std::to_string(p.T) + ", X = " + std::to_string(p.X));
    }
    return row->state;
  };
}

Deltas relative_deltas(const Params& center, double rel) {
  if (!(rel > 0.0) || !(rel < 0.5)) throw Error(ErrorCode::InvalidArgument, "relative step must lie in (0, 0.5)");
  return {rel * center.T, rel * center.X};
}

namespace {

struct Neighbors {
  ThermoState c, Tp, Tm, Xp, Xm;
};

Neighbors neighbors(const Params& center, Deltas d, const StateProvider& provider) {
  center.validate();
  if (!(d.dT > 0.0) || !(d.dX > 0.0) || !(d.dT < center.T) || !(d.dX < center.X)) {
    throw Error(ErrorCode::InvalidArgument, "steps must be positive and smaller than the center values");
  }
  auto at = [&](double dT, double dX) {
    Params p = center;
    p.T += dT;
    p.X += dX;
    return provider(p);
  };
  return {provider(center), at(d.dT, 0), at(-d.dT, 0), at(0, d.dX), at(0, -d.dX)};
}

}  // namespace

FirstLawReport first_law_residual(const Params& center, Deltas d, const StateProvider& provider) {
  const Neighbors n = neighbors(center, d, provider);
  const double T = center.T;
  FirstLawReport r;
  r.deltas = d;
  r.Ybar = n.c.Ybar;
  r.dU_X = n.Xp.Ubar - n.Xm.Ubar;
  r.TdH_X = T * (n.Xp.H - n.Xm.H);
  r.YdX = n.c.Ybar * 2 * d.dX;
  r.residual_X = normalized(r.dU_X - r.TdH_X - r.YdX, max_abs({r.dU_X, r.TdH_X, r.YdX}));
  r.dU_T = n.Tp.Ubar - n.Tm.Ubar;
  r.TdH_T = T * (n.Tp.H - n.Tm.H);
  r.residual_T = normalized(r.dU_T - r.TdH_T, max_abs({r.dU_T, r.TdH_T}));
  r.mean_dU_dT = (n.c.Ubar + n.c.Kbar - center.X * n.c.Ybar) / T;
  const double term = r.mean_dU_dT * 2 * d.dT;
  r.residual_T_corrected = normalized(r.dU_T - r.TdH_T - term, max_abs({r.dU_T, r.TdH_T, term}));
  r.dUbar_dX = r.dU_X / (2 * d.dX);
  return r;
}

double observed_order(double coarse, double fine) noexcept {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

FirstLawStudy first_law_study(const Params& center, double rel_step, const StateProvider& provider) {
  FirstLawStudy s;
  s.coarse = first_law_residual(center, relative_deltas(center, rel_step), provider);
  s.fine = first_law_residual(center, relative_deltas(center, rel_step / 2), provider);
  s.order_X = observed_order(s.coarse.residual_X, s.fine.residual_X);
  s.order_T = observed_order(s.coarse.residual_T, s.fine.residual_T);
  s.order_T_corrected = observed_order(s.coarse.residual_T_corrected, s.fine.residual_T_corrected);
  return s;
}

TensionReport boundary_tensions(const Params& center, Deltas d, const StateProvider& provider, double threshold) {
  const Neighbors n = neighbors(center, d, provider);
  constexpr double two_pi = 2 * std::numbers::pi;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  TensionReport t;
  t.deltas = d;
  t.Ybar = n.c.Ybar;
  t.H = n.c.H;
  t.drm_dX = (n.Xp.r_m - n.Xm.r_m) / (2 * d.dX);
  t.drm_dT = (n.Tp.r_m - n.Tm.r_m) / (2 * d.dT);
  t.dLs_dT = two_pi * t.drm_dT;
  t.degenerate_X = !(std::abs(t.drm_dX) > threshold);
  t.degenerate_T = !(std::abs(t.drm_dT) > threshold);
  t.sigma_X = t.degenerate_X ? nan : -t.Ybar / (two_pi * std::abs(t.drm_dX));
  t.sigma_T = t.degenerate_T ? nan : t.H / t.dLs_dT;
  t.sigma = t.sigma_X - t.sigma_T;
  return t;
}

namespace {

// A zero change of L_s contributes nothing even when the tension is undefined.
double work(double tension, double dLs) { return dLs == 0.0 ? 0.0 : tension * dLs; }

}  // namespace

FreeEnergyReport free_energy_differential_check(const Params& center, Deltas d, const StateProvider& provider) {
  const Neighbors n = neighbors(center, d, provider);
  const TensionReport t = boundary_tensions(center, d, provider);
  constexpr double two_pi = 2 * std::numbers::pi;
  FreeEnergyReport r;
  r.deltas = d;
  r.dF_X = n.Xp.F - n.Xm.F;
  r.sigmaX_dLs_X = work(t.sigma_X, two_pi * (n.Xp.r_m - n.Xm.r_m));
  r.residual_X = normalized(r.dF_X - r.sigmaX_dLs_X, max_abs({r.dF_X, r.sigmaX_dLs_X}));
  r.dF_T = n.Tp.F - n.Tm.F;
  r.HdT = n.c.H * 2 * d.dT;
  const double dLs_T = two_pi * (n.Tp.r_m - n.Tm.r_m);
  r.sigmaX_dLs_T = work(t.sigma_X, dLs_T);
  r.residual_T = normalized(r.dF_T + r.HdT - r.sigmaX_dLs_T, max_abs({r.dF_T, r.HdT, r.sigmaX_dLs_T}));
  const double sigma_dLs = work(t.sigma, dLs_T);
  r.residual_sigma = normalized(r.dF_T - sigma_dLs, max_abs({r.dF_T, sigma_dLs}));
  return r;
}

}  // namespace madelung
