#include "krf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "krf/errors.hpp"
#include "krf/functionals.hpp"

namespace krf {

const char* to_string(FlowKind k) { return k == FlowKind::krf ? "krf" : "e1_gradient"; }
const char* to_string(Scheme s) { return s == Scheme::bogacki_shampine ? "bogacki_shampine" : "dormand_prince"; }
const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::t_final: return "t_final";
    case Termination::error: return "error";
  }
  return "error";
}

std::vector<double> FlowState::phi() const {
  std::vector<double> out(osc);
  for (auto& v : out) v += shift;
  return out;
}

std::vector<double> FlowState::phi_dot() const {
  std::vector<double> out(osc_dot);
  for (auto& v : out) v += shift_dot;
  return out;
}

namespace {

// Right side at one point of the extended system (osc, shift, J, cumulative).
struct Eval {
  std::shared_ptr<const RadialProfile> profile;
  std::shared_ptr<const Geometry> geometry;
  std::vector<double> osc_dot;
  double shift_dot = 0.0;
  std::vector<double> J_rate;
  double L2R = 0.0;
};

// Unsplit right side w + c: w is a grid function, c a constant offset.
void raw_rhs(FlowKind kind, const RadialProfile& p, const Geometry& g, double shift, std::vector<double>& w,
             double& c) {
  const int m = p.grid().size(), n = p.n();
  w.assign(m, 0.0);
  if (kind == FlowKind::krf) {
    for (int i = 0; i < m; ++i) w[i] = g.log_ratio[i] + p.u()[i];
    c = shift;
    return;
  }
  // Descent direction of E_1: -(2/n)(Delta R - sigma_2), projected so that
  // int phi_dot omega_phi^n = 0.
  const auto lapR = laplacian(g.curv.R, p);
  const auto s2 = n >= 2 ? ricci_power_density(g, n, 2) : std::vector<double>(m, 0.0);
  const double b2 = n >= 2 ? n * (n - 1) / 2.0 : 0.0;
  for (int i = 0; i < m; ++i) w[i] = -(2.0 / n) * (lapR[i] - b2 * s2[i]);
  // Divide by the discrete volume so the projection is exact under quadrature.
  const double c1 = -integrate(w, p, g) / integrate(std::vector<double>(m, 1.0), p, g);
  for (auto& v : w) v += c1;
  c = 0.0;
}

Eval evaluate(FlowKind kind, const ClassData& cls, const std::shared_ptr<const Grid>& grid,
              const std::vector<double>& osc, double shift) {
  Eval e;
  e.profile = std::make_shared<const RadialProfile>(cls, grid, osc, RadialProfile::kFlowVolumeTol);
  e.geometry = std::make_shared<const Geometry>(analyze(*e.profile));
  const auto& p = *e.profile;
  const auto& g = *e.geometry;
  const int m = grid->size(), n = cls.n;
  const auto& x = grid->x();
  const auto& wq = grid->weights();

  std::vector<double> w;
  double c = 0.0;
  raw_rhs(kind, p, g, shift, w, c);
  // Split off the background average so that osc keeps a fixed average.
  const double cn = cls.measure_constant();
  double mean = 0.0;
  for (int i = 0; i < m; ++i) mean += wq[i] * w[i] * cn * std::pow(x[i], n - 1);
  mean /= cls.V;
  e.osc_dot.resize(m);
  for (int i = 0; i < m; ++i) e.osc_dot[i] = w[i] - mean;
  e.shift_dot = c + mean;

  e.J_rate.assign(n + 1, 0.0);
  const double a = wedge_integral(p, g, e.osc_dot, 0, 0, n, x);
  for (int k = 0; k < n; ++k) {
    const double b = wedge_integral(p, g, e.osc_dot, 0, k + 1, n - k - 1, x);
    e.J_rate[k] = -(n - k) / cls.V * (a - b);
  }
  const double r = integrate(g.curv.R, p, g) / cls.V;
  std::vector<double> d2(m);
  for (int i = 0; i < m; ++i) d2[i] = (g.curv.R[i] - r) * (g.curv.R[i] - r);
  e.L2R = integrate(d2, p, g) / cls.V;
  return e;
}

void assign(FlowState& s, Eval&& e) {
  s.profile = std::move(e.profile);
  s.geometry = std::move(e.geometry);
  s.osc_dot = std::move(e.osc_dot);
  s.shift_dot = e.shift_dot;
  s.J_dot = std::move(e.J_rate);
  s.L2R = e.L2R;
}

struct Tableau {
  int stages;
  std::vector<std::vector<double>> a;
  std::vector<double> c, b, bhat;
  int order_low;
};

const Tableau& tableau(Scheme s) {
  static const Tableau bs{4,
                          {{}, {0.5}, {0.0, 0.75}, {2.0 / 9, 1.0 / 3, 4.0 / 9}},
                          {0.0, 0.5, 0.75, 1.0},
                          {2.0 / 9, 1.0 / 3, 4.0 / 9, 0.0},
                          {7.0 / 24, 0.25, 1.0 / 3, 0.125},
                          2};
  static const Tableau dp{7,
                          {{},
                           {1.0 / 5},
                           {3.0 / 40, 9.0 / 40},
                           {44.0 / 45, -56.0 / 15, 32.0 / 9},
                           {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
                           {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
                           {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}},
                          {0.0, 0.2, 0.3, 0.8, 8.0 / 9, 1.0, 1.0},
                          {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0},
                          {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200, 187.0 / 2100,
                           1.0 / 40},
                          4};
  return s == Scheme::bogacki_shampine ? bs : dp;
}

// Attempt one step of size dt; returns the error norm (<= 1 is acceptable)
// and fills `out` with the candidate state.
double attempt(const FlowState& s, double dt, const StepOptions& opt, FlowState& out) {
  const Tableau& tb = tableau(opt.scheme);
  const int m = static_cast<int>(s.osc.size()), n = s.cls.n;
  const auto grid = s.profile->grid_ptr();
  struct K {
    std::vector<double> osc;
    double shift;
    std::vector<double> J;
    double L2R;
  };
  std::vector<K> k(tb.stages);
  // First stage reuses the cached derivative at s.
  k[0].osc = s.osc_dot;
  k[0].shift = s.shift_dot;
  k[0].J = s.J_dot;
  k[0].L2R = s.L2R;
  Eval last;
  std::vector<double> y(m);
  for (int st = 1; st < tb.stages; ++st) {
    double ys = s.shift;
    for (int i = 0; i < m; ++i) y[i] = s.osc[i];
    for (int j = 0; j < st; ++j) {
      const double aij = tb.a[st][j];
      if (aij == 0.0) continue;
      for (int i = 0; i < m; ++i) y[i] += dt * aij * k[j].osc[i];
      ys += dt * aij * k[j].shift;
    }
    Eval e = evaluate(opt.kind, s.cls, grid, y, ys);
    k[st].osc = e.osc_dot;
    k[st].shift = e.shift_dot;
    k[st].J = e.J_rate;
    k[st].L2R = e.L2R;
    if (st == tb.stages - 1) last = std::move(e);
  }
  // The last stage sits at t + dt with the high-order weights (FSAL), so its
  // evaluation is the derivative cache of the new state.
  out = s;
  out.t = s.t + dt;
  double err = 0.0;
  auto scale = [&](double a, double b) { return opt.atol + opt.rtol * std::max(std::abs(a), std::abs(b)); };
  for (int i = 0; i < m; ++i) {
    double hi = 0.0, lo = 0.0;
    for (int j = 0; j < tb.stages; ++j) {
      hi += tb.b[j] * k[j].osc[i];
      lo += tb.bhat[j] * k[j].osc[i];
    }
    out.osc[i] = s.osc[i] + dt * hi;
    err = std::max(err, std::abs(dt * (hi - lo)) / scale(s.osc[i], out.osc[i]));
  }
  {
    double hi = 0.0, lo = 0.0;
    for (int j = 0; j < tb.stages; ++j) {
      hi += tb.b[j] * k[j].shift;
      lo += tb.bhat[j] * k[j].shift;
    }
    out.shift = s.shift + dt * hi;
    err = std::max(err, std::abs(dt * (hi - lo)) / scale(s.shift, out.shift));
  }
  for (int q = 0; q <= n; ++q) {
    double hi = 0.0, lo = 0.0;
    for (int j = 0; j < tb.stages; ++j) {
      hi += tb.b[j] * k[j].J[q];
      lo += tb.bhat[j] * k[j].J[q];
    }
    out.J[q] = s.J[q] + dt * hi;
    err = std::max(err, std::abs(dt * (hi - lo)) / scale(s.J[q], out.J[q]));
  }
  {
    double hi = 0.0, lo = 0.0;
    for (int j = 0; j < tb.stages; ++j) {
      hi += tb.b[j] * k[j].L2R;
      lo += tb.bhat[j] * k[j].L2R;
    }
    out.cumulative_L2R = s.cumulative_L2R + dt * hi;
    err = std::max(err, std::abs(dt * (hi - lo)) / scale(s.cumulative_L2R, out.cumulative_L2R));
  }
  // Guard against a last stage that is not at the new point (defensive: both
  // tableaus are FSAL, so this re-evaluation never runs for them).
  if (tb.c.back() != 1.0) last = evaluate(opt.kind, s.cls, grid, out.osc, out.shift);
  assign(out, std::move(last));
  return err;
}

}  // namespace

FlowState make_state(const RadialProfile& p, FlowKind kind, double t0) {
  FlowState s;
  s.t = t0;
  s.cls = p.cls();
  s.osc = p.u();
  s.shift = 0.0;
  s.J.assign(p.n() + 1, 0.0);
  assign(s, evaluate(kind, p.cls(), p.grid_ptr(), s.osc, s.shift));
  return s;
}

std::vector<double> krf_rhs(const FlowState& s, std::span<const double> h) {
  const auto& g = *s.geometry;
  std::vector<double> out(s.osc.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(g.log_ratio[i])) raise(ErrorCode::PositivityViolation, "volume ratio not positive");
    out[i] = g.log_ratio[i] + s.osc[i] + s.shift - h[i];
  }
  return out;
}

std::vector<double> e1_gradient_rhs(const FlowState& s) {
  std::vector<double> w;
  double c = 0.0;
  raw_rhs(FlowKind::e1_gradient, *s.profile, *s.geometry, s.shift, w, c);
  return w;
}

double stability_cap(const FlowState& s, const StepOptions& opt) {
  const auto& p = *s.profile;
  const double L = p.L(), dx = p.grid().dx();
  double scale = 0.0;
  for (int i = 0; i < p.grid().size(); ++i) {
    const double xi = p.x()[i];
    scale = std::max(scale, xi * (L - xi) / L / p.b()[i]);
  }
  const double h2 = dx * dx / scale;
  if (opt.kind == FlowKind::krf) return opt.C_cfl * h2;
  // Sixth-order operator: spectral radius grows like (2/n)(6.4/h2)^3.
  return opt.C_cfl * s.cls.n * h2 * h2 * h2 / 100.0;
}

StepResult step(const FlowState& s, double dt, const StepOptions& opt) {
  if (!(dt > 0)) raise(ErrorCode::RangeError, "dt must be positive");
  StepResult r;
  const double cap = stability_cap(s, opt);
  const int order_low = tableau(opt.scheme).order_low;
  std::string last_reason = "stability cap";
  for (int attempt_no = 0; attempt_no <= opt.max_halvings; ++attempt_no) {
    if (dt <= cap * (1.0 + 1e-12)) {
      FlowState cand;
      double err = 0.0;
      bool ok = true;
      try {
        err = attempt(s, dt, opt, cand);
        ok = err <= 1.0;
        if (!ok) last_reason = "error estimate";
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PositivityViolation && e.code() != ErrorCode::DifferentiationFailure) throw;
        ok = false;
        last_reason = e.what();
      }
      if (ok) {
        r.state = std::move(cand);
        r.dt_used = dt;
        const double fac = err > 0 ? 0.9 * std::pow(err, -1.0 / (order_low + 1)) : 5.0;
        r.dt_next = std::min(cap, dt * std::clamp(fac, 0.2, 5.0));
        return r;
      }
    }
    ++r.rejections;
    dt *= 0.5;
  }
  std::ostringstream os;
  os << "step rejected " << opt.max_halvings << " times at t = " << s.t << " (last: " << last_reason << ")";
  raise(ErrorCode::StepRejectionLimit, os.str());
}

RunSummary run(const RunSpec& spec, const std::function<bool(const FlowState&)>& on_sample) {
  if (!(spec.sample_dt > 0) || !(spec.t_final >= 0)) raise(ErrorCode::RangeError, "invalid time parameters");
  auto grid = Grid::get(spec.N, spec.cls.class_scale);
  RadialProfile p0(spec.cls, grid, spec.initial_u);
  StepOptions opt = spec.step;
  opt.kind = spec.kind;
  FlowState s = make_state(p0, spec.kind);
  RunSummary out;

  auto gradient = [&](const FlowState& st) {
    const auto g2 = grad_norm2(st.osc_dot, *st.profile);
    return integrate(g2, *st.profile, *st.geometry);
  };
  auto sample = [&](const FlowState& st) {
    ++out.samples;
    const bool go_on = on_sample ? on_sample(st) : true;
    return go_on && !(gradient(st) < spec.stop_tol);
  };

  if (!sample(s)) {
    out.reason = Termination::converged;
    out.final_state = s;
    return out;
  }
  const long nsamples = std::lround(std::floor(spec.t_final / spec.sample_dt + 1e-9));
  double dt = stability_cap(s, opt);
  for (long k = 1; k <= nsamples; ++k) {
    const double target = k * spec.sample_dt;
    while (s.t < target) {
      const double remaining = target - s.t;
      double h = std::min(dt, stability_cap(s, opt));
      bool lands = false;
      if (h >= remaining * (1.0 - 1e-9)) {
        h = remaining;
        lands = true;
      }
      StepResult r = step(s, h, opt);
      out.steps += 1;
      out.rejections += r.rejections;
      s = std::move(r.state);
      const bool landed = lands && r.dt_used == h;
      if (landed) s.t = target;  // remove rounding drift at sample times
      // A shortened landing step says little about the admissible step size.
      dt = landed ? std::max(dt, r.dt_next) : r.dt_next;
    }
    if (!sample(s)) {
      out.reason = Termination::converged;
      out.final_state = s;
      return out;
    }
  }
  out.reason = Termination::t_final;
  out.final_state = s;
  return out;
}

}  // namespace krf
