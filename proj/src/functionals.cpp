#include "krf/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "krf/errors.hpp"

namespace krf {

namespace {

void check_k(int k, int n) {
  if (k < 0 || k > n) raise(ErrorCode::IndexOutOfRange, "k = " + std::to_string(k) + " outside [0, " + std::to_string(n) + "]");
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double ipow(double b, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

HPotential h_potential(const RadialProfile& p) {
  if (!p.cls().canonical_class()) raise(ErrorCode::RangeError, "Ricci potential requires the canonical class");
  const auto g = analyze(p);
  const int m = p.grid().size();
  HPotential out;
  out.h.resize(m);
  std::vector<double> e(m);
  for (int i = 0; i < m; ++i) {
    out.h[i] = -g.log_ratio[i] - p.u()[i];
    e[i] = std::exp(out.h[i]);
  }
  out.c = std::log(p.cls().V / integrate(e, p, g));
  for (auto& v : out.h) v += out.c;
  return out;
}

RadialProfile shifted(const RadialProfile& base, std::span<const double> phi) {
  std::vector<double> u(base.u());
  if (phi.size() != u.size()) raise(ErrorCode::RangeError, "potential size does not match grid");
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += phi[i];
  return RadialProfile(base.cls(), base.grid_ptr(), std::move(u), RadialProfile::kFlowVolumeTol);
}

double wedge_integral(const RadialProfile& cur, const Geometry& g, std::span<const double> f, int i, int j,
                      int m, std::span<const double> base_tau) {
  const int n = cur.n();
  if (i + j + m != n || i < 0 || j < 0 || m < 0) raise(ErrorCode::IndexOutOfRange, "wedge exponents must sum to n");
  const int sz = cur.grid().size();
  const auto df = cur.grid().d1()(f);
  const auto& w = cur.grid().weights();
  double s = 0.0;
  double Gend = 0.0;
  for (int q = 0; q < sz; ++q) {
    const double G = ipow(g.rho[q], i) * ipow(base_tau[q], j) * ipow(g.tau[q], m);
    s += w[q] * G * df[q];
    if (q == sz - 1) Gend = G;
  }
  return cur.cls().measure_constant() / n * (f[sz - 1] * Gend - s);
}

std::vector<double> ricci_power_density(const Geometry& g, int n, int k) {
  check_k(k, n);
  const int m = static_cast<int>(g.tau.size());
  std::vector<double> out(m);
  std::vector<double> poly(n + 1);
  for (int q = 0; q < m; ++q) {
    // coefficients of (1 + t ric_r)(1 + t ric_t)^{n-1}
    std::fill(poly.begin(), poly.end(), 0.0);
    poly[0] = 1.0;
    poly[1] = g.ric_r_full[q];
    for (int r = 1; r < n; ++r)
      for (int d = r + 1; d >= 1; --d) poly[d] += g.ric_t_full[q] * poly[d - 1];
    out[q] = poly[k] / binom(n, k);
  }
  return out;
}

double c_k_constant(const RadialProfile& base, int k) {
  const int n = base.n();
  check_k(k, n);
  const auto gb = analyze(base);
  const auto hb = h_potential(base);
  double s = 0.0;
  for (int i = 0; i <= k; ++i) s += wedge_integral(base, gb, hb.h, i, k - i, n - k, gb.tau);
  return s / base.cls().V;
}

double E0_k(const RadialProfile& base, std::span<const double> phi, int k) {
  const int n = base.n();
  check_k(k, n);
  const auto gb = analyze(base);
  const auto hb = h_potential(base);
  const auto cur = shifted(base, phi);
  const auto g = analyze(cur);
  std::vector<double> f(g.tau.size());
  for (std::size_t q = 0; q < f.size(); ++q) f[q] = g.log_ratio[q] - gb.log_ratio[q] - hb.h[q];
  double s = 0.0;
  for (int i = 0; i <= k; ++i) s += wedge_integral(cur, g, f, i, k - i, n - k, gb.tau);
  double ck = 0.0;
  for (int i = 0; i <= k; ++i) ck += wedge_integral(base, gb, hb.h, i, k - i, n - k, gb.tau);
  return (s + ck) / base.cls().V;
}

double J_k_rate(const RadialProfile& base, const RadialProfile& cur, const Geometry& g,
                std::span<const double> phi_dot, int k) {
  const int n = cur.n();
  check_k(k, n);
  if (k == n) return 0.0;
  const auto& btau = (&base == &cur) ? g.tau : analyze(base).tau;
  const double a = wedge_integral(cur, g, phi_dot, 0, 0, n, btau);
  const double b = wedge_integral(cur, g, phi_dot, 0, k + 1, n - k - 1, btau);
  return -(n - k) / cur.cls().V * (a - b);
}

PathIntegral J_k_path(const RadialProfile& base, std::span<const PathSample> path, int k) {
  const int n = base.n();
  check_k(k, n);
  PathIntegral out;
  if (k == n || path.size() <= 1) return out;
  for (double v : path.front().phi)
    if (std::abs(v) > 1e-12) raise(ErrorCode::RangeError, "path must start at phi = 0");
  const auto btau = analyze(base).tau;
  std::vector<double> rate(path.size());
  for (std::size_t s = 0; s < path.size(); ++s) {
    const auto cur = shifted(base, path[s].phi);
    const auto g = analyze(cur);
    const double a = wedge_integral(cur, g, path[s].phi_dot, 0, 0, n, btau);
    const double b = wedge_integral(cur, g, path[s].phi_dot, 0, k + 1, n - k - 1, btau);
    rate[s] = -(n - k) / base.cls().V * (a - b);
  }
  auto trap = [&](std::size_t stride) {
    double s = 0.0;
    std::size_t i = 0;
    for (; i + stride < path.size(); i += stride) s += 0.5 * (path[i + stride].t - path[i].t) * (rate[i] + rate[i + stride]);
    if (i + 1 < path.size()) {  // leftover tail at the fine spacing
      const std::size_t e = path.size() - 1;
      s += 0.5 * (path[e].t - path[i].t) * (rate[i] + rate[e]);
    }
    return s;
  };
  const double fine = trap(1);
  if (path.size() < 3) raise(ErrorCode::PathTooCoarse, "need at least 3 samples for the error estimate");
  const double coarse = trap(2);
  out.value = fine + (fine - coarse) / 3.0;
  out.error_estimate = std::abs(fine - coarse) / 3.0;
  if (out.error_estimate > 1e-6 * std::max(1.0, std::abs(out.value))) {
    std::ostringstream os;
    os << "time quadrature error estimate " << out.error_estimate << " exceeds 1e-6";
    raise(ErrorCode::PathTooCoarse, os.str());
  }
  return out;
}

double E_k(const RadialProfile& base, std::span<const PathSample> path, int k) {
  check_k(k, base.n());
  if (path.empty()) return E0_k(base, std::vector<double>(base.grid().size(), 0.0), k);
  return E0_k(base, path.back().phi, k) - J_k_path(base, path, k).value;
}

FunctionalReport functional_report(const RadialProfile& base, std::span<const PathSample> path) {
  FunctionalReport r;
  r.t = path.empty() ? 0.0 : path.back().t;
  const std::vector<double> zero(base.grid().size(), 0.0);
  const auto& phi = path.empty() ? zero : path.back().phi;
  for (int k = 0; k <= base.n(); ++k) {
    r.k_values.push_back(k);
    r.c_k.push_back(c_k_constant(base, k));
    r.E0.push_back(E0_k(base, phi, k));
    r.J.push_back(J_k_path(base, path, k).value);
    r.E.push_back(r.E0.back() - r.J.back());
  }
  return r;
}

nlohmann::ordered_json FunctionalReport::to_json() const {
  nlohmann::ordered_json j;
  j["t"] = t;
  j["k_values"] = k_values;
  j["E0"] = E0;
  j["J"] = J;
  j["E"] = E;
  j["c_k"] = c_k;
  return j;
}

double dEk_dt_rhs(const RadialProfile& cur, const Geometry& g, std::span<const double> phi_dot, int k) {
  const int n = cur.n();
  check_k(k, n);
  const double V = cur.cls().V;
  const auto lap = laplacian(phi_dot, cur);
  const auto dens = ricci_power_density(g, n, k);
  std::vector<double> f(lap.size());
  for (std::size_t q = 0; q < f.size(); ++q) f[q] = lap[q] * dens[q];
  double out = (k + 1) / V * integrate(f, cur, g);
  if (k < n) {
    const double a = wedge_integral(cur, g, phi_dot, k + 1, 0, n - k - 1, g.tau);
    const double b = wedge_integral(cur, g, phi_dot, 0, 0, n, g.tau);
    out -= (n - k) / V * (a - b);
  }
  return out;
}

double dEk_dt_rhs(const RadialProfile& cur, std::span<const double> phi_dot, int k) {
  return dEk_dt_rhs(cur, analyze(cur), phi_dot, k);
}

namespace {

double invariant_with(const RadialProfile& p, const Geometry& g, std::span<const double> theta, int k) {
  const int n = p.n();
  check_k(k, n);
  const auto lap = laplacian(theta, p);
  const auto dens = ricci_power_density(g, n, k);
  std::vector<double> f(lap.size());
  for (std::size_t q = 0; q < f.size(); ++q) f[q] = lap[q] * dens[q];
  double out = (n - k) * integrate(theta, p, g) + (k + 1) * integrate(f, p, g);
  if (k < n) out -= (n - k) * wedge_integral(p, g, theta, k + 1, 0, n - k - 1, g.tau);
  return out;
}

std::vector<double> euler_potential(const RadialProfile& p, const Geometry& g, double shift) {
  const double mean = integrate(g.tau, p, g) / p.cls().V;
  std::vector<double> th(g.tau);
  for (auto& v : th) v += shift - mean;
  return th;
}

}  // namespace

double futaki_like_invariant(const RadialProfile& p, int k, double theta_shift) {
  const auto g = analyze(p);
  return invariant_with(p, g, euler_potential(p, g, theta_shift), k);
}

InvariantReport invariant_report(const RadialProfile& p, const std::string& metric_id, double theta_shift) {
  const auto g = analyze(p);
  const auto th = euler_potential(p, g, theta_shift);
  InvariantReport r;
  r.metric_id = metric_id;
  r.theta_norm = theta_shift;
  for (int k = 0; k <= p.n(); ++k) r.Im_k.push_back(invariant_with(p, g, th, k));
  return r;
}

nlohmann::ordered_json InvariantReport::to_json() const {
  nlohmann::ordered_json j;
  j["metric_id"] = metric_id;
  j["theta_norm"] = theta_norm;
  j["Im_k"] = Im_k;
  return j;
}

std::vector<std::vector<double>> sigma_profile(const CurvatureFields& c, const RadialProfile& p) {
  const int n = p.n(), m = static_cast<int>(c.R.size());
  std::vector<std::vector<double>> s(n + 1, std::vector<double>(m, 0.0));
  for (int q = 0; q < m; ++q) {
    std::vector<double> poly(n + 1, 0.0);
    poly[0] = 1.0;
    if (n == 1) {
      poly[1] = c.R[q];
    } else {
      poly[1] = c.ric_radial[q];
      for (int r = 1; r < n; ++r)
        for (int d = r + 1; d >= 1; --d) poly[d] += c.ric_transverse[q] * poly[d - 1];
    }
    for (int k = 0; k <= n; ++k) s[k][q] = poly[k];
    s[1][q] = c.R[q];  // identical up to rounding; pin it to the stored scalar curvature
  }
  return s;
}

double curvature_l2_residual(const RadialProfile& p) {
  const auto g = analyze(p);
  const int n = p.n(), m = p.grid().size();
  std::vector<double> lhs(m), rhs(m);
  for (int q = 0; q < m; ++q) {
    const double er = g.ric_r_full[q] - 1.0, et = g.ric_t_full[q] - 1.0;
    lhs[q] = er * er + (n - 1) * et * et;
    const double d = g.curv.R[q] - n;
    rhs[q] = d * d;
  }
  const double L = integrate(lhs, p, g), R = integrate(rhs, p, g);
  return std::abs(L - R) / std::max(R, 1e-14);
}

PinchingReport pinching_deviation(const CurvatureFields& c, const RadialProfile& p, double epsilon) {
  const int n = p.n();
  if (!(epsilon > 0 && epsilon <= 1.0 / (n + 1) + 1e-15)) raise(ErrorCode::RangeError, "epsilon must lie in (0, 1/(n+1)]");
  PinchingReport r;
  r.epsilon = epsilon;
  for (std::size_t q = 0; q < c.R.size(); ++q) {
    double d = std::abs(c.B_rr[q] - 2 * epsilon);
    if (n >= 2) {
      d = std::max({d, std::abs(c.B_rt[q] - epsilon), std::abs(c.B_tt[q] - 2 * epsilon)});
      if (n >= 3) d = std::max(d, std::abs(c.B_tu[q] - epsilon));
    }
    r.deviation = std::max(r.deviation, d);
  }
  return r;
}

nlohmann::ordered_json PinchingReport::to_json() const {
  nlohmann::ordered_json j;
  j["epsilon"] = epsilon;
  j["deviation"] = deviation;
  return j;
}

}  // namespace krf
