#include "krf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "krf/errors.hpp"
#include "krf/functionals.hpp"

namespace krf {

DiagnosticsRecord monitors(const FlowState& s, const GaugeState& gs) {
  const auto& p = *s.profile;
  const auto& g = *s.geometry;
  const int n = p.n(), m = p.grid().size();
  const double V = p.cls().V, L = p.L();
  const auto& x = p.x();
  DiagnosticsRecord d;
  d.n = n;
  d.t = s.t;

  const auto base = make_fubini_study(p.cls(), p.N());
  for (int k = 0; k <= n; ++k) {
    d.E0.push_back(E0_k(base, s.osc, k));
    d.J.push_back(s.J[k]);
    d.E.push_back(d.E0.back() - d.J.back());
    d.dE_rhs.push_back(dEk_dt_rhs(p, g, s.osc_dot, k));
  }
  d.r_avg = integrate(g.curv.R, p, g) / V;
  d.L2_R = s.L2R;
  d.cumulative_L2R = s.cumulative_L2R;
  d.c_t = integrate(s.phi_dot(), p, g);
  d.grad_phidot = integrate(grad_norm2(s.osc_dot, p), p, g);
  std::tie(d.bisec_min, d.bisec_max) = bisectional_range(g.curv);
  d.diameter = diameter(p);
  d.lambda1 = lambda1_radial(p);
  d.liyau_margin = d.lambda1 - std::numbers::pi * std::numbers::pi / (4.0 * d.diameter * d.diameter);
  d.pinch = pinching_deviation(g.curv, p, 1.0 / (n + 1)).deviation;
  d.curv_l2_residual = curvature_l2_residual(p);

  d.gauge_lambda = gs.lambda;
  d.gauge_residual = gs.residual;
  d.C0_psi = gs.psi_sup;

  // Gauge-frame quantities: trace of omega_phi against omega_rho, and the
  // third-derivative quantity of psi measured in omega_phi.
  const auto& A = p.a();
  const auto& B = p.b();
  std::vector<double> lq(m);
  for (int i = 0; i < m; ++i) lq[i] = std::log(B[i] / gs.dtau_rho[i]);
  const auto dlq = p.grid().d1()(lq);
  d.C2_min = std::numeric_limits<double>::infinity();
  d.C2_max = -d.C2_min;
  for (int i = 0; i < m; ++i) {
    const double trans = (i == 0) ? A[0] / gs.dtau_rho[0] : x[i] * A[i] / gs.tau_rho[i];
    const double c2 = (n - 1) * trans + B[i] / gs.dtau_rho[i];
    d.C2_min = std::min(d.C2_min, c2);
    d.C2_max = std::max(d.C2_max, c2);
    if (i == 0 || i == m - 1) continue;
    const double psi0 = x[i] * (L - x[i]) / L;
    double S = psi0 * dlq[i] * dlq[i] / B[i];
    if (n >= 2) {
      const double q = (L - x[i]) * B[i] / (L * A[i]) - psi0 * gs.dtau_rho[i] / gs.tau_rho[i];
      S += 2.0 * (n - 1) * q * q / (psi0 * B[i]);
    }
    d.calabi_S = std::max(d.calabi_S, S);
  }
  return d;
}

nlohmann::ordered_json DiagnosticsRecord::to_json() const {
  nlohmann::ordered_json j;
  j["t"] = t;
  nlohmann::ordered_json f;
  f["t"] = t;
  std::vector<int> ks;
  for (int k = 0; k <= n; ++k) ks.push_back(k);
  f["k_values"] = ks;
  f["E0"] = E0;
  f["J"] = J;
  f["E"] = E;
  f["c_k"] = std::vector<double>(n + 1, 0.0);  // zero on the Fubini-Study background
  j["functionals"] = f;
  j["dE_rhs"] = dE_rhs;
  j["L2_R"] = L2_R;
  j["r_avg"] = r_avg;
  j["cumulative_L2R"] = cumulative_L2R;
  j["c_t"] = c_t;
  j["grad_phidot"] = grad_phidot;
  j["bisec_min"] = bisec_min;
  j["bisec_max"] = bisec_max;
  j["diameter"] = diameter;
  j["lambda1"] = lambda1;
  j["liyau_margin"] = liyau_margin;
  j["C0_psi"] = C0_psi;
  j["C2_min"] = C2_min;
  j["C2_max"] = C2_max;
  j["calabi_S"] = calabi_S;
  j["pinch"] = pinch;
  j["curv_l2_residual"] = curv_l2_residual;
  j["gauge_lambda"] = gauge_lambda;
  j["gauge_residual"] = gauge_residual;
  return j;
}

std::vector<std::string> DiagnosticsRecord::csv_header(int n) {
  std::vector<std::string> h{"t"};
  for (int k = 0; k <= n; ++k) h.push_back("E_" + std::to_string(k));
  for (const char* c : {"L2_R", "cumulative_L2R", "c_t", "grad_phidot", "bisec_min", "bisec_max", "diameter",
                        "lambda1", "liyau_margin", "C0_psi", "C2_min", "C2_max", "calabi_S", "pinch", "curv_l2_residual",
                        "gauge_lambda", "gauge_residual", "r_avg"})
    h.emplace_back(c);
  for (int k = 0; k <= n; ++k) h.push_back("E0_" + std::to_string(k));
  for (int k = 0; k <= n; ++k) h.push_back("J_" + std::to_string(k));
  for (int k = 0; k <= n; ++k) h.push_back("dEdt_rhs_" + std::to_string(k));
  return h;
}

std::vector<double> DiagnosticsRecord::csv_row() const {
  std::vector<double> r{t};
  r.insert(r.end(), E.begin(), E.end());
  for (double v : {L2_R, cumulative_L2R, c_t, grad_phidot, bisec_min, bisec_max, diameter, lambda1, liyau_margin,
                   C0_psi, C2_min, C2_max, calabi_S, pinch, curv_l2_residual, gauge_lambda, gauge_residual, r_avg})
    r.push_back(v);
  r.insert(r.end(), E0.begin(), E0.end());
  r.insert(r.end(), J.begin(), J.end());
  r.insert(r.end(), dE_rhs.begin(), dE_rhs.end());
  return r;
}

double exp_fit(std::span<const double> t, std::span<const double> v) {
  if (t.size() != v.size()) raise(ErrorCode::RangeError, "exp_fit: series lengths differ");
  if (t.empty()) raise(ErrorCode::InsufficientTail, "exp_fit: empty series");
  const double t0 = t.front(), t1 = t.back();
  const double cut = t0 + (2.0 / 3.0) * (t1 - t0);
  std::vector<double> tt, ll;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < cut) continue;
    if (!(v[i] > 0)) raise(ErrorCode::RangeError, "exp_fit: non-positive value in the fitted tail");
    tt.push_back(t[i]);
    ll.push_back(std::log(v[i]));
  }
  if (tt.size() < 10) raise(ErrorCode::InsufficientTail, "exp_fit: " + std::to_string(tt.size()) + " samples in the final third (need 10)");
  double mt = 0, ml = 0;
  for (std::size_t i = 0; i < tt.size(); ++i) {
    mt += tt[i];
    ml += ll[i];
  }
  mt /= tt.size();
  ml /= tt.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < tt.size(); ++i) {
    sxy += (tt[i] - mt) * (ll[i] - ml);
    sxx += (tt[i] - mt) * (tt[i] - mt);
  }
  return -sxy / sxx;
}

}  // namespace krf
