#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "krf/flow.hpp"
#include "krf/gauge.hpp"

namespace krf {

struct DiagnosticsRecord {
  int n = 1;
  double t = 0.0;
  std::vector<double> E, E0, J;   // per k = 0..n, E = E0 - J
  std::vector<double> dE_rhs;     // derivative formula per k at t
  double L2_R = 0.0;              // (1/V) int (R - r)^2
  double r_avg = 0.0;             // (1/V) int R
  double cumulative_L2R = 0.0;
  double c_t = 0.0;               // int phi_dot omega_phi^n
  double grad_phidot = 0.0;       // int |d phi_dot|^2 omega_phi^n
  double bisec_min = 0.0, bisec_max = 0.0;
  double diameter = 0.0, lambda1 = 0.0, liyau_margin = 0.0;
  double C0_psi = 0.0;
  double C2_min = 0.0, C2_max = 0.0;  // n + Laplacian_rho(psi) = tr_{omega_rho} omega_phi
  double calabi_S = 0.0;
  double pinch = 0.0;
  double curv_l2_residual = 0.0;
  double gauge_lambda = 0.0, gauge_residual = 0.0;

  nlohmann::ordered_json to_json() const;
  static std::vector<std::string> csv_header(int n);
  std::vector<double> csv_row() const;
};

DiagnosticsRecord monitors(const FlowState& s, const GaugeState& g);

// Decay rate alpha of value ~ C e^{-alpha t}: least-squares slope of log(value)
// over the final third of the time span.
double exp_fit(std::span<const double> t, std::span<const double> value);

}  // namespace krf
