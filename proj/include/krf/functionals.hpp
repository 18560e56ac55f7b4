#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "krf/geometry.hpp"

namespace krf {

// Ricci potential: Ric - omega = i dd-bar h with int (e^h - 1) omega^n = 0.
// Canonical class only.
struct HPotential {
  std::vector<double> h;
  double c = 0.0;  // normalization constant added to -log(ratio) - u
};
HPotential h_potential(const RadialProfile& p);

// Profile for base.u + phi on the base grid.
RadialProfile shifted(const RadialProfile& base, std::span<const double> phi);

// int f Ric(cur)^i ^ omega_base^j ^ omega_cur^m over M, i + j + m = n.  Radial
// forms reduce to (c_n/n) int f d(rho^i tau_b^j tau^m), integrated by parts.
double wedge_integral(const RadialProfile& cur, const Geometry& g, std::span<const double> f, int i, int j,
                      int m, std::span<const double> base_tau);

// Pointwise Ric^k ^ omega^{n-k} / omega^n = sigma_k / binom(n, k).
std::vector<double> ricci_power_density(const Geometry& g, int n, int k);

double E0_k(const RadialProfile& base, std::span<const double> phi, int k);

struct PathSample {
  double t = 0.0;
  std::vector<double> phi, phi_dot;
};

struct PathIntegral {
  double value = 0.0;
  double error_estimate = 0.0;
};

// d J_k / dt for the path at `cur` (= base + phi) moving with phi_dot.
double J_k_rate(const RadialProfile& base, const RadialProfile& cur, const Geometry& g,
                std::span<const double> phi_dot, int k);
PathIntegral J_k_path(const RadialProfile& base, std::span<const PathSample> path, int k);

struct FunctionalReport {
  double t = 0.0;
  std::vector<int> k_values;
  std::vector<double> E0, J, E, c_k;
  nlohmann::ordered_json to_json() const;
};

double c_k_constant(const RadialProfile& base, int k);
double E_k(const RadialProfile& base, std::span<const PathSample> path, int k);
FunctionalReport functional_report(const RadialProfile& base, std::span<const PathSample> path);

double dEk_dt_rhs(const RadialProfile& cur, std::span<const double> phi_dot, int k);
double dEk_dt_rhs(const RadialProfile& cur, const Geometry& g, std::span<const double> phi_dot, int k);

struct InvariantReport {
  std::vector<double> Im_k;
  double theta_norm = 0.0;
  std::string metric_id;
  nlohmann::ordered_json to_json() const;
};
// Invariant for the radial Euler field; theta is the moment coordinate with
// zero omega-average plus `theta_shift`.
double futaki_like_invariant(const RadialProfile& p, int k, double theta_shift = 0.0);
InvariantReport invariant_report(const RadialProfile& p, const std::string& metric_id, double theta_shift = 0.0);

// sigma_0..sigma_n of the Ricci eigenvalues at each node.
std::vector<std::vector<double>> sigma_profile(const CurvatureFields& c, const RadialProfile& p);

double curvature_l2_residual(const RadialProfile& p);

struct PinchingReport {
  double epsilon = 0.0;
  double deviation = 0.0;
  nlohmann::ordered_json to_json() const;
};
PinchingReport pinching_deviation(const CurvatureFields& c, const RadialProfile& p, double epsilon);

}  // namespace krf
