#pragma once

#include <span>
#include <vector>

#include "krf/profile.hpp"

namespace krf {

// Pull-back of the Fubini-Study metric under the radial scaling z -> e^{lambda/2} z,
// written on the background moment grid.
double gauge_potential(double x, double lambda, double L);    // rho_lambda
double gauge_moment(double x, double lambda, double L);       // its moment tau_rho
double gauge_moment_dx(double x, double lambda, double L);    // d tau_rho / dx

struct GaugeState {
  double lambda = 0.0;
  std::vector<double> rho;    // rho_lambda at the nodes
  std::vector<double> psi;    // phi - rho, shifted to zero omega_rho-average
  std::vector<double> tau_rho, dtau_rho, theta;  // theta: first eigenfunction of omega_rho (moment minus mean)
  double residual = 0.0;      // int psi theta omega_rho^n
  double psi_sup = 0.0;
};

// Centrally positioned gauge for the profile's potential p.u().
GaugeState gauge_fit(const RadialProfile& p);

}  // namespace krf
