#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "krf/grid.hpp"

namespace krf {

struct ClassData {
  int n = 1;
  int ell = 1;
  double class_scale = 2.0;  // length of the moment interval; n+1 for the canonical class
  double V = 0.0;            // total volume, pi^n L^n / (n! ell)

  static ClassData canonical(int n, int ell = 1);
  static ClassData scaled(int n, int ell, double class_scale);
  bool canonical_class() const { return class_scale == n + 1.0; }

  // Constant in dV = c_n (x a)^{n-1} b dx on the moment interval.
  double measure_constant() const;
};

// A U(n)-invariant Kahler metric in a fixed class, stored as the relative
// potential u on the Fubini-Study background.  With x the background moment
// coordinate (grid variable, x = L*y) and psi0 = x(L-x)/L, the metric has
// transverse eigenvalue ratio a = 1 + (L-x)u'/L and radial ratio
// b = 1 + psi0' u' + psi0 u'' relative to the background.
class RadialProfile {
 public:
  // volume_tol bounds the relative quadrature error of the total volume; a
  // larger value is used for intermediate stages inside the flow stepper.
  RadialProfile(const ClassData& cls, std::shared_ptr<const Grid> grid, std::vector<double> u,
                double volume_tol = kVolumeTol);

  static constexpr double kVolumeTol = 1e-8;
  static constexpr double kFlowVolumeTol = 1e-6;

  const ClassData& cls() const { return cls_; }
  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  int N() const { return grid_->N(); }
  int n() const { return cls_.n; }
  double L() const { return cls_.class_scale; }

  const std::vector<double>& x() const { return grid_->x(); }
  std::vector<double> y() const;
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& du() const { return du_; }
  const std::vector<double>& d2u() const { return d2u_; }
  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }

  // Background data as functions of s = log|z|^2: F0_s = x and F0_ss = psi0.
  // F0 itself diverges at the divisor end and is reported as +inf there.
  std::vector<double> background_potential() const;
  const std::vector<double>& background_ds() const { return grid_->x(); }
  const std::vector<double>& background_dss() const { return psi0_; }

 private:
  ClassData cls_;
  std::shared_ptr<const Grid> grid_;
  std::vector<double> u_, du_, d2u_, a_, b_, psi0_;
};

RadialProfile make_fubini_study(const ClassData& cls, int N);

using ModeSpec = std::vector<std::pair<int, double>>;

// u(x) = amplitude * sum_k c_k P_k(2x/L - 1) with Legendre polynomials P_k.
double perturbation_value(const ClassData& cls, double amplitude, const ModeSpec& modes, double x);
RadialProfile make_perturbed(const ClassData& cls, int N, double amplitude, const ModeSpec& modes);

// Text format: header "n ell N class_scale", then N+1 lines "y u a b".
void write_profile(std::ostream& os, const RadialProfile& p);
RadialProfile read_profile(std::istream& is);

}  // namespace krf
