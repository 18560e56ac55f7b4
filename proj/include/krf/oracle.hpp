#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "krf/profile.hpp"

namespace krf {

// Kahler potential as a function of the real coordinates
// (Re z_1, Im z_1, ..., Re z_n, Im z_n) of the affine chart.
using Potential = std::function<double(std::span<const double>)>;

struct PointChart {
  std::vector<std::complex<double>> z;

  // Enforces 1e-3 <= |z| <= 1e3.
  static PointChart make(std::vector<std::complex<double>> z);
  double norm() const;
};

struct OracleTensor {
  int n = 0;
  Eigen::MatrixXcd g;           // g(i, j) = g_{i jbar}
  std::vector<std::complex<double>> riem;  // R_{i jbar k lbar}, index ((i*n+j)*n+k)*n+l
  Eigen::MatrixXcd ric;         // contraction g^{k lbar} R_{i jbar k lbar}
  Eigen::MatrixXcd ric_logdet;  // -d dbar log det g
  double R = 0.0;
  double vol = 0.0;
  double richardson_gap = 0.0;  // relative h vs h/2 discrepancy of the derivative tensors

  std::complex<double> riem_at(int i, int j, int k, int l) const { return riem[((i * n + j) * n + k) * n + l]; }
};

// `h` is the base step; the effective step is h * max(1, |z|).
OracleTensor oracle_metric_at(const Potential& F, const PointChart& pt, double h = 0.04);
OracleTensor oracle_curvature_at(const Potential& F, const PointChart& pt, double h = 0.04);
std::vector<double> oracle_sigma_at(const Potential& F, const PointChart& pt, double h = 0.04);

// Elementary symmetric functions of the eigenvalues of g^{-1} ric (sigma_0..sigma_n),
// from the characteristic polynomial.
std::vector<double> sigma_from(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& ric);

Potential fubini_study_potential(int n, double L);
// F0 + phi(x) with x = L|z|^2/(1+|z|^2) the background moment coordinate.
Potential radial_potential(const ClassData& cls, std::function<double(double)> phi_of_x);

// Curvature of a U(n)-invariant tensor read off in a unitary frame adapted to z:
// the radial direction z and directions g-orthogonal to it.
struct FrameComponents {
  double R, ric_r, ric_t, B_rr, B_rt, B_tt, B_tu;
};
FrameComponents radial_frame(const OracleTensor& t, const PointChart& pt);

// Point with |z|^2 = x/(L-x) along a given unit direction.
PointChart point_at_moment(double x, double L, std::span<const std::complex<double>> direction);

}  // namespace krf
