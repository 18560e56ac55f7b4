#pragma once

#include <span>
#include <utility>
#include <vector>

#include "krf/profile.hpp"

namespace krf {

// Pointwise curvature of a radial profile.  Bisectional components are the
// bare curvature form on g-unit vectors: rr (radial, radial), rt (radial,
// transverse), tt (transverse holomorphic sectional), tu (two orthogonal
// transverse directions).  For n = 1 only R and B_rr are filled.
struct CurvatureFields {
  int n = 1;
  std::vector<double> nodes;  // y in [0, 1]
  std::vector<double> R;
  std::vector<double> ric_radial, ric_transverse;
  std::vector<double> B_rr, B_rt, B_tt, B_tu;
};

// Everything downstream code needs about a profile, computed once.
// tau is the moment x*a of the metric, rho the moment of its Ricci form,
// log_ratio = log(omega_phi^n / omega_FS^n) and density the volume form per dx.
struct Geometry {
  CurvatureFields curv;
  std::vector<double> tau;
  std::vector<double> rho;
  std::vector<double> log_ratio;
  std::vector<double> density;
  // Transverse Ricci eigenvalue is always filled (also for n = 1, where it is
  // the value the n >= 2 formula would give); the pointwise wedge expansions use it.
  std::vector<double> ric_t_full, ric_r_full;
};

Geometry analyze(const RadialProfile& p);
CurvatureFields curvature_fields(const RadialProfile& p);

// Min and max of the bisectional form over pairs of unit directions and nodes.
std::pair<double, double> bisectional_range(const CurvatureFields& c);

double total_volume(const RadialProfile& p);
double integrate(std::span<const double> f, const RadialProfile& p);
double integrate(std::span<const double> f, const RadialProfile& p, const Geometry& g);

// Kahler Laplacian of a radial function and |df|^2_g.
std::vector<double> laplacian(std::span<const double> f, const RadialProfile& p);
std::vector<double> grad_norm2(std::span<const double> f, const RadialProfile& p);

// Radial pole-to-pole length of ds^2 = 2 g; for n >= 2 the diameter of the
// divisor at infinity is added (upper-bound proxy).
double radial_length(const RadialProfile& p);
double diameter(const RadialProfile& p);

double lambda1_radial(const RadialProfile& p);

}  // namespace krf
