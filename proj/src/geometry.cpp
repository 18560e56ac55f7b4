#include "krf/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "krf/errors.hpp"

namespace krf {

Geometry analyze(const RadialProfile& p) {
  const int m = p.grid().size(), n = p.n();
  const double L = p.L();
  const auto& x = p.x();
  const auto& A = p.a();
  const auto& B = p.b();
  const auto& d1 = p.grid().d1();

  Geometry g;
  g.tau.resize(m);
  g.log_ratio.resize(m);
  g.density.resize(m);
  std::vector<double> P(m);
  const double cn = p.cls().measure_constant();
  for (int i = 0; i < m; ++i) {
    g.tau[i] = x[i] * A[i];
    g.log_ratio[i] = (n - 1) * std::log(A[i]) + std::log(B[i]);
    g.density[i] = cn * std::pow(g.tau[i], n - 1) * B[i];
    P[i] = (L - x[i]) * B[i] / (L * A[i]);  // psi / tau
  }
  const auto dP = d1(P);

  std::vector<double> brt(m), btu(m), ric_t(m);
  for (int i = 0; i < m; ++i) {
    brt[i] = -dP[i] / B[i];
    btu[i] = (i == 0) ? -dP[0] / A[0] : (1.0 - P[i]) / g.tau[i];
    ric_t[i] = brt[i] + n * btu[i];
  }
  g.rho.resize(m);
  for (int i = 0; i < m; ++i) g.rho[i] = g.tau[i] * ric_t[i];
  const auto drho = d1(g.rho);
  std::vector<double> ric_r(m), brr(m), R(m);
  for (int i = 0; i < m; ++i) {
    ric_r[i] = drho[i] / B[i];
    brr[i] = ric_r[i] - (n - 1) * brt[i];
    R[i] = ric_r[i] + (n - 1) * ric_t[i];
  }

  auto& c = g.curv;
  c.n = n;
  c.nodes = p.y();
  c.R = R;
  c.B_rr = brr;
  if (n >= 2) {
    c.ric_radial = ric_r;
    c.ric_transverse = ric_t;
    c.B_rt = brt;
    c.B_tu = btu;
    c.B_tt.resize(m);
    for (int i = 0; i < m; ++i) c.B_tt[i] = 2.0 * btu[i];
  }
  g.ric_r_full = std::move(ric_r);
  g.ric_t_full = std::move(ric_t);
  return g;
}

CurvatureFields curvature_fields(const RadialProfile& p) { return analyze(p).curv; }

std::pair<double, double> bisectional_range(const CurvatureFields& c) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const int m = static_cast<int>(c.R.size());
  if (c.n == 1) {
    for (int i = 0; i < m; ++i) {
      lo = std::min(lo, c.B_rr[i]);
      hi = std::max(hi, c.B_rr[i]);
    }
    return {lo, hi};
  }
  // Unit v = (cos a) e_r + (sin a) e_1, w = (cos b) e_r + (sin b)(kappa e_1 + mu e_2)
  // up to phases, |kappa|^2 + mu^2 = 1 (mu = 0 forced for n = 2).  The form is
  // affine in (kappa, kappa^2); extremes lie where the mixing coefficient
  // k = Re kappa is on [-1, 1] with |kappa|^2 at its extreme values.
  constexpr int na = 61, nk = 41;
  std::vector<double> ca(na), sa(na);
  for (int i = 0; i < na; ++i) {
    const double t = 0.5 * std::numbers::pi * i / (na - 1);
    ca[i] = std::cos(t);
    sa[i] = std::sin(t);
  }
  for (int q = 0; q < m; ++q) {
    const double rr = c.B_rr[q], rt = c.B_rt[q], tt = c.B_tt[q], tu = c.B_tu[q];
    for (int ia = 0; ia < na; ++ia)
      for (int ib = 0; ib < na; ++ib) {
        const double c2a = ca[ia] * ca[ia], s2a = sa[ia] * sa[ia];
        const double c2b = ca[ib] * ca[ib], s2b = sa[ib] * sa[ib];
        const double cross = 2.0 * ca[ia] * ca[ib] * sa[ia] * sa[ib];
        for (int ik = 0; ik < nk; ++ik) {
          const double k = -1.0 + 2.0 * ik / (nk - 1);
          // |<e_1, f>|^2 is k^2 (n = 2 forces 1 and k = +-1 only matters via cross)
          const double mods[2] = {k * k, 1.0};
          for (double mod : mods) {
            if (c.n == 2 && mod != 1.0) continue;
            // transverse part: tt-type weight mod, tu-type weight (1 - mod)
            const double val = rr * c2a * c2b + rt * (c2a * s2b + c2b * s2a + cross * k) +
                               s2a * s2b * (tt * mod + tu * (1.0 - mod));
            lo = std::min(lo, val);
            hi = std::max(hi, val);
          }
        }
      }
  }
  return {lo, hi};
}

double integrate(std::span<const double> f, const RadialProfile& p, const Geometry& g) {
  const auto& w = p.grid().weights();
  double s = 0.0;
  for (int i = 0; i < p.grid().size(); ++i) s += w[i] * f[i] * g.density[i];
  return s;
}

double integrate(std::span<const double> f, const RadialProfile& p) {
  return integrate(f, p, analyze(p));
}

double total_volume(const RadialProfile& p) {
  std::vector<double> one(p.grid().size(), 1.0);
  return integrate(one, p);
}

std::vector<double> laplacian(std::span<const double> f, const RadialProfile& p) {
  const int m = p.grid().size(), n = p.n();
  const double L = p.L();
  const auto& x = p.x();
  const auto df = p.grid().d1()(f);
  const auto d2f = p.grid().d2()(f);
  std::vector<double> out(m);
  for (int i = 0; i < m; ++i) {
    const double psi0 = x[i] * (L - x[i]) / L, dpsi0 = 1.0 - 2.0 * x[i] / L;
    out[i] = (n - 1) * (L - x[i]) * df[i] / (L * p.a()[i]) + (dpsi0 * df[i] + psi0 * d2f[i]) / p.b()[i];
  }
  return out;
}

std::vector<double> grad_norm2(std::span<const double> f, const RadialProfile& p) {
  const double L = p.L();
  const auto& x = p.x();
  const auto df = p.grid().d1()(f);
  std::vector<double> out(df.size());
  for (std::size_t i = 0; i < df.size(); ++i) out[i] = x[i] * (L - x[i]) / L * df[i] * df[i] / p.b()[i];
  return out;
}

double radial_length(const RadialProfile& p) {
  // x = L(1 - cos th)/2 turns ds = sqrt(b/(2 psi0)) dx into sqrt(L/2) sqrt(b) dth,
  // whose even periodic extension makes the trapezoid rule spectrally accurate.
  const double L = p.L();
  const int M = 8 * p.N();
  double s = 0.0;
  for (int k = 0; k <= M; ++k) {
    const double th = std::numbers::pi * k / M;
    const double xq = std::clamp(0.5 * L * (1.0 - std::cos(th)), 0.0, L);
    const double bq = p.grid().interpolate(p.b(), xq);
    const double wgt = (k == 0 || k == M) ? 0.5 : 1.0;
    s += wgt * std::sqrt(std::max(bq, 0.0));
  }
  return std::sqrt(0.5 * L) * s * std::numbers::pi / M;
}

double diameter(const RadialProfile& p) {
  double d = radial_length(p);
  // The divisor keeps the Fubini-Study metric of scale L (a = 1 there).
  if (p.n() >= 2) d += std::numbers::pi * std::sqrt(0.5 * p.L());
  return d;
}

double lambda1_radial(const RadialProfile& p) {
  const int m = p.grid().size(), n = p.n();
  const double L = p.L();
  const auto& x = p.x();
  const auto& d1 = p.grid().d1();
  const auto& d2 = p.grid().d2();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double psi0 = x[i] * (L - x[i]) / L, dpsi0 = 1.0 - 2.0 * x[i] / L;
    const double c1 = (n - 1) * (L - x[i]) / (L * p.a()[i]) + dpsi0 / p.b()[i];
    const double c2 = psi0 / p.b()[i];
    for (int k = 0; k < BandedOp::kWidth; ++k) {
      M(i, d1.lo(i) + k) -= c1 * d1.row(i)[k];
      M(i, d2.lo(i) + k) -= c2 * d2.row(i)[k];
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) raise(ErrorCode::EigenSolveFailure, "eigenvalue iteration did not converge");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const auto ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) > 1e-8 * std::max(1.0, std::abs(ev.real()))) continue;
    if (ev.real() > 1e-6) best = std::min(best, ev.real());
  }
  if (!std::isfinite(best)) raise(ErrorCode::EigenSolveFailure, "no positive real eigenvalue in the radial spectrum");
  return best;
}

}  // namespace krf
