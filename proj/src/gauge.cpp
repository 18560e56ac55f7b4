#include "krf/gauge.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "krf/errors.hpp"

namespace krf {

double gauge_potential(double x, double lambda, double L) { return L * std::log1p(std::expm1(lambda) * x / L); }

double gauge_moment(double x, double lambda, double L) {
  return L * std::exp(lambda) * x / (L + std::expm1(lambda) * x);
}

double gauge_moment_dx(double x, double lambda, double L) {
  const double d = L + std::expm1(lambda) * x;
  return L * L * std::exp(lambda) / (d * d);
}

namespace {

struct Slice {
  std::vector<double> rho, tau, dtau, dens, theta;
  double vol = 0.0;
};

Slice slice_at(const RadialProfile& p, double lambda) {
  const int m = p.grid().size(), n = p.n();
  const double L = p.L(), cn = p.cls().measure_constant();
  const auto& x = p.x();
  const auto& w = p.grid().weights();
  Slice s;
  s.rho.resize(m);
  s.tau.resize(m);
  s.dtau.resize(m);
  s.dens.resize(m);
  s.theta.resize(m);
  double mt = 0.0;
  for (int i = 0; i < m; ++i) {
    s.rho[i] = gauge_potential(x[i], lambda, L);
    s.tau[i] = gauge_moment(x[i], lambda, L);
    s.dtau[i] = gauge_moment_dx(x[i], lambda, L);
    s.dens[i] = cn * std::pow(s.tau[i], n - 1) * s.dtau[i];
    s.vol += w[i] * s.dens[i];
    mt += w[i] * s.dens[i] * s.tau[i];
  }
  mt /= s.vol;
  for (int i = 0; i < m; ++i) s.theta[i] = s.tau[i] - mt;
  return s;
}

double pairing(const RadialProfile& p, const Slice& s, std::span<const double> f) {
  const auto& w = p.grid().weights();
  double r = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) r += w[i] * f[i] * s.theta[i] * s.dens[i];
  return r;
}

double condition(const RadialProfile& p, double lambda) {
  const auto s = slice_at(p, lambda);
  std::vector<double> d(p.u());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= s.rho[i];
  return pairing(p, s, d);
}

}  // namespace

GaugeState gauge_fit(const RadialProfile& p) {
  double lo = -4.0, hi = 4.0;
  double flo = condition(p, lo), fhi = condition(p, hi);
  if (flo * fhi > 0) {
    lo = -16.0;
    hi = 16.0;
    flo = condition(p, lo);
    fhi = condition(p, hi);
    if (flo * fhi > 0) {
      std::ostringstream os;
      os << "centrally positioned condition has no sign change on [-16, 16] (values " << flo << ", " << fhi << ")";
      raise(ErrorCode::RootNotBracketed, os.str());
    }
  }
  double lam = 0.0;
  if (flo == 0.0) {
    lam = lo;
  } else if (fhi == 0.0) {
    lam = hi;
  } else {
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve([&](double l) { return condition(p, l); }, lo, hi, flo, fhi,
                                               boost::math::tools::eps_tolerance<double>(52), iters);
    lam = 0.5 * (r.first + r.second);
  }

  // lambda is resolved to a few ulps; a final linear correction in the
  // direction d rho / d lambda = tau_rho removes the remaining residual to
  // rounding relative to |psi| rather than to |lambda|.
  const auto s = slice_at(p, lam);
  const int m = p.grid().size();
  const auto& w = p.grid().weights();
  GaugeState g;
  g.psi.resize(m);
  for (int i = 0; i < m; ++i) g.psi[i] = p.u()[i] - s.rho[i];
  auto center = [&](std::vector<double>& f) {
    double mean = 0.0;
    for (int i = 0; i < m; ++i) mean += w[i] * f[i] * s.dens[i];
    mean /= s.vol;
    for (auto& v : f) v -= mean;
  };
  center(g.psi);
  double tt = 0.0;
  for (int i = 0; i < m; ++i) tt += w[i] * s.theta[i] * s.theta[i] * s.dens[i];
  const double dl = pairing(p, s, g.psi) / tt;
  for (int i = 0; i < m; ++i) g.psi[i] -= dl * s.theta[i];
  center(g.psi);

  g.lambda = lam + dl;
  g.rho = s.rho;
  g.tau_rho = s.tau;
  g.dtau_rho = s.dtau;
  g.theta = s.theta;
  g.residual = pairing(p, s, g.psi);
  for (double v : g.psi) g.psi_sup = std::max(g.psi_sup, std::abs(v));
  return g;
}

}  // namespace krf
