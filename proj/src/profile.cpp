#include "krf/profile.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "krf/errors.hpp"

namespace krf {

ClassData ClassData::scaled(int n, int ell, double class_scale) {
  if (n < 1) raise(ErrorCode::RangeError, "n must be >= 1");
  if (ell < 1) raise(ErrorCode::RangeError, "ell must be >= 1");
  if (!(class_scale > 0)) raise(ErrorCode::RangeError, "class_scale must be > 0");
  ClassData c;
  c.n = n;
  c.ell = ell;
  c.class_scale = class_scale;
  c.V = std::pow(std::numbers::pi * class_scale, n) / (std::tgamma(n + 1.0) * ell);
  return c;
}

ClassData ClassData::canonical(int n, int ell) { return scaled(n, ell, n + 1.0); }

double ClassData::measure_constant() const {
  return std::pow(std::numbers::pi, n) / (std::tgamma(static_cast<double>(n)) * ell);
}

RadialProfile::RadialProfile(const ClassData& cls, std::shared_ptr<const Grid> grid,
                             std::vector<double> u, double volume_tol)
    : cls_(cls), grid_(std::move(grid)), u_(std::move(u)) {
  const int m = grid_->size();
  if (static_cast<int>(u_.size()) != m) raise(ErrorCode::RangeError, "potential size does not match grid");
  const double L = cls_.class_scale;
  const auto& x = grid_->x();
  du_ = grid_->d1()(u_);
  d2u_ = grid_->d2()(u_);
  a_.resize(m);
  b_.resize(m);
  psi0_.resize(m);
  for (int i = 0; i < m; ++i) {
    psi0_[i] = x[i] * (L - x[i]) / L;
    a_[i] = 1.0 + (L - x[i]) / L * du_[i];
    b_[i] = 1.0 + (1.0 - 2.0 * x[i] / L) * du_[i] + psi0_[i] * d2u_[i];
    if (!(a_[i] > 1e-12) || !(b_[i] > 1e-12)) {
      std::ostringstream os;
      os << "metric eigenvalue not positive at y = " << x[i] / L << " (a = " << a_[i]
         << ", b = " << b_[i] << ")";
      raise(ErrorCode::PositivityViolation, os.str());
    }
  }
  // Smooth closing at both ends: a = b at the origin and a = 1 on the divisor.
  if (std::abs(a_[0] - b_[0]) > 1e-10 * a_[0] || a_[m - 1] != 1.0)
    raise(ErrorCode::DifferentiationFailure, "endpoint regularity violated");

  // Class membership by quadrature of the volume form.
  std::vector<double> dens(m);
  for (int i = 0; i < m; ++i) dens[i] = std::pow(x[i] * a_[i], cls_.n - 1) * b_[i];
  const double vol = cls_.measure_constant() * grid_->quad(dens);
  if (std::abs(vol - cls_.V) > volume_tol * cls_.V) {
    std::ostringstream os;
    os.precision(12);
    os << "profile volume " << vol << " differs from class volume " << cls_.V
       << " (under-resolved profile)";
    raise(ErrorCode::DifferentiationFailure, os.str());
  }
}

std::vector<double> RadialProfile::y() const {
  std::vector<double> y(grid_->size());
  for (int i = 0; i < grid_->size(); ++i) y[i] = static_cast<double>(i) / grid_->N();
  return y;
}

std::vector<double> RadialProfile::background_potential() const {
  const double L = cls_.class_scale;
  std::vector<double> f(grid_->size());
  for (int i = 0; i < grid_->size(); ++i) {
    const double xi = grid_->x()[i];
    f[i] = xi >= L ? std::numeric_limits<double>::infinity() : -L * std::log1p(-xi / L);
  }
  return f;
}

RadialProfile make_fubini_study(const ClassData& cls, int N) {
  auto g = Grid::get(N, cls.class_scale);
  return RadialProfile(cls, g, std::vector<double>(g->size(), 0.0));
}

double perturbation_value(const ClassData& cls, double amplitude, const ModeSpec& modes, double x) {
  const double t = 2.0 * x / cls.class_scale - 1.0;
  double s = 0.0;
  for (const auto& [k, c] : modes) {
    if (k < 0) raise(ErrorCode::RangeError, "mode index must be >= 0");
    s += c * std::legendre(static_cast<unsigned>(k), t);
  }
  return amplitude * s;
}

RadialProfile make_perturbed(const ClassData& cls, int N, double amplitude, const ModeSpec& modes) {
  auto g = Grid::get(N, cls.class_scale);
  std::vector<double> u(g->size());
  for (int i = 0; i < g->size(); ++i) u[i] = perturbation_value(cls, amplitude, modes, g->x()[i]);
  return RadialProfile(cls, g, std::move(u));
}

void write_profile(std::ostream& os, const RadialProfile& p) {
  const auto& c = p.cls();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d %d %d %.17g\n", c.n, c.ell, p.N(), c.class_scale);
  os << buf;
  const auto y = p.y();
  for (int i = 0; i <= p.N(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", y[i], p.u()[i], p.a()[i], p.b()[i]);
    os << buf;
  }
}

RadialProfile read_profile(std::istream& is) {
  std::string line;
  int n = 0, ell = 0, N = 0;
  double L = 0;
  if (!std::getline(is, line)) raise(ErrorCode::ParseError, "profile: missing header");
  {
    std::istringstream hs(line);
    if (!(hs >> n >> ell >> N >> L)) raise(ErrorCode::ParseError, "profile: malformed header '" + line + "'");
  }
  const ClassData cls = ClassData::scaled(n, ell, L);
  auto g = Grid::get(N, L);
  std::vector<double> u(N + 1);
  for (int i = 0; i <= N; ++i) {
    double y, ui, a, b;
    if (!std::getline(is, line)) raise(ErrorCode::ParseError, "profile: expected " + std::to_string(N + 1) + " node lines");
    std::istringstream ls(line);
    if (!(ls >> y >> ui >> a >> b)) raise(ErrorCode::ParseError, "profile: malformed node line " + std::to_string(i + 2));
    if (std::abs(y - static_cast<double>(i) / N) > 1e-12) raise(ErrorCode::ParseError, "profile: node " + std::to_string(i) + " off the uniform grid");
    u[i] = ui;
  }
  return RadialProfile(cls, g, std::move(u));
}

}  // namespace krf
