#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "krf/errors.hpp"
#include "krf/geometry.hpp"
#include "krf/grid.hpp"
#include "krf/profile.hpp"

using namespace krf;
using std::numbers::pi;

namespace {

double max_abs_diff(const std::vector<double>& v, double target) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e - target));
  return m;
}

// u = 0.03 (P2(t) - P3(t)/2), t = 2x/L - 1: curvature values below were
// obtained symbolically from the potential (log-det formula in the variable
// s = log|z|^2) and are frozen here.
const ModeSpec kModes = {{2, 1.0}, {3, -0.5}};
constexpr double kAmp = 0.03;

}  // namespace

TEST_CASE("grid: derivative stencils and quadrature are exact on low polynomials") {
  Grid g(32, 3.0);
  std::vector<double> f(g.size()), df(g.size()), d2f(g.size());
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.x()[i];
    f[i] = std::pow(x, 7) - 2 * x * x;
    df[i] = 7 * std::pow(x, 6) - 4 * x;
    d2f[i] = 42 * std::pow(x, 5) - 4;
  }
  const auto a = g.d1()(f), b = g.d2()(f);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(a[i] == doctest::Approx(df[i]).epsilon(1e-9));
    CHECK(b[i] == doctest::Approx(d2f[i]).epsilon(1e-8));
  }
  CHECK(g.quad(f) == doctest::Approx(std::pow(3.0, 8) / 8 - 2 * 9.0).epsilon(1e-13));
  CHECK_THROWS_AS(Grid(8, 2.0), Error);
}

TEST_CASE("make_fubini_study") {
  SUBCASE("n=1: psi0 = x(2-x)/2 and R = 1") {
    auto p = make_fubini_study(ClassData::canonical(1), 64);
    for (int i = 0; i < p.grid().size(); ++i) {
      const double x = p.x()[i];
      CHECK(p.background_dss()[i] == doctest::Approx(x * (2 - x) / 2).epsilon(1e-15));
    }
    CHECK(max_abs_diff(curvature_fields(p).R, 1.0) < 1e-10);
  }
  SUBCASE("n=2: zero relative potential") {
    auto p = make_fubini_study(ClassData::canonical(2), 64);
    CHECK(max_abs_diff(p.u(), 0.0) == 0.0);
    CHECK(max_abs_diff(p.a(), 1.0) == 0.0);
  }
  SUBCASE("ell=2 halves the volume") {
    auto p1 = make_fubini_study(ClassData::canonical(1, 1), 64);
    auto p2 = make_fubini_study(ClassData::canonical(1, 2), 64);
    CHECK(total_volume(p2) == doctest::Approx(total_volume(p1) / 2).epsilon(1e-14));
  }
}

TEST_CASE("make_perturbed") {
  const auto cls = ClassData::canonical(1);
  SUBCASE("zero amplitude equals FS") {
    auto p = make_perturbed(cls, 64, 0.0, kModes);
    auto f = make_fubini_study(cls, 64);
    CHECK(p.u() == f.u());
    CHECK(p.b() == f.b());
  }
  SUBCASE("small single low mode keeps positive bisectional curvature") {
    auto p = make_perturbed(cls, 64, 0.1, {{1, 1.0}});
    CHECK(bisectional_range(curvature_fields(p)).first > 0.0);
  }
  SUBCASE("large amplitude violates positivity") {
    CHECK_THROWS_WITH_AS(make_perturbed(cls, 64, 10.0, {{2, 1.0}}), doctest::Contains("PositivityViolation"),
                         Error);
  }
}

TEST_CASE("curvature_fields") {
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    auto c = curvature_fields(make_fubini_study(ClassData::canonical(n), 64));
    CHECK(max_abs_diff(c.R, n) < 1e-9);
    if (n >= 2) {
      const double e = 1.0 / (n + 1);
      CHECK(max_abs_diff(c.B_rr, 2 * e) < 1e-9);
      CHECK(max_abs_diff(c.B_tt, 2 * e) < 1e-9);
      CHECK(max_abs_diff(c.B_rt, e) < 1e-9);
      CHECK(max_abs_diff(c.B_tu, e) < 1e-9);
    }
  }
  SUBCASE("perturbed n=1 against frozen symbolic values") {
    auto c = curvature_fields(make_perturbed(ClassData::canonical(1), 128, kAmp, kModes));
    CHECK(c.R[48] == doctest::Approx(1.1934146196494691849).epsilon(1e-9));  // x = 3/4
    CHECK(c.R[80] == doctest::Approx(0.93471314673662535380).epsilon(1e-9));  // x = 5/4
  }
  SUBCASE("perturbed n=2 against frozen symbolic values") {
    auto c = curvature_fields(make_perturbed(ClassData::canonical(2), 128, kAmp, kModes));
    CHECK(c.R[32] == doctest::Approx(2.0163642812246965846).epsilon(1e-9));  // x = 3/4
    CHECK(c.ric_radial[32] == doctest::Approx(1.1083910979311851387).epsilon(1e-9));
    CHECK(c.ric_transverse[32] == doctest::Approx(0.90797318329351144589).epsilon(1e-9));
    CHECK(c.R[64] == doctest::Approx(2.0875023892747795513).epsilon(1e-9));  // x = 3/2
  }
  SUBCASE("U(n) symmetry: B_tt = 2 B_tu") {
    auto c = curvature_fields(make_perturbed(ClassData::canonical(3), 64, kAmp, kModes));
    for (std::size_t i = 0; i < c.B_tt.size(); ++i) CHECK(c.B_tt[i] == doctest::Approx(2 * c.B_tu[i]).epsilon(1e-12));
  }
}

TEST_CASE("bisectional_range") {
  SUBCASE("FS has constant bisectional curvature") {
    for (int n = 1; n <= 3; ++n) {
      auto [lo, hi] = bisectional_range(curvature_fields(make_fubini_study(ClassData::canonical(n), 64)));
      // n = 1 has the single value R; otherwise B(v, w) ranges over [e, 2e].
      CHECK(lo == doctest::Approx(n == 1 ? 1.0 : 1.0 / (n + 1)).epsilon(1e-9));
      CHECK(hi == doctest::Approx(n == 1 ? 1.0 : 2.0 / (n + 1)).epsilon(1e-9));
    }
  }
  SUBCASE("a strongly pinched profile has a negative direction") {
    auto c = curvature_fields(make_perturbed(ClassData::canonical(1), 64, 0.05, {{2, 1.0}, {3, 1.0}}));
    bool rr_negative = false;
    for (double v : c.B_rr) rr_negative |= v < 0;
    CHECK(rr_negative);
    CHECK(bisectional_range(c).first < 0.0);
  }
}

TEST_CASE("total_volume and integrate") {
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    const auto cls = ClassData::canonical(n);
    const double V0 = std::pow(pi * (n + 1), n) / std::tgamma(n + 1.0);
    CHECK(total_volume(make_fubini_study(cls, 64)) == doctest::Approx(V0).epsilon(1e-13));
    auto p = make_perturbed(cls, 128, kAmp, kModes);
    CHECK(std::abs(total_volume(p) - V0) < 1e-8 * V0);
    auto g = analyze(p);
    std::vector<double> dev(g.curv.R);
    for (auto& v : dev) v -= n;
    CHECK(std::abs(integrate(dev, p, g)) < 1e-7 * V0);  // trace identity
    CHECK(total_volume(make_fubini_study(ClassData::canonical(n, 2), 64)) == doctest::Approx(V0 / 2).epsilon(1e-13));
  }
  SUBCASE("odd function about the centre integrates to zero at FS") {
    // The n = 1 volume form is dx up to a constant, symmetric about x = 1.
    auto p = make_fubini_study(ClassData::canonical(1), 64);
    std::vector<double> f(p.grid().size());
    for (int i = 0; i < p.grid().size(); ++i) f[i] = std::pow(p.x()[i] - 1.0, 3) + std::sin(p.x()[i] - 1.0);
    CHECK(std::abs(integrate(f, p)) < 1e-12);
  }
}

TEST_CASE("diameter") {
  SUBCASE("FS n=1 is the unit sphere") {
    CHECK(diameter(make_fubini_study(ClassData::canonical(1), 64)) == doctest::Approx(pi).epsilon(1e-12));
  }
  SUBCASE("FS n=2: radial length plus divisor diameter") {
    CHECK(diameter(make_fubini_study(ClassData::canonical(2), 64)) ==
          doctest::Approx(2 * pi * std::sqrt(1.5)).epsilon(1e-12));
  }
  SUBCASE("class scaled by 4 doubles lengths") {
    auto p1 = make_perturbed(ClassData::canonical(1), 64, kAmp, kModes);
    const auto big = ClassData::scaled(1, 1, 8.0);
    auto g = Grid::get(64, 8.0);
    std::vector<double> u(p1.u());
    for (auto& v : u) v *= 4.0;
    RadialProfile p4(big, g, u);
    CHECK(diameter(p4) == doctest::Approx(2 * diameter(p1)).epsilon(1e-12));
  }
  SUBCASE("ell=2 global quotient keeps the pole-to-pole length") {
    const double d1 = radial_length(make_fubini_study(ClassData::canonical(1, 1), 64));
    const double d2 = radial_length(make_fubini_study(ClassData::canonical(1, 2), 64));
    CHECK(d2 == doctest::Approx(d1).epsilon(1e-14));
  }
}

TEST_CASE("lambda1_radial") {
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    const double l64 = lambda1_radial(make_fubini_study(ClassData::canonical(n), 64));
    const double l128 = lambda1_radial(make_fubini_study(ClassData::canonical(n), 128));
    CHECK(l64 == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(l128 - 1.0) <= std::abs(l64 - 1.0) + 1e-10);
  }
  SUBCASE("perturbed profile satisfies the Li-Yau bound") {
    auto p = make_perturbed(ClassData::canonical(2), 64, kAmp, kModes);
    const double D = diameter(p);
    CHECK(lambda1_radial(p) >= pi * pi / (4 * D * D));
  }
}

TEST_CASE("profile text format round trip") {
  auto p = make_perturbed(ClassData::canonical(2, 2), 32, kAmp, kModes);
  std::stringstream ss;
  write_profile(ss, p);
  auto q = read_profile(ss);
  CHECK(q.u() == p.u());
  CHECK(q.cls().ell == 2);
  std::stringstream bad("2 1 32 3\n0 0 1 1\n");
  CHECK_THROWS_AS(read_profile(bad), Error);
}
