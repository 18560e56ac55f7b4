#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "krf/errors.hpp"
#include "krf/functionals.hpp"
#include "krf/geometry.hpp"
#include "krf/oracle.hpp"

using namespace krf;
using cd = std::complex<double>;

namespace {

// Closed-form FS metric of (n+1) log(1 + |z|^2).
Eigen::MatrixXcd fs_metric(const std::vector<cd>& z) {
  const int n = static_cast<int>(z.size());
  double r2 = 0.0;
  for (auto v : z) r2 += std::norm(v);
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g(i, j) = (n + 1.0) * ((i == j ? 1.0 : 0.0) / (1 + r2) - std::conj(z[i]) * z[j] / ((1 + r2) * (1 + r2)));
  return g;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

const ModeSpec kModes = {{2, 1.0}, {3, -0.5}, {4, 0.3}};
constexpr double kAmp = 0.03;

}  // namespace

TEST_CASE("oracle_metric_at") {
  SUBCASE("FS n=2 at z = (0.5, 0) matches the closed form") {
    const std::vector<cd> z = {{0.5, 0.0}, {0.0, 0.0}};
    // |z| = 0.5 is inside the chart band; the second coordinate may vanish.
    auto t = oracle_metric_at(fubini_study_potential(2, 3.0), PointChart::make(z));
    CHECK(max_abs(t.g - fs_metric(z)) < 1e-7);
  }
  SUBCASE("|z|^2 gives the identity") {
    Potential flat = [](std::span<const double> r) {
      double s = 0;
      for (double v : r) s += v * v;
      return s;
    };
    auto t = oracle_metric_at(flat, PointChart::make({{0.3, -0.2}, {0.7, 0.1}}));
    CHECK(max_abs(t.g - Eigen::MatrixXcd::Identity(2, 2)) < 1e-10);
  }
  SUBCASE("halving h shrinks the h vs h/2 gap at sixth order") {
    const std::vector<cd> z = {{0.6, 0.3}, {-0.2, 0.4}};
    const auto F = fubini_study_potential(2, 3.0);
    const double g1 = oracle_metric_at(F, PointChart::make(z), 0.08).richardson_gap;
    const double g2 = oracle_metric_at(F, PointChart::make(z), 0.04).richardson_gap;
    CHECK(g1 / g2 > 32.0);
    CHECK(max_abs(oracle_metric_at(F, PointChart::make(z), 0.04).g - fs_metric(z)) < 1e-9);
  }
  SUBCASE("chart band is enforced") {
    CHECK_THROWS_AS(PointChart::make({{1e-4, 0.0}}), Error);
    CHECK_THROWS_AS(PointChart::make({{2e3, 0.0}}), Error);
  }
}

TEST_CASE("oracle_curvature_at on FS") {
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    std::vector<cd> z;
    for (int i = 0; i < n; ++i) z.emplace_back(0.4 - 0.1 * i, 0.2 + 0.15 * i);
    auto t = oracle_curvature_at(fubini_study_potential(n, n + 1.0), PointChart::make(z));
    CHECK(t.R == doctest::Approx(n).epsilon(1e-6));
    CHECK(max_abs(t.ric - t.g) < 1e-6);
    CHECK(max_abs(t.ric - t.ric_logdet) < 1e-6);
    double worst = 0.0, sym = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const cd T = t.g(i, j) * t.g(k, l) + t.g(i, l) * t.g(k, j);
            worst = std::max(worst, std::abs(t.riem_at(i, j, k, l) - T / (n + 1.0)));
            sym = std::max(sym, std::abs(t.riem_at(i, j, k, l) - t.riem_at(k, j, i, l)));
            sym = std::max(sym, std::abs(t.riem_at(i, j, k, l) - t.riem_at(i, l, k, j)));
          }
    CHECK(worst < 1e-5);
    CHECK(sym < 1e-7);
  }
}

TEST_CASE("oracle agrees with the radial curvature") {
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    const auto cls = ClassData::canonical(n);
    auto p = make_perturbed(cls, 256, kAmp, kModes);
    auto c = curvature_fields(p);
    auto F = radial_potential(cls, [&](double x) { return perturbation_value(cls, kAmp, kModes, x); });
    std::vector<cd> dir;
    for (int i = 0; i < n; ++i) dir.emplace_back(0.3 + 0.2 * i, 0.1 - 0.3 * i);
    for (int j : {40, 128, 200}) {
      CAPTURE(j);
      auto pt = point_at_moment(p.x()[j], cls.class_scale, dir);
      auto t = oracle_curvature_at(F, pt);
      auto fc = radial_frame(t, pt);
      CHECK(fc.R == doctest::Approx(c.R[j]).epsilon(1e-5));
      CHECK(fc.B_rr == doctest::Approx(c.B_rr[j]).epsilon(1e-5));
      if (n >= 2) {
        CHECK(fc.ric_r == doctest::Approx(c.ric_radial[j]).epsilon(1e-5));
        CHECK(fc.ric_t == doctest::Approx(c.ric_transverse[j]).epsilon(1e-5));
        CHECK(fc.B_rt == doctest::Approx(c.B_rt[j]).epsilon(1e-5));
        CHECK(fc.B_tt == doctest::Approx(c.B_tt[j]).epsilon(1e-5));
      }
      if (n >= 3) CHECK(fc.B_tu == doctest::Approx(c.B_tu[j]).epsilon(1e-5));
      CHECK(t.richardson_gap < 1e-4);
    }
  }
}

TEST_CASE("oracle_sigma_at") {
  SUBCASE("FS n=2 gives binomial coefficients") {
    auto s = oracle_sigma_at(fubini_study_potential(2, 3.0), PointChart::make({{0.5, 0.1}, {0.2, -0.3}}));
    REQUIRE(s.size() == 3);
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(s[2] == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("random radial n=2: sigma_1 = R and sigma_2 = (R^2 - |Ric|^2)/2") {
    const auto cls = ClassData::canonical(2);
    auto F = radial_potential(cls, [&](double x) { return perturbation_value(cls, kAmp, kModes, x); });
    auto pt = point_at_moment(1.1, 3.0, std::vector<cd>{{0.6, 0.2}, {-0.3, 0.5}});
    auto t = oracle_curvature_at(F, pt);
    auto s = sigma_from(t.g, t.ric);
    CHECK(s[1] == doctest::Approx(t.R).epsilon(1e-10));
    // Eigenvalues of g^{-1} Ric, brute force.
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(t.g.inverse() * t.ric);
    const cd l0 = es.eigenvalues()[0], l1 = es.eigenvalues()[1];
    const double norm2 = std::real(l0 * l0 + l1 * l1);
    CHECK(s[2] == doctest::Approx((t.R * t.R - norm2) / 2).epsilon(1e-6));
  }
  SUBCASE("radial sigma profile matches the oracle") {
    const auto cls = ClassData::canonical(3);
    auto p = make_perturbed(cls, 256, kAmp, kModes);
    auto sp = sigma_profile(curvature_fields(p), p);
    auto F = radial_potential(cls, [&](double x) { return perturbation_value(cls, kAmp, kModes, x); });
    const int j = 100;
    auto pt = point_at_moment(p.x()[j], cls.class_scale, std::vector<cd>{{0.6, 0.2}, {-0.3, 0.5}, {0.1, 0.1}});
    auto s = oracle_sigma_at(F, pt);
    for (int k = 0; k <= 3; ++k) CHECK(s[k] == doctest::Approx(sp[k][j]).epsilon(1e-5));
  }
}
