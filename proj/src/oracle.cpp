#include "krf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "krf/errors.hpp"

namespace krf {

using cd = std::complex<double>;

PointChart PointChart::make(std::vector<cd> z) {
  PointChart p{std::move(z)};
  const double r = p.norm();
  if (!(r >= 1e-3 && r <= 1e3)) {
    std::ostringstream os;
    os << "|z| = " << r << " outside the chart band [1e-3, 1e3]";
    raise(ErrorCode::RangeError, os.str());
  }
  return p;
}

double PointChart::norm() const {
  double s = 0.0;
  for (const auto& c : z) s += std::norm(c);
  return std::sqrt(s);
}

namespace {

// Real partial derivatives of orders 2..max_order at X, stored as dense
// symmetric tensors over the d = 2n real coordinates.
struct RealDerivs {
  int d = 0;
  std::vector<double> t2, t3, t4;
};

const std::vector<double>& central_weights(int m) {
  static const auto table = [] {
    std::vector<std::vector<double>> w(5);
    for (int k = 1; k <= 4; ++k) {
      const int r = k <= 2 ? 3 : 4;
      std::vector<double> nodes;
      for (int o = -r; o <= r; ++o) nodes.push_back(o);
      w[k] = fd_weights(0.0, nodes, k);
    }
    return w;
  }();
  return table[m];
}

class DerivEngine {
 public:
  DerivEngine(const std::function<double(std::span<const double>)>& f, std::span<const double> X, double h)
      : f_(f), X_(X.begin(), X.end()), h_(h) {}

  // d^|alpha| f / dX_alpha for a sorted multi-index.
  double partial(const std::vector<int>& alpha) {
    std::vector<std::pair<int, int>> groups;  // (coordinate, multiplicity)
    for (int a : alpha) {
      if (!groups.empty() && groups.back().first == a) ++groups.back().second;
      else groups.emplace_back(a, 1);
    }
    std::vector<int> off(X_.size(), 0);
    double total = 0.0;
    recurse(groups, 0, 1.0, off, total);
    return total / std::pow(h_, static_cast<double>(alpha.size()));
  }

 private:
  void recurse(const std::vector<std::pair<int, int>>& groups, std::size_t gi, double wacc,
               std::vector<int>& off, double& total) {
    if (gi == groups.size()) {
      total += wacc * eval(off);
      return;
    }
    const auto [c, m] = groups[gi];
    const auto& w = central_weights(m);
    const int r = static_cast<int>(w.size()) / 2;
    for (int o = -r; o <= r; ++o) {
      const double wo = w[o + r];
      if (wo == 0.0) continue;
      off[c] = o;
      recurse(groups, gi + 1, wacc * wo, off, total);
    }
    off[c] = 0;
  }

  double eval(const std::vector<int>& off) {
    std::string key(off.size(), '\0');
    for (std::size_t i = 0; i < off.size(); ++i) key[i] = static_cast<char>(off[i]);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::vector<double> Y(X_);
    for (std::size_t i = 0; i < off.size(); ++i) Y[i] += h_ * off[i];
    const double v = f_(Y);
    if (!std::isfinite(v)) raise(ErrorCode::ConditioningFailure, "potential not finite at a stencil point");
    memo_.emplace(std::move(key), v);
    return v;
  }

  const std::function<double(std::span<const double>)>& f_;
  std::vector<double> X_;
  double h_;
  std::map<std::string, double> memo_;
};

RealDerivs real_derivs(const std::function<double(std::span<const double>)>& f, std::span<const double> X,
                       double h, int max_order) {
  const int d = static_cast<int>(X.size());
  DerivEngine eng(f, X, h);
  RealDerivs r;
  r.d = d;
  r.t2.assign(d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) r.t2[a * d + b] = r.t2[b * d + a] = eng.partial({a, b});
  if (max_order >= 3) {
    r.t3.assign(d * d * d, 0.0);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b)
        for (int c = b; c < d; ++c) {
          const double v = eng.partial({a, b, c});
          int idx[3] = {a, b, c};
          std::sort(idx, idx + 3);
          do r.t3[(idx[0] * d + idx[1]) * d + idx[2]] = v;
          while (std::next_permutation(idx, idx + 3));
        }
  }
  if (max_order >= 4) {
    r.t4.assign(d * d * d * d, 0.0);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b)
        for (int c = b; c < d; ++c)
          for (int e = c; e < d; ++e) {
            const double v = eng.partial({a, b, c, e});
            int idx[4] = {a, b, c, e};
            std::sort(idx, idx + 4);
            do r.t4[((idx[0] * d + idx[1]) * d + idx[2]) * d + idx[3]] = v;
            while (std::next_permutation(idx, idx + 4));
          }
  }
  return r;
}

double rel_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0 ? num / den : num;
}

void extrapolate(std::vector<double>& coarse, const std::vector<double>& fine) {
  for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = (64.0 * fine[i] - coarse[i]) / 63.0;
}

// Two-scale evaluation: tensors at h and h/2, Richardson-combined; the
// discrepancy doubles as the conditioning self-test.
constexpr double kMaxGap = 1e-4;

RealDerivs checked_derivs(const std::function<double(std::span<const double>)>& f, std::span<const double> X,
                          double h, int max_order, double& gap) {
  RealDerivs c = real_derivs(f, X, h, max_order);
  RealDerivs fn = real_derivs(f, X, 0.5 * h, max_order);
  gap = rel_gap(c.t2, fn.t2);
  if (max_order >= 3) gap = std::max(gap, rel_gap(c.t3, fn.t3));
  if (max_order >= 4) gap = std::max(gap, rel_gap(c.t4, fn.t4));
  if (!(gap < kMaxGap)) {
    std::ostringstream os;
    os << "finite-difference self-test failed: relative gap " << gap << " between h and h/2";
    raise(ErrorCode::ConditioningFailure, os.str());
  }
  extrapolate(c.t2, fn.t2);
  if (max_order >= 3) extrapolate(c.t3, fn.t3);
  if (max_order >= 4) extrapolate(c.t4, fn.t4);
  return c;
}

// Wirtinger vectors: holo(j) represents d/dz_j, anti(j) d/dzbar_j.
std::vector<cd> wirtinger(int n, int j, bool anti) {
  std::vector<cd> v(2 * n, 0.0);
  v[2 * j] = 0.5;
  v[2 * j + 1] = anti ? cd(0, 0.5) : cd(0, -0.5);
  return v;
}

std::vector<double> real_coords(const PointChart& pt) {
  std::vector<double> X;
  for (const auto& c : pt.z) {
    X.push_back(c.real());
    X.push_back(c.imag());
  }
  return X;
}

Eigen::MatrixXcd complex_hessian(const std::vector<double>& t2, int n) {
  const int d = 2 * n;
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto u = wirtinger(n, i, false), w = wirtinger(n, j, true);
      cd s = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) s += t2[a * d + b] * u[a] * w[b];
      g(i, j) = s;
    }
  return g;
}

double step_for(const PointChart& pt, double h) { return h * std::max(1.0, pt.norm()); }

}  // namespace

OracleTensor oracle_metric_at(const Potential& F, const PointChart& pt, double h) {
  const int n = static_cast<int>(pt.z.size());
  const auto X = real_coords(pt);
  OracleTensor t;
  t.n = n;
  auto rd = checked_derivs(F, X, step_for(pt, h), 2, t.richardson_gap);
  t.g = complex_hessian(rd.t2, n);
  const auto det = t.g.determinant();
  t.vol = det.real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t.g);
  if (es.eigenvalues().minCoeff() <= 0) raise(ErrorCode::ConditioningFailure, "metric not positive definite");
  return t;
}

OracleTensor oracle_curvature_at(const Potential& F, const PointChart& pt, double h) {
  const int n = static_cast<int>(pt.z.size()), d = 2 * n;
  const auto X = real_coords(pt);
  const double he = step_for(pt, h);
  OracleTensor t;
  t.n = n;
  auto rd = checked_derivs(F, X, he, 4, t.richardson_gap);
  t.g = complex_hessian(rd.t2, n);
  t.vol = t.g.determinant().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t.g);
  if (es.eigenvalues().minCoeff() <= 0) raise(ErrorCode::ConditioningFailure, "metric not positive definite");
  const Eigen::MatrixXcd H = t.g.inverse();  // g^{p qbar} = H(q, p)

  std::vector<std::vector<cd>> hol(n), ant(n);
  for (int j = 0; j < n; ++j) {
    hol[j] = wirtinger(n, j, false);
    ant[j] = wirtinger(n, j, true);
  }
  // Third derivatives F_{i qbar k} and F_{p jbar lbar}.
  auto contract3 = [&](const std::vector<cd>& u, const std::vector<cd>& v, const std::vector<cd>& w) {
    cd s = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const cd uv = u[a] * v[b];
        for (int c = 0; c < d; ++c) s += rd.t3[(a * d + b) * d + c] * uv * w[c];
      }
    return s;
  };
  auto contract4 = [&](const std::vector<cd>& u, const std::vector<cd>& v, const std::vector<cd>& w,
                       const std::vector<cd>& z) {
    cd s = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const cd uv = u[a] * v[b];
        for (int c = 0; c < d; ++c) {
          const cd uvw = uv * w[c];
          const double* row = &rd.t4[((a * d + b) * d + c) * d];
          for (int e = 0; e < d; ++e) s += row[e] * uvw * z[e];
        }
      }
    return s;
  };
  // dg[i][q][k] = d_k g_{i qbar};  dbg[p][j][l] = dbar_l g_{p jbar}
  std::vector<cd> dg(n * n * n), dbg(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int q = 0; q < n; ++q)
      for (int k = 0; k < n; ++k) {
        dg[(i * n + q) * n + k] = contract3(hol[i], ant[q], hol[k]);
        dbg[(i * n + q) * n + k] = contract3(hol[i], ant[q], ant[k]);
      }
  t.riem.assign(n * n * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cd s = -contract4(hol[i], ant[j], hol[k], ant[l]);
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) s += H(q, p) * dg[(i * n + q) * n + k] * dbg[(p * n + j) * n + l];
          t.riem[((i * n + j) * n + k) * n + l] = s;
        }
  t.ric = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) t.ric(i, j) += H(l, k) * t.riem_at(i, j, k, l);
  t.R = (H * t.ric).trace().real();

  // Independent Ricci: -d dbar log det g, with g itself from finite differences.
  const double hin = 0.5 * he;
  auto logdet = [&](std::span<const double> Y) {
    auto r2 = real_derivs(F, Y, hin, 2);
    const auto gg = complex_hessian(r2.t2, n);
    const double dt = gg.determinant().real();
    if (!(dt > 0)) return std::numeric_limits<double>::quiet_NaN();
    return std::log(dt);
  };
  double gap2 = 0.0;
  auto ld = checked_derivs(logdet, X, he, 2, gap2);
  t.ric_logdet = -complex_hessian(ld.t2, n);
  t.richardson_gap = std::max(t.richardson_gap, gap2);
  return t;
}

std::vector<double> sigma_from(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& ric) {
  const int n = static_cast<int>(g.rows());
  const Eigen::MatrixXcd M = g.inverse() * ric;
  // Faddeev-LeVerrier: det(lambda I - M) = sum_k c_k lambda^k, c_n = 1.
  std::vector<cd> c(n + 1, 0.0);
  c[n] = 1.0;
  Eigen::MatrixXcd Mk = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    Mk = M * Mk + c[n - k + 1] * I;
    c[n - k] = -(M * Mk).trace() / static_cast<double>(k);
  }
  std::vector<double> sigma(n + 1);
  for (int k = 0; k <= n; ++k) sigma[k] = ((k % 2) ? -1.0 : 1.0) * c[n - k].real();
  return sigma;
}

std::vector<double> oracle_sigma_at(const Potential& F, const PointChart& pt, double h) {
  const auto t = oracle_curvature_at(F, pt, h);
  return sigma_from(t.g, t.ric);
}

Potential fubini_study_potential(int n, double L) {
  return [n, L](std::span<const double> X) {
    double r2 = 0.0;
    for (int i = 0; i < 2 * n; ++i) r2 += X[i] * X[i];
    return L * std::log1p(r2);
  };
}

Potential radial_potential(const ClassData& cls, std::function<double(double)> phi_of_x) {
  const int n = cls.n;
  const double L = cls.class_scale;
  return [n, L, phi = std::move(phi_of_x)](std::span<const double> X) {
    double r2 = 0.0;
    for (int i = 0; i < 2 * n; ++i) r2 += X[i] * X[i];
    return L * std::log1p(r2) + phi(L * r2 / (1.0 + r2));
  };
}

FrameComponents radial_frame(const OracleTensor& t, const PointChart& pt) {
  const int n = t.n;
  auto inner = [&](const Eigen::VectorXcd& v, const Eigen::VectorXcd& w) {  // g(v, wbar)
    return (v.transpose() * t.g * w.conjugate())(0, 0);
  };
  std::vector<Eigen::VectorXcd> frame;
  Eigen::VectorXcd vr(n);
  for (int i = 0; i < n; ++i) vr(i) = pt.z[i];
  frame.push_back(vr / std::sqrt(inner(vr, vr).real()));
  for (int e = 0; e < n && static_cast<int>(frame.size()) < std::min(n, 3); ++e) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    v(e) = 1.0;
    for (const auto& f : frame) v -= std::conj(inner(f, v)) * f;  // remove component along f
    const double nv = std::sqrt(std::abs(inner(v, v).real()));
    if (nv < 1e-6) continue;
    frame.push_back(v / nv);
  }
  auto R4 = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, const Eigen::VectorXcd& c,
                const Eigen::VectorXcd& e) {
    cd s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            s += t.riem_at(i, j, k, l) * a(i) * std::conj(b(j)) * c(k) * std::conj(e(l));
    return s.real();
  };
  auto Ric2 = [&](const Eigen::VectorXcd& a) { return (a.transpose() * t.ric * a.conjugate())(0, 0).real(); };
  FrameComponents fc{};
  fc.R = t.R;
  const auto& r = frame[0];
  fc.B_rr = R4(r, r, r, r);
  fc.ric_r = Ric2(r);
  if (n >= 2) {
    const auto& e = frame[1];
    fc.B_rt = R4(r, r, e, e);
    fc.B_tt = R4(e, e, e, e);
    fc.ric_t = Ric2(e);
  }
  if (n >= 3) fc.B_tu = R4(frame[1], frame[1], frame[2], frame[2]);
  return fc;
}

PointChart point_at_moment(double x, double L, std::span<const cd> direction) {
  double nd = 0.0;
  for (const auto& c : direction) nd += std::norm(c);
  nd = std::sqrt(nd);
  const double r = std::sqrt(x / (L - x));
  std::vector<cd> z;
  for (const auto& c : direction) z.push_back(c * (r / nd));
  return PointChart::make(std::move(z));
}

}  // namespace krf
