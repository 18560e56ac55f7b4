#include "krf/grid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "krf/errors.hpp"

namespace krf {

std::vector<double> fd_weights(double z, std::span<const double> x, int m) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k > 0; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k > 0; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = c[i][m];
  return out;
}

namespace {
int window_start(int i, int npts) {
  return std::max(0, std::min(i - BandedOp::kWidth / 2, npts - BandedOp::kWidth));
}
}  // namespace

BandedOp::BandedOp(std::span<const double> x, int order) {
  const int npts = static_cast<int>(x.size());
  lo_.resize(npts);
  w_.resize(npts);
  for (int i = 0; i < npts; ++i) {
    lo_[i] = window_start(i, npts);
    auto wt = fd_weights(x[i], x.subspan(lo_[i], kWidth), order);
    std::copy(wt.begin(), wt.end(), w_[i].begin());
  }
}

void BandedOp::apply(std::span<const double> f, std::span<double> out) const {
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    const double* fp = f.data() + lo_[i];
    const auto& w = w_[i];
    double s = 0.0;
    for (int k = 0; k < kWidth; ++k) s += w[k] * fp[k];
    out[i] = s;
  }
}

std::vector<double> BandedOp::operator()(std::span<const double> f) const {
  std::vector<double> out(f.size());
  apply(f, out);
  return out;
}

Grid::Grid(int N, double L) : N_(N), L_(L), x_(N + 1) {
  if (N < 16) raise(ErrorCode::GridTooSmall, "N = " + std::to_string(N) + " < 16");
  for (int i = 0; i <= N; ++i) x_[i] = L * i / N;
  x_[N] = L;
  d1_ = BandedOp(x_, 1);
  d2_ = BandedOp(x_, 2);

  // Trapezoid plus symmetric corrections on the first/last m weights, chosen
  // so that even powers of (x - L/2) are integrated exactly; odd powers are
  // exact by symmetry.
  constexpr int m = 8;
  const double h = L / N, c = 0.5 * L;
  w_.assign(N + 1, h);
  w_[0] = w_[N] = 0.5 * h;
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b(m);
  for (int q = 0; q < m; ++q) {
    const double exact = 2.0 * c / (2 * q + 1);  // int_{-1}^{1} t^{2q} dt scaled by c
    double s = 0.0;
    for (int i = 0; i <= N; ++i) s += w_[i] * std::pow((x_[i] - c) / c, 2 * q);
    b(q) = exact - s;
    for (int j = 0; j < m; ++j)
      A(q, j) = std::pow((x_[j] - c) / c, 2 * q) + std::pow((x_[N - j] - c) / c, 2 * q);
  }
  Eigen::VectorXd d = A.fullPivLu().solve(b);
  for (int j = 0; j < m; ++j) {
    w_[j] += d(j);
    w_[N - j] += d(j);
  }
}

std::shared_ptr<const Grid> Grid::get(int N, double L) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::shared_ptr<const Grid>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(N, L);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto g = std::make_shared<const Grid>(N, L);
  cache.emplace(key, g);
  return g;
}

double Grid::quad(std::span<const double> f) const {
  double s = 0.0;
  for (int i = 0; i <= N_; ++i) s += w_[i] * f[i];
  return s;
}

double Grid::interpolate(std::span<const double> f, double xq) const {
  const int npts = N_ + 1;
  const int i = std::clamp(static_cast<int>(std::lround(xq / dx())), 0, N_);
  const int lo = window_start(i, npts);
  auto w = fd_weights(xq, std::span<const double>(x_).subspan(lo, BandedOp::kWidth), 0);
  double s = 0.0;
  for (int k = 0; k < BandedOp::kWidth; ++k) s += w[k] * f[lo + k];
  return s;
}

}  // namespace krf
