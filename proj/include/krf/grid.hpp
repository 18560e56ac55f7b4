#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace krf {

// Finite-difference weights of order `m` at point z for the given stencil
// nodes (Fornberg's recursion).
std::vector<double> fd_weights(double z, std::span<const double> nodes, int m);

// Banded derivative operator: row i uses the nine nodes lo_[i]..lo_[i]+8.
class BandedOp {
 public:
  static constexpr int kWidth = 9;

  BandedOp() = default;
  BandedOp(std::span<const double> x, int order);

  void apply(std::span<const double> f, std::span<double> out) const;
  std::vector<double> operator()(std::span<const double> f) const;

  int lo(int i) const { return lo_[i]; }
  const std::array<double, kWidth>& row(int i) const { return w_[i]; }
  int size() const { return static_cast<int>(lo_.size()); }

 private:
  std::vector<int> lo_;
  std::vector<std::array<double, kWidth>> w_;
};

// Uniform grid on the moment interval [0, L] with derivative operators and
// an endpoint-corrected trapezoid rule.
class Grid {
 public:
  Grid(int N, double L);

  // Shared instance for (N, L); grids are immutable so callers may keep them.
  static std::shared_ptr<const Grid> get(int N, double L);

  int N() const { return N_; }
  int size() const { return N_ + 1; }
  double L() const { return L_; }
  double dx() const { return L_ / N_; }
  const std::vector<double>& x() const { return x_; }
  const BandedOp& d1() const { return d1_; }
  const BandedOp& d2() const { return d2_; }

  // Weights of the composite rule on [0, L]; integrates polynomials of
  // degree <= 15 exactly.
  const std::vector<double>& weights() const { return w_; }
  double quad(std::span<const double> f) const;

  // Local 9-point Lagrange interpolation at an arbitrary x in [0, L].
  double interpolate(std::span<const double> f, double xq) const;

 private:
  int N_;
  double L_;
  std::vector<double> x_;
  BandedOp d1_, d2_;
  std::vector<double> w_;
};

}  // namespace krf
