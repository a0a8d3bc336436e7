#pragma once

// Discretization of L2(0,1) on a uniform grid, the integration operator J
// and the Hilbert scale generated by B = (J*J)^{-1/2}.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace oversmooth {

/// Uniform grid 0 = t_0 < ... < t_n = 1.
class Grid {
 public:
  explicit Grid(std::size_t intervals);

  std::size_t intervals() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ + 1; }
  double spacing() const noexcept { return h_; }
  double node(std::size_t i) const noexcept {
    return static_cast<double>(i) / static_cast<double>(n_);
  }

  /// Trapezoid weights h/2, h, ..., h, h/2.
  const std::vector<double>& weights() const noexcept { return weights_; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.n_ == b.n_; }

 private:
  std::size_t n_;
  double h_;
  std::vector<double> weights_;
};

/// Nodal values of a function on a Grid.
class GridFunction {
 public:
  explicit GridFunction(const Grid& grid, double value = 0.0);
  GridFunction(const Grid& grid, std::vector<double> values);

  static GridFunction sample(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double back() const noexcept { return values_.back(); }

  bool all_finite() const noexcept;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s) noexcept;

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
  friend bool operator==(const GridFunction&, const GridFunction&) = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

void require_same_grid(const Grid& a, const Grid& b);

/// Trapezoid inner product and norm on L2(0,1).
double inner(const GridFunction& a, const GridFunction& b);
double l2_norm(const GridFunction& x);
double sup_norm(const GridFunction& x);

/// Cumulative trapezoid integral t -> int_0^t h.
GridFunction apply_J(const GridFunction& h);

/// Euclidean transpose of the matrix representing apply_J.
std::vector<double> apply_J_transpose(const Grid& grid, std::span<const double> g);

/// Adjoint of apply_J in the trapezoid inner product: W^{-1} J^T W g.
GridFunction apply_J_adjoint(const GridFunction& g);

/// Discrete H1 norm (||x||^2 + ||x'||^2)^{1/2}, forward-difference derivative.
double h1_penalty_norm(const GridFunction& x);

/// Smoothness assumption on x_dag - x_bar in terms of G = B^{-(2a+2)}.
struct SourceCondition {
  enum class Kind { holder, logarithmic, none };

  Kind kind = Kind::none;
  double p = 0.0;
  double mu = 0.0;
  double multiplier = 1.0;

  static SourceCondition holder(double p);
  static SourceCondition logarithmic(double mu, double multiplier = 1.0);
  static SourceCondition none() { return {}; }

  /// psi(t): t^{p/(2a+2)} or K log^{-mu}(1/t) (constant for t > 1/e).
  double psi(double t, double a) const;
};

/// Singular system of J taken analytically: sigma_k = 1/((k-1/2)pi),
/// u_k(t) = sqrt(2) cos((k-1/2)pi t), so that J*J u_k = sigma_k^2 u_k and
/// B u_k = b_k u_k with b_k = 1/sigma_k.
class HilbertScale {
 public:
  /// `modes` = 0 selects n/10.
  explicit HilbertScale(const Grid& grid, double a = 1.0, std::size_t modes = 0);

  const Grid& grid() const noexcept { return grid_; }
  double degree() const noexcept { return a_; }
  std::size_t modes() const noexcept { return sigma_.size(); }

  const std::vector<double>& singular_values() const noexcept { return sigma_; }
  double b_eigenvalue(std::size_t k) const noexcept { return 1.0 / sigma_[k]; }
  /// Eigenvalue of G = B^{-(2a+2)} for mode k (0-based).
  double g_eigenvalue(std::size_t k) const noexcept;

  /// Sampled u_k (0-based k).
  const GridFunction& eigenfunction(std::size_t k) const noexcept { return basis_[k]; }

  /// <x, u_k> for k < modes().
  std::vector<double> coefficients(const GridFunction& x) const;
  GridFunction synthesize(std::span<const double> coefficients) const;

  /// ||B^tau x||; throws SpectralTailError for tau > 0 when the retained
  /// modes miss more than 1% of ||x||^2.
  double norm_tau(const GridFunction& x, double tau) const;

  /// x_dag - alpha (G + alpha I)^{-1} (x_dag - x_bar), mode by mode. The part
  /// of x_dag - x_bar outside the retained modes is left uncorrected.
  GridFunction auxiliary_element(const GridFunction& x_dag, const GridFunction& x_bar,
                                 double alpha) const;

  /// Fitted p such that |<x,u_k>| ~ b_k^{-p-1/2}.
  double estimate_smoothness(const GridFunction& x) const;

 private:
  Grid grid_;
  double a_;
  std::vector<double> sigma_;
  std::vector<GridFunction> basis_;
};

}  // namespace oversmooth
