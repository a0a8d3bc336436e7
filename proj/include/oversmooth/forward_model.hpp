#pragma once

// Exponential growth model y' = x y, y(0) = 1, i.e. F(x)(t) = exp(int_0^t x),
// and the linear surrogate F = J. Both have derivatives of the form
// F'(x) = diag(m(x)) J, which is all the solver relies on.

#include <cstddef>
#include <memory>
#include <string_view>

#include "oversmooth/hilbert_scale.hpp"

namespace oversmooth {

class ForwardOperator {
 public:
  virtual ~ForwardOperator() = default;

  virtual std::string_view name() const noexcept = 0;
  virtual GridFunction apply(const GridFunction& x) const = 0;

  /// m(x) with F'(x) h = m(x) * J h pointwise.
  virtual GridFunction derivative_multiplier(const GridFunction& x) const = 0;

  GridFunction derivative_apply(const GridFunction& x, const GridFunction& h) const;
  /// Adjoint in the trapezoid inner product: J*(m(x) g).
  GridFunction derivative_adjoint(const GridFunction& x, const GridFunction& g) const;
};

class ExpGrowthOperator final : public ForwardOperator {
 public:
  /// Largest admissible exponent before exp() is reported as overflow.
  static constexpr double max_exponent = 700.0;

  std::string_view name() const noexcept override { return "exp_growth"; }
  GridFunction apply(const GridFunction& x) const override;
  GridFunction derivative_multiplier(const GridFunction& x) const override;
};

class IntegrationOperator final : public ForwardOperator {
 public:
  std::string_view name() const noexcept override { return "linear_surrogate"; }
  GridFunction apply(const GridFunction& x) const override { return apply_J(x); }
  GridFunction derivative_multiplier(const GridFunction& x) const override {
    return GridFunction(x.grid(), 1.0);
  }
};

std::unique_ptr<ForwardOperator> make_operator(std::string_view name);

// Convenience entry points for the exponential growth model.
GridFunction forward(const GridFunction& x);
GridFunction derivative_apply(const GridFunction& x, const GridFunction& h);
GridFunction derivative_adjoint(const GridFunction& x, const GridFunction& g);

/// Constants of the two-sided estimate
///   c_a ||x - x_dag||_{-1} <= ||F(x) - F(x_dag)|| <= C_a ||x - x_dag||_{-1}
/// on the ball of radius r around x_dag.
struct NonlinearityProfile {
  double a = 1.0;
  double r = 0.5;
  double k0 = 1.0;
  double K0 = 1.0;
  double c_a = 1.0;
  double C_a = 1.0;

  static NonlinearityProfile for_solution(const GridFunction& x_dag, double r = 0.5);
};

struct TccReport {
  double lhs = 0.0;        // ||F(x) - F(x_dag) - F'(x_dag)(x - x_dag)||
  double mid = 0.0;        // ||x - x_dag|| ||F(x) - F(x_dag)||
  double image_gap = 0.0;  // ||F(x) - F(x_dag)||
  double rhs_lower = 0.0;  // c_a ||x - x_dag||_{-1}
  double rhs_upper = 0.0;  // C_a ||x - x_dag||_{-1}
};

TccReport tcc_report(const GridFunction& x, const GridFunction& x_dag,
                     const NonlinearityProfile& profile);

/// x_n(t) = (e^t + n delta cos(nt)) / (e^t + delta sin(nt)), the preimage of
/// e^t + delta sin(nt) under F.
GridFunction explosion_sequence(const Grid& grid, std::size_t n, double delta);

}  // namespace oversmooth
