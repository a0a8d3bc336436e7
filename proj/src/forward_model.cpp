#include "oversmooth/forward_model.hpp"

#include <cmath>
#include <string>

#include "oversmooth/errors.hpp"

namespace oversmooth {

GridFunction ForwardOperator::derivative_apply(const GridFunction& x, const GridFunction& h) const {
  auto out = apply_J(h);
  const auto m = derivative_multiplier(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= m[i];
  return out;
}

GridFunction ForwardOperator::derivative_adjoint(const GridFunction& x, const GridFunction& g) const {
  auto scaled = derivative_multiplier(x);
  require_same_grid(scaled.grid(), g.grid());
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= g[i];
  return apply_J_adjoint(scaled);
}

GridFunction ExpGrowthOperator::apply(const GridFunction& x) const {
  auto out = apply_J(x);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(std::abs(out[i]) <= max_exponent)) {
      throw OverflowError("forward: exponent " + std::to_string(out[i]) + " at node " +
                          std::to_string(i));
    }
    out[i] = std::exp(out[i]);
  }
  return out;
}

GridFunction ExpGrowthOperator::derivative_multiplier(const GridFunction& x) const {
  return apply(x);
}

std::unique_ptr<ForwardOperator> make_operator(std::string_view name) {
  if (name == "exp_growth") return std::make_unique<ExpGrowthOperator>();
  if (name == "linear_surrogate") return std::make_unique<IntegrationOperator>();
  throw Error("unknown problem '" + std::string(name) + "'");
}

GridFunction forward(const GridFunction& x) { return ExpGrowthOperator{}.apply(x); }

GridFunction derivative_apply(const GridFunction& x, const GridFunction& h) {
  return ExpGrowthOperator{}.derivative_apply(x, h);
}

GridFunction derivative_adjoint(const GridFunction& x, const GridFunction& g) {
  return ExpGrowthOperator{}.derivative_adjoint(x, g);
}

NonlinearityProfile NonlinearityProfile::for_solution(const GridFunction& x_dag, double r) {
  if (!(r > 0.0 && r < 1.0)) throw Error("nonlinearity profile needs 0 < r < 1");
  const double norm = l2_norm(x_dag);
  NonlinearityProfile p;
  p.r = r;
  p.k0 = std::exp(-norm);
  p.K0 = std::exp(norm);
  p.c_a = p.k0 / (1.0 + r);
  p.C_a = p.K0 / (1.0 - r);
  return p;
}

TccReport tcc_report(const GridFunction& x, const GridFunction& x_dag,
                     const NonlinearityProfile& profile) {
  const ExpGrowthOperator op;
  const auto diff = x - x_dag;
  const auto f_dag = op.apply(x_dag);
  const auto gap = op.apply(x) - f_dag;
  const auto remainder = gap - op.derivative_apply(x_dag, diff);

  TccReport r;
  r.image_gap = l2_norm(gap);
  r.lhs = l2_norm(remainder);
  r.mid = l2_norm(diff) * r.image_gap;
  const double weak = l2_norm(apply_J(diff));
  r.rhs_lower = profile.c_a * weak;
  r.rhs_upper = profile.C_a * weak;
  return r;
}

GridFunction explosion_sequence(const Grid& grid, std::size_t n, double delta) {
  const double nn = static_cast<double>(n);
  return GridFunction::sample(grid, [nn, delta](double t) {
    const double et = std::exp(t);
    return (et + nn * delta * std::cos(nn * t)) / (et + delta * std::sin(nn * t));
  });
}

}  // namespace oversmooth
