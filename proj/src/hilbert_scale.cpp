#include "oversmooth/hilbert_scale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "oversmooth/errors.hpp"

namespace oversmooth {

Grid::Grid(std::size_t intervals) : n_(intervals), h_(0.0) {
  if (intervals == 0) throw Error("grid needs at least one interval");
  h_ = 1.0 / static_cast<double>(n_);
  weights_.assign(n_ + 1, h_);
  weights_.front() = 0.5 * h_;
  weights_.back() = 0.5 * h_;
}

GridFunction::GridFunction(const Grid& grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

GridFunction::GridFunction(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw GridMismatch("grid function has " + std::to_string(values_.size()) +
                       " values, grid has " + std::to_string(grid_.size()) + " nodes");
  }
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(double)>& f) {
  GridFunction out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.node(i));
  return out;
}

bool GridFunction::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) {
    throw GridMismatch("grid mismatch: " + std::to_string(a.intervals()) + " vs " +
                       std::to_string(b.intervals()) + " intervals");
  }
}

double inner(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a.grid(), b.grid());
  const auto& w = a.grid().weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += w[i] * a[i] * b[i];
  return sum;
}

double l2_norm(const GridFunction& x) { return std::sqrt(inner(x, x)); }

double sup_norm(const GridFunction& x) {
  double m = 0.0;
  for (double v : x.values()) m = std::max(m, std::abs(v));
  return m;
}

GridFunction apply_J(const GridFunction& h) {
  const double half_step = 0.5 * h.grid().spacing();
  GridFunction out(h.grid());
  for (std::size_t i = 1; i < h.size(); ++i) out[i] = out[i - 1] + half_step * (h[i - 1] + h[i]);
  return out;
}

std::vector<double> apply_J_transpose(const Grid& grid, std::span<const double> g) {
  if (g.size() != grid.size()) throw GridMismatch("apply_J_transpose: length mismatch");
  const double half_step = 0.5 * grid.spacing();
  const std::size_t n = grid.intervals();
  std::vector<double> out(grid.size(), 0.0);
  // Row i of J holds h/2 at columns 0 and i, h on 1..i-1.
  double suffix_next = 0.0;  // sum_{i > p} g_i
  for (std::size_t p = n + 1; p-- > 0;) {
    const double suffix = suffix_next + g[p];
    out[p] = half_step * suffix_next + (p >= 1 ? half_step * suffix : 0.0);
    suffix_next = suffix;
  }
  return out;
}

GridFunction apply_J_adjoint(const GridFunction& g) {
  const auto& w = g.grid().weights();
  std::vector<double> weighted(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) weighted[i] = w[i] * g[i];
  auto out = apply_J_transpose(g.grid(), weighted);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= w[i];
  return GridFunction(g.grid(), std::move(out));
}

double h1_penalty_norm(const GridFunction& x) {
  const double h = x.grid().spacing();
  double derivative_sq = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double d = (x[i + 1] - x[i]) / h;
    derivative_sq += h * d * d;
  }
  return std::sqrt(inner(x, x) + derivative_sq);
}

SourceCondition SourceCondition::holder(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error("holder source condition needs 0 < p <= 1");
  SourceCondition s;
  s.kind = Kind::holder;
  s.p = p;
  return s;
}

SourceCondition SourceCondition::logarithmic(double mu, double multiplier) {
  if (!(mu > 0.0)) throw Error("logarithmic source condition needs mu > 0");
  if (!(multiplier > 0.0)) throw Error("logarithmic source condition needs K > 0");
  SourceCondition s;
  s.kind = Kind::logarithmic;
  s.mu = mu;
  s.multiplier = multiplier;
  return s;
}

double SourceCondition::psi(double t, double a) const {
  switch (kind) {
    case Kind::holder:
      return std::pow(t, p / (2.0 * a + 2.0));
    case Kind::logarithmic: {
      const double t0 = std::exp(-1.0);
      return multiplier * std::pow(std::log(1.0 / std::min(t, t0)), -mu);
    }
    case Kind::none:
      break;
  }
  throw Error("source condition of kind none has no index function");
}

HilbertScale::HilbertScale(const Grid& grid, double a, std::size_t modes) : grid_(grid), a_(a) {
  if (!(a > 0.0)) throw Error("degree of ill-posedness must be positive");
  if (modes == 0) modes = std::max<std::size_t>(1, grid.intervals() / 10);
  if (modes > grid.intervals()) throw Error("more spectral modes than grid intervals");
  sigma_.resize(modes);
  basis_.reserve(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    const double freq = (static_cast<double>(k) + 0.5) * std::numbers::pi;
    sigma_[k] = 1.0 / freq;
    basis_.push_back(GridFunction::sample(
        grid, [freq](double t) { return std::numbers::sqrt2 * std::cos(freq * t); }));
  }
}

double HilbertScale::g_eigenvalue(std::size_t k) const noexcept {
  return std::pow(sigma_[k], 2.0 * a_ + 2.0);
}

std::vector<double> HilbertScale::coefficients(const GridFunction& x) const {
  require_same_grid(grid_, x.grid());
  std::vector<double> c(modes());
  for (std::size_t k = 0; k < modes(); ++k) c[k] = inner(x, basis_[k]);
  return c;
}

GridFunction HilbertScale::synthesize(std::span<const double> coefficients) const {
  if (coefficients.size() > modes()) throw Error("more coefficients than retained modes");
  GridFunction out(grid_);
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    const auto& u = basis_[k];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += coefficients[k] * u[i];
  }
  return out;
}

double HilbertScale::norm_tau(const GridFunction& x, double tau) const {
  const auto c = coefficients(x);
  double captured = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    captured += c[k] * c[k];
    sum += std::pow(b_eigenvalue(k), 2.0 * tau) * c[k] * c[k];
  }
  if (tau > 0.0) {
    const double total = inner(x, x);
    if (total - captured > 0.01 * total) {
      throw SpectralTailError("norm of order " + std::to_string(tau) +
                              ": retained modes miss more than 1% of the energy");
    }
  }
  return std::sqrt(sum);
}

GridFunction HilbertScale::auxiliary_element(const GridFunction& x_dag, const GridFunction& x_bar,
                                             double alpha) const {
  if (!(alpha > 0.0)) throw Error("auxiliary_element needs alpha > 0");
  const auto d = coefficients(x_dag - x_bar);
  std::vector<double> correction(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    correction[k] = alpha / (g_eigenvalue(k) + alpha) * d[k];
  }
  return x_dag - synthesize(correction);
}

double HilbertScale::estimate_smoothness(const GridFunction& x) const {
  const auto c = coefficients(x);
  double largest = 0.0;
  for (double v : c) largest = std::max(largest, std::abs(v));
  if (largest == 0.0) throw DegenerateFit("estimate_smoothness: zero function");

  const double floor = 1e-10 * largest;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(c[k]) > floor) {
      lx.push_back(std::log(b_eigenvalue(k)));
      ly.push_back(std::log(std::abs(c[k])));
    }
  }
  if (lx.size() < 8) {
    throw DegenerateFit("estimate_smoothness: only " + std::to_string(lx.size()) +
                        " coefficients above the noise floor");
  }
  const double m = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  return -slope - 0.5;
}

}  // namespace oversmooth
