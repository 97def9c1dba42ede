#include "cvlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvlab/error.hpp"

namespace cvlab {

double norm(Point a) { return std::hypot(a.x, a.y); }

GridSpec GridSpec::cell_centered(std::size_t rows, std::size_t cols, Extent extent, Point lower_left) {
  GridSpec g{rows, cols, extent, {}};
  g.origin = {lower_left.x + 0.5 * g.dx(), lower_left.y + 0.5 * g.dy()};
  return g;
}

namespace {
bool close(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
}
}  // namespace

bool same_grid(const GridSpec& a, const GridSpec& b, double rel_tol) {
  return a.rows == b.rows && a.cols == b.cols && close(a.extent.x, b.extent.x, rel_tol) &&
         close(a.extent.y, b.extent.y, rel_tol) && close(a.origin.x, b.origin.x, rel_tol) &&
         close(a.origin.y, b.origin.y, rel_tol);
}

SampledField::SampledField(GridSpec grid, std::vector<cplx> values, bool is_real)
    : grid_(grid), values_(std::move(values)), is_real_(is_real) {
  if (grid_.rows == 0 || grid_.cols == 0) throw DimensionError("field must have positive rows and cols");
  if (grid_.rows * grid_.cols != values_.size())
    throw DimensionError("rows*cols (" + std::to_string(grid_.rows * grid_.cols) + ") != value count (" +
                         std::to_string(values_.size()) + ")");
  if (!(grid_.extent.x > 0.0) || !(grid_.extent.y > 0.0)) throw DomainError("field extent must be positive");
  if (is_real_) {
    for (const auto& z : values_)
      if (std::abs(z.imag()) >= kRealTolerance) throw DomainError("field flagged real has imaginary content");
  }
}

SampledField SampledField::zeros(const GridSpec& grid, bool is_real) {
  return SampledField(grid, std::vector<cplx>(grid.size()), is_real);
}

SampledField SampledField::from_real(const GridSpec& grid, std::span<const double> values) {
  std::vector<cplx> v(values.begin(), values.end());
  return SampledField(grid, std::move(v), true);
}

std::vector<double> SampledField::real_part() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i].real();
  return out;
}

double SampledField::norm_sq() const {
  double s = 0.0;
  for (const auto& z : values_) s += std::norm(z);
  return s * grid_.cell_area();
}

SampledField SampledField::as_real(bool force) const {
  std::vector<cplx> v(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!force && std::abs(values_[i].imag()) >= kRealTolerance)
      throw DomainError("as_real: imaginary part exceeds tolerance");
    v[i] = values_[i].real();
  }
  return SampledField(grid_, std::move(v), true);
}

namespace {
void require_same(const SampledField& a, const SampledField& b) {
  if (!same_grid(a.grid(), b.grid())) throw GridMismatchError("fields live on different grids");
}
}  // namespace

SampledField operator+(const SampledField& a, const SampledField& b) {
  require_same(a, b);
  std::vector<cplx> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] + b.values()[i];
  return SampledField(a.grid(), std::move(v), a.is_real() && b.is_real());
}

SampledField operator-(const SampledField& a, const SampledField& b) {
  require_same(a, b);
  std::vector<cplx> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] - b.values()[i];
  return SampledField(a.grid(), std::move(v), a.is_real() && b.is_real());
}

SampledField operator*(cplx s, const SampledField& a) {
  std::vector<cplx> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * a.values()[i];
  return SampledField(a.grid(), std::move(v), a.is_real() && s.imag() == 0.0);
}

SampledField hadamard(const SampledField& a, const SampledField& b) {
  require_same(a, b);
  std::vector<cplx> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] * b.values()[i];
  return SampledField(a.grid(), std::move(v), a.is_real() && b.is_real());
}

}  // namespace cvlab
