#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cvlab {

using cplx = std::complex<double>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a);

// Physical side lengths of a sampled rectangle.
struct Extent {
  double x = 1.0;
  double y = 1.0;
};

// Sampling geometry shared by fields and frames. Sample (row, col) sits at
// origin + (col * dx, row * dy); rows run along y, columns along x.
struct GridSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Extent extent{};
  Point origin{};

  double dx() const { return extent.x / static_cast<double>(cols); }
  double dy() const { return extent.y / static_cast<double>(rows); }
  double cell_area() const { return dx() * dy(); }
  std::size_t size() const { return rows * cols; }
  Point sample(std::size_t row, std::size_t col) const {
    return {origin.x + static_cast<double>(col) * dx(), origin.y + static_cast<double>(row) * dy()};
  }

  // Cell-centred grid covering [lower_left, lower_left + extent].
  static GridSpec cell_centered(std::size_t rows, std::size_t cols, Extent extent, Point lower_left = {});
  // Square cell-centred grid on [0, 1]^2.
  static GridSpec unit(std::size_t n) { return cell_centered(n, n, {1.0, 1.0}); }
};

bool same_grid(const GridSpec& a, const GridSpec& b, double rel_tol = 1e-12);

// A real or complex function sampled on a uniform rectangular grid, row-major.
class SampledField {
 public:
  SampledField() = default;
  SampledField(GridSpec grid, std::vector<cplx> values, bool is_real);

  static SampledField zeros(const GridSpec& grid, bool is_real = true);
  static SampledField from_real(const GridSpec& grid, std::span<const double> values);
  template <class F>
  static SampledField sample(const GridSpec& grid, F&& f) {
    std::vector<cplx> v(grid.size());
    for (std::size_t r = 0; r < grid.rows; ++r)
      for (std::size_t c = 0; c < grid.cols; ++c) v[r * grid.cols + c] = f(grid.sample(r, c));
    bool real = true;
    for (const auto& z : v)
      if (std::abs(z.imag()) >= kRealTolerance) real = false;
    return SampledField(grid, std::move(v), real);
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t rows() const { return grid_.rows; }
  std::size_t cols() const { return grid_.cols; }
  std::size_t size() const { return values_.size(); }
  bool is_real() const { return is_real_; }

  cplx& operator()(std::size_t row, std::size_t col) { return values_[row * grid_.cols + col]; }
  const cplx& operator()(std::size_t row, std::size_t col) const { return values_[row * grid_.cols + col]; }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  std::vector<double> real_part() const;
  // Continuous L2 norm squared: sum |v|^2 * cell area.
  double norm_sq() const;

  // Drops imaginary parts (checked against kRealTolerance unless force).
  SampledField as_real(bool force = false) const;

  static constexpr double kRealTolerance = 1e-12;

 private:
  GridSpec grid_{};
  std::vector<cplx> values_;
  bool is_real_ = true;
};

SampledField operator+(const SampledField& a, const SampledField& b);
SampledField operator-(const SampledField& a, const SampledField& b);
SampledField operator*(cplx s, const SampledField& a);
// Pointwise product.
SampledField hadamard(const SampledField& a, const SampledField& b);

}  // namespace cvlab
