#include "cvlab/numerics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <mutex>
#include <string>

#include "cvlab/error.hpp"

namespace cvlab {

namespace {

// fftw_plan_* is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft2_inplace(std::span<cplx> data, std::size_t rows, std::size_t cols, bool inverse) {
  const std::size_t n = rows * cols;
  if (data.size() != n) throw DimensionError("fft2_inplace: buffer size mismatch");
  // Always go through an fftw-allocated buffer so SIMD alignment, and therefore
  // the floating-point result, does not depend on the caller's allocation.
  FftwBuffer buf(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf.data, buf.data,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  std::memcpy(buf.data, data.data(), n * sizeof(fftw_complex));
  fftw_execute(plan);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) data[i] = cplx(buf.data[i][0] * scale, buf.data[i][1] * scale);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
}

namespace {
SampledField transform(const SampledField& field, FftOptions options, bool inverse) {
  if (options.strict && !(is_power_of_two(field.rows()) && is_power_of_two(field.cols())))
    throw DimensionError("fft2: sizes must be powers of two in strict mode (got " + std::to_string(field.rows()) +
                         "x" + std::to_string(field.cols()) + ")");
  std::vector<cplx> v(field.values().begin(), field.values().end());
  fft2_inplace(v, field.rows(), field.cols(), inverse);
  return SampledField(field.grid(), std::move(v), false);
}
}  // namespace

SampledField fft2(const SampledField& field, FftOptions options) { return transform(field, options, false); }
SampledField ifft2(const SampledField& spectrum, FftOptions options) { return transform(spectrum, options, true); }

cplx integrate(const SampledField& field, QuadratureRule rule) {
  const auto& g = field.grid();
  cplx total = 0.0;
  if (rule == QuadratureRule::Periodic) {
    for (const auto& z : field.values()) total += z;
    return total * g.cell_area();
  }
  for (std::size_t r = 0; r < g.rows; ++r) {
    const double wr = (r == 0 || r + 1 == g.rows) ? 0.5 : 1.0;
    cplx row = 0.0;
    for (std::size_t c = 0; c < g.cols; ++c) {
      const double wc = (c == 0 || c + 1 == g.cols) ? 0.5 : 1.0;
      row += wc * field(r, c);
    }
    total += wr * row;
  }
  return total * g.cell_area();
}

LogLogFit fit_loglog(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("fit_loglog: xs and ys differ in length");
  if (xs.size() < 2) throw DomainError("fit_loglog: need at least two points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("fit_loglog: inputs must be strictly positive");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 1e-300) throw DomainError("fit_loglog: degenerate abscissae (all xs equal)");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.n_points = n;
  // Constant ordinates are fitted exactly.
  fit.r_squared = syy <= 1e-300 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace cvlab
