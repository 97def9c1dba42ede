#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cvlab/field.hpp"

namespace cvlab {

struct FftOptions {
  // Require power-of-two sizes.
  bool strict = true;
};

// Unitary 2D DFT (1/sqrt(rows*cols) in both directions). The result keeps the
// input's grid metadata; entry (r, c) holds frequency index (r, c) in FFT order.
SampledField fft2(const SampledField& field, FftOptions options = {});
SampledField ifft2(const SampledField& spectrum, FftOptions options = {});

// In-place unitary transforms on a raw row-major buffer of any size.
void fft2_inplace(std::span<cplx> data, std::size_t rows, std::size_t cols, bool inverse);

// Signed frequency index for FFT-ordered position i of an n-point transform,
// in [-n/2, n/2).
inline long signed_frequency(std::size_t i, std::size_t n) {
  const long li = static_cast<long>(i);
  const long ln = static_cast<long>(n);
  return li < (ln + 1) / 2 ? li : li - ln;
}

bool is_power_of_two(std::size_t n);

enum class QuadratureRule {
  // Sum times cell area; spectrally accurate for smooth periodic integrands and
  // the midpoint rule on cell-centred grids.
  Periodic,
  // Trapezoid over [origin, origin + (n-1) h] with half weights on the border.
  Trapezoid,
};

cplx integrate(const SampledField& field, QuadratureRule rule = QuadratureRule::Periodic);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

// Least-squares line through (log x, log y).
LogLogFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

// Shortest round-trip decimal text of a double ("inf" and "nan" spelled out).
std::string format_double(double v);

}  // namespace cvlab
