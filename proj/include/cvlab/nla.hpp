#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cvlab/cartoon.hpp"
#include "cvlab/frame.hpp"
#include "cvlab/numerics.hpp"

namespace cvlab {

// Coefficients in a fixed global order: the coarse band first, then the bands
// in table order, each row-major.
std::vector<double> flatten(const CoefficientTable& table);
void unflatten(CoefficientTable& table, const std::vector<double>& values);

// Indices sorted by decreasing magnitude; equal magnitudes keep index order.
std::vector<std::size_t> magnitude_order(const std::vector<double>& values);

// Keeps the M largest-magnitude entries (coarse band included), zeroes the rest.
// M = 0 gives the zero table; M above the coefficient count throws DomainError.
CoefficientTable mterm_approximate(const CoefficientTable& table, std::size_t M);

struct NlaWindow {
  std::size_t lo = 64;
  std::size_t hi = 4096;
};

struct NlaOptions {
  std::vector<std::size_t> Ms;  // ascending; empty means default_term_counts()
  NlaWindow window{};
  unsigned threads = 1;
};

// Half-octave term counts from 2^4 to 2^14.
std::vector<std::size_t> default_term_counts();

struct NlaCurve {
  std::string model;
  std::size_t grid = 0;
  FrameSpec spec{};
  double norm_sq = 0.0;  // ||f||^2
  std::size_t total_count = 0;
  std::vector<std::size_t> Ms;
  std::vector<double> errors;     // ||f - f_M||^2
  std::vector<double> discarded;  // sum of squared dropped coefficients
  NlaWindow window{};
  LogLogFit fit{};
  bool fit_valid = false;

  // error(M2) <= error(M1) + tol for all M2 >= M1.
  bool monotone(double tol = 1e-12) const;
  std::string csv() const;  // "M,error_sq"
  std::string to_json() const;
};

NlaCurve nla_curve(const SampledField& f, const FrameSpec& spec, const NlaOptions& options,
                   const std::string& name = "field");
NlaCurve nla_curve(const CartoonFunction& model, std::size_t grid_n, const NlaOptions& options);

struct CurveComparison {
  std::string csv;   // M column then one error column per curve
  std::string json;  // slopes, windows, grid sizes
};

CurveComparison compare_curves(const std::vector<NlaCurve>& curves);

}  // namespace cvlab
