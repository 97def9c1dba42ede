#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cvlab/cartoon.hpp"
#include "cvlab/field.hpp"
#include "cvlab/frame.hpp"

namespace cvlab {

using ScalarField = std::function<double(Point)>;

// Orthonormal frame: global = origin + x1 e1 + x2 e2.
struct LocalFrame {
  Point origin{};
  Point e1{1.0, 0.0};
  Point e2{0.0, 1.0};

  Point to_local(Point x) const { return {dot(x - origin, e1), dot(x - origin, e2)}; }
  Point to_global(Point y) const { return origin + y.x * e1 + y.y * e2; }
  static LocalFrame aligned(Point origin, Point direction);
};

// ---- region partition --------------------------------------------------------

struct PartitionOptions {
  double epsilon = 1.0;  // in (0, 2)
  double c_d = 1.0;
  double c_h = 1.0;
  double c_v = 1.0;       // half-strip half-width V = c_v sqrt(a)
  double k_aligned = 1.0; // |k| below this uses the aligned layout
  double resolution = 0.0; // grid spacing; h and d must exceed it when > 0
};

enum class Regime { Aligned, Oblique };

struct RegionSpec {
  int index = 0;  // -2..3
  std::string shape;
  std::string companion;  // description of the companion region
};

// Layout in the frame anchored at Q, the crossing of the edge tangent at p with
// the major axis (Q = p when they are parallel). u runs along the major axis,
// v along the minor axis; (x1, x2) are edge-tangent coordinates.
//   R0:    |x1| <= r1, |x2| < h
//   R1:    sector from the major-axis ray u > 0 to the edge ray, radius < r1, minus R0
//   R-1:   opposite sector (u < 0)
//   R2:    u > 0, |v| <= V, major-axis side of the edge line, minus R0, R1
//   R-2:   u < 0, mirror of R2
//   R3:    complement
// Aligned layout: only R0 (r1 = c_d sqrt a, h = c_h a) and R3.
// Companions: R~2 = {u > 0} \ R2 (full minor-axis lines), R~1 = the double
// sector of full radial lines through Q minus R1, R~0 = {|x2| < h} \ R0.
struct PartitionLayout {
  Regime regime = Regime::Aligned;
  CurveletParams params{};
  EdgeGeometry geometry{};
  PartitionOptions options{};
  Point q{};
  Point t{}, n{};      // major / minor axis
  Point tau{}, nu{};   // edge tangent / normal
  double theta_prime = 0.0;
  double k = 0.0;
  double d = 0.0;
  double h = 0.0;
  double r1 = 0.0;
  double v_half = 0.0;
  int l_max = 0;  // annuli per sector
  std::vector<RegionSpec> regions;

  Point to_uv(Point x) const { return {dot(x - q, t), dot(x - q, n)}; }
  Point to_edge(Point x) const { return {dot(x - q, tau), dot(x - q, nu)}; }
  LocalFrame edge_frame() const { return {q, tau, nu}; }

  bool in_region(int index, Point x) const;
  bool in_companion(int index, Point x) const;
  int classify(Point x) const;
  // Subregion label l of x (see subregion_measure), kNoSubregion outside R1 and R-1.
  int subregion_index(Point x) const;
  static constexpr int kNoSubregion = -1000000;

  std::string to_json() const;
};

PartitionLayout build_partition(const CurveletParams& params, const EdgeGeometry& geometry,
                                const PartitionOptions& options = {});

struct CoverageReport {
  std::size_t samples = 0;
  std::size_t uncovered = 0;
  std::size_t overlapping = 0;
  std::size_t companion_overlaps = 0;  // points in both R_i and R~_i
  std::array<std::size_t, 6> counts{};  // per region -2..3
};

// Low-discrepancy points in a box (additive recurrence, randomly shifted by seed).
std::vector<Point> quasi_random_points(std::size_t count, Point lower, Point upper, std::uint64_t seed);

CoverageReport check_partition(const PartitionLayout& layout, std::size_t samples, Point lower, Point upper,
                               std::uint64_t seed);

struct RegionIntegrals {
  std::array<double, 6> per_region{};  // index -2..3
  double sum_of_regions = 0.0;
  double total = 0.0;
};

// Quadrature of a sampled integrand split by region label.
RegionIntegrals partition_integrals(const PartitionLayout& layout, const SampledField& integrand);

// CSV "x,y,region_index".
std::string partition_samples_csv(const PartitionLayout& layout, const std::vector<Point>& points);

// ---- slice Taylor polynomials ------------------------------------------------

enum class SliceDirection { MinorAxis, RadialFromQ };

struct TaylorSlice {
  Point anchor{};
  Point direction{};
  std::array<double, 3> c{};  // value, first, second derivative at the anchor
  double operator()(double s) const { return c[0] + s * (c[1] + 0.5 * s * c[2]); }
};

// Order-2 Taylor polynomial of s -> f(anchor + s direction) at s = 0, by
// five-point differences with the given step (exact for quartics up to rounding).
TaylorSlice taylor_slice(const ScalarField& f, Point anchor, Point direction, double step);

class SliceTaylor {
 public:
  SliceTaylor(ScalarField f, const PartitionLayout& layout, SliceDirection direction, double step = 0.0);
  // Slice through x for the chosen direction: anchor on the major axis (minor
  // direction) or at Q (radial direction); s is the signed slice coordinate of x.
  std::pair<TaylorSlice, double> slice_at(Point x) const;
  double operator()(Point x) const;
  double residual(Point x) const { return f_(x) - (*this)(x); }

 private:
  ScalarField f_;
  PartitionLayout layout_;
  SliceDirection direction_;
  double step_;
};

// The smooth side of the model containing x, including the envelope; throws if
// the slice from its anchor to x crosses S (checked for points of R1, R-1, R2, R-2).
SliceTaylor model_slice_taylor(const CartoonFunction& model, const PartitionLayout& layout, SliceDirection direction,
                               bool plus_side, double step = 0.0);
void check_slice_side(const CartoonFunction& model, const PartitionLayout& layout, SliceDirection direction, Point x);

// ---- subregion measures --------------------------------------------------------

// R_{1,l}: points of R1 with l d <= |x - Q| < (l + 1) d for l >= 0, and points of R-1
// with (-l - 1) d <= |x - Q| < -l d for l < 0. Valid for -l_max <= l < l_max.
double subregion_measure(const PartitionLayout& layout, int l, std::size_t samples = 200000, std::uint64_t seed = 1);
double region_measure(const PartitionLayout& layout, int index, std::size_t samples = 200000, std::uint64_t seed = 1);
// Monte-Carlo area of {x in box : inside(x)} using quasi-random points.
double measure(const std::function<bool(Point)>& inside, Point lower, Point upper, std::size_t samples,
               std::uint64_t seed);
// Cap a^{3/2} |k|^{-eps/2}.
double subregion_cap(const PartitionLayout& layout);

// ---- twisting map --------------------------------------------------------------

// T(y) = (y1, y2 + (h - |y2|)/h g(y1)) on R0 = {|y1| <= half_length, |y2| < h}
// in local coordinates, identity elsewhere.
class TwistMap {
 public:
  TwistMap(std::function<double(double)> g, double strip_height, double half_length, LocalFrame frame = {});
  // Local edge function of a graph edge in the tangent frame at x_param
  // (g(0) = g'(0) = 0), found by Newton iteration on the projection.
  static TwistMap from_edge(const EdgeCurve& edge, double x_param, double strip_height, double half_length);

  double g(double y1) const { return g_(y1); }
  double strip_height() const { return h_; }
  double half_length() const { return half_length_; }
  const LocalFrame& frame() const { return frame_; }

  bool in_r0(Point y) const { return std::abs(y.x) <= half_length_ && std::abs(y.y) < h_; }
  Point apply(Point y) const;
  // Closed-form inverse of the piecewise-linear map in y2.
  Point inverse(Point x) const;
  // d x2 / d y2 = 1 - sgn(y2) g(y1) / h inside R0, 1 outside. On y2 = 0 the
  // upper one-sided value is returned and one_sided is set.
  double jacobian(Point y, bool* one_sided = nullptr) const;
  // sup |g| / h over |y1| <= half_length (sampled).
  double max_ratio(int samples = 2001) const;

 private:
  std::function<double(double)> g_;
  double h_;
  double half_length_;
  LocalFrame frame_;
};

Point twist_apply(const TwistMap& map, Point y);
Point twist_inverse(const TwistMap& map, Point x);
double twist_jacobian(const TwistMap& map, Point y, bool* one_sided = nullptr);

struct ChangeOfVariablesOptions {
  std::size_t columns = 2048;  // midpoint columns along y1
  int panels = 4;              // Gauss-Legendre panels per smooth piece along y2
  unsigned threads = 1;
};

// Integrals against the complex atom gamma_even + i gamma_odd.
struct ChangeOfVariablesResult {
  cplx lhs = 0.0;
  cplx rhs = 0.0;
  double rel_defect = 0.0;
};

// Both sides of the substitution x = T y over R0: integral of f gamma dx and
// integral of f(T y) det J(y) gamma(T y) dy. Each column is integrated piecewise
// between the discontinuities (x2 = g(x1) on the left, y2 = 0 on the right).
ChangeOfVariablesResult change_of_variables_check(const CartoonFunction& model, const FrameSpec& spec,
                                                  const CurveletParams& params, const TwistMap& map,
                                                  ChangeOfVariablesOptions options = {});

// Sampled points of R0 where the side of f(T y) disagrees with the sign of y2.
std::size_t straightening_violations(const CartoonFunction& model, const TwistMap& map, std::size_t n);

struct DerivativeBounds {
  double strip_height = 0.0;
  // [side][m]: sup |d^m H / d y1^m| over sampled y in R0, side 0 is y2 > 0, side 1 is y2 < 0.
  std::array<std::array<double, 4>, 2> sup{};
  // Profile of max over y2 > 0 of |dH/dy1| at each sampled |y1|.
  std::vector<double> y1;
  std::vector<double> d1_profile;
};

// H(y) = f(T y) det J(y) on R0 sampled on an n1 x n2 cell-centred grid;
// derivatives along y1 by centred differences with step `step`.
DerivativeBounds h_derivative_bounds(const CartoonFunction& model, const TwistMap& map, std::size_t n1,
                                     std::size_t n2, double step = 0.0);

}  // namespace cvlab
