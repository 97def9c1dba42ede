#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "cvlab/field.hpp"
#include "cvlab/frame.hpp"

namespace cvlab {

// Edge S given as a graph y = g(x).
//   Straight:   [c0, c1]            g = c0 + c1 x
//   Parabola:   [x0, y0, c]         g = y0 + c (x - x0)^2
//   Sine:       [y0, alpha, omega, phase]   g = y0 + alpha sin(omega x + phase)
//   Polynomial: [c0, c1, ...]       g = sum c_i x^i
enum class EdgeFamily { None, Straight, Parabola, Sine, Polynomial };

std::string to_string(EdgeFamily family);
EdgeFamily edge_family_from_string(const std::string& name);

class EdgeCurve {
 public:
  EdgeCurve() = default;
  EdgeCurve(EdgeFamily family, std::vector<double> coeffs, std::array<double, 2> x_range, int smoothness = 3);

  static EdgeCurve none() { return {}; }
  static EdgeCurve straight(double c0, double c1, std::array<double, 2> x_range = {0.0, 1.0});
  static EdgeCurve parabola(double x0, double y0, double c, std::array<double, 2> x_range = {0.0, 1.0});
  static EdgeCurve sine(double y0, double alpha, double omega, double phase, std::array<double, 2> x_range = {0.0, 1.0});

  EdgeFamily family() const { return family_; }
  bool empty() const { return family_ == EdgeFamily::None; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::array<double, 2>& x_range() const { return x_range_; }
  int smoothness() const { return smoothness_; }
  // Upper bounds of |g'|, |g''|, |g'''| over x_range.
  const std::array<double, 3>& derivative_bounds() const { return bounds_; }

  // order-th derivative of g, order in 0..3.
  double derivative(double x, int order) const;
  double operator()(double x) const { return derivative(x, 0); }
  Point point(double x) const { return {x, derivative(x, 0)}; }
  // Unit tangent (1, g') / |(1, g')|.
  Point tangent(double x) const;

 private:
  EdgeFamily family_ = EdgeFamily::None;
  std::vector<double> coeffs_;
  std::array<double, 2> x_range_{0.0, 1.0};
  int smoothness_ = 0;
  std::array<double, 3> bounds_{0.0, 0.0, 0.0};
};

// Smooth side function: constant + Gaussian-windowed linear terms + C^3 radial
// kinks r^{7/2} exp(-r^2 / (2 sigma^2)).
struct GaussTerm {
  Point center{};
  double sigma = 0.1;
  double amplitude = 1.0;
  Point slope{};  // amplitude * (1 + slope.(x - center)) * gaussian
};

struct KinkTerm {
  Point center{};
  double sigma = 0.1;
  double amplitude = 1.0;
};

struct SideFunction {
  double constant = 0.0;
  std::vector<GaussTerm> gauss;
  std::vector<KinkTerm> kinks;

  double operator()(Point x) const;
  bool is_zero() const { return constant == 0.0 && gauss.empty() && kinks.empty(); }
};

struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  bool contains(Point p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

// How the model is cut off outside its support.
enum class SupportShape { Box, Disc, Plane };

struct Support {
  SupportShape shape = SupportShape::Box;
  Box box{0.2, 0.2, 0.8, 0.8};
  Point center{0.5, 0.5};  // disc only
  double radius = 0.3;     // disc only
  // Width of the C-infinity taper outside the support; 0 cuts off sharply.
  // Plane means no cutoff at all.
  double taper = 0.1;

  double envelope(Point x) const;
};

// f = E(x) * (f_plus(x) if x2 >= g(x1) else f_minus(x)), E the support envelope.
// Points exactly on S take the f_plus side.
struct CartoonFunction {
  std::string name;
  EdgeCurve edge;
  SideFunction f_plus;
  SideFunction f_minus;
  Support support;
  // Smoothness orders; 1000 stands for C-infinity.
  int N = 3;  // sides
  int n = 3;  // edge

  double evaluate(Point x) const;
  bool above(Point x) const;
  // f_plus - f_minus at x (without envelope).
  double jump(Point x) const { return f_plus(x) - f_minus(x); }
};

double evaluate(const CartoonFunction& model, Point x);
SampledField rasterize(const CartoonFunction& model, const GridSpec& grid, unsigned threads = 1);

// Canonical library. Unit-jump models have f_plus = 1, f_minus = 0.
CartoonFunction zero_model();
CartoonFunction straight_edge_model(double c0 = 0.5, double c1 = 0.0, double jump = 1.0);
CartoonFunction parabola_edge_model(double x0 = 0.5, double y0 = 0.4, double c = 1.0, double jump = 1.0);
// Unit jump across g(x) = y0 + c2 (x - x0)^2 + c3 (x - x0)^3.
CartoonFunction cubic_edge_model(double x0 = 0.5, double y0 = 0.5, double c2 = 0.3, double c3 = 0.4, double jump = 1.0);
CartoonFunction sine_edge_model(double y0 = 0.5, double alpha = 0.05, double omega = 6.0, double phase = 0.0,
                                double jump = 1.0);
// Unit jump across the horizontal diameter of a sharply cut disc; area pi r^2 / 2.
CartoonFunction half_disc_model(Point center = {0.5, 0.5}, double radius = 0.3);
// Sides with exactly C^3 radial kinks on top of a unit jump.
CartoonFunction kinked_sides(CartoonFunction model, double amplitude = 1.0);
// Globally C^3 function without an edge: one radial kink, no cutoff. The
// default width keeps it below 1e-16 at the boundary of the unit square.
CartoonFunction smooth_kink_model(Point center = {0.5, 0.5}, double sigma = 0.06);
// C-infinity function without an edge: two Gaussians, one with a linear tilt.
CartoonFunction smooth_bump_model(Point center = {0.5, 0.5}, double sigma = 0.08);

// Model definition files (JSON).
CartoonFunction model_from_json_text(const std::string& text);
std::string model_to_json_text(const CartoonFunction& model);
CartoonFunction load_model(const std::filesystem::path& path);
// Built-in model by name: zero, straight, parabola, cubic, sine, half_disc, smooth_kink, smooth_bump,
// and the "_kinked" variants of the edge models.
CartoonFunction named_model(const std::string& name);

struct EdgeGeometry {
  bool has_edge = false;
  Point p{};
  double x_param = 0.0;  // p = (x_param, g(x_param))
  double L = 0.0;
  double theta_prime = 0.0;
  double k = 0.0;
  int multiplicity = 0;  // minimizers tying with the reported one
};

struct EdgeGeometryOptions {
  int samples = 4096;
};

// Anisotropic distance |D_a R_theta (b - p)| with D_a = diag(1/a, 1/sqrt a)
// applied to (minor, major) components.
double anisotropic_distance(const CurveletParams& params, Point p);

// Nearest edge point in the anisotropic metric: dense sampling of x_range,
// then Brent refinement of every sampled local minimum.
EdgeGeometry edge_geometry(const CartoonFunction& model, const CurveletParams& params,
                           EdgeGeometryOptions options = {});

// Signed angle from the tangent to the major axis, reduced to (-pi/2, pi/2].
double relative_angle(double theta, Point tangent);

}  // namespace cvlab
