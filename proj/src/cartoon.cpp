#include "cvlab/cartoon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include "json.hpp"

#include "cvlab/error.hpp"
#include "cvlab/parallel.hpp"

namespace cvlab {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

// Falling factorial i (i-1) ... (i-k+1).
double falling(int i, int k) {
  double r = 1.0;
  for (int m = 0; m < k; ++m) r *= i - m;
  return r;
}

std::size_t expected_coeffs(EdgeFamily f) {
  switch (f) {
    case EdgeFamily::None: return 0;
    case EdgeFamily::Straight: return 2;
    case EdgeFamily::Parabola: return 3;
    case EdgeFamily::Sine: return 4;
    case EdgeFamily::Polynomial: return 0;
  }
  return 0;
}

// C-infinity step: 1 for s <= 0, 0 for s >= 1.
double taper_step(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  const double p = std::exp(-1.0 / (1.0 - s)), q = std::exp(-1.0 / s);
  return p / (p + q);
}

double taper_1d(double d, double width) {
  if (d <= 0.0) return 1.0;
  if (width <= 0.0) return 0.0;
  return taper_step(d / width);
}

}  // namespace

std::string to_string(EdgeFamily family) {
  switch (family) {
    case EdgeFamily::None: return "none";
    case EdgeFamily::Straight: return "straight";
    case EdgeFamily::Parabola: return "parabola";
    case EdgeFamily::Sine: return "sine";
    case EdgeFamily::Polynomial: return "polynomial";
  }
  return "none";
}

EdgeFamily edge_family_from_string(const std::string& name) {
  if (name == "none") return EdgeFamily::None;
  if (name == "straight") return EdgeFamily::Straight;
  if (name == "parabola") return EdgeFamily::Parabola;
  if (name == "sine") return EdgeFamily::Sine;
  if (name == "polynomial") return EdgeFamily::Polynomial;
  throw ConfigError("unknown edge family '" + name + "'");
}

EdgeCurve::EdgeCurve(EdgeFamily family, std::vector<double> coeffs, std::array<double, 2> x_range, int smoothness)
    : family_(family), coeffs_(std::move(coeffs)), x_range_(x_range), smoothness_(smoothness) {
  if (family_ == EdgeFamily::None) {
    coeffs_.clear();
    return;
  }
  const std::size_t need = expected_coeffs(family_);
  if (need != 0 && coeffs_.size() != need)
    throw ConfigError(to_string(family_) + " edge needs " + std::to_string(need) + " coefficients");
  if (family_ == EdgeFamily::Polynomial && coeffs_.empty()) throw ConfigError("polynomial edge needs coefficients");
  if (!(x_range_[0] < x_range_[1])) throw ConfigError("edge x_range must be increasing");

  const double xa = x_range_[0], xb = x_range_[1];
  switch (family_) {
    case EdgeFamily::Straight:
      bounds_ = {std::abs(coeffs_[1]), 0.0, 0.0};
      break;
    case EdgeFamily::Parabola: {
      const double reach = std::max(std::abs(xa - coeffs_[0]), std::abs(xb - coeffs_[0]));
      bounds_ = {2.0 * std::abs(coeffs_[2]) * reach, 2.0 * std::abs(coeffs_[2]), 0.0};
      break;
    }
    case EdgeFamily::Sine: {
      const double al = std::abs(coeffs_[1]), om = std::abs(coeffs_[2]);
      bounds_ = {al * om, al * om * om, al * om * om * om};
      break;
    }
    case EdgeFamily::Polynomial: {
      const double m = std::max(std::abs(xa), std::abs(xb));
      for (int k = 1; k <= 3; ++k) {
        double s = 0.0;
        for (std::size_t i = static_cast<std::size_t>(k); i < coeffs_.size(); ++i)
          s += std::abs(coeffs_[i]) * falling(static_cast<int>(i), k) * std::pow(m, static_cast<double>(i) - k);
        bounds_[k - 1] = s;
      }
      break;
    }
    case EdgeFamily::None: break;
  }
}

EdgeCurve EdgeCurve::straight(double c0, double c1, std::array<double, 2> x_range) {
  return EdgeCurve(EdgeFamily::Straight, {c0, c1}, x_range, 1000);
}

EdgeCurve EdgeCurve::parabola(double x0, double y0, double c, std::array<double, 2> x_range) {
  return EdgeCurve(EdgeFamily::Parabola, {x0, y0, c}, x_range, 1000);
}

EdgeCurve EdgeCurve::sine(double y0, double alpha, double omega, double phase, std::array<double, 2> x_range) {
  return EdgeCurve(EdgeFamily::Sine, {y0, alpha, omega, phase}, x_range, 1000);
}

double EdgeCurve::derivative(double x, int order) const {
  if (order < 0 || order > 3) throw DomainError("EdgeCurve::derivative: order must be 0..3");
  const auto& c = coeffs_;
  switch (family_) {
    case EdgeFamily::None: return 0.0;
    case EdgeFamily::Straight:
      return order == 0 ? c[0] + c[1] * x : order == 1 ? c[1] : 0.0;
    case EdgeFamily::Parabola: {
      const double u = x - c[0];
      return order == 0 ? c[1] + c[2] * u * u : order == 1 ? 2.0 * c[2] * u : order == 2 ? 2.0 * c[2] : 0.0;
    }
    case EdgeFamily::Sine: {
      const double arg = c[2] * x + c[3];
      const double w = std::pow(c[2], order);
      switch (order) {
        case 0: return c[0] + c[1] * std::sin(arg);
        case 1: return c[1] * w * std::cos(arg);
        case 2: return -c[1] * w * std::sin(arg);
        default: return -c[1] * w * std::cos(arg);
      }
    }
    case EdgeFamily::Polynomial: {
      double s = 0.0;
      for (std::size_t i = c.size(); i-- > static_cast<std::size_t>(order);)
        s = s * x + c[i] * falling(static_cast<int>(i), order);
      return s;
    }
  }
  return 0.0;
}

Point EdgeCurve::tangent(double x) const {
  const double d = derivative(x, 1);
  const double n = std::hypot(1.0, d);
  return {1.0 / n, d / n};
}

double SideFunction::operator()(Point x) const {
  double v = constant;
  for (const auto& g : gauss) {
    const Point d = x - g.center;
    v += g.amplitude * (1.0 + dot(g.slope, d)) * std::exp(-dot(d, d) / (2.0 * g.sigma * g.sigma));
  }
  for (const auto& k : kinks) {
    const Point d = x - k.center;
    const double r2 = dot(d, d);
    v += k.amplitude * std::pow(r2, 1.75) * std::exp(-r2 / (2.0 * k.sigma * k.sigma));
  }
  return v;
}

double Support::envelope(Point x) const {
  switch (shape) {
    case SupportShape::Plane: return 1.0;
    case SupportShape::Box: {
      const double ox = std::max({0.0, box.x0 - x.x, x.x - box.x1});
      const double oy = std::max({0.0, box.y0 - x.y, x.y - box.y1});
      return taper_1d(ox, taper) * taper_1d(oy, taper);
    }
    case SupportShape::Disc:
      return taper_1d(norm(x - center) - radius, taper);
  }
  return 1.0;
}

bool CartoonFunction::above(Point x) const { return edge.empty() || x.y >= edge(x.x); }

double CartoonFunction::evaluate(Point x) const {
  const double e = support.envelope(x);
  if (e == 0.0) return 0.0;
  return e * (above(x) ? f_plus(x) : f_minus(x));
}

double evaluate(const CartoonFunction& model, Point x) { return model.evaluate(x); }

SampledField rasterize(const CartoonFunction& model, const GridSpec& grid, unsigned threads) {
  std::vector<double> v(grid.size());
  parallel_for(grid.rows, threads, [&](std::size_t r) {
    for (std::size_t c = 0; c < grid.cols; ++c) v[r * grid.cols + c] = model.evaluate(grid.sample(r, c));
  });
  return SampledField::from_real(grid, v);
}

// ---- model library ---------------------------------------------------------

CartoonFunction zero_model() {
  CartoonFunction m;
  m.name = "zero";
  m.N = 1000;
  m.n = 1000;
  return m;
}

namespace {

CartoonFunction unit_jump(std::string name, EdgeCurve edge, double jump) {
  CartoonFunction m;
  m.name = std::move(name);
  m.edge = std::move(edge);
  m.f_plus.constant = jump;
  m.N = 1000;
  m.n = m.edge.smoothness();
  return m;
}

}  // namespace

CartoonFunction straight_edge_model(double c0, double c1, double jump) {
  return unit_jump("straight", EdgeCurve::straight(c0, c1), jump);
}

CartoonFunction parabola_edge_model(double x0, double y0, double c, double jump) {
  return unit_jump("parabola", EdgeCurve::parabola(x0, y0, c), jump);
}

CartoonFunction cubic_edge_model(double x0, double y0, double c2, double c3, double jump) {
  // Expanded in powers of x.
  const std::vector<double> coeffs{y0 + c2 * x0 * x0 - c3 * x0 * x0 * x0, -2.0 * c2 * x0 + 3.0 * c3 * x0 * x0,
                                   c2 - 3.0 * c3 * x0, c3};
  return unit_jump("cubic", EdgeCurve(EdgeFamily::Polynomial, coeffs, {0.0, 1.0}, 1000), jump);
}

CartoonFunction sine_edge_model(double y0, double alpha, double omega, double phase, double jump) {
  return unit_jump("sine", EdgeCurve::sine(y0, alpha, omega, phase), jump);
}

CartoonFunction half_disc_model(Point center, double radius) {
  auto m = unit_jump("half_disc", EdgeCurve::straight(center.y, 0.0), 1.0);
  m.support.shape = SupportShape::Disc;
  m.support.center = center;
  m.support.radius = radius;
  m.support.taper = 0.0;
  return m;
}

CartoonFunction kinked_sides(CartoonFunction model, double amplitude) {
  const Point c{0.5 * (model.support.box.x0 + model.support.box.x1), 0.5 * (model.support.box.y0 + model.support.box.y1)};
  model.f_plus.kinks.push_back({c + Point{-0.1, 0.12}, 0.15, amplitude});
  model.f_minus.kinks.push_back({c + Point{0.1, -0.12}, 0.15, -amplitude});
  model.N = 3;
  model.name += "_kinked";
  return model;
}

CartoonFunction smooth_kink_model(Point center, double sigma) {
  CartoonFunction m;
  m.name = "smooth_kink";
  m.f_plus.kinks.push_back({center, sigma, 1.0});
  m.f_minus = m.f_plus;
  m.support.shape = SupportShape::Plane;
  m.N = 3;
  m.n = 1000;
  return m;
}

CartoonFunction smooth_bump_model(Point center, double sigma) {
  CartoonFunction m;
  m.name = "smooth_bump";
  m.f_plus.gauss.push_back({center + Point{-0.05, 0.0}, sigma, 1.0, {2.0, -1.0}});
  m.f_plus.gauss.push_back({center + Point{0.1, -0.1}, 0.6 * sigma, -0.5, {}});
  m.f_minus = m.f_plus;
  m.support.shape = SupportShape::Plane;
  m.N = 1000;
  m.n = 1000;
  return m;
}

CartoonFunction named_model(const std::string& name) {
  if (name == "zero") return zero_model();
  if (name == "straight") return straight_edge_model();
  if (name == "parabola") return parabola_edge_model();
  if (name == "cubic") return cubic_edge_model();
  if (name == "sine") return sine_edge_model();
  if (name == "half_disc") return half_disc_model();
  if (name == "smooth_kink") return smooth_kink_model();
  if (name == "smooth_bump") return smooth_bump_model();
  const std::string suffix = "_kinked";
  if (name.size() > suffix.size() && name.ends_with(suffix)) {
    const std::string base = name.substr(0, name.size() - suffix.size());
    if (base == "straight" || base == "parabola" || base == "cubic" || base == "sine") return kinked_sides(named_model(base));
  }
  throw ConfigError("unknown model '" + name + "'");
}

// ---- JSON ------------------------------------------------------------------

namespace {

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a point [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_to(Point p) { return json::array({p.x, p.y}); }

SideFunction side_from(const json& j) {
  SideFunction s;
  if (j.is_number()) {
    s.constant = j.get<double>();
    return s;
  }
  s.constant = j.value("constant", 0.0);
  for (const auto& g : j.value("gauss", json::array())) {
    GaussTerm t;
    t.center = point_from(g.at("center"));
    t.sigma = g.value("sigma", 0.1);
    t.amplitude = g.value("amplitude", 1.0);
    if (g.contains("slope")) t.slope = point_from(g["slope"]);
    s.gauss.push_back(t);
  }
  for (const auto& k : j.value("kinks", json::array())) {
    KinkTerm t;
    t.center = point_from(k.at("center"));
    t.sigma = k.value("sigma", 0.1);
    t.amplitude = k.value("amplitude", 1.0);
    s.kinks.push_back(t);
  }
  return s;
}

json side_to(const SideFunction& s) {
  json j;
  j["constant"] = s.constant;
  j["gauss"] = json::array();
  for (const auto& g : s.gauss)
    j["gauss"].push_back({{"center", point_to(g.center)}, {"sigma", g.sigma}, {"amplitude", g.amplitude},
                          {"slope", point_to(g.slope)}});
  j["kinks"] = json::array();
  for (const auto& k : s.kinks)
    j["kinks"].push_back({{"center", point_to(k.center)}, {"sigma", k.sigma}, {"amplitude", k.amplitude}});
  return j;
}

}  // namespace

CartoonFunction model_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model JSON: ") + e.what());
  }
  try {
    CartoonFunction m;
    if (j.contains("base")) m = named_model(j["base"].get<std::string>());
    m.name = j.value("name", m.name.empty() ? std::string("custom") : m.name);
    if (j.contains("family")) {
      const auto family = edge_family_from_string(j["family"].get<std::string>());
      std::array<double, 2> range{0.0, 1.0};
      if (j.contains("x_range")) range = {j["x_range"][0].get<double>(), j["x_range"][1].get<double>()};
      m.edge = EdgeCurve(family, j.value("coefficients", std::vector<double>{}), range, j.value("n", 3));
    }
    if (j.contains("f_plus")) m.f_plus = side_from(j["f_plus"]);
    if (j.contains("f_minus")) m.f_minus = side_from(j["f_minus"]);
    m.N = j.value("N", m.N);
    m.n = j.value("n", m.n);
    json sup = j.value("support", json::object());
    if (j.contains("box")) sup["box"] = j["box"];
    if (sup.contains("shape")) {
      const auto shape = sup["shape"].get<std::string>();
      if (shape == "box") m.support.shape = SupportShape::Box;
      else if (shape == "disc") m.support.shape = SupportShape::Disc;
      else if (shape == "plane") m.support.shape = SupportShape::Plane;
      else throw ConfigError("unknown support shape '" + shape + "'");
    }
    if (sup.contains("box")) {
      const auto& b = sup["box"];
      if (!b.is_array() || b.size() != 4) throw ConfigError("box must be [x0, y0, x1, y1]");
      m.support.box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
      if (!(m.support.box.x0 < m.support.box.x1 && m.support.box.y0 < m.support.box.y1))
        throw ConfigError("box must have x0 < x1 and y0 < y1");
    }
    if (sup.contains("center")) m.support.center = point_from(sup["center"]);
    m.support.radius = sup.value("radius", m.support.radius);
    m.support.taper = sup.value("taper", m.support.taper);
    if (m.support.taper < 0.0) throw ConfigError("support taper must be non-negative");
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model JSON: ") + e.what());
  }
}

std::string model_to_json_text(const CartoonFunction& m) {
  json j;
  j["name"] = m.name;
  j["family"] = to_string(m.edge.family());
  j["coefficients"] = m.edge.coefficients();
  j["x_range"] = m.edge.x_range();
  j["N"] = m.N;
  j["n"] = m.n;
  j["f_plus"] = side_to(m.f_plus);
  j["f_minus"] = side_to(m.f_minus);
  const auto& s = m.support;
  j["support"] = {{"shape", s.shape == SupportShape::Box ? "box" : s.shape == SupportShape::Disc ? "disc" : "plane"},
                  {"box", {s.box.x0, s.box.y0, s.box.x1, s.box.y1}},
                  {"center", point_to(s.center)},
                  {"radius", s.radius},
                  {"taper", s.taper}};
  return j.dump(2);
}

CartoonFunction load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str());
}

// ---- edge geometry -----------------------------------------------------------

double anisotropic_distance(const CurveletParams& params, Point p) {
  const Point w = params.b - p;
  const double across = dot(params.minor_axis(), w) / params.a;
  const double along = dot(params.major_axis(), w) / std::sqrt(params.a);
  return std::hypot(across, along);
}

double relative_angle(double theta, Point tangent) {
  const Point t{std::cos(theta), std::sin(theta)};
  double ang = std::atan2(cross(tangent, t), dot(tangent, t));
  if (ang > kPi / 2) ang -= kPi;
  if (ang <= -kPi / 2) ang += kPi;
  return ang;
}

EdgeGeometry edge_geometry(const CartoonFunction& model, const CurveletParams& params, EdgeGeometryOptions options) {
  EdgeGeometry out;
  if (model.edge.empty()) return out;
  if (!(params.a > 0.0 && params.a < 1.0)) throw DomainError("edge_geometry: a must lie in (0, 1)");
  if (options.samples < 8) throw DomainError("edge_geometry: need at least 8 samples");

  const EdgeCurve& g = model.edge;
  const Point n = params.minor_axis(), t = params.major_axis();
  const double a = params.a, sa = std::sqrt(a);
  // Squared distance is smooth at its zero, which keeps the refinement exact.
  auto dist2 = [&](double x) {
    const Point w = params.b - g.point(x);
    const double u = dot(n, w) / a, v = dot(t, w) / sa;
    return u * u + v * v;
  };

  const double xa = g.x_range()[0], xb = g.x_range()[1];
  const int ns = options.samples;
  std::vector<double> xs(ns + 1), fs(ns + 1);
  for (int i = 0; i <= ns; ++i) {
    xs[i] = xa + (xb - xa) * i / ns;
    fs[i] = dist2(xs[i]);
  }

  struct Candidate { double x, f; };
  std::vector<Candidate> cands;
  for (int i = 0; i <= ns; ++i) {
    const bool left = i == 0 || fs[i] <= fs[i - 1];
    const bool right = i == ns || fs[i] < fs[i + 1];
    if (!(left && right)) continue;
    const double lo = xs[std::max(i - 1, 0)], hi = xs[std::min(i + 1, ns)];
    auto [x, f] = boost::math::tools::brent_find_minima(dist2, lo, hi, std::numeric_limits<double>::digits);
    // Newton polish on the stationarity condition.
    for (int it = 0; it < 8; ++it) {
      const Point w = params.b - g.point(x);
      const Point d1{1.0, g.derivative(x, 1)}, d2{0.0, g.derivative(x, 2)};
      const double nw = dot(n, w), tw = dot(t, w), nd = dot(n, d1), td = dot(t, d1);
      const double f1 = -2.0 * (nw * nd / (a * a) + tw * td / a);
      const double f2 = 2.0 * ((nd * nd - nw * dot(n, d2)) / (a * a) + (td * td - tw * dot(t, d2)) / a);
      if (!(f2 > 0.0)) break;
      const double xn = std::clamp(x - f1 / f2, xa, xb);
      const double fn = dist2(xn);
      if (!(fn <= f)) break;
      const bool done = xn == x;
      x = xn;
      f = fn;
      if (done) break;
    }
    if (fs[i] < f) x = xs[i], f = fs[i];
    cands.push_back({x, f});
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].f < cands[best].f * (1.0 - 1e-12) - 1e-300) best = i;
  const double fbest = cands[best].f;
  int mult = 0;
  std::vector<double> seen;
  for (const auto& c : cands) {
    if (std::sqrt(c.f) > std::sqrt(fbest) + 1e-9 * std::max(1.0, std::sqrt(fbest))) continue;
    if (std::any_of(seen.begin(), seen.end(), [&](double s) { return std::abs(s - c.x) < 1e-7; })) continue;
    seen.push_back(c.x);
    ++mult;
  }

  out.has_edge = true;
  out.x_param = cands[best].x;
  out.p = g.point(out.x_param);
  out.L = std::sqrt(fbest);
  out.theta_prime = relative_angle(params.theta, g.tangent(out.x_param));
  out.k = out.theta_prime / sa;
  out.multiplicity = mult;
  return out;
}

}  // namespace cvlab
