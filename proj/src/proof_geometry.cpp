#include "cvlab/proof_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "cvlab/error.hpp"
#include "cvlab/parallel.hpp"
#include "json.hpp"

namespace cvlab {

namespace {

constexpr double kPi = std::numbers::pi;

Point rotate90(Point p) { return {-p.y, p.x}; }

Point unit(Point p) {
  const double r = norm(p);
  return {p.x / r, p.y / r};
}

// Wraps an angle into (-pi, pi].
double wrap(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a <= -kPi) a += 2 * kPi;
  return a;
}

std::size_t slot(int index) { return static_cast<std::size_t>(index + 2); }

}  // namespace

LocalFrame LocalFrame::aligned(Point origin, Point direction) {
  const Point e1 = unit(direction);
  return {origin, e1, rotate90(e1)};
}

// ---- partition -----------------------------------------------------------------

PartitionLayout build_partition(const CurveletParams& params, const EdgeGeometry& geometry,
                                const PartitionOptions& options) {
  if (!geometry.has_edge) throw DomainError("build_partition: model has no edge");
  if (!(options.epsilon > 0.0 && options.epsilon < 2.0)) throw DomainError("build_partition: epsilon must lie in (0, 2)");
  if (!(options.c_d > 0.0 && options.c_h > 0.0 && options.c_v > 0.0))
    throw DomainError("build_partition: constants must be positive");
  if (!(params.a > 0.0 && params.a < 1.0)) throw DomainError("build_partition: a must lie in (0, 1)");

  PartitionLayout L;
  L.params = params;
  L.geometry = geometry;
  L.options = options;
  L.t = params.major_axis();
  L.n = params.minor_axis();
  L.theta_prime = geometry.theta_prime;
  L.k = geometry.k;
  // theta' is the angle from the tangent to the major axis.
  const double c = std::cos(-L.theta_prime), s = std::sin(-L.theta_prime);
  L.tau = {c * L.t.x - s * L.t.y, s * L.t.x + c * L.t.y};
  L.nu = rotate90(L.tau);

  const double a = params.a, sa = std::sqrt(a), eps = options.epsilon;
  const double ak = std::abs(L.k);
  L.regime = ak < options.k_aligned ? Regime::Aligned : Regime::Oblique;

  if (L.regime == Regime::Aligned) {
    L.q = geometry.p;
    L.d = options.c_d * sa;
    L.h = options.c_h * a;
    L.r1 = L.d;
    L.v_half = options.c_v * sa;
    L.l_max = 0;
    L.regions = {{0, "strip |x1| <= r1, |x2| < h around the edge tangent", "rest of the strip |x2| < h"},
                 {3, "complement of R0", "none"}};
  } else {
    // Crossing of the tangent line at p with the major axis through b.
    const double den = cross(L.t, L.tau);
    const double u = cross(geometry.p - params.b, L.tau) / den;
    L.q = params.b + u * L.t;
    L.d = options.c_d * sa / ak;
    L.h = options.c_h * a * std::pow(ak, -eps);
    L.r1 = std::pow(ak, 1.0 - 0.5 * eps) * L.d;
    L.v_half = options.c_v * sa;
    L.l_max = static_cast<int>(std::ceil(L.r1 / L.d - 1e-12));
    L.regions = {
        {-2, "half-strip u < 0, |v| <= V on the major-axis side of the edge", "rest of the minor-axis lines with u < 0"},
        {-1, "sector between the rays -t and -tau, radius < r1", "double sector of radial lines through Q"},
        {0, "strip |x1| <= r1, |x2| < h around the edge tangent", "rest of the strip |x2| < h"},
        {1, "sector between the rays t and tau, radius < r1", "double sector of radial lines through Q"},
        {2, "half-strip u > 0, |v| <= V on the major-axis side of the edge", "rest of the minor-axis lines with u > 0"},
        {3, "complement of R-2..R2", "none"}};
  }
  if (options.resolution > 0.0 && (L.h < options.resolution || L.d < options.resolution))
    throw ResolutionError("build_partition: h or d below the grid spacing");
  return L;
}

bool PartitionLayout::in_region(int index, Point x) const {
  const Point e = to_edge(x);
  const bool r0 = std::abs(e.x) <= r1 && std::abs(e.y) < h;
  if (index == 0) return r0;
  if (regime == Regime::Aligned) {
    if (index == 3) return !r0;
    return false;
  }
  const Point uv = to_uv(x);
  const double rho = norm(x - q);
  const double alpha = -theta_prime;  // edge ray angle in (u, v)
  const double lo = std::min(0.0, alpha), hi = std::max(0.0, alpha);
  const double phi = std::atan2(uv.y, uv.x);
  const bool sector_pos = rho < r1 && phi >= lo && phi <= hi;
  const double phim = wrap(phi - kPi);
  const bool sector_neg = rho < r1 && rho > 0.0 && phim >= lo && phim <= hi;
  const double side_t = dot(nu, t);  // x2 of the +t ray
  switch (index) {
    case 1: return !r0 && sector_pos;
    case -1: return !r0 && sector_neg && !sector_pos;
    case 2: return uv.x > 0.0 && std::abs(uv.y) <= v_half && e.y * side_t > 0.0 && !r0 && !sector_pos;
    case -2: return uv.x < 0.0 && std::abs(uv.y) <= v_half && e.y * side_t < 0.0 && !r0 && !sector_neg;
    case 3:
      for (int i = -2; i <= 2; ++i)
        if (in_region(i, x)) return false;
      return true;
    default: return false;
  }
}

bool PartitionLayout::in_companion(int index, Point x) const {
  const Point e = to_edge(x);
  switch (index) {
    case 0: return std::abs(e.y) < h && std::abs(e.x) > r1;
    case 3: return false;
    default: break;
  }
  if (regime == Regime::Aligned) return false;
  const Point uv = to_uv(x);
  if (index == 2) return uv.x > 0.0 && !in_region(2, x);
  if (index == -2) return uv.x < 0.0 && !in_region(-2, x);
  const double alpha = -theta_prime;
  const double lo = std::min(0.0, alpha), hi = std::max(0.0, alpha);
  const double phi = std::atan2(uv.y, uv.x), phim = wrap(phi - kPi);
  const bool fan = (phi >= lo && phi <= hi) || (phim >= lo && phim <= hi);
  return fan && !in_region(index, x);
}

int PartitionLayout::classify(Point x) const {
  for (int i : {0, 1, -1, 2, -2})
    if (in_region(i, x)) return i;
  return 3;
}

int PartitionLayout::subregion_index(Point x) const {
  const double rho = norm(x - q);
  if (regime != Regime::Oblique) return kNoSubregion;
  const int m = static_cast<int>(std::floor(rho / d));
  if (in_region(1, x)) return m;
  if (in_region(-1, x)) return -m - 1;
  return kNoSubregion;
}

std::string PartitionLayout::to_json() const {
  nlohmann::json j;
  j["regime"] = regime == Regime::Aligned ? "aligned" : "oblique";
  j["a"] = params.a;
  j["theta"] = params.theta;
  j["b"] = {params.b.x, params.b.y};
  j["p"] = {geometry.p.x, geometry.p.y};
  j["L"] = geometry.L;
  j["q"] = {q.x, q.y};
  j["major_axis"] = {t.x, t.y};
  j["minor_axis"] = {n.x, n.y};
  j["edge_tangent"] = {tau.x, tau.y};
  j["theta_prime"] = theta_prime;
  j["k"] = k;
  j["epsilon"] = options.epsilon;
  j["c_d"] = options.c_d;
  j["c_h"] = options.c_h;
  j["c_v"] = options.c_v;
  j["d"] = d;
  j["h"] = h;
  j["r1"] = r1;
  j["v_half"] = v_half;
  j["l_max"] = l_max;
  j["regions"] = nlohmann::json::array();
  for (const auto& r : regions) j["regions"].push_back({{"index", r.index}, {"shape", r.shape}, {"companion", r.companion}});
  return j.dump(2);
}

std::vector<Point> quasi_random_points(std::size_t count, Point lower, Point upper, std::uint64_t seed) {
  // Additive recurrence on the plastic number.
  constexpr double g = 1.32471795724474602596;
  constexpr double a1 = 1.0 / g, a2 = 1.0 / (g * g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double s1 = u(rng), s2 = u(rng);
  std::vector<Point> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    double f1 = s1 + a1 * static_cast<double>(i + 1), f2 = s2 + a2 * static_cast<double>(i + 1);
    f1 -= std::floor(f1);
    f2 -= std::floor(f2);
    pts[i] = {lower.x + (upper.x - lower.x) * f1, lower.y + (upper.y - lower.y) * f2};
  }
  return pts;
}

CoverageReport check_partition(const PartitionLayout& layout, std::size_t samples, Point lower, Point upper,
                               std::uint64_t seed) {
  CoverageReport rep;
  rep.samples = samples;
  for (const Point& x : quasi_random_points(samples, lower, upper, seed)) {
    int hits = 0, last = 0;
    for (int i = -2; i <= 3; ++i) {
      if (!layout.in_region(i, x)) continue;
      ++hits;
      last = i;
      if (layout.in_companion(i, x)) ++rep.companion_overlaps;
    }
    if (hits == 0) ++rep.uncovered;
    if (hits > 1) ++rep.overlapping;
    if (hits >= 1) ++rep.counts[slot(last)];
  }
  return rep;
}

RegionIntegrals partition_integrals(const PartitionLayout& layout, const SampledField& integrand) {
  RegionIntegrals out;
  const GridSpec& g = integrand.grid();
  const double dA = g.cell_area();
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c)
      out.per_region[slot(layout.classify(g.sample(r, c)))] += integrand(r, c).real() * dA;
  for (double v : out.per_region) out.sum_of_regions += v;
  double total = 0.0;
  for (const auto& z : integrand.values()) total += z.real();
  out.total = total * dA;
  return out;
}

std::string partition_samples_csv(const PartitionLayout& layout, const std::vector<Point>& points) {
  std::ostringstream os;
  os.precision(17);
  os << "x,y,region_index\n";
  for (const auto& p : points) os << p.x << ',' << p.y << ',' << layout.classify(p) << '\n';
  return os.str();
}

// ---- slice Taylor ----------------------------------------------------------------

TaylorSlice taylor_slice(const ScalarField& f, Point anchor, Point direction, double step) {
  if (!(step > 0.0)) throw DomainError("taylor_slice: step must be positive");
  auto at = [&](double s) { return f(anchor + s * direction); };
  const double f0 = at(0.0), p1 = at(step), m1 = at(-step), p2 = at(2 * step), m2 = at(-2 * step);
  TaylorSlice ts;
  ts.anchor = anchor;
  ts.direction = direction;
  ts.c[0] = f0;
  ts.c[1] = (-p2 + 8 * p1 - 8 * m1 + m2) / (12 * step);
  ts.c[2] = (-p2 + 16 * p1 - 30 * f0 + 16 * m1 - m2) / (12 * step * step);
  return ts;
}

SliceTaylor::SliceTaylor(ScalarField f, const PartitionLayout& layout, SliceDirection direction, double step)
    : f_(std::move(f)), layout_(layout), direction_(direction), step_(step > 0.0 ? step : 1e-3) {}

std::pair<TaylorSlice, double> SliceTaylor::slice_at(Point x) const {
  Point anchor, dir;
  double s;
  if (direction_ == SliceDirection::MinorAxis) {
    const Point uv = layout_.to_uv(x);
    anchor = layout_.q + uv.x * layout_.t;
    dir = layout_.n;
    s = uv.y;
  } else {
    anchor = layout_.q;
    s = norm(x - layout_.q);
    dir = s > 0.0 ? Point{(x.x - anchor.x) / s, (x.y - anchor.y) / s} : layout_.t;
  }
  return {taylor_slice(f_, anchor, dir, step_), s};
}

double SliceTaylor::operator()(Point x) const {
  const auto [ts, s] = slice_at(x);
  return ts(s);
}

void check_slice_side(const CartoonFunction& model, const PartitionLayout& layout, SliceDirection direction, Point x) {
  const int region = layout.classify(x);
  if (region == 0 || region == 3) return;
  Point anchor;
  if (direction == SliceDirection::MinorAxis) {
    anchor = layout.q + layout.to_uv(x).x * layout.t;
  } else {
    anchor = layout.q;
  }
  const bool side = model.above(x);
  for (int j = 1; j < 64; ++j) {
    const Point y = anchor + (j / 64.0) * (x - anchor);
    if (model.above(y) != side) throw DomainError("slice crosses the edge inside R" + std::to_string(region));
  }
}

SliceTaylor model_slice_taylor(const CartoonFunction& model, const PartitionLayout& layout, SliceDirection direction,
                               bool plus_side, double step) {
  const SideFunction side = plus_side ? model.f_plus : model.f_minus;
  const Support support = model.support;
  return SliceTaylor([side, support](Point x) { return support.envelope(x) * side(x); }, layout, direction, step);
}

// ---- measures --------------------------------------------------------------------

double measure(const std::function<bool(Point)>& inside, Point lower, Point upper, std::size_t samples,
               std::uint64_t seed) {
  if (samples == 0) throw DomainError("measure: need samples");
  std::size_t hits = 0;
  for (const Point& p : quasi_random_points(samples, lower, upper, seed))
    if (inside(p)) ++hits;
  return (upper.x - lower.x) * (upper.y - lower.y) * static_cast<double>(hits) / static_cast<double>(samples);
}

namespace {

// Bounding box, in (u, v) coordinates, of the sector of radius r on the u > 0
// (sign +1) or u < 0 (sign -1) side.
std::pair<Point, Point> sector_box(const PartitionLayout& L, double r, int sign) {
  const double alpha = -L.theta_prime;
  const double v_end = sign * r * std::sin(alpha);
  const double vmin = std::min(0.0, v_end), vmax = std::max(0.0, v_end);
  const Point lo{sign > 0 ? 0.0 : -r, vmin}, hi{sign > 0 ? r : 0.0, vmax};
  return {lo, hi};
}

}  // namespace

double subregion_measure(const PartitionLayout& L, int l, std::size_t samples, std::uint64_t seed) {
  if (L.regime != Regime::Oblique) throw DomainError("subregion_measure: aligned layout has no R1");
  if (l < -L.l_max || l >= L.l_max) throw DomainError("subregion_measure: index out of range");
  const int sign = l >= 0 ? 1 : -1;
  const int m = l >= 0 ? l : -l - 1;
  const double r_out = std::min((m + 1) * L.d, L.r1);
  auto [lo, hi] = sector_box(L, r_out, sign);
  auto inside = [&](Point uv) {
    const Point x = L.q + uv.x * L.t + uv.y * L.n;
    return L.subregion_index(x) == l;
  };
  return measure(inside, lo, hi, samples, seed);
}

double region_measure(const PartitionLayout& L, int index, std::size_t samples, std::uint64_t seed) {
  if (index == 0) {
    auto inside = [&](Point e) { return L.in_region(0, L.q + e.x * L.tau + e.y * L.nu); };
    return measure(inside, {-L.r1, -L.h}, {L.r1, L.h}, samples, seed);
  }
  if (L.regime == Regime::Oblique && (index == 1 || index == -1)) {
    auto [lo, hi] = sector_box(L, L.r1, index);
    auto inside = [&](Point uv) { return L.in_region(index, L.q + uv.x * L.t + uv.y * L.n); };
    return measure(inside, lo, hi, samples, seed);
  }
  throw DomainError("region_measure: region " + std::to_string(index) + " is unbounded or absent");
}

double subregion_cap(const PartitionLayout& L) {
  return std::pow(L.params.a, 1.5) * std::pow(std::abs(L.k), -0.5 * L.options.epsilon);
}

// ---- twisting map ------------------------------------------------------------------

TwistMap::TwistMap(std::function<double(double)> g, double strip_height, double half_length, LocalFrame frame)
    : g_(std::move(g)), h_(strip_height), half_length_(half_length), frame_(frame) {
  if (!(h_ > 0.0) || !(half_length_ > 0.0)) throw DomainError("TwistMap: strip height and half length must be positive");
}

TwistMap TwistMap::from_edge(const EdgeCurve& edge, double x_param, double strip_height, double half_length) {
  if (edge.empty()) throw DomainError("TwistMap::from_edge: empty edge");
  const Point p = edge.point(x_param);
  const LocalFrame frame = LocalFrame::aligned(p, edge.tangent(x_param));
  auto g = [edge, frame, x_param](double y1) {
    double x = x_param + y1 * frame.e1.x;
    for (int it = 0; it < 60; ++it) {
      const double F = dot(edge.point(x) - frame.origin, frame.e1) - y1;
      const double dF = frame.e1.x + edge.derivative(x, 1) * frame.e1.y;
      const double dx = F / dF;
      x -= dx;
      if (std::abs(dx) <= 1e-16 * (1.0 + std::abs(x))) break;
    }
    return dot(edge.point(x) - frame.origin, frame.e2);
  };
  return TwistMap(g, strip_height, half_length, frame);
}

Point TwistMap::apply(Point y) const {
  if (!in_r0(y)) return y;
  return {y.x, y.y + (h_ - std::abs(y.y)) / h_ * g_(y.x)};
}

Point TwistMap::inverse(Point x) const {
  if (!in_r0(x)) return x;
  const double g = g_(x.x);
  if (!(std::abs(g) < h_)) throw DomainError("TwistMap::inverse: |g| >= h, map is not invertible");
  const double y2 = x.y >= g ? (x.y - g) / (1.0 - g / h_) : (x.y - g) / (1.0 + g / h_);
  return {x.x, y2};
}

double TwistMap::jacobian(Point y, bool* one_sided) const {
  if (one_sided) *one_sided = false;
  if (!in_r0(y)) return 1.0;
  const double r = g_(y.x) / h_;
  if (y.y > 0.0) return 1.0 - r;
  if (y.y < 0.0) return 1.0 + r;
  if (one_sided) *one_sided = true;
  return 1.0 - r;
}

double TwistMap::max_ratio(int samples) const {
  double m = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double y1 = -half_length_ + 2.0 * half_length_ * i / (samples - 1);
    m = std::max(m, std::abs(g_(y1)) / h_);
  }
  return m;
}

Point twist_apply(const TwistMap& map, Point y) { return map.apply(y); }
Point twist_inverse(const TwistMap& map, Point x) { return map.inverse(x); }
double twist_jacobian(const TwistMap& map, Point y, bool* one_sided) { return map.jacobian(y, one_sided); }

ChangeOfVariablesResult change_of_variables_check(const CartoonFunction& model, const FrameSpec& spec,
                                                  const CurveletParams& params, const TwistMap& map,
                                                  ChangeOfVariablesOptions options) {
  if (!(map.max_ratio() < 1.0)) throw DomainError("change_of_variables_check: |g|/h must stay below 1");
  if (options.columns == 0 || options.panels < 1) throw DomainError("change_of_variables_check: bad quadrature size");
  using GL = boost::math::quadrature::gauss<double, 30>;
  const auto& abscissa = GL::abscissa();
  const auto& weights = GL::weights();
  std::vector<double> nodes, wts;  // on [-1, 1]
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    nodes.push_back(abscissa[i]);
    wts.push_back(weights[i]);
    if (abscissa[i] != 0.0) {
      nodes.push_back(-abscissa[i]);
      wts.push_back(weights[i]);
    }
  }

  const AtomSpectrum atom(spec, params);
  const double r = map.half_length(), h = map.strip_height();
  const double w1 = 2.0 * r / static_cast<double>(options.columns);
  const LocalFrame& fr = map.frame();

  // Composite Gauss-Legendre over [lo, hi].
  auto piece = [&](double lo, double hi, auto&& integrand) {
    cplx s = 0.0;
    const double pw = (hi - lo) / options.panels;
    for (int p = 0; p < options.panels; ++p) {
      const double mid = lo + (p + 0.5) * pw;
      for (std::size_t i = 0; i < nodes.size(); ++i) s += wts[i] * integrand(mid + 0.5 * pw * nodes[i]);
    }
    return s * (0.5 * pw);
  };

  std::vector<cplx> left(options.columns), right(options.columns);
  parallel_for(options.columns, options.threads, [&](std::size_t c) {
    const double y1 = -r + (static_cast<double>(c) + 0.5) * w1;
    const double g = map.g(y1);
    auto lhs_f = [&](double x2) {
      const Point x = fr.to_global({y1, x2});
      return model.evaluate(x) * std::sqrt(2.0) * atom.psi(x);
    };
    auto rhs_f = [&](double y2) {
      const Point y{y1, y2};
      const Point x = fr.to_global(map.apply(y));
      return model.evaluate(x) * map.jacobian(y) * std::sqrt(2.0) * atom.psi(x);
    };
    left[c] = (piece(-h, g, lhs_f) + piece(g, h, lhs_f)) * w1;
    right[c] = (piece(-h, 0.0, rhs_f) + piece(0.0, h, rhs_f)) * w1;
  });
  ChangeOfVariablesResult res;
  for (std::size_t c = 0; c < options.columns; ++c) {
    res.lhs += left[c];
    res.rhs += right[c];
  }
  res.rel_defect = std::abs(res.lhs - res.rhs) / std::max(std::abs(res.lhs), 1e-300);
  return res;
}

std::size_t straightening_violations(const CartoonFunction& model, const TwistMap& map, std::size_t n) {
  const double r = map.half_length(), h = map.strip_height();
  std::size_t bad = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Point y{-r + 2 * r * (i + 0.5) / n, -h + 2 * h * (j + 0.5) / n};
      const bool above = model.above(map.frame().to_global(map.apply(y)));
      if (above != (y.y >= 0.0)) ++bad;
    }
  return bad;
}

DerivativeBounds h_derivative_bounds(const CartoonFunction& model, const TwistMap& map, std::size_t n1, std::size_t n2,
                                     double step) {
  if (n1 < 2 || n2 < 2) throw DomainError("h_derivative_bounds: grid too small");
  const double r = map.half_length(), h = map.strip_height();
  const double dl = step > 0.0 ? step : 1e-3 * r;
  const double reach = r - 3.0 * dl;
  if (!(reach > 0.0)) throw DomainError("h_derivative_bounds: step too large for the strip");
  auto H = [&](double y1, double y2) {
    const Point y{y1, y2};
    return model.evaluate(map.frame().to_global(map.apply(y))) * map.jacobian(y);
  };
  DerivativeBounds out;
  out.strip_height = h;
  std::vector<double> profile(n1, 0.0);
  for (std::size_t i = 0; i < n1; ++i) {
    const double y1 = -reach + 2.0 * reach * (i + 0.5) / n1;
    for (std::size_t j = 0; j < n2; ++j) {
      const double y2 = -h + 2.0 * h * (j + 0.5) / n2;
      const double f0 = H(y1, y2), p1 = H(y1 + dl, y2), m1 = H(y1 - dl, y2), p2 = H(y1 + 2 * dl, y2),
                   m2 = H(y1 - 2 * dl, y2);
      const std::array<double, 4> d{std::abs(f0), std::abs((-p2 + 8 * p1 - 8 * m1 + m2) / (12 * dl)),
                                    std::abs((-p2 + 16 * p1 - 30 * f0 + 16 * m1 - m2) / (12 * dl * dl)),
                                    std::abs((p2 - 2 * p1 + 2 * m1 - m2) / (2 * dl * dl * dl))};
      auto& sup = out.sup[y2 > 0.0 ? 0 : 1];
      for (int m = 0; m < 4; ++m) sup[m] = std::max(sup[m], d[m]);
      if (y2 > 0.0) profile[i] = std::max(profile[i], d[1]);
    }
  }
  for (std::size_t i = 0; i < n1; ++i) {
    const double y1 = -reach + 2.0 * reach * (i + 0.5) / n1;
    if (y1 > 0.0) {
      out.y1.push_back(y1);
      out.d1_profile.push_back(profile[i]);
    }
  }
  return out;
}

}  // namespace cvlab
