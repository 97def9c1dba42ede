#include "cvlab/frame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "cvlab/error.hpp"
#include "cvlab/numerics.hpp"
#include "cvlab/parallel.hpp"
#include "cvlab/windows.hpp"

namespace cvlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps an angle difference into (-pi, pi].
double wrap_angle(double x) {
  x = std::remainder(x, kTwoPi);
  return x <= -kPi ? x + kTwoPi : x;
}

long positive_mod(long v, long m) {
  const long r = v % m;
  return r < 0 ? r + m : r;
}

int ceil_half(int j) { return j >= 0 ? (j + 1) / 2 : -((-j) / 2); }

// Smallest integer >= n whose only prime factors are 2, 3, 5, 7.
std::size_t good_fft_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace

Point CurveletParams::major_axis() const { return {std::cos(theta), std::sin(theta)}; }
Point CurveletParams::minor_axis() const { return {-std::sin(theta), std::cos(theta)}; }

// ---- FrameSpec --------------------------------------------------------------

double FrameSpec::nyquist() const {
  return std::min(static_cast<double>(grid.cols) / (2.0 * grid.extent.x),
                  static_cast<double>(grid.rows) / (2.0 * grid.extent.y));
}

FrameSpec FrameSpec::for_grid(const GridSpec& grid, int j0, int base_angles, int smoothness) {
  FrameSpec spec;
  spec.grid = grid;
  spec.j0 = j0;
  spec.base_angles = base_angles;
  spec.window_smoothness = smoothness;
  spec.j_max = static_cast<int>(std::floor(std::log2(spec.nyquist()) + 1e-12));
  spec.validate();
  return spec;
}

void FrameSpec::validate() const {
  if (j0 < 1) throw DomainError("FrameSpec: j0 must be >= 1");
  if (j0 > j_max) throw DomainError("FrameSpec: j0 > j_max");
  if (base_angles < 4 || base_angles % 4 != 0) throw DomainError("FrameSpec: base_angles must be a multiple of 4");
  if (!(angular_transition > 0.0 && angular_transition <= 0.5))
    throw DomainError("FrameSpec: angular_transition must lie in (0, 1/2]");
  if (!(radial_flat >= 0.5 && radial_flat < 1.0)) throw DomainError("FrameSpec: radial_flat must lie in [1/2, 1)");
  if (window_smoothness < 1) throw DomainError("FrameSpec: window_smoothness must be >= 1");
  if (grid.rows == 0 || grid.cols == 0) throw DimensionError("FrameSpec: empty grid");
  if (!(grid.extent.x > 0 && grid.extent.y > 0)) throw DomainError("FrameSpec: extent must be positive");
  if (std::ldexp(1.0, j_max - 1) >= nyquist())
    throw ResolutionError("FrameSpec: level j_max=" + std::to_string(j_max) + " starts above Nyquist " +
                          std::to_string(nyquist()));
  if (std::ldexp(1.0, j0) >= nyquist()) throw ResolutionError("FrameSpec: coarse band reaches Nyquist");
}

int FrameSpec::angles(int j) const { return base_angles * (1 << (ceil_half(j) - ceil_half(j0))); }

double FrameSpec::continuous_angles(double a) const {
  return base_angles * std::pow(2.0, 0.5 * (-std::log2(a) - j0));
}

// ---- AtomSpectrum -------------------------------------------------------------

AtomSpectrum::AtomSpectrum(const FrameSpec& spec, const CurveletParams& params) : grid_(spec.grid), params_(params) {
  const double a = params.a;
  if (!(a > 0.0 && a < 1.0)) throw DomainError("curvelet scale a must lie in (0, 1)");
  const double cells = a / std::max(grid_.dx(), grid_.dy());
  if (cells < 4.0)
    throw ResolutionError("atom with a=" + std::to_string(a) + " spans " + std::to_string(cells) +
                          " grid cells across its minor axis (need >= 4)");
  const double n_angles = spec.continuous_angles(a);
  if (n_angles < 4.0) throw DomainError("atom scale too coarse for the angular tiling");
  const double width = kTwoPi / n_angles;
  const double direction = params.theta + 0.5 * kPi;
  const int order = spec.window_smoothness;

  const long R = static_cast<long>(grid_.rows), C = static_cast<long>(grid_.cols);
  const long kx_max = std::min<long>(C / 2 - 1, static_cast<long>(std::ceil(2.0 * grid_.extent.x / a)));
  const long ky_max = std::min<long>(R / 2 - 1, static_cast<long>(std::ceil(2.0 * grid_.extent.y / a)));
  double energy = 0.0;
  for (long ky = -ky_max; ky <= ky_max; ++ky) {
    for (long kx = -kx_max; kx <= kx_max; ++kx) {
      const Point xi{static_cast<double>(kx) / grid_.extent.x, static_cast<double>(ky) / grid_.extent.y};
      const double rho = norm(xi);
      const double radial = windows::bandpass(rho * a, order, spec.radial_flat);
      if (radial <= 0.0) continue;
      const double u = wrap_angle(std::atan2(xi.y, xi.x) - direction) / width;
      const double ang = windows::angular(u, order, spec.angular_transition);
      if (ang <= 0.0) continue;
      const double w = radial * ang;
      index_.push_back(static_cast<std::uint32_t>(positive_mod(ky, R) * C + positive_mod(kx, C)));
      mirror_.push_back(static_cast<std::uint32_t>(positive_mod(-ky, R) * C + positive_mod(-kx, C)));
      xi_.push_back(xi);
      weight_.push_back(w);
      energy += w * w;
    }
  }
  if (index_.empty()) throw ResolutionError("atom has empty frequency support on this grid");
  scale_ = 1.0 / std::sqrt(grid_.extent.x * grid_.extent.y * energy);
}

AtomSpectrum AtomSpectrum::at(Point b) const {
  AtomSpectrum copy = *this;
  copy.params_.b = b;
  return copy;
}

cplx AtomSpectrum::psi(Point x) const {
  const Point d = x - params_.b;
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < index_.size(); ++i) {
    const double phase = kTwoPi * dot(xi_[i], d);
    re += weight_[i] * std::cos(phase);
    im += weight_[i] * std::sin(phase);
  }
  return scale_ * cplx(re, im);
}

double AtomSpectrum::evaluate(Point x, AtomPhase phase) const {
  const cplx v = std::numbers::sqrt2 * psi(x);
  return phase == AtomPhase::Even ? v.real() : v.imag();
}

SampledField AtomSpectrum::synthesize(AtomPhase phase) const {
  std::vector<cplx> y(grid_.size());
  const Point shift = params_.b - grid_.origin;
  for (std::size_t i = 0; i < index_.size(); ++i)
    y[index_[i]] = weight_[i] * std::polar(1.0, -kTwoPi * dot(xi_[i], shift));
  fft2_inplace(y, grid_.rows, grid_.cols, /*inverse=*/true);
  const double s = std::numbers::sqrt2 * scale_ * std::sqrt(static_cast<double>(grid_.size()));
  std::vector<cplx> out(grid_.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = s * (phase == AtomPhase::Even ? y[n].real() : y[n].imag());
  return SampledField(grid_, std::move(out), true);
}

cplx AtomSpectrum::coefficient_from_spectrum(const SampledField& spectrum) const {
  return coefficient_from_spectrum(spectrum, params_.b);
}

cplx AtomSpectrum::coefficient_from_spectrum(const SampledField& spectrum, Point b) const {
  if (!same_grid(spectrum.grid(), grid_)) throw GridMismatchError("coefficient: spectrum grid differs from frame grid");
  const Point shift = b - grid_.origin;
  const auto F = spectrum.values();
  cplx acc = 0.0;
  for (std::size_t i = 0; i < index_.size(); ++i)
    acc += weight_[i] * std::polar(1.0, -kTwoPi * dot(xi_[i], shift)) * F[mirror_[i]];
  return std::numbers::sqrt2 * grid_.cell_area() * scale_ * std::sqrt(static_cast<double>(grid_.size())) * acc;
}

std::vector<cplx> AtomSpectrum::coefficient_map(const SampledField& spectrum) const {
  if (!same_grid(spectrum.grid(), grid_)) throw GridMismatchError("coefficient: spectrum grid differs from frame grid");
  std::vector<cplx> z(grid_.size());
  const auto F = spectrum.values();
  for (std::size_t i = 0; i < index_.size(); ++i) z[index_[i]] = weight_[i] * F[mirror_[i]];
  fft2_inplace(z, grid_.rows, grid_.cols, /*inverse=*/false);
  const double s = std::numbers::sqrt2 * grid_.cell_area() * scale_ * static_cast<double>(grid_.size());
  for (auto& v : z) v *= s;
  return z;
}

SampledField synthesize_atom(const FrameSpec& spec, const CurveletParams& params, AtomPhase phase) {
  return AtomSpectrum(spec, params).synthesize(phase);
}

namespace {
void require_frame_grid(const SampledField& f, const FrameSpec& spec) {
  if (!same_grid(f.grid(), spec.grid)) throw GridMismatchError("field grid does not match the frame grid");
}
}  // namespace

cplx coefficient(const SampledField& f, const FrameSpec& spec, const CurveletParams& params) {
  require_frame_grid(f, spec);
  const SampledField F = fft2(f, {.strict = false});
  return AtomSpectrum(spec, params).coefficient_from_spectrum(F);
}

CoefficientProbe::CoefficientProbe(const SampledField& f, const FrameSpec& spec)
    : spec_(spec), spectrum_((require_frame_grid(f, spec), fft2(f, {.strict = false}))) {}

cplx CoefficientProbe::operator()(const CurveletParams& params) const {
  return AtomSpectrum(spec_, params).coefficient_from_spectrum(spectrum_);
}

// ---- line moments ---------------------------------------------------------------

double line_moment(const std::function<double(Point)>& fn, Point center, Point direction, int order,
                   double half_length, double step) {
  if (!(half_length > 0.0) || !(step > 0.0)) throw DomainError("line_moment: bad half length or step");
  const Point dir = (1.0 / norm(direction)) * direction;
  const long n = static_cast<long>(std::ceil(half_length / step));
  const double h = half_length / static_cast<double>(n);
  double sum = 0.0;
  for (long i = -n; i <= n; ++i) {
    const double t = static_cast<double>(i) * h;
    const double w = (i == -n || i == n) ? 0.5 : 1.0;
    sum += w * std::pow(t, order) * fn(center + t * dir);
  }
  return sum * h;
}

double line_moment_scale(double sup_norm, int order, double half_length) {
  return sup_norm * 2.0 * std::pow(half_length, order + 1) / (order + 1);
}

cplx directional_moment(const FrameSpec& spec, const CurveletParams& params, int order, double line_offset,
                        MomentOptions options) {
  if (order < 0 || order > 2) throw DomainError("directional_moment: order must be 0, 1 or 2");
  const AtomSpectrum atom(spec, params);
  const auto& g = spec.grid;
  const double step = options.step > 0 ? options.step : 0.5 * std::min(g.dx(), g.dy());
  const Point center = params.b + line_offset * params.major_axis();
  const Point n = params.minor_axis();
  const Point lo = g.origin - Point{0.5 * g.dx(), 0.5 * g.dy()};
  const Point hi = lo + Point{g.extent.x, g.extent.y};
  auto inside = [&](Point p) { return p.x >= lo.x && p.y >= lo.y && p.x <= hi.x && p.y <= hi.y; };
  if (!inside(center)) throw DomainError("directional_moment: line centre lies outside the grid");
  // Longest symmetric chord through the centre that stays inside the grid.
  double chord = std::numeric_limits<double>::infinity();
  if (std::abs(n.x) > 1e-15) chord = std::min(chord, std::min(center.x - lo.x, hi.x - center.x) / std::abs(n.x));
  if (std::abs(n.y) > 1e-15) chord = std::min(chord, std::min(center.y - lo.y, hi.y - center.y) / std::abs(n.y));
  double half = options.half_length;
  if (half <= 0) {
    half = std::min(0.45 * std::min(g.extent.x, g.extent.y), chord);
  } else if (half > chord) {
    throw DomainError("directional_moment: line leaves the grid");
  }
  if (half < 4.0 * params.a) throw DomainError("directional_moment: line too short inside the grid");
  const double v = line_moment([&](Point x) { return atom.evaluate(x, options.phase); }, center, n, order, half, step);
  return {v, 0.0};
}

// ---- discrete frame -------------------------------------------------------------

bool Band::is_coarse() const { return l < 0; }

std::size_t CoefficientTable::total_count() const {
  std::size_t n = coarse.values.size();
  for (const auto& b : bands) n += b.values.size();
  return n;
}

double CoefficientTable::energy() const {
  double e = 0.0;
  for (double v : coarse.values) e += v * v;
  for (const auto& b : bands)
    for (double v : b.values) e += v * v;
  return e;
}

Point CoefficientTable::position(const Band& band, std::size_t k1, std::size_t k2) const {
  const auto& g = spec.grid;
  return {g.origin.x + static_cast<double>(k1) * g.extent.x / static_cast<double>(band.px),
          g.origin.y + static_cast<double>(k2) * g.extent.y / static_cast<double>(band.py)};
}

struct CurveletFrame::Plan {
  struct Wedge {
    int j = 0;
    int l = 0;  // complex wedge index in [0, L/2), or -1 for the coarse band
    int n_angles = 0;
    std::size_t px = 0, py = 0;
    std::vector<std::uint32_t> src;  // flat spectrum index
    std::vector<std::uint32_t> dst;  // flat index in the wrapped py x px rectangle
    std::vector<double> window;
  };
  Wedge coarse;
  std::vector<Wedge> wedges;
  std::vector<std::uint32_t> mirror;  // flat index of -k
};

namespace {

struct Sample {
  long wx, wy;  // signed frequency indices
  std::uint32_t flat;
  double value;
};

// Chooses the wrapping rectangle for a set of support points and fills dst.
void wrap_support(CurveletFrame::Plan::Wedge& w, const std::vector<Sample>& pts, double center_angle, long C, long R) {
  const double cx = std::cos(center_angle), sy = std::sin(center_angle);
  std::vector<long> ux(pts.size()), uy(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // Nyquist components are ambiguous; take the representative on the wedge's side.
    ux[i] = (pts[i].wx == -C / 2 && C % 2 == 0 && cx > 1e-12) ? C / 2 : pts[i].wx;
    uy[i] = (pts[i].wy == -R / 2 && R % 2 == 0 && sy > 1e-12) ? R / 2 : pts[i].wy;
  }
  const bool along_x = std::abs(cx) >= std::abs(sy);
  const auto& len = along_x ? ux : uy;
  const auto& wid = along_x ? uy : ux;
  const auto [lmin, lmax] = std::minmax_element(len.begin(), len.end());
  std::map<long, std::pair<long, long>> cross;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto [it, inserted] = cross.try_emplace(len[i], wid[i], wid[i]);
    if (!inserted) {
      it->second.first = std::min(it->second.first, wid[i]);
      it->second.second = std::max(it->second.second, wid[i]);
    }
  }
  long wspan = 1;
  for (const auto& [k, mm] : cross) wspan = std::max(wspan, mm.second - mm.first + 1);
  std::size_t plen = good_fft_size(static_cast<std::size_t>(*lmax - *lmin + 1));
  std::size_t pwid = good_fft_size(static_cast<std::size_t>(wspan));
  for (;;) {
    w.px = along_x ? plen : pwid;
    w.py = along_x ? pwid : plen;
    std::vector<char> used(w.px * w.py, 0);
    w.dst.assign(pts.size(), 0);
    bool collision = false;
    for (std::size_t i = 0; i < pts.size() && !collision; ++i) {
      const std::size_t q = static_cast<std::size_t>(positive_mod(uy[i], static_cast<long>(w.py))) * w.px +
                            static_cast<std::size_t>(positive_mod(ux[i], static_cast<long>(w.px)));
      if (used[q]) collision = true;
      used[q] = 1;
      w.dst[i] = static_cast<std::uint32_t>(q);
    }
    if (!collision) break;
    pwid = good_fft_size(pwid + 1);
  }
  w.src.resize(pts.size());
  w.window.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    w.src[i] = pts[i].flat;
    w.window[i] = pts[i].value;
  }
}

}  // namespace

CurveletFrame::CurveletFrame(FrameSpec spec) : spec_(std::move(spec)), plan_(std::make_unique<Plan>()) {
  spec_.validate();
  const auto& g = spec_.grid;
  const long R = static_cast<long>(g.rows), C = static_cast<long>(g.cols);
  const int order = spec_.window_smoothness;
  const int n_levels = spec_.j_max - spec_.j0 + 1;

  std::vector<Sample> coarse_pts;
  // Per level, per complex wedge.
  std::vector<std::vector<std::vector<Sample>>> pts(n_levels);
  for (int lev = 0; lev < n_levels; ++lev) pts[lev].resize(spec_.angles(spec_.j0 + lev) / 2);

  plan_->mirror.resize(g.size());
  for (long r = 0; r < R; ++r) {
    for (long c = 0; c < C; ++c) {
      const std::uint32_t flat = static_cast<std::uint32_t>(r * C + c);
      plan_->mirror[flat] = static_cast<std::uint32_t>(positive_mod(-r, R) * C + positive_mod(-c, C));
      const long wx = signed_frequency(static_cast<std::size_t>(c), g.cols);
      const long wy = signed_frequency(static_cast<std::size_t>(r), g.rows);
      const Point xi{static_cast<double>(wx) / g.extent.x, static_cast<double>(wy) / g.extent.y};
      // Same vector with Nyquist components flipped to +N/2.
      const Point xi_t{(C % 2 == 0 && wx == -C / 2) ? -xi.x : xi.x, (R % 2 == 0 && wy == -R / 2) ? -xi.y : xi.y};
      const double rho = norm(xi);
      const double low = windows::lowpass(rho / std::ldexp(1.0, spec_.j0), order, spec_.radial_flat);
      if (low > 0.0) coarse_pts.push_back({wx, wy, flat, low});
      if (rho == 0.0) continue;
      const double phi = std::atan2(xi.y, xi.x);
      const double phi_t = std::atan2(xi_t.y, xi_t.x);
      for (int lev = 0; lev < n_levels; ++lev) {
        const int j = spec_.j0 + lev;
        const double t = rho / std::ldexp(1.0, j);
        const double radial = j < spec_.j_max ? windows::bandpass(t, order, spec_.radial_flat) : windows::highpass(t, order, spec_.radial_flat);
        if (radial <= 0.0) continue;
        const int L = spec_.angles(j);
        const double width = kTwoPi / L;
        int cand[4];
        const long f0 = static_cast<long>(std::floor(phi / width));
        const long f1 = static_cast<long>(std::floor(phi_t / width));
        cand[0] = static_cast<int>(positive_mod(f0, L));
        cand[1] = static_cast<int>(positive_mod(f0 + 1, L));
        cand[2] = static_cast<int>(positive_mod(f1, L));
        cand[3] = static_cast<int>(positive_mod(f1 + 1, L));
        for (int ci = 0; ci < 4; ++ci) {
          const int l = cand[ci];
          if (l >= L / 2) continue;
          bool seen = false;
          for (int cj = 0; cj < ci; ++cj) seen = seen || cand[cj] == l;
          if (seen) continue;
          const double center = width * l;
          const double v0 = windows::angular(wrap_angle(phi - center) / width, order, spec_.angular_transition);
          const double v1 = windows::angular(wrap_angle(phi_t - center) / width, order, spec_.angular_transition);
          const double u2 = 0.5 * (v0 * v0 + v1 * v1);
          if (u2 <= 0.0) continue;
          pts[lev][l].push_back({wx, wy, flat, radial * std::sqrt(u2)});
        }
      }
    }
  }

  plan_->coarse.j = spec_.j0 - 1;
  plan_->coarse.l = -1;
  wrap_support(plan_->coarse, coarse_pts, 0.0, C, R);
  for (int lev = 0; lev < n_levels; ++lev) {
    const int j = spec_.j0 + lev;
    const int L = spec_.angles(j);
    for (int l = 0; l < L / 2; ++l) {
      Plan::Wedge w;
      w.j = j;
      w.l = l;
      w.n_angles = L;
      if (pts[lev][l].empty()) throw ResolutionError("empty curvelet wedge at level " + std::to_string(j));
      wrap_support(w, pts[lev][l], kTwoPi * l / L, C, R);
      plan_->wedges.push_back(std::move(w));
    }
  }
}

CurveletFrame::~CurveletFrame() = default;
CurveletFrame::CurveletFrame(CurveletFrame&&) noexcept = default;
CurveletFrame& CurveletFrame::operator=(CurveletFrame&&) noexcept = default;

std::size_t CurveletFrame::wedge_count() const { return plan_->wedges.size(); }

CoefficientTable CurveletFrame::zeros() const {
  CoefficientTable t;
  t.spec = spec_;
  t.coarse = {plan_->coarse.j, -1, plan_->coarse.px, plan_->coarse.py,
              std::vector<double>(plan_->coarse.px * plan_->coarse.py, 0.0)};
  int current_j = -1;
  std::size_t level_start = 0;
  for (const auto& w : plan_->wedges) {
    if (w.j != current_j) {
      current_j = w.j;
      level_start = t.bands.size();
      t.bands.resize(level_start + static_cast<std::size_t>(w.n_angles));
    }
    const int half = w.n_angles / 2;
    for (int phase = 0; phase < 2; ++phase) {
      Band& b = t.bands[level_start + static_cast<std::size_t>(w.l + phase * half)];
      b = {w.j, w.l + phase * half, w.px, w.py, std::vector<double>(w.px * w.py, 0.0)};
    }
  }
  return t;
}

namespace {
std::size_t band_slot(const CoefficientTable& t, int j, int l) {
  // Bands are stored by level then angle; levels are contiguous.
  std::size_t start = 0;
  for (int jj = t.spec.j0; jj < j; ++jj) start += static_cast<std::size_t>(t.spec.angles(jj));
  return start + static_cast<std::size_t>(l);
}
}  // namespace

CoefficientTable CurveletFrame::forward(const SampledField& f, unsigned threads) const {
  require_frame_grid(f, spec_);
  if (!f.is_real()) throw DomainError("forward: input field must be real");
  const SampledField F = fft2(f, {.strict = false});
  const auto spectrum = F.values();
  const double root_area = std::sqrt(spec_.grid.cell_area());
  CoefficientTable table = zeros();

  auto analyse = [&](const Plan::Wedge& w) {
    std::vector<cplx> buf(w.px * w.py);
    for (std::size_t i = 0; i < w.src.size(); ++i) buf[w.dst[i]] += spectrum[w.src[i]] * w.window[i];
    fft2_inplace(buf, w.py, w.px, /*inverse=*/true);
    for (auto& v : buf) v *= root_area;
    return buf;
  };

  {
    const auto buf = analyse(plan_->coarse);
    for (std::size_t i = 0; i < buf.size(); ++i) table.coarse.values[i] = buf[i].real();
  }
  parallel_for(plan_->wedges.size(), threads, [&](std::size_t wi) {
    const auto& w = plan_->wedges[wi];
    const auto buf = analyse(w);
    Band& cos_band = table.bands[band_slot(table, w.j, w.l)];
    Band& sin_band = table.bands[band_slot(table, w.j, w.l + w.n_angles / 2)];
    for (std::size_t i = 0; i < buf.size(); ++i) {
      cos_band.values[i] = std::numbers::sqrt2 * buf[i].real();
      sin_band.values[i] = std::numbers::sqrt2 * buf[i].imag();
    }
  });
  return table;
}

SampledField CurveletFrame::inverse(const CoefficientTable& table, unsigned threads) const {
  const auto& g = spec_.grid;
  auto mismatch = [](const Band& b, const Plan::Wedge& w) {
    return b.px != w.px || b.py != w.py || b.values.size() != w.px * w.py || b.j != w.j;
  };
  const std::size_t expected = 2 * plan_->wedges.size();
  if (table.bands.size() != expected) throw DomainError("inverse: coefficient table is missing bands");
  if (mismatch(table.coarse, plan_->coarse)) throw DomainError("inverse: coarse band does not match the frame");

  const double inv_root_area = 1.0 / std::sqrt(g.cell_area());
  std::vector<std::vector<cplx>> spectra(plan_->wedges.size());
  parallel_for(plan_->wedges.size(), threads, [&](std::size_t wi) {
    const auto& w = plan_->wedges[wi];
    const Band& cb = table.bands[band_slot(table, w.j, w.l)];
    const Band& sb = table.bands[band_slot(table, w.j, w.l + w.n_angles / 2)];
    if (mismatch(cb, w) || mismatch(sb, w)) throw DomainError("inverse: band shape does not match the frame");
    std::vector<cplx> buf(w.px * w.py);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = cplx(cb.values[i], sb.values[i]) / std::numbers::sqrt2;
    fft2_inplace(buf, w.py, w.px, /*inverse=*/false);
    spectra[wi] = std::move(buf);
  });

  std::vector<cplx> G(g.size());
  {
    const auto& w = plan_->coarse;
    std::vector<cplx> buf(table.coarse.values.begin(), table.coarse.values.end());
    fft2_inplace(buf, w.py, w.px, false);
    for (std::size_t i = 0; i < w.src.size(); ++i) G[w.src[i]] += w.window[i] * inv_root_area * buf[w.dst[i]];
  }
  // Fixed accumulation order keeps the result independent of the thread count.
  for (std::size_t wi = 0; wi < plan_->wedges.size(); ++wi) {
    const auto& w = plan_->wedges[wi];
    const auto& buf = spectra[wi];
    for (std::size_t i = 0; i < w.src.size(); ++i) G[w.src[i]] += 2.0 * w.window[i] * inv_root_area * buf[w.dst[i]];
  }
  fft2_inplace(G, g.rows, g.cols, /*inverse=*/true);
  std::vector<cplx> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = G[i].real();
  return SampledField(g, std::move(out), true);
}

std::vector<double> CurveletFrame::window_energy() const {
  std::vector<double> e(spec_.grid.size(), 0.0);
  for (std::size_t i = 0; i < plan_->coarse.src.size(); ++i)
    e[plan_->coarse.src[i]] += plan_->coarse.window[i] * plan_->coarse.window[i];
  for (const auto& w : plan_->wedges) {
    for (std::size_t i = 0; i < w.src.size(); ++i) {
      const double u2 = w.window[i] * w.window[i];
      e[w.src[i]] += u2;
      e[plan_->mirror[w.src[i]]] += u2;
    }
  }
  return e;
}

CoefficientTable forward(const SampledField& f, const FrameSpec& spec, unsigned threads) {
  return CurveletFrame(spec).forward(f, threads);
}

SampledField inverse(const CoefficientTable& table, unsigned threads) {
  return CurveletFrame(table.spec).inverse(table, threads);
}

}  // namespace cvlab
