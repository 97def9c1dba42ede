#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cvlab/error.hpp"
#include "cvlab/frame.hpp"
#include "cvlab/numerics.hpp"
#include "cvlab/windows.hpp"
#include "doctest.h"

using namespace cvlab;

namespace {

constexpr double kPi = std::numbers::pi;

SampledField random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::vector<double> v(g.size());
  for (auto& x : v) x = n(rng);
  return SampledField::from_real(g, v);
}

double sup_norm(const SampledField& f) {
  double s = 0.0;
  for (const auto& z : f.values()) s = std::max(s, std::abs(z));
  return s;
}

// Random real field with every frequency above kmax removed.
SampledField band_limited(const GridSpec& g, unsigned seed, double kmax) {
  auto F = fft2(random_field(g, seed));
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c) {
      const double kx = static_cast<double>(signed_frequency(c, g.cols));
      const double ky = static_cast<double>(signed_frequency(r, g.rows));
      if (std::hypot(kx, ky) > kmax) F(r, c) = 0.0;
    }
  return ifft2(F).as_real(true);
}

}  // namespace

TEST_CASE("smoothstep is symmetric and monotone") {
  for (int n : {1, 3, 5}) {
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double t = i / 100.0;
      const double s = windows::smoothstep(t, n);
      CHECK(std::abs(s + windows::smoothstep(1.0 - t, n) - 1.0) < 1e-14);
      CHECK(s >= prev - 1e-15);
      prev = s;
    }
    CHECK(windows::smoothstep(0.0, n) == 0.0);
    CHECK(windows::smoothstep(1.0, n) == 1.0);
  }
}

TEST_CASE("radial and angular windows partition unity") {
  for (double flat : {0.5, 0.6}) {
    for (int i = 1; i < 400; ++i) {
      const double t = i / 100.0;
      const double lo = windows::lowpass(t / 2, 5, flat), hi = windows::lowpass(t, 5, flat);
      CHECK(std::abs(lo * lo - hi * hi - std::pow(windows::bandpass(t, 5, flat), 2)) < 1e-14);
      CHECK(std::abs(std::pow(windows::highpass(t, 5, flat), 2) + hi * hi - 1.0) < 1e-14);
    }
  }
  for (double tr : {0.5, 0.25}) {
    for (int i = 0; i < 100; ++i) {
      const double u = i / 100.0 - 0.5;
      double s = 0.0;
      for (int m = -2; m <= 2; ++m) s += std::pow(windows::angular(u + m, 5, tr), 2);
      CHECK(std::abs(s - 1.0) < 1e-14);
    }
  }
}

TEST_CASE("FrameSpec defaults and validation") {
  auto spec = FrameSpec::for_grid(GridSpec::unit(256));
  CHECK(spec.j0 == 2);
  CHECK(spec.j_max == 7);
  CHECK(spec.angles(2) == 16);
  CHECK(spec.angles(3) == 32);
  CHECK(spec.angles(4) == 32);
  CHECK(spec.angles(5) == 64);
  spec.validate();
  auto bad = spec;
  bad.base_angles = 10;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = spec;
  bad.j_max = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("squared windows sum to one on the frequency grid") {
  CurveletFrame frame(FrameSpec::for_grid(GridSpec::unit(128)));
  const auto e = frame.window_energy();
  double worst = 0.0;
  for (double v : e) worst = std::max(worst, std::abs(v - 1.0));
  CHECK(worst <= 1e-10);
}

TEST_CASE("forward of zero is zero and inverse of zeros is zero") {
  CurveletFrame frame(FrameSpec::for_grid(GridSpec::unit(64)));
  auto t = frame.forward(SampledField::zeros(GridSpec::unit(64)));
  CHECK(t.energy() == 0.0);
  auto f = frame.inverse(frame.zeros());
  CHECK(sup_norm(f) == 0.0);
}

TEST_CASE("Parseval over 100 random fields") {
  const GridSpec g = GridSpec::unit(256);
  CurveletFrame frame(FrameSpec::for_grid(g));
  double worst = 0.0;
  for (unsigned s = 0; s < 100; ++s) {
    auto f = random_field(g, 100 + s);
    auto t = frame.forward(f);
    worst = std::max(worst, std::abs(t.energy() - f.norm_sq()) / f.norm_sq());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("forward/inverse round trip") {
  const GridSpec g = GridSpec::unit(256);
  CurveletFrame frame(FrameSpec::for_grid(g));
  auto f = random_field(g, 9);
  auto back = frame.inverse(frame.forward(f));
  CHECK(back.is_real());
  CHECK((back - f).norm_sq() / f.norm_sq() <= 1e-12);
}

TEST_CASE("round trip on a non-square grid with non-unit extent") {
  const GridSpec g = GridSpec::cell_centered(64, 128, {2.0, 1.0}, {-1.0, 0.0});
  CurveletFrame frame(FrameSpec::for_grid(g));
  auto f = random_field(g, 10);
  auto t = frame.forward(f);
  CHECK(std::abs(t.energy() / f.norm_sq() - 1.0) < 1e-10);
  CHECK((frame.inverse(t) - f).norm_sq() / f.norm_sq() < 1e-12);
}

TEST_CASE("forward is independent of the thread count") {
  const GridSpec g = GridSpec::unit(128);
  CurveletFrame frame(FrameSpec::for_grid(g));
  auto f = random_field(g, 3);
  auto a = frame.forward(f, 1), b = frame.forward(f, 4);
  REQUIRE(a.bands.size() == b.bands.size());
  for (std::size_t i = 0; i < a.bands.size(); ++i) CHECK(a.bands[i].values == b.bands[i].values);
  CHECK(frame.inverse(a, 1).values().size() == frame.inverse(a, 3).values().size());
  auto fa = frame.inverse(a, 1), fb = frame.inverse(a, 3);
  CHECK(std::equal(fa.values().begin(), fa.values().end(), fb.values().begin()));
}

TEST_CASE("frame errors") {
  CurveletFrame frame(FrameSpec::for_grid(GridSpec::unit(64)));
  CHECK_THROWS_AS(frame.forward(SampledField::zeros(GridSpec::unit(32))), GridMismatchError);
  auto t = frame.zeros();
  t.bands.pop_back();
  CHECK_THROWS_AS(frame.inverse(t), Error);
  t = frame.zeros();
  t.bands[3].values.resize(1);
  CHECK_THROWS_AS(frame.inverse(t), Error);
}

TEST_CASE("coarse band of a smooth bump reconstructs a smooth approximation") {
  const GridSpec g = GridSpec::unit(256);
  const auto spec = FrameSpec::for_grid(g);
  CurveletFrame frame(spec);
  auto bump = SampledField::sample(g, [](Point p) {
    const double r2 = (p.x - 0.5) * (p.x - 0.5) + (p.y - 0.5) * (p.y - 0.5);
    return cplx(std::exp(-r2 / (2 * 0.1 * 0.1)));
  });
  auto t = frame.forward(bump);
  for (auto& b : t.bands) std::fill(b.values.begin(), b.values.end(), 0.0);
  auto rec = frame.inverse(t);
  CHECK((rec - bump).norm_sq() / bump.norm_sq() <= 0.25);

  auto rt = frame.forward(rec);
  double finest = 0.0;
  for (const auto& b : rt.bands)
    if (b.j == spec.j_max)
      for (double v : b.values) finest += v * v;
  CHECK(finest <= 1e-3 * rt.energy());
}

TEST_CASE("synthesized atoms have unit norm") {
  const auto spec = FrameSpec::for_grid(GridSpec::unit(256));
  for (double a : {1.0 / 16, 1.0 / 32, 0.02}) {
    for (double th : {0.0, 0.4, 2.0, 4.5}) {
      CurveletParams p{a, th, {0.43, 0.58}};
      CHECK(std::abs(synthesize_atom(spec, p).norm_sq() - 1.0) < 1e-6);
      CHECK(std::abs(synthesize_atom(spec, p, AtomPhase::Odd).norm_sq() - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("atom at theta + pi is the reflection through b") {
  const GridSpec g = GridSpec::unit(128);
  const auto spec = FrameSpec::for_grid(g);
  const std::size_t rb = 70, cb = 50;
  CurveletParams p{1.0 / 16, 0.7, g.sample(rb, cb)};
  auto f = synthesize_atom(spec, p);
  p.theta += kPi;
  auto h = synthesize_atom(spec, p);
  double err = 0.0;
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c) {
      const std::size_t rr = (2 * rb + g.rows - r) % g.rows, cc = (2 * cb + g.cols - c) % g.cols;
      err = std::max(err, std::abs(h(r, c) - f(rr, cc)));
    }
  CHECK(err <= 1e-8);
}

TEST_CASE("atom energy is concentrated on a parabolic ellipse") {
  const GridSpec g = GridSpec::unit(256);
  const auto spec = FrameSpec::for_grid(g);
  const double a = 1.0 / 32;
  for (double th : {0.0, 0.9}) {
    CurveletParams p{a, th, {0.5, 0.5}};
    auto atom = synthesize_atom(spec, p);
    double tot = 0.0, out = 0.0;
    std::vector<std::pair<double, double>> along, across;
    for (std::size_t r = 0; r < g.rows; ++r)
      for (std::size_t c = 0; c < g.cols; ++c) {
        const Point x = g.sample(r, c) - p.b;
        const double u = dot(x, p.major_axis()), v = dot(x, p.minor_axis());
        const double e = std::norm(atom(r, c));
        tot += e;
        if (std::pow(u / (5 * std::sqrt(a)), 2) + std::pow(v / (5 * a), 2) > 1.0) out += e;
        along.emplace_back(u, e);
        across.emplace_back(v, e);
      }
    CHECK(out / tot <= 0.01);

    if (th == 0.0) {
      // Width of the central band holding 99% of the marginal energy along each axis.
      auto span99 = [tot](std::vector<std::pair<double, double>> m) {
        std::sort(m.begin(), m.end());
        double acc = 0.0, lo = 0.0, hi = 0.0;
        bool have_lo = false;
        for (const auto& [x, e] : m) {
          acc += e;
          if (!have_lo && acc >= 0.005 * tot) lo = x, have_lo = true;
          if (acc <= 0.995 * tot) hi = x;
        }
        return hi - lo;
      };
      const double ratio = span99(along) / span99(across);
      CHECK(ratio >= 0.5 / std::sqrt(a));
      CHECK(ratio <= 2.0 / std::sqrt(a));
    }
  }
}

TEST_CASE("atom frequency support sits in the expected wedge") {
  const GridSpec g = GridSpec::unit(256);
  const auto spec = FrameSpec::for_grid(g);
  const double a = 1.0 / 32, th = 0.3;
  auto F = fft2(synthesize_atom(spec, {a, th, {0.5, 0.5}}));
  const Point n{-std::sin(th), std::cos(th)};
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c) {
      if (std::abs(F(r, c)) < 1e-12) continue;
      const Point xi{static_cast<double>(signed_frequency(c, g.cols)), static_cast<double>(signed_frequency(r, g.rows))};
      const double rho = norm(xi);
      CHECK(rho * a > 0.5);
      CHECK(rho * a < 2.0);
      const double cosang = std::abs(dot(xi, n)) / rho;
      CHECK(std::acos(std::min(1.0, cosang)) < 4.0 * std::sqrt(a));
    }
}

TEST_CASE("atoms below grid resolution are rejected") {
  const auto spec = FrameSpec::for_grid(GridSpec::unit(64));
  CHECK_THROWS_AS(synthesize_atom(spec, {1.0 / 32, 0.0, {0.5, 0.5}}), ResolutionError);
  CHECK_THROWS_AS(synthesize_atom(spec, {1.5, 0.0, {0.5, 0.5}}), DomainError);
}

TEST_CASE("coefficient examples") {
  const GridSpec g = GridSpec::unit(256);
  const auto spec = FrameSpec::for_grid(g);
  CurveletParams p{1.0 / 32, 1.1, {0.47, 0.55}};
  CHECK(std::abs(coefficient(SampledField::zeros(g), spec, p)) == 0.0);
  CHECK(std::abs(coefficient(synthesize_atom(spec, p), spec, p) - 1.0) < 1e-6);

  auto one = SampledField::sample(g, [](Point) { return cplx(1.0); });
  CHECK(std::abs(coefficient(one, spec, p)) < 1e-8);
  auto atom = synthesize_atom(spec, p);
  CHECK(std::abs(integrate(atom)) < 1e-8);

  CHECK_THROWS_AS(coefficient(SampledField::zeros(GridSpec::unit(128)), spec, p), GridMismatchError);
}

TEST_CASE("coefficient agrees with direct quadrature on band-limited fields") {
  const GridSpec g = GridSpec::unit(128);
  const auto spec = FrameSpec::for_grid(g);
  for (unsigned s = 0; s < 3; ++s) {
    auto f = band_limited(g, 200 + s, 40.0);
    CoefficientProbe probe(f, spec);
    for (double th : {0.2, 1.3, 2.9}) {
      CurveletParams p{1.0 / 16, th, {0.3 + 0.1 * s, 0.6}};
      const auto ge = synthesize_atom(spec, p, AtomPhase::Even);
      const auto go = synthesize_atom(spec, p, AtomPhase::Odd);
      const cplx oracle(integrate(hadamard(f, ge)).real(), integrate(hadamard(f, go)).real());
      const cplx c = probe(p);
      CHECK(std::abs(c - oracle) <= 1e-8 * std::max(std::abs(oracle), 1e-300));
      CHECK(std::abs(c - coefficient(f, spec, p)) <= 1e-12 * std::abs(c));
    }
  }
}

TEST_CASE("coefficient map matches pointwise coefficients") {
  const GridSpec g = GridSpec::unit(64);
  const auto spec = FrameSpec::for_grid(g);
  auto f = random_field(g, 4);
  const auto F = fft2(f);
  AtomSpectrum atom(spec, {1.0 / 8, 0.8, {0.5, 0.5}});
  auto map = atom.coefficient_map(F);
  for (std::size_t r : {0u, 17u, 40u})
    for (std::size_t c : {3u, 31u}) {
      const cplx direct = atom.coefficient_from_spectrum(F, g.sample(r, c));
      CHECK(std::abs(map[r * g.cols + c] - direct) < 1e-12 * (1.0 + std::abs(direct)));
    }
}

TEST_CASE("directional vanishing moments") {
  const GridSpec g = GridSpec::unit(512);
  const auto spec = FrameSpec::for_grid(g);
  for (double th : {0.0, 0.6, 2.2}) {
    CurveletParams p{1.0 / 64, th, {0.5, 0.5}};
    const double sup = sup_norm(synthesize_atom(spec, p));
    const double span = std::min(0.25, 2 * std::sqrt(p.a));
    for (int order = 0; order <= 2; ++order) {
      double worst = 0.0, scale = 0.0;
      for (int o = 0; o < 20; ++o) {
        const double off = span * (-1.0 + 2.0 * o / 19.0);
        MomentOptions opt;
        opt.half_length = 0.4;
        worst = std::max(worst, std::abs(directional_moment(spec, p, order, off, opt)));
        scale = line_moment_scale(sup, order, opt.half_length);
      }
      CHECK(worst <= 1e-6 * scale);
    }
  }
}

TEST_CASE("an anisotropic Gaussian has no vanishing moment") {
  const double a = 1.0 / 64, th = 0.6;
  const Point b{0.5, 0.5}, t{std::cos(th), std::sin(th)}, n{-std::sin(th), std::cos(th)};
  auto gauss = [&](Point x) {
    const double u = dot(x - b, t) / std::sqrt(a), v = dot(x - b, n) / a;
    return std::exp(-0.5 * (u * u + v * v));
  };
  const double m = line_moment(gauss, b, n, 0, 0.4, 1.0 / 1024);
  CHECK(m >= 1e-3 * line_moment_scale(1.0, 0, 0.4));
}

TEST_CASE("directional moment rejects lines outside the grid") {
  const auto spec = FrameSpec::for_grid(GridSpec::unit(256));
  CurveletParams p{1.0 / 32, 0.0, {0.5, 0.5}};
  MomentOptions opt;
  opt.half_length = 0.9;
  CHECK_THROWS_AS(directional_moment(spec, p, 0, 0.0, opt), DomainError);
  CHECK_THROWS_AS(directional_moment(spec, p, 0, 2.0), DomainError);
  CHECK_THROWS(directional_moment(spec, p, 3, 0.0));
}

TEST_CASE("atom peak: forward of a synthesized atom peaks at its index with magnitude at least one half") {
  const GridSpec g = GridSpec::unit(512);
  const auto spec = FrameSpec::for_grid(g);
  CurveletFrame frame(spec);
  for (int j : {5, 6}) {
    const int L = spec.angles(j), l = 3;
    auto z = frame.zeros();
    const Band* target = nullptr;
    for (const auto& b : z.bands)
      if (b.j == j && b.l == l) target = &b;
    REQUIRE(target != nullptr);
    // Wedge l is centred on frequency angle 2 pi l / L; the major axis is perpendicular.
    CurveletParams p{std::ldexp(1.0, -j), 2 * kPi * l / L - kPi / 2, z.position(*target, target->px / 2, target->py / 2)};
    auto t = frame.forward(synthesize_atom(spec, p));
    double best = 0.0;
    int bj = 0, bl = 0;
    for (const auto& b : t.bands)
      for (double v : b.values)
        if (std::abs(v) > best) best = std::abs(v), bj = b.j, bl = b.l;
    CAPTURE(j);
    CAPTURE(best);
    CHECK(std::abs(bj - j) <= 1);
    const int dl = std::abs(bl - l);
    CHECK((bj != j || dl <= 1 || dl == L - 1));
    CHECK(best >= 0.5);
  }
}
