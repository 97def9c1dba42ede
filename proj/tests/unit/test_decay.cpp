#include <cmath>
#include <numbers>
#include <random>

#include "cvlab/decay.hpp"
#include "cvlab/error.hpp"
#include "doctest.h"

using namespace cvlab;

namespace {

EdgeGeometry geom(double theta_prime, double a, double L) {
  EdgeGeometry g;
  g.has_edge = true;
  g.theta_prime = theta_prime;
  g.k = theta_prime / std::sqrt(a);
  g.L = L;
  g.multiplicity = 1;
  return g;
}

SweepContext small_context(std::size_t n, unsigned threads = 1) {
  SweepContext ctx;
  ctx.grid = GridSpec::unit(n);
  ctx.threads = threads;
  return ctx;
}

// Samples following magnitude = c x^slope.
SweepResult synthetic(const std::string& name, double slope, Branch branch) {
  SweepResult r;
  r.name = name;
  r.fit_range = {0.0, 1e300};
  for (int i = 0; i < 8; ++i) {
    DecaySample s;
    s.x = std::ldexp(1.0, -i);
    s.magnitude = 0.3 * std::pow(s.x, slope);
    s.label.branch = branch;
    r.samples.push_back(s);
  }
  return r;
}

}  // namespace

TEST_CASE("regime classification examples") {
  const double a = 1.0 / 64;
  for (double c : {0.01, 1.0, 5.0}) {
    RegimeThresholds th;
    th.c_align = c;
    CHECK(classify_regime(geom(0.0, a, 3.0), a, th).branch == Branch::Aligned);
  }
  CHECK(classify_regime(geom(10 * std::sqrt(a), a, 0.0), a).branch == Branch::TiltedNear);
  auto far = classify_regime(geom(10 * std::sqrt(a), a, 100.0), a);
  CHECK(far.branch == Branch::TiltedFar);
  CHECK_FALSE(far.near_boundary);
  // sqrt(10) / 5 lies inside the factor-2 band.
  CHECK(classify_regime(geom(10 * std::sqrt(a), a, 5.0), a).near_boundary);
  CHECK(classify_regime(EdgeGeometry{}, a).branch == Branch::Aligned);
  CHECK(to_string(Branch::TiltedFar) == "TILTED_FAR");
  CHECK(branch_from_string("TILTED_NEAR") == Branch::TiltedNear);
  CHECK_THROWS_AS(branch_from_string("SIDEWAYS"), ConfigError);
}

TEST_CASE("strict-interior labels do not flip when thresholds are refined") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = std::ldexp(1.0, -(3 + static_cast<int>(u(rng) * 6)));
    const double k = 1.0 + 15.0 * u(rng);
    const double L = 2.0 * k * (1.0 + 4.0 * u(rng)) + 1e-9;
    for (double c : {0.5, 1.0, 2.0})
      for (double eps : {0.5, 1.0, 1.5}) {
        RegimeThresholds th{c, eps, 2.0};
        CHECK(classify_regime(geom(0.0, a, L), a, th).branch == Branch::Aligned);
        if (k > c) CHECK(classify_regime(geom(k * std::sqrt(a), a, L), a, th).branch == Branch::TiltedFar);
      }
  }
}

TEST_CASE("fit over samples") {
  auto s = synthetic("scale", 0.75, Branch::Aligned);
  auto f = fit_samples(s.samples, s.fit_range);
  REQUIRE_FALSE(f.degenerate);
  CHECK(f.fit.slope == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(f.fit.r_squared == doctest::Approx(1.0));
  CHECK(fit_samples(s.samples, s.fit_range, Branch::TiltedFar).degenerate);
  s.samples[3].magnitude = 0.0;
  CHECK(fit_samples(s.samples, s.fit_range).degenerate);
  // Near-boundary samples are excluded.
  auto t = synthetic("x", -2.0, Branch::TiltedNear);
  t.samples[0].magnitude = 1e6;
  t.samples[0].label.near_boundary = true;
  CHECK(fit_samples(t.samples, t.fit_range).fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("zero model gives a degenerate fit") {
  ScaleSweepOptions o;
  o.policy = AlignmentPolicy::SmoothRegion;
  o.j_min = 3;
  o.j_max = 5;
  o.angles = 2;
  auto r = sweep_scale(zero_model(), o, small_context(128));
  REQUIRE(r.samples.size() == 3);
  for (const auto& s : r.samples) CHECK(s.magnitude == 0.0);
  CHECK(r.fit.degenerate);
  CHECK_THROWS_AS(sweep_scale(zero_model(), ScaleSweepOptions{}, small_context(128)), DomainError);
}

TEST_CASE("verdicts") {
  ClaimsConfig cfg = claims_from_json_text(R"({
    "claims": [
      {"name": "edge", "sweep": "scale", "branch": "ALIGNED", "window": [0.6, 0.9], "min_r2": 0.9},
      {"name": "tail", "sweep": "distance", "branch": "ALIGNED", "window": [null, -2.0]},
      {"name": "missing", "sweep": "angle", "window": [null, -2.5]}
    ]})");
  auto pass = verdict({synthetic("scale", 0.75, Branch::Aligned), synthetic("distance", -3.0, Branch::Aligned)}, cfg);
  CHECK(pass.pass);
  CHECK(pass.results[0].status == ClaimStatus::Pass);
  CHECK(pass.results[2].status == ClaimStatus::Skipped);
  CHECK(pass.to_json().find("\"verdict\": \"PASS\"") != std::string::npos);

  auto fail = verdict({synthetic("scale", 1.5, Branch::Aligned), synthetic("distance", -3.0, Branch::Aligned)}, cfg);
  CHECK_FALSE(fail.pass);
  CHECK(fail.results[0].status == ClaimStatus::Fail);
  CHECK(fail.results[0].reason.find("ALIGNED") != std::string::npos);
  CHECK(fail.results[1].status == ClaimStatus::Pass);

  // Samples of the wrong branch leave nothing to fit.
  auto wrong = verdict({synthetic("scale", 0.75, Branch::TiltedFar)}, cfg);
  CHECK(wrong.results[0].status == ClaimStatus::Fail);
  CHECK(verdict({}, cfg).pass == false);

  CHECK_THROWS_AS(claims_from_json_text(R"({"claims": [{"name": "x", "sweep": "scale"}]})"), ConfigError);
  CHECK_THROWS_AS(claims_from_json_text(R"({"claims": [], "extra": 1})"), ConfigError);
  CHECK_THROWS_AS(claims_from_json_text(R"({"thresholds": {"epsilon": 2.5}, "claims": []})"), ConfigError);
}

TEST_CASE("distance sweep on a straight edge") {
  DistanceSweepOptions o;
  o.j = 6;
  for (int L = 0; L <= 10; ++L) o.offsets.push_back(L);
  o.fit_range = {2.0, 10.0};
  auto r = sweep_distance(straight_edge_model(0.5, 0.0), o, small_context(512));
  REQUIRE(r.samples.size() == 11);
  for (int L = 0; L <= 10; ++L) CHECK(r.samples[L].geom.L == doctest::Approx(L).epsilon(1e-9));
  for (const auto& s : r.samples) CHECK(s.magnitude <= r.samples[0].magnitude);
  CHECK(r.samples[8].magnitude <= 0.25 * r.samples[4].magnitude);
  CHECK(r.samples[0].label.branch == Branch::Aligned);
  REQUIRE_FALSE(r.fit.degenerate);
  CHECK(r.fit.fit.slope <= -2.0);
}

TEST_CASE("angle sweep is symmetric and peaks at k = 0") {
  AngleSweepOptions o;
  o.j = 6;
  o.ks = {0.0, 1.0, 2.0, 4.0, 8.0, -1.0, -2.0, -4.0, -8.0, 20.0};
  auto r = sweep_angle(straight_edge_model(0.5, 0.0), o, small_context(512));
  REQUIRE(r.samples.size() == 9);  // k = 20 exceeds the angle limit
  for (const auto& s : r.samples) CHECK(s.magnitude <= r.samples[0].magnitude);
  for (int i = 1; i <= 4; ++i) {
    const double m1 = r.samples[i].magnitude, m2 = r.samples[i + 4].magnitude;
    CHECK(std::abs(m1 - m2) <= 1e-8 * std::max(m1, m2));
    CHECK(r.samples[i].x == doctest::Approx(std::abs(o.ks[i])).epsilon(1e-9));
  }
  CHECK(r.samples[3].label.branch == Branch::TiltedNear);
}

TEST_CASE("edge model scale sweep stays under the a^{3/4} envelope") {
  ScaleSweepOptions o;
  o.j_min = 3;
  o.j_max = 7;
  auto r = sweep_scale(straight_edge_model(0.5, 0.0), o, small_context(512));
  const double c = ClaimsConfig{}.envelope_constant;
  for (double ratio : envelope_ratios(r)) {
    CHECK(ratio <= c);
    CHECK(ratio >= 0.5 * c);
  }
  REQUIRE_FALSE(r.fit.degenerate);
  CHECK(r.fit.fit.slope == doctest::Approx(0.75).epsilon(0.2));
  for (const auto& s : r.samples) CHECK(s.geom.L <= 2.0 + 1e-9);
}

TEST_CASE("smooth model coefficients stay below the smooth-region maximum") {
  ScaleSweepOptions o;
  o.policy = AlignmentPolicy::SmoothRegion;
  o.j_min = 5;
  o.j_max = 6;
  o.angles = 8;
  o.window = 0.35;
  const auto ctx = small_context(256);
  auto m = smooth_kink_model();
  auto r = sweep_scale(m, o, ctx);
  CoefficientProbe probe(rasterize(m, ctx.grid), ctx.frame_spec());
  for (int i = 0; i < 2; ++i) {
    const double a = std::ldexp(1.0, -(5 + i));
    // Orientations of the sweep, positions snapped to the grid it searches.
    for (double th : {0.0, 3 * std::numbers::pi / 8}) {
      const Point n{-std::sin(th), std::cos(th)};
      for (int L = 0; L <= 20; L += 2) {
        const Point q = Point{0.5, 0.5} + (L * a) * n;
        const Point b = ctx.grid.sample(static_cast<std::size_t>(std::lround(q.y * 256 - 0.5)),
                                        static_cast<std::size_t>(std::lround(q.x * 256 - 0.5)));
        CHECK(std::abs(probe({a, th, b})) <= r.samples[i].magnitude * (1 + 1e-12));
      }
    }
  }
  CHECK(r.samples[1].magnitude < r.samples[0].magnitude);
}

TEST_CASE("coefficient magnitudes are invariant under grid-exact rigid motions") {
  const GridSpec g = GridSpec::unit(256);
  const FrameSpec spec = FrameSpec::for_grid(g);
  auto m = kinked_sides(parabola_edge_model());
  auto f = rasterize(m, g);
  const std::size_t n = g.rows, shift_r = 17, shift_c = 40;
  // Circular shift by whole pixels and rotation by a quarter turn about the centre.
  SampledField shifted = SampledField::zeros(g), rotated = SampledField::zeros(g);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      shifted((r + shift_r) % n, (c + shift_c) % n) = f(r, c);
      // (x, y) -> (1 - y, x)
      rotated(c, n - 1 - r) = f(r, c);
    }
  const double dx = g.dx(), dy = g.dy();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.3, 0.7), t(0.0, std::numbers::pi);
  for (int i = 0; i < 10; ++i) {
    const CurveletParams p{1.0 / 32, t(rng), {u(rng), u(rng)}};
    const double ref = std::abs(coefficient(f, spec, p));
    const CurveletParams ps{p.a, p.theta, p.b + Point{shift_c * dx, shift_r * dy}};
    const CurveletParams pr{p.a, p.theta + 0.5 * std::numbers::pi, {1.0 - p.b.y, p.b.x}};
    CHECK(std::abs(std::abs(coefficient(shifted, spec, ps)) - ref) <= 1e-8 * ref);
    CHECK(std::abs(std::abs(coefficient(rotated, spec, pr)) - ref) <= 1e-8 * ref);
  }
}

TEST_CASE("sweep output is independent of the thread count") {
  ScaleSweepOptions o;
  o.j_min = 3;
  o.j_max = 5;
  AngleSweepOptions ao;
  ao.ks = {0.0, 2.0, 3.0, -2.0};
  auto m = straight_edge_model(0.5, 0.0);
  auto a1 = samples_csv(sweep_scale(m, o, small_context(256, 1)).samples);
  auto a3 = samples_csv(sweep_scale(m, o, small_context(256, 3)).samples);
  CHECK(a1 == a3);
  auto b1 = samples_csv(sweep_angle(m, ao, small_context(256, 1)).samples);
  auto b3 = samples_csv(sweep_angle(m, ao, small_context(256, 3)).samples);
  CHECK(b1 == b3);
  CHECK(a1.rfind("j,a,theta,b1,b2,L,theta_prime,k,branch,magnitude\n", 0) == 0);
}

TEST_CASE("decay experiment config") {
  auto e = decay_experiment_from_json_text(R"({
    "grid": 128,
    "sweeps": {
      "distance": {"model": "straight", "j": 5, "L": [0, 1, 2]},
      "angle": {"model": {"family": "straight", "coefficients": [0.5, 0.0]}, "k": {"from": 2, "to": 8, "count": 3, "symmetric": true}}
    },
    "claims": {"claims": [{"name": "tail", "sweep": "distance", "window": [null, 0]}]}
  })");
  CHECK(e.context.grid.rows == 128);
  REQUIRE(e.distance);
  CHECK(e.distance->second.offsets.size() == 3);
  CHECK(e.distance->second.side == -1);
  REQUIRE(e.angle);
  CHECK(e.angle->second.ks.size() == 6);
  CHECK(e.angle->second.ks[5] == doctest::Approx(-8.0));
  CHECK_FALSE(e.scale);
  CHECK_THROWS_AS(decay_experiment_from_json_text(R"({"sweeps": {}, "bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(decay_experiment_from_json_text(R"({"sweeps": {"distance": {"jj": 3}}})"), ConfigError);
  CHECK_THROWS_AS(decay_experiment_from_json_text(R"({"sweeps": {"distance": {"side": "up"}}})"), ConfigError);
  CHECK_THROWS_AS(decay_experiment_from_json_text("[1, 2"), ConfigError);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}
