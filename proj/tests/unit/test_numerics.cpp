#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "cvlab/cvgrid.hpp"
#include "cvlab/error.hpp"
#include "cvlab/numerics.hpp"
#include "doctest.h"

using namespace cvlab;

namespace {

SampledField random_field(std::size_t n, unsigned seed, bool real = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n * n);
  for (auto& z : v) z = real ? cplx(g(rng), 0.0) : cplx(g(rng), g(rng));
  return SampledField(GridSpec::unit(n), std::move(v), real);
}

double sum_sq(const SampledField& f) {
  double s = 0.0;
  for (const auto& z : f.values()) s += std::norm(z);
  return s;
}

// Direct O(N^2) DFT of one row-major array, unitary.
std::vector<cplx> naive_dft(const SampledField& f) {
  const std::size_t R = f.rows(), C = f.cols();
  std::vector<cplx> out(R * C);
  for (std::size_t kr = 0; kr < R; ++kr)
    for (std::size_t kc = 0; kc < C; ++kc) {
      cplx s = 0.0;
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c) {
          const double ph = -2.0 * std::numbers::pi *
                            (static_cast<double>(kr * r) / R + static_cast<double>(kc * c) / C);
          s += f(r, c) * std::polar(1.0, ph);
        }
      out[kr * C + kc] = s / std::sqrt(static_cast<double>(R * C));
    }
  return out;
}

}  // namespace

TEST_CASE("SampledField validates its shape") {
  CHECK_THROWS_AS(SampledField(GridSpec::unit(4), std::vector<cplx>(15), true), DimensionError);
  GridSpec bad = GridSpec::unit(4);
  bad.extent.x = 0.0;
  CHECK_THROWS_AS(SampledField(bad, std::vector<cplx>(16), true), Error);
  std::vector<cplx> v(16, cplx(0.0, 1.0));
  CHECK_THROWS_AS(SampledField(GridSpec::unit(4), v, true), Error);
}

TEST_CASE("fft2 of a delta is flat") {
  auto f = SampledField::zeros(GridSpec::unit(32));
  f(3, 7) = 1.0;
  auto F = fft2(f);
  for (const auto& z : F.values()) CHECK(std::abs(std::abs(z) - 1.0 / 32.0) < 1e-15);
}

TEST_CASE("fft2 matches a direct DFT") {
  auto f = random_field(8, 5, false);
  auto F = fft2(f);
  auto ref = naive_dft(f);
  double err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(F.values()[i] - ref[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("fft2 and ifft2 are inverse unitary maps") {
  auto X = random_field(64, 11, false);
  auto back = fft2(ifft2(X));
  CHECK(sum_sq(back - X) / sum_sq(X) < 1e-24);

  auto f = random_field(64, 12);
  CHECK(std::abs(sum_sq(fft2(f)) / sum_sq(f) - 1.0) < 1e-12);
}

TEST_CASE("fft2 energy on a large field") {
  auto f = random_field(1024, 13);
  CHECK(std::abs(sum_sq(fft2(f)) / sum_sq(f) - 1.0) < 1e-12);
}

TEST_CASE("fft2 strict mode rejects non power-of-two sizes") {
  GridSpec g = GridSpec::cell_centered(12, 16, {1.0, 1.0});
  auto f = SampledField::zeros(g);
  CHECK_THROWS_AS(fft2(f), DimensionError);
  f(1, 1) = 1.0;
  auto F = fft2(f, FftOptions{false});
  auto back = ifft2(F, FftOptions{false});
  CHECK(std::abs(back(1, 1) - 1.0) < 1e-14);
}

TEST_CASE("signed_frequency") {
  CHECK(signed_frequency(0, 8) == 0);
  CHECK(signed_frequency(3, 8) == 3);
  CHECK(signed_frequency(4, 8) == -4);
  CHECK(signed_frequency(7, 8) == -1);
  CHECK(signed_frequency(2, 5) == 2);
  CHECK(signed_frequency(3, 5) == -2);
}

TEST_CASE("integrate examples") {
  auto one = SampledField::sample(GridSpec::unit(64), [](Point) { return cplx(1.0); });
  CHECK(std::abs(integrate(one) - 1.0) < 1e-12);
  CHECK(std::abs(integrate(one, QuadratureRule::Trapezoid) - std::pow(63.0 / 64.0, 2)) < 1e-12);

  auto s = SampledField::sample(GridSpec::unit(256), [](Point p) { return cplx(std::sin(2 * std::numbers::pi * p.x)); });
  CHECK(std::abs(integrate(s)) < 1e-9);

  auto xy = SampledField::sample(GridSpec::unit(512), [](Point p) { return cplx(p.x * p.y); });
  CHECK(std::abs(integrate(xy) - 0.25) < 1e-3);
}

TEST_CASE("integrate is linear") {
  auto f = random_field(128, 21), g = random_field(128, 22);
  const double al = 0.3, be = -1.7;
  const cplx lhs = integrate(al * f + be * g);
  const cplx rhs = al * integrate(f) + be * integrate(g);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(al * integrate(f)) + std::abs(be * integrate(g))));
}

TEST_CASE("fit_loglog examples") {
  std::vector<double> xs{1, 2, 4, 8}, ys;
  for (double x : xs) ys.push_back(std::pow(x, 0.75));
  auto fit = fit_loglog(xs, ys);
  CHECK(std::abs(fit.slope - 0.75) < 1e-10);
  CHECK(std::abs(fit.r_squared - 1.0) < 1e-12);
  CHECK(fit.n_points == 4);

  std::vector<double> x3{1, 2, 4}, c3{3, 3, 3};
  auto flat = fit_loglog(x3, c3);
  CHECK(std::abs(flat.slope) < 1e-14);

  std::vector<double> bad{1, -2, 4};
  CHECK_THROWS_AS(fit_loglog(bad, c3), DomainError);
  std::vector<double> same{2, 2, 2};
  CHECK_THROWS_AS(fit_loglog(same, c3), DomainError);
  std::vector<double> one{1};
  CHECK_THROWS(fit_loglog(one, one));
}

TEST_CASE("fit_loglog on noisy power law agrees with normal equations") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> xs, ys;
  for (int i = 0; i < 40; ++i) {
    const double x = std::pow(2.0, 0.25 * i);
    xs.push_back(x);
    ys.push_back(std::pow(x, -2.0) * (1.0 + 0.01 * u(rng)));
  }
  auto fit = fit_loglog(xs, ys);
  CHECK(std::abs(fit.slope + 2.0) < 0.05);

  // Closed form slope = cov(X, Y) / var(X) in log space.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += std::log(xs[i]), my += std::log(ys[i]);
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (std::log(xs[i]) - mx) * (std::log(ys[i]) - my);
    sxx += (std::log(xs[i]) - mx) * (std::log(xs[i]) - mx);
  }
  CHECK(std::abs(fit.slope - sxy / sxx) < 1e-12);
  CHECK(fit.r_squared >= 0.0);
  CHECK(fit.r_squared <= 1.0);
}

TEST_CASE("CVGRID round trip") {
  GridSpec g = GridSpec::cell_centered(8, 16, {2.0, 0.5}, {-1.0, 0.25});
  for (bool real : {true, false}) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n;
    std::vector<cplx> v(g.size());
    for (auto& z : v) z = real ? cplx(n(rng)) : cplx(n(rng), n(rng));
    SampledField f(g, v, real);
    std::stringstream ss;
    write_cvgrid(ss, f);
    auto back = read_cvgrid(ss);
    CHECK(back.is_real() == real);
    CHECK(same_grid(back.grid(), g));
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(back.values()[i] == v[i]);
  }
  std::stringstream junk("CVGRID 2 1 1 1 1 0 0 real\n");
  CHECK_THROWS_AS(read_cvgrid(junk), Error);
}
