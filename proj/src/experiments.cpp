#include "cvlab/experiments.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <set>

#include "cvlab/decay.hpp"
#include "cvlab/error.hpp"
#include "cvlab/nla.hpp"
#include "cvlab/numerics.hpp"
#include "cvlab/parallel.hpp"
#include "cvlab/proof_geometry.hpp"

#ifndef CVLAB_VERSION
#define CVLAB_VERSION "unknown"
#endif

namespace cvlab {

using ojson = nlohmann::ordered_json;

namespace {

// ---- config plumbing -----------------------------------------------------------

const std::set<std::string> kWholeValues{"model", "L", "k"};

void overlay(ojson& base, const ojson& patch, const std::string& path) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string where = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown key '" + where + "'");
    ojson& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object() && !kWholeValues.count(it.key())) {
      overlay(slot, it.value(), where);
    } else {
      slot = it.value();
    }
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const char* pass_text(bool pass) { return pass ? "PASS" : "FAIL"; }

ojson frame_defaults() { return {{"j0", 2}, {"base_angles", 16}, {"smoothness", 5}}; }

std::size_t grid_size(const ojson& j, const char* key) {
  const int n = j.at(key).get<int>();
  if (n < 16) throw ConfigError(std::string("'") + key + "' must be at least 16");
  return static_cast<std::size_t>(n);
}

Point point_of(const ojson& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a point [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::array<double, 2> pair_of(const ojson& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string("'") + what + "' must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

SampledField random_field(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(rng);
  return SampledField::from_real(g, v);
}

// Random real field without frequencies above kmax (cycles per unit length).
SampledField band_limited_field(const GridSpec& g, std::uint64_t seed, double kmax) {
  auto F = fft2(random_field(g, seed));
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c) {
      const double kx = static_cast<double>(signed_frequency(c, g.cols)) / g.extent.x;
      const double ky = static_cast<double>(signed_frequency(r, g.rows)) / g.extent.y;
      if (std::hypot(kx, ky) > kmax) F(r, c) = 0.0;
    }
  return ifft2(F).as_real(true);
}

double sup_norm(const SampledField& f) {
  double s = 0.0;
  for (const auto& z : f.values()) s = std::max(s, std::abs(z));
  return s;
}

// ---- frame-selftest ------------------------------------------------------------

ojson selftest_defaults() {
  return {{"grid", 256},
          {"frame", frame_defaults()},
          {"fields", 20},
          {"seed", 1},
          {"moments",
           {{"grid", 512}, {"j", 6}, {"angles", {0.0, 0.6, 2.2}}, {"offsets", 20}, {"half_length", 0.4}}},
          {"tolerances",
           {{"round_trip", 1e-6}, {"parseval", 1e-6}, {"window_sum", 1e-10}, {"moment", 1e-6},
            {"negative_control", 1e-3}}}};
}

ExperimentOutput run_selftest(const ojson& c, unsigned threads) {
  const GridSpec g = GridSpec::unit(grid_size(c, "grid"));
  const FrameSpec spec = frame_from_config(g, c.at("frame"));
  const int fields = c.at("fields").get<int>();
  const auto seed = c.at("seed").get<std::uint64_t>();
  const auto& tol = c.at("tolerances");
  const auto& mc = c.at("moments");
  if (fields < 1) throw ConfigError("'fields' must be positive");

  const CurveletFrame frame(spec);
  double rt = 0.0, pv = 0.0;
  for (int i = 0; i < fields; ++i) {
    const auto f = random_field(g, seed + static_cast<std::uint64_t>(i));
    const auto t = frame.forward(f, threads);
    const double nf = f.norm_sq();
    rt = std::max(rt, std::sqrt((f - frame.inverse(t, threads)).norm_sq() / nf));
    pv = std::max(pv, std::abs(t.energy() - nf) / nf);
  }
  double ws = 0.0;
  for (double e : frame.window_energy()) ws = std::max(ws, std::abs(e - 1.0));

  const GridSpec mg = GridSpec::unit(grid_size(mc, "grid"));
  const FrameSpec mspec = frame_from_config(mg, c.at("frame"));
  const double a = std::ldexp(1.0, -mc.at("j").get<int>());
  const int offsets = mc.at("offsets").get<int>();
  if (offsets < 2) throw ConfigError("'moments.offsets' must be at least 2");
  MomentOptions mo;
  mo.half_length = mc.at("half_length").get<double>();
  std::array<double, 3> worst{};
  ojson moments = ojson::array();
  for (double th : mc.at("angles").get<std::vector<double>>()) {
    const CurveletParams p{a, th, {0.5, 0.5}};
    const double sup = sup_norm(synthesize_atom(mspec, p));
    const double span = std::min(0.25, 2.0 * std::sqrt(a));
    ojson row{{"theta", th}};
    for (int order = 0; order <= 2; ++order) {
      double w = 0.0;
      for (int o = 0; o < offsets; ++o) {
        const double off = span * (-1.0 + 2.0 * o / (offsets - 1));
        w = std::max(w, std::abs(directional_moment(mspec, p, order, off, mo)));
      }
      const double rel = w / line_moment_scale(sup, order, mo.half_length);
      worst[static_cast<std::size_t>(order)] = std::max(worst[static_cast<std::size_t>(order)], rel);
      row["order_" + std::to_string(order)] = rel;
    }
    moments.push_back(row);
  }
  // Negative control: an anisotropic Gaussian of the same shape has no vanishing moment.
  const double th = 0.6;
  const Point b{0.5, 0.5}, t{std::cos(th), std::sin(th)}, n{-std::sin(th), std::cos(th)};
  auto gauss = [&](Point x) {
    const double u = dot(x - b, t) / std::sqrt(a), v = dot(x - b, n) / a;
    return std::exp(-0.5 * (u * u + v * v));
  };
  const double control = line_moment(gauss, b, n, 0, mo.half_length, 0.5 / static_cast<double>(mg.rows)) /
                         line_moment_scale(1.0, 0, mo.half_length);

  const double worst_moment = *std::max_element(worst.begin(), worst.end());
  const bool ok_rt = rt <= tol.at("round_trip").get<double>();
  const bool ok_pv = pv <= tol.at("parseval").get<double>();
  const bool ok_ws = ws <= tol.at("window_sum").get<double>();
  const bool ok_m = worst_moment <= tol.at("moment").get<double>();
  const bool ok_c = control >= tol.at("negative_control").get<double>();

  ExperimentOutput out;
  out.pass = ok_rt && ok_pv && ok_ws && ok_m && ok_c;
  out.report = {{"command", "frame-selftest"},
                {"pass", out.pass},
                {"fields", fields},
                {"round_trip_rel_err", rt},
                {"parseval_rel_err", pv},
                {"window_sum_max_defect", ws},
                {"moments", moments},
                {"moment_worst_rel", worst_moment},
                {"negative_control_rel", control},
                {"checks",
                 {{"round_trip", ok_rt}, {"parseval", ok_pv}, {"window_sum", ok_ws}, {"moments", ok_m},
                  {"negative_control", ok_c}}}};
  out.summary = std::string("frame-selftest ") + pass_text(out.pass) + " round_trip=" + fmt(rt) +
                " parseval=" + fmt(pv) + " window_sum=" + fmt(ws) + " moments=" + fmt(worst_moment) +
                " control=" + fmt(control);
  return out;
}

// ---- oracle --------------------------------------------------------------------

ojson oracle_defaults() {
  return {{"grid", 128},      {"frame", frame_defaults()}, {"fields", 10},     {"params", 10},
          {"seed", 1},        {"band_limit", 60.0},        {"j", {3, 5}},      {"b_box", {0.2, 0.8}},
          {"tolerance", 1e-8}};
}

ExperimentOutput run_oracle(const ojson& c, unsigned threads) {
  const GridSpec g = GridSpec::unit(grid_size(c, "grid"));
  const FrameSpec spec = frame_from_config(g, c.at("frame"));
  const int fields = c.at("fields").get<int>(), nparams = c.at("params").get<int>();
  if (fields < 1 || nparams < 1) throw ConfigError("'fields' and 'params' must be positive");
  const auto seed = c.at("seed").get<std::uint64_t>();
  const auto jr = pair_of(c.at("j"), "j");
  const auto box = pair_of(c.at("b_box"), "b_box");
  const double tol = c.at("tolerance").get<double>();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> uj(static_cast<int>(jr[0]), static_cast<int>(jr[1]));
  std::uniform_real_distribution<double> uth(0.0, 2.0 * std::numbers::pi), ub(box[0], box[1]);
  std::vector<CurveletParams> params;
  for (int i = 0; i < nparams; ++i) {
    const int j = uj(rng);
    const double th = uth(rng);
    const double b1 = ub(rng), b2 = ub(rng);
    params.push_back({std::ldexp(1.0, -j), th, {b1, b2}});
  }
  // Atoms evaluated pointwise from their defining sums, independent of the FFT path.
  std::vector<SampledField> even, odd;
  for (const auto& p : params) {
    const AtomSpectrum atom(spec, p);
    std::vector<double> ve(g.size()), vo(g.size());
    parallel_for(g.rows, threads, [&](std::size_t r) {
      for (std::size_t col = 0; col < g.cols; ++col) {
        const cplx z = atom.psi(g.sample(r, col));
        ve[r * g.cols + col] = std::sqrt(2.0) * z.real();
        vo[r * g.cols + col] = std::sqrt(2.0) * z.imag();
      }
    });
    even.push_back(SampledField::from_real(g, ve));
    odd.push_back(SampledField::from_real(g, vo));
  }

  std::string csv = "field,a,theta,b1,b2,re_frequency,im_frequency,re_oracle,im_oracle,rel_err\n";
  double worst = 0.0;
  for (int fi = 0; fi < fields; ++fi) {
    const auto f = band_limited_field(g, seed + 1000 + static_cast<std::uint64_t>(fi), c.at("band_limit").get<double>());
    const CoefficientProbe probe(f, spec);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      const auto& p = params[pi];
      const cplx fast = probe(p);
      const cplx oracle(integrate(hadamard(f, even[pi])).real(), integrate(hadamard(f, odd[pi])).real());
      const double rel = std::abs(fast - oracle) / std::max(std::abs(oracle), 1e-300);
      worst = std::max(worst, rel);
      csv += std::to_string(fi) + ',' + format_double(p.a) + ',' + format_double(p.theta) + ',' +
             format_double(p.b.x) + ',' + format_double(p.b.y) + ',' + format_double(fast.real()) + ',' +
             format_double(fast.imag()) + ',' + format_double(oracle.real()) + ',' + format_double(oracle.imag()) +
             ',' + format_double(rel) + '\n';
    }
  }
  ExperimentOutput out;
  out.pass = worst <= tol;
  out.report = {{"command", "oracle"}, {"pass", out.pass},       {"pairs", fields * nparams},
                {"max_rel_err", worst}, {"tolerance", tol}};
  out.files["oracle.csv"] = csv;
  out.summary = std::string("oracle ") + pass_text(out.pass) + " pairs=" + std::to_string(fields * nparams) +
                " max_rel_err=" + fmt(worst);
  return out;
}

// ---- geometry ------------------------------------------------------------------

ojson geometry_defaults() {
  const ojson parabola_half{{"base", "parabola"}, {"family", "parabola"}, {"coefficients", {0.5, 0.4, 0.5}}, {"n", 1000}};
  const ojson sine_small{{"base", "sine"}, {"family", "sine"}, {"coefficients", {0.5, 0.02, 6.0, 0.4}}, {"n", 1000}};
  return {
      {"seed", 7},
      {"partition",
       {{"model", "straight"},
        {"j", 6},
        {"k", {-6.0, -2.5, 2.0, 4.0, 7.0}},
        {"offsets", {{0.0, 0.0}, {0.03, 0.01}, {-0.02, -0.015}}},
        {"samples", 1000000},
        {"csv_samples", 4000},
        {"epsilon", 1.0},
        {"c_d", 1.0},
        {"c_h", 1.0},
        {"c_v", 1.0}}},
      {"integrals",
       {{"model", "sine_kinked"}, {"grid", 256}, {"j", 6}, {"theta", 0.4}, {"x", 0.45}, {"offset", 0.005},
        {"tolerance", 1e-10}}},
      {"twist",
       {{"model", parabola_half},
        {"j", 5},
        {"x", 0.62},
        {"points", 100000},
        {"round_trip_tolerance", 1e-10},
        {"jacobian_tolerance", 1e-6},
        {"straightening_models", {parabola_half, sine_small}},
        {"straightening_x", 0.55},
        {"straightening_samples", 400}}},
      {"change_of_variables",
       {{"model", parabola_half}, {"grid", 256}, {"j", 5}, {"x", 0.5}, {"columns", 2048}, {"panels", 4},
        {"tolerance", 1e-4}}},
      {"derivatives",
       {{"model", "cubic"},
        {"x", 0.5},
        {"strip_heights", {0.02, 0.01}},
        {"half_length", 0.15},
        {"samples", {400, 32}},
        {"near_zero", 0.02},
        {"slope", {0.8, 1.2}},
        {"ratio", {1.6, 2.4}}}}};
}

ExperimentOutput run_geometry(const ojson& c, unsigned threads) {
  const auto seed = c.at("seed").get<std::uint64_t>();
  ExperimentOutput out;
  ojson report{{"command", "geometry"}};

  // Partition coverage and disjointness.
  const auto& pc = c.at("partition");
  const auto pmodel = model_from_config(pc.at("model"));
  PartitionOptions po;
  po.epsilon = pc.at("epsilon").get<double>();
  po.c_d = pc.at("c_d").get<double>();
  po.c_h = pc.at("c_h").get<double>();
  po.c_v = pc.at("c_v").get<double>();
  const double pa = std::ldexp(1.0, -pc.at("j").get<int>());
  const auto samples = pc.at("samples").get<std::size_t>();
  const double x_mid = 0.5;
  std::size_t violations = 0;
  ojson layouts = ojson::array();
  std::optional<PartitionLayout> first;
  std::uint64_t s = seed;
  for (double k : pc.at("k").get<std::vector<double>>()) {
    for (const auto& off : pc.at("offsets")) {
      const Point o = point_of(off);
      const Point anchor{x_mid, pmodel.edge.empty() ? 0.5 : pmodel.edge(x_mid)};
      const CurveletParams p{pa, (pmodel.edge.empty() ? 0.0 : std::atan(pmodel.edge.derivative(x_mid, 1))) +
                                     k * std::sqrt(pa),
                             anchor + o};
      const auto L = build_partition(p, edge_geometry(pmodel, p), po);
      if (!first) first = L;
      const auto whole = check_partition(L, samples, {0.0, 0.0}, {1.0, 1.0}, s++);
      const Point span{2 * L.r1, 2 * L.r1};
      const auto near = check_partition(L, samples, L.q - span, L.q + span, s++);
      const std::size_t v = whole.uncovered + whole.overlapping + whole.companion_overlaps + near.uncovered +
                            near.overlapping + near.companion_overlaps;
      violations += v;
      layouts.push_back({{"k", k}, {"offset", off}, {"regime", L.regime == Regime::Oblique ? "oblique" : "aligned"},
                         {"violations", v}});
    }
  }
  const bool ok_partition = violations == 0;
  report["partition"] = {{"layouts", layouts}, {"samples_per_layout", 2 * samples}, {"violations", violations},
                         {"pass", ok_partition}};
  if (first) {
    out.files["partition_layout.json"] = first->to_json();
    const Point span{3 * first->r1, 3 * first->r1};
    out.files["partition_samples.csv"] = partition_samples_csv(
        *first, quasi_random_points(pc.at("csv_samples").get<std::size_t>(), first->q - span, first->q + span, seed));
  }

  // Region integrals add up to the whole.
  const auto& ic = c.at("integrals");
  const auto imodel = model_from_config(ic.at("model"));
  const GridSpec ig = GridSpec::unit(grid_size(ic, "grid"));
  const double ix = ic.at("x").get<double>();
  const CurveletParams ip{std::ldexp(1.0, -ic.at("j").get<int>()), ic.at("theta").get<double>(),
                          {ix, (imodel.edge.empty() ? 0.5 : imodel.edge(ix)) + ic.at("offset").get<double>()}};
  const auto il = build_partition(ip, edge_geometry(imodel, ip), po);
  const AtomSpectrum iatom(FrameSpec::for_grid(ig), ip);
  const auto integrand =
      SampledField::sample(ig, [&](Point x) { return cplx(imodel.evaluate(x) * std::sqrt(2.0) * iatom.psi(x).real()); });
  const auto ri = partition_integrals(il, integrand);
  const double int_rel = std::abs(ri.sum_of_regions - ri.total) / std::max(std::abs(ri.total), 1e-300);
  const bool ok_integrals = int_rel <= ic.at("tolerance").get<double>() && ri.total != 0.0;
  report["integrals"] = {{"per_region", ri.per_region}, {"sum_of_regions", ri.sum_of_regions}, {"total", ri.total},
                         {"rel_defect", int_rel}, {"pass", ok_integrals}};

  // Twist map: bijection and Jacobian.
  const auto& tc = c.at("twist");
  const auto tmodel = model_from_config(tc.at("model"));
  if (tmodel.edge.empty()) throw ConfigError("twist: model needs an edge");
  const double ta = std::ldexp(1.0, -tc.at("j").get<int>());
  const auto T = TwistMap::from_edge(tmodel.edge, tc.at("x").get<double>(), ta, std::sqrt(ta));
  if (!(T.max_ratio() < 1.0)) throw DomainError("twist: sup |g| / h >= 1; use a finer j or a flatter edge");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u1(-std::sqrt(ta), std::sqrt(ta)), u2(-ta, ta);
  double worst_rt = 0.0, worst_fd = 0.0;
  std::size_t outside = 0;
  const double hs = 1e-6 * ta;
  const auto points = tc.at("points").get<std::size_t>();
  for (std::size_t i = 0; i < points; ++i) {
    const Point y{u1(rng), u2(rng)};
    const Point x = T.apply(y);
    outside += !T.in_r0(x);
    const Point back = T.inverse(x);
    worst_rt = std::max(worst_rt, std::abs(back.x - y.x) + std::abs(back.y - y.y));
    if (std::abs(y.y) < 2 * hs || std::abs(y.y) > ta - 2 * hs) continue;
    const double fd = (T.apply({y.x, y.y + hs}).y - T.apply({y.x, y.y - hs}).y) / (2 * hs);
    worst_fd = std::max(worst_fd, std::abs(fd - T.jacobian(y)));
  }
  std::size_t straight_bad = 0, control_good = 0;
  const double sx = tc.at("straightening_x").get<double>();
  const auto sn = tc.at("straightening_samples").get<std::size_t>();
  for (const auto& mj : tc.at("straightening_models")) {
    const auto m = model_from_config(mj);
    const auto Tm = TwistMap::from_edge(m.edge, sx, ta, std::sqrt(ta));
    straight_bad += straightening_violations(m, Tm, sn);
    const TwistMap flat([](double) { return 0.0; }, ta, std::sqrt(ta), Tm.frame());
    control_good += straightening_violations(m, flat, sn) > 0;
  }
  const std::size_t n_models = tc.at("straightening_models").size();
  const bool ok_rt = worst_rt <= tc.at("round_trip_tolerance").get<double>() && outside == 0;
  const bool ok_fd = worst_fd <= tc.at("jacobian_tolerance").get<double>();
  const bool ok_straight = straight_bad == 0 && control_good == n_models;
  report["twist"] = {{"points", points},
                     {"max_ratio", T.max_ratio()},
                     {"round_trip_max_err", worst_rt},
                     {"images_outside_r0", outside},
                     {"jacobian_max_err", worst_fd},
                     {"straightening_violations", straight_bad},
                     {"untwisted_controls_violating", control_good},
                     {"pass", ok_rt && ok_fd && ok_straight}};

  // Change of variables over R0.
  const auto& cc = c.at("change_of_variables");
  const auto cmodel = model_from_config(cc.at("model"));
  const double ca = std::ldexp(1.0, -cc.at("j").get<int>());
  const double cx = cc.at("x").get<double>();
  const auto CT = TwistMap::from_edge(cmodel.edge, cx, ca, std::sqrt(ca));
  const CurveletParams cp{ca, std::atan(cmodel.edge.derivative(cx, 1)), {cx, cmodel.edge(cx)}};
  ChangeOfVariablesOptions co;
  co.columns = cc.at("columns").get<std::size_t>();
  co.panels = cc.at("panels").get<int>();
  co.threads = threads;
  const auto cov = change_of_variables_check(cmodel, FrameSpec::for_grid(GridSpec::unit(grid_size(cc, "grid"))), cp,
                                             CT, co);
  const bool ok_cov = cov.rel_defect <= cc.at("tolerance").get<double>();
  report["change_of_variables"] = {{"lhs", {cov.lhs.real(), cov.lhs.imag()}},
                                   {"rhs", {cov.rhs.real(), cov.rhs.imag()}},
                                   {"rel_defect", cov.rel_defect},
                                   {"columns", co.columns},
                                   {"pass", ok_cov}};

  // Derivative bounds of H = f(T y) det J.
  const auto& dc = c.at("derivatives");
  const auto dmodel = model_from_config(dc.at("model"));
  const auto heights = dc.at("strip_heights").get<std::vector<double>>();
  if (heights.size() != 2 || !(heights[1] < heights[0])) throw ConfigError("derivatives.strip_heights must be [h, h'] with h' < h");
  const auto dn = dc.at("samples").get<std::vector<std::size_t>>();
  if (dn.size() != 2) throw ConfigError("derivatives.samples must be [n1, n2]");
  const double dx = dc.at("x").get<double>(), hl = dc.at("half_length").get<double>();
  const auto b1 = h_derivative_bounds(dmodel, TwistMap::from_edge(dmodel.edge, dx, heights[0], hl), dn[0], dn[1]);
  const auto b2 = h_derivative_bounds(dmodel, TwistMap::from_edge(dmodel.edge, dx, heights[1], hl), dn[0], dn[1]);
  const double expected = heights[0] / heights[1];
  const auto rwin = pair_of(dc.at("ratio"), "ratio");
  const auto swin = pair_of(dc.at("slope"), "slope");
  ojson ratios = ojson::object();
  bool ok_ratio = true;
  int sides_checked = 0;
  for (int side = 0; side < 2; ++side) {
    // A side where H vanishes (zero side function) carries no signal.
    if (b1.sup[side][0] == 0.0) continue;
    ++sides_checked;
    for (int m = 2; m <= 3; ++m) {
      // Normalised to a halving so the window reads as "doubles".
      const double r = std::pow(b2.sup[side][m] / b1.sup[side][m], std::log(2.0) / std::log(expected));
      ratios[std::string(side == 0 ? "upper" : "lower") + "_d" + std::to_string(m)] = r;
      ok_ratio = ok_ratio && r >= rwin[0] && r <= rwin[1];
    }
  }
  ok_ratio = ok_ratio && sides_checked > 0;
  std::vector<double> xs, ys;
  const double near_zero = dc.at("near_zero").get<double>();
  for (std::size_t i = 0; i < b1.y1.size(); ++i)
    if (b1.y1[i] <= near_zero) {
      xs.push_back(b1.y1[i]);
      ys.push_back(b1.d1_profile[i]);
    }
  if (xs.size() < 2) throw ConfigError("derivatives.near_zero leaves fewer than two samples");
  const auto d1 = fit_loglog(xs, ys);
  const bool ok_d1 = d1.slope >= swin[0] && d1.slope <= swin[1];
  std::string profile = "y1,max_abs_dH_dy1\n";
  for (std::size_t i = 0; i < b1.y1.size(); ++i) profile += format_double(b1.y1[i]) + ',' + format_double(b1.d1_profile[i]) + '\n';
  out.files["derivative_profile.csv"] = profile;
  report["derivatives"] = {{"sup_h", b1.sup},   {"sup_h_small", b2.sup}, {"halving_ratios", ratios},
                           {"d1_slope", d1.slope}, {"d1_r_squared", d1.r_squared}, {"pass", ok_ratio && ok_d1}};

  const bool ok_twist = ok_rt && ok_fd && ok_straight;
  out.pass = ok_partition && ok_integrals && ok_twist && ok_cov && ok_ratio && ok_d1;
  report["pass"] = out.pass;
  out.report = report;
  double worst_ratio_dev = 0.0;
  for (const auto& [k, v] : ratios.items()) worst_ratio_dev = std::max(worst_ratio_dev, std::abs(v.get<double>() - 2.0));
  out.summary = std::string("geometry ") + pass_text(out.pass) + " partition_violations=" + std::to_string(violations) +
                " integrals=" + fmt(int_rel) + " twist_rt=" + fmt(worst_rt) + " jacobian=" + fmt(worst_fd) +
                " cov=" + fmt(cov.rel_defect) + " d1_slope=" + fmt(d1.slope) + " ratio_dev=" + fmt(worst_ratio_dev);
  return out;
}

// ---- decay ---------------------------------------------------------------------

ojson decay_defaults() {
  return ojson::parse(R"({
  "grid": 1024,
  "frame": {"j0": 2, "base_angles": 16, "smoothness": 5},
  "claims": {
    "thresholds": {"c_align": 1.0, "epsilon": 1.0, "boundary_band": 2.0},
    "envelope_constant": 0.3,
    "claims": [
      {"name": "edge_aligned_scale", "sweep": "scale", "branch": "ALIGNED", "window": [0.60, 0.90], "min_r2": 0.9},
      {"name": "smooth_scale", "sweep": "smooth", "branch": "ALIGNED", "window": [3.35, null]},
      {"name": "distance_tail", "sweep": "distance", "branch": "ALIGNED", "window": [null, -2.0], "min_r2": 0.9},
      {"name": "angular_tail", "sweep": "angle", "branch": "TILTED_NEAR", "window": [null, -2.5]}
    ]
  },
  "sweeps": {
    "scale": {"model": "straight", "policy": "on_edge_tangent", "j": [3, 8],
              "edge_positions": [0.4, 0.5, 0.6], "across_steps": 4},
    "smooth": {"model": "smooth_kink", "policy": "smooth_region", "j": [3, 8],
               "center": [0.5, 0.5], "window": 0.15, "angles": 16},
    "distance": {"model": "straight", "j": 6, "edge_position": 0.5, "side": "minus",
                 "L": {"from": 0, "to": 20, "step": 1}, "fit_range": [2, 20]},
    "angle": {"model": "straight", "j": 6, "edge_position": 0.5,
              "k": {"from": 2, "to": 16, "count": 15, "symmetric": true, "include_zero": true},
              "max_theta_prime": 1.5, "fit_range": [2, 16]}
  },
  "baseline": null
})");
}

ExperimentOutput run_decay_command(const ojson& c, unsigned threads) {
  ojson cfg = c;
  ojson baseline = nullptr;
  if (cfg.contains("baseline")) {
    baseline = cfg["baseline"];
    cfg.erase("baseline");
  }
  auto e = decay_experiment_from_json_text(cfg.dump());
  if (!baseline.is_null()) {
    if (!baseline.is_object() || !baseline.contains("slopes")) throw ConfigError("baseline must be {\"slopes\": {...}}");
    for (auto it = baseline.begin(); it != baseline.end(); ++it)
      if (it.key() != "slopes" && it.key() != "tolerance") throw ConfigError("unknown key 'baseline." + it.key() + "'");
  }
  e.context.threads = threads;
  const auto r = run_decay(e);

  ExperimentOutput out;
  for (const auto& s : r.sweeps) out.files[s.name + ".csv"] = samples_csv(s.samples);
  out.files["verdict.json"] = r.verdict.to_json();

  ojson report{{"command", "decay"}, {"verdict", ojson::parse(r.verdict.to_json())}};
  bool ok_envelope = true;
  for (const auto& s : r.sweeps) {
    if (s.name != "scale") continue;
    const auto ratios = envelope_ratios(s);
    const double mx = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
    ok_envelope = mx <= e.claims.envelope_constant;
    report["envelope"] = {{"constant", e.claims.envelope_constant}, {"ratios", ratios}, {"max_ratio", mx},
                          {"pass", ok_envelope}};
  }
  bool ok_baseline = true;
  if (!baseline.is_null()) {
    const double tol = baseline.value("tolerance", 1e-9);
    ojson cmp = ojson::array();
    for (auto it = baseline["slopes"].begin(); it != baseline["slopes"].end(); ++it) {
      std::optional<double> got;
      for (const auto& cr : r.verdict.results)
        if (cr.claim.name == it.key() && !cr.fit.degenerate) got = cr.fit.fit.slope;
      const double want = it.value().get<double>();
      const bool ok = got && std::abs(*got - want) <= tol;
      ok_baseline = ok_baseline && ok;
      cmp.push_back({{"claim", it.key()}, {"baseline", want}, {"measured", got ? ojson(*got) : ojson(nullptr)}, {"pass", ok}});
    }
    report["baseline"] = {{"tolerance", tol}, {"claims", cmp}, {"pass", ok_baseline}};
  }
  out.pass = r.verdict.pass && ok_envelope && ok_baseline;
  report["pass"] = out.pass;
  out.report = report;
  out.summary = std::string("decay ") + pass_text(out.pass);
  for (const auto& cr : r.verdict.results)
    out.summary += " " + cr.claim.name + "=" + (cr.fit.degenerate ? std::string("degenerate") : fmt(cr.fit.fit.slope)) +
                   (cr.status == ClaimStatus::Pass ? "" : cr.status == ClaimStatus::Fail ? "(FAIL)" : "(SKIPPED)");
  if (!ok_envelope) out.summary += " envelope(FAIL)";
  if (!ok_baseline) out.summary += " baseline(FAIL)";
  return out;
}

// ---- nla -----------------------------------------------------------------------

ojson nla_defaults() {
  return {{"grids", {512}},  {"frame", frame_defaults()}, {"models", {"straight"}}, {"Ms", nullptr},
          {"window", {64, 4096}}, {"slope", {-2.4, -1.6}}, {"min_r2", 0.9}};
}

ExperimentOutput run_nla_command(const ojson& c, unsigned threads) {
  NlaOptions o;
  o.threads = threads;
  if (!c.at("Ms").is_null()) o.Ms = c.at("Ms").get<std::vector<std::size_t>>();
  const auto w = c.at("window").get<std::vector<std::size_t>>();
  if (w.size() != 2 || w[0] > w[1]) throw ConfigError("'window' must be [lo, hi] with lo <= hi");
  o.window = {w[0], w[1]};
  const auto sw = pair_of(c.at("slope"), "slope");
  const double min_r2 = c.at("min_r2").get<double>();
  std::vector<CartoonFunction> models;
  for (const auto& m : c.at("models")) models.push_back(model_from_config(m));
  const auto grids = c.at("grids").get<std::vector<int>>();
  if (models.empty() || grids.empty()) throw ConfigError("'models' and 'grids' must be non-empty");
  std::set<std::string> seen;
  for (const auto& m : models)
    for (int n : grids)
      if (!seen.insert(m.name + "_" + std::to_string(n)).second)
        throw ConfigError("duplicate model/grid pair " + m.name + "_" + std::to_string(n));

  ExperimentOutput out;
  std::vector<NlaCurve> curves;
  ojson rows = ojson::array();
  bool all = true;
  for (const auto& m : models)
    for (int n : grids) {
      if (n < 16) throw ConfigError("grid sizes must be at least 16");
      const GridSpec g = GridSpec::unit(static_cast<std::size_t>(n));
      auto curve = nla_curve(rasterize(m, g, threads), frame_from_config(g, c.at("frame")), o, m.name);
      const bool ok = curve.monotone() && curve.fit_valid && curve.fit.slope >= sw[0] && curve.fit.slope <= sw[1] &&
                      curve.fit.r_squared >= min_r2;
      all = all && ok;
      const std::string stem = "nla_" + m.name + "_" + std::to_string(n);
      out.files[stem + ".csv"] = curve.csv();
      ojson cj = ojson::parse(curve.to_json());
      cj["model_definition"] = ojson::parse(model_to_json_text(m));
      out.files[stem + ".json"] = cj.dump(2);
      rows.push_back({{"model", m.name},
                      {"grid", n},
                      {"slope", curve.fit_valid ? ojson(curve.fit.slope) : ojson(nullptr)},
                      {"r_squared", curve.fit_valid ? ojson(curve.fit.r_squared) : ojson(nullptr)},
                      {"monotone", curve.monotone()},
                      {"pass", ok}});
      curves.push_back(std::move(curve));
    }
  const auto cmp = compare_curves(curves);
  out.files["comparison.csv"] = cmp.csv;
  out.files["comparison.json"] = cmp.json;
  out.pass = all;
  out.report = {{"command", "nla"}, {"pass", all}, {"window", w}, {"slope_window", sw}, {"min_r2", min_r2}, {"curves", rows}};
  out.summary = std::string("nla ") + pass_text(all);
  for (const auto& r : rows)
    out.summary += " " + r["model"].get<std::string>() + "_" + std::to_string(r["grid"].get<int>()) + "=" +
                   (r["slope"].is_null() ? std::string("none") : fmt(r["slope"].get<double>())) +
                   (r["pass"].get<bool>() ? "" : "(FAIL)");
  return out;
}

}  // namespace

// ---- public ----------------------------------------------------------------------

const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> names{"frame-selftest", "geometry", "decay", "nla", "oracle"};
  return names;
}

ojson default_config(const std::string& command) {
  if (command == "frame-selftest") return selftest_defaults();
  if (command == "geometry") return geometry_defaults();
  if (command == "decay") return decay_defaults();
  if (command == "nla") return nla_defaults();
  if (command == "oracle") return oracle_defaults();
  throw ConfigError("unknown command '" + command + "'");
}

ojson resolve_config(const std::string& command, const ojson& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (command == "decay") {
    ojson out = config;
    if (!out.contains("baseline")) out["baseline"] = nullptr;
    // Fails early on unknown keys.
    ojson probe = out;
    probe.erase("baseline");
    decay_experiment_from_json_text(probe.dump());
    return out;
  }
  ojson base = default_config(command);
  overlay(base, config, "");
  return base;
}

ExperimentOutput run_experiment(const std::string& command, const ojson& config, unsigned threads) {
  if (threads == 0) threads = 1;
  try {
    if (command == "frame-selftest") return run_selftest(config, threads);
    if (command == "geometry") return run_geometry(config, threads);
    if (command == "decay") return run_decay_command(config, threads);
    if (command == "nla") return run_nla_command(config, threads);
    if (command == "oracle") return run_oracle(config, threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(command + " config: " + e.what());
  }
  throw ConfigError("unknown command '" + command + "'");
}

CartoonFunction model_from_config(const nlohmann::json& j) {
  if (j.is_string()) return named_model(j.get<std::string>());
  if (j.is_object()) return model_from_json_text(j.dump());
  throw ConfigError("model must be a name or an object");
}

FrameSpec frame_from_config(const GridSpec& grid, const nlohmann::json& frame) {
  if (!frame.is_object()) throw ConfigError("'frame' must be an object");
  for (auto it = frame.begin(); it != frame.end(); ++it)
    if (it.key() != "j0" && it.key() != "base_angles" && it.key() != "smoothness")
      throw ConfigError("unknown key 'frame." + it.key() + "'");
  auto spec = FrameSpec::for_grid(grid, frame.value("j0", 2), frame.value("base_angles", 16), frame.value("smoothness", 5));
  spec.validate();
  return spec;
}

ojson build_info() {
  ojson j;
  j["cvlab"] = CVLAB_VERSION;
  j["fftw"] = std::string(fftw_version);
  j["boost"] = BOOST_LIB_VERSION;
  j["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
              std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  j["compiler"] = __VERSION__;
  j["cxx_standard"] = static_cast<long>(__cplusplus);
  return j;
}

}  // namespace cvlab
