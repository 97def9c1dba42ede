#include "cvlab/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cvlab/error.hpp"
#include "cvlab/parallel.hpp"
#include "json.hpp"

namespace cvlab {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double scale_of(int j) { return std::ldexp(1.0, -j); }

DecaySample make_sample(const CartoonFunction& model, int j, const CurveletParams& p, double magnitude,
                        const RegimeThresholds& th) {
  DecaySample s;
  s.j = j;
  s.params = p;
  s.magnitude = magnitude;
  s.geom = edge_geometry(model, p);
  if (!s.geom.has_edge) s.geom.L = kInf;
  s.label = classify_regime(s.geom, p.a, th);
  return s;
}

SampledField spectrum_of(const CartoonFunction& model, const SweepContext& ctx) {
  return CoefficientProbe(rasterize(model, ctx.grid, ctx.threads), ctx.frame_spec()).spectrum();
}

}  // namespace

// ---- regimes -----------------------------------------------------------------------

std::string to_string(Branch branch) {
  switch (branch) {
    case Branch::Aligned: return "ALIGNED";
    case Branch::TiltedNear: return "TILTED_NEAR";
    case Branch::TiltedFar: return "TILTED_FAR";
  }
  return "?";
}

Branch branch_from_string(const std::string& name) {
  if (name == "ALIGNED") return Branch::Aligned;
  if (name == "TILTED_NEAR") return Branch::TiltedNear;
  if (name == "TILTED_FAR") return Branch::TiltedFar;
  throw ConfigError("unknown branch '" + name + "'");
}

RegimeLabel classify_regime(const EdgeGeometry& geom, double a, const RegimeThresholds& th) {
  RegimeLabel label;
  label.c_align = th.c_align;
  label.epsilon = th.epsilon;
  if (!geom.has_edge || std::abs(geom.theta_prime) <= th.c_align * std::sqrt(a)) {
    label.branch = Branch::Aligned;
    return label;
  }
  const double reach = std::pow(std::abs(geom.k), 1.0 - 0.5 * th.epsilon);
  label.branch = reach >= geom.L ? Branch::TiltedNear : Branch::TiltedFar;
  if (geom.L > 0.0) {
    const double ratio = reach / geom.L;
    label.near_boundary = ratio >= 1.0 / th.boundary_band && ratio <= th.boundary_band;
  }
  return label;
}

// ---- fitting -------------------------------------------------------------------------

SweepFit fit_samples(const std::vector<DecaySample>& samples, std::array<double, 2> range, std::optional<Branch> branch) {
  SweepFit out;
  std::vector<double> xs, ys;
  for (const auto& s : samples) {
    if (s.x < range[0] || s.x > range[1]) continue;
    if (s.label.near_boundary) continue;
    if (branch && s.label.branch != *branch) continue;
    if (!(s.magnitude > 0.0) || !(s.x > 0.0)) {
      out.reason = "non-positive magnitude or coordinate in the fit window";
      return out;
    }
    xs.push_back(s.x);
    ys.push_back(s.magnitude);
  }
  if (xs.size() < 2) {
    out.reason = "fewer than two samples in the fit window";
    return out;
  }
  if (std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs.front(); })) {
    out.reason = "all samples share one coordinate";
    return out;
  }
  out.fit = fit_loglog(xs, ys);
  out.degenerate = false;
  return out;
}

std::string to_string(AlignmentPolicy policy) {
  return policy == AlignmentPolicy::OnEdgeTangent ? "on_edge_tangent" : "smooth_region";
}

AlignmentPolicy policy_from_string(const std::string& name) {
  if (name == "on_edge_tangent" || name == "ON_EDGE_TANGENT") return AlignmentPolicy::OnEdgeTangent;
  if (name == "smooth_region" || name == "SMOOTH_REGION") return AlignmentPolicy::SmoothRegion;
  throw ConfigError("unknown alignment policy '" + name + "'");
}

FrameSpec SweepContext::frame_spec() const { return FrameSpec::for_grid(grid, j0, base_angles, window_smoothness); }

// ---- sweeps --------------------------------------------------------------------------

SweepResult sweep_scale(const CartoonFunction& model, const ScaleSweepOptions& opt, const SweepContext& ctx) {
  if (opt.j_min > opt.j_max) throw ConfigError("sweep_scale: empty j range");
  SweepResult res;
  res.name = opt.policy == AlignmentPolicy::OnEdgeTangent ? "scale" : "smooth";
  res.x_name = "a";
  res.fit_range = {0.0, kInf};
  const FrameSpec spec = ctx.frame_spec();
  const SampledField spectrum = spectrum_of(model, ctx);
  const int nj = opt.j_max - opt.j_min + 1;

  struct Best {
    double mag = -1.0;
    CurveletParams p{};
  };
  std::vector<Best> best;

  if (opt.policy == AlignmentPolicy::OnEdgeTangent) {
    if (model.edge.empty()) throw DomainError("sweep_scale: on-edge policy needs a model with an edge");
    if (opt.edge_positions.empty() || opt.across_steps < 0) throw ConfigError("sweep_scale: bad on-edge grid");
    const std::size_t np = opt.edge_positions.size();
    best.resize(static_cast<std::size_t>(nj) * np);
    parallel_for(best.size(), ctx.threads, [&](std::size_t task) {
      const int j = opt.j_min + static_cast<int>(task / np);
      const double a = scale_of(j), x = opt.edge_positions[task % np];
      const Point p = model.edge.point(x), t = model.edge.tangent(x);
      const CurveletParams base{a, std::atan2(t.y, t.x), p};
      const Point n = base.minor_axis();
      const AtomSpectrum atom(spec, base);
      Best b;
      for (int m = -opt.across_steps; m <= opt.across_steps; ++m) {
        const Point pos = p + (0.5 * m * a) * n;
        const double mag = std::abs(atom.coefficient_from_spectrum(spectrum, pos));
        if (mag > b.mag) b = {mag, {a, base.theta, pos}};
      }
      best[task] = b;
    });
    for (int jj = 0; jj < nj; ++jj) {
      Best b;
      for (std::size_t i = 0; i < np; ++i)
        if (best[jj * np + i].mag > b.mag) b = best[jj * np + i];
      best[jj] = b;
    }
    best.resize(static_cast<std::size_t>(nj));
  } else {
    if (opt.angles < 1 || !(opt.window > 0.0)) throw ConfigError("sweep_scale: bad smooth-region grid");
    const GridSpec& g = ctx.grid;
    // Grid positions inside the window and away from S.
    std::vector<std::size_t> cells;
    for (std::size_t r = 0; r < g.rows; ++r)
      for (std::size_t c = 0; c < g.cols; ++c) {
        const Point b = g.sample(r, c);
        if (std::abs(b.x - opt.center.x) > opt.window || std::abs(b.y - opt.center.y) > opt.window) continue;
        if (!model.edge.empty()) {
          const auto [xa, xb] = model.edge.x_range();
          if (b.x >= xa && b.x <= xb) {
            const double slope = model.edge.derivative(b.x, 1);
            if (std::abs(b.y - model.edge(b.x)) / std::sqrt(1.0 + slope * slope) < opt.min_edge_distance) continue;
          }
        }
        cells.push_back(r * g.cols + c);
      }
    if (cells.empty()) throw ConfigError("sweep_scale: smooth-region window contains no admissible positions");
    const std::size_t na = static_cast<std::size_t>(opt.angles);
    std::vector<Best> per(static_cast<std::size_t>(nj) * na);
    parallel_for(per.size(), ctx.threads, [&](std::size_t task) {
      const int j = opt.j_min + static_cast<int>(task / na);
      const double a = scale_of(j);
      const double theta = std::numbers::pi * static_cast<double>(task % na) / static_cast<double>(na);
      const AtomSpectrum atom(spec, {a, theta, opt.center});
      const auto map = atom.coefficient_map(spectrum);
      Best b;
      for (std::size_t idx : cells) {
        const double mag = std::abs(map[idx]);
        if (mag > b.mag) b = {mag, {a, theta, g.sample(idx / g.cols, idx % g.cols)}};
      }
      per[task] = b;
    });
    best.resize(static_cast<std::size_t>(nj));
    for (int jj = 0; jj < nj; ++jj)
      for (std::size_t i = 0; i < na; ++i)
        if (per[jj * na + i].mag > best[jj].mag) best[jj] = per[jj * na + i];
  }

  res.samples.resize(static_cast<std::size_t>(nj));
  parallel_for(res.samples.size(), ctx.threads, [&](std::size_t i) {
    const int j = opt.j_min + static_cast<int>(i);
    res.samples[i] = make_sample(model, j, best[i].p, best[i].mag, ctx.thresholds);
    res.samples[i].x = best[i].p.a;
  });
  res.fit = fit_samples(res.samples, res.fit_range);
  return res;
}

SweepResult sweep_distance(const CartoonFunction& model, const DistanceSweepOptions& opt, const SweepContext& ctx) {
  if (model.edge.empty()) throw DomainError("sweep_distance: model has no edge");
  if (opt.side != 1 && opt.side != -1) throw ConfigError("sweep_distance: side must be +1 or -1");
  SweepResult res;
  res.name = "distance";
  res.x_name = "L";
  res.fit_range = opt.fit_range;
  const double a = scale_of(opt.j);
  const Point p = model.edge.point(opt.edge_position), t = model.edge.tangent(opt.edge_position);
  const CurveletParams base{a, std::atan2(t.y, t.x), p};
  Point dir = base.minor_axis();
  if (model.above(p + 1e-9 * dir) != (opt.side > 0)) dir = -1.0 * dir;
  const AtomSpectrum atom(ctx.frame_spec(), base);
  const SampledField spectrum = spectrum_of(model, ctx);
  res.samples.resize(opt.offsets.size());
  parallel_for(opt.offsets.size(), ctx.threads, [&](std::size_t i) {
    const Point b = p + (opt.offsets[i] * a) * dir;
    const double mag = std::abs(atom.coefficient_from_spectrum(spectrum, b));
    res.samples[i] = make_sample(model, opt.j, {a, base.theta, b}, mag, ctx.thresholds);
    res.samples[i].x = res.samples[i].geom.L;
  });
  res.fit = fit_samples(res.samples, res.fit_range);
  return res;
}

SweepResult sweep_angle(const CartoonFunction& model, const AngleSweepOptions& opt, const SweepContext& ctx) {
  if (model.edge.empty()) throw DomainError("sweep_angle: model has no edge");
  SweepResult res;
  res.name = "angle";
  res.x_name = "|k|";
  res.fit_range = opt.fit_range;
  const double a = scale_of(opt.j), sa = std::sqrt(a);
  const Point p = model.edge.point(opt.edge_position), t = model.edge.tangent(opt.edge_position);
  const double theta_t = std::atan2(t.y, t.x);
  std::vector<double> ks;
  for (double k : opt.ks)
    if (std::abs(k) * sa <= opt.max_theta_prime) ks.push_back(k);
  const FrameSpec spec = ctx.frame_spec();
  const SampledField spectrum = spectrum_of(model, ctx);
  res.samples.resize(ks.size());
  parallel_for(ks.size(), ctx.threads, [&](std::size_t i) {
    const CurveletParams cp{a, theta_t + ks[i] * sa, p};
    const double mag = std::abs(AtomSpectrum(spec, cp).coefficient_from_spectrum(spectrum));
    res.samples[i] = make_sample(model, opt.j, cp, mag, ctx.thresholds);
    res.samples[i].x = std::abs(res.samples[i].geom.k);
  });
  res.fit = fit_samples(res.samples, res.fit_range);
  return res;
}

std::vector<double> geometric_range(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw ConfigError("geometric_range: need 0 < lo <= hi and count >= 1");
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return out;
}

std::string samples_csv(const std::vector<DecaySample>& samples) {
  std::string out = "j,a,theta,b1,b2,L,theta_prime,k,branch,magnitude\n";
  for (const auto& s : samples) {
    out += std::to_string(s.j) + ',' + format_double(s.params.a) + ',' + format_double(s.params.theta) + ',' +
           format_double(s.params.b.x) + ',' + format_double(s.params.b.y) + ',' + format_double(s.geom.L) + ',' +
           format_double(s.geom.theta_prime) + ',' + format_double(s.geom.k) + ',' + to_string(s.label.branch) + ',' +
           format_double(s.magnitude) + '\n';
  }
  return out;
}

// ---- claims ----------------------------------------------------------------------------

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::optional<double> opt_number(const json& v) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw ConfigError("window bounds must be numbers or null");
  return v.get<double>();
}

RegimeThresholds thresholds_from(const json& j) {
  reject_unknown(j, {"c_align", "epsilon", "boundary_band"}, "thresholds");
  RegimeThresholds th;
  th.c_align = get_or(j, "c_align", th.c_align);
  th.epsilon = get_or(j, "epsilon", th.epsilon);
  th.boundary_band = get_or(j, "boundary_band", th.boundary_band);
  if (!(th.c_align > 0.0) || !(th.epsilon > 0.0 && th.epsilon < 2.0) || !(th.boundary_band >= 1.0))
    throw ConfigError("thresholds: need c_align > 0, 0 < epsilon < 2, boundary_band >= 1");
  return th;
}

ClaimsConfig claims_from(const json& j) {
  reject_unknown(j, {"thresholds", "envelope_constant", "claims"}, "claims config");
  ClaimsConfig cfg;
  if (j.contains("thresholds")) cfg.thresholds = thresholds_from(j.at("thresholds"));
  cfg.envelope_constant = get_or(j, "envelope_constant", cfg.envelope_constant);
  if (!j.contains("claims") || !j.at("claims").is_array()) throw ConfigError("claims config: 'claims' must be an array");
  for (const auto& c : j.at("claims")) {
    reject_unknown(c, {"name", "sweep", "branch", "window", "min_r2"}, "claim");
    ClaimSpec s;
    s.name = get_or<std::string>(c, "name", "");
    s.sweep = get_or<std::string>(c, "sweep", "");
    if (s.name.empty() || s.sweep.empty()) throw ConfigError("claim: 'name' and 'sweep' are required");
    const std::string br = get_or<std::string>(c, "branch", "ANY");
    if (br != "ANY") s.branch = branch_from_string(br);
    if (!c.contains("window") || !c.at("window").is_array() || c.at("window").size() != 2)
      throw ConfigError("claim '" + s.name + "': 'window' must be [lo, hi] (null for open ends)");
    s.lo = opt_number(c.at("window")[0]);
    s.hi = opt_number(c.at("window")[1]);
    if (c.contains("min_r2")) s.min_r2 = opt_number(c.at("min_r2"));
    cfg.claims.push_back(s);
  }
  return cfg;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

json num_or_null(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::string window_text(const ClaimSpec& c) {
  return "[" + (c.lo ? format_double(*c.lo) : std::string("-inf")) + ", " +
         (c.hi ? format_double(*c.hi) : std::string("inf")) + "]";
}

}  // namespace

ClaimsConfig claims_from_json_text(const std::string& text) { return claims_from(parse_text(text)); }

Verdict verdict(const std::vector<SweepResult>& sweeps, const ClaimsConfig& claims) {
  Verdict v;
  bool any_ran = false, all_pass = true;
  for (const auto& c : claims.claims) {
    ClaimResult r;
    r.claim = c;
    auto it = std::find_if(sweeps.begin(), sweeps.end(), [&](const SweepResult& s) { return s.name == c.sweep; });
    if (it == sweeps.end()) {
      r.status = ClaimStatus::Skipped;
      r.reason = "sweep '" + c.sweep + "' was not run";
      v.results.push_back(r);
      continue;
    }
    any_ran = true;
    r.fit = fit_samples(it->samples, it->fit_range, c.branch);
    const std::string branch = c.branch ? to_string(*c.branch) : std::string("ANY");
    if (r.fit.degenerate) {
      r.status = ClaimStatus::Fail;
      r.reason = "branch " + branch + ": degenerate fit (" + r.fit.reason + ")";
    } else {
      const double s = r.fit.fit.slope;
      std::string why;
      if ((c.lo && s < *c.lo) || (c.hi && s > *c.hi))
        why = "slope " + format_double(s) + " outside " + window_text(c);
      if (c.min_r2 && r.fit.fit.r_squared < *c.min_r2) {
        if (!why.empty()) why += "; ";
        why += "r2 " + format_double(r.fit.fit.r_squared) + " below " + format_double(*c.min_r2);
      }
      r.status = why.empty() ? ClaimStatus::Pass : ClaimStatus::Fail;
      r.reason = why.empty() ? "ok" : "branch " + branch + ": " + why;
    }
    if (r.status == ClaimStatus::Fail) all_pass = false;
    v.results.push_back(r);
  }
  v.pass = any_ran && all_pass;
  return v;
}

std::string Verdict::to_json() const {
  json j;
  j["verdict"] = pass ? "PASS" : "FAIL";
  j["claims"] = json::array();
  for (const auto& r : results) {
    json c;
    c["name"] = r.claim.name;
    c["sweep"] = r.claim.sweep;
    c["branch"] = r.claim.branch ? to_string(*r.claim.branch) : "ANY";
    c["window"] = {num_or_null(r.claim.lo), num_or_null(r.claim.hi)};
    c["min_r2"] = num_or_null(r.claim.min_r2);
    c["status"] = r.status == ClaimStatus::Pass ? "PASS" : r.status == ClaimStatus::Fail ? "FAIL" : "SKIPPED";
    c["reason"] = r.reason;
    if (!r.fit.degenerate) {
      c["slope"] = r.fit.fit.slope;
      c["intercept"] = r.fit.fit.intercept;
      c["r_squared"] = r.fit.fit.r_squared;
      c["n_points"] = r.fit.fit.n_points;
    } else {
      c["slope"] = nullptr;
    }
    j["claims"].push_back(c);
  }
  return j.dump(2);
}

std::vector<double> envelope_ratios(const SweepResult& sweep) {
  std::vector<double> out;
  for (const auto& s : sweep.samples) out.push_back(s.magnitude / std::pow(s.params.a, 0.75));
  return out;
}

// ---- experiment --------------------------------------------------------------------------

namespace {

CartoonFunction model_from(const json& j) {
  if (j.is_string()) return named_model(j.get<std::string>());
  if (j.is_object()) return model_from_json_text(j.dump());
  throw ConfigError("model must be a name or an object");
}

std::array<int, 2> j_range(const json& s) {
  if (!s.contains("j")) return {3, 8};
  const auto& v = s.at("j");
  if (!v.is_array() || v.size() != 2) throw ConfigError("'j' must be [j_min, j_max]");
  return {v[0].get<int>(), v[1].get<int>()};
}

std::array<double, 2> range_of(const json& s, const char* key, std::array<double, 2> fallback) {
  if (!s.contains(key)) return fallback;
  const auto& v = s.at(key);
  if (!v.is_array() || v.size() != 2) throw ConfigError(std::string("'") + key + "' must be [lo, hi]");
  return {v[0].get<double>(), v[1].get<double>()};
}

ScaleSweepOptions scale_from(const json& s, AlignmentPolicy fallback) {
  reject_unknown(s, {"model", "policy", "j", "edge_positions", "across_steps", "center", "window", "angles",
                     "min_edge_distance"},
                 "scale sweep");
  ScaleSweepOptions o;
  o.policy = s.contains("policy") ? policy_from_string(s.at("policy").get<std::string>()) : fallback;
  const auto jr = j_range(s);
  o.j_min = jr[0];
  o.j_max = jr[1];
  o.edge_positions = get_or(s, "edge_positions", o.edge_positions);
  o.across_steps = get_or(s, "across_steps", o.across_steps);
  const auto c = range_of(s, "center", {o.center.x, o.center.y});
  o.center = {c[0], c[1]};
  o.window = get_or(s, "window", o.window);
  o.angles = get_or(s, "angles", o.angles);
  o.min_edge_distance = get_or(s, "min_edge_distance", o.min_edge_distance);
  return o;
}

int side_from(const json& s) {
  if (!s.contains("side")) return -1;
  const auto& v = s.at("side");
  if (v.is_string()) {
    if (v == "minus") return -1;
    if (v == "plus") return 1;
  } else if (v.is_number_integer() && (v.get<int>() == 1 || v.get<int>() == -1)) {
    return v.get<int>();
  }
  throw ConfigError("'side' must be \"minus\", \"plus\", -1 or 1");
}

std::vector<double> values_from(const json& v, const char* what) {
  if (v.is_array()) return v.get<std::vector<double>>();
  if (!v.is_object()) throw ConfigError(std::string("'") + what + "' must be a list or a range object");
  reject_unknown(v, {"from", "to", "step", "count", "spacing", "symmetric", "include_zero"}, what);
  const double lo = v.at("from").get<double>(), hi = v.at("to").get<double>();
  std::vector<double> out;
  if (v.contains("step")) {
    const double st = v.at("step").get<double>();
    if (!(st > 0.0) || hi < lo) throw ConfigError(std::string(what) + ": need step > 0 and to >= from");
    const long n = std::lround(std::floor((hi - lo) / st + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + st * static_cast<double>(i));
  } else {
    const int count = get_or(v, "count", 10);
    if (get_or<std::string>(v, "spacing", "geometric") == "linear") {
      for (int i = 0; i < count; ++i) out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    } else {
      out = geometric_range(lo, hi, count);
    }
  }
  if (get_or(v, "symmetric", false)) {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(-out[i]);
  }
  if (get_or(v, "include_zero", false)) out.insert(out.begin(), 0.0);
  return out;
}

}  // namespace

DecayExperiment decay_experiment_from_json_text(const std::string& text) {
  const json j = parse_text(text);
  reject_unknown(j, {"grid", "frame", "thresholds", "sweeps", "claims"}, "decay config");
  DecayExperiment e;
  try {
    const int n = get_or(j, "grid", 1024);
    if (n < 16) throw ConfigError("grid must be at least 16");
    e.context.grid = GridSpec::unit(static_cast<std::size_t>(n));
    if (j.contains("frame")) {
      const auto& f = j.at("frame");
      reject_unknown(f, {"j0", "base_angles", "smoothness"}, "frame");
      e.context.j0 = get_or(f, "j0", e.context.j0);
      e.context.base_angles = get_or(f, "base_angles", e.context.base_angles);
      e.context.window_smoothness = get_or(f, "smoothness", e.context.window_smoothness);
    }
    if (j.contains("claims")) e.claims = claims_from(j.at("claims"));
    e.context.thresholds = j.contains("thresholds") ? thresholds_from(j.at("thresholds")) : e.claims.thresholds;
    if (!j.contains("sweeps")) throw ConfigError("decay config: 'sweeps' is required");
    const auto& sw = j.at("sweeps");
    reject_unknown(sw, {"scale", "smooth", "distance", "angle"}, "sweeps");
    if (sw.contains("scale"))
      e.scale.emplace(model_from(sw.at("scale").value("model", json("straight"))),
                      scale_from(sw.at("scale"), AlignmentPolicy::OnEdgeTangent));
    if (sw.contains("smooth"))
      e.smooth.emplace(model_from(sw.at("smooth").value("model", json("smooth_kink"))),
                       scale_from(sw.at("smooth"), AlignmentPolicy::SmoothRegion));
    if (sw.contains("distance")) {
      const auto& s = sw.at("distance");
      reject_unknown(s, {"model", "j", "edge_position", "side", "L", "fit_range"}, "distance sweep");
      DistanceSweepOptions o;
      o.j = get_or(s, "j", o.j);
      o.edge_position = get_or(s, "edge_position", o.edge_position);
      o.side = side_from(s);
      o.offsets = s.contains("L") ? values_from(s.at("L"), "L") : values_from(json{{"from", 0}, {"to", 20}, {"step", 1}}, "L");
      o.fit_range = range_of(s, "fit_range", o.fit_range);
      e.distance.emplace(model_from(s.value("model", json("straight"))), o);
    }
    if (sw.contains("angle")) {
      const auto& s = sw.at("angle");
      reject_unknown(s, {"model", "j", "edge_position", "k", "max_theta_prime", "fit_range"}, "angle sweep");
      AngleSweepOptions o;
      o.j = get_or(s, "j", o.j);
      o.edge_position = get_or(s, "edge_position", o.edge_position);
      o.ks = s.contains("k") ? values_from(s.at("k"), "k")
                             : values_from(json{{"from", 2}, {"to", 16}, {"count", 13}, {"symmetric", true},
                                                {"include_zero", true}},
                                           "k");
      o.max_theta_prime = get_or(s, "max_theta_prime", o.max_theta_prime);
      o.fit_range = range_of(s, "fit_range", o.fit_range);
      e.angle.emplace(model_from(s.value("model", json("straight"))), o);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("decay config: ") + ex.what());
  }
  return e;
}

DecayReport run_decay(const DecayExperiment& e) {
  DecayReport r;
  if (e.scale) {
    r.sweeps.push_back(sweep_scale(e.scale->first, e.scale->second, e.context));
    r.sweeps.back().name = "scale";
  }
  if (e.smooth) {
    r.sweeps.push_back(sweep_scale(e.smooth->first, e.smooth->second, e.context));
    r.sweeps.back().name = "smooth";
  }
  if (e.distance) r.sweeps.push_back(sweep_distance(e.distance->first, e.distance->second, e.context));
  if (e.angle) r.sweeps.push_back(sweep_angle(e.angle->first, e.angle->second, e.context));
  r.verdict = verdict(r.sweeps, e.claims);
  return r;
}

}  // namespace cvlab
