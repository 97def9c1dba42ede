#include "cvlab/nla.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cvlab/error.hpp"
#include "cvlab/parallel.hpp"
#include "json.hpp"

namespace cvlab {

std::vector<double> flatten(const CoefficientTable& table) {
  std::vector<double> out(table.coarse.values);
  out.reserve(table.total_count());
  for (const auto& b : table.bands) out.insert(out.end(), b.values.begin(), b.values.end());
  return out;
}

void unflatten(CoefficientTable& table, const std::vector<double>& values) {
  if (values.size() != table.total_count()) throw DimensionError("unflatten: size does not match the table");
  auto it = values.begin();
  std::copy(it, it + static_cast<std::ptrdiff_t>(table.coarse.values.size()), table.coarse.values.begin());
  it += static_cast<std::ptrdiff_t>(table.coarse.values.size());
  for (auto& b : table.bands) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(b.values.size()), b.values.begin());
    it += static_cast<std::ptrdiff_t>(b.values.size());
  }
}

std::vector<std::size_t> magnitude_order(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(values[a]), mb = std::abs(values[b]);
    return ma != mb ? ma > mb : a < b;
  });
  return idx;
}

namespace {

std::vector<double> keep_top(const std::vector<double>& flat, const std::vector<std::size_t>& order, std::size_t M) {
  std::vector<double> kept(flat.size(), 0.0);
  for (std::size_t i = 0; i < M; ++i) kept[order[i]] = flat[order[i]];
  return kept;
}

}  // namespace

CoefficientTable mterm_approximate(const CoefficientTable& table, std::size_t M) {
  const auto flat = flatten(table);
  if (M > flat.size()) throw DomainError("mterm_approximate: M exceeds the coefficient count");
  CoefficientTable out = table;
  unflatten(out, keep_top(flat, magnitude_order(flat), M));
  return out;
}

std::vector<std::size_t> default_term_counts() {
  std::vector<std::size_t> Ms;
  for (int h = 8; h <= 28; ++h) Ms.push_back(static_cast<std::size_t>(std::lround(std::pow(2.0, 0.5 * h))));
  return Ms;
}

bool NlaCurve::monotone(double tol) const {
  for (std::size_t i = 1; i < errors.size(); ++i)
    if (errors[i] > errors[i - 1] + tol) return false;
  return true;
}

std::string NlaCurve::csv() const {
  std::string out = "M,error_sq\n";
  for (std::size_t i = 0; i < Ms.size(); ++i) out += std::to_string(Ms[i]) + ',' + format_double(errors[i]) + '\n';
  return out;
}

std::string NlaCurve::to_json() const {
  nlohmann::json j;
  j["model"] = model;
  j["grid"] = grid;
  j["frame"] = {{"j0", spec.j0}, {"j_max", spec.j_max}, {"base_angles", spec.base_angles},
                {"smoothness", spec.window_smoothness}};
  j["norm_sq"] = norm_sq;
  j["total_count"] = total_count;
  j["window"] = {window.lo, window.hi};
  j["monotone"] = monotone();
  if (fit_valid) {
    j["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}, {"n_points", fit.n_points}};
  } else {
    j["fit"] = nullptr;
  }
  j["M"] = Ms;
  j["error_sq"] = errors;
  j["discarded"] = discarded;
  return j.dump(2);
}

NlaCurve nla_curve(const SampledField& f, const FrameSpec& spec, const NlaOptions& options, const std::string& name) {
  const std::vector<std::size_t> Ms = options.Ms.empty() ? default_term_counts() : options.Ms;
  if (!std::is_sorted(Ms.begin(), Ms.end())) throw DomainError("nla_curve: term counts must be ascending");
  const CurveletFrame frame(spec);
  const CoefficientTable table = frame.forward(f, options.threads);
  const auto flat = flatten(table);
  if (!Ms.empty() && Ms.back() > flat.size()) throw DomainError("nla_curve: M exceeds the coefficient count");
  const auto order = magnitude_order(flat);

  NlaCurve c;
  c.model = name;
  c.grid = f.rows();
  c.spec = spec;
  c.norm_sq = f.norm_sq();
  c.total_count = flat.size();
  c.Ms = Ms;
  c.window = options.window;
  c.errors.resize(Ms.size());
  c.discarded.resize(Ms.size());
  // Dropped energy, summed from the smallest coefficient upwards.
  std::vector<double> tail(flat.size() + 1, 0.0);
  for (std::size_t i = flat.size(); i-- > 0;) tail[i] = tail[i + 1] + flat[order[i]] * flat[order[i]];
  parallel_for(Ms.size(), options.threads, [&](std::size_t i) {
    CoefficientTable t = table;
    unflatten(t, keep_top(flat, order, Ms[i]));
    c.errors[i] = (f - frame.inverse(t, 1)).norm_sq();
    c.discarded[i] = tail[Ms[i]];
  });

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < Ms.size(); ++i)
    if (Ms[i] >= c.window.lo && Ms[i] <= c.window.hi && c.errors[i] > 0.0) {
      xs.push_back(static_cast<double>(Ms[i]));
      ys.push_back(c.errors[i]);
    }
  if (xs.size() >= 2) {
    c.fit = fit_loglog(xs, ys);
    c.fit_valid = true;
  }
  return c;
}

NlaCurve nla_curve(const CartoonFunction& model, std::size_t grid_n, const NlaOptions& options) {
  const GridSpec g = GridSpec::unit(grid_n);
  auto c = nla_curve(rasterize(model, g, options.threads), FrameSpec::for_grid(g), options, model.name);
  return c;
}

CurveComparison compare_curves(const std::vector<NlaCurve>& curves) {
  if (curves.empty()) throw DomainError("compare_curves: need at least one curve");
  std::map<std::size_t, std::vector<std::string>> rows;
  for (std::size_t k = 0; k < curves.size(); ++k)
    for (std::size_t i = 0; i < curves[k].Ms.size(); ++i) {
      auto& row = rows[curves[k].Ms[i]];
      row.resize(curves.size());
      row[k] = format_double(curves[k].errors[i]);
    }
  CurveComparison out;
  out.csv = "M";
  for (const auto& c : curves) out.csv += ',' + c.model + '_' + std::to_string(c.grid);
  out.csv += '\n';
  for (auto& [M, row] : rows) {
    row.resize(curves.size());
    out.csv += std::to_string(M);
    for (const auto& v : row) out.csv += ',' + v;
    out.csv += '\n';
  }
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : curves) {
    nlohmann::json e{{"model", c.model}, {"grid", c.grid}, {"window", {c.window.lo, c.window.hi}}};
    e["slope"] = c.fit_valid ? nlohmann::json(c.fit.slope) : nlohmann::json(nullptr);
    e["r_squared"] = c.fit_valid ? nlohmann::json(c.fit.r_squared) : nlohmann::json(nullptr);
    e["monotone"] = c.monotone();
    j.push_back(e);
  }
  out.json = j.dump(2);
  return out;
}

}  // namespace cvlab
