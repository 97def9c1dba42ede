// Runs the twelve acceptance criteria and prints one PASS/FAIL line for each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>

#include "cvlab/experiments.hpp"

using ojson = nlohmann::ordered_json;

namespace {

struct Line {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const ojson& claim(const ojson& decay_report, const std::string& name) {
  for (const auto& c : decay_report.at("verdict").at("claims"))
    if (c.at("name") == name) return c;
  throw std::runtime_error("claim " + name + " missing");
}

// Slope and r^2 of a claim, or NaN when the fit is degenerate.
std::pair<double, double> slope_of(const ojson& c) {
  if (c.at("slope").is_null()) return {std::nan(""), std::nan("")};
  return {c.at("slope").get<double>(), c.at("r_squared").get<double>()};
}

bool same_csv_files(const cvlab::ExperimentOutput& a, const cvlab::ExperimentOutput& b, std::string& detail) {
  bool same = true;
  int compared = 0;
  for (const auto& [name, text] : a.files) {
    if (!name.ends_with(".csv")) continue;
    ++compared;
    const auto it = b.files.find(name);
    if (it == b.files.end() || it->second != text) {
      same = false;
      detail += " differs:" + name;
    }
  }
  detail += " csv_files=" + std::to_string(compared);
  return same && compared > 0;
}

}  // namespace

int main() {
  const unsigned threads = std::max(4u, std::thread::hardware_concurrency());
  int failures = 0;
  auto report = [&](int id, const std::string& title, const Line& line, double seconds) {
    std::printf("[%s] criterion %2d %-32s %s (%.1fs)\n", line.pass ? "PASS" : "FAIL", id, title.c_str(),
                line.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += !line.pass;
  };
  auto timed = [](const std::function<cvlab::ExperimentOutput()>& fn, double& seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    auto out = fn();
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  };
  auto run = [&](const std::string& cmd, const ojson& cfg, unsigned n) {
    return cvlab::run_experiment(cmd, cvlab::resolve_config(cmd, cfg), n);
  };

  // 1 and 3: frame self-test.
  double t_self = 0.0;
  const auto self = timed([&] { return run("frame-selftest", ojson::object(), threads); }, t_self);
  {
    const double rt = self.report.at("round_trip_rel_err").get<double>();
    const double pv = self.report.at("parseval_rel_err").get<double>();
    const int fields = self.report.at("fields").get<int>();
    report(1, "tight-frame round trip",
           {rt <= 1e-6 && pv <= 1e-6 && fields >= 20,
            "fields=" + std::to_string(fields) + " round_trip=" + num(rt) + " parseval=" + num(pv) + " (limit 1e-6)"},
           t_self);
  }

  double t_oracle = 0.0;
  const auto oracle = timed([&] { return run("oracle", ojson::object(), threads); }, t_oracle);
  {
    const double e = oracle.report.at("max_rel_err").get<double>();
    const int pairs = oracle.report.at("pairs").get<int>();
    report(2, "oracle equivalence",
           {e <= 1e-8 && pairs >= 100, "pairs=" + std::to_string(pairs) + " max_rel_err=" + num(e) + " (limit 1e-8)"},
           t_oracle);
  }

  {
    const double m = self.report.at("moment_worst_rel").get<double>();
    const double ctl = self.report.at("negative_control_rel").get<double>();
    report(3, "directional vanishing moments",
           {m <= 1e-6 && ctl >= 1e-3, "orders 0-2 worst=" + num(m) + " (limit 1e-6) gaussian=" + num(ctl) + " (floor 1e-3)"},
           0.0);
  }

  // 4 to 7: decay sweeps at 1024^2.
  ojson decay_cfg = cvlab::default_config("decay");
  double t_decay = 0.0;
  const auto decay = timed([&] { return run("decay", decay_cfg, threads); }, t_decay);
  {
    const auto [s, r2] = slope_of(claim(decay.report, "edge_aligned_scale"));
    report(4, "edge-aligned decay", {s >= 0.60 && s <= 0.90 && r2 >= 0.9,
                                     "slope=" + num(s) + " in [0.60, 0.90] r2=" + num(r2) + " (floor 0.9)"},
           t_decay);
  }
  {
    const auto [s, r2] = slope_of(claim(decay.report, "smooth_scale"));
    report(5, "smooth-branch decay", {s >= 3.35, "slope=" + num(s) + " (floor 3.35)"}, 0.0);
  }
  {
    const auto [s, r2] = slope_of(claim(decay.report, "distance_tail"));
    report(6, "distance tail", {s <= -2.0 && r2 >= 0.9, "power=" + num(s) + " (ceiling -2) r2=" + num(r2) + " (floor 0.9)"},
           0.0);
  }
  {
    const auto [s, r2] = slope_of(claim(decay.report, "angular_tail"));
    report(7, "angular tail", {s <= -2.5, "power=" + num(s) + " (ceiling -2.5)"}, 0.0);
  }

  // 8 to 10: geometry suite.
  double t_geo = 0.0;
  const auto geo = timed([&] { return run("geometry", ojson::object(), threads); }, t_geo);
  {
    const auto& tw = geo.report.at("twist");
    const auto& cv = geo.report.at("change_of_variables");
    const double rt = tw.at("round_trip_max_err").get<double>();
    const double jac = tw.at("jacobian_max_err").get<double>();
    const double cov = cv.at("rel_defect").get<double>();
    const auto pts = tw.at("points").get<std::size_t>();
    const auto straight = tw.at("straightening_violations").get<std::size_t>();
    const auto cols = cv.at("columns").get<std::size_t>();
    const bool ok = pts >= 100000 && rt <= 1e-10 && tw.at("images_outside_r0").get<std::size_t>() == 0 &&
                    jac <= 1e-6 && cov <= 1e-4 && cols >= 2048 && straight == 0;
    report(8, "twist suite",
           {ok, "round_trip=" + num(rt) + " jacobian=" + num(jac) + " cov_defect=" + num(cov) + " columns=" +
                    std::to_string(cols) + " straightening_violations=" + std::to_string(straight)},
           t_geo);
  }
  {
    const auto& d = geo.report.at("derivatives");
    const double slope = d.at("d1_slope").get<double>();
    bool ok = std::abs(slope - 1.0) <= 0.2 && !d.at("halving_ratios").empty();
    std::string detail = "d1_slope=" + num(slope);
    for (const auto& [k, v] : d.at("halving_ratios").items()) {
      const double r = v.get<double>();
      ok = ok && r >= 1.6 && r <= 2.4;
      detail += " " + k + "=" + num(r);
    }
    report(9, "derivative-bound shapes", {ok, detail + " (ratios in [1.6, 2.4])"}, 0.0);
  }
  {
    const auto& p = geo.report.at("partition");
    const auto& in = geo.report.at("integrals");
    const auto v = p.at("violations").get<std::size_t>();
    const double rel = in.at("rel_defect").get<double>();
    const auto n = p.at("samples_per_layout").get<std::size_t>();
    report(10, "partition identities",
           {v == 0 && rel <= 1e-10 && n >= 1000000,
            "samples_per_layout=" + std::to_string(n) + " violations=" + std::to_string(v) + " integral_defect=" +
                num(rel) + " (limit 1e-10)"},
           0.0);
  }

  // 11: NLA rate on straight and parabola edges at 512^2.
  const ojson nla_cfg{{"models", {"straight", "parabola"}}, {"grids", {512}}};
  double t_nla = 0.0;
  const auto nla = timed([&] { return run("nla", nla_cfg, threads); }, t_nla);
  {
    bool ok = true;
    std::string detail;
    for (const auto& c : nla.report.at("curves")) {
      const double s = c.at("slope").is_null() ? std::nan("") : c.at("slope").get<double>();
      const double r2 = c.at("r_squared").is_null() ? std::nan("") : c.at("r_squared").get<double>();
      const bool mono = c.at("monotone").get<bool>();
      ok = ok && s >= -2.4 && s <= -1.6 && r2 >= 0.9 && mono;
      detail += c.at("model").get<std::string>() + ": slope=" + num(s) + " r2=" + num(r2) +
                (mono ? " monotone; " : " NOT monotone; ");
    }
    report(11, "NLA rate", {ok, detail + "window M in [64, 4096], slope in [-2.4, -1.6], r2 >= 0.9"}, t_nla);
  }

  // 12: criteria 4, 7 and 11 again on one thread.
  {
    ojson cfg = decay_cfg;
    cfg["sweeps"].erase("smooth");
    cfg["sweeps"].erase("distance");
    double t_rerun = 0.0;
    std::string detail = "threads 1 vs " + std::to_string(threads) + ":";
    const auto d1 = timed([&] { return run("decay", cfg, 1); }, t_rerun);
    double t_nla1 = 0.0;
    const auto n1 = timed([&] { return run("nla", nla_cfg, 1); }, t_nla1);
    cvlab::ExperimentOutput dn = decay;
    std::erase_if(dn.files, [](const auto& kv) { return kv.first == "smooth.csv" || kv.first == "distance.csv"; });
    std::string dd, nd;
    const bool ok_d = same_csv_files(d1, dn, dd) && same_csv_files(dn, d1, dd);
    const bool ok_n = same_csv_files(n1, nla, nd) && same_csv_files(nla, n1, nd);
    report(12, "determinism", {ok_d && ok_n, detail + " decay" + dd + " nla" + nd}, t_rerun + t_nla1);
  }

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
