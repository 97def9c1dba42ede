#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cvlab/cartoon.hpp"
#include "cvlab/frame.hpp"
#include "cvlab/numerics.hpp"

namespace cvlab {

// ---- regimes -------------------------------------------------------------------

enum class Branch { Aligned, TiltedNear, TiltedFar };

std::string to_string(Branch branch);  // ALIGNED, TILTED_NEAR, TILTED_FAR
Branch branch_from_string(const std::string& name);

struct RegimeThresholds {
  double c_align = 1.0;        // aligned iff |theta'| <= c_align sqrt(a)
  double epsilon = 1.0;
  double boundary_band = 2.0;  // tilted samples with |k|^{1-eps/2} / L in [1/band, band] are near the boundary
};

struct RegimeLabel {
  Branch branch = Branch::Aligned;
  bool near_boundary = false;
  double c_align = 1.0;
  double epsilon = 1.0;
};

// Models without an edge count as aligned with L = infinity.
RegimeLabel classify_regime(const EdgeGeometry& geom, double a, const RegimeThresholds& thresholds = {});

// ---- samples and sweeps ------------------------------------------------------------

struct DecaySample {
  int j = 0;  // -log2 a, rounded
  CurveletParams params{};
  EdgeGeometry geom{};
  double magnitude = 0.0;
  RegimeLabel label{};
  double x = 0.0;  // sweep coordinate: a, L or |k|
};

struct SweepFit {
  LogLogFit fit{};
  bool degenerate = true;
  std::string reason;
};

struct SweepResult {
  std::string name;    // scale, smooth, distance, angle (or a custom label)
  std::string x_name;  // a, L, |k|
  std::vector<DecaySample> samples;
  std::array<double, 2> fit_range{0.0, 0.0};  // inclusive window on x
  SweepFit fit;
};

// Fits log magnitude against log x over samples inside the range. Samples near a
// branch boundary and, when branch is set, samples of other branches are skipped.
SweepFit fit_samples(const std::vector<DecaySample>& samples, std::array<double, 2> range,
                     std::optional<Branch> branch = std::nullopt);

enum class AlignmentPolicy { OnEdgeTangent, SmoothRegion };

std::string to_string(AlignmentPolicy policy);
AlignmentPolicy policy_from_string(const std::string& name);

struct ScaleSweepOptions {
  AlignmentPolicy policy = AlignmentPolicy::OnEdgeTangent;
  int j_min = 3;
  int j_max = 8;
  // On-edge policy: b = S(x) + m a/2 n for x in edge_positions, |m| <= across_steps,
  // theta along the tangent at S(x).
  std::vector<double> edge_positions{0.4, 0.5, 0.6};
  int across_steps = 4;
  // Smooth policy: every grid position within a square window (half side
  // `window`) around `center`, at `angles` equispaced orientations in [0, pi).
  Point center{0.5, 0.5};
  double window = 0.15;
  int angles = 16;
  // Smooth policy on edge models: positions closer than this to S are skipped.
  double min_edge_distance = 0.05;
};

struct DistanceSweepOptions {
  int j = 6;
  double edge_position = 0.5;
  int side = -1;  // -1 moves b into f_minus, +1 into f_plus
  std::vector<double> offsets;  // requested L values (minor-axis widths)
  std::array<double, 2> fit_range{2.0, 20.0};
};

struct AngleSweepOptions {
  int j = 6;
  double edge_position = 0.5;
  std::vector<double> ks;  // requested k values, theta = tangent angle + k sqrt(a)
  double max_theta_prime = 1.5;  // larger requested |k| sqrt(a) are dropped
  std::array<double, 2> fit_range{2.0, 16.0};
};

struct SweepContext {
  GridSpec grid = GridSpec::unit(1024);
  int j0 = 2;
  int base_angles = 16;
  int window_smoothness = 5;
  RegimeThresholds thresholds{};
  unsigned threads = 1;

  FrameSpec frame_spec() const;
};

// Per-scale maxima under the alignment policy; one sample per j.
SweepResult sweep_scale(const CartoonFunction& model, const ScaleSweepOptions& options, const SweepContext& ctx);
SweepResult sweep_distance(const CartoonFunction& model, const DistanceSweepOptions& options, const SweepContext& ctx);
SweepResult sweep_angle(const CartoonFunction& model, const AngleSweepOptions& options, const SweepContext& ctx);

// Geometric sequences used by the default configs.
std::vector<double> geometric_range(double lo, double hi, int count);

// CSV "j,a,theta,b1,b2,L,theta_prime,k,branch,magnitude".
std::string samples_csv(const std::vector<DecaySample>& samples);

// ---- claims and verdicts -----------------------------------------------------------

struct ClaimSpec {
  std::string name;
  std::string sweep;
  std::optional<Branch> branch;  // fit only this branch
  std::optional<double> lo, hi;  // slope window
  std::optional<double> min_r2;
};

struct ClaimsConfig {
  RegimeThresholds thresholds{};
  // max |coefficient| <= envelope_constant * a^{3/4} for unit-jump models.
  double envelope_constant = 0.3;
  std::vector<ClaimSpec> claims;
};

ClaimsConfig claims_from_json_text(const std::string& text);

enum class ClaimStatus { Pass, Fail, Skipped };

struct ClaimResult {
  ClaimSpec claim;
  SweepFit fit;
  ClaimStatus status = ClaimStatus::Skipped;
  std::string reason;
};

struct Verdict {
  std::vector<ClaimResult> results;
  bool pass = false;  // every claim that ran passed, and at least one ran

  std::string to_json() const;
};

Verdict verdict(const std::vector<SweepResult>& sweeps, const ClaimsConfig& claims);

// Ratio max magnitude / a^{3/4} per scale sweep sample.
std::vector<double> envelope_ratios(const SweepResult& sweep);

// ---- experiment ---------------------------------------------------------------------

// A decay experiment: context, up to four sweeps, each on its own model.
struct DecayExperiment {
  SweepContext context{};
  std::optional<std::pair<CartoonFunction, ScaleSweepOptions>> scale;
  std::optional<std::pair<CartoonFunction, ScaleSweepOptions>> smooth;
  std::optional<std::pair<CartoonFunction, DistanceSweepOptions>> distance;
  std::optional<std::pair<CartoonFunction, AngleSweepOptions>> angle;
  ClaimsConfig claims{};
};

// Parses an experiment; claims are read from the "claims" object. Unknown keys
// are rejected with ConfigError.
DecayExperiment decay_experiment_from_json_text(const std::string& text);

struct DecayReport {
  std::vector<SweepResult> sweeps;
  Verdict verdict;
};

DecayReport run_decay(const DecayExperiment& experiment);

}  // namespace cvlab
