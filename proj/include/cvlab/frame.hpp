#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "cvlab/field.hpp"

namespace cvlab {

// Continuous curvelet label. theta is the direction of the major axis; the
// atom oscillates along the minor axis n = (-sin theta, cos theta).
struct CurveletParams {
  double a = 0.125;
  double theta = 0.0;
  Point b{};

  Point major_axis() const;
  Point minor_axis() const;
};

struct CurveletIndex {
  int j = 0;
  int l = 0;
  std::size_t k1 = 0;
  std::size_t k2 = 0;

  friend bool operator==(const CurveletIndex&, const CurveletIndex&) = default;
};

struct FrameSpec {
  int j0 = 2;
  int j_max = 7;
  int base_angles = 16;
  int window_smoothness = 5;
  // Half-width of the angular window's transition, in units of the angular spacing.
  double angular_transition = 0.5;
  // Low-pass profiles are flat up to this fraction of their cutoff, in [1/2, 1).
  double radial_flat = 0.5;
  GridSpec grid = GridSpec::unit(256);

  // Default levels for a grid: j_max is the last level whose corona starts
  // below the Nyquist frequency.
  static FrameSpec for_grid(const GridSpec& grid, int j0 = 2, int base_angles = 16, int smoothness = 5);

  void validate() const;
  // Angular count at level j: base_angles * 2^(ceil(j/2) - ceil(j0/2)).
  int angles(int j) const;
  // Continuous angular count used by atoms of scale a.
  double continuous_angles(double a) const;
  double nyquist() const;
};

enum class AtomPhase { Even, Odd };

// One-lobe frequency description of the analytic curvelet psi. The real atoms
// are gamma_even = sqrt(2) Re psi and gamma_odd = sqrt(2) Im psi; both have
// unit L2 norm and together pair the two opposite wedges.
class AtomSpectrum {
 public:
  AtomSpectrum(const FrameSpec& spec, const CurveletParams& params);

  const CurveletParams& params() const { return params_; }
  const GridSpec& grid() const { return grid_; }
  std::size_t support_size() const { return index_.size(); }

  // Same window moved to a new centre.
  AtomSpectrum at(Point b) const;

  cplx psi(Point x) const;
  double evaluate(Point x, AtomPhase phase = AtomPhase::Even) const;
  SampledField synthesize(AtomPhase phase = AtomPhase::Even) const;

  // <f, gamma_even> + i <f, gamma_odd> for real f, given spectrum = fft2(f).
  cplx coefficient_from_spectrum(const SampledField& spectrum) const;
  cplx coefficient_from_spectrum(const SampledField& spectrum, Point b) const;

  // Coefficients for every grid position b = sample(r, c) at once.
  std::vector<cplx> coefficient_map(const SampledField& spectrum) const;

 private:
  GridSpec grid_;
  CurveletParams params_;
  std::vector<std::uint32_t> index_;   // flat FFT index of k
  std::vector<std::uint32_t> mirror_;  // flat FFT index of -k
  std::vector<Point> xi_;              // physical frequency of k
  std::vector<double> weight_;
  double scale_ = 0.0;                 // psi(x) = scale * sum w e^{2 pi i xi.(x-b)}
};

// Unit-norm real atom gamma_{a theta b} on the frame grid.
SampledField synthesize_atom(const FrameSpec& spec, const CurveletParams& params,
                             AtomPhase phase = AtomPhase::Even);

// Complex coefficient <f, gamma_even> + i <f, gamma_odd>, evaluated in the
// frequency domain.
cplx coefficient(const SampledField& f, const FrameSpec& spec, const CurveletParams& params);

// Reuses one FFT of f for many coefficients.
class CoefficientProbe {
 public:
  CoefficientProbe(const SampledField& f, const FrameSpec& spec);
  cplx operator()(const CurveletParams& params) const;
  const SampledField& spectrum() const { return spectrum_; }
  const FrameSpec& spec() const { return spec_; }

 private:
  FrameSpec spec_;
  SampledField spectrum_;
};

// Integral of t^order * fn along the line center + t * direction, t in
// [-half_length, half_length], composite trapezoid with the given step.
double line_moment(const std::function<double(Point)>& fn, Point center, Point direction, int order,
                   double half_length, double step);
// sup|fn| * integral of |t|^order over the same line, the natural scale of line_moment.
double line_moment_scale(double sup_norm, int order, double half_length);

struct MomentOptions {
  // Defaults to 0.45 of the smaller grid side.
  double half_length = 0.0;
  // Defaults to half the finer grid spacing.
  double step = 0.0;
  AtomPhase phase = AtomPhase::Even;
};

// Integral of t^order * gamma along the line parallel to the minor axis
// through b + line_offset * major_axis.
cplx directional_moment(const FrameSpec& spec, const CurveletParams& params, int order, double line_offset,
                        MomentOptions options = {});

// ---- discrete tight frame -------------------------------------------------

struct Band {
  int j = 0;  // j0 - 1 marks the coarse band
  int l = 0;  // 0..L_j-1; l and l + L_j/2 are the cosine/sine atoms of one wedge
  std::size_t px = 0;
  std::size_t py = 0;
  std::vector<double> values;  // row-major py x px, k2 rows, k1 cols

  bool is_coarse() const;
  double& at(std::size_t k1, std::size_t k2) { return values[k2 * px + k1]; }
  double at(std::size_t k1, std::size_t k2) const { return values[k2 * px + k1]; }
};

struct CoefficientTable {
  FrameSpec spec;
  Band coarse;
  std::vector<Band> bands;  // ordered by (j, l)

  std::size_t total_count() const;
  double energy() const;
  // Physical position of translation index (k1, k2) in a band.
  Point position(const Band& band, std::size_t k1, std::size_t k2) const;
};

class CurveletFrame {
 public:
  explicit CurveletFrame(FrameSpec spec);
  ~CurveletFrame();
  CurveletFrame(CurveletFrame&&) noexcept;
  CurveletFrame& operator=(CurveletFrame&&) noexcept;

  const FrameSpec& spec() const { return spec_; }

  CoefficientTable forward(const SampledField& f, unsigned threads = 1) const;
  SampledField inverse(const CoefficientTable& table, unsigned threads = 1) const;
  CoefficientTable zeros() const;

  // Sum over all windows of the squared window value at every frequency sample.
  std::vector<double> window_energy() const;
  std::size_t wedge_count() const;

  struct Plan;  // opaque wrapping tables

 private:
  FrameSpec spec_;
  std::unique_ptr<Plan> plan_;
};

CoefficientTable forward(const SampledField& f, const FrameSpec& spec, unsigned threads = 1);
SampledField inverse(const CoefficientTable& table, unsigned threads = 1);

}  // namespace cvlab
