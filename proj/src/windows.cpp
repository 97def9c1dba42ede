#include "cvlab/windows.hpp"

#include <cmath>
#include <numbers>

namespace cvlab::windows {

double smoothstep(double t, int order) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  // S_n(t) = t^{n+1} sum_k C(n+k, k) (1-t)^k
  double sum = 0.0;
  double binom = 1.0;
  double pow_1mt = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) binom = binom * (order + k) / k;
    sum += binom * pow_1mt;
    pow_1mt *= 1.0 - t;
  }
  return std::pow(t, order + 1) * sum;
}

double lowpass(double t, int order, double flat) {
  if (t <= flat) return 1.0;
  if (t >= 1.0) return 0.0;
  return std::cos(0.5 * std::numbers::pi * smoothstep((t - flat) / (1.0 - flat), order));
}

double bandpass(double t, int order, double flat) {
  if (t <= flat || t >= 2.0) return 0.0;
  if (t < 1.0) return std::sin(0.5 * std::numbers::pi * smoothstep((t - flat) / (1.0 - flat), order));
  return lowpass(0.5 * t, order, flat);
}

double highpass(double t, int order, double flat) {
  if (t <= flat) return 0.0;
  if (t >= 1.0) return 1.0;
  return std::sin(0.5 * std::numbers::pi * smoothstep((t - flat) / (1.0 - flat), order));
}

double angular(double u, int order, double transition) {
  const double au = std::abs(u);
  if (au <= 0.5 - transition) return 1.0;
  if (au >= 0.5 + transition) return 0.0;
  return std::cos(0.5 * std::numbers::pi * smoothstep((au - 0.5 + transition) / (2.0 * transition), order));
}

}  // namespace cvlab::windows
