#pragma once

// Smooth windows for the frequency tiling. Every window is built from the
// polynomial smoothstep S_n (C^n at both ends, S_n(t) + S_n(1 - t) = 1) through
// sin(pi/2 S) / cos(pi/2 S), so squared windows sum to one exactly.
namespace cvlab::windows {

double smoothstep(double t, int order);

// Low-pass profile: 1 on [0, flat], 0 on [1, inf), with 1/2 <= flat < 1.
double lowpass(double t, int order, double flat = 0.5);

// Band-pass profile of one dyadic corona, supported on (flat, 2) and equal to
// one on [1, 2 flat]. lowpass(t/2)^2 - lowpass(t)^2 == bandpass(t)^2.
double bandpass(double t, int order, double flat = 0.5);

// Finest band: sqrt(1 - lowpass(t)^2), no outer cutoff.
double highpass(double t, int order, double flat = 0.5);

// Angular bump, flat on |u| <= 1/2 - transition and supported on
// |u| < 1/2 + transition (0 < transition <= 1/2); integer shifts have squares
// summing to one.
double angular(double u, int order, double transition = 0.5);

}  // namespace cvlab::windows
