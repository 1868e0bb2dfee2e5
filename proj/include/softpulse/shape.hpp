#pragma once

#include <string>
#include <vector>

namespace softpulse {

// Fourier-parameterized control envelope over one clock interval.
//
// Conventions used throughout the library: time is measured in units of the
// interval length tau, amplitudes in units of the angular frequency
// Omega = 2*pi/tau.  The waveform is
//
//   V(t) = a0 + sum_m [ a[m-1] cos(2 pi m t) + b[m-1] sin(2 pi m t) ],  t in [0, 1],
//
// so the net rotation angle is exactly 2*pi*a0 and every result depends on
// couplings only through the dimensionless products J*tau.
struct PulseShape {
  std::string name;
  double a0 = 0.0;
  std::vector<double> a;  // cosine coefficients A_1..A_M
  std::vector<double> b;  // sine coefficients B_1..B_M
  int smoothness_l = 0;   // 2L derivatives of V vanish at t = 0, 1
  int claimed_k = 0;      // certified self-refocusing order

  int harmonics() const { return static_cast<int>(a.size() > b.size() ? a.size() : b.size()); }
};

// V(t); throws std::out_of_range outside [0, 1].
double evaluate(const PulseShape& shape, double t);

// Integral of V * Omega over [0, t]: the rotation angle accumulated by time t,
// in radians.  Closed form, no quadrature.
double accumulated_angle(const PulseShape& shape, double t);

// Full-interval rotation angle, 2*pi*a0 exactly.
double rotation_angle(const PulseShape& shape);

// Residual j (j = 0..L-1) is the (2j)-th derivative of V at the interval ends
// in units of Omega^(2j): a0 + sum a_m, sum m^2 a_m, sum m^4 a_m, ...
// Odd derivatives of a pure-cosine series vanish there identically.
std::vector<double> smoothness_residuals(const PulseShape& shape);

// Shipped shapes: S1, S2, Q1, Q2 (published coefficient sets), plus the
// Gaussian and Hermite reference envelopes re-fit to the Fourier form.
// Throws std::invalid_argument for unknown names.
PulseShape builtin(const std::string& name);
bool is_builtin(const std::string& name);

// Gaussian envelope exp(-(t-1/2)^2 / 2 sigma^2), truncated to [0,1],
// offset-subtracted to vanish at the ends, amplitude calibrated to `angle`.
PulseShape gaussian_reference(double angle, double sigma = 0.125);

// Hermite envelope (1 - beta u^2) exp(-u^2), u = (t-1/2)/sigma, with beta
// calibrated so a pi pulse is first-order self-refocusing (K = 1).
PulseShape hermite_reference(double angle, double sigma = 0.125);

// Alternate reading of the shifted Fourier convention: odd-harmonic signs
// flipped.  Kept behind this explicit call so both conventions stay testable;
// the default convention is the one that passes order-K certification.
PulseShape center_shifted(const PulseShape& shape);

// JSON pulse file: {"name", "angle_over_pi", "L", "K", "A": [A0..AM], "B": [B1..BM]}.
std::string pulse_to_json(const PulseShape& shape);
PulseShape pulse_from_json(const std::string& text);
void save_pulse(const PulseShape& shape, const std::string& path);
PulseShape load_pulse(const std::string& path);

// `name` may be a builtin name or a path to a pulse JSON file.
PulseShape resolve_shape(const std::string& name);

}  // namespace softpulse
