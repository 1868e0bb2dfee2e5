#include "softpulse/shape.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "softpulse/io.hpp"

namespace softpulse {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Published coefficient sets A_0..A_M for the shipped S/Q pulses.  S_L and
// Q_L are first- and second-order self-refocusing inversion pulses with 2L
// derivatives vanishing at the interval ends.
struct BuiltinRow {
  const char* name;
  int l;
  int k;
  std::vector<double> coeffs;  // A_0, A_1, ...
};

const BuiltinRow kPublished[] = {
    {"S1", 1, 1, {0.5, -1.2053194466, 0.4796460175, 0.2256734291}},
    {"S2", 2, 1, {0.5, -1.1950755990, 0.7841246569, 0.0738054432, -0.1628545011}},
    {"Q1", 1, 2, {0.5, -1.1374003264, 1.5774784244, -0.6825954606, -0.2574826374}},
    {"Q2", 2, 2, {0.5, -1.0965122417, 1.5309957409, -1.1470791601, 0.0020722004, 0.2105234605}},
};

PulseShape from_row(const BuiltinRow& row) {
  PulseShape s;
  s.name = row.name;
  s.a0 = row.coeffs[0];
  s.a.assign(row.coeffs.begin() + 1, row.coeffs.end());
  s.b.assign(s.a.size(), 0.0);
  s.smoothness_l = row.l;
  s.claimed_k = row.k;
  return s;
}

// Composite Simpson over [0, 1] with n panels (n even).
double simpson01(const std::function<double(double)>& f, int n) {
  const double h = 1.0 / n;
  double sum = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Re-fits a sampled envelope to the cosine series, scales it to the requested
// rotation angle, and nudges the last coefficient so V vanishes exactly at
// the interval ends (the envelopes are constructed to vanish there; the
// truncated series must too).
PulseShape fit_envelope(const std::function<double(double)>& envelope, double angle,
                        int n_harmonics, const std::string& name, int claimed_k) {
  constexpr int kQuadPanels = 8192;
  const double raw_mean = simpson01(envelope, kQuadPanels);
  if (std::abs(raw_mean) < 1e-12)
    throw std::invalid_argument("fit_envelope: envelope has (near) zero area");
  const double scale = (angle / kTwoPi) / raw_mean;

  PulseShape s;
  s.name = name;
  s.a0 = angle / kTwoPi;
  s.a.resize(n_harmonics);
  s.b.assign(n_harmonics, 0.0);
  for (int m = 1; m <= n_harmonics; ++m) {
    const double am = 2.0 * simpson01(
        [&](double t) { return envelope(t) * std::cos(kTwoPi * m * t); }, kQuadPanels);
    s.a[m - 1] = scale * am;
  }
  double end_value = s.a0;
  for (double am : s.a) end_value += am;
  s.a[n_harmonics - 1] -= end_value;
  s.smoothness_l = 1;
  s.claimed_k = claimed_k;
  return s;
}

// First-order self-refocusing condition for a symmetric pi pulse against a
// static z-z coupling: the time average of sin(theta(t)) must vanish (the
// cosine average vanishes identically by the V(t) = V(1-t) symmetry).
double refocusing_integral(const PulseShape& s) {
  constexpr int kPanels = 4096;
  return simpson01([&](double t) { return std::sin(accumulated_angle(s, t)); }, kPanels);
}

PulseShape hermite_with_beta(double beta, double angle, double sigma) {
  auto env = [beta, sigma](double t) {
    const double u = (t - 0.5) / sigma;
    return (1.0 - beta * u * u) * std::exp(-u * u);
  };
  const double edge = env(0.0);
  auto shifted = [env, edge](double t) { return env(t) - edge; };
  return fit_envelope(shifted, angle, 16, "herm", 1);
}

double calibrate_hermite_beta(double angle, double sigma) {
  auto f = [&](double beta) { return refocusing_integral(hermite_with_beta(beta, angle, sigma)); };
  // Bracket a sign change, then bisect.  The integral decreases from a
  // positive value as the negative wings grow.
  double lo = 0.0, hi = 0.0, flo = f(0.0);
  for (double beta = 0.1; beta <= 3.0; beta += 0.1) {
    const double fb = f(beta);
    if (flo * fb <= 0.0) {
      lo = beta - 0.1;
      hi = beta;
      break;
    }
    flo = fb;
  }
  if (hi == 0.0) throw std::runtime_error("hermite calibration: no sign change for beta in [0, 3]");
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (flo * fm <= 0.0)
      hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
    if (hi - lo < 1e-14) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double evaluate(const PulseShape& shape, double t) {
  if (t < 0.0 || t > 1.0)
    throw std::out_of_range("evaluate: t outside [0, 1]");
  double v = shape.a0;
  for (std::size_t m = 0; m < shape.a.size(); ++m)
    v += shape.a[m] * std::cos(kTwoPi * (m + 1) * t);
  for (std::size_t m = 0; m < shape.b.size(); ++m)
    v += shape.b[m] * std::sin(kTwoPi * (m + 1) * t);
  return v;
}

double accumulated_angle(const PulseShape& shape, double t) {
  double angle = kTwoPi * shape.a0 * t;
  for (std::size_t m = 0; m < shape.a.size(); ++m)
    angle += shape.a[m] * std::sin(kTwoPi * (m + 1) * t) / (m + 1);
  for (std::size_t m = 0; m < shape.b.size(); ++m)
    angle += shape.b[m] * (1.0 - std::cos(kTwoPi * (m + 1) * t)) / (m + 1);
  return angle;
}

double rotation_angle(const PulseShape& shape) { return kTwoPi * shape.a0; }

std::vector<double> smoothness_residuals(const PulseShape& shape) {
  std::vector<double> res;
  res.reserve(shape.smoothness_l);
  for (int j = 0; j < shape.smoothness_l; ++j) {
    double r = (j == 0) ? shape.a0 : 0.0;
    for (std::size_t m = 0; m < shape.a.size(); ++m)
      r += shape.a[m] * std::pow(double(m + 1), 2.0 * j);
    res.push_back(r);
  }
  return res;
}

PulseShape builtin(const std::string& name) {
  for (const auto& row : kPublished)
    if (name == row.name) return from_row(row);
  if (name == "gauss") return gaussian_reference(kPi);
  if (name == "herm") return hermite_reference(kPi);
  throw std::invalid_argument("unknown builtin pulse shape: " + name);
}

bool is_builtin(const std::string& name) {
  for (const auto& row : kPublished)
    if (name == row.name) return true;
  return name == "gauss" || name == "herm";
}

PulseShape gaussian_reference(double angle, double sigma) {
  auto env = [sigma](double t) {
    const double u = t - 0.5;
    return std::exp(-u * u / (2.0 * sigma * sigma));
  };
  const double edge = env(0.0);
  auto shifted = [env, edge](double t) { return env(t) - edge; };
  PulseShape s = fit_envelope(shifted, angle, 16, "gauss", 0);
  return s;
}

PulseShape hermite_reference(double angle, double sigma) {
  const double beta = calibrate_hermite_beta(kPi, sigma);
  PulseShape s = hermite_with_beta(beta, angle, sigma);
  return s;
}

PulseShape center_shifted(const PulseShape& shape) {
  PulseShape s = shape;
  s.name = shape.name + "@shifted";
  for (std::size_t m = 0; m < s.a.size(); m += 2) s.a[m] = -s.a[m];
  for (std::size_t m = 0; m < s.b.size(); m += 2) s.b[m] = -s.b[m];
  return s;
}

std::string pulse_to_json(const PulseShape& shape) {
  Json j;
  j["name"] = shape.name;
  j["angle_over_pi"] = round12(2.0 * shape.a0);
  j["L"] = shape.smoothness_l;
  j["K"] = shape.claimed_k;
  Json a = Json::array();
  a.push_back(round12(shape.a0));
  for (double v : shape.a) a.push_back(round12(v));
  j["A"] = std::move(a);
  Json b = Json::array();
  for (double v : shape.b) b.push_back(round12(v));
  j["B"] = std::move(b);
  return j.dump(2) + "\n";
}

PulseShape pulse_from_json(const std::string& text) {
  const Json j = Json::parse(text);
  PulseShape s;
  s.name = j.at("name").get<std::string>();
  s.smoothness_l = j.at("L").get<int>();
  s.claimed_k = j.at("K").get<int>();
  const auto& a = j.at("A");
  if (a.empty()) throw std::invalid_argument("pulse JSON: A must contain at least A0");
  s.a0 = a[0].get<double>();
  for (std::size_t i = 1; i < a.size(); ++i) s.a.push_back(a[i].get<double>());
  if (j.contains("B"))
    for (const auto& v : j.at("B")) s.b.push_back(v.get<double>());
  if (s.b.size() > s.a.size()) s.a.resize(s.b.size(), 0.0);
  s.b.resize(s.a.size(), 0.0);
  const double angle_over_pi = j.at("angle_over_pi").get<double>();
  if (std::abs(angle_over_pi - 2.0 * s.a0) > 1e-9)
    throw std::invalid_argument("pulse JSON: angle_over_pi inconsistent with A0");
  return s;
}

void save_pulse(const PulseShape& shape, const std::string& path) {
  atomic_write(path, pulse_to_json(shape));
}

PulseShape load_pulse(const std::string& path) { return pulse_from_json(read_file(path)); }

PulseShape resolve_shape(const std::string& name) {
  if (is_builtin(name)) return builtin(name);
  if (std::filesystem::exists(name)) return load_pulse(name);
  throw std::invalid_argument("shape '" + name + "' is neither a builtin name nor a readable file");
}

}  // namespace softpulse
