#include "softpulse/bathframe.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "softpulse/integrate.hpp"
#include "softpulse/io.hpp"
#include "softpulse/matrix.hpp"

namespace softpulse {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Matrix3d rotation_matrix_at(const PulseSchedule& schedule, Parity parity, double t) {
  const CMatrix u = bare_site_propagator(schedule, parity, t);
  Eigen::Matrix3d q;
  for (int mu = 0; mu < 3; ++mu) {
    const CMatrix conj = u.adjoint() * pauli(mu) * u;
    for (int nu = 0; nu < 3; ++nu)
      q(mu, nu) = 0.5 * (pauli(nu) * conj).trace().real();
  }
  return q;
}

}  // namespace

RotationTrajectory rotation_trajectory(const PulseSchedule& schedule, Parity site_parity,
                                       int samples_per_interval) {
  if (samples_per_interval < 64)
    throw std::invalid_argument("rotation_trajectory: need >= 64 samples per interval");
  if (schedule.intervals.empty())
    throw std::invalid_argument("rotation_trajectory: empty schedule");

  RotationTrajectory traj;
  traj.site = site_parity;
  traj.period = schedule.duration();
  traj.samples_per_interval = samples_per_interval;
  const int n = samples_per_interval * schedule.n_intervals();
  traj.q.reserve(n);
  for (int j = 0; j < n; ++j)
    traj.q.push_back(rotation_matrix_at(schedule, site_parity, j * traj.period / n));
  return traj;
}

HarmonicTable harmonics(const RotationTrajectory& trajectory, int m_max) {
  const int n = static_cast<int>(trajectory.q.size());
  if (n == 0 || trajectory.period <= 0.0)
    throw std::invalid_argument("harmonics: empty trajectory");
  if (static_cast<long>(trajectory.samples_per_interval) *
          static_cast<long>(n / trajectory.samples_per_interval) != n)
    throw std::invalid_argument("harmonics: non-uniform sampling");
  if (2 * m_max + 1 > n)
    throw std::invalid_argument("harmonics: cutoff exceeds the sample rate");

  HarmonicTable table;
  table.site = trajectory.site;
  table.period = trajectory.period;
  table.m_max = m_max;
  table.c.assign(2 * m_max + 1, Eigen::Matrix3cd::Zero());
  for (int m = -m_max; m <= m_max; ++m) {
    Eigen::Matrix3cd sum = Eigen::Matrix3cd::Zero();
    for (int j = 0; j < n; ++j) {
      const std::complex<double> w = std::polar(1.0, kTwoPi * m * j / n);
      sum += w * trajectory.q[j];
    }
    table.c[m + m_max] = sum / static_cast<double>(n);
  }
  return table;
}

double reconstruction_residual(const HarmonicTable& table, const RotationTrajectory& trajectory) {
  const int n = static_cast<int>(trajectory.q.size());
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    Eigen::Matrix3cd rec = Eigen::Matrix3cd::Zero();
    for (int m = -table.m_max; m <= table.m_max; ++m)
      rec += std::polar(1.0, -kTwoPi * m * j / n) * table.harmonic(m);
    const double err = (rec - trajectory.q[j].cast<std::complex<double>>()).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
  }
  return worst;
}

double refocusing_residual(const HarmonicTable& table) {
  const Eigen::Matrix3cd& c0 = table.harmonic(0);
  double worst = 0.0;
  for (int nu = 0; nu < 3; ++nu) worst = std::max(worst, std::abs(c0(2, nu)));
  return worst;
}

std::string harmonics_csv(const HarmonicTable& table) {
  const char* axes = "xyz";
  std::string out = "m";
  for (int mu = 0; mu < 3; ++mu)
    for (int nu = 0; nu < 3; ++nu)
      out += std::string(",re_") + axes[mu] + axes[nu];
  for (int mu = 0; mu < 3; ++mu)
    for (int nu = 0; nu < 3; ++nu)
      out += std::string(",im_") + axes[mu] + axes[nu];
  out += '\n';
  for (int m = -table.m_max; m <= table.m_max; ++m) {
    const Eigen::Matrix3cd& c = table.harmonic(m);
    out += std::to_string(m);
    for (int mu = 0; mu < 3; ++mu)
      for (int nu = 0; nu < 3; ++nu) out += ',' + format12(c(mu, nu).real());
    for (int mu = 0; mu < 3; ++mu)
      for (int nu = 0; nu < 3; ++nu) out += ',' + format12(c(mu, nu).imag());
    out += '\n';
  }
  return out;
}

}  // namespace softpulse
