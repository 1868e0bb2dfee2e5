#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "softpulse/schedule.hpp"

namespace softpulse {

// Rotating-frame rotation matrices of one site sampled uniformly over a full
// schedule period: U0^dag sigma^mu U0 = Q^{mu mu'} sigma^{mu'}, so
// Q^{mu mu'}(t) = (1/2) Tr(sigma^{mu'} U0^dag(t) sigma^mu U0(t)).
// Axes are indexed x, y, z.
struct RotationTrajectory {
  Parity site = Parity::odd;
  double period = 0.0;
  int samples_per_interval = 0;
  std::vector<Eigen::Matrix3d> q;  // sample j is at t = j * period / q.size()
};

RotationTrajectory rotation_trajectory(const PulseSchedule& schedule, Parity site_parity,
                                       int samples_per_interval = 256);

// Fourier harmonics of Q(t) with the sequence frequency 2 pi / period:
// Q(t) = sum_m C_m exp(-i m Omega~ t).  C_0 is the time average of Q.
struct HarmonicTable {
  Parity site = Parity::odd;
  double period = 0.0;
  int m_max = 0;
  std::vector<Eigen::Matrix3cd> c;  // C_m stored at index m + m_max

  const Eigen::Matrix3cd& harmonic(int m) const { return c.at(m + m_max); }
};

HarmonicTable harmonics(const RotationTrajectory& trajectory, int m_max = 64);

// Max-entry error of the truncated harmonic sum against the trajectory on its
// own sample grid.
double reconstruction_residual(const HarmonicTable& table, const RotationTrajectory& trajectory);

// max_mu' |C_0^{z mu'}|: below 1e-6 the site is first-order refocused against
// constant z fields (static phase noise).
double refocusing_residual(const HarmonicTable& table);

// CSV rows (m, 9 real parts, 9 imaginary parts) for plotting.
std::string harmonics_csv(const HarmonicTable& table);

}  // namespace softpulse
