#pragma once

#include <vector>

#include "softpulse/matrix.hpp"
#include "softpulse/model.hpp"
#include "softpulse/schedule.hpp"

namespace softpulse {

inline constexpr int kDefaultSteps = 2000;
inline constexpr int kExactStepFactor = 4;

// Bare propagator and perturbation moments at the end of a schedule:
// U(t) = U0(t) (I + R_1 + R_2 + ...), with R_k of k-th order in the
// internal couplings.
struct PerturbativeResult {
  CMatrix u0;
  std::vector<CMatrix> r;  // R_1..R_K
  int steps_per_interval = 0;
  ClusterSpec cluster;
  double u0_unitarity = 0.0;  // max-entry of U0^dag U0 - I

  const CMatrix& moment(int k) const { return r.at(k - 1); }
  int order() const { return static_cast<int>(r.size()); }
};

// Integrates the coupled system
//   U0' = -i H_C(t) U0,   R_{n+1}' = -i Htil(t) R_n,   Htil = U0^dag H_S U0,
// with classical fixed-step RK4, from 0 to N*tau.  Htil is formed by explicit
// conjugation at every RK4 stage from the stage value of U0.
PerturbativeResult integrate_perturbative(const ClusterSpec& cluster, const ChainModel& model,
                                          const PulseSchedule& schedule, int order_k,
                                          int steps_per_interval = kDefaultSteps);

// Same, with an explicit internal Hamiltonian (hand-built configurations).
PerturbativeResult integrate_perturbative_custom(const CMatrix& h_internal,
                                                 const ClusterSpec& cluster,
                                                 const PulseSchedule& schedule, int order_k,
                                                 int steps_per_interval = kDefaultSteps);

// Full evolution U' = -i [H_C(t) + H_S] U with the same integrator.
CMatrix integrate_exact(const ClusterSpec& cluster, const ChainModel& model,
                        const PulseSchedule& schedule,
                        int steps_per_interval = kExactStepFactor * kDefaultSteps);

// Moments over a single interval, in that interval's own frame.
struct IntervalMoments {
  CMatrix u0;
  std::vector<CMatrix> r;
};

IntervalMoments integrate_interval(const CMatrix& h_internal, const IntervalAssignment& assignment,
                                   double amp_scale, const ClusterSpec& cluster, int order_k,
                                   int steps_per_interval);

// acc := next applied after acc.  U0 multiplies; moments compose via
// R_k = sum_{i+j=k} (U0_acc^dag r_next_i U0_acc) r_acc_j.
void compose_moments(IntervalMoments& acc, const IntervalMoments& next);

// Magnus cumulants from moments, shipped to K = 4:
//   C1 = R1, C2 = R2 - C1^2/2, C3 = R3 - (C1C2 + C2C1)/2 - C1^3/6, ...
std::vector<CMatrix> cumulants_from_moments(const std::vector<CMatrix>& r);

// Independent oracle for C2: nested composite trapezoid of
// -(1/2) int dt2 int_0^t2 dt1 [Htil(t1), Htil(t2)] over the triangle t1 < t2,
// with Htil sampled from the closed-form bare propagator (no RK4 involved).
CMatrix magnus_c2_quadrature(const ClusterSpec& cluster, const ChainModel& model,
                             const PulseSchedule& schedule, int grid_per_interval);

// Closed-form bare evolution of a single site under its parity's pulse train;
// the full bare propagator factorizes over sites.
CMatrix bare_site_propagator(const PulseSchedule& schedule, Parity parity, double t);
CMatrix bare_propagator_analytic(const PulseSchedule& schedule, const ClusterSpec& cluster,
                                 double t);

}  // namespace softpulse
