#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softpulse/model.hpp"
#include "softpulse/shape.hpp"

namespace softpulse {

// Design target for a single pulse: rotation angle, self-refocusing order K,
// smoothness class L, and the number of Fourier harmonics M.  Feasibility
// requires M >= K + L so free parameters remain after constraint elimination.
struct DesignGoal {
  double angle = 3.14159265358979323846;
  int target_k = 1;
  int smoothness_l = 1;
  int harmonics = 3;
  ChainModel model = ChainModel::preset("ising");
  double objective_target = 1e-16;
  int steps_per_interval = 400;

  int free_parameters() const { return harmonics - smoothness_l; }
  bool feasible() const { return free_parameters() >= target_k; }
};

// Sum over the design clusters of the squared mismatch of the bare propagator
// against the exact product of single-site rotations, plus the squared
// Frobenius norms of R_1..R_K.  Zero iff the pulse realizes the rotation
// exactly and self-refocuses to order K on every required cluster.
// `full_coeffs` is [a0, a1..aM] and must satisfy a0 = angle / 2 pi.
double objective(const std::vector<double>& full_coeffs, const DesignGoal& goal);

// Fixes a0 = angle / 2 pi and solves the L end-point smoothness conditions
// for the last L cosine coefficients given the M - L free ones (exact linear
// solve).  Throws on a singular elimination system.
std::vector<double> eliminate_constraints(const std::vector<double>& free_coeffs,
                                          const DesignGoal& goal);

struct AnnealConfig {
  double initial_temperature = 1.0;  // on log10(objective)
  double decay = 0.97;               // per sweep
  double proposal_sigma = 0.05;
  int sweeps = 200;
};

struct DescentConfig {
  int max_iterations = 4000;
  double fd_step = 1e-5;    // central finite-difference step
  double armijo_c = 1e-4;   // sufficient-decrease constant
  double min_step = 1e-18;  // line-search stall bound
};

struct ConvergenceRow {
  int iteration = 0;
  double temperature = 0.0;  // 0 during descent
  double objective_value = 0.0;
};

struct DesignResult {
  PulseShape shape;
  bool converged = false;
  double objective_value = 0.0;
  std::vector<ConvergenceRow> log;
};

// Simulated annealing over the free parameters followed by steepest descent
// with finite-difference gradients and a backtracking line search.  Identical
// (goal, seed) inputs give bit-identical results.  A run that misses the
// target returns converged = false with the best shape found, never a
// silently bad shape.
DesignResult design_pulse(const DesignGoal& goal, std::uint64_t seed,
                          const AnnealConfig& anneal = {}, const DescentConfig& descent = {});

std::string convergence_csv(const std::vector<ConvergenceRow>& log);

}  // namespace softpulse
