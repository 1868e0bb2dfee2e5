#include "softpulse/optimize.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "softpulse/errors.hpp"
#include "softpulse/integrate.hpp"
#include "softpulse/io.hpp"
#include "softpulse/parallel.hpp"

namespace softpulse {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Deterministic RNG helpers; the standard distributions are implementation
// defined, and design results must be reproducible bit-for-bit.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }  // [0, 1)

  double normal() {  // Box-Muller
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }
};

PulseShape shape_from_coeffs(const std::vector<double>& full, const DesignGoal& goal,
                             const std::string& name) {
  PulseShape s;
  s.name = name;
  s.a0 = full[0];
  s.a.assign(full.begin() + 1, full.end());
  s.b.assign(s.a.size(), 0.0);
  s.smoothness_l = goal.smoothness_l;
  s.claimed_k = goal.target_k;
  return s;
}

double objective_of_free(const std::vector<double>& free_coeffs, const DesignGoal& goal) {
  return objective(eliminate_constraints(free_coeffs, goal), goal);
}

std::vector<double> fd_gradient(const std::vector<double>& p, const DesignGoal& goal, double h) {
  const int n = static_cast<int>(p.size());
  std::vector<double> grad(n);
  parallel_for(n, 0, [&](int i) {
    std::vector<double> plus = p, minus = p;
    plus[i] += h;
    minus[i] -= h;
    grad[i] = (objective_of_free(plus, goal) - objective_of_free(minus, goal)) / (2.0 * h);
  });
  return grad;
}

}  // namespace

double objective(const std::vector<double>& full_coeffs, const DesignGoal& goal) {
  if (full_coeffs.size() != static_cast<std::size_t>(goal.harmonics) + 1)
    throw std::invalid_argument("objective: expected a0 plus M cosine coefficients");
  if (std::abs(full_coeffs[0] - goal.angle / kTwoPi) > 1e-12)
    throw std::invalid_argument("objective: a0 must equal angle / 2 pi");

  auto shape = std::make_shared<const PulseShape>(
      shape_from_coeffs(full_coeffs, goal, "candidate"));
  PulseSchedule schedule;
  IntervalAssignment iv;
  iv.odd = AxisPulse::make(shape, 0.0, +1);
  schedule.intervals.push_back(iv);

  const CMatrix gate = axis_rotation(goal.angle, 0.0);
  double total = 0.0;
  for (const ClusterSpec& cluster : enumerate_clusters(goal.target_k, goal.model)) {
    // Step count scales with cluster size so the moment integration bias
    // stays far below the convergence target on every design cluster.
    const int steps = goal.steps_per_interval * ((cluster.n_sites + 1) / 2);
    const PerturbativeResult res =
        integrate_perturbative(cluster, goal.model, schedule, goal.target_k, steps);
    // The bare propagator of a fixed-axis pulse has the closed form
    // exp(-i theta(t)/2 sigma_phi) per site, so the mismatch term is exact;
    // only the moments carry integration error, and they enter squared.
    const CMatrix u0_end = bare_propagator_analytic(schedule, cluster, schedule.duration());
    const CMatrix target = parity_gate(cluster, gate, Parity::odd);
    const double mismatch = frobenius_norm(u0_end - target);
    total += mismatch * mismatch;
    for (const CMatrix& r : res.r) {
      const double norm = frobenius_norm(r);
      total += norm * norm;
    }
  }
  if (!std::isfinite(total)) throw NumericalError("objective: non-finite integration result");
  return total;
}

std::vector<double> eliminate_constraints(const std::vector<double>& free_coeffs,
                                          const DesignGoal& goal) {
  const int m = goal.harmonics;
  const int l = goal.smoothness_l;
  if (static_cast<int>(free_coeffs.size()) != m - l)
    throw std::invalid_argument("eliminate_constraints: expected " + std::to_string(m - l) +
                                " free coefficients");

  std::vector<double> full(m + 1, 0.0);
  full[0] = goal.angle / kTwoPi;
  for (int i = 0; i < m - l; ++i) full[i + 1] = free_coeffs[i];
  if (l == 0) return full;

  // Condition j (j = 0..L-1): sum_m m^{2j} a_m = (j == 0 ? -a0 : 0).
  Eigen::MatrixXd a(l, l);
  Eigen::VectorXd b(l);
  for (int j = 0; j < l; ++j) {
    b(j) = (j == 0) ? -full[0] : 0.0;
    for (int i = 0; i < m - l; ++i) b(j) -= std::pow(double(i + 1), 2.0 * j) * full[i + 1];
    for (int i = 0; i < l; ++i) a(j, i) = std::pow(double(m - l + 1 + i), 2.0 * j);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw std::invalid_argument("eliminate_constraints: singular elimination system");
  const Eigen::VectorXd x = lu.solve(b);
  for (int i = 0; i < l; ++i) full[m - l + 1 + i] = x(i);
  return full;
}

DesignResult design_pulse(const DesignGoal& goal, std::uint64_t seed, const AnnealConfig& anneal,
                          const DescentConfig& descent) {
  if (!goal.feasible())
    throw std::invalid_argument("design_pulse: infeasible goal, need M >= K + L");

  const int dim = goal.free_parameters();
  Rng rng(seed);
  std::vector<double> p(dim);
  for (double& v : p) v = 4.0 * rng.uniform() - 2.0;

  DesignResult result;
  int iteration = 0;

  // Annealing on the log objective: geometric temperature schedule with
  // Gaussian proposal steps, tracking the best point seen.
  double f_current = objective_of_free(p, goal);
  std::vector<double> best = p;
  double f_best = f_current;
  double temperature = anneal.initial_temperature;
  for (int sweep = 0; sweep < anneal.sweeps && f_best > goal.objective_target; ++sweep) {
    for (int i = 0; i < dim; ++i) {
      std::vector<double> proposal = p;
      proposal[i] += anneal.proposal_sigma * rng.normal();
      const double f_prop = objective_of_free(proposal, goal);
      const double delta = std::log10(std::max(f_prop, 1e-300)) -
                           std::log10(std::max(f_current, 1e-300));
      if (delta <= 0.0 || rng.uniform() < std::exp(-delta / temperature)) {
        p = std::move(proposal);
        f_current = f_prop;
        if (f_current < f_best) {
          best = p;
          f_best = f_current;
        }
      }
    }
    temperature *= anneal.decay;
    result.log.push_back({++iteration, temperature, f_best});
  }

  // Steepest descent with central finite-difference gradients.  The step
  // seed follows the Barzilai-Borwein secant estimate with a non-monotone
  // backtracking line search (sufficient decrease against the worst of the
  // last few values), which keeps the BB steps effective near the minimum.
  p = best;
  double f = f_best;
  std::vector<double> prev_grad, prev_p;
  std::vector<double> recent{f};
  double step_seed = 1.0;
  double stall_mark = f_best;
  for (int iter = 0; iter < descent.max_iterations && f > goal.objective_target; ++iter) {
    if (iter % 250 == 249) {
      if (f_best > 0.25 * stall_mark) break;  // no longer making progress
      stall_mark = f_best;
    }
    std::vector<double> grad = fd_gradient(p, goal, descent.fd_step);
    double gnorm2 = 0.0;
    for (double g : grad) gnorm2 += g * g;
    if (gnorm2 == 0.0) break;

    if (!prev_grad.empty()) {
      double ss = 0.0, sy = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double s = p[i] - prev_p[i];
        const double y = grad[i] - prev_grad[i];
        ss += s * s;
        sy += s * y;
      }
      if (sy > 0.0) step_seed = ss / sy;
    }
    step_seed = std::clamp(step_seed, 1e-12, 1e3);

    const double f_ref = *std::max_element(recent.begin(), recent.end());
    double alpha = step_seed;
    std::vector<double> candidate(dim);
    double f_new = f;
    int backtracks = 0;
    while (true) {
      for (int i = 0; i < dim; ++i) candidate[i] = p[i] - alpha * grad[i];
      f_new = objective_of_free(candidate, goal);
      if (f_new <= f_ref - descent.armijo_c * alpha * gnorm2) break;
      alpha *= 0.5;
      ++backtracks;
      if (alpha < descent.min_step) break;
    }
    if (alpha < descent.min_step) break;
    if (backtracks >= 8) {
      // The secant model went stale; reseed from the step that worked.
      prev_p.clear();
      prev_grad.clear();
      step_seed = alpha;
    } else {
      prev_p = p;
      prev_grad = grad;
    }
    p = candidate;
    f = f_new;
    recent.push_back(f);
    if (recent.size() > 8) recent.erase(recent.begin());
    if (f < f_best) {
      best = p;
      f_best = f;
    }
    result.log.push_back({++iteration, 0.0, f_best});
  }

  // Curvature-informed polish: plain gradient steps crawl along the narrow
  // valley floor, so finish with finite-difference Newton steps (safeguarded
  // by the same backtracking) once the gradient phase stalls.
  p = best;
  f = f_best;
  const double hh = 1e-4;
  for (int round = 0; round < 40 && f > goal.objective_target; ++round) {
    const std::vector<double> grad = fd_gradient(p, goal, descent.fd_step);
    Eigen::MatrixXd hess(dim, dim);
    std::vector<std::array<int, 2>> pairs;
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) pairs.push_back({i, j});
    std::vector<double> entries(pairs.size());
    parallel_for(static_cast<int>(pairs.size()), 0, [&](int idx) {
      const auto [i, j] = pairs[idx];
      std::vector<double> q = p;
      if (i == j) {
        q[i] = p[i] + hh;
        const double fp = objective_of_free(q, goal);
        q[i] = p[i] - hh;
        const double fm = objective_of_free(q, goal);
        entries[idx] = (fp - 2.0 * f + fm) / (hh * hh);
      } else {
        q[i] = p[i] + hh;
        q[j] = p[j] + hh;
        const double fpp = objective_of_free(q, goal);
        q[j] = p[j] - hh;
        const double fpm = objective_of_free(q, goal);
        q[i] = p[i] - hh;
        const double fmm = objective_of_free(q, goal);
        q[j] = p[j] + hh;
        const double fmp = objective_of_free(q, goal);
        entries[idx] = (fpp - fpm - fmp + fmm) / (4.0 * hh * hh);
      }
    });
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
      hess(pairs[idx][0], pairs[idx][1]) = entries[idx];
      hess(pairs[idx][1], pairs[idx][0]) = entries[idx];
    }
    Eigen::VectorXd g(dim);
    for (int i = 0; i < dim; ++i) g(i) = grad[i];
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd delta = -ldlt.solve(g);
    if (!delta.allFinite()) break;

    double scale = 1.0;
    bool improved = false;
    std::vector<double> candidate(dim);
    for (int bt = 0; bt < 24; ++bt) {
      for (int i = 0; i < dim; ++i) candidate[i] = p[i] + scale * delta(i);
      const double f_new = objective_of_free(candidate, goal);
      if (f_new < f) {
        p = candidate;
        f = f_new;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (f < f_best) {
      best = p;
      f_best = f;
    }
    result.log.push_back({++iteration, 0.0, f_best});
    if (!improved) break;
  }

  std::ostringstream name;
  name << "design-a" << format12(goal.angle / std::numbers::pi) << "pi-K" << goal.target_k << "-L"
       << goal.smoothness_l << "-M" << goal.harmonics << "-s" << seed;
  result.shape = shape_from_coeffs(eliminate_constraints(best, goal), goal, name.str());
  result.objective_value = f_best;
  result.converged = f_best < 1e-15;
  return result;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& log) {
  std::string out = "iteration,temperature,objective\n";
  for (const auto& row : log) {
    out += std::to_string(row.iteration);
    out += ',';
    out += format12(row.temperature);
    out += ',';
    out += format12(row.objective_value);
    out += '\n';
  }
  return out;
}

}  // namespace softpulse
