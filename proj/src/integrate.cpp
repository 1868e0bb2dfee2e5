#include "softpulse/integrate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "softpulse/errors.hpp"

namespace softpulse {

namespace {

constexpr double kOmega = 2.0 * std::numbers::pi;

// The inner integrator is templated on the matrix type so clusters of up to
// four sites run on fixed-size Eigen matrices; small dynamic gemms would
// otherwise dominate the optimizer and the sweep oracles.
template <int N>
using FixedMatrix = Eigen::Matrix<Complex, N, N>;

// Per-parity sums of embedded x/y operators; H_C(t) is a scalar combination
// of these four matrices.
template <typename Mat>
struct ControlOperators {
  Mat sx_odd, sy_odd, sx_even, sy_even;
  bool any_odd = false, any_even = false;

  explicit ControlOperators(const ClusterSpec& cluster) {
    const long dim = cluster.dim();
    CMatrix xo = CMatrix::Zero(dim, dim), yo = xo, xe = xo, ye = xo;
    for (int site = 0; site < cluster.n_sites; ++site) {
      if (cluster.parity_of_site(site) == Parity::odd) {
        xo += kron_embed(pauli_x(), site, cluster.n_sites);
        yo += kron_embed(pauli_y(), site, cluster.n_sites);
        any_odd = true;
      } else {
        xe += kron_embed(pauli_x(), site, cluster.n_sites);
        ye += kron_embed(pauli_y(), site, cluster.n_sites);
        any_even = true;
      }
    }
    sx_odd = xo;
    sy_odd = yo;
    sx_even = xe;
    sy_even = ye;
  }

  // h += H_C(t_local) for the given interval assignment.
  void add_control(Mat& h, const IntervalAssignment& iv, double t, double amp_scale) const {
    if (any_odd && !iv.odd.idle()) {
      const double amp = 0.5 * amp_scale * iv.odd.sign * evaluate(*iv.odd.shape, t) * kOmega;
      if (amp != 0.0) {
        h.noalias() += (amp * std::cos(iv.odd.phase)) * sx_odd;
        h.noalias() += (amp * std::sin(iv.odd.phase)) * sy_odd;
      }
    }
    if (any_even && !iv.even.idle()) {
      const double amp = 0.5 * amp_scale * iv.even.sign * evaluate(*iv.even.shape, t) * kOmega;
      if (amp != 0.0) {
        h.noalias() += (amp * std::cos(iv.even.phase)) * sx_even;
        h.noalias() += (amp * std::sin(iv.even.phase)) * sy_even;
      }
    }
  }
};

template <typename Mat>
void axpy(std::vector<Mat>& y, double alpha, const std::vector<Mat>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i].noalias() += alpha * x[i];
}

// RK4 over one interval for the coupled (U0, R_1..R_K) system.  `deriv`
// fills `out` given the stage state and interval-local time.
template <typename Mat, typename Deriv>
void rk4_interval(std::vector<Mat>& state, int steps, const Deriv& deriv) {
  const double h = 1.0 / steps;
  const std::size_t n = state.size();
  std::vector<Mat> k(n, state[0]), acc(n, state[0]), stage(n, state[0]);
  for (int step = 0; step < steps; ++step) {
    const double t0 = step * h;
    deriv(state, t0, k);
    acc = k;
    stage = state;
    axpy(stage, 0.5 * h, k);
    deriv(stage, t0 + 0.5 * h, k);
    axpy(acc, 2.0, k);
    stage = state;
    axpy(stage, 0.5 * h, k);
    deriv(stage, t0 + 0.5 * h, k);
    axpy(acc, 2.0, k);
    stage = state;
    axpy(stage, h, k);
    deriv(stage, t0 + h, k);
    axpy(acc, 1.0, k);
    axpy(state, h / 6.0, acc);
  }
}

void check_preconditions(int order_k, int steps) {
  if (order_k < 1) throw std::invalid_argument("expansion order must be >= 1");
  if (steps < 100) throw std::invalid_argument("steps per interval must be >= 100");
}

// Integrates the coupled system over the schedule.  Buffers are reused
// across stages; Htil is rebuilt at every stage from the stage value of U0.
template <typename Mat>
std::vector<Mat> run_perturbative(const Mat& h_internal, const PulseSchedule& schedule,
                                  const ClusterSpec& cluster, int order_k, int steps) {
  const ControlOperators<Mat> ops(cluster);
  std::vector<Mat> state(order_k + 1);
  state[0] = Mat::Identity(h_internal.rows(), h_internal.cols());
  for (int k = 1; k <= order_k; ++k) state[k] = Mat::Zero(h_internal.rows(), h_internal.cols());

  Mat hc = state[0], htil = state[0], tmp = state[0];
  const Complex minus_i(0.0, -1.0);
  for (const IntervalAssignment& iv : schedule.intervals) {
    auto deriv = [&](const std::vector<Mat>& s, double t, std::vector<Mat>& out) {
      hc.setZero();
      ops.add_control(hc, iv, t, schedule.amp_scale);
      out[0].noalias() = minus_i * (hc * s[0]);
      tmp.noalias() = h_internal * s[0];
      htil.noalias() = s[0].adjoint() * tmp;
      out[1].noalias() = minus_i * htil;
      for (int k = 2; k <= order_k; ++k) out[k].noalias() = minus_i * (htil * s[k - 1]);
    };
    rk4_interval(state, steps, deriv);
    if (!state[0].allFinite())
      throw NumericalError("integration diverged (non-finite values); try more steps per "
                           "interval (current: " + std::to_string(steps) + ")");
  }
  return state;
}

template <typename Mat>
Mat run_exact(const Mat& h_internal, const PulseSchedule& schedule, const ClusterSpec& cluster,
              int steps) {
  const ControlOperators<Mat> ops(cluster);
  std::vector<Mat> state(1);
  state[0] = Mat::Identity(h_internal.rows(), h_internal.cols());
  Mat htot = state[0];
  const Complex minus_i(0.0, -1.0);
  for (const IntervalAssignment& iv : schedule.intervals) {
    auto deriv = [&](const std::vector<Mat>& s, double t, std::vector<Mat>& out) {
      htot = h_internal;
      ops.add_control(htot, iv, t, schedule.amp_scale);
      out[0].noalias() = minus_i * (htot * s[0]);
    };
    rk4_interval(state, steps, deriv);
    if (!state[0].allFinite())
      throw NumericalError("integration diverged (non-finite values); try more steps per "
                           "interval (current: " + std::to_string(steps) + ")");
  }
  return state[0];
}

template <int N>
std::vector<CMatrix> run_perturbative_fixed(const CMatrix& h_internal,
                                            const PulseSchedule& schedule,
                                            const ClusterSpec& cluster, int order_k, int steps) {
  const FixedMatrix<N> h = h_internal;
  std::vector<FixedMatrix<N>> state = run_perturbative(h, schedule, cluster, order_k, steps);
  std::vector<CMatrix> out;
  out.reserve(state.size());
  for (const auto& m : state) out.emplace_back(m);
  return out;
}

std::vector<CMatrix> dispatch_perturbative(const CMatrix& h_internal,
                                           const PulseSchedule& schedule,
                                           const ClusterSpec& cluster, int order_k, int steps) {
  switch (cluster.dim()) {
    case 2:
      return run_perturbative_fixed<2>(h_internal, schedule, cluster, order_k, steps);
    case 4:
      return run_perturbative_fixed<4>(h_internal, schedule, cluster, order_k, steps);
    case 8:
      return run_perturbative_fixed<8>(h_internal, schedule, cluster, order_k, steps);
    case 16:
      return run_perturbative_fixed<16>(h_internal, schedule, cluster, order_k, steps);
    default:
      return run_perturbative<CMatrix>(h_internal, schedule, cluster, order_k, steps);
  }
}

PerturbativeResult result_from_state(std::vector<CMatrix>&& state, const ClusterSpec& cluster,
                                     int steps) {
  PerturbativeResult res;
  res.u0 = std::move(state[0]);
  res.r.assign(std::make_move_iterator(state.begin() + 1), std::make_move_iterator(state.end()));
  res.steps_per_interval = steps;
  res.cluster = cluster;
  res.u0_unitarity = unitarity_error(res.u0);
  if (res.u0_unitarity > 1e-3)
    throw NumericalError("bare propagator lost unitarity (" + std::to_string(res.u0_unitarity) +
                         "); increase steps per interval (current: " + std::to_string(steps) + ")");
  return res;
}

}  // namespace

PerturbativeResult integrate_perturbative(const ClusterSpec& cluster, const ChainModel& model,
                                          const PulseSchedule& schedule, int order_k,
                                          int steps_per_interval) {
  return integrate_perturbative_custom(build_internal(model, cluster), cluster, schedule, order_k,
                                       steps_per_interval);
}

PerturbativeResult integrate_perturbative_custom(const CMatrix& h_internal,
                                                 const ClusterSpec& cluster,
                                                 const PulseSchedule& schedule, int order_k,
                                                 int steps_per_interval) {
  check_preconditions(order_k, steps_per_interval);
  if (h_internal.rows() != cluster.dim() || h_internal.cols() != cluster.dim())
    throw std::invalid_argument("integrate: internal Hamiltonian dimension mismatch");
  return result_from_state(
      dispatch_perturbative(h_internal, schedule, cluster, order_k, steps_per_interval), cluster,
      steps_per_interval);
}

CMatrix integrate_exact(const ClusterSpec& cluster, const ChainModel& model,
                        const PulseSchedule& schedule, int steps_per_interval) {
  if (steps_per_interval < 100)
    throw std::invalid_argument("steps per interval must be >= 100");
  const CMatrix h_internal = build_internal(model, cluster);
  CMatrix u;
  switch (cluster.dim()) {
    case 2:
      u = run_exact<FixedMatrix<2>>(h_internal, schedule, cluster, steps_per_interval);
      break;
    case 4:
      u = run_exact<FixedMatrix<4>>(h_internal, schedule, cluster, steps_per_interval);
      break;
    case 8:
      u = run_exact<FixedMatrix<8>>(h_internal, schedule, cluster, steps_per_interval);
      break;
    case 16:
      u = run_exact<FixedMatrix<16>>(h_internal, schedule, cluster, steps_per_interval);
      break;
    default:
      u = run_exact<CMatrix>(h_internal, schedule, cluster, steps_per_interval);
      break;
  }
  if (unitarity_error(u) > 1e-3)
    throw NumericalError("exact propagator lost unitarity; increase steps per interval (current: " +
                         std::to_string(steps_per_interval) + ")");
  return u;
}

IntervalMoments integrate_interval(const CMatrix& h_internal, const IntervalAssignment& assignment,
                                   double amp_scale, const ClusterSpec& cluster, int order_k,
                                   int steps_per_interval) {
  check_preconditions(order_k, steps_per_interval);
  PulseSchedule one;
  one.intervals.push_back(assignment);
  one.amp_scale = amp_scale;
  std::vector<CMatrix> state =
      dispatch_perturbative(h_internal, one, cluster, order_k, steps_per_interval);
  IntervalMoments m;
  m.u0 = std::move(state[0]);
  m.r.assign(std::make_move_iterator(state.begin() + 1), std::make_move_iterator(state.end()));
  return m;
}

void compose_moments(IntervalMoments& acc, const IntervalMoments& next) {
  const int order_k = static_cast<int>(acc.r.size());
  if (static_cast<int>(next.r.size()) != order_k)
    throw std::invalid_argument("compose_moments: order mismatch");

  // Moments of the later block, rotated into the frame accumulated so far.
  std::vector<CMatrix> rotated(order_k);
  CMatrix tmp;
  for (int i = 0; i < order_k; ++i) {
    tmp.noalias() = next.r[i] * acc.u0;
    rotated[i].noalias() = acc.u0.adjoint() * tmp;
  }

  std::vector<CMatrix> combined(order_k);
  for (int k = 1; k <= order_k; ++k) {
    CMatrix sum = rotated[k - 1] + acc.r[k - 1];
    for (int i = 1; i < k; ++i) sum.noalias() += rotated[i - 1] * acc.r[k - i - 1];
    combined[k - 1] = std::move(sum);
  }
  acc.r = std::move(combined);
  tmp.noalias() = next.u0 * acc.u0;
  acc.u0 = std::move(tmp);
}

std::vector<CMatrix> cumulants_from_moments(const std::vector<CMatrix>& r) {
  const int order_k = static_cast<int>(r.size());
  if (order_k < 1 || order_k > 4)
    throw std::invalid_argument("cumulants_from_moments: shipped conversion supports K in [1, 4]");
  std::vector<CMatrix> c;
  c.reserve(order_k);
  c.push_back(r[0]);
  if (order_k >= 2) c.push_back(r[1] - 0.5 * (c[0] * c[0]).eval());
  if (order_k >= 3) {
    CMatrix c3 = r[2];
    c3 -= 0.5 * (c[0] * c[1] + c[1] * c[0]);
    c3 -= (1.0 / 6.0) * (c[0] * c[0] * c[0]);
    c.push_back(std::move(c3));
  }
  if (order_k >= 4) {
    CMatrix c4 = r[3];
    c4 -= 0.5 * (c[0] * c[2] + c[2] * c[0] + c[1] * c[1]);
    c4 -= (1.0 / 6.0) * (c[0] * c[0] * c[1] + c[0] * c[1] * c[0] + c[1] * c[0] * c[0]);
    c4 -= (1.0 / 24.0) * (c[0] * c[0] * c[0] * c[0]);
    c.push_back(std::move(c4));
  }
  return c;
}

CMatrix magnus_c2_quadrature(const ClusterSpec& cluster, const ChainModel& model,
                             const PulseSchedule& schedule, int grid_per_interval) {
  if (grid_per_interval < 200)
    throw NumericalError("magnus_c2_quadrature: grid must be >= 200 points per interval");
  const CMatrix h_internal = build_internal(model, cluster);
  const int n_nodes = grid_per_interval * schedule.n_intervals() + 1;
  const double h = 1.0 / grid_per_interval;
  const long dim = cluster.dim();

  // Htil on the node grid from the closed-form bare propagator.
  std::vector<CMatrix> htil(n_nodes);
  for (int j = 0; j < n_nodes; ++j) {
    const CMatrix u0 = bare_propagator_analytic(schedule, cluster, j * h);
    htil[j] = u0.adjoint() * h_internal * u0;
  }

  // Inner cumulative trapezoid G(t2) = int_0^t2 Htil, then outer trapezoid of
  // [G(t2), Htil(t2)].  The prefactor +1/2 on [Htil(t1), Htil(t2)], t1 < t2,
  // is the one consistent with exp(C1 + C2 + ...) matching the moment series
  // R2 - R1^2/2 term by term.
  CMatrix g = CMatrix::Zero(dim, dim);
  CMatrix total = CMatrix::Zero(dim, dim);
  CMatrix comm(dim, dim);
  for (int j = 0; j < n_nodes; ++j) {
    if (j > 0) g.noalias() += (h / 2.0) * (htil[j - 1] + htil[j]);
    comm.noalias() = g * htil[j];
    comm.noalias() -= htil[j] * g;
    const double w = (j == 0 || j == n_nodes - 1) ? 0.5 : 1.0;
    total.noalias() += (w * h) * comm;
  }
  return 0.5 * total;
}

CMatrix bare_site_propagator(const PulseSchedule& schedule, Parity parity, double t) {
  if (t < 0.0 || t > schedule.duration() + 1e-12)
    throw std::out_of_range("bare_site_propagator: time outside the schedule");
  CMatrix u = CMatrix::Identity(2, 2);
  for (int i = 0; i < schedule.n_intervals(); ++i) {
    const double local = t - i;
    if (local <= 0.0) break;
    const AxisPulse& pulse = schedule.intervals[i].for_parity(parity);
    if (pulse.idle()) continue;
    const double frac = local >= 1.0 ? 1.0 : local;
    const double angle =
        pulse.sign * schedule.amp_scale * accumulated_angle(*pulse.shape, frac);
    u = axis_rotation(angle, pulse.phase) * u;
  }
  return u;
}

CMatrix bare_propagator_analytic(const PulseSchedule& schedule, const ClusterSpec& cluster,
                                 double t) {
  CMatrix u = CMatrix::Identity(1, 1);
  for (int site = 0; site < cluster.n_sites; ++site)
    u = kron(u, bare_site_propagator(schedule, cluster.parity_of_site(site), t));
  return u;
}

}  // namespace softpulse
