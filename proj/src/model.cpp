#include "softpulse/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "softpulse/errors.hpp"

namespace softpulse {

namespace {

constexpr double kOmega = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

AxisPulse AxisPulse::make(std::shared_ptr<const PulseShape> s, double phase, int sign) {
  AxisPulse p;
  p.shape = std::move(s);
  p.phase = std::fmod(phase, kOmega);
  if (p.phase < 0.0) p.phase += kOmega;
  p.sign = sign >= 0 ? +1 : -1;
  return p;
}

bool PulseSchedule::parity_pulsed(Parity p) const {
  for (const auto& iv : intervals)
    if (!iv.for_parity(p).idle()) return true;
  return false;
}

ChainModel ChainModel::preset(const std::string& name) {
  ChainModel m;
  m.name = name;
  if (name == "ising") {
    m.jz = 1.0;
  } else if (name == "xxz") {
    m.jz = 1.0;
    m.jperp = 0.3;
  } else if (name == "bath") {
    m.jz = 1.0;
    m.bath = BathFields{};
  } else if (name == "none") {
    // all couplings zero
  } else {
    throw std::invalid_argument("unknown model preset: " + name);
  }
  return m;
}

double bath_field(const BathFields& bath, Parity site_parity, int site_index) {
  const std::uint64_t tag = (site_parity == Parity::odd) ? 0x6f64640000000000ULL
                                                         : 0x6576656e00000000ULL;
  std::uint64_t h = splitmix64(bath.seed ^ tag);
  h = splitmix64(h ^ static_cast<std::uint64_t>(site_index));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
  return bath.amplitude * (2.0 * u - 1.0);
}

std::string ClusterSpec::label() const {
  return std::to_string(n_sites) + (first == Parity::odd ? "o" : "e");
}

std::vector<ClusterSpec> enumerate_clusters(int order_k, const ChainModel& model) {
  if (order_k < 1) throw std::invalid_argument("enumerate_clusters: order must be >= 1");
  std::vector<ClusterSpec> out;
  if (model.has_bath()) {
    out.push_back({1, Parity::odd});
    out.push_back({1, Parity::even});
  }
  for (int len = 2; len <= order_k + 1; ++len) {
    out.push_back({len, Parity::odd});
    out.push_back({len, Parity::even});
  }
  return out;
}

CMatrix build_internal(const ChainModel& model, const ClusterSpec& cluster) {
  std::vector<double> fields(cluster.n_sites, 0.0);
  if (model.has_bath())
    for (int i = 0; i < cluster.n_sites; ++i)
      fields[i] = bath_field(*model.bath, cluster.parity_of_site(i), i);
  return build_internal(model, cluster, fields);
}

CMatrix build_internal(const ChainModel& model, const ClusterSpec& cluster,
                       const std::vector<double>& site_fields) {
  const int n = cluster.n_sites;
  if (n < 1 || n > kMaxQubits)
    throw CapacityError("build_internal: cluster size " + std::to_string(n) +
                        " outside [1, " + std::to_string(kMaxQubits) + "]");
  if (site_fields.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("build_internal: field list size mismatch");

  const long dim = cluster.dim();
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int bond = 0; bond + 1 < n; ++bond) {
    if (model.jz != 0.0)
      h += (model.jz / 4.0) *
           (kron_embed(pauli_z(), bond, n) * kron_embed(pauli_z(), bond + 1, n));
    if (model.jperp != 0.0) {
      h += (model.jperp / 4.0) *
           (kron_embed(pauli_x(), bond, n) * kron_embed(pauli_x(), bond + 1, n) +
            kron_embed(pauli_y(), bond, n) * kron_embed(pauli_y(), bond + 1, n));
    }
  }
  for (int site = 0; site < n; ++site)
    if (site_fields[site] != 0.0)
      h += (site_fields[site] / 2.0) * kron_embed(pauli_z(), site, n);
  return h;
}

CMatrix parity_gate(const ClusterSpec& cluster, const CMatrix& gate, Parity pulsed) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int site = 0; site < cluster.n_sites; ++site)
    out = kron(out, cluster.parity_of_site(site) == pulsed ? gate : identity2());
  return out;
}

CMatrix build_control(const IntervalAssignment& assignment, double t,
                      const ClusterSpec& cluster, double amp_scale) {
  if (t < 0.0 || t > 1.0)
    throw std::out_of_range("build_control: interval-local time outside [0, 1]");
  const int n = cluster.n_sites;
  const long dim = cluster.dim();
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int site = 0; site < n; ++site) {
    const AxisPulse& pulse = assignment.for_parity(cluster.parity_of_site(site));
    if (pulse.idle()) continue;
    const double v = evaluate(*pulse.shape, t);
    if (v == 0.0) continue;
    const double amp = 0.5 * amp_scale * pulse.sign * v * kOmega;
    h += (amp * std::cos(pulse.phase)) * kron_embed(pauli_x(), site, n);
    h += (amp * std::sin(pulse.phase)) * kron_embed(pauli_y(), site, n);
  }
  return h;
}

}  // namespace softpulse
