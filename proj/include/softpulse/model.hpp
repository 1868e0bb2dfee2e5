#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softpulse/matrix.hpp"
#include "softpulse/schedule.hpp"

namespace softpulse {

// Static z-axis fields drawn once per site, uniform on [-amplitude, amplitude],
// modeling slow phase noise frozen over the sequence.
struct BathFields {
  double amplitude = 1.0;  // units of 1/tau
  std::uint64_t seed = 1;
};

// Nearest-neighbor chain couplings.  All values are the dimensionless
// products J*tau (library time unit is the interval length).
struct ChainModel {
  std::string name = "custom";
  double jz = 0.0;
  double jperp = 0.0;
  std::optional<BathFields> bath;

  bool has_bath() const { return bath.has_value() && bath->amplitude != 0.0; }

  // Presets: "ising" (jz=1), "xxz" (jz=1, jperp=0.3), "bath" (jz=1, b=1),
  // "none" (all couplings zero).
  static ChainModel preset(const std::string& name);
};

// Deterministic field draw: depends only on (seed, site parity, site index).
double bath_field(const BathFields& bath, Parity site_parity, int site_index);

// A connected contiguous sub-chain; site i has parity first flipped i times.
// Single-site clusters (zero bonds) carry on-site bath terms only.
struct ClusterSpec {
  int n_sites = 1;
  Parity first = Parity::odd;

  Parity parity_of_site(int i) const {
    return (i % 2 == 0) ? first : flip(first);
  }
  long dim() const { return 1L << n_sites; }
  int n_bonds() const { return n_sites - 1; }
  std::string label() const;

  bool operator==(const ClusterSpec&) const = default;
};

// All clusters needed for an order-K analysis of the infinite chain with a
// period-2 pulse pattern: contiguous chains of 2..K+1 sites in both parity
// offsets, plus single sites of each parity when bath fields are present.
std::vector<ClusterSpec> enumerate_clusters(int order_k, const ChainModel& model);

// Internal Hamiltonian on a cluster:
//   (1/4) sum_bonds [jz sz sz + jperp (sx sx + sy sy)] + (1/2) sum_sites B_i sz_i.
// Hermitian; bath fields drawn deterministically from the model's seed.
CMatrix build_internal(const ChainModel& model, const ClusterSpec& cluster);

// Same with explicit per-site z fields (used for hand-built configurations).
CMatrix build_internal(const ChainModel& model, const ClusterSpec& cluster,
                       const std::vector<double>& site_fields);

// Product of single-site gates: `gate` on every site of the given parity,
// identity elsewhere.  The exact target for pulses addressing one sublattice.
CMatrix parity_gate(const ClusterSpec& cluster, const CMatrix& gate, Parity pulsed);

// Control Hamiltonian at time t within an interval:
//   (1/2) sum_sites s_n V_n(t) Omega [cos(phi_n) sx_n + sin(phi_n) sy_n],
// where each site receives the AxisPulse of its parity and idle sites
// contribute zero.  t is interval-local, in [0, 1].
CMatrix build_control(const IntervalAssignment& assignment, double t,
                      const ClusterSpec& cluster, double amp_scale = 1.0);

}  // namespace softpulse
