#pragma once

#include <memory>
#include <vector>

#include "softpulse/shape.hpp"

namespace softpulse {

enum class Parity { odd, even };

inline Parity flip(Parity p) { return p == Parity::odd ? Parity::even : Parity::odd; }
inline const char* to_string(Parity p) { return p == Parity::odd ? "odd" : "even"; }

// One sublattice's control during one clock interval: a pulse shape driven
// about an axis in the x-y plane (phase 0 = x, pi/2 = y) with a sign, or idle.
struct AxisPulse {
  std::shared_ptr<const PulseShape> shape;  // null means idle
  double phase = 0.0;                       // radians, normalized to [0, 2 pi)
  int sign = +1;

  bool idle() const { return shape == nullptr; }

  static AxisPulse make_idle() { return AxisPulse{}; }
  static AxisPulse make(std::shared_ptr<const PulseShape> s, double phase, int sign);
};

// Per-interval assignment: one AxisPulse per sublattice parity.
struct IntervalAssignment {
  AxisPulse odd;
  AxisPulse even;

  const AxisPulse& for_parity(Parity p) const { return p == Parity::odd ? odd : even; }
  bool idle() const { return odd.idle() && even.idle(); }
};

// Back-to-back intervals of equal duration tau (= 1 in library units);
// the repetition period is the interval length, with no gaps.
struct PulseSchedule {
  std::vector<IntervalAssignment> intervals;
  double amp_scale = 1.0;  // common amplitude factor, (1 + eps) in mismatch sweeps

  int n_intervals() const { return static_cast<int>(intervals.size()); }
  double duration() const { return static_cast<double>(intervals.size()); }
  bool parity_pulsed(Parity p) const;
};

}  // namespace softpulse
