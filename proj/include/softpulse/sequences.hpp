#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "softpulse/integrate.hpp"
#include "softpulse/model.hpp"
#include "softpulse/schedule.hpp"

namespace softpulse {

// One interval of the sequence grammar: [~] axis digit (axis X or Y, digit 1
// for odd sites, 2 for even sites, ~ for a negative pulse), or I for idle.
struct Token {
  bool idle = false;
  char axis = 'X';
  int sublattice = 1;
  bool negative = false;

  bool operator==(const Token&) const = default;
};

// Tokens separated by whitespace, one interval each.  Simultaneous pulses on
// both sublattices within one interval join with '+', e.g. "X1+Y2".
std::vector<Token> tokenize_interval_text(const std::string& text, std::size_t base_pos);
std::vector<std::vector<Token>> tokenize_sequence(const std::string& text);
std::string format_sequence(const std::vector<std::vector<Token>>& intervals);
std::string format_tokens(const std::vector<Token>& flat);  // one token per interval

PulseSchedule bind_schedule(const std::vector<std::vector<Token>>& intervals,
                            std::shared_ptr<const PulseShape> shape);
PulseSchedule parse_sequence(const std::string& text, std::shared_ptr<const PulseShape> shape);

struct ClassifyOptions {
  int k_max = 6;
  int site_cap = 7;  // cluster-size budget; order k needs clusters of k+1 sites
  // RK4 steps per interval on 2-site clusters; larger clusters scale the count
  // by (n_sites + 1) / 2 so h * ||H_C|| stays fixed across cluster sizes.
  int steps_per_interval = 400;
  // Order-k terms at J tau = 1 carry (J/4)^k / k! scales, so published
  // sixth-order residuals sit near 1e-5; the thresholds bracket the
  // integration floor (~1e-10 at the default steps) from below those signals.
  double zero_threshold = 1e-7;
  double nonzero_threshold = 3e-6;
  bool attribution = false;  // per-coupling-term residual breakdown
  std::vector<std::uint64_t> bath_seeds = {1, 2, 3};
  int threads = 0;  // 0 = auto
};

struct ResidualEntry {
  int order = 0;
  std::string cluster;
  double norm = 0.0;
};

struct OrderReport {
  int order = 0;          // displayed order (pulsed-site order when asterisked)
  bool asterisk = false;  // refocusing holds on pulsed sites only
  int all_site_order = 0;
  int pulsed_only_order = -1;  // -1 when not applicable
  bool saturated = false;      // no nonzero residual up to k_max + 1
  std::vector<ResidualEntry> residuals;
  // per order: coupling term ("ising", "perp", "bath-odd", "bath-even") -> max residual
  std::map<int, std::map<std::string, double>> attribution;
  double zero_threshold = 0.0;
  double nonzero_threshold = 0.0;
  int k_max = 0;
};

// Determines the refocusing order K of a schedule on a model: integrates all
// clusters the cluster theorem requires, order by order, until a residual
// exceeds the nonzero threshold.  Residuals inside (zero, nonzero) raise
// AmbiguousOrderError.  Bath models run every seed in the options and must
// agree; they also get a pulsed-sites-only pass that produces the asterisk.
OrderReport classify_order(const PulseSchedule& schedule, const ChainModel& model,
                           const ClassifyOptions& opts = {});

OrderReport classify_order(const std::vector<std::vector<Token>>& intervals,
                           const PulseShape& shape, const ChainModel& model,
                           const ClassifyOptions& opts = {});

std::string order_report_to_json(const OrderReport& report, const std::string& sequence,
                                 const std::string& shape, const std::string& model);

struct SearchHit {
  std::vector<Token> tokens;
  OrderReport report;
};

// Exhaustive search over token sequences of the given length, deduplicated by
// global sign flip and sublattice relabeling; returns all sequences achieving
// the maximal order, in canonical order.
std::vector<SearchHit> search_sequences(int length, const std::vector<Token>& alphabet,
                                        const PulseShape& shape, const ChainModel& model,
                                        const ClassifyOptions& opts = {},
                                        long candidate_budget = 1000000);

struct SweepPoint {
  double x = 0.0;
  double error = 0.0;
};

// Wimperis broadband composite for a pi rotation about x: the nominal pulse
// followed by pi_phi, 2pi_{3 phi}, pi_phi with phi = arccos(-1/4).  All four
// intervals share the amplitude factor.
PulseSchedule bb1_schedule(std::shared_ptr<const PulseShape> pi_shape,
                           std::shared_ptr<const PulseShape> two_pi_shape, double amp_scale);

// Error of the BB1 composite versus the ideal pi_x gate on pulsed sites, for
// each amplitude mismatch epsilon in [0, 0.2].
std::vector<SweepPoint> bb1_sweep(std::shared_ptr<const PulseShape> pi_shape,
                                  std::shared_ptr<const PulseShape> two_pi_shape,
                                  const std::vector<double>& epsilons, const ChainModel& model,
                                  const ClusterSpec& cluster,
                                  int steps_per_interval = kDefaultSteps);

// || U_exact - U0 (I + R_1 + ... + R_K) ||_F with all couplings scaled by x,
// for each x in the grid; the log-log slope against x estimates K + 1.
std::vector<SweepPoint> scaling_sweep(const PulseSchedule& schedule, const ChainModel& base,
                                      const ClusterSpec& cluster,
                                      const std::vector<double>& scales, int order_k,
                                      int pert_steps, int exact_steps);

// Least-squares slope of log(error) versus log(x); points with error <= 0 are
// rejected.
double loglog_slope(const std::vector<SweepPoint>& points);

}  // namespace softpulse
