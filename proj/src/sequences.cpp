#include "softpulse/sequences.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include "softpulse/errors.hpp"
#include "softpulse/io.hpp"
#include "softpulse/parallel.hpp"

namespace softpulse {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Sequence grammar
// ---------------------------------------------------------------------------

Token parse_token(const std::string& word, std::size_t pos) {
  Token tok;
  std::size_t i = 0;
  if (i < word.size() && word[i] == '~') {
    tok.negative = true;
    ++i;
  }
  if (i >= word.size()) throw ParseError("incomplete token '" + word + "'", pos);
  if (word[i] == 'I') {
    if (tok.negative || i + 1 != word.size())
      throw ParseError("invalid idle token '" + word + "'", pos);
    tok.idle = true;
    return tok;
  }
  if (word[i] != 'X' && word[i] != 'Y')
    throw ParseError("unknown axis '" + std::string(1, word[i]) + "' in token '" + word + "'",
                     pos + i);
  tok.axis = word[i];
  ++i;
  if (i >= word.size() || (word[i] != '1' && word[i] != '2'))
    throw ParseError("token '" + word + "' must end in sublattice digit 1 or 2", pos + i);
  tok.sublattice = word[i] - '0';
  ++i;
  if (i != word.size()) throw ParseError("trailing characters in token '" + word + "'", pos + i);
  return tok;
}

std::string format_token(const Token& tok) {
  if (tok.idle) return "I";
  std::string s;
  if (tok.negative) s += '~';
  s += tok.axis;
  s += static_cast<char>('0' + tok.sublattice);
  return s;
}

}  // namespace

std::vector<Token> tokenize_interval_text(const std::string& text, std::size_t base_pos) {
  std::vector<Token> group;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t plus = text.find('+', start);
    const std::string word = text.substr(start, plus == std::string::npos ? plus : plus - start);
    if (word.empty()) throw ParseError("empty token", base_pos + start);
    group.push_back(parse_token(word, base_pos + start));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  if (group.size() > 1)
    for (const Token& t : group)
      if (t.idle) throw ParseError("idle token cannot join a '+' group", base_pos);
  bool used[3] = {false, false, false};
  for (const Token& t : group) {
    if (t.idle) continue;
    if (used[t.sublattice])
      throw ParseError("sublattice " + std::to_string(t.sublattice) + " assigned twice in one interval",
                       base_pos);
    used[t.sublattice] = true;
  }
  return group;
}

std::vector<std::vector<Token>> tokenize_sequence(const std::string& text) {
  std::vector<std::vector<Token>> intervals;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    intervals.push_back(tokenize_interval_text(text.substr(i, j - i), i));
    i = j;
  }
  if (intervals.empty()) throw ParseError("empty sequence", 0);
  return intervals;
}

std::string format_sequence(const std::vector<std::vector<Token>>& intervals) {
  std::string out;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (i) out += ' ';
    for (std::size_t k = 0; k < intervals[i].size(); ++k) {
      if (k) out += '+';
      out += format_token(intervals[i][k]);
    }
  }
  return out;
}

std::string format_tokens(const std::vector<Token>& flat) {
  std::vector<std::vector<Token>> intervals;
  intervals.reserve(flat.size());
  for (const Token& t : flat) intervals.push_back({t});
  return format_sequence(intervals);
}

PulseSchedule bind_schedule(const std::vector<std::vector<Token>>& intervals,
                            std::shared_ptr<const PulseShape> shape) {
  PulseSchedule schedule;
  for (const auto& group : intervals) {
    IntervalAssignment iv;
    for (const Token& tok : group) {
      if (tok.idle) continue;
      const double phase = (tok.axis == 'X') ? 0.0 : kPi / 2.0;
      AxisPulse pulse = AxisPulse::make(shape, phase, tok.negative ? -1 : +1);
      if (tok.sublattice == 1)
        iv.odd = pulse;
      else
        iv.even = pulse;
    }
    schedule.intervals.push_back(std::move(iv));
  }
  return schedule;
}

PulseSchedule parse_sequence(const std::string& text, std::shared_ptr<const PulseShape> shape) {
  return bind_schedule(tokenize_sequence(text), std::move(shape));
}

// ---------------------------------------------------------------------------
// Order classification
// ---------------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_doubles(const std::vector<double>& v, std::uint64_t h) {
  return v.empty() ? h : fnv1a(v.data(), v.size() * sizeof(double), h);
}

std::string shape_signature(const PulseShape& s) {
  std::uint64_t h = fnv1a(s.name.data(), s.name.size());
  h = fnv1a(&s.a0, sizeof s.a0, h);
  h = hash_doubles(s.a, h);
  h = hash_doubles(s.b, h);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string pulse_signature(const AxisPulse& p) {
  if (p.idle()) return "i";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s,%016llx,%+d", shape_signature(*p.shape).c_str(),
                static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(p.phase)), p.sign);
  return buf;
}

std::string interval_signature(const IntervalAssignment& iv, double amp_scale) {
  char amp[24];
  std::snprintf(amp, sizeof amp, "%016llx",
                static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(amp_scale)));
  return pulse_signature(iv.odd) + "|" + pulse_signature(iv.even) + "|" + amp;
}

std::string schedule_signature(const PulseSchedule& s) {
  std::string sig;
  for (const auto& iv : s.intervals) sig += interval_signature(iv, s.amp_scale) + ";";
  return sig;
}

// Which sublattices keep their bath fields in a given classification pass.
enum class FieldFilter { all, odd_only, even_only, none };

bool filter_keeps(FieldFilter f, Parity p) {
  switch (f) {
    case FieldFilter::all:
      return true;
    case FieldFilter::odd_only:
      return p == Parity::odd;
    case FieldFilter::even_only:
      return p == Parity::even;
    default:
      return false;
  }
}

// Integrates and caches per-interval moments for one model variant; composes
// them into whole-schedule moments on demand.  Interval moments are cached
// across schedules, which makes exhaustive sequence search affordable.
class ClassifyEngine {
 public:
  ClassifyEngine(const ChainModel& model, FieldFilter filter, int k_eval,
                 const ClassifyOptions& opts)
      : model_(model), filter_(filter), k_eval_(k_eval), opts_(opts) {}

  bool fields_active(Parity p) const { return model_.has_bath() && filter_keeps(filter_, p); }
  bool any_fields() const {
    return fields_active(Parity::odd) || fields_active(Parity::even);
  }

  const CMatrix& moment(const PulseSchedule& schedule, int order, const ClusterSpec& cluster) {
    return composed(schedule, cluster).r[order - 1];
  }

  double residual(const PulseSchedule& schedule, int order, const ClusterSpec& cluster) {
    return frobenius_norm(moment(schedule, order, cluster));
  }

 private:
  const CMatrix& internal_for(const ClusterSpec& cluster) {
    auto it = h_cache_.find(cluster.label());
    if (it != h_cache_.end()) return it->second;
    std::vector<double> fields(cluster.n_sites, 0.0);
    if (model_.has_bath())
      for (int i = 0; i < cluster.n_sites; ++i) {
        const Parity p = cluster.parity_of_site(i);
        if (filter_keeps(filter_, p)) fields[i] = bath_field(*model_.bath, p, i);
      }
    return h_cache_.emplace(cluster.label(), build_internal(model_, cluster, fields))
        .first->second;
  }

  const IntervalMoments& composed(const PulseSchedule& schedule, const ClusterSpec& cluster) {
    const std::string sched_sig = schedule_signature(schedule);
    if (sched_sig != current_schedule_) {
      composed_.clear();
      current_schedule_ = sched_sig;
    }
    auto it = composed_.find(cluster.label());
    if (it != composed_.end()) return it->second;

    ensure_intervals(schedule, cluster);
    IntervalMoments acc;
    bool first = true;
    for (const auto& iv : schedule.intervals) {
      const IntervalMoments& part =
          interval_cache_.at(cluster.label() + "|" + interval_signature(iv, schedule.amp_scale));
      if (first) {
        acc = part;
        first = false;
      } else {
        compose_moments(acc, part);
      }
    }
    return composed_.emplace(cluster.label(), std::move(acc)).first->second;
  }

  void ensure_intervals(const PulseSchedule& schedule, const ClusterSpec& cluster) {
    std::vector<std::pair<std::string, const IntervalAssignment*>> missing;
    std::set<std::string> queued;
    for (const auto& iv : schedule.intervals) {
      const std::string key = cluster.label() + "|" + interval_signature(iv, schedule.amp_scale);
      if (interval_cache_.count(key) || queued.count(key)) continue;
      queued.insert(key);
      missing.emplace_back(key, &iv);
    }
    if (missing.empty()) return;
    const CMatrix& h_internal = internal_for(cluster);
    // Up to (n+1)/2 sites are driven simultaneously on an n-site cluster, so
    // scale the step count to keep h * ||H_C|| (and the RK4 error) flat.
    const int steps = opts_.steps_per_interval * ((cluster.n_sites + 1) / 2);
    std::vector<IntervalMoments> results(missing.size());
    parallel_for(static_cast<int>(missing.size()), opts_.threads, [&](int i) {
      results[i] = integrate_interval(h_internal, *missing[i].second, schedule.amp_scale, cluster,
                                      k_eval_, steps);
    });
    for (std::size_t i = 0; i < missing.size(); ++i)
      interval_cache_.emplace(missing[i].first, std::move(results[i]));
  }

  ChainModel model_;
  FieldFilter filter_;
  int k_eval_;
  ClassifyOptions opts_;
  std::map<std::string, CMatrix> h_cache_;
  std::map<std::string, IntervalMoments> interval_cache_;
  std::string current_schedule_;
  std::map<std::string, IntervalMoments> composed_;
};

// Frobenius norm of the components of a moment that act non-trivially on at
// least one pulsed site.  The Pauli product basis is Frobenius-orthogonal, so
// ||r - proj||^2 = ||r||^2 - ||Tr_P r||^2 / 2^|P| with P the pulsed sites.
double pulsed_component_norm(const CMatrix& r, const ClusterSpec& cluster, bool odd_pulsed,
                             bool even_pulsed) {
  const int n = cluster.n_sites;
  long pmask = 0;
  for (int site = 0; site < n; ++site) {
    const Parity p = cluster.parity_of_site(site);
    if (p == Parity::odd ? odd_pulsed : even_pulsed) pmask |= 1L << (n - 1 - site);
  }
  if (pmask == 0) return 0.0;

  const long dim = cluster.dim();
  const int n_p = __builtin_popcountl(static_cast<unsigned long>(pmask));
  const long qdim = dim >> n_p;
  std::vector<std::vector<long>> buckets(1L << n_p);
  std::vector<long> qpart(dim);
  for (long i = 0; i < dim; ++i) {
    long pp = 0, qq = 0;
    for (int b = n - 1; b >= 0; --b) {
      const long bit = (i >> b) & 1;
      if ((pmask >> b) & 1)
        pp = (pp << 1) | bit;
      else
        qq = (qq << 1) | bit;
    }
    qpart[i] = qq;
    buckets[pp].push_back(i);
  }
  CMatrix traced = CMatrix::Zero(qdim, qdim);
  for (const auto& bucket : buckets)
    for (long i : bucket)
      for (long j : bucket) traced(qpart[i], qpart[j]) += r(i, j);
  const double remainder =
      r.squaredNorm() - traced.squaredNorm() / static_cast<double>(1L << n_p);
  return std::sqrt(std::max(0.0, remainder));
}

using ResidualNorm = std::function<double(const ClusterSpec&, const CMatrix&)>;

struct InstanceOutcome {
  int first_nonzero = -1;  // -1: all residuals below the zero threshold up to k_eval
  std::vector<ResidualEntry> residuals;
};

// Order-by-order residual scan.  Order k is certified zero on all clusters of
// up to k+1 sites (cluster theorem); the first residual above the nonzero
// threshold ends the scan.  A residual inside the gap is an error, never a
// guess.
InstanceOutcome run_instance(ClassifyEngine& engine, const PulseSchedule& schedule,
                             const ClassifyOptions& opts, int k_eval, const ResidualNorm& norm,
                             const std::string& entry_suffix) {
  InstanceOutcome out;
  for (int k = 1; k <= k_eval; ++k) {
    const int max_sites = std::min(k + 1, opts.site_cap);
    double order_max = 0.0;
    std::string order_argmax;
    bool stop = false;
    for (int size = 1; size <= max_sites && !stop; ++size) {
      for (Parity parity : {Parity::odd, Parity::even}) {
        if (size == 1 && !engine.fields_active(parity)) continue;
        const ClusterSpec cluster{size, parity};
        const double res = norm(cluster, engine.moment(schedule, k, cluster));
        out.residuals.push_back({k, cluster.label() + entry_suffix, res});
        if (res > order_max) {
          order_max = res;
          order_argmax = cluster.label();
        }
        if (res > opts.nonzero_threshold) {
          stop = true;
          break;
        }
      }
    }
    if (order_max > opts.nonzero_threshold) {
      out.first_nonzero = k;
      return out;
    }
    if (order_max >= opts.zero_threshold)
      throw AmbiguousOrderError(
          "residual " + format12(order_max) + " at order " + std::to_string(k) + " on cluster " +
              order_argmax + " falls between the zero (" + format12(opts.zero_threshold) +
              ") and nonzero (" + format12(opts.nonzero_threshold) + ") thresholds",
          k, order_argmax);
  }
  return out;
}

std::vector<ChainModel> seed_variants(const ChainModel& model, const ClassifyOptions& opts) {
  if (!model.has_bath()) return {model};
  if (opts.bath_seeds.empty()) return {model};
  std::vector<ChainModel> out;
  for (std::uint64_t seed : opts.bath_seeds) {
    ChainModel m = model;
    m.bath->seed = seed;
    out.push_back(std::move(m));
  }
  return out;
}

void merge_residuals(std::vector<ResidualEntry>& into, const std::vector<ResidualEntry>& from) {
  for (const auto& e : from) {
    bool found = false;
    for (auto& existing : into)
      if (existing.order == e.order && existing.cluster == e.cluster) {
        existing.norm = std::max(existing.norm, e.norm);
        found = true;
        break;
      }
    if (!found) into.push_back(e);
  }
}

// Classification across bath seeds; orders must agree for every seed.
struct PassResult {
  int order = 0;
  bool saturated = false;
  std::vector<ResidualEntry> residuals;
};

// Owns engines for every model variant a classification needs (bath seeds,
// pulsed-site filters, per-term attribution models).  Keeping the context
// alive across classify calls shares the per-interval moment caches, which is
// what makes exhaustive sequence search affordable.
class ClassifyContext {
 public:
  ClassifyContext(const ChainModel& model, const ClassifyOptions& opts)
      : model_(model), opts_(opts), k_eval_(opts.k_max + 1) {
    if (opts.k_max < 1 || opts.k_max > 9)
      throw std::invalid_argument("classify_order: k_max must be in [1, 9]");
    if (opts.site_cap < 2 || opts.site_cap > kMaxQubits)
      throw std::invalid_argument("classify_order: site_cap must be in [2, " +
                                  std::to_string(kMaxQubits) + "]");
  }

  OrderReport classify(const PulseSchedule& schedule) {
    if (schedule.intervals.empty()) throw std::invalid_argument("classify_order: empty schedule");

    OrderReport report;
    report.zero_threshold = opts_.zero_threshold;
    report.nonzero_threshold = opts_.nonzero_threshold;
    report.k_max = opts_.k_max;

    const ResidualNorm full_norm = [](const ClusterSpec&, const CMatrix& m) {
      return frobenius_norm(m);
    };
    EngineSet& main = engines("main", model_, FieldFilter::all);
    const PassResult main_pass = run_pass(main, schedule, full_norm, "");
    report.all_site_order = main_pass.order;
    report.order = main_pass.order;
    report.saturated = main_pass.saturated;
    report.residuals = main_pass.residuals;

    // When only one sublattice is driven, also classify against the error
    // components that touch the pulsed sites; unpulsed-site bath errors are
    // identity there and drop out of the projection.  Reuses the composed
    // moments of the main pass.
    const bool odd_pulsed = schedule.parity_pulsed(Parity::odd);
    const bool even_pulsed = schedule.parity_pulsed(Parity::even);
    if (model_.has_bath() && odd_pulsed != even_pulsed) {
      const ResidualNorm projected = [odd_pulsed, even_pulsed](const ClusterSpec& c,
                                                               const CMatrix& m) {
        return pulsed_component_norm(m, c, odd_pulsed, even_pulsed);
      };
      const PassResult pulsed_pass = run_pass(main, schedule, projected, "|pulsed");
      report.pulsed_only_order = pulsed_pass.order;
      merge_residuals(report.residuals, pulsed_pass.residuals);
      if (pulsed_pass.order > report.all_site_order) {
        report.order = pulsed_pass.order;
        report.asterisk = true;
        report.saturated = pulsed_pass.saturated;
      }
    }

    if (opts_.attribution)
      report.attribution = attribute_terms(schedule, std::min(report.order + 1, k_eval_));
    return report;
  }

 private:
  using EngineSet = std::vector<std::unique_ptr<ClassifyEngine>>;

  EngineSet& engines(const std::string& key, const ChainModel& model, FieldFilter filter) {
    auto it = engines_.find(key);
    if (it != engines_.end()) return it->second;
    EngineSet set;
    for (const ChainModel& m : seed_variants(model, opts_))
      set.push_back(std::make_unique<ClassifyEngine>(m, filter, k_eval_, opts_));
    return engines_.emplace(key, std::move(set)).first->second;
  }

  PassResult run_pass(EngineSet& set, const PulseSchedule& schedule, const ResidualNorm& norm,
                      const std::string& entry_suffix) {
    PassResult pass;
    bool first = true;
    for (auto& engine : set) {
      const InstanceOutcome outcome =
          run_instance(*engine, schedule, opts_, k_eval_, norm, entry_suffix);
      const int order = outcome.first_nonzero < 0 ? opts_.k_max : outcome.first_nonzero - 1;
      const bool saturated = outcome.first_nonzero < 0;
      if (first) {
        pass.order = order;
        pass.saturated = saturated;
        first = false;
      } else if (pass.order != order) {
        throw AmbiguousOrderError("order classification disagrees across bath seeds (" +
                                      std::to_string(pass.order) + " vs " + std::to_string(order) +
                                      ")",
                                  std::min(pass.order, order) + 1, "");
      }
      merge_residuals(pass.residuals, outcome.residuals);
    }
    return pass;
  }

  // Per-coupling-term residual levels at orders 1..max_order, reported so
  // bath cells show which term limits the order (the counted order includes
  // all active couplings together).
  std::map<int, std::map<std::string, double>> attribute_terms(const PulseSchedule& schedule,
                                                               int max_order) {
    struct TermVariant {
      std::string name;
      ChainModel model;
      FieldFilter filter;
    };
    std::vector<TermVariant> terms;
    if (model_.jz != 0.0) {
      ChainModel m = model_;
      m.bath.reset();
      m.jperp = 0.0;
      terms.push_back({"ising", std::move(m), FieldFilter::none});
    }
    if (model_.jperp != 0.0) {
      ChainModel m = model_;
      m.bath.reset();
      m.jz = 0.0;
      terms.push_back({"perp", std::move(m), FieldFilter::none});
    }
    if (model_.has_bath()) {
      ChainModel m = model_;
      m.jz = 0.0;
      m.jperp = 0.0;
      terms.push_back({"bath-odd", m, FieldFilter::odd_only});
      terms.push_back({"bath-even", std::move(m), FieldFilter::even_only});
    }

    std::map<int, std::map<std::string, double>> attribution;
    for (const auto& term : terms) {
      for (auto& engine : engines("term-" + term.name, term.model, term.filter)) {
        for (int k = 1; k <= max_order; ++k) {
          const int max_sites = std::min(k + 1, opts_.site_cap);
          double level = 0.0;
          for (int size = 1; size <= max_sites; ++size)
            for (Parity parity : {Parity::odd, Parity::even}) {
              if (size == 1 && !engine->fields_active(parity)) continue;
              level = std::max(level, engine->residual(schedule, k, ClusterSpec{size, parity}));
            }
          auto& slot = attribution[k][term.name];
          slot = std::max(slot, level);
        }
      }
    }
    return attribution;
  }

  ChainModel model_;
  ClassifyOptions opts_;
  int k_eval_;
  std::map<std::string, EngineSet> engines_;
};

}  // namespace

OrderReport classify_order(const PulseSchedule& schedule, const ChainModel& model,
                           const ClassifyOptions& opts) {
  ClassifyContext ctx(model, opts);
  return ctx.classify(schedule);
}

OrderReport classify_order(const std::vector<std::vector<Token>>& intervals,
                           const PulseShape& shape, const ChainModel& model,
                           const ClassifyOptions& opts) {
  auto shared = std::make_shared<const PulseShape>(shape);
  return classify_order(bind_schedule(intervals, shared), model, opts);
}

std::string order_report_to_json(const OrderReport& report, const std::string& sequence,
                                 const std::string& shape, const std::string& model) {
  Json j;
  j["sequence"] = sequence;
  j["shape"] = shape;
  j["model"] = model;
  j["order"] = report.order;
  j["asterisk"] = report.asterisk;
  j["all_site_order"] = report.all_site_order;
  if (report.pulsed_only_order >= 0)
    j["pulsed_only_order"] = report.pulsed_only_order;
  else
    j["pulsed_only_order"] = nullptr;
  j["saturated"] = report.saturated;
  j["k_max"] = report.k_max;
  j["thresholds"] = {{"zero", report.zero_threshold}, {"nonzero", report.nonzero_threshold}};
  Json res = Json::array();
  for (const auto& e : report.residuals)
    res.push_back(Json::array({e.order, e.cluster, round12(e.norm)}));
  j["residuals"] = std::move(res);
  Json attr = Json::object();
  for (const auto& [order, terms] : report.attribution) {
    Json row = Json::object();
    for (const auto& [name, level] : terms) row[name] = round12(level);
    attr[std::to_string(order)] = std::move(row);
  }
  j["attribution"] = std::move(attr);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Exhaustive sequence search
// ---------------------------------------------------------------------------

namespace {

Token flip_sign(Token t) {
  if (!t.idle) t.negative = !t.negative;
  return t;
}

Token relabel(Token t) {
  if (!t.idle) t.sublattice = 3 - t.sublattice;
  return t;
}

std::string canonical_form(const std::vector<Token>& tokens) {
  std::string best;
  for (int use_sign = 0; use_sign < 2; ++use_sign)
    for (int use_relabel = 0; use_relabel < 2; ++use_relabel) {
      std::vector<Token> image = tokens;
      for (Token& t : image) {
        if (use_sign) t = flip_sign(t);
        if (use_relabel) t = relabel(t);
      }
      std::string s = format_tokens(image);
      if (best.empty() || s < best) best = std::move(s);
    }
  return best;
}

}  // namespace

std::vector<SearchHit> search_sequences(int length, const std::vector<Token>& alphabet,
                                        const PulseShape& shape, const ChainModel& model,
                                        const ClassifyOptions& opts, long candidate_budget) {
  if (length < 1) throw std::invalid_argument("search_sequences: length must be >= 1");
  if (alphabet.empty()) throw std::invalid_argument("search_sequences: empty alphabet");
  double count = 1;
  for (int i = 0; i < length; ++i) count *= static_cast<double>(alphabet.size());
  if (count > static_cast<double>(candidate_budget))
    throw std::invalid_argument("search_sequences: " + format12(count) +
                                " candidates exceed the budget of " +
                                std::to_string(candidate_budget));

  // Deduplicate by global sign flip and sublattice relabeling: keep one
  // representative per class, keyed by the lexicographically smallest image.
  std::map<std::string, std::vector<Token>> unique;
  std::vector<int> odometer(length, 0);
  while (true) {
    std::vector<Token> tokens(length);
    for (int i = 0; i < length; ++i) tokens[i] = alphabet[odometer[i]];
    unique.emplace(canonical_form(tokens), std::move(tokens));
    int pos = length - 1;
    while (pos >= 0 && ++odometer[pos] == static_cast<int>(alphabet.size())) {
      odometer[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }

  // One context for all candidates: per-interval moments are integrated once
  // per (cluster, token) and reused by every composition.
  ClassifyContext ctx(model, opts);
  auto shared = std::make_shared<const PulseShape>(shape);
  int best = -1;
  std::vector<SearchHit> hits;
  for (const auto& [canon, tokens] : unique) {
    std::vector<std::vector<Token>> intervals;
    intervals.reserve(tokens.size());
    for (const Token& t : tokens) intervals.push_back({t});
    const OrderReport report = ctx.classify(bind_schedule(intervals, shared));
    if (report.order > best) {
      best = report.order;
      hits.clear();
    }
    if (report.order == best) hits.push_back({tokens, report});
  }
  return hits;
}

// ---------------------------------------------------------------------------
// BB1 composite and sweeps
// ---------------------------------------------------------------------------

PulseSchedule bb1_schedule(std::shared_ptr<const PulseShape> pi_shape,
                           std::shared_ptr<const PulseShape> two_pi_shape, double amp_scale) {
  if (!pi_shape || std::abs(rotation_angle(*pi_shape) - kPi) > 1e-9)
    throw std::invalid_argument("bb1_schedule: pulse set needs a pi shape (a0 = 0.5)");
  if (!two_pi_shape || std::abs(rotation_angle(*two_pi_shape) - 2.0 * kPi) > 1e-9)
    throw std::invalid_argument("bb1_schedule: pulse set is missing a 2 pi shape (a0 = 1)");
  const double phi = std::acos(-0.25);
  PulseSchedule s;
  s.amp_scale = amp_scale;
  auto interval = [](AxisPulse pulse) {
    IntervalAssignment iv;
    iv.odd = std::move(pulse);
    return iv;
  };
  s.intervals.push_back(interval(AxisPulse::make(pi_shape, 0.0, +1)));
  s.intervals.push_back(interval(AxisPulse::make(pi_shape, phi, +1)));
  s.intervals.push_back(interval(AxisPulse::make(two_pi_shape, 3.0 * phi, +1)));
  s.intervals.push_back(interval(AxisPulse::make(pi_shape, phi, +1)));
  return s;
}

std::vector<SweepPoint> bb1_sweep(std::shared_ptr<const PulseShape> pi_shape,
                                  std::shared_ptr<const PulseShape> two_pi_shape,
                                  const std::vector<double>& epsilons, const ChainModel& model,
                                  const ClusterSpec& cluster, int steps_per_interval) {
  for (double eps : epsilons)
    if (eps < 0.0 || eps > 0.2)
      throw std::invalid_argument("bb1_sweep: amplitude mismatch must lie in [0, 0.2]");

  const CMatrix target = parity_gate(cluster, axis_rotation(kPi, 0.0), Parity::odd);

  std::vector<SweepPoint> out(epsilons.size());
  parallel_for(static_cast<int>(epsilons.size()), 0, [&](int i) {
    const PulseSchedule schedule = bb1_schedule(pi_shape, two_pi_shape, 1.0 + epsilons[i]);
    const CMatrix u = integrate_exact(cluster, model, schedule, steps_per_interval);
    out[i] = {epsilons[i], frobenius_norm(u - target)};
  });
  return out;
}

std::vector<SweepPoint> scaling_sweep(const PulseSchedule& schedule, const ChainModel& base,
                                      const ClusterSpec& cluster,
                                      const std::vector<double>& scales, int order_k,
                                      int pert_steps, int exact_steps) {
  std::vector<SweepPoint> out(scales.size());
  parallel_for(static_cast<int>(scales.size()), 0, [&](int i) {
    ChainModel m = base;
    m.jz *= scales[i];
    m.jperp *= scales[i];
    if (m.bath) m.bath->amplitude *= scales[i];
    const PerturbativeResult pert =
        integrate_perturbative(cluster, m, schedule, order_k, pert_steps);
    CMatrix sum = CMatrix::Identity(cluster.dim(), cluster.dim());
    for (const CMatrix& r : pert.r) sum += r;
    const CMatrix approx = pert.u0 * sum;
    const CMatrix exact = integrate_exact(cluster, m, schedule, exact_steps);
    out[i] = {scales[i], frobenius_norm(exact - approx)};
  });
  return out;
}

double loglog_slope(const std::vector<SweepPoint>& points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : points) {
    if (p.x <= 0.0 || p.error <= 0.0)
      throw std::invalid_argument("loglog_slope: points must be positive");
    const double lx = std::log(p.x), ly = std::log(p.error);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("loglog_slope: need at least two points");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace softpulse
