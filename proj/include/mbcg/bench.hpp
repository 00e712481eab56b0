#pragma once

// Sequential-loading heuristics: kSP-FF and FF-kSP with fixed-rate demand
// units and first-blocking termination.

#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "mbcg/models.hpp"

namespace mbcg {

enum class Strategy { ksp_ff, ff_ksp };

inline const char* strategy_name(Strategy s) { return s == Strategy::ksp_ff ? "ksp-ff" : "ff-ksp"; }

inline Strategy parse_strategy(std::string_view s) {
  if (s == "ksp-ff" || s == "kSP-FF") return Strategy::ksp_ff;
  if (s == "ff-ksp" || s == "FF-kSP") return Strategy::ff_ksp;
  throw ModelError("unknown loading strategy '" + std::string(s) + "'");
}

/// Unbiased draw in [0, n).
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

/// Pair emission order: each round visits the pairs whose accumulated share
/// reached one unit, in a freshly shuffled order. Shares grow by D_hat / max D_hat
/// per round, so uniform demand gives a random permutation of all pairs per round.
class DemandStream {
 public:
  DemandStream(const std::vector<double>& demand, std::uint64_t seed) : rng_(seed) {
    double top = 0;
    for (double d : demand) top = std::max(top, d);
    for (std::size_t p = 0; p < demand.size(); ++p) {
      if (demand[p] > 0) {
        pairs_.push_back(static_cast<PairId>(p));
        rate_.push_back(demand[p] / top);
      }
    }
    credit_.assign(pairs_.size(), 0.0);
  }

  bool empty() const { return pairs_.empty(); }

  PairId next() {
    while (pos_ >= round_.size()) refill();
    return round_[pos_++];
  }

 private:
  void refill() {
    round_.clear();
    pos_ = 0;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      credit_[i] += rate_[i];
      if (credit_[i] >= 1.0 - 1e-12) {
        credit_[i] -= 1.0;
        round_.push_back(pairs_[i]);
      }
    }
    for (std::size_t i = round_.size(); i > 1; --i) {
      std::swap(round_[i - 1], round_[draw_below(rng_, i)]);
    }
  }

  std::mt19937_64 rng_;
  std::vector<PairId> pairs_;
  std::vector<double> rate_;
  std::vector<double> credit_;
  std::vector<PairId> round_;
  std::size_t pos_{0};
};

/// First `count` pair ids emitted by a stream.
inline std::vector<PairId> demand_order(const std::vector<double>& demand, std::uint64_t seed, std::size_t count) {
  DemandStream s(demand, seed);
  std::vector<PairId> out;
  if (s.empty()) return out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(s.next());
  return out;
}

/// Smallest positive per-lightpath capacity over the instance's active matrix.
inline double loading_unit(const Instance& inst) {
  double best = 0;
  for (RouteId r = 0; r < static_cast<RouteId>(inst.routes.size()); ++r) {
    for (Band b : kBands) {
      const double c = inst.capacity_of(r, b);
      if (c > 0 && (best == 0 || c < best)) best = c;
    }
  }
  return best;
}

class LoadingState {
 public:
  explicit LoadingState(const Instance& inst)
      : inst_(&inst), busy_(inst.topology.link_count(), std::vector<char>(inst.wavelengths, 0)),
        established_(inst.routes.pair_count(), 0.0), carried_(inst.routes.pair_count(), 0.0) {}

  bool free(RouteId r, int w) const {
    for (LinkId l : inst_->routes.route(r).links) {
      if (busy_[l][w]) return false;
    }
    return true;
  }

  void open(RouteId r, int w) {
    for (LinkId l : inst_->routes.route(r).links) busy_[l][w] = 1;
    const Band b = inst_->band_of(w);
    const double c = inst_->capacity_of(r, b);
    lightpaths_.push_back({r, w, b, c});
    established_[inst_->routes.pair_of(r)] += c;
  }

  double residual(PairId p) const { return established_[p] - carried_[p]; }
  void carry(PairId p, double amount) { carried_[p] += amount; }

  const std::vector<Lightpath>& lightpaths() const { return lightpaths_; }
  const std::vector<double>& established() const { return established_; }
  const std::vector<double>& carried() const { return carried_; }

 private:
  const Instance* inst_;
  std::vector<std::vector<char>> busy_;
  std::vector<Lightpath> lightpaths_;
  std::vector<double> established_;
  std::vector<double> carried_;
};

struct LoadResult {
  Strategy strategy{Strategy::ksp_ff};
  std::uint64_t seed{0};
  double unit_bps{0};
  /// Carried demand when the first unit was blocked.
  double throughput_bps{0};
  long steps{0};
  std::vector<Lightpath> lightpaths;
  std::vector<double> carried_bps;
  std::vector<double> established_bps;
  /// Throughput after each carried unit (only when requested).
  std::vector<double> history_bps;
};

namespace detail {

inline bool place(const Instance& inst, LoadingState& st, PairId p, Strategy s) {
  if (inst.transceivers && static_cast<long>(st.lightpaths().size()) >= *inst.transceivers) return false;
  const auto& routes = inst.routes.routes_of(p);
  auto viable = [&](RouteId r, int w) { return inst.capacity_of(r, inst.band_of(w)) > 0 && st.free(r, w); };
  if (s == Strategy::ksp_ff) {
    for (RouteId r : routes) {
      for (int w = 0; w < inst.wavelengths; ++w) {
        if (viable(r, w)) {
          st.open(r, w);
          return true;
        }
      }
    }
  } else {
    for (int w = 0; w < inst.wavelengths; ++w) {
      for (RouteId r : routes) {
        if (viable(r, w)) {
          st.open(r, w);
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace detail

inline LoadResult sequential_load(const Instance& inst, Strategy strategy, std::uint64_t seed,
                                  bool record_history = false) {
  LoadResult out;
  out.strategy = strategy;
  out.seed = seed;
  out.unit_bps = loading_unit(inst);
  LoadingState st(inst);
  DemandStream stream(inst.demand, seed);
  if (out.unit_bps > 0 && inst.wavelengths > 0 && !stream.empty()) {
    const double unit = out.unit_bps;
    const double eps = 1e-9 * unit;
    while (true) {
      const PairId p = stream.next();
      if (st.residual(p) < unit - eps && !detail::place(inst, st, p, strategy)) break;
      st.carry(p, unit);
      ++out.steps;
      if (record_history) out.history_bps.push_back(out.steps * unit);
    }
  }
  out.throughput_bps = static_cast<double>(out.steps) * out.unit_bps;
  out.lightpaths = st.lightpaths();
  out.carried_bps = st.carried();
  out.established_bps = st.established();
  return out;
}

struct TrialRow {
  std::uint64_t seed;
  Strategy strategy;
  double throughput_bps;
  std::size_t lightpaths;
  long steps;
};

inline std::vector<TrialRow> run_trials(const Instance& inst, Strategy strategy, const std::vector<std::uint64_t>& seeds) {
  std::vector<TrialRow> rows;
  for (auto seed : seeds) {
    auto r = sequential_load(inst, strategy, seed);
    rows.push_back({seed, strategy, r.throughput_bps, r.lightpaths.size(), r.steps});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TrialRow& a, const TrialRow& b) { return a.seed < b.seed; });
  return rows;
}

inline void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "seed,strategy,throughput_bps,lightpaths,steps\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.seed << ',' << strategy_name(r.strategy) << ',' << r.throughput_bps << ',' << r.lightpaths << ','
        << r.steps << '\n';
  }
}

}  // namespace mbcg
