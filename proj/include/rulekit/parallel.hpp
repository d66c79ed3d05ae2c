#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace rulekit {

/// A candidate's score during growing or pruning. Ordering is total:
/// higher value wins, then larger tie_p, then the earlier candidate. The
/// index makes parallel reduction independent of evaluation order.
struct ScoredCandidate {
  bool valid = false;
  double value = 0;
  double tie_p = 0;
  std::size_t index = 0;

  bool better_than(const ScoredCandidate& o) const {
    if (!valid || !o.valid) return valid;
    if (value != o.value) return value > o.value;
    if (tie_p != o.tie_p) return tie_p > o.tie_p;
    return index < o.index;
  }
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Deterministic parallel argmax: evaluates eval(0..count) across workers
/// and reduces with ScoredCandidate's total order, so the winner does not
/// depend on the thread count or on chunk boundaries.
template <typename Eval>
ScoredCandidate best_candidate(std::size_t count, unsigned threads, Eval&& eval) {
  threads = resolve_threads(threads);
  if (threads > count) threads = count == 0 ? 1 : static_cast<unsigned>(count);

  if (threads <= 1 || count < 2) {
    ScoredCandidate best;
    for (std::size_t i = 0; i < count; ++i) {
      ScoredCandidate s = eval(i);
      s.index = i;
      if (s.better_than(best)) best = s;
    }
    return best;
  }

  std::vector<ScoredCandidate> local(threads);
  std::vector<std::thread> workers;
  workers.reserve(threads);
  std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t begin = static_cast<std::size_t>(t) * chunk;
    std::size_t end = std::min(count, begin + chunk);
    workers.emplace_back([&, begin, end, t] {
      ScoredCandidate best;
      for (std::size_t i = begin; i < end; ++i) {
        ScoredCandidate s = eval(i);
        s.index = i;
        if (s.better_than(best)) best = s;
      }
      local[t] = best;
    });
  }
  for (auto& w : workers) w.join();
  ScoredCandidate best;
  for (const auto& s : local)
    if (s.better_than(best)) best = s;
  return best;
}

}  // namespace rulekit
