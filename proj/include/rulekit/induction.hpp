#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rulekit/dataset.hpp"
#include "rulekit/knowledge.hpp"
#include "rulekit/parallel.hpp"
#include "rulekit/rule.hpp"
#include "rulekit/stats.hpp"

namespace rulekit {

/// Enumerates refinement candidates from the currently covered examples:
/// equals(level) for every level present among them, and less_than /
/// at_least at every midpoint between consecutive distinct numeric values.
/// Emission order fixes the growing tie-break: attribute declaration order,
/// all less_than before all at_least, thresholds ascending.
inline std::vector<Condition> candidate_conditions(
    const DataSet& ds, const CoverageMask& covered,
    const std::vector<std::string>& excluded = {}) {
  std::vector<Condition> out;
  for (std::size_t a = 0; a < ds.attribute_count(); ++a) {
    const Attribute& attr = ds.attribute(a);
    if (attr.role != AttributeRole::regular) continue;
    if (std::find(excluded.begin(), excluded.end(), attr.name) != excluded.end()) continue;

    if (attr.kind == AttributeKind::nominal) {
      std::vector<bool> present(attr.levels.size(), false);
      for (std::size_t r = 0; r < ds.row_count(); ++r)
        if (covered.test(r) && !ds.is_missing(r, a))
          present[static_cast<std::size_t>(ds.cell(r, a))] = true;
      for (std::size_t l = 0; l < attr.levels.size(); ++l)
        if (present[l]) out.push_back(Condition::equals(attr.name, attr.levels[l]));
    } else {
      std::vector<double> values;
      for (std::size_t r = 0; r < ds.row_count(); ++r)
        if (covered.test(r) && !ds.is_missing(r, a)) values.push_back(ds.cell(r, a));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      std::vector<double> midpoints;
      for (std::size_t i = 1; i < values.size(); ++i)
        midpoints.push_back((values[i - 1] + values[i]) / 2.0);
      for (double m : midpoints) out.push_back(Condition::less_than(attr.name, m));
      for (double m : midpoints) out.push_back(Condition::at_least(attr.name, m));
    }
  }
  return out;
}

/// Task-specific scoring shared by growing and pruning. Implementations are
/// immutable and safe to query from worker threads.
class InductionTarget {
public:
  virtual ~InductionTarget() = default;
  virtual ContingencyQuad quad_of(const CoverageMask& cov) const = 0;
  virtual double value(const QualityMeasure& m, const CoverageMask& cov) const {
    return m.evaluate(quad_of(cov));
  }
  /// Non-null when quads depend only on coverage counts against a fixed
  /// positive set; growing then evaluates whole attributes with one sorted
  /// sweep instead of one scan per candidate threshold.
  virtual const CoverageMask* count_based_positives() const { return nullptr; }
};

class ClassificationTarget : public InductionTarget {
public:
  ClassificationTarget(const DataSet& ds, CoverageMask positives)
      : positives_(std::move(positives)),
        total_(static_cast<double>(ds.row_count())),
        total_positives_(static_cast<double>(positives_.count())) {}

  ContingencyQuad quad_of(const CoverageMask& cov) const override {
    double p = static_cast<double>(cov.intersection_count(positives_));
    double covered = static_cast<double>(cov.count());
    return {p, covered - p, total_positives_, total_ - total_positives_};
  }

  const CoverageMask* count_based_positives() const override { return &positives_; }

private:
  CoverageMask positives_;
  double total_;
  double total_positives_;
};

/// Regression labelling is dynamic: for a covered label multiset Y the rule
/// predicts v = median(Y) with spread s = stddev(Y); an example anywhere in
/// the data set counts as positive iff its label lies within v +/- s.
class RegressionTarget : public InductionTarget {
public:
  RegressionTarget(const DataSet& ds, std::size_t label_col) : ds_(ds), label_col_(label_col) {
    labels_.reserve(ds.row_count());
    for (std::size_t r = 0; r < ds.row_count(); ++r) {
      if (ds.is_missing(r, label_col))
        throw std::invalid_argument("regression training labels must not be missing");
      labels_.push_back(ds.cell(r, label_col));
    }
  }

  struct CenterSpread {
    double value;
    double spread;
  };

  CenterSpread center_of(const CoverageMask& cov) const {
    std::vector<double> y;
    y.reserve(cov.count());
    for (std::size_t r = 0; r < labels_.size(); ++r)
      if (cov.test(r)) y.push_back(labels_[r]);
    std::sort(y.begin(), y.end());
    double median = y.size() % 2 ? y[y.size() / 2]
                                 : (y[y.size() / 2 - 1] + y[y.size() / 2]) / 2.0;
    double mean = 0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    return {median, std::sqrt(var)};
  }

  ContingencyQuad quad_of(const CoverageMask& cov) const override {
    auto [v, s] = center_of(cov);
    double P = 0, p = 0;
    for (std::size_t r = 0; r < labels_.size(); ++r) {
      bool positive = std::abs(labels_[r] - v) <= s;
      if (positive) {
        ++P;
        if (cov.test(r)) ++p;
      }
    }
    double covered = static_cast<double>(cov.count());
    double total = static_cast<double>(labels_.size());
    return {p, covered - p, P, total - P};
  }

private:
  const DataSet& ds_;
  std::size_t label_col_;
  std::vector<double> labels_;
};

/// Survival scoring ignores the configured measures: growing and pruning
/// both maximize the log-rank statistic separating covered from uncovered
/// examples.
class SurvivalTarget : public InductionTarget {
public:
  SurvivalTarget(std::vector<double> times, std::vector<int> events)
      : times_(std::move(times)), events_(std::move(events)) {}

  ContingencyQuad quad_of(const CoverageMask& cov) const override {
    double covered = static_cast<double>(cov.count());
    double total = static_cast<double>(times_.size());
    return {covered, 0, total, 0};
  }

  double value(const QualityMeasure&, const CoverageMask& cov) const override {
    return separation(cov).statistic;
  }

  TestResult separation(const CoverageMask& cov) const {
    std::vector<double> ta, tb;
    std::vector<int> ea, eb;
    for (std::size_t r = 0; r < times_.size(); ++r) {
      if (cov.test(r)) {
        ta.push_back(times_[r]);
        ea.push_back(events_[r]);
      } else {
        tb.push_back(times_[r]);
        eb.push_back(events_[r]);
      }
    }
    if (ta.empty() || tb.empty()) return {0.0, 1.0};
    return log_rank(ta, ea, tb, eb);
  }

  SurvivalEstimate estimate_of(const CoverageMask& cov) const {
    std::vector<double> t;
    std::vector<int> e;
    for (std::size_t r = 0; r < times_.size(); ++r)
      if (cov.test(r)) {
        t.push_back(times_[r]);
        e.push_back(events_[r]);
      }
    return kaplan_meier(t, e);
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<int>& events() const { return events_; }

private:
  std::vector<double> times_;
  std::vector<int> events_;
};

/// Result of growing one rule: the premise, how many leading conditions are
/// expert-fixed, the condition count before pruning, and the coverage.
struct GrownRule {
  std::vector<Condition> premise;
  std::size_t fixed_conditions = 0;
  std::size_t grown_condition_count = 0;
  CoverageMask coverage;
};

namespace detail {

using GrowOutcome = GrownRule;

// One concrete growing step candidate with its resolved premise effect.
struct StepChoice {
  Condition condition;
  CoverageMask coverage;
  double value = 0;
  double tie_p = 0;
  bool valid = false;
};

class Grower {
public:
  Grower(const DataSet& ds, const InductionTarget& target, const InductionParams& params,
         const ExpertKnowledge* knowledge, KnowledgeBudget* budget)
      : ds_(ds), target_(target), params_(params), knowledge_(knowledge), budget_(budget) {}

  std::optional<GrowOutcome> grow(const std::vector<Condition>& seed,
                                  const CoverageMask& uncovered_positives) {
    GrowOutcome out;
    out.premise = seed;
    out.fixed_conditions = seed.size();
    out.coverage = premise_mask(ds_, out.premise);
    if (out.coverage.intersection_count(uncovered_positives) <
        static_cast<std::size_t>(std::ceil(params_.min_rule_covered)))
      return std::nullopt;

    const QualityMeasure& measure = params_.induction_measure;
    double current = target_.value(measure, out.coverage);

    if (knowledge_) {
      run_preferred_condition_stage(out, uncovered_positives, current);
      run_preferred_attribute_stage(out, uncovered_positives, current);
    }
    if (!knowledge_ || knowledge_->extend_with_automatic)
      run_automatic_stage(out, uncovered_positives, current);

    out.grown_condition_count = out.premise.size();
    return out;
  }

private:
  bool at_condition_limit(const GrowOutcome& out) const {
    return params_.max_growing_conditions &&
           out.premise.size() >= *params_.max_growing_conditions;
  }

  std::size_t mincov() const {
    return static_cast<std::size_t>(std::ceil(params_.min_rule_covered));
  }

  bool premise_contains(const std::vector<Condition>& premise, const Condition& c) const {
    return std::find(premise.begin(), premise.end(), c) != premise.end();
  }

  // Evaluates a concrete condition against the current premise. Full
  // premise recomputation keeps replacement semantics exact even when a
  // knowledge condition widens an existing bound.
  StepChoice evaluate_exact(const GrowOutcome& out, const Condition& cond,
                            const CoverageMask& uncovered_positives) const {
    StepChoice choice;
    choice.condition = cond;
    std::vector<Condition> premise = out.premise;
    add_condition(premise, cond);
    choice.coverage = premise_mask(ds_, premise);
    if (choice.coverage.intersection_count(uncovered_positives) < mincov()) return choice;
    choice.valid = true;
    choice.value = target_.value(params_.induction_measure, choice.coverage);
    choice.tie_p = target_.quad_of(choice.coverage).p;
    return choice;
  }

  std::vector<Condition> automatic_candidates(const GrowOutcome& out,
                                              const std::string* only_attribute) const {
    std::vector<std::string> excluded;
    if (knowledge_) excluded = knowledge_->forbidden_attributes;
    auto cands = candidate_conditions(ds_, out.coverage, excluded);
    if (knowledge_) cands = filter_candidates(cands, *knowledge_);
    if (only_attribute) {
      std::erase_if(cands, [&](const Condition& c) { return c.attribute != *only_attribute; });
    }
    return cands;
  }

  // A declared preferred entry matches a concrete condition exactly, or by
  // attribute and direction when the declaration carries a wildcard.
  int match_preferred_condition(const Condition& cond) const {
    if (!knowledge_) return -1;
    for (std::size_t i = 0; i < knowledge_->preferred_conditions.size(); ++i) {
      const Condition& declared = knowledge_->preferred_conditions[i].condition;
      if (declared.has_wildcard()) {
        if (declared.attribute == cond.attribute && declared.kind == cond.kind)
          return static_cast<int>(i);
      } else if (declared == cond) {
        return static_cast<int>(i);
      }
    }
    return -1;
  }

  int match_preferred_attribute(const std::string& attribute) const {
    if (!knowledge_) return -1;
    for (std::size_t i = 0; i < knowledge_->preferred_attributes.size(); ++i)
      if (knowledge_->preferred_attributes[i].attribute == attribute)
        return static_cast<int>(i);
    return -1;
  }

  // Budgets are rule-set-wide: a condition matching a preferred declaration
  // spends that budget no matter which stage added it.
  bool budget_allows(const Condition& cond) const {
    if (!budget_) return true;
    int ci = match_preferred_condition(cond);
    if (ci >= 0 && !budget_->condition_available(static_cast<std::size_t>(ci))) return false;
    int ai = match_preferred_attribute(cond.attribute);
    if (ai >= 0 && !budget_->attribute_available(static_cast<std::size_t>(ai))) return false;
    return true;
  }

  void consume_budgets(const Condition& cond) {
    if (!budget_) return;
    int ci = match_preferred_condition(cond);
    if (ci >= 0) budget_->consume_condition(static_cast<std::size_t>(ci));
    int ai = match_preferred_attribute(cond.attribute);
    if (ai >= 0) budget_->consume_attribute(static_cast<std::size_t>(ai));
  }

  // Stage 2: preferred conditions are the only candidates, each applied at
  // most once per rule and consuming its rule-set-wide budget.
  void run_preferred_condition_stage(GrowOutcome& out, const CoverageMask& uncovered_positives,
                                     double& current) {
    std::vector<bool> used(knowledge_->preferred_conditions.size(), false);
    while (!at_condition_limit(out)) {
      StepChoice best;
      std::size_t best_entry = 0;
      for (std::size_t i = 0; i < knowledge_->preferred_conditions.size(); ++i) {
        if (used[i] || !budget_->condition_available(i)) continue;
        const Condition& declared = knowledge_->preferred_conditions[i].condition;
        for (const Condition& cond : resolve_wildcards(out, declared)) {
          if (premise_contains(out.premise, cond) || !budget_allows(cond)) continue;
          StepChoice choice = evaluate_exact(out, cond, uncovered_positives);
          if (choice.valid && choice.value > current && pick_better(choice, best))
            best = choice, best_entry = i;
        }
      }
      if (!best.valid) return;
      add_condition(out.premise, best.condition);
      out.coverage = best.coverage;
      current = best.value;
      used[best_entry] = true;
      consume_budgets(best.condition);
    }
  }

  // Stage 3: automatic candidates restricted to the preferred attributes,
  // consuming the per-attribute budgets.
  void run_preferred_attribute_stage(GrowOutcome& out, const CoverageMask& uncovered_positives,
                                     double& current) {
    while (!at_condition_limit(out)) {
      StepChoice best;
      for (std::size_t i = 0; i < knowledge_->preferred_attributes.size(); ++i) {
        if (!budget_->attribute_available(i)) continue;
        const std::string& name = knowledge_->preferred_attributes[i].attribute;
        for (const Condition& cond : automatic_candidates(out, &name)) {
          if (premise_contains(out.premise, cond) || !budget_allows(cond)) continue;
          StepChoice choice = evaluate_exact(out, cond, uncovered_positives);
          if (choice.valid && choice.value > current && pick_better(choice, best))
            best = choice;
        }
      }
      if (!best.valid) return;
      add_condition(out.premise, best.condition);
      out.coverage = best.coverage;
      current = best.value;
      consume_budgets(best.condition);
    }
  }

  struct CandidateCounts {
    double covered = 0;
    double covered_positives = 0;
    double newly_covered = 0;
  };

  // Refined-coverage counts for every candidate from one pass per
  // attribute: nominal levels are tallied directly, numeric thresholds come
  // from prefix sums over the sorted covered values. Equivalent to
  // intersecting each candidate's mask with the rule coverage, without the
  // per-candidate scans.
  std::vector<CandidateCounts> sweep_counts(const std::vector<Condition>& cands,
                                            const CoverageMask& coverage,
                                            const CoverageMask& positives,
                                            const CoverageMask& uncovered_positives) const {
    std::vector<CandidateCounts> out(cands.size());
    std::map<std::size_t, std::vector<std::size_t>> by_column;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      int col = ds_.find_attribute(cands[i].attribute);
      if (col < 0) throw std::logic_error("candidate on unknown attribute");
      by_column[static_cast<std::size_t>(col)].push_back(i);
    }

    for (const auto& [col, indices] : by_column) {
      const Attribute& attr = ds_.attribute(col);
      if (attr.kind == AttributeKind::nominal) {
        std::vector<CandidateCounts> per_level(attr.levels.size());
        for (std::size_t r = 0; r < ds_.row_count(); ++r) {
          if (!coverage.test(r) || ds_.is_missing(r, col)) continue;
          auto& c = per_level[static_cast<std::size_t>(ds_.cell(r, col))];
          c.covered += 1;
          if (positives.test(r)) c.covered_positives += 1;
          if (uncovered_positives.test(r)) c.newly_covered += 1;
        }
        for (std::size_t i : indices) {
          int level = attr.level_index(cands[i].level);
          if (level >= 0) out[i] = per_level[static_cast<std::size_t>(level)];
        }
        continue;
      }

      struct Entry {
        double value;
        bool positive;
        bool fresh;
      };
      std::vector<Entry> entries;
      for (std::size_t r = 0; r < ds_.row_count(); ++r) {
        if (!coverage.test(r) || ds_.is_missing(r, col)) continue;
        entries.push_back({ds_.cell(r, col), positives.test(r), uncovered_positives.test(r)});
      }
      std::sort(entries.begin(), entries.end(),
                [](const Entry& a, const Entry& b) { return a.value < b.value; });

      // Cumulative counts up to and including each distinct value.
      std::vector<double> values;
      std::vector<CandidateCounts> prefix;
      CandidateCounts running;
      for (std::size_t e = 0; e < entries.size(); ++e) {
        running.covered += 1;
        running.covered_positives += entries[e].positive ? 1 : 0;
        running.newly_covered += entries[e].fresh ? 1 : 0;
        if (e + 1 == entries.size() || entries[e + 1].value != entries[e].value) {
          values.push_back(entries[e].value);
          prefix.push_back(running);
        }
      }

      for (std::size_t i : indices) {
        const Condition& c = cands[i];
        double threshold = c.kind == Condition::Kind::less_than ? c.hi : c.lo;
        auto it = std::lower_bound(values.begin(), values.end(), threshold);
        auto below = static_cast<std::size_t>(it - values.begin());
        CandidateCounts lt = below ? prefix[below - 1] : CandidateCounts{};
        if (c.kind == Condition::Kind::less_than) {
          out[i] = lt;
        } else if (c.kind == Condition::Kind::at_least) {
          out[i] = {running.covered - lt.covered,
                    running.covered_positives - lt.covered_positives,
                    running.newly_covered - lt.newly_covered};
        } else {
          throw std::logic_error("unexpected candidate relation in sweep");
        }
      }
    }
    return out;
  }

  // Stage 4: the ordinary candidate space, evaluated in parallel with a
  // deterministic reduce; only strict improvements are accepted.
  void run_automatic_stage(GrowOutcome& out, const CoverageMask& uncovered_positives,
                           double& current) {
    const CoverageMask* positives = target_.count_based_positives();
    while (!at_condition_limit(out)) {
      auto cands = automatic_candidates(out, nullptr);
      if (knowledge_)
        std::erase_if(cands, [&](const Condition& c) { return !budget_allows(c); });
      if (cands.empty()) return;
      const CoverageMask& base = out.coverage;

      ScoredCandidate scored;
      if (positives) {
        auto counts = sweep_counts(cands, base, *positives, uncovered_positives);
        const double total_positives = static_cast<double>(positives->count());
        const double total_negatives =
            static_cast<double>(ds_.row_count()) - total_positives;
        const double needed = static_cast<double>(mincov());
        // Count lookups are cheap; fanning out only pays off for very large
        // candidate sets. The reduce is deterministic either way.
        unsigned threads = cands.size() >= 16384 ? params_.threads : 1;
        scored = best_candidate(
            cands.size(), threads, [&](std::size_t i) -> ScoredCandidate {
              if (counts[i].newly_covered < needed) return {};
              ContingencyQuad q{counts[i].covered_positives,
                                counts[i].covered - counts[i].covered_positives,
                                total_positives, total_negatives};
              ScoredCandidate s;
              s.valid = true;
              s.value = params_.induction_measure.evaluate(q);
              s.tie_p = q.p;
              return s;
            });
      } else {
        scored = best_candidate(
            cands.size(), params_.threads, [&](std::size_t i) -> ScoredCandidate {
              CoverageMask refined = base & condition_mask(ds_, cands[i]);
              if (refined.intersection_count(uncovered_positives) < mincov()) return {};
              ScoredCandidate s;
              s.valid = true;
              s.value = target_.value(params_.induction_measure, refined);
              s.tie_p = target_.quad_of(refined).p;
              return s;
            });
      }
      if (!scored.valid || scored.value <= current) return;
      const Condition& chosen = cands[scored.index];
      add_condition(out.premise, chosen);
      out.coverage = base & condition_mask(ds_, chosen);
      current = scored.value;
      consume_budgets(chosen);
    }
  }

  // A declared wildcard threshold is refined over the automatic midpoints
  // of its attribute and direction; exact conditions pass through as-is.
  std::vector<Condition> resolve_wildcards(const GrowOutcome& out,
                                           const Condition& declared) const {
    if (!declared.has_wildcard()) return {declared};
    std::vector<Condition> resolved;
    for (const Condition& c : automatic_candidates(out, &declared.attribute))
      if (c.kind == declared.kind) resolved.push_back(c);
    return resolved;
  }

  // Sequential stages use the same total order as the parallel reduce;
  // earlier enumeration wins ties.
  static bool pick_better(const StepChoice& a, const StepChoice& b) {
    if (!b.valid) return true;
    if (a.value != b.value) return a.value > b.value;
    return a.tie_p > b.tie_p;
  }

  const DataSet& ds_;
  const InductionTarget& target_;
  const InductionParams& params_;
  const ExpertKnowledge* knowledge_;
  KnowledgeBudget* budget_;
};

}  // namespace detail

/// Greedy growing from a (possibly empty) seed premise: appends one
/// condition at a time, maximizing the induction measure subject to the
/// refined rule still covering at least min_rule_covered yet-uncovered
/// targets. Returns nothing when even the seed misses that precondition.
inline std::optional<GrownRule> grow_rule(const DataSet& ds, const InductionTarget& target,
                                          const std::vector<Condition>& seed,
                                          const CoverageMask& uncovered_positives,
                                          const InductionParams& params,
                                          const ExpertKnowledge* knowledge = nullptr,
                                          KnowledgeBudget* budget = nullptr) {
  std::optional<KnowledgeBudget> local;
  if (knowledge && !budget) {
    local.emplace(*knowledge);
    budget = &*local;
  }
  return detail::Grower(ds, target, params, knowledge, budget).grow(seed, uncovered_positives);
}

/// Hill-climbing pruning: repeatedly drop the condition whose removal gives
/// the highest pruning measure while that value does not fall below the
/// current one. Expert-seed conditions are never dropped; the coverage and
/// quad are recomputed after each removal.
inline void prune_rule(std::vector<Condition>& premise, std::size_t fixed_conditions,
                       const DataSet& ds, const InductionTarget& target,
                       const QualityMeasure& pruning_measure, CoverageMask& coverage) {
  if (premise.size() <= 1 || premise.size() <= fixed_conditions) return;
  double current = target.value(pruning_measure, coverage);
  while (premise.size() > 1 && premise.size() > fixed_conditions) {
    bool found = false;
    double best_value = 0, best_p = 0;
    std::size_t best_idx = 0;
    CoverageMask best_cov;
    for (std::size_t i = fixed_conditions; i < premise.size(); ++i) {
      std::vector<Condition> reduced = premise;
      reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(i));
      CoverageMask cov = premise_mask(ds, reduced);
      double value = target.value(pruning_measure, cov);
      double tie_p = target.quad_of(cov).p;
      if (!found || value > best_value || (value == best_value && tie_p > best_p)) {
        found = true;
        best_value = value;
        best_p = tie_p;
        best_idx = i;
        best_cov = cov;
      }
    }
    if (!found || best_value < current) return;
    premise.erase(premise.begin() + static_cast<std::ptrdiff_t>(best_idx));
    coverage = best_cov;
    current = best_value;
  }
}

namespace detail {

class Stopwatch {
public:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct CoveringState {
  RuleSet rule_set;
  double growing_seconds = 0;
  double pruning_seconds = 0;
};

// Shared covering loop: expert seeds first, then automatic rules while the
// mincov precondition holds. finalize turns a pruned premise+coverage into
// a full Rule; on success the newly covered targets are removed.
template <typename Finalize>
void covering_loop(CoveringState& state, const DataSet& ds, const InductionTarget& target,
                   const InductionParams& params, const ExpertKnowledge* knowledge,
                   KnowledgeBudget* budget, CoverageMask& uncovered,
                   const std::optional<std::string>& class_under_induction,
                   Finalize&& finalize) {
  detail::Grower grower(ds, target, params, knowledge, budget);
  const auto mincov = static_cast<std::size_t>(std::ceil(params.min_rule_covered));

  auto induce_one = [&](const std::vector<Condition>& seed) -> bool {
    Stopwatch grow_timer;
    auto grown = grower.grow(seed, uncovered);
    state.growing_seconds += grow_timer.elapsed();
    if (!grown) return false;

    if (params.pruning_enabled && !grown->premise.empty()) {
      Stopwatch prune_timer;
      prune_rule(grown->premise, grown->fixed_conditions, ds, target, params.pruning_measure,
                 grown->coverage);
      state.pruning_seconds += prune_timer.elapsed();
    }

    Rule rule = finalize(*grown);
    for (const Rule& existing : state.rule_set.rules)
      if (same_premise(existing.premise, rule.premise) &&
          existing.consequence == rule.consequence)
        return false;  // loop guard
    uncovered = uncovered & ~grown->coverage;
    state.rule_set.rules.push_back(std::move(rule));
    return true;
  };

  if (knowledge) {
    for (const ExpertRule& er : knowledge->initial_rules) {
      if (class_under_induction && er.consequence_class &&
          *er.consequence_class != *class_under_induction)
        continue;
      induce_one(er.premise);
    }
    if (!knowledge->induce_automatic_rules) return;
  }
  while (uncovered.count() >= mincov) {
    if (!induce_one({})) break;
  }
}

inline void compute_training_coverage(RuleSet& rs, const DataSet& ds) {
  rs.training_coverage.assign(ds.row_count(), {});
  rs.training_best.assign(ds.row_count(), -1);
  std::vector<CoverageMask> masks;
  masks.reserve(rs.rules.size());
  for (const auto& r : rs.rules) masks.push_back(premise_mask(ds, r.premise));
  for (std::size_t row = 0; row < ds.row_count(); ++row) {
    double best_weight = 0;
    for (std::size_t i = 0; i < rs.rules.size(); ++i) {
      if (!masks[i].test(row)) continue;
      rs.training_coverage[row].push_back(i);
      if (rs.training_best[row] < 0 || rs.rules[i].weight > best_weight) {
        rs.training_best[row] = static_cast<int>(i);
        best_weight = rs.rules[i].weight;
      }
    }
  }
}

}  // namespace detail

/// Sequential covering for classification: one covering pass per class
/// level, positives = the class, negatives = the rest. Rules are weighted
/// by the voting measure and tested with Fisher's exact test.
inline RuleSet induce_classification(const DataSet& ds, const InductionParams& params,
                                     const ExpertKnowledge* knowledge = nullptr) {
  params.validate();
  if (knowledge) knowledge->validate();
  if (params.induction_measure.is_log_rank() || params.pruning_measure.is_log_rank() ||
      params.voting_measure.is_log_rank())
    throw std::invalid_argument("LogRank measures apply to survival tasks only");
  detail::Stopwatch total_timer;

  const int label_col = ds.label_index();
  if (label_col < 0) throw std::invalid_argument("classification needs a label attribute");
  const auto& label_attr = ds.attribute(static_cast<std::size_t>(label_col));

  detail::CoveringState state;
  state.rule_set.task = Task::classification;
  state.rule_set.params = params;
  state.rule_set.schema = ds.attributes();

  std::optional<KnowledgeBudget> budget;
  if (knowledge) budget.emplace(*knowledge);

  std::vector<std::size_t> class_counts(label_attr.levels.size(), 0);
  for (std::size_t lv = 0; lv < label_attr.levels.size(); ++lv) {
    CoverageMask positives(ds.row_count());
    for (std::size_t r = 0; r < ds.row_count(); ++r) {
      if (ds.is_missing(r, static_cast<std::size_t>(label_col)))
        throw std::invalid_argument("classification training labels must not be missing");
      if (static_cast<std::size_t>(ds.cell(r, static_cast<std::size_t>(label_col))) == lv)
        positives.set(r);
    }
    class_counts[lv] = positives.count();
    if (positives.empty()) continue;

    ClassificationTarget target(ds, positives);
    CoverageMask uncovered = positives;
    std::optional<std::string> class_name = label_attr.levels[lv];
    detail::covering_loop(
        state, ds, target, params, knowledge, budget ? &*budget : nullptr, uncovered,
        class_name, [&](const detail::GrowOutcome& grown) {
          Rule rule;
          rule.premise = grown.premise;
          rule.fixed_conditions = grown.fixed_conditions;
          rule.grown_condition_count = grown.grown_condition_count;
          rule.consequence = RuleConsequence::for_class(label_attr.levels[lv]);
          rule.stats = target.quad_of(grown.coverage);
          rule.weight = params.voting_measure.evaluate(rule.stats);
          rule.p_value = fisher_exact_greater(rule.stats).p_value;
          return rule;
        });
  }

  std::size_t majority = 0;
  for (std::size_t lv = 1; lv < class_counts.size(); ++lv)
    if (class_counts[lv] > class_counts[majority]) majority = lv;
  state.rule_set.default_class =
      label_attr.levels.empty() ? std::string{} : label_attr.levels[majority];

  detail::compute_training_coverage(state.rule_set, ds);
  state.rule_set.time_growing_s = state.growing_seconds;
  state.rule_set.time_pruning_s = state.pruning_seconds;
  state.rule_set.time_total_s = total_timer.elapsed();
  return state.rule_set;
}

/// Sequential covering for regression: a single covering pass over all
/// examples with the dynamic median/spread labelling; rules are tested with
/// the chi-square test on their quads.
inline RuleSet induce_regression(const DataSet& ds, const InductionParams& params,
                                 const ExpertKnowledge* knowledge = nullptr) {
  params.validate();
  if (knowledge) knowledge->validate();
  if (params.induction_measure.is_log_rank() || params.pruning_measure.is_log_rank() ||
      params.voting_measure.is_log_rank())
    throw std::invalid_argument("LogRank measures apply to survival tasks only");
  detail::Stopwatch total_timer;

  const int label_col = ds.label_index();
  if (label_col < 0) throw std::invalid_argument("regression needs a label attribute");
  RegressionTarget target(ds, static_cast<std::size_t>(label_col));

  detail::CoveringState state;
  state.rule_set.task = Task::regression;
  state.rule_set.params = params;
  state.rule_set.schema = ds.attributes();

  std::optional<KnowledgeBudget> budget;
  if (knowledge) budget.emplace(*knowledge);

  CoverageMask uncovered = CoverageMask::all(ds.row_count());
  detail::covering_loop(state, ds, target, params, knowledge, budget ? &*budget : nullptr,
                        uncovered, std::nullopt, [&](const detail::GrowOutcome& grown) {
                          Rule rule;
                          rule.premise = grown.premise;
                          rule.fixed_conditions = grown.fixed_conditions;
                          rule.grown_condition_count = grown.grown_condition_count;
                          auto [v, s] = target.center_of(grown.coverage);
                          rule.consequence = RuleConsequence::for_value(v, s);
                          rule.stats = target.quad_of(grown.coverage);
                          rule.weight = params.voting_measure.evaluate(rule.stats);
                          rule.p_value = chi_square_2x2(rule.stats).p_value;
                          return rule;
                        });

  double mean = 0;
  for (std::size_t r = 0; r < ds.row_count(); ++r)
    mean += ds.cell(r, static_cast<std::size_t>(label_col));
  state.rule_set.default_value = ds.row_count() ? mean / static_cast<double>(ds.row_count()) : 0;

  detail::compute_training_coverage(state.rule_set, ds);
  state.rule_set.time_growing_s = state.growing_seconds;
  state.rule_set.time_pruning_s = state.pruning_seconds;
  state.rule_set.time_total_s = total_timer.elapsed();
  return state.rule_set;
}

/// Sequential covering for survival: growing and pruning maximize the
/// log-rank separation between covered and uncovered examples, every rule
/// carries the Kaplan-Meier estimate of its covered examples, and weights
/// are fixed at 1 (survival has no voting measure).
inline RuleSet induce_survival(const DataSet& ds, const InductionParams& params,
                               const ExpertKnowledge* knowledge = nullptr) {
  params.validate();
  if (knowledge) knowledge->validate();
  detail::Stopwatch total_timer;

  const int time_col = ds.survival_time_index();
  const int status_col = ds.survival_status_index();
  if (time_col < 0 || status_col < 0)
    throw std::invalid_argument("survival needs time and status attributes");

  std::vector<double> times(ds.row_count());
  std::vector<int> events(ds.row_count());
  std::vector<int> censorings(ds.row_count());
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    times[r] = ds.cell(r, static_cast<std::size_t>(time_col));
    events[r] = static_cast<int>(ds.cell(r, static_cast<std::size_t>(status_col)));
    censorings[r] = 1 - events[r];
  }
  SurvivalTarget target(times, events);

  detail::CoveringState state;
  state.rule_set.task = Task::survival;
  state.rule_set.params = params;
  state.rule_set.schema = ds.attributes();

  std::optional<KnowledgeBudget> budget;
  if (knowledge) budget.emplace(*knowledge);

  CoverageMask uncovered = CoverageMask::all(ds.row_count());
  detail::covering_loop(state, ds, target, params, knowledge, budget ? &*budget : nullptr,
                        uncovered, std::nullopt, [&](const detail::GrowOutcome& grown) {
                          Rule rule;
                          rule.premise = grown.premise;
                          rule.fixed_conditions = grown.fixed_conditions;
                          rule.grown_condition_count = grown.grown_condition_count;
                          rule.consequence =
                              RuleConsequence::for_survival(target.estimate_of(grown.coverage));
                          rule.stats = target.quad_of(grown.coverage);
                          rule.weight = 1.0;
                          rule.p_value = target.separation(grown.coverage).p_value;
                          return rule;
                        });

  state.rule_set.default_survival = kaplan_meier(times, events);
  state.rule_set.censoring_km = kaplan_meier(times, censorings);

  detail::compute_training_coverage(state.rule_set, ds);
  state.rule_set.time_growing_s = state.growing_seconds;
  state.rule_set.time_pruning_s = state.pruning_seconds;
  state.rule_set.time_total_s = total_timer.elapsed();
  return state.rule_set;
}

/// Task dispatch on the data set's assigned roles.
inline RuleSet induce(const DataSet& ds, const InductionParams& params,
                      const ExpertKnowledge* knowledge = nullptr) {
  switch (ds.task()) {
    case Task::classification: return induce_classification(ds, params, knowledge);
    case Task::regression: return induce_regression(ds, params, knowledge);
    case Task::survival: return induce_survival(ds, params, knowledge);
  }
  throw std::logic_error("unreachable");
}

}  // namespace rulekit
