#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rulekit/measures.hpp"

namespace rulekit {

struct TestResult {
  double statistic = 0;
  double p_value = 1;
};

/// Right-continuous survival step function with S(0) = 1. Points are the
/// event times where the probability drops; times strictly increase and
/// probabilities never increase.
struct SurvivalEstimate {
  struct Point {
    double time;
    double probability;
    bool operator==(const Point&) const = default;
  };
  std::vector<Point> points;

  double probability_at(double t) const {
    double prob = 1.0;
    for (const auto& pt : points) {
      if (pt.time > t) break;
      prob = pt.probability;
    }
    return prob;
  }

  /// Left limit S(t-), used for censoring weights at event times.
  double probability_before(double t) const {
    double prob = 1.0;
    for (const auto& pt : points) {
      if (pt.time >= t) break;
      prob = pt.probability;
    }
    return prob;
  }

  double max_time() const { return points.empty() ? 0.0 : points.back().time; }

  bool operator==(const SurvivalEstimate&) const = default;
};

namespace detail {

inline double log_choose(double n, double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

inline long long round_count(double x, const char* what) {
  double r = std::round(x);
  if (std::abs(x - r) > 1e-9)
    throw std::invalid_argument(std::string(what) + " must be integral, got " +
                                std::to_string(x));
  return static_cast<long long>(r);
}

inline double chi_square_df1_pvalue(double stat) {
  if (stat <= 0) return 1.0;
  // Regularized upper incomplete gamma with df = 1 reduces to erfc.
  return std::erfc(std::sqrt(stat / 2.0));
}

struct Observation {
  double time;
  int event;
};

inline std::vector<Observation> sorted_observations(const std::vector<double>& times,
                                                    const std::vector<int>& events) {
  if (times.size() != events.size())
    throw std::invalid_argument("times and events must have equal length");
  if (times.empty()) throw std::invalid_argument("empty survival sample");
  std::vector<Observation> obs(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (events[i] != 0 && events[i] != 1)
      throw std::invalid_argument("event indicators must be 0 or 1");
    obs[i] = {times[i], events[i]};
  }
  std::sort(obs.begin(), obs.end(),
            [](const Observation& a, const Observation& b) { return a.time < b.time; });
  return obs;
}

}  // namespace detail

/// One-sided (enrichment) Fisher exact test: the probability of drawing at
/// least p positives in p+n draws from an urn of P positives and N
/// negatives. Counts must be integral within 1e-9. Log-space accumulation
/// keeps extreme tables (p-values far below 1e-300 territory) in range.
inline TestResult fisher_exact_greater(const ContingencyQuad& q) {
  q.validate();
  long long p = detail::round_count(q.p, "p");
  long long n = detail::round_count(q.n, "n");
  long long P = detail::round_count(q.P, "P");
  long long N = detail::round_count(q.N, "N");
  long long draws = p + n;
  if (draws > P + N) throw std::invalid_argument("p+n exceeds P+N");

  long long kmax = std::min(P, draws);
  double log_denom = detail::log_choose(static_cast<double>(P + N), static_cast<double>(draws));
  std::vector<double> log_terms;
  log_terms.reserve(static_cast<std::size_t>(kmax - p + 1));
  for (long long k = p; k <= kmax; ++k) {
    log_terms.push_back(detail::log_choose(static_cast<double>(P), static_cast<double>(k)) +
                        detail::log_choose(static_cast<double>(N),
                                           static_cast<double>(draws - k)) -
                        log_denom);
  }
  double p_value;
  if (log_terms.empty()) {
    p_value = 0.0;
  } else {
    double m = *std::max_element(log_terms.begin(), log_terms.end());
    double sum = 0;
    for (double lt : log_terms) sum += std::exp(lt - m);
    p_value = std::exp(m + std::log(sum));
  }
  p_value = std::clamp(p_value, 0.0, 1.0);
  return {static_cast<double>(p), p_value};
}

/// Pearson chi-square with one degree of freedom on the 2x2 table
/// [covered vs uncovered] x [positive vs negative]. A zero margin makes the
/// expected counts degenerate: statistic 0, p-value 1.
inline TestResult chi_square_2x2(const ContingencyQuad& q) {
  q.validate();
  const double covered = q.p + q.n;
  const double uncovered = q.P + q.N - covered;
  if (covered <= 0 || uncovered <= 0 || q.P <= 0 || q.N <= 0) return {0.0, 1.0};
  double diff = q.p * q.N - q.n * q.P;
  double stat = (q.P + q.N) * diff * diff / (q.P * q.N * covered * uncovered);
  return {stat, detail::chi_square_df1_pvalue(stat)};
}

/// Product-limit estimator. At each distinct event time t with d events
/// among r at risk, S multiplies by (1 - d/r). Censored observations leave
/// the risk set after their time; at equal times events count first.
inline SurvivalEstimate kaplan_meier(const std::vector<double>& times,
                                     const std::vector<int>& events) {
  auto obs = detail::sorted_observations(times, events);
  SurvivalEstimate est;
  double survival = 1.0;
  std::size_t i = 0;
  const std::size_t total = obs.size();
  while (i < total) {
    double t = obs[i].time;
    std::size_t at_risk = total - i;
    std::size_t deaths = 0;
    std::size_t j = i;
    while (j < total && obs[j].time == t) {
      deaths += static_cast<std::size_t>(obs[j].event);
      ++j;
    }
    if (deaths > 0) {
      survival *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      est.points.push_back({t, survival});
    }
    i = j;
  }
  return est;
}

/// Two-group log-rank test. Over the pooled distinct event times the
/// statistic is (sum of observed-minus-expected events in group a)^2 over
/// the summed hypergeometric variances; p-value from chi-square df = 1.
inline TestResult log_rank(const std::vector<double>& times_a, const std::vector<int>& events_a,
                           const std::vector<double>& times_b,
                           const std::vector<int>& events_b) {
  auto a = detail::sorted_observations(times_a, events_a);
  auto b = detail::sorted_observations(times_b, events_b);

  double observed_minus_expected = 0;
  double variance = 0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() || ib < b.size()) {
    double t;
    if (ia >= a.size())
      t = b[ib].time;
    else if (ib >= b.size())
      t = a[ia].time;
    else
      t = std::min(a[ia].time, b[ib].time);

    double at_risk_a = static_cast<double>(a.size() - ia);
    double at_risk_b = static_cast<double>(b.size() - ib);
    double deaths_a = 0, deaths_b = 0;
    while (ia < a.size() && a[ia].time == t) deaths_a += a[ia++].event;
    while (ib < b.size() && b[ib].time == t) deaths_b += b[ib++].event;

    double deaths = deaths_a + deaths_b;
    if (deaths <= 0) continue;
    double at_risk = at_risk_a + at_risk_b;
    double share_a = at_risk_a / at_risk;
    observed_minus_expected += deaths_a - deaths * share_a;
    if (at_risk > 1)
      variance += deaths * share_a * (1.0 - share_a) * (at_risk - deaths) / (at_risk - 1.0);
  }

  if (variance <= 0) return {0.0, 1.0};
  double stat = observed_minus_expected * observed_minus_expected / variance;
  return {stat, detail::chi_square_df1_pvalue(stat)};
}

}  // namespace rulekit
