#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rulekit/expression.hpp"

namespace rulekit {

/// The (p, n, P, N) statistics every quality measure and significance test
/// consumes: positives/negatives covered by a rule and their totals.
struct ContingencyQuad {
  double p = 0;
  double n = 0;
  double P = 0;
  double N = 0;

  void validate() const {
    if (!(P > 0)) throw std::invalid_argument("contingency quad needs P > 0");
    if (p < 0 || p > P || n < 0 || n > N)
      throw std::invalid_argument("contingency quad outside 0<=p<=P, 0<=n<=N");
  }

  bool operator==(const ContingencyQuad&) const = default;
};

inline ContingencyQuad quad(double p, double n, double P, double N) { return {p, n, P, N}; }

enum class MeasureKind {
  Precision,
  Coverage,
  Laplace,
  Lift,
  Correlation,
  RSS,
  GeoRSS,
  C2,
  CN2Significance,
  BinaryEntropy,
  Accuracy,
  FullCoverage,
  OddsRatio,
  Kappa,
  WeightedRelativeAccuracy,
  LogRank,
  UserDefined,
  Custom,
};

namespace detail {

inline double xlog2x(double x) { return x > 0 ? x * std::log2(x) : 0.0; }
inline double xlnx_ratio(double x, double e) {
  // x * ln(x/e) with the 0*ln(0) = 0 convention.
  if (x <= 0) return 0.0;
  return x * std::log(safe_div(x, e));
}

inline double evaluate_named(MeasureKind kind, const ContingencyQuad& q) {
  const double p = q.p, n = q.n, P = q.P, N = q.N;
  switch (kind) {
    case MeasureKind::Precision: return safe_div(p, p + n);
    case MeasureKind::Coverage: return safe_div(p, P);
    case MeasureKind::Laplace: return safe_div(p + 1, p + n + 2);
    case MeasureKind::Lift: return safe_div(p * (P + N), (p + n) * P);
    case MeasureKind::Correlation:
      return safe_div(p * N - n * P, std::sqrt(P * N * (p + n) * (P + N - p - n)));
    case MeasureKind::RSS: return safe_div(p, P) - safe_div(n, N);
    case MeasureKind::GeoRSS: return std::sqrt(safe_div(p, P) * (1.0 - safe_div(n, N)));
    case MeasureKind::C2:
      return (safe_div(P + N, N) * safe_div(p, p + n) - safe_div(P, N)) *
             ((1.0 + safe_div(p, P)) / 2.0);
    case MeasureKind::CN2Significance: {
      double ep = safe_div((p + n) * P, P + N);
      double en = safe_div((p + n) * N, P + N);
      return 2.0 * (xlnx_ratio(p, ep) + xlnx_ratio(n, en));
    }
    case MeasureKind::BinaryEntropy: {
      double qpos = safe_div(p, p + n);
      return 1.0 + xlog2x(qpos) + xlog2x(1.0 - qpos);
    }
    case MeasureKind::Accuracy: return p - n;
    case MeasureKind::FullCoverage: return safe_div(p + n, P + N);
    case MeasureKind::OddsRatio: return safe_div(p * (N - n), n * (P - p));
    case MeasureKind::Kappa: {
      double qpos = safe_div(p, p + n);
      return safe_div((P + N) * qpos - P, (P + N) / 2.0 * (1.0 + qpos) - P);
    }
    case MeasureKind::WeightedRelativeAccuracy:
      return safe_div(p + n, P + N) * (safe_div(p, p + n) - safe_div(P, P + N));
    default: throw std::logic_error("measure is not a plain contingency formula");
  }
}

struct CustomMeasureRegistry {
  std::mutex mutex;
  std::map<std::string, std::function<double(const ContingencyQuad&)>, std::less<>> entries;

  static CustomMeasureRegistry& instance() {
    static CustomMeasureRegistry reg;
    return reg;
  }
};

}  // namespace detail

/// A rule quality measure: either one of the named registry entries or a
/// user-supplied arithmetic formula over (p, n, P, N). Immutable; evaluation
/// is pure and safe to call concurrently.
class QualityMeasure {
public:
  QualityMeasure() : QualityMeasure(MeasureKind::C2) {}

  explicit QualityMeasure(MeasureKind kind) : kind_(kind), name_(builtin_name(kind)) {
    if (kind == MeasureKind::UserDefined || kind == MeasureKind::Custom)
      throw std::invalid_argument("user-defined measures need an expression or function");
  }

  static QualityMeasure user_defined(MeasureExpr expr) {
    QualityMeasure m;
    m.kind_ = MeasureKind::UserDefined;
    m.name_ = "UserDefined";
    m.expr_ = std::move(expr);
    return m;
  }

  static QualityMeasure user_defined(std::string_view formula) {
    return user_defined(parse_measure_expression(formula));
  }

  /// Registration point for additional named measures.
  static void register_custom(const std::string& name,
                              std::function<double(const ContingencyQuad&)> fn) {
    auto& reg = detail::CustomMeasureRegistry::instance();
    std::lock_guard lock(reg.mutex);
    reg.entries[name] = std::move(fn);
  }

  /// Looks a measure up by its registry spelling (case-sensitive).
  static QualityMeasure from_name(std::string_view name) {
    static const std::map<std::string, MeasureKind, std::less<>> builtins = {
        {"Precision", MeasureKind::Precision},
        {"Coverage", MeasureKind::Coverage},
        {"Laplace", MeasureKind::Laplace},
        {"Lift", MeasureKind::Lift},
        {"Correlation", MeasureKind::Correlation},
        {"RSS", MeasureKind::RSS},
        {"GeoRSS", MeasureKind::GeoRSS},
        {"C2", MeasureKind::C2},
        {"CN2Significance", MeasureKind::CN2Significance},
        {"BinaryEntropy", MeasureKind::BinaryEntropy},
        {"Accuracy", MeasureKind::Accuracy},
        {"FullCoverage", MeasureKind::FullCoverage},
        {"OddsRatio", MeasureKind::OddsRatio},
        {"Kappa", MeasureKind::Kappa},
        {"WeightedRelativeAccuracy", MeasureKind::WeightedRelativeAccuracy},
        {"LogRank", MeasureKind::LogRank},
    };
    if (auto it = builtins.find(name); it != builtins.end()) return QualityMeasure(it->second);
    {
      auto& reg = detail::CustomMeasureRegistry::instance();
      std::lock_guard lock(reg.mutex);
      if (auto it = reg.entries.find(name); it != reg.entries.end()) {
        QualityMeasure m;
        m.kind_ = MeasureKind::Custom;
        m.name_ = std::string(name);
        m.fn_ = it->second;
        return m;
      }
    }
    throw std::invalid_argument("unknown quality measure '" + std::string(name) + "'");
  }

  MeasureKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const MeasureExpr& expression() const { return expr_; }
  bool is_log_rank() const { return kind_ == MeasureKind::LogRank; }

  double evaluate(const ContingencyQuad& q) const {
    switch (kind_) {
      case MeasureKind::UserDefined: return expr_.evaluate(q.p, q.n, q.P, q.N);
      case MeasureKind::Custom: return fn_(q);
      case MeasureKind::LogRank:
        throw std::logic_error(
            "LogRank is defined on survival data, not on a contingency quad");
      default: return detail::evaluate_named(kind_, q);
    }
  }

  bool operator==(const QualityMeasure& o) const {
    return kind_ == o.kind_ && name_ == o.name_ && expr_ == o.expr_;
  }

private:
  static const char* builtin_name(MeasureKind kind) {
    switch (kind) {
      case MeasureKind::Precision: return "Precision";
      case MeasureKind::Coverage: return "Coverage";
      case MeasureKind::Laplace: return "Laplace";
      case MeasureKind::Lift: return "Lift";
      case MeasureKind::Correlation: return "Correlation";
      case MeasureKind::RSS: return "RSS";
      case MeasureKind::GeoRSS: return "GeoRSS";
      case MeasureKind::C2: return "C2";
      case MeasureKind::CN2Significance: return "CN2Significance";
      case MeasureKind::BinaryEntropy: return "BinaryEntropy";
      case MeasureKind::Accuracy: return "Accuracy";
      case MeasureKind::FullCoverage: return "FullCoverage";
      case MeasureKind::OddsRatio: return "OddsRatio";
      case MeasureKind::Kappa: return "Kappa";
      case MeasureKind::WeightedRelativeAccuracy: return "WeightedRelativeAccuracy";
      case MeasureKind::LogRank: return "LogRank";
      case MeasureKind::UserDefined: return "UserDefined";
      case MeasureKind::Custom: return "Custom";
    }
    return "?";
  }

  MeasureKind kind_ = MeasureKind::C2;
  std::string name_;
  MeasureExpr expr_;
  std::function<double(const ContingencyQuad&)> fn_;
};

inline double evaluate(const QualityMeasure& m, const ContingencyQuad& q) {
  return m.evaluate(q);
}

}  // namespace rulekit
