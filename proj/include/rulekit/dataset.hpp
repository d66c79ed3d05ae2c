#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rulekit/bitset.hpp"

namespace rulekit {

enum class AttributeKind { numeric, nominal };
enum class AttributeRole { regular, label, survival_time, survival_status };

enum class Task { classification, regression, survival };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::classification: return "classification";
    case Task::regression: return "regression";
    case Task::survival: return "survival";
  }
  return "?";
}

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  AttributeRole role = AttributeRole::regular;
  std::vector<std::string> levels;  // nominal only, declaration order

  int level_index(std::string_view level) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i] == level) return static_cast<int>(i);
    return -1;
  }

  bool operator==(const Attribute& o) const {
    return name == o.name && kind == o.kind && role == o.role && levels == o.levels;
  }
};

/// Typed tabular examples. Cells are stored as doubles: numeric attributes
/// hold the value, nominal ones hold the level index, and NaN marks a
/// missing cell. Immutable after construction; shareable across threads.
class DataSet {
public:
  static constexpr double missing_cell = std::numeric_limits<double>::quiet_NaN();

  DataSet() = default;

  DataSet(std::vector<Attribute> attributes, std::vector<double> cells)
      : attributes_(std::move(attributes)), cells_(std::move(cells)) {
    if (attributes_.empty())
      throw std::invalid_argument("data set needs at least one attribute");
    if (cells_.size() % attributes_.size() != 0)
      throw std::invalid_argument("cell count is not a multiple of the attribute count");
    rows_ = cells_.size() / attributes_.size();
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < attributes_.size(); ++c) {
        double v = cell(r, c);
        if (std::isnan(v)) continue;
        if (attributes_[c].kind == AttributeKind::nominal) {
          auto idx = static_cast<long long>(v);
          if (idx < 0 || idx >= static_cast<long long>(attributes_[c].levels.size()))
            throw std::invalid_argument("nominal value index out of range for attribute " +
                                        attributes_[c].name);
        }
      }
  }

  std::size_t row_count() const { return rows_; }
  std::size_t attribute_count() const { return attributes_.size(); }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  const Attribute& attribute(std::size_t i) const { return attributes_[i]; }

  double cell(std::size_t row, std::size_t col) const {
    return cells_[row * attributes_.size() + col];
  }
  bool is_missing(std::size_t row, std::size_t col) const {
    return std::isnan(cell(row, col));
  }

  int find_attribute(std::string_view name) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i)
      if (attributes_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  bool has_task() const { return task_.has_value(); }
  Task task() const {
    if (!task_) throw std::logic_error("roles have not been assigned");
    return *task_;
  }

  int label_index() const { return role_index(AttributeRole::label); }
  int survival_time_index() const { return role_index(AttributeRole::survival_time); }
  int survival_status_index() const { return role_index(AttributeRole::survival_status); }

  /// Level name of a nominal cell; empty for missing.
  std::string level_at(std::size_t row, std::size_t col) const {
    if (is_missing(row, col)) return {};
    return attributes_[col].levels[static_cast<std::size_t>(cell(row, col))];
  }

  /// Rows selected by indices, preserving attributes, roles and task.
  DataSet subset(const std::vector<std::size_t>& indices) const {
    std::vector<double> cells;
    cells.reserve(indices.size() * attributes_.size());
    for (std::size_t r : indices) {
      if (r >= rows_) throw std::out_of_range("subset row index out of range");
      for (std::size_t c = 0; c < attributes_.size(); ++c) cells.push_back(cell(r, c));
    }
    DataSet out(attributes_, std::move(cells));
    out.task_ = task_;
    return out;
  }

  bool operator==(const DataSet& o) const {
    if (attributes_ != o.attributes_ || rows_ != o.rows_) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      bool ma = std::isnan(cells_[i]), mb = std::isnan(o.cells_[i]);
      if (ma != mb) return false;
      if (!ma && cells_[i] != o.cells_[i]) return false;
    }
    return true;
  }

  friend DataSet set_roles(const DataSet& ds, const std::optional<std::string>& label,
                           const std::optional<std::string>& survival_time,
                           const std::optional<std::string>& survival_status);

private:
  int role_index(AttributeRole role) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i)
      if (attributes_[i].role == role) return static_cast<int>(i);
    return -1;
  }

  std::vector<Attribute> attributes_;
  std::vector<double> cells_;
  std::size_t rows_ = 0;
  std::optional<Task> task_;
};

/// Assigns either a label role or the survival time/status pair and derives
/// the task: nominal label -> classification, numeric label -> regression,
/// survival pair -> survival.
inline DataSet set_roles(const DataSet& ds, const std::optional<std::string>& label,
                         const std::optional<std::string>& survival_time = std::nullopt,
                         const std::optional<std::string>& survival_status = std::nullopt) {
  bool has_label = label.has_value();
  bool has_survival = survival_time.has_value() || survival_status.has_value();
  if (has_label == has_survival)
    throw std::invalid_argument(
        "exactly one of a label or a survival time/status pair must be given");
  if (has_survival && (!survival_time || !survival_status))
    throw std::invalid_argument("survival roles need both a time and a status attribute");

  DataSet out = ds;
  for (auto& a : out.attributes_) a.role = AttributeRole::regular;

  auto resolve = [&](const std::string& name) {
    int idx = out.find_attribute(name);
    if (idx < 0) throw std::invalid_argument("unknown attribute: " + name);
    return static_cast<std::size_t>(idx);
  };

  if (has_label) {
    std::size_t li = resolve(*label);
    out.attributes_[li].role = AttributeRole::label;
    out.task_ = out.attributes_[li].kind == AttributeKind::nominal ? Task::classification
                                                                   : Task::regression;
  } else {
    std::size_t ti = resolve(*survival_time);
    std::size_t si = resolve(*survival_status);
    if (ti == si) throw std::invalid_argument("survival time and status must differ");
    if (out.attributes_[ti].kind != AttributeKind::numeric)
      throw std::invalid_argument("survival time attribute must be numeric: " + *survival_time);
    if (out.attributes_[si].kind != AttributeKind::numeric)
      throw std::invalid_argument("survival status attribute must be numeric: " +
                                  *survival_status);
    for (std::size_t r = 0; r < out.rows_; ++r) {
      if (out.is_missing(r, ti) || out.cell(r, ti) < 0)
        throw std::invalid_argument("survival time must be present and non-negative (row " +
                                    std::to_string(r + 1) + ")");
      double s = out.cell(r, si);
      if (std::isnan(s) || (s != 0.0 && s != 1.0))
        throw std::invalid_argument("survival status outside {0,1} (row " +
                                    std::to_string(r + 1) + ")");
    }
    out.attributes_[ti].role = AttributeRole::survival_time;
    out.attributes_[si].role = AttributeRole::survival_status;
    out.task_ = Task::survival;
  }
  return out;
}

namespace detail {

// Seeded Fisher-Yates; avoids std::shuffle whose draw sequence is
// implementation defined.
inline void deterministic_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace detail

/// Splits row indices into k disjoint folds. Classification folds are
/// stratified (per-class counts across folds differ by at most one); other
/// tasks get a plain shuffled partition. Deterministic for a given seed.
inline std::vector<std::vector<std::size_t>> stratified_folds(const DataSet& ds, std::size_t k,
                                                              std::uint64_t seed) {
  const std::size_t n = ds.row_count();
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  if (k > n) throw std::invalid_argument("fold count exceeds the number of examples");

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);

  if (ds.has_task() && ds.task() == Task::classification) {
    const auto li = static_cast<std::size_t>(ds.label_index());
    const auto& levels = ds.attribute(li).levels;
    std::size_t next_fold = 0;
    for (std::size_t lv = 0; lv < levels.size(); ++lv) {
      std::vector<std::size_t> members;
      for (std::size_t r = 0; r < n; ++r)
        if (!ds.is_missing(r, li) && static_cast<std::size_t>(ds.cell(r, li)) == lv)
          members.push_back(r);
      detail::deterministic_shuffle(members, rng);
      for (std::size_t j = 0; j < members.size(); ++j)
        folds[(next_fold + j) % k].push_back(members[j]);
      next_fold = (next_fold + members.size()) % k;
    }
    // Rows with a missing label still belong to exactly one fold.
    std::vector<std::size_t> rest;
    for (std::size_t r = 0; r < n; ++r)
      if (ds.is_missing(r, li)) rest.push_back(r);
    detail::deterministic_shuffle(rest, rng);
    for (std::size_t j = 0; j < rest.size(); ++j)
      folds[(next_fold + j) % k].push_back(rest[j]);
  } else {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    detail::deterministic_shuffle(order, rng);
    for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(order[i]);
  }
  return folds;
}

}  // namespace rulekit
