#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rulekit {

/// Fixed-length bit vector with a cached population count.
/// One bit per training example; the length always equals the
/// owning data set's row count. Instances are immutable once built
/// (the binary operators allocate fresh masks), so they can be
/// shared freely across threads.
class CoverageMask {
public:
  CoverageMask() = default;

  explicit CoverageMask(std::size_t size, bool fill = false)
      : size_(size), words_((size + 63) / 64, fill ? ~std::uint64_t{0} : 0) {
    if (fill) {
      trim();
      count_ = size;
    }
  }

  static CoverageMask all(std::size_t size) { return CoverageMask(size, true); }
  static CoverageMask none(std::size_t size) { return CoverageMask(size, false); }

  std::size_t size() const { return size_; }
  std::size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }

  bool test(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::size_t i, bool value = true) {
    std::uint64_t bit = std::uint64_t{1} << (i & 63);
    std::uint64_t& w = words_[i >> 6];
    bool was = w & bit;
    if (value && !was) {
      w |= bit;
      ++count_;
    } else if (!value && was) {
      w &= ~bit;
      --count_;
    }
  }

  CoverageMask operator&(const CoverageMask& o) const {
    check_same_size(o);
    CoverageMask r;
    r.size_ = size_;
    r.words_.resize(words_.size());
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      r.words_[i] = words_[i] & o.words_[i];
      c += std::popcount(r.words_[i]);
    }
    r.count_ = c;
    return r;
  }

  CoverageMask operator|(const CoverageMask& o) const {
    check_same_size(o);
    CoverageMask r;
    r.size_ = size_;
    r.words_.resize(words_.size());
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      r.words_[i] = words_[i] | o.words_[i];
      c += std::popcount(r.words_[i]);
    }
    r.count_ = c;
    return r;
  }

  /// Complement within the mask length.
  CoverageMask operator~() const {
    CoverageMask r;
    r.size_ = size_;
    r.words_.resize(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = ~words_[i];
    r.trim();
    r.count_ = size_ - count_;
    return r;
  }

  /// Popcount of (*this & other) without allocating the intermediate mask.
  std::size_t intersection_count(const CoverageMask& o) const {
    check_same_size(o);
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
      c += std::popcount(words_[i] & o.words_[i]);
    return c;
  }

  bool operator==(const CoverageMask& o) const {
    return size_ == o.size_ && words_ == o.words_;
  }

private:
  void check_same_size(const CoverageMask& o) const {
    if (size_ != o.size_)
      throw std::invalid_argument("coverage mask length mismatch: " +
                                  std::to_string(size_) + " vs " +
                                  std::to_string(o.size_));
  }

  // Clear bits past size_ in the last word.
  void trim() {
    if (size_ % 64 != 0 && !words_.empty())
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::size_t size_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace rulekit
