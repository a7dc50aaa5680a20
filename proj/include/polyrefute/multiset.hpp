#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace polyrefute {

// Exponent vector over n variables, read as a multiset of variable indices.
class MultisetIndex {
 public:
  MultisetIndex() = default;
  explicit MultisetIndex(std::size_t num_vars) : exps_(num_vars, 0) {}
  explicit MultisetIndex(std::vector<std::uint32_t> exponents);
  MultisetIndex(std::initializer_list<std::uint32_t> exponents);

  // Multiset {v_1, ..., v_k} of 0-based variable indices.
  static MultisetIndex from_variables(std::size_t num_vars, std::span<const std::size_t> vars);

  std::size_t num_vars() const { return exps_.size(); }
  std::uint32_t degree() const { return degree_; }
  std::uint32_t operator[](std::size_t i) const { return exps_[i]; }
  const std::vector<std::uint32_t>& exponents() const { return exps_; }

  bool contains(const MultisetIndex& other) const;
  MultisetIndex operator+(const MultisetIndex& other) const;
  // Requires contains(other).
  MultisetIndex operator-(const MultisetIndex& other) const;

  void increment(std::size_t var);

  // Product of factorials of the exponents.
  double factorial() const;

  bool operator==(const MultisetIndex& other) const { return exps_ == other.exps_; }

  std::string to_string() const;

 private:
  std::vector<std::uint32_t> exps_;
  std::uint32_t degree_ = 0;
};

// Graded lexicographic order: lower degree first; within a degree the
// lexicographically larger exponent vector comes first, so x1^2 < x1x2 < x2^2.
struct GrlexLess {
  bool operator()(const MultisetIndex& a, const MultisetIndex& b) const;
};

struct MultisetHash {
  std::size_t operator()(const MultisetIndex& a) const noexcept;
};

// All multisets of size d over n variables in GrlexLess order.
// Length is C(n+d-1, d).
std::vector<MultisetIndex> enumerate_multisets(std::size_t n, std::size_t d);

// Position lookup for a list of multisets.
class MultisetIndexer {
 public:
  MultisetIndexer() = default;
  explicit MultisetIndexer(std::vector<MultisetIndex> items);

  std::size_t size() const { return items_.size(); }
  const MultisetIndex& at(std::size_t pos) const { return items_[pos]; }
  const std::vector<MultisetIndex>& items() const { return items_; }
  // Returns size() when absent.
  std::size_t find(const MultisetIndex& key) const;

 private:
  std::vector<MultisetIndex> items_;
  std::unordered_map<MultisetIndex, std::size_t, MultisetHash> pos_;
};

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// Number of multisets of size d over n variables, C(n+d-1, d).
inline std::uint64_t multiset_count(std::uint64_t n, std::uint64_t d) {
  return n == 0 ? (d == 0 ? 1 : 0) : binomial(n + d - 1, d);
}

}  // namespace polyrefute
