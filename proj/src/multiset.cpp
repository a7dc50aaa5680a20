#include "polyrefute/multiset.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace polyrefute {

MultisetIndex::MultisetIndex(std::vector<std::uint32_t> exponents)
    : exps_(std::move(exponents)),
      degree_(std::accumulate(exps_.begin(), exps_.end(), std::uint32_t{0})) {}

MultisetIndex::MultisetIndex(std::initializer_list<std::uint32_t> exponents)
    : MultisetIndex(std::vector<std::uint32_t>(exponents)) {}

MultisetIndex MultisetIndex::from_variables(std::size_t num_vars,
                                            std::span<const std::size_t> vars) {
  MultisetIndex out(num_vars);
  for (std::size_t v : vars) out.increment(v);
  return out;
}

bool MultisetIndex::contains(const MultisetIndex& other) const {
  if (other.exps_.size() != exps_.size()) return false;
  for (std::size_t i = 0; i < exps_.size(); ++i)
    if (other.exps_[i] > exps_[i]) return false;
  return true;
}

MultisetIndex MultisetIndex::operator+(const MultisetIndex& other) const {
  if (other.exps_.size() != exps_.size())
    throw std::invalid_argument("MultisetIndex: variable count mismatch");
  MultisetIndex out(*this);
  for (std::size_t i = 0; i < exps_.size(); ++i) out.exps_[i] += other.exps_[i];
  out.degree_ += other.degree_;
  return out;
}

MultisetIndex MultisetIndex::operator-(const MultisetIndex& other) const {
  if (!contains(other)) throw std::invalid_argument("MultisetIndex: not a sub-multiset");
  MultisetIndex out(*this);
  for (std::size_t i = 0; i < exps_.size(); ++i) out.exps_[i] -= other.exps_[i];
  out.degree_ -= other.degree_;
  return out;
}

void MultisetIndex::increment(std::size_t var) {
  if (var >= exps_.size()) throw std::out_of_range("MultisetIndex: variable out of range");
  ++exps_[var];
  ++degree_;
}

double MultisetIndex::factorial() const {
  double f = 1.0;
  for (std::uint32_t e : exps_)
    for (std::uint32_t k = 2; k <= e; ++k) f *= k;
  return f;
}

std::string MultisetIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < exps_.size(); ++i) os << (i ? "," : "") << exps_[i];
  os << ')';
  return os.str();
}

bool GrlexLess::operator()(const MultisetIndex& a, const MultisetIndex& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  return b.exponents() < a.exponents();
}

std::size_t MultisetHash::operator()(const MultisetIndex& a) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (std::uint32_t e : a.exponents()) {
    h ^= e + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

namespace {

void enumerate_rec(std::size_t var, std::uint32_t remaining, std::vector<std::uint32_t>& cur,
                   std::vector<MultisetIndex>& out) {
  if (var + 1 == cur.size()) {
    cur[var] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (std::uint32_t e = remaining + 1; e-- > 0;) {
    cur[var] = e;
    enumerate_rec(var + 1, remaining - e, cur, out);
  }
}

}  // namespace

std::vector<MultisetIndex> enumerate_multisets(std::size_t n, std::size_t d) {
  if (n == 0) throw std::invalid_argument("enumerate_multisets: n must be >= 1");
  std::vector<MultisetIndex> out;
  out.reserve(multiset_count(n, d));
  std::vector<std::uint32_t> cur(n, 0);
  enumerate_rec(0, static_cast<std::uint32_t>(d), cur, out);
  return out;
}

MultisetIndexer::MultisetIndexer(std::vector<MultisetIndex> items) : items_(std::move(items)) {
  pos_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) pos_.emplace(items_[i], i);
}

std::size_t MultisetIndexer::find(const MultisetIndex& key) const {
  auto it = pos_.find(key);
  return it == pos_.end() ? items_.size() : it->second;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) is divisible by i at every step.
    r = r / std::gcd(r, i) * ((n - k + i) / (i / std::gcd(r, i)));
  }
  return r;
}

}  // namespace polyrefute
