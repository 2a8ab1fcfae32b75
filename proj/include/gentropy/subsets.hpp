#pragma once

// Bitmask algebra for nonempty subsets of {1,...,n} and dense per-subset
// tables. Element i of the ground set corresponds to bit i-1; the empty set
// is mask 0 and is only meaningful where a convention assigns it a value
// (e.g. principal minor of the empty set is 1).

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace gentropy {

using SubsetMask = std::uint32_t;

inline constexpr int kMaxGroundSet = 16;

inline void require_ground_set(int n) {
  if (n < 1 || n > kMaxGroundSet)
    throw std::invalid_argument("ground-set size must be in [1," +
                                std::to_string(kMaxGroundSet) + "], got " +
                                std::to_string(n));
}

inline constexpr SubsetMask full_mask(int n) {
  return (SubsetMask{1} << n) - 1;
}

inline constexpr int cardinality(SubsetMask s) { return std::popcount(s); }

inline constexpr SubsetMask set_union(SubsetMask a, SubsetMask b) { return a | b; }
inline constexpr SubsetMask set_intersect(SubsetMask a, SubsetMask b) { return a & b; }

inline constexpr SubsetMask set_complement(SubsetMask s, int n) {
  return full_mask(n) & ~s;
}

inline constexpr bool contains(SubsetMask s, int element) {
  return (s >> (element - 1)) & 1u;
}

// Mask from 1-based elements, e.g. mask_of({1,3}) == 0b101.
inline SubsetMask mask_of(std::initializer_list<int> elements) {
  SubsetMask s = 0;
  for (int e : elements) s |= SubsetMask{1} << (e - 1);
  return s;
}

// 1-based elements of s in increasing order.
inline std::vector<int> elements_of(SubsetMask s) {
  std::vector<int> out;
  for (int i = 1; s != 0; ++i, s >>= 1)
    if (s & 1u) out.push_back(i);
  return out;
}

// All 2^n - 1 nonempty masks in increasing order.
inline std::vector<SubsetMask> enumerate_subsets(int n) {
  require_ground_set(n);
  std::vector<SubsetMask> out;
  out.reserve((std::size_t{1} << n) - 1);
  for (SubsetMask s = 1; s <= full_mask(n); ++s) out.push_back(s);
  return out;
}

// "[1,3]" form used in files; parse_subset also accepts digit strings such
// as "13" when n <= 9.
inline std::string subset_to_string(SubsetMask s) {
  std::string out = "[";
  bool first = true;
  for (int e : elements_of(s)) {
    if (!first) out += ',';
    out += std::to_string(e);
    first = false;
  }
  out += ']';
  return out;
}

inline SubsetMask parse_subset(const std::string& text, int n) {
  require_ground_set(n);
  SubsetMask s = 0;
  auto add = [&](int e) {
    if (e < 1 || e > n)
      throw std::invalid_argument("subset element " + std::to_string(e) +
                                  " out of range for n=" + std::to_string(n));
    s |= SubsetMask{1} << (e - 1);
  };
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw std::invalid_argument("unterminated subset: " + text);
    int cur = -1;
    for (std::size_t i = 1; i + 1 < text.size() || (i < text.size() && text[i] != ']'); ++i) {
      char c = text[i];
      if (c == ']') break;
      if (c >= '0' && c <= '9') {
        cur = (cur < 0 ? 0 : cur * 10) + (c - '0');
      } else if (c == ',' || c == ' ') {
        if (cur >= 0) add(cur);
        cur = -1;
      } else {
        throw std::invalid_argument("bad character in subset: " + text);
      }
    }
    if (cur >= 0) add(cur);
  } else {
    if (n > 9)
      throw std::invalid_argument("digit-string subsets require n <= 9: " + text);
    for (char c : text) {
      if (c < '1' || c > '9')
        throw std::invalid_argument("bad character in subset: " + text);
      add(c - '0');
    }
  }
  if (s == 0) throw std::invalid_argument("empty subset: " + text);
  return s;
}

// Dense table of one real per nonempty subset, indexed by mask.
struct SubsetVector {
  int n = 0;
  std::vector<double> entries;  // entries[s-1] holds the value for mask s

  SubsetVector() = default;
  explicit SubsetVector(int ground_set, double fill = 0.0)
      : n(ground_set), entries((std::size_t{1} << ground_set) - 1, fill) {
    require_ground_set(ground_set);
  }

  double& operator[](SubsetMask s) { return entries[s - 1]; }
  double operator[](SubsetMask s) const { return entries[s - 1]; }

  std::size_t size() const { return entries.size(); }

  bool same_shape(const SubsetVector& other) const {
    return n == other.n && entries.size() == other.entries.size();
  }
};

}  // namespace gentropy
