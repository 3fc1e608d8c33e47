#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace mll {

/// A set of variable indices (0-based), stored as a bitmask. Iteration and
/// serialization are always in ascending index order.
class VarSet {
 public:
  constexpr VarSet() = default;
  explicit constexpr VarSet(std::uint32_t bits) : bits_(bits) {}

  static constexpr VarSet single(int v) { return VarSet(std::uint32_t{1} << v); }

  static constexpr VarSet range(int n) {
    return n >= 32 ? VarSet(~std::uint32_t{0}) : VarSet((std::uint32_t{1} << n) - 1);
  }

  static VarSet of(std::initializer_list<int> ids) {
    VarSet s;
    for (int v : ids) s.bits_ |= std::uint32_t{1} << v;
    return s;
  }

  static VarSet of(const std::vector<int>& ids) {
    VarSet s;
    for (int v : ids) s.bits_ |= std::uint32_t{1} << v;
    return s;
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(int v) const { return (bits_ >> v) & 1u; }
  constexpr bool subset_of(VarSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr bool strict_subset_of(VarSet o) const { return subset_of(o) && bits_ != o.bits_; }
  constexpr bool intersects(VarSet o) const { return (bits_ & o.bits_) != 0; }

  constexpr VarSet operator|(VarSet o) const { return VarSet(bits_ | o.bits_); }
  constexpr VarSet operator&(VarSet o) const { return VarSet(bits_ & o.bits_); }
  constexpr VarSet operator-(VarSet o) const { return VarSet(bits_ & ~o.bits_); }
  constexpr bool operator==(const VarSet&) const = default;
  constexpr bool operator<(VarSet o) const { return bits_ < o.bits_; }

  /// Lowest variable index; undefined on the empty set.
  constexpr int min() const { return std::countr_zero(bits_); }

  std::vector<int> ids() const {
    std::vector<int> out;
    out.reserve(size());
    for (std::uint32_t b = bits_; b; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::uint32_t b = bits_; b; b &= b - 1) f(std::countr_zero(b));
  }

  std::string to_string(int base = 1) const {
    std::string s = "{";
    bool first = true;
    for_each([&](int v) {
      if (!first) s += ',';
      s += std::to_string(v + base);
      first = false;
    });
    s += '}';
    return s;
  }

 private:
  std::uint32_t bits_ = 0;
};

/// All subsets of `s`, ordered by cardinality then lexicographically on the
/// ascending index tuples. This is the canonical enumeration order used for
/// sums and reports.
std::vector<VarSet> subsets_sorted(VarSet s);

/// Subsets of `s` that contain `core`, same ordering.
std::vector<VarSet> supersets_within(VarSet core, VarSet s);

}  // namespace mll
