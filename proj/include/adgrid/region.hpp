#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "adgrid/model.hpp"

namespace adgrid {

// A measurable set, represented exactly as a set of finest-resolution cells.
// Measure is cell count times cell measure; set algebra is exact.
class Region {
 public:
  Region() = default;
  explicit Region(int64_t num_cells) : n_(num_cells), w_((num_cells + 63) / 64, 0) {}

  static Region full(int64_t num_cells);

  int64_t size() const { return n_; }
  bool empty() const;
  int64_t count() const;

  bool test(int64_t cell) const { return (w_[cell >> 6] >> (cell & 63)) & 1; }
  void set(int64_t cell) { w_[cell >> 6] |= uint64_t{1} << (cell & 63); }
  void reset(int64_t cell) { w_[cell >> 6] &= ~(uint64_t{1} << (cell & 63)); }

  Region& operator|=(const Region& o);
  Region& operator&=(const Region& o);
  Region& operator-=(const Region& o);
  friend Region operator|(Region a, const Region& b) { return a |= b; }
  friend Region operator&(Region a, const Region& b) { return a &= b; }
  friend Region operator-(Region a, const Region& b) { return a -= b; }
  Region complement() const;

  bool intersects(const Region& o) const;
  bool contains(const Region& o) const;  // o subset of *this
  bool operator==(const Region& o) const = default;

  // Sorted cell indices.
  std::vector<int64_t> cells() const;
  void for_each(const std::function<void(int64_t)>& fn) const;

 private:
  int64_t n_ = 0;
  std::vector<uint64_t> w_;
};

inline double measure(const SpaceModel& m, const Region& r) {
  return static_cast<double>(r.count()) * m.cell_measure();
}

// Nested family predicate: any two members intersect in nothing or one
// contains the other.
bool is_nested(const std::vector<Region>& family);

// Smallest strict superset of `member` within family[i] u {X}; returns -1 for X.
// Throws if `member` is not in the family.
int nested_predecessor(const std::vector<Region>& family, int member);

}  // namespace adgrid
