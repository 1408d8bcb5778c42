#include "adgrid/region.hpp"

#include <bit>
#include <stdexcept>

namespace adgrid {

Region Region::full(int64_t num_cells) {
  Region r(num_cells);
  for (auto& w : r.w_) w = ~uint64_t{0};
  int rem = static_cast<int>(num_cells & 63);
  if (rem != 0) r.w_.back() = (uint64_t{1} << rem) - 1;
  return r;
}

bool Region::empty() const {
  for (auto w : w_)
    if (w != 0) return false;
  return true;
}

int64_t Region::count() const {
  int64_t c = 0;
  for (auto w : w_) c += std::popcount(w);
  return c;
}

Region& Region::operator|=(const Region& o) {
  for (size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
  return *this;
}

Region& Region::operator&=(const Region& o) {
  for (size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
  return *this;
}

Region& Region::operator-=(const Region& o) {
  for (size_t i = 0; i < w_.size(); ++i) w_[i] &= ~o.w_[i];
  return *this;
}

Region Region::complement() const {
  Region r = full(n_);
  r -= *this;
  return r;
}

bool Region::intersects(const Region& o) const {
  for (size_t i = 0; i < w_.size(); ++i)
    if (w_[i] & o.w_[i]) return true;
  return false;
}

bool Region::contains(const Region& o) const {
  for (size_t i = 0; i < w_.size(); ++i)
    if (o.w_[i] & ~w_[i]) return false;
  return true;
}

std::vector<int64_t> Region::cells() const {
  std::vector<int64_t> out;
  out.reserve(static_cast<size_t>(count()));
  for_each([&](int64_t c) { out.push_back(c); });
  return out;
}

void Region::for_each(const std::function<void(int64_t)>& fn) const {
  for (size_t i = 0; i < w_.size(); ++i) {
    uint64_t w = w_[i];
    while (w) {
      int b = std::countr_zero(w);
      fn(static_cast<int64_t>(i * 64 + b));
      w &= w - 1;
    }
  }
}

bool is_nested(const std::vector<Region>& family) {
  for (size_t i = 0; i < family.size(); ++i)
    for (size_t j = i + 1; j < family.size(); ++j) {
      const Region& a = family[i];
      const Region& b = family[j];
      if (!a.intersects(b)) continue;
      if (!a.contains(b) && !b.contains(a)) return false;
    }
  return true;
}

int nested_predecessor(const std::vector<Region>& family, int member) {
  if (member < 0 || member >= static_cast<int>(family.size()))
    throw std::out_of_range("nested_predecessor: member not in collection");
  const Region& c = family[member];
  int best = -1;
  int64_t best_count = -1;
  for (size_t i = 0; i < family.size(); ++i) {
    if (static_cast<int>(i) == member) continue;
    const Region& d = family[i];
    if (d == c || !d.contains(c)) continue;
    int64_t n = d.count();
    if (best < 0 || n < best_count) {
      best = static_cast<int>(i);
      best_count = n;
    }
  }
  return best;
}

}  // namespace adgrid
