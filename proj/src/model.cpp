#include "adgrid/model.hpp"

#include <cmath>
#include <random>

#include "adgrid/region.hpp"

namespace adgrid {

int64_t SpaceModel::cell_count() const {
  int64_t n = 1;
  for (int i = 0; i < k; ++i) n *= cells_per_axis();
  return n;
}

double SpaceModel::cell_measure() const {
  double s = cell_side();
  double m = 1.0;
  for (int i = 0; i < k; ++i) m *= s;
  return m;
}

double SpaceModel::diameter() const {
  return kind == Kind::TorusSup ? 0.5 : 0.25;
}

SpaceModel make_model(Kind kind, int k, int J) {
  if (k < 1 || k > kMaxDim) throw ModelError("dimension k must be in [1," + std::to_string(kMaxDim) + "]");
  if (kind == Kind::TorusSquared && k != 1)
    throw ModelError("TorusSquared is defined for k = 1 only");
  if (J < 1) throw ModelError("depth J must be >= 1");
  // Reject depths whose cell indices would not fit the region machinery.
  if (J * k > 24) throw ModelError("depth J too large for the cell-index width");

  SpaceModel m;
  m.kind = kind;
  m.k = k;
  m.J = J;
  if (kind == Kind::TorusSup) {
    m.K_X = 1.0;
    m.q = 0.5;
    m.C_d = std::ldexp(1.0, k);  // 2^k
  } else {
    m.K_X = 2.0;
    m.q = 0.25;
    m.C_d = 2.0;
  }
  return m;
}

namespace {

double torus_dist_1d(double a, double b) {
  double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

}  // namespace

double quasidistance(const SpaceModel& m, std::span<const double> x,
                     std::span<const double> y) {
  if (x.size() != static_cast<size_t>(m.k) || y.size() != static_cast<size_t>(m.k))
    throw ModelError("point dimension mismatch");
  for (int i = 0; i < m.k; ++i)
    if (x[i] < 0.0 || x[i] >= 1.0 || y[i] < 0.0 || y[i] >= 1.0)
      throw ModelError("coordinates must lie in [0,1)");
  double d = 0.0;
  for (int i = 0; i < m.k; ++i) d = std::max(d, torus_dist_1d(x[i], y[i]));
  if (m.kind == Kind::TorusSquared) d *= d;
  return d;
}

std::array<int64_t, kMaxDim> cell_coords(const SpaceModel& m, int64_t cell) {
  std::array<int64_t, kMaxDim> c{};
  int64_t w = m.cells_per_axis();
  for (int i = 0; i < m.k; ++i) {
    c[i] = cell % w;
    cell /= w;
  }
  return c;
}

int64_t cell_index(const SpaceModel& m, std::span<const int64_t> coords) {
  int64_t w = m.cells_per_axis();
  int64_t idx = 0;
  for (int i = m.k - 1; i >= 0; --i) idx = idx * w + coords[i];
  return idx;
}

std::array<double, kMaxDim> cell_center(const SpaceModel& m, int64_t cell) {
  auto c = cell_coords(m, cell);
  std::array<double, kMaxDim> p{};
  double s = m.cell_side();
  for (int i = 0; i < m.k; ++i) p[i] = (static_cast<double>(c[i]) + 0.5) * s;
  return p;
}

int64_t torus_gap(const SpaceModel& m, int64_t a, int64_t b) {
  int64_t w = m.cells_per_axis();
  int64_t d = a > b ? a - b : b - a;
  return std::min(d, w - d);
}

double cell_distance(const SpaceModel& m, int64_t ci, int64_t cj) {
  auto a = cell_coords(m, ci), b = cell_coords(m, cj);
  int64_t g = 0;
  for (int i = 0; i < m.k; ++i) g = std::max(g, torus_gap(m, a[i], b[i]));
  double d = static_cast<double>(g) * m.cell_side();
  if (m.kind == Kind::TorusSquared) d *= d;
  return d;
}

double cell_point_distance(const SpaceModel& m, int64_t cell,
                           std::span<const double> y) {
  auto p = cell_center(m, cell);
  double d = 0.0;
  for (int i = 0; i < m.k; ++i) d = std::max(d, torus_dist_1d(p[i], y[i]));
  if (m.kind == Kind::TorusSquared) d *= d;
  return d;
}

ModelReport verify_quasimetric(const SpaceModel& m, uint64_t samples, uint64_t seed) {
  ModelReport rep;
  const int64_t n = m.cell_count();
  auto check_triple = [&](int64_t x, int64_t y, int64_t z) {
    double dxy = cell_distance(m, x, y);
    double dyx = cell_distance(m, y, x);
    if (dxy != dyx) {
      rep.ok = false;
      rep.violations.push_back("symmetry failed at cells " + std::to_string(x) + "," + std::to_string(y));
    }
    if ((dxy == 0.0) != (x == y)) {
      rep.ok = false;
      rep.violations.push_back("separation failed at cells " + std::to_string(x) + "," + std::to_string(y));
    }
    double lhs = dxy;
    double rhs = m.K_X * (cell_distance(m, x, z) + cell_distance(m, z, y));
    if (lhs > rhs) {
      rep.ok = false;
      rep.violations.push_back("quasitriangle failed at cells " + std::to_string(x) + "," +
                               std::to_string(y) + "," + std::to_string(z));
    }
  };
  // Exhaustive when all triples fit a modest budget, sampled otherwise.
  if (n <= 256) {
    for (int64_t x = 0; x < n; ++x)
      for (int64_t y = 0; y < n; ++y)
        for (int64_t z = 0; z < n; ++z) {
          check_triple(x, y, z);
          if (rep.violations.size() > 16) return rep;
        }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int64_t> pick(0, n - 1);
    for (uint64_t s = 0; s < samples; ++s) {
      check_triple(pick(rng), pick(rng), pick(rng));
      if (rep.violations.size() > 16) return rep;
    }
  }
  return rep;
}

namespace {

// Closed-ball cell count |{y : d(x,y) <= r}| for a center cell, by per-axis
// reach; exact for both metrics.
int64_t closed_ball_count(const SpaceModel& m, double r) {
  const int64_t w = m.cells_per_axis();
  // Largest integer gap g with d(g cells) <= r.
  double unit = m.cell_side();
  int64_t g;
  if (m.kind == Kind::TorusSup) {
    g = static_cast<int64_t>(std::floor(r / unit + 1e-12));
  } else {
    g = static_cast<int64_t>(std::floor(std::sqrt(r) / unit + 1e-12));
    while ((static_cast<double>(g) * unit) * (static_cast<double>(g) * unit) > r) --g;
    double next = (static_cast<double>(g + 1) * unit) * (static_cast<double>(g + 1) * unit);
    while (next <= r) {
      ++g;
      next = (static_cast<double>(g + 1) * unit) * (static_cast<double>(g + 1) * unit);
    }
  }
  int64_t per_axis = std::min(w, 2 * g + 1);
  int64_t total = 1;
  for (int i = 0; i < m.k; ++i) total *= per_axis;
  return total;
}

}  // namespace

ModelReport verify_doubling(const SpaceModel& m) {
  ModelReport rep;
  // Radii 2^-j, j = J..1.  Counts are translation invariant on the torus, so
  // one center represents all of them.
  for (int j = m.J; j >= 1; --j) {
    double r = std::ldexp(1.0, -j);
    int64_t small = closed_ball_count(m, r);
    int64_t big = closed_ball_count(m, 2.0 * r);
    if (small <= 0 || static_cast<double>(big) > m.C_d * static_cast<double>(small)) {
      rep.ok = false;
      rep.violations.push_back("doubling failed at radius q^" + std::to_string(j) + ": " +
                               std::to_string(big) + " > C_d * " + std::to_string(small));
    }
  }
  return rep;
}

}  // namespace adgrid
