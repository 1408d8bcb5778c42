#include "adgrid/cubes.hpp"

#include <cmath>
#include <functional>

namespace adgrid {

bool Cube::operator<(const Cube& o) const {
  if (level != o.level) return level < o.level;
  for (int i = 0; i < kMaxDim; ++i)
    if (coords[i] != o.coords[i]) return coords[i] < o.coords[i];
  return false;
}

int64_t cubes_at_level(const SpaceModel& m, int level) {
  int64_t n = 1;
  for (int i = 0; i < m.k; ++i) n *= int64_t{1} << level;
  return n;
}

Cube cube_from_flat(const SpaceModel& m, int level, int64_t flat) {
  Cube c;
  c.level = level;
  int64_t w = int64_t{1} << level;
  for (int i = 0; i < m.k; ++i) {
    c.coords[i] = flat % w;
    flat /= w;
  }
  return c;
}

int64_t cube_flat(const SpaceModel& m, const Cube& c) {
  int64_t w = int64_t{1} << c.level;
  int64_t flat = 0;
  for (int i = m.k - 1; i >= 0; --i) flat = flat * w + c.coords[i];
  return flat;
}

uint64_t cube_key(const SpaceModel& m, const Cube& c) {
  return (static_cast<uint64_t>(c.level) << 40) | static_cast<uint64_t>(cube_flat(m, c));
}

double cube_side(const Cube& c) { return std::ldexp(1.0, -c.level); }

double cube_measure(const SpaceModel& m, const Cube& c) {
  return std::ldexp(1.0, -c.level * m.k);
}

int64_t cube_cells(const SpaceModel& m, const Cube& c) {
  int64_t w = int64_t{1} << (m.J - c.level);
  int64_t n = 1;
  for (int i = 0; i < m.k; ++i) n *= w;
  return n;
}

std::array<double, kMaxDim> cube_center(const SpaceModel& m, const Cube& c) {
  std::array<double, kMaxDim> p{};
  double s = cube_side(c);
  for (int i = 0; i < m.k; ++i) p[i] = (static_cast<double>(c.coords[i]) + 0.5) * s;
  return p;
}

Cube cube_ancestor(const Cube& c, int level) {
  Cube a;
  a.level = level;
  for (int i = 0; i < kMaxDim; ++i) a.coords[i] = c.coords[i] >> (c.level - level);
  return a;
}

std::vector<Cube> cube_children(const SpaceModel& m, const Cube& c) {
  std::vector<Cube> out;
  int n = 1 << m.k;
  out.reserve(n);
  for (int b = 0; b < n; ++b) {
    Cube ch;
    ch.level = c.level + 1;
    for (int i = 0; i < m.k; ++i) ch.coords[i] = 2 * c.coords[i] + ((b >> i) & 1);
    out.push_back(ch);
  }
  return out;
}

bool cube_contains(const Cube& outer, const Cube& inner) {
  if (outer.level > inner.level) return false;
  return cube_ancestor(inner, outer.level).coords == outer.coords;
}

bool cube_contains_cell(const SpaceModel& m, const Cube& c, int64_t cell) {
  auto cc = cell_coords(m, cell);
  int shift = m.J - c.level;
  for (int i = 0; i < m.k; ++i)
    if ((cc[i] >> shift) != c.coords[i]) return false;
  return true;
}

void cube_add_to_region(const SpaceModel& m, const Cube& c, Region& r) {
  int64_t w = int64_t{1} << (m.J - c.level);
  std::array<int64_t, kMaxDim> lo{};
  for (int i = 0; i < m.k; ++i) lo[i] = c.coords[i] * w;
  std::array<int64_t, kMaxDim> cur{};
  std::function<void(int)> rec = [&](int axis) {
    if (axis == m.k) {
      r.set(cell_index(m, std::span<const int64_t>(cur.data(), m.k)));
      return;
    }
    for (int64_t t = 0; t < w; ++t) {
      cur[axis] = lo[axis] + t;
      rec(axis + 1);
    }
  };
  rec(0);
}

Region cube_region(const SpaceModel& m, const Cube& c) {
  Region r(m.cell_count());
  cube_add_to_region(m, c, r);
  return r;
}

namespace {

// Cyclic gap (in cells) from column x to the cell interval [lo, lo+len).
int64_t axis_gap(int64_t x, int64_t lo, int64_t len, int64_t w) {
  int64_t off = x - lo;
  off %= w;
  if (off < 0) off += w;
  if (off < len) return 0;
  int64_t right = off - (len - 1);  // steps back to the last interval column
  int64_t left = w - off;           // steps forward to the first column
  return std::min(right, left);
}

// Sup-metric gap in cells from a cell to a cube, 0 if inside.
int64_t cube_cell_gap(const SpaceModel& m, const Cube& c, int64_t cell) {
  auto cc = cell_coords(m, cell);
  int64_t w = m.cells_per_axis();
  int64_t len = int64_t{1} << (m.J - c.level);
  int64_t g = 0;
  for (int i = 0; i < m.k; ++i)
    g = std::max(g, axis_gap(cc[i], c.coords[i] * len, len, w));
  return g;
}

double gap_to_distance(const SpaceModel& m, int64_t gap) {
  double d = static_cast<double>(gap) * m.cell_side();
  if (m.kind == Kind::TorusSquared) d *= d;
  return d;
}

}  // namespace

double cube_cell_distance(const SpaceModel& m, const Cube& c, int64_t cell) {
  return gap_to_distance(m, cube_cell_gap(m, c, cell));
}

DyadicSystem build_system(const SpaceModel& model) {
  DyadicSystem sys;
  sys.model = model;
  if (model.kind == Kind::TorusSup) {
    sys.C_1 = 0.5;
    sys.C_2 = 1.0;
    sys.C_3 = 2.0 * model.k;
    sys.eta = 1.0;
  } else {
    sys.C_1 = 0.25;
    sys.C_2 = 0.5;
    sys.C_3 = 2.0;
    sys.eta = 0.5;
  }
  sys.N = 1 << model.k;
  CubeReport rep = verify_system(sys);
  if (!rep.ok)
    throw ModelError("cube system certification failed: " +
                     (rep.violations.empty() ? std::string("?") : rep.violations.front()));
  return sys;
}

namespace {

// Enumerate per-axis index windows (wrapping) around a center point and call
// fn for each cell in the box.
void for_cells_in_window(const SpaceModel& m,
                         const std::array<int64_t, kMaxDim>& lo,
                         const std::array<int64_t, kMaxDim>& len,
                         const std::function<void(int64_t)>& fn) {
  int64_t w = m.cells_per_axis();
  std::array<int64_t, kMaxDim> cur{};
  std::function<void(int)> rec = [&](int axis) {
    if (axis == m.k) {
      fn(cell_index(m, std::span<const int64_t>(cur.data(), m.k)));
      return;
    }
    for (int64_t t = 0; t < len[axis]; ++t) {
      cur[axis] = (lo[axis] + t) % w;
      rec(axis + 1);
    }
  };
  rec(0);
}

}  // namespace

CubeReport verify_system(const DyadicSystem& sys) {
  const SpaceModel& m = sys.model;
  CubeReport rep;
  rep.C_1 = sys.C_1;
  rep.C_2 = sys.C_2;
  rep.C_3 = sys.C_3;
  rep.eta = sys.eta;
  rep.N = sys.N;
  auto fail = [&](std::string msg) {
    rep.ok = false;
    if (rep.violations.size() < 32) rep.violations.push_back(std::move(msg));
  };
  const int64_t w = m.cells_per_axis();
  const int64_t ncells = m.cell_count();

  // (1) each level partitions X exactly (every cell covered once).
  for (int n = 0; n <= m.J; ++n) {
    Region covered(ncells);
    int64_t total = 0;
    for (int64_t f = 0; f < cubes_at_level(m, n); ++f) {
      Cube c = cube_from_flat(m, n, f);
      Region rc = cube_region(m, c);
      if (covered.intersects(rc)) fail("level " + std::to_string(n) + " cubes overlap");
      covered |= rc;
      total += rc.count();
    }
    if (total != ncells || covered.count() != ncells)
      fail("level " + std::to_string(n) + " does not tile X");
  }

  // (2),(3) nesting and unique ancestors.  Pairwise when the budget allows,
  // ancestor arithmetic otherwise (same predicate, no pair enumeration).
  int64_t total_cubes = 0;
  for (int n = 0; n <= m.J; ++n) total_cubes += cubes_at_level(m, n);
  bool pairwise = total_cubes * total_cubes <= 80'000'000;
  if (pairwise) {
    std::vector<Cube> all;
    all.reserve(static_cast<size_t>(total_cubes));
    for (int n = 0; n <= m.J; ++n)
      for (int64_t f = 0; f < cubes_at_level(m, n); ++f)
        all.push_back(cube_from_flat(m, n, f));
    // Cube boxes never wrap, so plain interval arithmetic is exact.
    auto boxes_overlap = [&](const Cube& a, const Cube& b) {
      int64_t la = int64_t{1} << (m.J - a.level), lb = int64_t{1} << (m.J - b.level);
      for (int i = 0; i < m.k; ++i) {
        int64_t alo = a.coords[i] * la, blo = b.coords[i] * lb;
        if (alo + la <= blo || blo + lb <= alo) return false;
      }
      return true;
    };
    for (const Cube& a : all) {
      std::vector<int> anc(static_cast<size_t>(m.J) + 1, 0);
      for (const Cube& b : all) {
        if (b.level > a.level) continue;
        bool cont = cube_contains(b, a);
        if (cont) anc[b.level]++;
        if (!cont && boxes_overlap(a, b)) fail("cubes overlap without nesting");
      }
      for (int lv = 0; lv <= a.level; ++lv)
        if (anc[lv] != 1) fail("ancestor count != 1 at level " + std::to_string(lv));
    }
  } else {
    for (int n = 0; n <= m.J; ++n)
      for (int64_t f = 0; f < cubes_at_level(m, n); ++f) {
        Cube c = cube_from_flat(m, n, f);
        for (int lv = 0; lv <= n; ++lv) {
          Cube a = cube_ancestor(c, lv);
          if (!cube_contains(a, c)) fail("ancestor does not contain cube");
        }
      }
  }

  // (4) ball sandwich with the declared C_1, C_2, exhaustively per cube.
  for (int n = 0; n <= m.J; ++n) {
    double rin = sys.C_1 * std::pow(m.q, n);
    double rout = sys.C_2 * std::pow(m.q, n);
    for (int64_t f = 0; f < cubes_at_level(m, n); ++f) {
      Cube c = cube_from_flat(m, n, f);
      auto ctr = cube_center(m, c);
      std::span<const double> ctr_span(ctr.data(), static_cast<size_t>(m.k));
      // outer: every cell of A lies strictly within C_2 q^n of the center.
      bool outer_ok = true;
      int64_t len = int64_t{1} << (m.J - n);
      std::array<int64_t, kMaxDim> lo{}, ln{};
      for (int i = 0; i < m.k; ++i) {
        lo[i] = c.coords[i] * len;
        ln[i] = len;
      }
      for_cells_in_window(m, lo, ln, [&](int64_t cell) {
        if (cell_point_distance(m, cell, ctr_span) >= rout) outer_ok = false;
      });
      if (!outer_ok) fail("outer ball fails at level " + std::to_string(n));
      // inner: every cell strictly within C_1 q^n of the center lies in A.
      // Enumerate a window certainly covering the ball.
      double reach = m.kind == Kind::TorusSup ? rin : std::sqrt(rin);
      int64_t rc = static_cast<int64_t>(std::ceil(reach * static_cast<double>(w))) + 1;
      std::array<int64_t, kMaxDim> blo{}, bln{};
      for (int i = 0; i < m.k; ++i) {
        int64_t center_cell = c.coords[i] * len + len / 2;
        blo[i] = ((center_cell - rc) % w + w) % w;
        bln[i] = std::min(w, 2 * rc + 1);
      }
      bool inner_ok = true;
      for_cells_in_window(m, blo, bln, [&](int64_t cell) {
        if (cell_point_distance(m, cell, ctr_span) < rin &&
            !cube_contains_cell(m, c, cell))
          inner_ok = false;
      });
      if (!inner_ok) fail("inner ball fails at level " + std::to_string(n));
    }
  }

  // (5) boundary layers: |bd_t A| < C_3 t^eta |A| + one cell, t = 2^-j.
  for (int n = 1; n <= m.J; ++n) {
    for (int j = 0; j <= m.J - n; ++j) {
      double t = std::ldexp(1.0, -j);
      double thresh = t * std::pow(m.q, n);
      int64_t len = int64_t{1} << (m.J - n);
      for (int64_t f = 0; f < cubes_at_level(m, n); ++f) {
        Cube c = cube_from_flat(m, n, f);
        int64_t cnt = 0;
        std::array<int64_t, kMaxDim> lo{}, ln{};
        for (int i = 0; i < m.k; ++i) {
          lo[i] = c.coords[i] * len;
          ln[i] = len;
        }
        for_cells_in_window(m, lo, ln, [&](int64_t cell) {
          auto cc = cell_coords(m, cell);
          int64_t g = len;  // min per-axis gap to the complement
          for (int i = 0; i < m.k; ++i) {
            int64_t p = cc[i] - lo[i];
            g = std::min(g, std::min(p + 1, len - p));
          }
          if (gap_to_distance(m, g) <= thresh) ++cnt;
        });
        double lhs = static_cast<double>(cnt) * m.cell_measure();
        double rhs = sys.C_3 * std::pow(t, sys.eta) * cube_measure(m, c) + m.cell_measure();
        if (!(lhs < rhs)) {
          fail("boundary layer bound fails at level " + std::to_string(n) + ", t = 2^-" +
               std::to_string(j));
          break;
        }
      }
    }
  }

  // (6) countability: finite level counts match 2^(n k).
  for (int n = 0; n <= m.J; ++n)
    if (cubes_at_level(m, n) != (int64_t{1} << (n * m.k)))
      fail("level count mismatch at " + std::to_string(n));

  // (7),(8) child bound and exact covering.
  for (int n = 0; n < m.J; ++n)
    for (int64_t f = 0; f < cubes_at_level(m, n); ++f) {
      Cube c = cube_from_flat(m, n, f);
      auto kids = cube_children(m, c);
      if (static_cast<int>(kids.size()) > sys.N) fail("child bound exceeded");
      Region u(ncells);
      int64_t total = 0;
      for (const Cube& ch : kids) {
        if (!cube_contains(c, ch)) fail("child not inside parent");
        Region rr = cube_region(m, ch);
        if (u.intersects(rr)) fail("children overlap");
        u |= rr;
        total += rr.count();
      }
      if (total != cube_cells(m, c) || !(u == cube_region(m, c)))
        fail("children do not cover parent exactly");
    }

  return rep;
}

Region diamond(const DyadicSystem& sys, const Cube& a, double r) {
  const SpaceModel& m = sys.model;
  Region out(m.cell_count());
  double radius = r * std::pow(m.q, a.level);
  for (int64_t cell = 0; cell < m.cell_count(); ++cell)
    if (cube_cell_distance(m, a, cell) < radius) out.set(cell);
  return out;
}

Region boundary_layer(const DyadicSystem& sys, const Cube& a, double t) {
  const SpaceModel& m = sys.model;
  Region out(m.cell_count());
  if (a.level == 0) return out;  // complement empty on the torus
  double thresh = t * std::pow(m.q, a.level);
  int64_t len = int64_t{1} << (m.J - a.level);
  std::array<int64_t, kMaxDim> lo{}, ln{};
  for (int i = 0; i < m.k; ++i) {
    lo[i] = a.coords[i] * len;
    ln[i] = len;
  }
  for_cells_in_window(m, lo, ln, [&](int64_t cell) {
    auto cc = cell_coords(m, cell);
    int64_t g = len;
    for (int i = 0; i < m.k; ++i) {
      int64_t p = cc[i] - lo[i];
      g = std::min(g, std::min(p + 1, len - p));
    }
    if (gap_to_distance(m, g) <= thresh) out.set(cell);
  });
  return out;
}

DiamondIntersection diamond_intersection_bound(const DyadicSystem& sys,
                                               const Cube& a1, const Cube& a2,
                                               double r1, double r2) {
  if (a2.level < a1.level) throw ModelError("diamond_intersection_bound: lev A2 must be >= lev A1");
  DiamondIntersection out;
  Region d1 = diamond(sys, a1, r1);
  Region d2 = diamond(sys, a2, r2);
  out.intersects = d1.intersects(d2);
  const SpaceModel& m = sys.model;
  out.r = 2.0 * std::pow(m.K_X, 3) * (sys.C_2 + r2) * std::pow(m.q, a2.level - a1.level) +
          m.K_X * r1;
  if (out.intersects) {
    Region big = diamond(sys, a1, out.r);
    out.inclusion_verified = big.contains(d2);
  }
  return out;
}

}  // namespace adgrid
