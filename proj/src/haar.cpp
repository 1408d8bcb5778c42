#include "adgrid/haar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace adgrid {

namespace {

// |a|^e with multiplication chains for the exponents the experiments sweep
inline double abs_pow(double a, double e) {
  a = std::fabs(a);
  if (e == 2.0) return a * a;
  if (e == 1.0) return a;
  if (e == 3.0) return a * a * a;
  if (e == 4.0) {
    double s = a * a;
    return s * s;
  }
  if (e == 0.5) return std::sqrt(a);
  if (e == 1.5) return a * std::sqrt(a);
  return std::pow(a, e);
}

}  // namespace

double norm_p(const CellFunction& f, double p) {
  double cm = f.model.cell_measure();
  double s = 0.0;
  for (double x : f.v) s += abs_pow(x, p);
  return std::pow(s * cm, 1.0 / p);
}

double norm_inf(const CellFunction& f) {
  double s = 0.0;
  for (double x : f.v) s = std::max(s, std::fabs(x));
  return s;
}

double integral(const CellFunction& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  return s * f.model.cell_measure();
}

double inner_product(const CellFunction& f, const CellFunction& g) {
  double s = 0.0;
  for (size_t i = 0; i < f.v.size(); ++i) s += f.v[i] * g.v[i];
  return s * f.model.cell_measure();
}

HaarSystem make_haar(const DyadicSystem& sys, SignScheme scheme) {
  return HaarSystem{sys, scheme};
}

namespace {

// The +-1 split axis cycles with the level so shifted images keep their shape.
inline int split_axis(const SpaceModel& m, const Cube& a) { return a.level % m.k; }

}  // namespace

int haar_sign(const HaarSystem& h, const Cube& a, int64_t cell) {
  const SpaceModel& m = h.sys.model;
  if (!cube_contains_cell(m, a, cell)) return 0;
  int axis = split_axis(m, a);
  auto cc = cell_coords(m, cell);
  // Coordinate of the level-(lev+1) child along the split axis.
  int64_t child = cc[axis] >> (m.J - a.level - 1);
  return (child & 1) == 0 ? 1 : -1;
}

void haar_add(const HaarSystem& h, const Cube& a, double c, CellFunction& f) {
  const SpaceModel& m = h.sys.model;
  if (a.level >= m.J) throw ModelError("haar function needs level < J");
  const int axis = split_axis(m, a);
  const int64_t len = int64_t{1} << (m.J - a.level);
  const int64_t half = len / 2;
  const int64_t w = m.cells_per_axis();
  int64_t lo[3] = {0, 0, 0};
  for (int i = 0; i < m.k; ++i) lo[i] = a.coords[i] * len;
  double* v = f.v.data();
  if (m.k == 1) {
    double* base = v + lo[0];
    for (int64_t t = 0; t < half; ++t) base[t] += c;
    for (int64_t t = half; t < len; ++t) base[t] -= c;
    return;
  }
  const int64_t z_hi = m.k == 3 ? len : 1;
  for (int64_t z = 0; z < z_hi; ++z)
    for (int64_t y = 0; y < len; ++y) {
      double* row = v + ((m.k == 3 ? (lo[2] + z) * w : 0) + lo[1] + y) * w + lo[0];
      if (axis == 0) {
        for (int64_t x = 0; x < half; ++x) row[x] += c;
        for (int64_t x = half; x < len; ++x) row[x] -= c;
      } else {
        double s = ((axis == 1 ? y : z) < half) ? c : -c;
        for (int64_t x = 0; x < len; ++x) row[x] += s;
      }
    }
}

CellFunction haar_function(const HaarSystem& h, const Cube& a) {
  CellFunction f = CellFunction::zero(h.sys.model);
  haar_add(h, a, 1.0, f);
  return f;
}

CellFunction synthesize(const HaarSystem& h, std::span<const Cube> family,
                        std::span<const double> coeffs) {
  if (family.size() != coeffs.size()) throw ModelError("synthesize: size mismatch");
  CellFunction f = CellFunction::zero(h.sys.model);
  for (size_t i = 0; i < family.size(); ++i)
    if (coeffs[i] != 0.0) haar_add(h, family[i], coeffs[i], f);
  return f;
}

double haar_integral(const HaarSystem& h, const Cube& a, const CellFunction& f) {
  const SpaceModel& m = h.sys.model;
  if (a.level >= m.J) throw ModelError("haar_integral: cube outside the system");
  const int axis = split_axis(m, a);
  const int64_t len = int64_t{1} << (m.J - a.level);
  const int64_t half = len / 2;
  const int64_t w = m.cells_per_axis();
  int64_t lo[3] = {0, 0, 0};
  for (int d = 0; d < m.k; ++d) lo[d] = a.coords[d] * len;
  const double* v = f.v.data();
  double s = 0.0;
  if (m.k == 1) {
    const double* base = v + lo[0];
    for (int64_t t = 0; t < half; ++t) s += base[t];
    for (int64_t t = half; t < len; ++t) s -= base[t];
    return s * m.cell_measure();
  }
  const int64_t z_hi = m.k == 3 ? len : 1;
  for (int64_t z = 0; z < z_hi; ++z)
    for (int64_t y = 0; y < len; ++y) {
      const double* row = v + ((m.k == 3 ? (lo[2] + z) * w : 0) + lo[1] + y) * w + lo[0];
      if (axis == 0) {
        for (int64_t x = 0; x < half; ++x) s += row[x];
        for (int64_t x = half; x < len; ++x) s -= row[x];
      } else {
        double sgn = ((axis == 1 ? y : z) < half) ? 1.0 : -1.0;
        double acc = 0.0;
        for (int64_t x = 0; x < len; ++x) acc += row[x];
        s += sgn * acc;
      }
    }
  return s * m.cell_measure();
}

std::vector<double> analyze(const HaarSystem& h, std::span<const Cube> family,
                            const CellFunction& f) {
  const SpaceModel& m = h.sys.model;
  std::vector<double> out(family.size(), 0.0);
  for (size_t i = 0; i < family.size(); ++i)
    out[i] = haar_integral(h, family[i], f) / cube_measure(m, family[i]);
  return out;
}

const SigmaAlgebra& Filtration::at_level(int n) const {
  for (size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == n) return stages[i];
  throw ModelError("filtration level " + std::to_string(n) + " does not exist");
}

bool Filtration::has_level(int n) const {
  return std::find(levels.begin(), levels.end(), n) != levels.end();
}

Filtration make_filtration(const SpaceModel& m,
                           const std::vector<std::pair<int, Region>>& nested_family) {
  Filtration filt;
  filt.model = m;
  std::vector<int> lv;
  for (const auto& [n, r] : nested_family) lv.push_back(n);
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  filt.levels = lv;
  for (int n : lv) {
    // Distinct member sets with level <= n.
    std::vector<Region> members;
    for (const auto& [ml, r] : nested_family)
      if (ml <= n && std::find(members.begin(), members.end(), r) == members.end())
        members.push_back(r);
    SigmaAlgebra s;
    Region covered(m.cell_count());
    for (size_t i = 0; i < members.size(); ++i) {
      Region atom = members[i];
      for (size_t j = 0; j < members.size(); ++j) {
        if (i == j) continue;
        if (members[i].contains(members[j]) && !(members[i] == members[j]))
          atom -= members[j];
      }
      if (!atom.empty()) s.atoms.push_back(atom);
      covered |= members[i];
    }
    s.remainder = covered.complement();
    filt.stages.push_back(std::move(s));
  }
  return filt;
}

Filtration make_dyadic_filtration(const SpaceModel& m, int max_level) {
  Filtration filt;
  filt.model = m;
  for (int n = 0; n <= max_level; ++n) {
    filt.levels.push_back(n);
    SigmaAlgebra s;
    s.remainder = Region(m.cell_count());
    for (int64_t f = 0; f < cubes_at_level(m, n); ++f)
      s.atoms.push_back(cube_region(m, cube_from_flat(m, n, f)));
    filt.stages.push_back(std::move(s));
  }
  return filt;
}

CellFunction conditional_expectation(const CellFunction& f, const SigmaAlgebra& s) {
  CellFunction out = CellFunction::zero(f.model);
  auto average_over = [&](const Region& r) {
    int64_t n = r.count();
    if (n == 0) throw ModelError("conditional expectation over an empty atom");
    double sum = 0.0;
    r.for_each([&](int64_t c) { sum += f.v[static_cast<size_t>(c)]; });
    double avg = sum / static_cast<double>(n);
    r.for_each([&](int64_t c) { out.v[static_cast<size_t>(c)] = avg; });
  };
  for (const Region& a : s.atoms) average_over(a);
  if (!s.remainder.empty()) average_over(s.remainder);
  return out;
}

CellFunction conditional_expectation(const CellFunction& f, const Filtration& filt, int n) {
  return conditional_expectation(f, filt.at_level(n));
}

void export_csv(const CellFunction& f, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw ModelError("cannot open " + path);
  std::fprintf(fp, "cell,value\n");
  for (size_t i = 0; i < f.v.size(); ++i) std::fprintf(fp, "%zu,%.17g\n", i, f.v[i]);
  std::fclose(fp);
}

}  // namespace adgrid
