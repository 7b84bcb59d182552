#include "extmle/polyhedra.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "extmle/simplex.hpp"

namespace extmle {

bool FacialSet::contains(int cell) const {
  return std::binary_search(cells.begin(), cells.end(), cell);
}

std::vector<int> FacialSet::complement(int cell_count) const {
  std::vector<int> out;
  std::size_t k = 0;
  for (int i = 0; i < cell_count; ++i) {
    if (k < cells.size() && cells[k] == i)
      ++k;
    else
      out.push_back(i);
  }
  return out;
}

namespace {

FacialSet full_set(const DesignMatrix& a) {
  FacialSet f;
  f.cells.resize(a.cell_count());
  std::iota(f.cells.begin(), f.cells.end(), 0);
  f.certificate.assign(a.column_count(), Rat(0));
  f.is_full = true;
  return f;
}

// Exact verification of the facial-set inequalities; any violation is an
// internal error, not a data error.
void check_certificate(const DesignMatrix& a, const FacialSet& f) {
  std::vector<Rat> av = matvec(a.rational(), f.certificate);
  std::size_t k = 0;
  for (int i = 0; i < a.cell_count(); ++i) {
    bool in_f = k < f.cells.size() && f.cells[k] == i;
    if (in_f) ++k;
    if (in_f && av[i] != 0)
      throw std::logic_error("facial certificate nonzero on the facial set");
    if (!in_f && av[i] >= 0)
      throw std::logic_error("facial certificate not strictly negative off the facial set");
  }
}

}  // namespace

FacialSet facial_set(const DesignMatrix& a, const std::vector<int>& support) {
  if (support.empty()) throw std::invalid_argument("empty support");
  std::vector<int> s = support;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.front() < 0 || s.back() >= a.cell_count())
    throw std::invalid_argument("support cell out of range");

  RatMatrix am = a.rational();
  RatMatrix as = am.select_rows(s);
  if (rank(as) == a.rank()) return full_set(a);

  // Certificates c with A_S c = 0 live in the kernel of A_S; express them
  // as c = N w and expose removable cells with one slack per off-support
  // cell. Maximizing the slack total finds them all at once.
  std::vector<std::vector<Rat>> nk = kernel_basis(as);
  const int k = static_cast<int>(nk.size());
  std::vector<int> off;
  {
    std::size_t p = 0;
    for (int i = 0; i < a.cell_count(); ++i) {
      if (p < s.size() && s[p] == i)
        ++p;
      else
        off.push_back(i);
    }
  }

  RationalLp lp(k + static_cast<int>(off.size()));
  for (std::size_t r = 0; r < off.size(); ++r) {
    RationalLp::Row row;
    row.coeffs.assign(lp.num_vars, Rat(0));
    const std::vector<Rat> ai = am.row(off[r]);
    for (int j = 0; j < k; ++j) row.coeffs[j] = dot(ai, nk[j]);
    row.coeffs[k + static_cast<int>(r)] = 1;
    row.rhs = 0;
    lp.inequalities.push_back(std::move(row));
    lp.objective[k + static_cast<int>(r)] = 1;
    lp.lower[k + static_cast<int>(r)] = Rat(0);
    lp.upper[k + static_cast<int>(r)] = Rat(1);
  }

  LpSolution sol = solve_rational_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw std::logic_error("facial-set LP must be feasible and bounded");

  FacialSet f;
  f.cells = s;
  for (std::size_t r = 0; r < off.size(); ++r)
    if (sol.x[k + static_cast<int>(r)] == 0) f.cells.push_back(off[r]);
  std::sort(f.cells.begin(), f.cells.end());
  f.is_full = static_cast<int>(f.cells.size()) == a.cell_count();
  f.certificate.assign(a.column_count(), Rat(0));
  if (!f.is_full) {
    for (int j = 0; j < k; ++j) {
      if (sol.x[j] == 0) continue;
      for (int c = 0; c < a.column_count(); ++c)
        f.certificate[c] += sol.x[j] * nk[j][c];
    }
    check_certificate(a, f);
  }
  return f;
}

ExistenceResult mle_exists(const DesignMatrix& a, const ContingencyTable& n) {
  std::vector<int> s = n.support();
  if (s.empty()) throw std::invalid_argument("table has empty support");
  FacialSet f = facial_set(a, s);
  return ExistenceResult{f.is_full, std::move(f)};
}

namespace {

using Bits = std::vector<std::uint64_t>;

Bits make_bits(int n) { return Bits((n + 63) / 64, 0); }
void set_bit(Bits& b, int i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }
bool get_bit(const Bits& b, int i) {
  return (b[i >> 6] >> (i & 63)) & 1;
}

int and_popcount(const Bits& a, const Bits& b, Bits& tmp) {
  int n = 0;
  for (std::size_t w = 0; w < a.size(); ++w) {
    tmp[w] = a[w] & b[w];
    n += std::popcount(tmp[w]);
  }
  return n;
}

struct Ray {
  std::vector<Int> y;  // primitive integer direction, dimension r
  Bits tight;          // processed rows where (m_i, y) == 0
};

std::vector<Int> primitive(std::vector<Int> v) {
  Int g = 0;
  for (const Int& x : v) g = gcd(g, x);
  if (g > 1)
    for (Int& x : v) x /= g;
  return v;
}

// Inverse of a nonsingular rational matrix by Gauss-Jordan on [m | I].
RatMatrix inverse(const RatMatrix& m) {
  const int n = m.rows();
  RatMatrix aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1;
  }
  for (int c = 0; c < n; ++c) {
    int p = -1;
    for (int i = c; i < n; ++i)
      if (aug(i, c) != 0) { p = i; break; }
    if (p < 0) throw std::logic_error("singular matrix in facet enumeration");
    if (p != c)
      for (int j = 0; j < 2 * n; ++j) std::swap(aug(p, j), aug(c, j));
    Rat inv = aug(c, c);
    for (int j = 0; j < 2 * n; ++j) aug(c, j) /= inv;
    for (int i = 0; i < n; ++i) {
      if (i == c || aug(i, c) == 0) continue;
      Rat f = aug(i, c);
      for (int j = 0; j < 2 * n; ++j) aug(i, j) -= f * aug(c, j);
    }
  }
  RatMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = aug(i, n + j);
  return out;
}

}  // namespace

FacetCensus enumerate_facets(const DesignMatrix& a, double budget_seconds) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start).count();
  };
  auto check_budget = [&] {
    if (budget_seconds > 0 && elapsed() > budget_seconds) {
      FacetCensus partial;
      partial.complete = false;
      partial.elapsed_seconds = elapsed();
      throw BudgetExceeded(std::move(partial));
    }
  };

  const int cells = a.cell_count();
  const int r = a.rank();
  if (r < 2)
    throw std::invalid_argument("marginal cone must have dimension at least 2");

  // Work in row-space coordinates: columns of R are a maximal independent
  // set of design rows, so the polar cone {y : M y <= 0} with M = A R is
  // pointed and full-dimensional. Its extreme rays are the facets.
  std::vector<int> basis_rows;
  {
    RatMatrix echelon(r, a.column_count());
    int have = 0;
    for (int i = 0; i < cells && have < r; ++i) {
      std::vector<Rat> v(a.column_count());
      for (int j = 0; j < a.column_count(); ++j) v[j] = Rat(a.matrix()(i, j));
      for (int e = 0; e < have; ++e) {
        int lead = -1;
        for (int j = 0; j < a.column_count(); ++j)
          if (echelon(e, j) != 0) { lead = j; break; }
        if (lead >= 0 && v[lead] != 0) {
          Rat f = v[lead] / echelon(e, lead);
          for (int j = 0; j < a.column_count(); ++j) v[j] -= f * echelon(e, j);
        }
      }
      bool nonzero = false;
      for (const Rat& x : v)
        if (x != 0) { nonzero = true; break; }
      if (nonzero) {
        for (int j = 0; j < a.column_count(); ++j) echelon(have, j) = v[j];
        ++have;
        basis_rows.push_back(i);
      }
    }
    if (have != r) throw std::logic_error("design rank inconsistency");
  }

  // M(i,k) = (a_i, a_{basis_rows[k]}), integral throughout.
  std::vector<std::vector<Int>> m(cells, std::vector<Int>(r));
  for (int i = 0; i < cells; ++i)
    for (int k = 0; k < r; ++k) {
      long long s = 0;
      for (int j = 0; j < a.column_count(); ++j)
        s += static_cast<long long>(a.matrix()(i, j)) *
             a.matrix()(basis_rows[k], j);
      m[i][k] = s;
    }

  RatMatrix mb(r, r);
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) mb(p, q) = Rat(m[basis_rows[p]][q]);
  RatMatrix mb_inv = inverse(mb);

  std::vector<Ray> rays;
  for (int q = 0; q < r; ++q) {
    std::vector<Rat> col(r);
    for (int p = 0; p < r; ++p) col[p] = -mb_inv(p, q);
    Ray ray;
    ray.y = primitive_integer(col);
    ray.tight = make_bits(cells);
    for (int p = 0; p < r; ++p)
      if (p != q) set_bit(ray.tight, basis_rows[p]);
    rays.push_back(std::move(ray));
  }

  std::vector<char> in_basis(cells, 0);
  for (int i : basis_rows) in_basis[i] = 1;

  auto value = [&](const std::vector<Int>& y, int row) {
    Int s = 0;
    for (int k = 0; k < r; ++k)
      if (m[row][k] != 0 && y[k] != 0) s += m[row][k] * y[k];
    return s;
  };

  // Exact adjacency: the rows tight at both rays must span a subspace of
  // dimension exactly r - 2.
  Bits tmp = make_bits(cells);
  auto adjacent = [&](const Ray& p, const Ray& n) {
    int common = and_popcount(p.tight, n.tight, tmp);
    if (common < r - 2) return false;
    RatMatrix sub(common, r);
    int row = 0;
    for (int i = 0; i < cells; ++i)
      if (get_bit(tmp, i)) {
        for (int k = 0; k < r; ++k) sub(row, k) = Rat(m[i][k]);
        ++row;
      }
    return rank(std::move(sub)) == r - 2;
  };

  for (int row = 0; row < cells; ++row) {
    if (in_basis[row]) continue;
    check_budget();
    std::vector<Int> vals(rays.size());
    bool any_pos = false;
    for (std::size_t i = 0; i < rays.size(); ++i) {
      vals[i] = value(rays[i].y, row);
      if (vals[i] > 0) any_pos = true;
    }
    if (!any_pos) {
      for (std::size_t i = 0; i < rays.size(); ++i)
        if (vals[i] == 0) set_bit(rays[i].tight, row);
      continue;
    }
    std::vector<Ray> next;
    for (std::size_t i = 0; i < rays.size(); ++i) {
      if (vals[i] > 0) continue;
      Ray keep = rays[i];
      if (vals[i] == 0) set_bit(keep.tight, row);
      next.push_back(std::move(keep));
    }
    for (std::size_t p = 0; p < rays.size(); ++p) {
      if (vals[p] <= 0) continue;
      check_budget();
      for (std::size_t n = 0; n < rays.size(); ++n) {
        if (vals[n] >= 0) continue;
        if (!adjacent(rays[p], rays[n])) continue;
        Ray born;
        born.y.resize(r);
        for (int k = 0; k < r; ++k)
          born.y[k] = vals[p] * rays[n].y[k] - vals[n] * rays[p].y[k];
        born.y = primitive(std::move(born.y));
        born.tight = make_bits(cells);
        for (std::size_t w = 0; w < born.tight.size(); ++w)
          born.tight[w] = rays[p].tight[w] & rays[n].tight[w];
        set_bit(born.tight, row);
        next.push_back(std::move(born));
      }
    }
    rays = std::move(next);
  }

  // Facets, facial sets and zero-margin classification.
  std::vector<std::vector<int>> column_zero_sets(a.column_count());
  for (int j = 0; j < a.column_count(); ++j)
    for (int i = 0; i < cells; ++i)
      if (a.matrix()(i, j) == 0) column_zero_sets[j].push_back(i);

  RatMatrix am = a.rational();
  FacetCensus census;
  for (const Ray& ray : rays) {
    check_budget();
    Facet facet;
    for (int i = 0; i < cells; ++i)
      if (value(ray.y, i) == 0) facet.face.cells.push_back(i);
    facet.face.certificate.assign(a.column_count(), Rat(0));
    // certificate c = R y in design-column coordinates
    for (int k = 0; k < r; ++k)
      if (ray.y[k] != 0)
        for (int j = 0; j < a.column_count(); ++j)
          if (a.matrix()(basis_rows[k], j))
            facet.face.certificate[j] += Rat(ray.y[k]);
    facet.face.is_full = false;
    check_certificate(a, facet.face);
    if (rank(am.select_rows(facet.face.cells)) != r - 1)
      throw std::logic_error("facet facial set has wrong rank");
    facet.zero_margin = false;
    for (const auto& zs : column_zero_sets)
      if (zs == facet.face.cells) { facet.zero_margin = true; break; }
    census.facets.push_back(std::move(facet));
  }
  std::sort(census.facets.begin(), census.facets.end(),
            [](const Facet& x, const Facet& y) {
              return x.face.cells < y.face.cells;
            });
  for (const Facet& f : census.facets)
    if (f.zero_margin) ++census.zero_margin_count;
  census.complete = true;
  census.elapsed_seconds = elapsed();
  return census;
}

}  // namespace extmle
