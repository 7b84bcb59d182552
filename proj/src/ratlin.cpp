#include "extmle/ratlin.hpp"

#include <stdexcept>

namespace extmle {

std::vector<Rat> RatMatrix::row(int i) const {
  std::vector<Rat> out(cols_);
  for (int j = 0; j < cols_; ++j) out[j] = (*this)(i, j);
  return out;
}

std::vector<Rat> RatMatrix::col(int j) const {
  std::vector<Rat> out(rows_);
  for (int i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

RatMatrix RatMatrix::transposed() const {
  RatMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RatMatrix RatMatrix::select_rows(const std::vector<int>& keep) const {
  RatMatrix out(static_cast<int>(keep.size()), cols_);
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(keep[i], j);
  return out;
}

std::vector<Rat> matvec(const RatMatrix& m, const std::vector<Rat>& x) {
  if (static_cast<int>(x.size()) != m.cols())
    throw std::invalid_argument("matvec dimension mismatch");
  std::vector<Rat> y(m.rows(), Rat(0));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0 && x[j] != 0) y[i] += m(i, j) * x[j];
  return y;
}

Rat dot(const std::vector<Rat>& a, const std::vector<Rat>& b) {
  Rat s(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0 && b[i] != 0) s += a[i] * b[i];
  return s;
}

namespace {

// Reduced row echelon form in place; returns pivot columns.
std::vector<int> rref(RatMatrix& m) {
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int p = -1;
    for (int i = r; i < m.rows(); ++i)
      if (m(i, c) != 0) { p = i; break; }
    if (p < 0) continue;
    if (p != r)
      for (int j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
    Rat inv = m(r, c);
    for (int j = c; j < m.cols(); ++j) m(r, j) /= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      Rat f = m(i, c);
      for (int j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

int rank(RatMatrix m) { return static_cast<int>(rref(m).size()); }

std::vector<std::vector<Rat>> kernel_basis(const RatMatrix& m) {
  RatMatrix r = m;
  std::vector<int> pivots = rref(r);
  std::vector<bool> is_pivot(m.cols(), false);
  for (int c : pivots) is_pivot[c] = true;

  std::vector<std::vector<Rat>> basis;
  for (int free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rat> v(m.cols(), Rat(0));
    v[free] = 1;
    for (std::size_t k = 0; k < pivots.size(); ++k) v[pivots[k]] = -r(static_cast<int>(k), free);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<std::vector<Int>> integer_kernel_basis(const RatMatrix& m) {
  std::vector<std::vector<Int>> out;
  for (const auto& v : kernel_basis(m)) out.push_back(primitive_integer(v));
  return out;
}

bool in_column_span(const RatMatrix& m, const std::vector<Rat>& v) {
  if (static_cast<int>(v.size()) != m.rows())
    throw std::invalid_argument("in_column_span dimension mismatch");
  RatMatrix aug(m.rows(), m.cols() + 1);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) aug(i, j) = m(i, j);
    aug(i, m.cols()) = v[i];
  }
  RatMatrix base = m;
  return rank(std::move(base)) == rank(std::move(aug));
}

std::vector<std::vector<Rat>> orthogonal_complement_basis(const RatMatrix& m,
                                                          int fixed_prefix) {
  std::vector<std::vector<Rat>> kept;   // orthogonal directions so far
  std::vector<Rat> norms2;              // cached (u,u)
  std::vector<std::vector<Rat>> out;
  for (int j = 0; j < m.cols(); ++j) {
    std::vector<Rat> u = m.col(j);
    for (std::size_t k = 0; k < kept.size(); ++k) {
      Rat proj = dot(kept[k], u);
      if (proj == 0) continue;
      proj /= norms2[k];
      for (int i = 0; i < m.rows(); ++i)
        if (kept[k][i] != 0) u[i] -= proj * kept[k][i];
    }
    bool zero = true;
    for (const Rat& x : u)
      if (x != 0) { zero = false; break; }
    if (zero) continue;  // dependent column
    make_primitive(u);   // keeps entries small across steps
    norms2.push_back(dot(u, u));
    kept.push_back(u);
    if (j >= fixed_prefix) out.push_back(std::move(u));
  }
  return out;
}

}  // namespace extmle
