#pragma once

#include <vector>

#include "extmle/rational.hpp"

namespace extmle {

// Dense rational matrix, row major. Sized for the desk scales of this
// project (hundreds of rows/columns); all eliminations are exact.
class RatMatrix {
 public:
  RatMatrix() : rows_(0), cols_(0) {}
  RatMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rat& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const Rat& operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  std::vector<Rat> row(int i) const;
  std::vector<Rat> col(int j) const;
  RatMatrix transposed() const;

  // Rows with indices in `keep`, in the given order.
  RatMatrix select_rows(const std::vector<int>& keep) const;

 private:
  int rows_, cols_;
  std::vector<Rat> data_;
};

std::vector<Rat> matvec(const RatMatrix& m, const std::vector<Rat>& x);
Rat dot(const std::vector<Rat>& a, const std::vector<Rat>& b);

// Exact rank by Gaussian elimination with partial (first nonzero) pivoting.
int rank(RatMatrix m);

// Basis of {x : m x = 0}, one column per free variable of the RREF.
// Returned as a list of length-cols() vectors.
std::vector<std::vector<Rat>> kernel_basis(const RatMatrix& m);

// Kernel basis scaled to primitive integer vectors.
std::vector<std::vector<Int>> integer_kernel_basis(const RatMatrix& m);

// True when v lies in the column span of m.
bool in_column_span(const RatMatrix& m, const std::vector<Rat>& v);

// Sequential Gram-Schmidt over the rationals. Columns of `m` are
// orthogonalized in order; dependent columns are dropped. Each returned
// vector is re-scaled to a primitive integer direction, so the output is
// orthogonal but not normalized. `fixed_prefix` columns at the front are
// orthogonalized among themselves first and excluded from the output.
std::vector<std::vector<Rat>> orthogonal_complement_basis(const RatMatrix& m,
                                                          int fixed_prefix);

}  // namespace extmle
