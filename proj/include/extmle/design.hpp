#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "extmle/ratlin.hpp"
#include "extmle/tables.hpp"

namespace extmle {

// Indicator design matrix of a hierarchical model: one 0/1 column per
// (generating-class term, marginal cell of that term). A'n is then
// literally the concatenation of the margins of n, and the marginal cone
// has exact rational facial structure. The matrix is deliberately allowed
// to be rank deficient; rank is computed exactly and cached.
class DesignMatrix {
 public:
  struct ColumnLabel {
    int term;                 // index into model.terms()
    std::vector<int> cell;    // 0-based marginal multi-index over the term
  };

  DesignMatrix(FactorGrid grid, ModelSpec model);

  const FactorGrid& grid() const { return grid_; }
  const ModelSpec& model() const { return model_; }
  const Eigen::MatrixXi& matrix() const { return a_; }
  const std::vector<ColumnLabel>& column_labels() const { return labels_; }
  int cell_count() const { return static_cast<int>(a_.rows()); }
  int column_count() const { return static_cast<int>(a_.cols()); }
  int rank() const { return rank_; }

  // Marginal-cell column index hit by a table cell under a given term.
  int column_of(int term, int cell) const;

  RatMatrix rational() const;
  std::string column_name(int j) const;

 private:
  FactorGrid grid_;
  ModelSpec model_;
  Eigen::MatrixXi a_;
  std::vector<ColumnLabel> labels_;
  std::vector<int> term_offsets_;
  std::vector<std::vector<int>> term_strides_;
  int rank_;
};

DesignMatrix build_design_matrix(const FactorGrid& grid, const ModelSpec& model);

// t = A'n, the concatenated margins.
std::vector<std::int64_t> sufficient_statistics(const DesignMatrix& a,
                                                const ContingencyTable& n);

// Conditional Poisson sampling scheme: which linear combinations of the
// table are fixed by design. Blocks partition the cells (product
// multinomial) or cover part of them (Poisson-multinomial, last block
// unconstrained and not listed here).
struct SamplingScheme {
  enum class Variant { Poisson, Multinomial, ProductMultinomial, PoissonMultinomial };

  Variant variant = Variant::Poisson;
  std::vector<std::vector<int>> blocks;   // constrained blocks, cell indices
  std::vector<std::int64_t> totals;       // N_j per constrained block

  static SamplingScheme poisson();
  static SamplingScheme multinomial(const ContingencyTable& table);
  // One multinomial block per level of the named factor, totals taken from
  // the observed table.
  static SamplingScheme product_multinomial(const ContingencyTable& table,
                                            const std::string& factor);
  static SamplingScheme poisson_multinomial(const ContingencyTable& table,
                                            const std::string& factor,
                                            int free_level);

  int constraint_count() const { return static_cast<int>(blocks.size()); }
  std::string name() const;
};

// V has one column chi_j / N_j per sampling constraint, so V'n = 1 exactly.
class SamplingMatrix {
 public:
  SamplingMatrix(const SamplingScheme& scheme, const FactorGrid& grid,
                 const ContingencyTable& table);

  int m() const { return static_cast<int>(cols_.size()); }
  int cell_count() const { return cells_; }
  const std::vector<Rat>& column(int j) const { return cols_[j]; }
  const SamplingScheme& scheme() const { return scheme_; }
  RatMatrix rational() const;

 private:
  SamplingScheme scheme_;
  int cells_;
  std::vector<std::vector<Rat>> cols_;
};

SamplingMatrix build_sampling_matrix(const SamplingScheme& scheme,
                                     const FactorGrid& grid,
                                     const ContingencyTable& table);

// Orthonormal basis B of the model subspace with the sampling subspace
// removed. Exact Gram-Schmidt does the rank decisions; normalization is
// the only floating-point step.
struct ReducedBlock {
  Eigen::MatrixXd b;  // I x (rank(A) - m)
};

ReducedBlock reduce_to_minimal(const DesignMatrix& a, const SamplingMatrix& v);

// Throws unless every sampling constraint lies in the model subspace and
// the containment is strict.
void require_scheme_in_model(const DesignMatrix& a, const SamplingMatrix& v);

}  // namespace extmle
