#pragma once

#include <vector>

#include "extmle/design.hpp"
#include "extmle/rational.hpp"

namespace extmle {

// A facial set of the model subspace: cells F such that some vector of the
// subspace vanishes on F and is strictly negative elsewhere. `certificate`
// is that witness in design-column coordinates (A*certificate is zero on F
// and negative off F); the zero vector certifies the full set.
struct FacialSet {
  std::vector<int> cells;        // sorted
  std::vector<Rat> certificate;  // length = design column count
  bool is_full = false;

  bool contains(int cell) const;
  std::vector<int> complement(int cell_count) const;
};

// Minimal facial set containing `support`, found with a single exact LP:
// slack variables expose every removable cell simultaneously because
// certificates form a cone and therefore add.
FacialSet facial_set(const DesignMatrix& a, const std::vector<int>& support);

struct ExistenceResult {
  bool exists;
  FacialSet face;
};

// The MLE exists iff the margins lie in the relative interior of the
// marginal cone, equivalently iff no proper facial set contains supp(n).
// Scheme-independent by design, hence no scheme argument.
ExistenceResult mle_exists(const DesignMatrix& a, const ContingencyTable& n);

struct Facet {
  FacialSet face;
  bool zero_margin;  // facial set equals the zero set of one design column
};

struct FacetCensus {
  std::vector<Facet> facets;
  int zero_margin_count = 0;
  bool complete = true;       // false when the budget ran out
  double elapsed_seconds = 0;
};

// All facets of the marginal cone by the double description method over
// the rationals: generators (the rows a_i) are inserted in lexicographic
// row order, adjacency decided by exact rank. Intended for small models;
// `budget_seconds` <= 0 means unlimited.
FacetCensus enumerate_facets(const DesignMatrix& a, double budget_seconds = 0);

struct BudgetExceeded : std::runtime_error {
  FacetCensus partial;
  explicit BudgetExceeded(FacetCensus census)
      : std::runtime_error("facet enumeration budget exceeded"),
        partial(std::move(census)) {}
};

}  // namespace extmle
