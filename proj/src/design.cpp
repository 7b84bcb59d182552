#include "extmle/design.hpp"

#include <numeric>
#include <stdexcept>

namespace extmle {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

}  // namespace

DesignMatrix::DesignMatrix(FactorGrid grid, ModelSpec model)
    : grid_(std::move(grid)), model_(std::move(model)) {
  const int cells = grid_.cell_count();
  int d = 0;
  for (const auto& term : model_.terms()) {
    term_offsets_.push_back(d);
    int width = 1;
    for (int f : term) width *= grid_.levels(f);
    d += width;
  }
  a_.setZero(cells, d);
  labels_.resize(d);

  // Strides for mapping a table cell to its marginal cell within a term.
  term_strides_.resize(model_.terms().size());
  for (std::size_t t = 0; t < model_.terms().size(); ++t) {
    const auto& term = model_.terms()[t];
    std::vector<int> strides(term.size());
    int s = 1;
    for (int k = static_cast<int>(term.size()) - 1; k >= 0; --k) {
      strides[k] = s;
      s *= grid_.levels(term[k]);
    }
    term_strides_[t] = strides;
  }

  for (int i = 0; i < cells; ++i) {
    std::vector<int> multi = grid_.to_multi(i);
    for (std::size_t t = 0; t < model_.terms().size(); ++t) {
      const auto& term = model_.terms()[t];
      int marg = 0;
      for (std::size_t k = 0; k < term.size(); ++k)
        marg += multi[term[k]] * term_strides_[t][k];
      a_(i, term_offsets_[t] + marg) = 1;
    }
  }
  for (int j = 0; j < d; ++j) {
    int t = 0;
    while (t + 1 < static_cast<int>(term_offsets_.size()) &&
           term_offsets_[t + 1] <= j)
      ++t;
    int marg = j - term_offsets_[t];
    const auto& term = model_.terms()[t];
    std::vector<int> cell(term.size());
    for (std::size_t k = 0; k < term.size(); ++k) {
      cell[k] = marg / term_strides_[t][k];
      marg %= term_strides_[t][k];
    }
    labels_[j] = ColumnLabel{t, std::move(cell)};
  }
  rank_ = extmle::rank(rational());
}

int DesignMatrix::column_of(int term, int cell) const {
  std::vector<int> multi = grid_.to_multi(cell);
  const auto& t = model_.terms()[term];
  int marg = 0;
  for (std::size_t k = 0; k < t.size(); ++k)
    marg += multi[t[k]] * term_strides_[term][k];
  return term_offsets_[term] + marg;
}

RatMatrix DesignMatrix::rational() const {
  RatMatrix m(cell_count(), column_count());
  for (int i = 0; i < cell_count(); ++i)
    for (int j = 0; j < column_count(); ++j)
      if (a_(i, j)) m(i, j) = 1;
  return m;
}

std::string DesignMatrix::column_name(int j) const {
  const ColumnLabel& lab = labels_[j];
  const auto& term = model_.terms()[lab.term];
  std::string out = "[";
  for (std::size_t k = 0; k < term.size(); ++k) {
    if (k) out += ',';
    out += grid_.factor_name(term[k]);
  }
  out += "]@(";
  for (std::size_t k = 0; k < lab.cell.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(lab.cell[k] + 1);
  }
  out += ')';
  return out;
}

DesignMatrix build_design_matrix(const FactorGrid& grid,
                                 const ModelSpec& model) {
  return DesignMatrix(grid, model);
}

std::vector<std::int64_t> sufficient_statistics(const DesignMatrix& a,
                                                const ContingencyTable& n) {
  if (n.grid().cell_count() != a.cell_count())
    fail("table and design matrix disagree on cell count");
  std::vector<std::int64_t> t(a.column_count(), 0);
  for (int i = 0; i < a.cell_count(); ++i) {
    if (n.count(i) == 0) continue;
    for (std::size_t term = 0; term < a.model().terms().size(); ++term)
      t[a.column_of(static_cast<int>(term), i)] += n.count(i);
  }
  return t;
}

SamplingScheme SamplingScheme::poisson() { return SamplingScheme{}; }

SamplingScheme SamplingScheme::multinomial(const ContingencyTable& table) {
  SamplingScheme s;
  s.variant = Variant::Multinomial;
  std::vector<int> all(table.grid().cell_count());
  std::iota(all.begin(), all.end(), 0);
  s.blocks.push_back(std::move(all));
  s.totals.push_back(table.total());
  return s;
}

namespace {

std::vector<std::vector<int>> factor_fibers(const FactorGrid& grid, int f) {
  std::vector<std::vector<int>> fibers(grid.levels(f));
  for (int i = 0; i < grid.cell_count(); ++i)
    fibers[grid.to_multi(i)[f]].push_back(i);
  return fibers;
}

}  // namespace

SamplingScheme SamplingScheme::product_multinomial(
    const ContingencyTable& table, const std::string& factor) {
  int f = table.grid().factor_index(factor);
  if (f < 0) fail("unknown factor label '" + factor + "'");
  SamplingScheme s;
  s.variant = Variant::ProductMultinomial;
  for (auto& fiber : factor_fibers(table.grid(), f)) {
    std::int64_t total = 0;
    for (int i : fiber) total += table.count(i);
    s.blocks.push_back(std::move(fiber));
    s.totals.push_back(total);
  }
  return s;
}

SamplingScheme SamplingScheme::poisson_multinomial(
    const ContingencyTable& table, const std::string& factor, int free_level) {
  int f = table.grid().factor_index(factor);
  if (f < 0) fail("unknown factor label '" + factor + "'");
  if (free_level < 0 || free_level >= table.grid().levels(f))
    fail("free level out of range");
  SamplingScheme s;
  s.variant = Variant::PoissonMultinomial;
  auto fibers = factor_fibers(table.grid(), f);
  for (int l = 0; l < static_cast<int>(fibers.size()); ++l) {
    if (l == free_level) continue;
    std::int64_t total = 0;
    for (int i : fibers[l]) total += table.count(i);
    s.blocks.push_back(std::move(fibers[l]));
    s.totals.push_back(total);
  }
  return s;
}

std::string SamplingScheme::name() const {
  switch (variant) {
    case Variant::Poisson: return "poisson";
    case Variant::Multinomial: return "multinomial";
    case Variant::ProductMultinomial: return "product-multinomial";
    case Variant::PoissonMultinomial: return "poisson-multinomial";
  }
  return "?";
}

SamplingMatrix::SamplingMatrix(const SamplingScheme& scheme,
                               const FactorGrid& grid,
                               const ContingencyTable& table)
    : scheme_(scheme), cells_(grid.cell_count()) {
  if (table.grid().cell_count() != cells_)
    fail("table does not match grid");
  std::vector<char> hit(cells_, 0);
  for (std::size_t j = 0; j < scheme.blocks.size(); ++j) {
    const auto& block = scheme.blocks[j];
    if (block.empty()) fail("empty sampling block");
    if (scheme.totals[j] < 1) fail("sampling total must be at least 1");
    std::int64_t observed = 0;
    for (int i : block) {
      if (i < 0 || i >= cells_) fail("sampling block cell out of range");
      if (hit[i]) fail("overlapping sampling blocks");
      hit[i] = 1;
      observed += table.count(i);
    }
    if (observed != scheme.totals[j])
      fail("sampling totals do not match the observed table");
    std::vector<Rat> col(cells_, Rat(0));
    for (int i : block) col[i] = Rat(1, scheme.totals[j]);
    cols_.push_back(std::move(col));
  }
  if (scheme.variant == SamplingScheme::Variant::ProductMultinomial ||
      scheme.variant == SamplingScheme::Variant::Multinomial) {
    for (int i = 0; i < cells_; ++i)
      if (!hit[i]) fail("sampling blocks must cover every cell");
  }
}

RatMatrix SamplingMatrix::rational() const {
  RatMatrix v(cells_, m());
  for (int j = 0; j < m(); ++j)
    for (int i = 0; i < cells_; ++i) v(i, j) = cols_[j][i];
  return v;
}

SamplingMatrix build_sampling_matrix(const SamplingScheme& scheme,
                                     const FactorGrid& grid,
                                     const ContingencyTable& table) {
  return SamplingMatrix(scheme, grid, table);
}

void require_scheme_in_model(const DesignMatrix& a, const SamplingMatrix& v) {
  RatMatrix am = a.rational();
  for (int j = 0; j < v.m(); ++j) {
    // chi_j in the column span of A; the scaling by 1/N_j is irrelevant.
    if (!in_column_span(am, v.column(j)))
      fail("sampling constraint " + std::to_string(j) +
           " is not contained in the model subspace");
  }
  if (v.m() >= a.rank())
    fail("sampling subspace must be strictly contained in the model subspace");
}

ReducedBlock reduce_to_minimal(const DesignMatrix& a, const SamplingMatrix& v) {
  require_scheme_in_model(a, v);
  const int cells = a.cell_count();
  RatMatrix stacked(cells, v.m() + a.column_count());
  for (int j = 0; j < v.m(); ++j)
    for (int i = 0; i < cells; ++i) stacked(i, j) = v.column(j)[i];
  for (int j = 0; j < a.column_count(); ++j)
    for (int i = 0; i < cells; ++i)
      if (a.matrix()(i, j)) stacked(i, v.m() + j) = 1;

  auto basis = orthogonal_complement_basis(stacked, v.m());
  ReducedBlock out;
  out.b.setZero(cells, static_cast<int>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    double norm2 = 0;
    std::vector<double> col(cells);
    for (int i = 0; i < cells; ++i) {
      col[i] = static_cast<double>(basis[k][i]);
      norm2 += col[i] * col[i];
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < cells; ++i) out.b(i, static_cast<int>(k)) = col[i] * inv;
  }
  if (out.b.cols() != a.rank() - v.m())
    throw std::logic_error("reduced block has unexpected width");
  return out;
}

}  // namespace extmle
