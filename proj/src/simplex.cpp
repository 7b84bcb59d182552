#include "extmle/simplex.hpp"

#include <stdexcept>

namespace extmle {

namespace {

// Dense simplex tableau over the rationals. Rows are equalities with
// nonnegative right-hand sides; the basis always forms an identity block.
class Tableau {
 public:
  Tableau(int rows, int cols) : rows_(rows), cols_(cols),
      t_(static_cast<std::size_t>(rows) * (cols + 1)) {}

  Rat& at(int i, int j) { return t_[static_cast<std::size_t>(i) * (cols_ + 1) + j]; }
  Rat& rhs(int i) { return at(i, cols_); }

  void pivot(int pr, int pc) {
    Rat inv = at(pr, pc);
    for (int j = 0; j <= cols_; ++j) at(pr, j) /= inv;
    for (int i = 0; i < rows_; ++i) {
      if (i == pr || at(i, pc) == 0) continue;
      Rat f = at(i, pc);
      for (int j = 0; j <= cols_; ++j)
        if (at(pr, j) != 0) at(i, j) -= f * at(pr, j);
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_, cols_;
  std::vector<Rat> t_;
};

// Bland's rule: entering column is the lowest-index improving one; the
// ratio test breaks ties by lowest basic variable index. Returns false at
// optimality, throws LpStatus-like flag via out-parameter on unbounded.
bool bland_step(Tableau& t, std::vector<int>& basic,
                const std::vector<Rat>& cost, std::vector<Rat>& reduced,
                const std::vector<char>& allowed, bool& unbounded) {
  int enter = -1;
  for (int j = 0; j < t.cols(); ++j) {
    if (!allowed[j]) continue;
    if (reduced[j] > 0) { enter = j; break; }
  }
  if (enter < 0) return false;

  int leave = -1;
  Rat best;
  for (int i = 0; i < t.rows(); ++i) {
    if (t.at(i, enter) <= 0) continue;
    Rat ratio = t.rhs(i) / t.at(i, enter);
    if (leave < 0 || ratio < best ||
        (ratio == best && basic[i] < basic[leave])) {
      leave = i;
      best = ratio;
    }
  }
  if (leave < 0) {
    unbounded = true;
    return false;
  }

  t.pivot(leave, enter);
  basic[leave] = enter;
  // Recompute reduced costs for the touched row combination.
  for (int j = 0; j < t.cols(); ++j) reduced[j] = cost[j];
  std::vector<Rat> y(t.rows());
  for (int i = 0; i < t.rows(); ++i) y[i] = cost[basic[i]];
  for (int j = 0; j < t.cols(); ++j)
    for (int i = 0; i < t.rows(); ++i)
      if (t.at(i, j) != 0 && y[i] != 0) reduced[j] -= y[i] * t.at(i, j);
  return true;
}

void run_simplex(Tableau& t, std::vector<int>& basic,
                 const std::vector<Rat>& cost,
                 const std::vector<char>& allowed, bool& unbounded) {
  std::vector<Rat> reduced(t.cols());
  std::vector<Rat> y(t.rows());
  for (int i = 0; i < t.rows(); ++i) y[i] = cost[basic[i]];
  for (int j = 0; j < t.cols(); ++j) {
    reduced[j] = cost[j];
    for (int i = 0; i < t.rows(); ++i)
      if (t.at(i, j) != 0 && y[i] != 0) reduced[j] -= y[i] * t.at(i, j);
  }
  unbounded = false;
  while (bland_step(t, basic, cost, reduced, allowed, unbounded)) {}
}

}  // namespace

LpSolution solve_rational_lp(const RationalLp& lp) {
  // Shifted/split variable encoding. Each original variable maps to one or
  // two nonnegative columns plus an optional range row.
  struct VarMap {
    int col = -1;       // primary column
    int neg_col = -1;   // second column for free variables
    Rat shift;          // x = shift + y (or shift - y when flipped)
    bool flipped = false;
  };
  std::vector<VarMap> vmap(lp.num_vars);
  int ncols = 0;
  std::vector<RationalLp::Row> ineq = lp.inequalities;
  for (int j = 0; j < lp.num_vars; ++j) {
    VarMap& m = vmap[j];
    if (lp.lower[j]) {
      m.col = ncols++;
      m.shift = *lp.lower[j];
      if (lp.upper[j]) {
        RationalLp::Row range;
        range.coeffs.assign(lp.num_vars, Rat(0));
        range.coeffs[j] = 1;
        range.rhs = *lp.upper[j];
        ineq.push_back(std::move(range));
      }
    } else if (lp.upper[j]) {
      m.col = ncols++;
      m.shift = *lp.upper[j];
      m.flipped = true;
    } else {
      m.col = ncols++;
      m.neg_col = ncols++;
    }
  }

  const int n_eq = static_cast<int>(lp.equalities.size());
  const int n_ineq = static_cast<int>(ineq.size());
  const int rows = n_eq + n_ineq;
  const int slack0 = ncols;
  ncols += n_ineq;

  // Assemble rows in y-coordinates; slacks turn inequalities into equalities.
  Tableau t(rows, ncols);  // artificial columns appended later if needed
  auto emit = [&](int r, const RationalLp::Row& row, bool with_slack, int k) {
    Rat rhs = row.rhs;
    for (int j = 0; j < lp.num_vars; ++j) {
      const Rat& c = row.coeffs[j];
      if (c == 0) continue;
      const VarMap& m = vmap[j];
      rhs -= c * m.shift;
      if (m.neg_col >= 0) {
        t.at(r, m.col) += c;
        t.at(r, m.neg_col) -= c;
      } else {
        t.at(r, m.col) += m.flipped ? -c : c;
      }
    }
    if (with_slack) t.at(r, slack0 + k) = 1;
    t.rhs(r) = rhs;
  };
  for (int r = 0; r < n_eq; ++r) emit(r, lp.equalities[r], false, 0);
  for (int k = 0; k < n_ineq; ++k) emit(n_eq + k, ineq[k], true, k);

  // Normalize to nonnegative right-hand sides and pick the starting basis.
  std::vector<int> basic(rows, -1);
  std::vector<int> need_artificial;
  for (int r = 0; r < rows; ++r) {
    if (t.rhs(r) < 0)
      for (int j = 0; j <= t.cols(); ++j) t.at(r, j) = -t.at(r, j);
    if (r >= n_eq && t.at(r, slack0 + (r - n_eq)) == 1)
      basic[r] = slack0 + (r - n_eq);
    else
      need_artificial.push_back(r);
  }

  int art0 = ncols;
  Tableau full(rows, ncols + static_cast<int>(need_artificial.size()));
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < ncols; ++j) full.at(r, j) = t.at(r, j);
    full.rhs(r) = t.rhs(r);
  }
  for (std::size_t k = 0; k < need_artificial.size(); ++k) {
    full.at(need_artificial[k], art0 + static_cast<int>(k)) = 1;
    basic[need_artificial[k]] = art0 + static_cast<int>(k);
  }

  std::vector<char> allowed(full.cols(), 1);
  bool unbounded = false;

  if (!need_artificial.empty()) {
    std::vector<Rat> phase1(full.cols(), Rat(0));
    for (int j = art0; j < full.cols(); ++j) phase1[j] = Rat(-1);
    run_simplex(full, basic, phase1, allowed, unbounded);
    Rat infeas(0);
    for (int r = 0; r < rows; ++r)
      if (basic[r] >= art0) infeas += full.rhs(r);
    if (infeas != 0) return LpSolution{LpStatus::Infeasible, {}, Rat(0)};
    // Pivot lingering artificials out of the basis where possible; rows
    // that cannot be cleared are redundant and stay pinned at zero.
    for (int r = 0; r < rows; ++r) {
      if (basic[r] < art0) continue;
      for (int j = 0; j < art0; ++j) {
        if (full.at(r, j) != 0) {
          full.pivot(r, j);
          basic[r] = j;
          break;
        }
      }
    }
    for (int j = art0; j < full.cols(); ++j) allowed[j] = 0;
  }

  // Phase 2 on the original objective, expressed in y-coordinates.
  std::vector<Rat> cost(full.cols(), Rat(0));
  for (int j = 0; j < lp.num_vars; ++j) {
    const Rat& c = lp.objective[j];
    if (c == 0) continue;
    const VarMap& m = vmap[j];
    if (m.neg_col >= 0) {
      cost[m.col] += c;
      cost[m.neg_col] -= c;
    } else {
      cost[m.col] += m.flipped ? -c : c;
    }
  }
  run_simplex(full, basic, cost, allowed, unbounded);
  if (unbounded) return LpSolution{LpStatus::Unbounded, {}, Rat(0)};

  std::vector<Rat> y(full.cols(), Rat(0));
  for (int r = 0; r < rows; ++r)
    if (basic[r] >= 0 && basic[r] < art0) y[basic[r]] = full.rhs(r);

  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.x.assign(lp.num_vars, Rat(0));
  for (int j = 0; j < lp.num_vars; ++j) {
    const VarMap& m = vmap[j];
    Rat val = y[m.col];
    if (m.neg_col >= 0) val -= y[m.neg_col];
    if (m.flipped) val = -val;
    sol.x[j] = m.shift + val;
  }
  sol.objective_value = 0;
  for (int j = 0; j < lp.num_vars; ++j)
    if (lp.objective[j] != 0) sol.objective_value += lp.objective[j] * sol.x[j];
  return sol;
}

}  // namespace extmle
