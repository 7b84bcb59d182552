#pragma once

#include <optional>
#include <vector>

#include "extmle/rational.hpp"

namespace extmle {

// A linear program in exact rational arithmetic. Maximization convention.
// Variable bounds default to free; std::nullopt means unbounded on that
// side. This path is tolerance-free by design: facial-set membership is a
// boundary question and must be decided exactly.
struct RationalLp {
  struct Row {
    std::vector<Rat> coeffs;
    Rat rhs;
  };

  int num_vars = 0;
  std::vector<Rat> objective;               // maximize objective . x
  std::vector<Row> equalities;              // coeffs . x == rhs
  std::vector<Row> inequalities;            // coeffs . x <= rhs
  std::vector<std::optional<Rat>> lower;    // per-variable lower bounds
  std::vector<std::optional<Rat>> upper;    // per-variable upper bounds

  explicit RationalLp(int vars)
      : num_vars(vars), objective(vars, Rat(0)), lower(vars), upper(vars) {}
};

enum class LpStatus { Optimal, Unbounded, Infeasible };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<Rat> x;
  Rat objective_value;
};

// Two-phase primal simplex with Bland's pivoting rule; exact, deterministic
// and cycle-free. Unbounded/infeasible are results, not errors.
LpSolution solve_rational_lp(const RationalLp& lp);

}  // namespace extmle
