#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "extmle/polyhedra.hpp"
#include "extmle/simplex.hpp"
#include "extmle/tables.hpp"
#include "oracles.hpp"

using namespace extmle;

TEST_CASE("bounded maximization") {
  RationalLp lp(1);
  lp.objective[0] = 1;
  lp.lower[0] = Rat(0);
  RationalLp::Row r;
  r.coeffs = {Rat(1)};
  r.rhs = 1;
  lp.inequalities.push_back(r);
  auto sol = solve_rational_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == 1);
  CHECK(sol.objective_value == 1);
}

TEST_CASE("unbounded") {
  RationalLp lp(1);
  lp.objective[0] = 1;
  lp.lower[0] = Rat(0);
  auto sol = solve_rational_lp(lp);
  CHECK(sol.status == LpStatus::Unbounded);
}

TEST_CASE("infeasible") {
  RationalLp lp(1);
  lp.objective[0] = 1;
  lp.lower[0] = Rat(0);
  RationalLp::Row eq;
  eq.coeffs = {Rat(1)};
  eq.rhs = -3;
  lp.equalities.push_back(eq);
  auto sol = solve_rational_lp(lp);
  CHECK(sol.status == LpStatus::Infeasible);
}

TEST_CASE("equalities with free variables and exact fractions") {
  // maximize x + y s.t. 2x + 3y = 7, x - y <= 1, y <= 2
  RationalLp lp(2);
  lp.objective = {Rat(1), Rat(1)};
  RationalLp::Row eq;
  eq.coeffs = {Rat(2), Rat(3)};
  eq.rhs = 7;
  lp.equalities.push_back(eq);
  RationalLp::Row i1;
  i1.coeffs = {Rat(1), Rat(-1)};
  i1.rhs = 1;
  lp.inequalities.push_back(i1);
  lp.upper[1] = Rat(2);
  auto sol = solve_rational_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  // optimum at x - y = 1 and 2x + 3y = 7: x = 2, y = 1
  CHECK(sol.x[0] == 2);
  CHECK(sol.x[1] == 1);
  CHECK(sol.objective_value == 3);
}

TEST_CASE("degenerate LP cycles are broken by Bland's rule") {
  // classic Beale-style degeneracy; just require termination + optimality
  RationalLp lp(4);
  lp.objective = {Rat(3, 4), Rat(-150), Rat(1, 50), Rat(-6)};
  for (int j = 0; j < 4; ++j) lp.lower[j] = Rat(0);
  RationalLp::Row r1;
  r1.coeffs = {Rat(1, 4), Rat(-60), Rat(-1, 25), Rat(9)};
  r1.rhs = 0;
  RationalLp::Row r2;
  r2.coeffs = {Rat(1, 2), Rat(-90), Rat(-1, 50), Rat(3)};
  r2.rhs = 0;
  RationalLp::Row r3;
  r3.coeffs = {Rat(0), Rat(0), Rat(1), Rat(0)};
  r3.rhs = 1;
  lp.inequalities = {r1, r2, r3};
  auto sol = solve_rational_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == Rat(1, 20));
}

TEST_CASE("facial-set LP of the classic 2^3 example") {
  // Support = the 6 positive cells; both zero cells are exposable, so the
  // slack optimum saturates at 1 each and the facial set stays proper.
  FactorGrid g({"1", "2", "3"}, {2, 2, 2});
  auto a = build_design_matrix(g, parse_model("[12][13][23]", g));
  std::vector<int> support = {1, 2, 3, 4, 5, 6};
  std::vector<int> off_cells = {0, 7};

  // the documented formulation, spelled out through the public LP type:
  // c free, s in [0,1]; (a_i, c) = 0 on the support, (a_i, c) + s_i <= 0
  // off it; maximize sum s.
  const int d = a.column_count();
  RationalLp lp(d + 2);
  for (int i : support) {
    RationalLp::Row eq;
    eq.coeffs.assign(d + 2, Rat(0));
    for (int j = 0; j < d; ++j) eq.coeffs[j] = a.matrix()(i, j);
    eq.rhs = 0;
    lp.equalities.push_back(eq);
  }
  for (std::size_t k = 0; k < off_cells.size(); ++k) {
    RationalLp::Row r;
    r.coeffs.assign(d + 2, Rat(0));
    for (int j = 0; j < d; ++j) r.coeffs[j] = a.matrix()(off_cells[k], j);
    r.coeffs[d + static_cast<int>(k)] = 1;
    r.rhs = 0;
    lp.inequalities.push_back(r);
    lp.objective[d + static_cast<int>(k)] = 1;
    lp.lower[d + static_cast<int>(k)] = Rat(0);
    lp.upper[d + static_cast<int>(k)] = Rat(1);
  }
  auto sol = solve_rational_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == 2);  // both zero cells exposed at the cap
  CHECK(sol.x[d] == 1);
  CHECK(sol.x[d + 1] == 1);

  auto f = facial_set(a, support);
  CHECK_FALSE(f.is_full);
  CHECK(f.cells == support);

  // cross-check against subset brute force
  oracles::IntMatrix am(a.cell_count(),
                        std::vector<Int>(a.column_count(), Int(0)));
  for (int i = 0; i < a.cell_count(); ++i)
    for (int j = 0; j < a.column_count(); ++j) am[i][j] = a.matrix()(i, j);
  CHECK(oracles::brute_force_facial_set(am, support) == support);
}
