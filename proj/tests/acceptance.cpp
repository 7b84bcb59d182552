// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with its elapsed time so the gate is auditable from the output.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <set>

#include "extmle/inference.hpp"
#include "extmle/report.hpp"
#include "oracles.hpp"

using namespace extmle;

namespace {

struct Criterion {
  const char* name;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  bool pass = true;

  explicit Criterion(const char* n) : name(n) {}
  void expect(bool ok) {
    pass &= ok;
    CHECK(ok);
  }
  void finish(double budget_seconds) {
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    expect(secs < budget_seconds);
    std::printf("[acceptance] %-52s %s  (%.2fs, budget %.0fs)\n", name,
                pass ? "PASS" : "FAIL", secs, budget_seconds);
    std::fflush(stdout);
  }
};

std::string fixture(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

DesignMatrix design_for(const ContingencyTable& t, const std::string& model) {
  return build_design_matrix(t.grid(), parse_model(model, t.grid()));
}

oracles::IntMatrix as_int_matrix(const DesignMatrix& a) {
  oracles::IntMatrix m(a.cell_count(),
                       std::vector<Int>(a.column_count(), Int(0)));
  for (int i = 0; i < a.cell_count(); ++i)
    for (int j = 0; j < a.column_count(); ++j) m[i][j] = a.matrix()(i, j);
  return m;
}

struct RandomCase {
  FactorGrid grid;
  ModelSpec model;
  ContingencyTable table;
};

RandomCase random_case(std::mt19937& rng, int max_cells, double zero_prob) {
  for (;;) {
    int nf = 2 + static_cast<int>(rng() % 3);
    std::vector<std::string> names;
    std::vector<int> levels;
    for (int f = 0; f < nf; ++f) {
      names.push_back(std::string(1, static_cast<char>('1' + f)));
      levels.push_back(2 + static_cast<int>(rng() % 2));
    }
    FactorGrid grid(names, levels);
    if (grid.cell_count() > max_cells) continue;

    std::vector<std::vector<int>> terms;
    int nterms = 1 + static_cast<int>(rng() % 3);
    for (int t = 0; t < nterms; ++t) {
      std::vector<int> term;
      for (int f = 0; f < nf; ++f)
        if (rng() % 2) term.push_back(f);
      if (term.empty()) term.push_back(static_cast<int>(rng() % nf));
      terms.push_back(term);
    }
    ModelSpec model(grid, terms);

    std::vector<std::int64_t> counts(grid.cell_count());
    std::bernoulli_distribution zero(zero_prob);
    bool any = false;
    for (auto& c : counts) {
      c = zero(rng) ? 0 : 1 + static_cast<std::int64_t>(rng() % 9);
      any |= c > 0;
    }
    if (!any) continue;
    return RandomCase{grid, model, ContingencyTable(grid, counts)};
  }
}

}  // namespace

TEST_CASE("criterion 1: classic 2^3 pattern reproduction") {
  Criterion c("1. 2^3 [12][13][23] nonexistent-MLE reproduction");

  auto table = load_table(fixture("example1.json"));
  auto a = design_for(table, "[12][13][23]");
  c.expect(a.rank() == 7);

  auto ex = mle_exists(a, table);
  c.expect(!ex.exists);
  c.expect(ex.face.cells == std::vector<int>{1, 2, 3, 4, 5, 6});

  auto v = build_sampling_matrix(SamplingScheme::poisson(), table.grid(), table);
  c.expect(adjusted_df(ex.face, a, v) == 0);

  // exact equality with the observed table: the face-restricted model is
  // saturated and proportional fitting reproduces the counts bit for bit
  FitOptions opts;
  opts.method = FitMethod::Ipf;
  auto fit = fit_extended_mle(a, table, SamplingScheme::poisson(), opts);
  c.expect(fit.converged);
  for (int i = 0; i < 8; ++i)
    c.expect(fit.m_hat(i) == static_cast<double>(table.count(i)));

  // certificate is exactly rational: zero on F, negative off F
  auto av = matvec(a.rational(), ex.face.certificate);
  for (int i = 0; i < 8; ++i)
    c.expect(ex.face.contains(i) ? av[i] == 0 : av[i] < 0);

  c.finish(1.0);
}

TEST_CASE("criterion 2: facet censuses") {
  Criterion c("2. facet censuses 2^3 -> 16, 3^3 -> 207/27");

  auto t2 = load_table(fixture("example1.json"));
  auto a2 = design_for(t2, "[12][13][23]");
  auto census2 = enumerate_facets(a2);
  c.expect(census2.complete);
  c.expect(census2.facets.size() == 16);

  auto t3 = load_table(fixture("example2_pattern1.json"));
  auto a3 = design_for(t3, "[12][13][23]");
  auto census3 = enumerate_facets(a3);
  c.expect(census3.complete);
  c.expect(census3.facets.size() == 207);
  c.expect(census3.zero_margin_count == 27);

  c.finish(60.0);

  if (std::getenv("EXTMLE_RUN_EXTENDED")) {
    Criterion ext("2x. extended: 3^4 4-cycle census -> 1116/36");
    auto t4 = load_table(fixture("example4.json"));
    auto a4 = design_for(t4, "[12][14][23][34]");
    auto census4 = enumerate_facets(a4, 1800);
    ext.expect(census4.complete);
    ext.expect(census4.facets.size() == 1116);
    ext.expect(census4.zero_margin_count == 36);
    ext.finish(1800.0);
  } else {
    std::printf("[acceptance] 2x. extended 3^4 4-cycle census          "
                "SKIPPED (set EXTMLE_RUN_EXTENDED=1)\n");
  }
}

TEST_CASE("criterion 3: 3^3 zero patterns") {
  Criterion c("3. 3^3 [12][13][23] patterns 1-3");

  auto model = std::string("[12][13][23]");
  auto t1 = load_table(fixture("example2_pattern1.json"));
  auto a = design_for(t1, model);
  auto v = build_sampling_matrix(SamplingScheme::poisson(), t1.grid(), t1);

  auto ex1 = mle_exists(a, t1);
  c.expect(!ex1.exists);
  c.expect(ex1.face.cells.size() == 18);
  c.expect(adjusted_df(ex1.face, a, v) == 0);

  auto t2 = load_table(fixture("example2_pattern2.json"));
  auto ex2 = mle_exists(a, t2);
  c.expect(!ex2.exists);
  c.expect(ex2.face.cells.size() == 21);
  // the two sampling zeros that stay estimable: (2,2,3) and (3,1,3)
  const int bold1 = t2.grid().to_linear({1, 1, 2});
  const int bold2 = t2.grid().to_linear({2, 0, 2});
  c.expect(t2.count(bold1) == 0);
  c.expect(t2.count(bold2) == 0);
  c.expect(ex2.face.contains(bold1));
  c.expect(ex2.face.contains(bold2));
  c.expect(adjusted_df(ex2.face, a, v) == 3);

  auto fit2 = fit_extended_mle(a, t2, SamplingScheme::poisson());
  c.expect(fit2.converged);
  c.expect(fit2.m_hat(bold1) > 1e-10);
  c.expect(fit2.m_hat(bold2) > 1e-10);
  for (int i : ex2.face.complement(27)) c.expect(fit2.m_hat(i) == 0.0);

  auto t3 = load_table(fixture("example2_pattern3.json"));
  c.expect(t3.support().size() == 9);  // 18 sampling zeros
  auto ex3 = mle_exists(a, t3);
  c.expect(ex3.exists);

  c.finish(10.0);
}

TEST_CASE("criterion 4: moment-equation property suite") {
  Criterion c("4. moment equations on 200 random tables (I <= 81)");

  std::mt19937 rng(2024);
  int fitted = 0, converged = 0;
  while (fitted < 200) {
    auto rc = random_case(rng, 81, fitted % 3 == 0 ? 0.35 : 0.1);
    ++fitted;
    auto a = build_design_matrix(rc.grid, rc.model);
    ExtendedFit fit;
    fit = fit_extended_mle(a, rc.table, SamplingScheme::poisson());
    if (!fit.converged) continue;
    ++converged;
    c.expect(fit.moment_residual <= 1e-8 * moment_scale(a, rc.table));
    // support exactness comes along for free and is part of the contract
    for (int i = 0; i < a.cell_count(); ++i)
      c.expect(fit.face.contains(i) ? fit.m_hat(i) > 0
                                    : fit.m_hat(i) == 0.0);
  }
  c.expect(converged >= 190);  // nonconvergence must be the rare exception
  std::printf("[acceptance]    (criterion 4: %d/%d fits converged)\n",
              converged, fitted);
  c.finish(300.0);
}

TEST_CASE("criterion 5: oracle equivalences") {
  Criterion c("5. facial-set oracle, IPF vs Newton, scheme identity");

  // facial sets vs brute force on every model with I <= 12
  std::mt19937 rng(99);
  std::vector<std::pair<std::vector<int>, std::string>> configs = {
      {{2, 2}, "[1][2]"},     {{2, 2}, "[12]"},
      {{3, 2}, "[1][2]"},     {{2, 2, 2}, "[12][13][23]"},
      {{2, 2, 2}, "[12][3]"}, {{2, 2, 3}, "[1][2][3]"},
      {{3, 4}, "[1][2]"},     {{2, 2, 3}, "[12][13]"},
  };
  for (const auto& [levels, spec] : configs) {
    std::vector<std::string> names;
    for (std::size_t f = 0; f < levels.size(); ++f)
      names.push_back(std::string(1, static_cast<char>('1' + f)));
    FactorGrid grid(names, levels);
    auto a = build_design_matrix(grid, parse_model(spec, grid));
    auto am = as_int_matrix(a);
    for (int rep = 0; rep < 50; ++rep) {
      std::set<int> s;
      int size = 1 + static_cast<int>(rng() % a.cell_count());
      while (static_cast<int>(s.size()) < size)
        s.insert(static_cast<int>(rng() % a.cell_count()));
      std::vector<int> support(s.begin(), s.end());
      c.expect(facial_set(a, support).cells ==
               oracles::brute_force_facial_set(am, support));
    }
  }

  // IPF vs Newton and Poisson vs product multinomial on random tables
  for (int rep = 0; rep < 25; ++rep) {
    auto rc = random_case(rng, 27, rep % 2 ? 0.25 : 0.0);
    auto a = build_design_matrix(rc.grid, rc.model);

    FitOptions both;
    both.method = FitMethod::Both;
    auto fit = fit_extended_mle(a, rc.table, SamplingScheme::poisson(), both);
    if (fit.converged) c.expect(fit.method_discrepancy <= 1e-6);

    // product multinomial over the levels of a factor in the model; the
    // 1e-8 agreement needs both routes converged well past it
    int factor = rc.model.terms()[0][0];
    auto scheme = SamplingScheme::product_multinomial(
        rc.table, rc.grid.factor_name(factor));
    bool blocks_ok = true;
    for (auto t : scheme.totals) blocks_ok &= t >= 1;
    if (!blocks_ok) continue;
    if (static_cast<int>(scheme.blocks.size()) >= a.rank()) continue;
    FitOptions tight;
    tight.method = FitMethod::Newton;  // Poisson vs multinomial objectives
    tight.tol_moment = 1e-11;
    tight.max_newton_iter = 300;
    auto ps = fit_extended_mle(a, rc.table, SamplingScheme::poisson(), tight);
    auto pm = fit_extended_mle(a, rc.table, scheme, tight);
    if (ps.converged && pm.converged)
      c.expect((ps.m_hat - pm.m_hat).cwiseAbs().maxCoeff() <= 1e-8);
  }

  c.finish(300.0);
}

TEST_CASE("criterion 6: toric geometry and gradient checks") {
  Criterion c("6. toric residuals and finite-difference gradients");

  std::mt19937 rng(4242);
  std::normal_distribution<double> gauss;
  int verified = 0;
  for (int rep = 0; rep < 20; ++rep) {
    auto rc = random_case(rng, 27, rep % 2 ? 0.3 : 0.0);
    auto a = build_design_matrix(rc.grid, rc.model);
    auto fit = fit_extended_mle(a, rc.table, SamplingScheme::poisson());
    if (!fit.converged) continue;
    auto v = build_sampling_matrix(SamplingScheme::poisson(), rc.grid, rc.table);
    auto rec = verify_fit(fit, a, v, rc.table);
    c.expect(rec.verified);
    c.expect(rec.toric_residual <= 1e-8);
    ++verified;

    // finite-difference gradient at the Newton optimum
    Eigen::MatrixXd b = face_basis(a, fit.face);
    Eigen::VectorXd mu(fit.face.cells.size());
    for (std::size_t r = 0; r < fit.face.cells.size(); ++r)
      mu(static_cast<int>(r)) = std::log(fit.m_hat(fit.face.cells[r]));
    Eigen::VectorXd nf(fit.face.cells.size());
    for (std::size_t r = 0; r < fit.face.cells.size(); ++r)
      nf(static_cast<int>(r)) =
          static_cast<double>(rc.table.count(fit.face.cells[r]));
    auto objective = [&](const Eigen::VectorXd& x) {
      double val = 0;
      for (int i = 0; i < x.size(); ++i)
        val += nf(i) * x(i) - std::exp(x(i));
      return val;
    };
    const double scale = 1.0 + std::abs(objective(mu));
    const double h = 1e-6;
    for (int dir_rep = 0; dir_rep < 20; ++dir_rep) {
      Eigen::VectorXd d(b.cols());
      for (int k = 0; k < d.size(); ++k) d(k) = gauss(rng);
      d.normalize();
      Eigen::VectorXd step = b * d;
      double fd = (objective(mu + h * step) - objective(mu - h * step)) / (2 * h);
      c.expect(std::abs(fd) <= 1e-5 * scale);
    }
  }
  c.expect(verified >= 15);
  c.finish(120.0);
}

TEST_CASE("criterion 7: classical sanity") {
  Criterion c("7. 2x2 independence closed form, df, G2/X2");

  auto table = load_table(fixture("independence_2x2.json"));
  auto a = design_for(table, "[1][2]");
  c.expect(a.rank() == 3);

  auto fit = fit_extended_mle(a, table, SamplingScheme::poisson());
  c.expect(fit.converged);
  const double expect[4] = {1.5, 3.5, 1.5, 3.5};
  for (int i = 0; i < 4; ++i)
    c.expect(std::abs(fit.m_hat(i) - expect[i]) <= 1e-10);

  auto v = build_sampling_matrix(SamplingScheme::poisson(), table.grid(), table);
  int df = adjusted_df(fit.face, a, v);
  c.expect(df == 1);

  auto gof = goodness_of_fit(table, fit, df);
  double x2 = 0.25 * (1 / 1.5 + 1 / 3.5 + 1 / 1.5 + 1 / 3.5);
  double g2 = 2.0 * (2 * std::log(2 / 1.5) + 3 * std::log(3 / 3.5) +
                     1 * std::log(1 / 1.5) + 4 * std::log(4 / 3.5));
  c.expect(std::abs(gof.x2 - x2) <= 1e-10);
  c.expect(std::abs(gof.g2 - g2) <= 1e-10);

  c.finish(1.0);
}
