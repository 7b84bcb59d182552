#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "extmle/fitting.hpp"

using namespace extmle;

namespace {

DesignMatrix indep22() {
  FactorGrid g({"1", "2"}, {2, 2});
  return build_design_matrix(g, parse_model("[1][2]", g));
}

DesignMatrix no2nd222() {
  FactorGrid g({"1", "2", "3"}, {2, 2, 2});
  return build_design_matrix(g, parse_model("[12][13][23]", g));
}

FacialSet full_face(const DesignMatrix& a) {
  std::vector<int> all(a.cell_count());
  for (int i = 0; i < a.cell_count(); ++i) all[i] = i;
  return facial_set(a, all);
}

}  // namespace

TEST_CASE("independence closed form via every route") {
  auto a = indep22();
  ContingencyTable n(a.grid(), {2, 3, 1, 4});
  const std::vector<double> expect = {1.5, 3.5, 1.5, 3.5};

  auto face = full_face(a);
  auto viaipf = ipf(a, n, face, 1e-10, 100);
  CHECK(viaipf.converged);
  CHECK(viaipf.iterations <= 2);
  auto vianewton = newton_fit(a, n, face, 1e-10, 100);
  CHECK(vianewton.converged);
  CHECK(vianewton.iterations <= 10);
  for (int i = 0; i < 4; ++i) {
    CHECK(viaipf.m(i) == doctest::Approx(expect[i]).epsilon(1e-9));
    CHECK(vianewton.m(i) == doctest::Approx(expect[i]).epsilon(1e-10));
  }

  auto fit = fit_extended_mle(a, n, SamplingScheme::poisson());
  CHECK(fit.converged);
  CHECK(fit.face.is_full);
  for (int i = 0; i < 4; ++i)
    CHECK(fit.m_hat(i) == doctest::Approx(expect[i]).epsilon(1e-10));
}

TEST_CASE("saturated model returns the table") {
  FactorGrid g({"1", "2"}, {2, 2});
  auto sat = build_design_matrix(g, parse_model("[12]", g));
  ContingencyTable n(g, {3, 1, 4, 1});
  auto fit = fit_extended_mle(sat, n, SamplingScheme::poisson());
  CHECK(fit.converged);
  for (int i = 0; i < 4; ++i)
    CHECK(fit.m_hat(i) == doctest::Approx(static_cast<double>(n.count(i)))
                              .epsilon(1e-9));
}

TEST_CASE("classic 2^3 pattern: extended MLE equals the table on the face") {
  auto a = no2nd222();
  ContingencyTable n(a.grid(), {0, 1, 1, 1, 1, 1, 1, 0});
  auto fit = fit_extended_mle(a, n, SamplingScheme::poisson());
  CHECK(fit.converged);
  CHECK_FALSE(fit.face.is_full);
  CHECK(fit.face.cells == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK(fit.likelihood_zeros == std::vector<int>{0, 7});
  CHECK(fit.m_hat(0) == 0.0);  // exact zero
  CHECK(fit.m_hat(7) == 0.0);
  for (int i = 1; i <= 6; ++i)
    CHECK(fit.m_hat(i) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("ipf respects a zero margin") {
  auto a = indep22();
  ContingencyTable n(a.grid(), {0, 0, 1, 4});  // first row all zero
  auto r = ipf(a, n, full_face(a), 1e-9, 50);
  CHECK(r.converged);
  CHECK(r.m(0) == 0.0);
  CHECK(r.m(1) == 0.0);
  CHECK(r.m(2) == doctest::Approx(1.0));
  CHECK(r.m(3) == doctest::Approx(4.0));
}

TEST_CASE("Newton start at zero on a saturated model stays at the table") {
  // theta = 0 gives mu = 0 and m = 1; with n identically 1 the gradient is
  // zero at the start: the optimizer must accept it immediately.
  FactorGrid g({"1", "2"}, {2, 2});
  auto sat = build_design_matrix(g, parse_model("[12]", g));
  ContingencyTable ones(g, {1, 1, 1, 1});
  auto r = newton_fit(sat, ones, full_face(sat), 1e-9, 50,
                      Eigen::VectorXd::Zero(4));
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  for (int i = 0; i < 4; ++i) CHECK(r.m(i) == doctest::Approx(1.0));
}

TEST_CASE("IPF and Newton agree on random positive 3^3 tables") {
  FactorGrid g({"1", "2", "3"}, {3, 3, 3});
  auto a = build_design_matrix(g, parse_model("[12][13][23]", g));
  std::mt19937 rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<std::int64_t> counts(27);
    for (auto& c : counts) c = 1 + rng() % 9;
    ContingencyTable n(g, counts);
    auto face = full_face(a);
    auto r1 = ipf(a, n, face, 1e-9, 10000);
    auto r2 = newton_fit(a, n, face, 1e-9, 100);
    REQUIRE(r1.converged);
    REQUIRE(r2.converged);
    CHECK((r1.m - r2.m).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("poisson log-likelihood") {
  FactorGrid g({"1", "2"}, {2, 2});
  ContingencyTable zero(g, {0, 0, 0, 0});
  CHECK(poisson_loglik(Eigen::VectorXd::Zero(4), zero) ==
        doctest::Approx(-4.0));

  ContingencyTable n(g, {2, 3, 1, 4});
  Eigen::VectorXd mu(4);
  mu << std::log(1.5), std::log(3.5), std::log(1.5), std::log(3.5);
  // direct summation oracle
  double direct = 0;
  std::vector<double> m = {1.5, 3.5, 1.5, 3.5};
  for (int i = 0; i < 4; ++i) {
    direct += n.count(i) * std::log(m[i]) - m[i];
    direct -= std::lgamma(static_cast<double>(n.count(i)) + 1);
  }
  CHECK(poisson_loglik(mu, n) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(poisson_loglik_mean(Eigen::Map<Eigen::VectorXd>(m.data(), 4), n) ==
        doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("product multinomial log-likelihood at beta = 0") {
  FactorGrid g({"1", "2"}, {2, 2});
  ContingencyTable n(g, {2, 3, 1, 4});
  auto scheme = SamplingScheme::multinomial(n);
  double expect = -10.0 * std::log(4.0);
  for (int i = 0; i < 4; ++i)
    expect -= std::lgamma(static_cast<double>(n.count(i)) + 1);
  CHECK(product_multinomial_loglik(Eigen::VectorXd::Zero(4), n, scheme) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("scheme identity: Poisson and multinomial objectives meet") {
  auto a = indep22();
  ContingencyTable n(a.grid(), {2, 3, 1, 4});

  auto poisson = fit_extended_mle(a, n, SamplingScheme::poisson());
  auto multi = fit_extended_mle(a, n, SamplingScheme::multinomial(n));
  auto prod = fit_extended_mle(a, n, SamplingScheme::product_multinomial(n, "1"));
  REQUIRE(poisson.converged);
  REQUIRE(multi.converged);
  REQUIRE(prod.converged);
  CHECK((poisson.m_hat - multi.m_hat).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((poisson.m_hat - prod.m_hat).cwiseAbs().maxCoeff() < 1e-8);

  // block totals of the product fit reproduce the N_j
  CHECK(prod.m_hat(0) + prod.m_hat(1) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(prod.m_hat(2) + prod.m_hat(3) == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("scheme identity holds on the boundary too") {
  // nonexistent MLE: the extended fits of both objectives coincide
  auto a = no2nd222();
  ContingencyTable n(a.grid(), {0, 2, 3, 1, 4, 1, 2, 0});
  auto poisson = fit_extended_mle(a, n, SamplingScheme::poisson());
  auto multi = fit_extended_mle(a, n, SamplingScheme::multinomial(n));
  REQUIRE(poisson.converged);
  REQUIRE(multi.converged);
  CHECK_FALSE(poisson.face.is_full);
  CHECK(poisson.face.cells == multi.face.cells);
  CHECK((poisson.m_hat - multi.m_hat).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(multi.m_hat(0) == 0.0);
  CHECK(multi.m_hat(7) == 0.0);
}

TEST_CASE("poisson-multinomial routes through the Poisson objective") {
  auto a = indep22();
  ContingencyTable n(a.grid(), {2, 3, 1, 4});
  auto scheme = SamplingScheme::poisson_multinomial(n, "1", 1);
  auto fit = fit_extended_mle(a, n, scheme, {});
  REQUIRE(fit.converged);
  CHECK(fit.m_hat(0) + fit.m_hat(1) == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("the multinomial likelihood is invariant along the sampling subspace") {
  FactorGrid g({"1", "2"}, {2, 2});
  ContingencyTable n(g, {2, 3, 1, 4});
  auto prod = SamplingScheme::product_multinomial(n, "1");
  Eigen::VectorXd beta(4);
  beta << 0.3, -0.2, 0.1, -0.4;
  double base = product_multinomial_loglik(beta, n, prod);
  for (double c : {-1.25, 0.5, 2.0}) {
    Eigen::VectorXd shifted = beta;
    for (int i : prod.blocks[0]) shifted(i) += c;  // move along chi_1
    CHECK(product_multinomial_loglik(shifted, n, prod) ==
          doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("uniqueness probe: random restarts reach the same optimum") {
  auto a = no2nd222();
  ContingencyTable n(a.grid(), {3, 1, 4, 1, 5, 9, 2, 6});
  auto face = full_face(a);
  auto reference = newton_fit(a, n, face, 1e-9, 200);
  REQUIRE(reference.converged);

  std::mt19937 rng(13);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd theta0(a.rank());
    for (int k = 0; k < theta0.size(); ++k) theta0(k) = unif(rng);
    auto restart = newton_fit(a, n, face, 1e-9, 200, theta0);
    REQUIRE(restart.converged);
    CHECK((restart.m - reference.m).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("sparse 3^3 pattern: margins match and methods agree") {
  auto table = load_table(std::string(FIXTURE_DIR) + "/example2_pattern2.json");
  auto a = build_design_matrix(table.grid(),
                               parse_model("[12][13][23]", table.grid()));
  auto fit = fit_extended_mle(a, table, SamplingScheme::poisson());
  REQUIRE(fit.converged);
  CHECK(fit.moment_residual <= 1e-8 * moment_scale(a, table));
  CHECK(fit.method_discrepancy <= 1e-6);
  CHECK(fit.face.cells.size() == 21);
}

TEST_CASE("finite-difference gradient vanishes at the Newton optimum") {
  auto a = no2nd222();
  ContingencyTable n(a.grid(), {3, 1, 4, 1, 5, 9, 2, 6});
  auto face = full_face(a);
  auto opt = newton_fit(a, n, face, 1e-10, 200);
  REQUIRE(opt.converged);

  Eigen::MatrixXd b = face_basis(a, face);
  Eigen::VectorXd mu = opt.m.array().log();
  const double base = poisson_loglik(mu, n);
  const double scale = 1.0 + std::abs(base);
  std::mt19937 rng(3);
  std::normal_distribution<double> gauss;
  const double h = 1e-6;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd dir(b.cols());
    for (int k = 0; k < dir.size(); ++k) dir(k) = gauss(rng);
    dir.normalize();
    Eigen::VectorXd step = b * dir;  // direction inside span(B_F)
    double up = poisson_loglik(mu + h * step, n);
    double down = poisson_loglik(mu - h * step, n);
    double fd = (up - down) / (2 * h);
    CHECK(std::abs(fd) <= 1e-5 * scale);
  }
}

TEST_CASE("nonconvergence is reported, not hidden") {
  FactorGrid g({"1", "2", "3"}, {3, 3, 3});
  auto a = build_design_matrix(g, parse_model("[12][13][23]", g));
  std::vector<std::int64_t> counts(27, 1);
  counts[0] = 1000;
  ContingencyTable n(g, counts);
  FitOptions opts;
  opts.method = FitMethod::Ipf;
  opts.max_ipf_cycles = 1;  // starve the iteration budget
  auto fit = fit_extended_mle(a, n, SamplingScheme::poisson(), opts);
  CHECK_FALSE(fit.converged);
  CHECK(fit.diagnostic.find("did not converge") != std::string::npos);
  CHECK(fit.moment_residual > 0);
}
