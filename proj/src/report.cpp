#include "extmle/report.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "extmle/inference.hpp"

namespace extmle {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json multi_index(const FactorGrid& grid, int cell) {
  ordered_json arr = ordered_json::array();
  for (int x : grid.to_multi(cell)) arr.push_back(x + 1);
  return arr;
}

ordered_json cell_list(const FactorGrid& grid, const std::vector<int>& cells) {
  ordered_json arr = ordered_json::array();
  for (int i : cells) arr.push_back(multi_index(grid, i));
  return arr;
}

ordered_json rational_strings(const std::vector<Rat>& v) {
  ordered_json arr = ordered_json::array();
  for (const Rat& q : v) arr.push_back(q.str());
  return arr;
}

ordered_json rounded_vector(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(round12(v(i)));
  return arr;
}

const char* method_name(FitMethod m) {
  switch (m) {
    case FitMethod::Ipf: return "ipf";
    case FitMethod::Newton: return "newton";
    case FitMethod::Both: return "both";
  }
  return "?";
}

ordered_json echo_request(const AnalysisRequest& r) {
  ordered_json j;
  j["table"] = r.table_path;
  j["model"] = r.model;
  j["scheme"] = r.scheme;
  j["method"] = method_name(r.method);
  j["tol_moment"] = r.tol_moment;
  return j;
}

struct Pipeline {
  ContingencyTable table;
  ModelSpec model;
  DesignMatrix design;
  SamplingScheme scheme;

  explicit Pipeline(const AnalysisRequest& r)
      : table(load_table(r.table_path)),
        model(parse_model(r.model, table.grid())),
        design(build_design_matrix(table.grid(), model)),
        scheme(make_scheme(r.scheme, table)) {}
};

}  // namespace

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

SamplingScheme make_scheme(const std::string& descriptor,
                           const ContingencyTable& table) {
  if (descriptor == "poisson") return SamplingScheme::poisson();
  if (descriptor == "multinomial") return SamplingScheme::multinomial(table);
  const std::string pm = "product-multinomial:";
  if (descriptor.rfind(pm, 0) == 0)
    return SamplingScheme::product_multinomial(table,
                                               descriptor.substr(pm.size()));
  const std::string pom = "poisson-multinomial:";
  if (descriptor.rfind(pom, 0) == 0) {
    std::string rest = descriptor.substr(pom.size());
    auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument(
          "poisson-multinomial scheme needs FACTOR:FREE_LEVEL");
    return SamplingScheme::poisson_multinomial(
        table, rest.substr(0, colon),
        std::stoi(rest.substr(colon + 1)) - 1);
  }
  throw std::invalid_argument("unknown sampling scheme '" + descriptor + "'");
}

AnalysisOutcome run_analysis(const AnalysisRequest& request) {
  const auto t0 = std::chrono::steady_clock::now();
  Pipeline p(request);

  FitOptions opts;
  opts.method = request.method;
  opts.tol_moment = request.tol_moment;
  if (request.max_iter > 0) {
    opts.max_ipf_cycles = request.max_iter;
    opts.max_newton_iter = request.max_iter;
  }

  SamplingMatrix v = build_sampling_matrix(p.scheme, p.table.grid(), p.table);
  if (v.m() > 0) require_scheme_in_model(p.design, v);

  ExtendedFit fit = fit_extended_mle(p.design, p.table, p.scheme, opts);
  int df = adjusted_df(fit.face, p.design, v);
  EstimabilityReport est = estimable_directions(p.design, v, fit.face);
  GofReport gof = goodness_of_fit(p.table, fit, df);
  VerificationRecord ver = verify_fit(fit, p.design, v, p.table,
                                      request.tol_moment);

  const FactorGrid& grid = p.table.grid();
  ordered_json rep;
  rep["request"] = echo_request(request);
  ordered_json labels = ordered_json::array();
  for (int j = 0; j < p.design.column_count(); ++j)
    labels.push_back(p.design.column_name(j));
  rep["design"] = {{"cells", p.design.cell_count()},
                   {"columns", p.design.column_count()},
                   {"rank", p.design.rank()},
                   {"sampling_constraints", v.m()},
                   {"column_labels", std::move(labels)}};
  if (request.verbose) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < p.design.cell_count(); ++i) {
      ordered_json row = ordered_json::array();
      for (int j = 0; j < p.design.column_count(); ++j)
        row.push_back(p.design.matrix()(i, j));
      rows.push_back(std::move(row));
    }
    rep["design"]["matrix"] = std::move(rows);
  }
  rep["mle_exists"] = fit.face.is_full;
  rep["facial_set"] = {{"size", static_cast<int>(fit.face.cells.size())},
                       {"is_full", fit.face.is_full},
                       {"cells", cell_list(grid, fit.face.cells)},
                       {"certificate", rational_strings(fit.face.certificate)}};
  rep["likelihood_zeros"] = cell_list(grid, fit.likelihood_zeros);
  rep["fit"] = {{"method", method_name(fit.method)},
                {"converged", fit.converged},
                {"m_hat", rounded_vector(fit.m_hat)},
                {"ipf_iterations", fit.ipf_iterations},
                {"newton_iterations", fit.newton_iterations},
                {"moment_residual", round12(fit.moment_residual)},
                {"method_discrepancy", round12(fit.method_discrepancy)},
                {"log_likelihood", round12(fit.log_likelihood)}};
  if (!fit.diagnostic.empty()) rep["fit"]["diagnostic"] = fit.diagnostic;
  rep["inference"] = {
      {"df_adjusted", gof.df},
      {"G2", round12(gof.g2)},
      {"X2", round12(gof.x2)},
      {"p_G2", gof.p_g2 ? ordered_json(round12(*gof.p_g2)) : ordered_json()},
      {"p_X2", gof.p_x2 ? ordered_json(round12(*gof.p_x2)) : ordered_json()},
      {"warnings", gof.warnings},
      {"estimable_dimension", static_cast<int>(est.basis.cols())},
      {"nonestimable_dimension", est.nonestimable_dimension}};
  if (request.verbose && est.nonestimable_dimension > 0) {
    ordered_json basis = ordered_json::array();
    for (const auto& vec : nonestimable_basis(p.design, fit.face))
      basis.push_back(rational_strings(vec));
    rep["inference"]["nonestimable_basis"] = std::move(basis);
  }
  rep["verification"] = {{"stamp", ver.verified ? "VERIFIED" : "FAILED"},
                         {"moment_residual", round12(ver.moment_residual)},
                         {"support_exact", ver.support_exact},
                         {"toric_residual", round12(ver.toric_residual)},
                         {"block_totals_ok", ver.block_totals_ok},
                         {"failures", ver.failures}};
  rep["timing_ms"] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();

  AnalysisOutcome out;
  out.report = std::move(rep);
  out.exit_code = ver.verified ? 0 : 2;
  return out;
}

AnalysisOutcome run_check(const AnalysisRequest& request) {
  const auto t0 = std::chrono::steady_clock::now();
  Pipeline p(request);
  ExistenceResult ex = mle_exists(p.design, p.table);
  const FactorGrid& grid = p.table.grid();

  ordered_json rep;
  rep["request"] = echo_request(request);
  rep["design"] = {{"cells", p.design.cell_count()},
                   {"columns", p.design.column_count()},
                   {"rank", p.design.rank()}};
  rep["mle_exists"] = ex.exists;
  rep["facial_set"] = {{"size", static_cast<int>(ex.face.cells.size())},
                       {"is_full", ex.face.is_full},
                       {"cells", cell_list(grid, ex.face.cells)},
                       {"certificate", rational_strings(ex.face.certificate)}};
  rep["likelihood_zeros"] =
      cell_list(grid, ex.face.complement(p.design.cell_count()));
  rep["timing_ms"] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  return AnalysisOutcome{std::move(rep), 0};
}

AnalysisOutcome run_facet_census(const AnalysisRequest& request) {
  const auto t0 = std::chrono::steady_clock::now();
  Pipeline p(request);
  const FactorGrid& grid = p.table.grid();

  ordered_json rep;
  rep["request"] = echo_request(request);
  rep["design"] = {{"cells", p.design.cell_count()},
                   {"columns", p.design.column_count()},
                   {"rank", p.design.rank()}};
  AnalysisOutcome out;
  try {
    FacetCensus census = enumerate_facets(p.design, request.budget_seconds);
    rep["facet_count"] = static_cast<int>(census.facets.size());
    rep["zero_margin_count"] = census.zero_margin_count;
    rep["complete"] = census.complete;
    ordered_json facets = ordered_json::array();
    for (const Facet& f : census.facets) {
      ordered_json fj;
      fj["cells"] = cell_list(grid, f.face.cells);
      fj["certificate"] = rational_strings(f.face.certificate);
      fj["zero_margin"] = f.zero_margin;
      facets.push_back(std::move(fj));
    }
    rep["facets"] = std::move(facets);
    out.exit_code = 0;
    if (request.expect_facets &&
        *request.expect_facets != static_cast<int>(census.facets.size()))
      out.exit_code = 2;
    if (request.expect_zero_margin &&
        *request.expect_zero_margin != census.zero_margin_count)
      out.exit_code = 2;
    rep["expected_match"] = out.exit_code == 0;
  } catch (const BudgetExceeded&) {
    rep["complete"] = false;
    rep["facet_count"] = nullptr;
    out.exit_code = 3;
  }
  rep["timing_ms"] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  out.report = std::move(rep);
  return out;
}

std::string render_summary(const ordered_json& report) {
  std::ostringstream os;
  auto line = [&](const std::string& s) { os << s << "\n"; };
  if (report.contains("design")) {
    const auto& d = report["design"];
    os << "design: " << d["cells"] << " cells, " << d["columns"]
       << " columns, rank " << d["rank"] << "\n";
  }
  if (report.contains("mle_exists")) {
    line(report["mle_exists"].get<bool>()
             ? "MLE exists: yes (margins interior to the marginal cone)"
             : "MLE exists: NO (margins on the boundary; extended MLE "
               "computed)");
    const auto& f = report["facial_set"];
    os << "facial set: " << f["size"] << " of " << report["design"]["cells"]
       << " cells\n";
    if (report.contains("likelihood_zeros") &&
        !report["likelihood_zeros"].empty())
      os << "likelihood zeros: " << report["likelihood_zeros"].dump() << "\n";
  }
  if (report.contains("fit")) {
    const auto& fit = report["fit"];
    os << "fit (" << fit["method"].get<std::string>()
       << "): converged=" << fit["converged"]
       << " moment_residual=" << fit["moment_residual"] << "\n";
    os << "m_hat: " << fit["m_hat"].dump() << "\n";
  }
  if (report.contains("inference")) {
    const auto& inf = report["inference"];
    os << "df (adjusted): " << inf["df_adjusted"] << "  G2: " << inf["G2"]
       << "  X2: " << inf["X2"] << "\n";
    if (!inf["p_G2"].is_null())
      os << "p-values: G2 " << inf["p_G2"] << ", X2 " << inf["p_X2"] << "\n";
    for (const auto& w : inf["warnings"])
      os << "warning: " << w.get<std::string>() << "\n";
  }
  if (report.contains("verification"))
    os << "verification: "
       << report["verification"]["stamp"].get<std::string>() << "\n";
  if (report.contains("facet_count") && !report["facet_count"].is_null())
    os << "facets: " << report["facet_count"] << " ("
       << report["zero_margin_count"] << " zero-margin)\n";
  return os.str();
}

}  // namespace extmle
