#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "extmle/report.hpp"

namespace {

void add_common(CLI::App* cmd, extmle::AnalysisRequest& req) {
  cmd->add_option("--table", req.table_path, "table document (JSON)")
      ->required();
  cmd->add_option("--model", req.model, "generating class, e.g. [12][13][23]")
      ->required();
}

int emit(const extmle::AnalysisOutcome& out, const std::string& report_path,
         bool verbose) {
  if (!report_path.empty()) {
    std::ofstream f(report_path);
    if (!f) {
      std::cerr << "error: cannot write report to " << report_path << "\n";
      return 1;
    }
    f << out.report.dump(2) << "\n";
  }
  if (verbose || report_path.empty())
    std::cout << extmle::render_summary(out.report);
  if (verbose) std::cout << out.report.dump(2) << "\n";
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Log-linear contingency table analysis that is honest about sampling "
      "zeros: decides MLE existence on the marginal cone, computes facial "
      "sets and the extended MLE, and adjusts degrees of freedom."};
  app.require_subcommand(1);

  extmle::AnalysisRequest req;
  std::string scheme = "poisson";
  std::string method = "both";
  std::string report_path;

  CLI::App* analyze = app.add_subcommand("analyze", "full analysis pipeline");
  add_common(analyze, req);
  analyze->add_option("--scheme", scheme,
                      "poisson | multinomial | product-multinomial:FACTOR");
  analyze->add_option("--method", method, "ipf | newton | both");
  analyze->add_option("--tol-moment", req.tol_moment,
                      "moment-equation tolerance (relative)");
  analyze->add_option("--max-iter", req.max_iter, "iteration budget");
  analyze->add_option("--report", report_path, "write JSON report here");
  analyze->add_flag("--verbose", req.verbose, "print the full report");

  CLI::App* check = app.add_subcommand("check", "existence decision only");
  add_common(check, req);
  check->add_option("--report", report_path, "write JSON report here");
  check->add_flag("--verbose", req.verbose, "print the full report");

  CLI::App* census =
      app.add_subcommand("census", "facet census of the marginal cone");
  add_common(census, req);
  census->add_option("--report", report_path, "write JSON report here");
  census->add_flag("--verbose", req.verbose, "print the full report");
  int expect_facets = -1, expect_zero = -1;
  census->add_option("--expect-facets", expect_facets,
                     "fail unless the census finds exactly this many facets");
  census->add_option("--expect-zero-margin", expect_zero,
                     "fail unless this many facets are zero-margin");
  census->add_option("--budget-secs", req.budget_seconds,
                     "wall-clock budget; EXTMLE_BUDGET_SECS overrides");

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("EXTMLE_BUDGET_SECS"))
    req.budget_seconds = std::atof(env);
  if (method == "ipf")
    req.method = extmle::FitMethod::Ipf;
  else if (method == "newton")
    req.method = extmle::FitMethod::Newton;
  else if (method == "both")
    req.method = extmle::FitMethod::Both;
  else {
    std::cerr << "error: unknown method '" << method << "'\n";
    return 1;
  }
  req.scheme = scheme;
  if (expect_facets >= 0) req.expect_facets = expect_facets;
  if (expect_zero >= 0) req.expect_zero_margin = expect_zero;

  try {
    extmle::AnalysisOutcome out;
    if (analyze->parsed())
      out = extmle::run_analysis(req);
    else if (check->parsed())
      out = extmle::run_check(req);
    else
      out = extmle::run_facet_census(req);
    return emit(out, report_path, req.verbose);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
