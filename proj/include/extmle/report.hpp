#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "extmle/fitting.hpp"

namespace extmle {

// One batch analysis: a table, a model, a sampling scheme and options.
struct AnalysisRequest {
  std::string table_path;
  std::string model;
  std::string scheme = "poisson";  // poisson | multinomial |
                                   // product-multinomial:FACTOR |
                                   // poisson-multinomial:FACTOR:FREE_LEVEL
  FitMethod method = FitMethod::Both;
  double tol_moment = 1e-8;
  int max_iter = 0;                // 0 = module defaults
  bool verbose = false;
  std::optional<int> expect_facets;
  std::optional<int> expect_zero_margin;
  double budget_seconds = 0;       // census budget; 0 = unlimited
};

struct AnalysisOutcome {
  nlohmann::ordered_json report;
  int exit_code = 0;  // 0 verified, 1 input error, 2 nonconvergence/failed,
                      // 3 census budget exhausted
};

SamplingScheme make_scheme(const std::string& descriptor,
                           const ContingencyTable& table);

// Full pipeline: parse, design, facial set, existence verdict, fit on the
// face, inference, verification, report.
AnalysisOutcome run_analysis(const AnalysisRequest& request);

// Existence decision only; no fitting.
AnalysisOutcome run_check(const AnalysisRequest& request);

// Facet census of the marginal cone, with optional expected counts.
AnalysisOutcome run_facet_census(const AnalysisRequest& request);

// Human-readable summary rendered from the report document itself.
std::string render_summary(const nlohmann::ordered_json& report);

// Round to 12 significant digits: the report precision contract.
double round12(double x);

}  // namespace extmle
