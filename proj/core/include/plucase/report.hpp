#ifndef PLUCASE_REPORT_HPP
#define PLUCASE_REPORT_HPP

#include <string>
#include <utility>
#include <vector>

#include "plucase/classify.hpp"
#include "plucase/error.hpp"

namespace plucase::report {

struct ProductRef {
  std::string id;
  std::string created_on;  // ISO-8601 date from the decision model
};

struct TestEntry {
  std::string product_id;
  std::string test_id;
  std::string scenario_id;
  classify::Verdict verdict = classify::Verdict::Reusable;
  std::vector<classify::Reason> reasons;
  int size_v = 0;  // stats of the scenario the rerun covers (non-obsolete)
  int size_s = 0;
};

struct TestRef {
  std::string product_id;
  std::string test_id;

  bool operator==(const TestRef&) const = default;
  bool operator<(const TestRef& o) const {
    return product_id != o.product_id ? product_id < o.product_id
                                      : test_id < o.test_id;
  }
};

// Consolidated choice for one scenario exercised in previous products:
// reusable/retestable tests grouped across products, the most recent
// product's tests chosen, or everything listed when classes disagree.
struct Selection {
  std::string scenario_id;
  classify::Verdict verdict = classify::Verdict::Reusable;
  bool manual_choice = false;
  std::vector<TestRef> chosen;
  std::vector<TestRef> alternatives;
};

struct StepView {
  std::string origin;
  std::string text;
  std::string kind;
};

struct ScenarioView {
  std::string id;
  std::string root;
  bool aborts = false;
  int size_s = 0;
  int size_v = 0;
  std::vector<StepView> steps;
  std::vector<scenario::CoveredFlow> covered_flows;
};

struct GuidanceView {
  std::string source_product;
  std::string source_scenario;
  std::vector<std::string> source_tests;
  std::vector<classify::EditOp> edits;
};

struct NewScenarioView {
  std::string id;
  ScenarioView shape;
  std::vector<GuidanceView> guidance;
};

struct ImpactReport {
  std::string new_product;
  std::vector<ProductRef> previous_products;
  std::vector<TestEntry> tests;
  std::vector<Selection> selections;
  std::vector<NewScenarioView> new_scenarios;
  Findings findings;
};

struct ProductResult {
  std::string product_id;
  std::string created_on;
  classify::Analysis analysis;
  // old scenarios of this product by id, for cross-product grouping
  std::vector<scenario::Scenario> scenarios;
};

// Whole-line aggregation: a scenario stays new only when every previous
// product derives it; per-scenario test selection prefers the most recent
// product (created_on, then product id), mixed classes are left to manual
// choice. Throws EmptyInput without previous products.
ImpactReport aggregate(const std::string& new_product,
                       const std::vector<ProductResult>& results);

std::string to_json(const ImpactReport& report);
ImpactReport parse_report(const std::string& json_text);  // SchemaError
std::string to_csv(const ImpactReport& report);
std::string to_html(const ImpactReport& report);

// Candidate rows for the prioritizer: the selected tests and the new
// scenarios of the new product, with V, S and the retestable flag.
std::string features_csv(const ImpactReport& report);

}  // namespace plucase::report

#endif
