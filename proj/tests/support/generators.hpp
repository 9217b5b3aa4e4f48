#ifndef PLUCASE_TESTS_GENERATORS_HPP
#define PLUCASE_TESTS_GENERATORS_HPP

#include <random>
#include <set>
#include <string>
#include <vector>

#include "plucase/decision.hpp"
#include "plucase/diagram.hpp"
#include "plucase/prioritize.hpp"
#include "plucase/rucm.hpp"
#include "plucase/scenario.hpp"
#include "plucase/trace.hpp"

namespace plucase::testing {

// Random multi-use-case document for the enumeration property: at most
// four conditions (guards included) and at most two non-aborting
// alternative flows per document, includes up to two levels deep.
rucm::UseCaseDocument random_document(std::mt19937& rng);

// A flat random document plus a mutated copy. Mutations keep step origins
// stable so reorderings stay observable.
struct ScenarioChange {
  rucm::UseCaseDocument old_doc;
  rucm::UseCaseDocument new_doc;
};
ScenarioChange random_change(std::mt19937& rng);

// One configured product of the synthetic line, with a test attached to
// every enumerated scenario.
struct SyntheticProduct {
  std::string id;
  std::string created_on;
  decision::DecisionModel decisions;
  rucm::UseCaseDocument spec;
  std::vector<scenario::Scenario> scenarios;
  trace::MatchResult matches;
};

struct SyntheticLine {
  rucm::UseCaseDocument pl_spec;
  diagram::PLDiagram pl_diagram;
  std::vector<SyntheticProduct> products;  // five, distinct configurations
};

SyntheticLine synthetic_line(unsigned seed);

// Training rows drawn from a known logistic model.
struct SyntheticTraining {
  std::vector<prioritize::TrainingRow> rows;
  std::vector<double> truth;  // intercept,V,S,FP,FV,R
};
SyntheticTraining synthetic_training(int n, unsigned seed,
                                     bool zero_factor_s = false);

// Execution history, feature records and the failing set of a new
// product, with failures driven by a latent per-test risk that also
// shapes the features.
struct RankingScenario {
  std::vector<prioritize::HistoryRow> history;
  std::vector<prioritize::FeatureRecord> features;
  std::string new_product;
  std::set<std::string> failing;
};
RankingScenario random_ranking_scenario(unsigned seed);

}  // namespace plucase::testing

#endif
