#ifndef PLUCASE_PRIORITIZE_HPP
#define PLUCASE_PRIORITIZE_HPP

#include <set>
#include <string>
#include <vector>

#include "plucase/error.hpp"

namespace plucase::prioritize {

struct HistoryRow {
  std::string product_id;
  std::string version_id;
  std::string test_id;
  bool failed = false;
};

// CSV with columns product_id,version_id,test_id,verdict where verdict is
// pass or fail; row order is the execution chronology.
std::vector<HistoryRow> parse_history(const std::string& content);
std::vector<HistoryRow> read_history(const std::string& path);

struct FeatureRecord {
  std::string product_id;
  std::string test_id;
  int variability = 0;  // decision elements in the covered scenario
  int size = 0;         // steps in the covered scenario
  int retestable = 0;
  bool is_new_scenario = false;
};

// CSV with columns product_id,test_id,V,S,R[,is_new_scenario].
std::vector<FeatureRecord> parse_features(const std::string& content);
std::vector<FeatureRecord> read_features(const std::string& path);

struct TrainingRow {
  std::string product_id;
  std::string version_id;
  std::string test_id;
  int fails = 0;
  int variability = 0;
  int size = 0;
  int retestable = 0;
  int failed_products = 0;  // earlier products with a failure, current excluded
  int failed_versions = 0;  // strictly earlier failing runs across the line
};

// Joins the execution history with per-product feature records, keeping
// the history order. Throws UnknownTest for a run of a test that has no
// feature record in its product.
std::vector<TrainingRow> build_training_set(
    const std::vector<HistoryRow>& history,
    const std::vector<FeatureRecord>& features);

inline constexpr int kFactorCount = 6;
extern const char* const kFactorNames[kFactorCount];  // intercept,V,S,FP,FV,R

struct Model {
  std::vector<std::string> factors;  // intercept first
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  std::vector<double> wald_z;
  std::vector<double> p_values;
  bool converged = false;
  double deviance = 0.0;
  int iterations = 0;

  double predict(const TrainingRow& row) const;
};

// Logistic regression by iteratively reweighted least squares, stopping
// when the deviance moves less than 1e-8 or after 25 iterations. All
// outcomes identical raises ConstantOutcome. Coefficients beyond 10 in
// magnitude indicate separation: they are clipped and the model flagged
// unconverged with a warning.
Model fit_model(const std::vector<TrainingRow>& rows,
                const std::vector<std::string>& factors,
                Findings* warnings = nullptr);

struct TrainedModels {
  Model full;
  Model retained;  // intercept plus factors with p < alpha, refitted
  double alpha = 0.05;
  Findings warnings;
};

// Full fit, Wald selection at alpha (the intercept is never filtered),
// refit on the retained factors.
TrainedModels train(const std::vector<TrainingRow>& rows, double alpha);

std::string model_json(const TrainedModels& models);

struct Candidate {
  std::string test_id;
  int variability = 0;
  int size = 0;
  int retestable = 0;
  bool is_new_scenario = false;
  int failed_products = 0;
  int failed_versions = 0;
  double probability = 0.0;
};

struct Prioritization {
  std::vector<Candidate> ranking;
  bool heuristic = false;  // constant training outcome, feature-based order
  TrainedModels models;    // meaningful when heuristic is false
  Findings warnings;
};

// Ranks the new product's candidates: tests for new scenarios first in
// scenario order, then descending predicted failure probability, ties
// broken by descending failed_versions, retestable first, then test id.
// With a constant training outcome the model step is skipped and existing
// tests order by retestable first, descending variability, size, test id.
Prioritization prioritize(const std::vector<HistoryRow>& history,
                          const std::vector<FeatureRecord>& features,
                          const std::string& new_product, double alpha);

std::string ranking_csv(const std::vector<Candidate>& ranking);
std::vector<Candidate> parse_ranking(const std::string& content);

struct Metrics {
  double auc_ratio = 0.0;
  double pct_to_cover_all_failing = 0.0;
  double pct_to_cover_80pct_failing = 0.0;
  double pct_failing_in_first_half = 0.0;
};

// Area-under-curve metrics of a ranking against the failing set: the
// cumulative percentage of failing tests covered per executed test,
// normalized by the ideal (all failing first) curve. Throws NoFailures
// when no ranked test failed.
Metrics evaluate_ranking(const std::vector<std::string>& ranked_ids,
                         const std::set<std::string>& failing);

std::string metrics_json(const Metrics& metrics);

}  // namespace plucase::prioritize

#endif
