#ifndef PLUCASE_TESTS_ORACLES_HPP
#define PLUCASE_TESTS_ORACLES_HPP

#include <string>
#include <vector>

#include "plucase/classify.hpp"
#include "plucase/prioritize.hpp"
#include "plucase/rucm.hpp"
#include "plucase/scenario.hpp"

namespace plucase::testing {

// Exhaustive scenario enumeration by plain recursion over the flow
// graphs: full state cloned at every undecided condition, no memoized
// partials, include instances scoped explicitly.
std::vector<scenario::Scenario> brute_force_scenarios(
    const rucm::UseCaseDocument& doc, const std::string& root);
std::vector<scenario::Scenario> brute_force_document(
    const rucm::UseCaseDocument& doc);

// Field-wise comparison of two scenario lists; on mismatch `why` gets a
// description of the first difference.
bool same_scenarios(const std::vector<scenario::Scenario>& a,
                    const std::vector<scenario::Scenario>& b,
                    std::string* why = nullptr);

// Classification driven by an explicit verdict table instead of the
// production dispatch: one row per (step category, change kind, entity
// reference) combination.
classify::Assessment rule_table_assess(const rucm::UseCaseDocument& old_doc,
                                       const rucm::UseCaseDocument& new_doc,
                                       const scenario::Scenario& s_old);

// Standard normal distribution function through the C library's erfc in
// extended precision.
double normal_cdf_oracle(double z);

// Logistic regression fitted by gradient descent with Armijo
// backtracking, run to a tight gradient tolerance.
std::vector<double> gd_logistic_fit(
    const std::vector<prioritize::TrainingRow>& rows,
    const std::vector<std::string>& factors, int max_iters = 200000,
    double tol = 1e-10);

// Gradient of the log-likelihood at beta, one component per factor.
std::vector<double> logistic_score(
    const std::vector<prioritize::TrainingRow>& rows,
    const std::vector<std::string>& factors, const std::vector<double>& beta);

}  // namespace plucase::testing

#endif
