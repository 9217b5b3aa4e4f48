#ifndef PLUCASE_TRACE_HPP
#define PLUCASE_TRACE_HPP

#include <map>
#include <string>
#include <vector>

#include "plucase/error.hpp"
#include "plucase/scenario.hpp"

namespace plucase::trace {

struct TraceLink {
  std::string test_id;
  std::string use_case;
  std::string flow_id;
  int order = 0;        // 0 = unspecified
  std::string to_step;  // entry step for bounded/global flows, "" = unspecified
};

struct TracedTest {
  std::string test_id;
  std::vector<TraceLink> links;
};

// CSV with columns test_id,use_case,flow_id[,order,to_step]. Rows are
// grouped by test id, keeping first-appearance order. Throws SchemaError.
std::vector<TracedTest> parse_traces(const std::string& content);
std::vector<TracedTest> read_traces(const std::string& path);

// CSV with columns test_id,scenario_id, used to resolve ambiguous matches.
std::map<std::string, std::string> read_overrides(const std::string& path);

struct MatchResult {
  std::map<std::string, std::string> test_to_scenario;
  std::map<std::string, std::vector<std::string>> scenario_to_tests;
  Findings findings;  // tests matching no scenario (excluded downstream)
};

// Matches each test to the scenario whose covered flows its links trace:
// the traced alternative flows equal the scenario's covered alternative
// flows, traced basic flows are covered, and the scenario root is among
// the traced use cases. Ties are narrowed by link order (first-entry
// sequence) and to_step (entry step), then resolved via overrides;
// remaining ambiguity raises AmbiguousTrace listing the candidates.
MatchResult match_tests(const std::vector<scenario::Scenario>& scenarios,
                        const std::vector<TracedTest>& tests,
                        const std::map<std::string, std::string>& overrides = {});

}  // namespace plucase::trace

#endif
