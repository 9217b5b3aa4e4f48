#ifndef PLUCASE_CLASSIFY_HPP
#define PLUCASE_CLASSIFY_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "plucase/error.hpp"
#include "plucase/rucm.hpp"
#include "plucase/scenario.hpp"
#include "plucase/trace.hpp"

namespace plucase::classify {

enum class Verdict { Reusable, Retestable, Obsolete };
const char* to_string(Verdict v);

// Rule tags attached to verdicts. A scenario with several deltas gets one
// reason per delta plus the multiple-changes tag; the worst rule wins.
namespace rules {
inline constexpr const char* internal_changed = "internal-steps-changed";
inline constexpr const char* internal_reordered = "internal-steps-reordered";
inline constexpr const char* condition_internals = "condition-internals-changed";
inline constexpr const char* condition_interface = "condition-interface-changed";
inline constexpr const char* conditions_reordered = "conditions-reordered";
inline constexpr const char* interactions_changed = "interactions-changed";
inline constexpr const char* interactions_reordered = "interactions-reordered";
inline constexpr const char* control_changed = "control-steps-changed";
inline constexpr const char* control_reordered = "control-steps-reordered";
inline constexpr const char* flow_removed = "covered-flow-removed";
inline constexpr const char* multiple_changes = "multiple-changes";
}  // namespace rules

struct Reason {
  std::string rule;
  std::string detail;
};

struct Assessment {
  Verdict verdict = Verdict::Reusable;
  std::vector<Reason> reasons;
};

// Verdict for one old scenario against the new document: every flow the
// scenario covers is diffed step-by-step (conditions guarding bounded and
// global flows included) and each delta dispatched by step category.
Assessment assess_scenario(const rucm::UseCaseDocument& old_doc,
                           const rucm::UseCaseDocument& new_doc,
                           const scenario::Scenario& s_old);

// True when the condition phrase contains one of the entity phrases as a
// token sequence after normalization.
bool refers_to_entity(const std::string& condition,
                      const std::vector<std::string>& entities);

// Ids present in both sequences whose rank among the shared ids differs.
std::vector<std::string> rank_moved(const std::vector<std::string>& before,
                                    const std::vector<std::string>& after);

struct EditOp {
  enum class Kind { Add, Remove, Reorder };
  Kind kind = Kind::Add;
  std::string origin;
  std::string text;
  int from_position = 0;  // Remove/Reorder: 1-based index in the old steps
  int position = 0;       // Add/Reorder: 1-based index in the new steps
};
const char* to_string(EditOp::Kind kind);

// Step identity used by guidance: (origin, text) of the interaction,
// internal, condition and include nodes of a path.
using StepId = std::pair<std::string, std::string>;

std::vector<StepId> step_ids(const std::vector<scenario::Node>& path);

// Edit script turning the steps of old_path into the steps of new_path:
// longest-common-subsequence diff, with removed/added pairs of the same
// step collapsed into reorder ops.
std::vector<EditOp> guidance_edits(const std::vector<scenario::Node>& old_path,
                                   const std::vector<scenario::Node>& new_path);

// Replays an edit script; guidance_edits(a, b) applied to step_ids(a)
// yields step_ids(b).
std::vector<StepId> apply_guidance(std::vector<StepId> steps,
                                   const std::vector<EditOp>& edits);

struct Guidance {
  std::string source_scenario;
  std::vector<std::string> source_tests;
  std::vector<EditOp> edits;
};

struct NewScenario {
  std::string id;  // "NEW#<n>"
  scenario::Scenario shape;
  std::vector<Guidance> guidance;  // sources with the fewest edits
};

struct TestVerdict {
  std::string test_id;
  std::string scenario_id;
  Verdict verdict = Verdict::Reusable;
  std::vector<Reason> reasons;
};

struct Analysis {
  std::vector<TestVerdict> tests;  // ordered by test id
  std::vector<NewScenario> new_scenarios;
  // Per non-obsolete test: the scenario its rerun covers in the new
  // product (the recorded-branch walk of the new graphs).
  std::map<std::string, scenario::Scenario> successors;
  Findings findings;
};

// Classifies every traced test and derives the untested scenarios of the
// new product: each impacted old scenario is replayed on the new graphs,
// forking true-branch-first at conditions the old scenario never decided;
// leaves whose covered flows match a scenario holding a non-obsolete test
// are discarded, the rest become new scenarios with per-source guidance.
Analysis analyze(const rucm::UseCaseDocument& old_doc,
                 const rucm::UseCaseDocument& new_doc,
                 const std::vector<scenario::Scenario>& old_scenarios,
                 const trace::MatchResult& matches);

}  // namespace plucase::classify

#endif
