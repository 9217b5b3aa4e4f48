#ifndef PLUCASE_SCENARIO_HPP
#define PLUCASE_SCENARIO_HPP

#include <string>
#include <vector>

#include "plucase/error.hpp"
#include "plucase/rucm.hpp"

namespace plucase::scenario {

enum class NodeKind {
  Start,
  Interaction,  // input and output steps
  Internal,
  Condition,    // validation steps and alternative-flow guards
  Include,
  Exit,
  Abort,
};

const char* to_string(NodeKind kind);

// Control-flow node. Synthetic nodes (start, exit, guards, implicit
// aborts) have an empty `label`; step nodes keep the step identity.
struct Node {
  NodeKind kind = NodeKind::Internal;
  std::string use_case;
  std::string flow_id;
  std::string label;      // step number within the flow, "" when synthetic
  std::string text;
  std::string condition;  // Condition nodes: the validated phrase
  std::string entity;     // Interaction nodes
  std::string actor;      // Interaction nodes
  std::string target;     // Include nodes: included use case
  rucm::StepKind step_kind = rucm::StepKind::Internal;
  std::string origin;
  std::string provenance;
  int next = -1;        // unconditional successor
  int true_next = -1;   // Condition: condition holds / guard fires
  int false_next = -1;  // Condition: condition fails / guard passes
};

struct Graph {
  std::string use_case;
  std::vector<Node> nodes;
  int start = 0;
  int exit = -1;
};

// One flow a scenario passes through, in first-entry order.
struct CoveredFlow {
  std::string use_case;
  std::string flow_id;
  std::string provenance;

  bool operator==(const CoveredFlow& o) const {
    return use_case == o.use_case && flow_id == o.flow_id;
  }
};

// Condition decisions in encounter order, keyed by the condition origin.
struct BranchRecord {
  std::string origin;
  bool taken = false;
};

struct Scenario {
  std::string id;  // "<root use case>#<ordinal>"
  std::string root;
  std::vector<Node> path;
  std::vector<CoveredFlow> covered_flows;
  std::vector<BranchRecord> branches;
  bool aborts = false;
  int size_s = 0;  // interaction, internal, condition and include nodes
  int size_v = 0;  // distinct configuration decisions the path depends on

  bool covers(const std::string& uc, const std::string& flow) const;
};

// Recomputes size_s and size_v of a scenario against the document its
// path was walked on.
void compute_stats(Scenario& s, const rucm::UseCaseDocument& doc);

// Builds the control-flow graph of one use case: flows linearized,
// specific alternative flows entered on the false branch of their
// reference condition, bounded and global flows through a guard node
// after their first reference step, unanchored conditions failing into
// an implicit abort, and non-aborting alternative flows returning to
// their reference point. Throws MalformedFlow on unresolvable layouts.
Graph build_graph(const rucm::UseCaseDocument& doc, const rucm::UseCase& uc);

// Depth-first path enumeration, true branch first, each condition
// branching at most once per path (later encounters leave the loop).
// Includes are expanded inline; an included path that aborts terminates
// the outer scenario. Throws IncludeCycle on cyclic includes and
// UnknownReference on includes of use cases absent from the document.
std::vector<Scenario> enumerate_scenarios(const rucm::UseCaseDocument& doc,
                                          const std::string& root);

// Use cases never included by another one, in document order.
std::vector<std::string> root_use_cases(const rucm::UseCaseDocument& doc);

// Scenarios of every root use case, concatenated in document order.
std::vector<Scenario> enumerate_document(const rucm::UseCaseDocument& doc);

}  // namespace plucase::scenario

#endif
