#ifndef PLUCASE_RUCM_HPP
#define PLUCASE_RUCM_HPP

#include <string>
#include <string_view>
#include <vector>

#include "plucase/error.hpp"

namespace plucase::rucm {

// Step kinds are derived deterministically from the controlled keywords.
// ExitImplicit never appears in parsed text: flows that end without ABORT
// terminate (or return) through an implicit exit.
enum class StepKind {
  Input,
  Output,
  Condition,
  Internal,
  IncludeUseCase,
  IncludeVariationPoint,
  Abort,
  ExitImplicit,
};

enum class FlowKind { Basic, SpecificAlt, BoundedAlt, GlobalAlt };

const char* to_string(StepKind kind);
const char* to_string(FlowKind kind);

// Reference to a step in another flow of the same use case. `flow_id` is
// "BF" for the basic flow; `number` is the step label ("3", "V2").
struct StepRef {
  std::string flow_id;
  std::string number;

  bool operator==(const StepRef&) const = default;
  bool operator<(const StepRef& o) const {
    return flow_id != o.flow_id ? flow_id < o.flow_id : number < o.number;
  }
};

struct Step {
  std::string number;    // "1".."n" or variant-order labels "V1".."Vn"
  bool optional = false; // carries the OPTIONAL marker (PL documents only)
  StepKind kind = StepKind::Internal;
  std::string text;      // verbatim step text, number and marker stripped

  // Keyword payloads (empty when not applicable).
  std::string entity;    // Input/Output: the exchanged entity phrase
  std::string actor;     // Input: sending actor; Output: receiving actor
  std::string condition; // Condition: phrase after VALIDATES THAT
  std::string target;    // includes: use case / variation point name

  // Derived metadata, not part of the text format and ignored by
  // structural equality: a stable identity across configurations and the
  // configuration decision that produced the step (if any).
  std::string origin;
  std::string provenance;
};

struct Flow {
  std::string id;        // "BF", "SAF1", "BAF2", ...
  FlowKind kind = FlowKind::Basic;
  bool optional = false;
  std::vector<StepRef> rfs; // empty for Basic and Global flows
  std::string guard;        // IF..THEN condition (Bounded/Global only)
  std::vector<Step> steps;
  std::string provenance;   // decision that selected/generated this flow
};

struct UseCase {
  std::string name;
  bool variant = false;  // VARIANT stereotype
  std::string precondition;
  Flow basic_flow;
  std::vector<Flow> alternative_flows;
  std::string provenance;

  const Flow* find_flow(std::string_view id) const;
};

struct UseCaseDocument {
  std::vector<UseCase> use_cases;
  std::string source_path;

  const UseCase* find(std::string_view name) const;
};

// Structural equality on the text-format fields (metadata excluded).
bool structurally_equal(const Step& a, const Step& b);
bool structurally_equal(const Flow& a, const Flow& b);
bool structurally_equal(const UseCase& a, const UseCase& b);
bool structurally_equal(const UseCaseDocument& a, const UseCaseDocument& b);

// Parses the line-oriented `.rucm` format. Throws Error with a line number
// on malformed input (SyntaxError) and on rfs references to nonexistent
// steps (DanglingReference).
UseCaseDocument parse_specification(std::string_view content,
                                    std::string source_path = "");
UseCaseDocument read_specification(const std::string& path);

// Keyword classification of one step line (trailing period optional).
// Never fails: Internal is the fallback kind.
Step classify_step(std::string_view step_text);

// Canonical text form; parse(serialize(d)) is structurally equal to d.
std::string serialize_specification(const UseCaseDocument& doc);

// Consistency findings that are not parse errors: specific alternative
// flows whose reference step is not a condition, conditions without an
// alternative flow, unresolved use-case includes, variation-point includes
// inside global flows.
Findings validate_document(const UseCaseDocument& doc);

}  // namespace plucase::rucm

#endif
