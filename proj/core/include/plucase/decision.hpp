#ifndef PLUCASE_DECISION_HPP
#define PLUCASE_DECISION_HPP

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plucase/diagram.hpp"
#include "plucase/error.hpp"
#include "plucase/rucm.hpp"

namespace plucase::decision {

// Identity of one configuration decision. Decisions made for the same
// variation in two products match by key value, not by model-element id:
// a variation point decision is keyed by (variation point, including use
// case); optional flows by (use case, flow); optional / variant-order
// steps by (use case, flow, step).
struct DecisionKey {
  enum class Kind { VariationPoint, OptionalFlow, OptionalStep };

  Kind kind = Kind::VariationPoint;
  std::string variation_point;  // VariationPoint only
  std::string use_case;         // all kinds (including use case for VPs)
  std::string flow;             // OptionalFlow/OptionalStep
  std::string step;             // OptionalStep

  auto operator<=>(const DecisionKey&) const = default;
  std::string render() const;
};

struct DiagramDecision {
  std::string variation_point;
  std::string including_use_case;
  std::vector<std::string> selected;
  std::vector<std::string> unselected;

  DecisionKey key() const;
};

struct SpecDecision {
  enum class Element { OptionalStep, OptionalFlow, VariantOrder };

  Element element = Element::OptionalStep;
  std::string use_case;
  std::string flow;
  std::string step;  // empty for OptionalFlow
  bool selected = false;
  std::optional<int> order_number;  // VariantOrder, when selected

  DecisionKey key() const;
};

struct DecisionModel {
  std::string product_id;
  std::string created_on;  // ISO-8601 date
  std::vector<DiagramDecision> diagram_decisions;
  std::vector<SpecDecision> spec_decisions;

  const DiagramDecision* find_diagram(const DecisionKey& key) const;
  const SpecDecision* find_spec(const DecisionKey& key) const;
};

struct MatchResult {
  std::vector<DecisionKey> matched;
  std::vector<DecisionKey> only_old;
  std::vector<DecisionKey> only_new;
};

enum class UpdateKind { SelectUnselected, UnselectSelected, Both, OrderChange };

const char* to_string(UpdateKind kind);

struct Update {
  DecisionKey key;
  UpdateKind kind = UpdateKind::SelectUnselected;
  std::string old_value;
  std::string new_value;
};

struct ChangeSet {
  std::vector<DecisionKey> added;
  std::vector<DecisionKey> deleted;
  std::vector<Update> updated;

  bool empty() const {
    return added.empty() && deleted.empty() && updated.empty();
  }
  bool touches(const DecisionKey& key) const;
};

// Structural matching of two products' decisions by key equality.
MatchResult match_decisions(const DecisionModel& m_old,
                            const DecisionModel& m_new);

// Unmatched-new keys become additions, unmatched-old keys deletions, and
// matched keys with differing values updates (selection changes in one or
// both directions, or a variant-order position change).
ChangeSet calculate_changes(const DecisionModel& m_old,
                            const DecisionModel& m_new);

// Cardinality, dependency, element-existence and completeness checks
// against the product line artifacts.
Findings validate_decisions(const DecisionModel& m,
                            const diagram::PLDiagram& diagram,
                            const rucm::UseCaseDocument& spec);

DecisionModel parse_decisions(std::string_view json_text);
DecisionModel read_decisions(const std::string& path);
std::string serialize_decisions(const DecisionModel& m);

std::string serialize_change_set(const ChangeSet& changes);

}  // namespace plucase::decision

#endif
