#include "plucase/decision.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "plucase/text.hpp"

namespace plucase::decision {

using nlohmann::json;

std::string DecisionKey::render() const {
  switch (kind) {
    case Kind::VariationPoint:
      return "vp:" + variation_point + "@" + use_case;
    case Kind::OptionalFlow:
      return "flow:" + use_case + "/" + flow;
    case Kind::OptionalStep:
      return "step:" + use_case + "/" + flow + "/" + step;
  }
  return "";
}

DecisionKey DiagramDecision::key() const {
  DecisionKey k;
  k.kind = DecisionKey::Kind::VariationPoint;
  k.variation_point = variation_point;
  k.use_case = including_use_case;
  return k;
}

DecisionKey SpecDecision::key() const {
  DecisionKey k;
  if (element == Element::OptionalFlow) {
    k.kind = DecisionKey::Kind::OptionalFlow;
    k.use_case = use_case;
    k.flow = flow;
  } else {
    k.kind = DecisionKey::Kind::OptionalStep;
    k.use_case = use_case;
    k.flow = flow;
    k.step = step;
  }
  return k;
}

const DiagramDecision* DecisionModel::find_diagram(
    const DecisionKey& key) const {
  for (const auto& d : diagram_decisions) {
    if (d.key() == key) return &d;
  }
  return nullptr;
}

const SpecDecision* DecisionModel::find_spec(const DecisionKey& key) const {
  for (const auto& d : spec_decisions) {
    if (d.key() == key) return &d;
  }
  return nullptr;
}

const char* to_string(UpdateKind kind) {
  switch (kind) {
    case UpdateKind::SelectUnselected: return "select-unselected";
    case UpdateKind::UnselectSelected: return "unselect-selected";
    case UpdateKind::Both: return "both";
    case UpdateKind::OrderChange: return "order-change";
  }
  return "?";
}

bool ChangeSet::touches(const DecisionKey& key) const {
  auto has = [&](const std::vector<DecisionKey>& keys) {
    return std::find(keys.begin(), keys.end(), key) != keys.end();
  };
  if (has(added) || has(deleted)) return true;
  return std::any_of(updated.begin(), updated.end(),
                     [&](const Update& u) { return u.key == key; });
}

namespace {

std::vector<DecisionKey> all_keys(const DecisionModel& m) {
  std::vector<DecisionKey> keys;
  for (const auto& d : m.diagram_decisions) keys.push_back(d.key());
  for (const auto& d : m.spec_decisions) keys.push_back(d.key());
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::string render_diagram_value(const DiagramDecision& d) {
  std::vector<std::string> sel = d.selected;
  std::sort(sel.begin(), sel.end());
  return "selected {" + text::join(sel, ", ") + "}";
}

std::string render_spec_value(const SpecDecision& d) {
  if (!d.selected) return "unselected";
  if (d.order_number) {
    return "selected, order " + std::to_string(*d.order_number);
  }
  return "selected";
}

}  // namespace

MatchResult match_decisions(const DecisionModel& m_old,
                            const DecisionModel& m_new) {
  MatchResult result;
  auto old_keys = all_keys(m_old);
  auto new_keys = all_keys(m_new);
  std::set_intersection(old_keys.begin(), old_keys.end(), new_keys.begin(),
                        new_keys.end(), std::back_inserter(result.matched));
  std::set_difference(old_keys.begin(), old_keys.end(), new_keys.begin(),
                      new_keys.end(), std::back_inserter(result.only_old));
  std::set_difference(new_keys.begin(), new_keys.end(), old_keys.begin(),
                      old_keys.end(), std::back_inserter(result.only_new));
  return result;
}

ChangeSet calculate_changes(const DecisionModel& m_old,
                            const DecisionModel& m_new) {
  MatchResult match = match_decisions(m_old, m_new);
  ChangeSet changes;
  changes.added = match.only_new;
  changes.deleted = match.only_old;

  for (const auto& key : match.matched) {
    if (key.kind == DecisionKey::Kind::VariationPoint) {
      const DiagramDecision* d_old = m_old.find_diagram(key);
      const DiagramDecision* d_new = m_new.find_diagram(key);
      std::set<std::string> old_sel(d_old->selected.begin(),
                                    d_old->selected.end());
      std::set<std::string> new_sel(d_new->selected.begin(),
                                    d_new->selected.end());
      bool gained = !std::includes(old_sel.begin(), old_sel.end(),
                                   new_sel.begin(), new_sel.end());
      bool lost = !std::includes(new_sel.begin(), new_sel.end(),
                                 old_sel.begin(), old_sel.end());
      if (!gained && !lost) continue;
      Update u;
      u.key = key;
      u.kind = gained && lost ? UpdateKind::Both
               : gained       ? UpdateKind::SelectUnselected
                              : UpdateKind::UnselectSelected;
      u.old_value = render_diagram_value(*d_old);
      u.new_value = render_diagram_value(*d_new);
      changes.updated.push_back(std::move(u));
    } else {
      const SpecDecision* d_old = m_old.find_spec(key);
      const SpecDecision* d_new = m_new.find_spec(key);
      Update u;
      u.key = key;
      u.old_value = render_spec_value(*d_old);
      u.new_value = render_spec_value(*d_new);
      if (d_old->selected != d_new->selected) {
        u.kind = d_new->selected ? UpdateKind::SelectUnselected
                                 : UpdateKind::UnselectSelected;
      } else if (d_old->selected && d_old->order_number != d_new->order_number) {
        u.kind = UpdateKind::OrderChange;
      } else {
        continue;
      }
      changes.updated.push_back(std::move(u));
    }
  }
  return changes;
}

Findings validate_decisions(const DecisionModel& m,
                            const diagram::PLDiagram& diagram,
                            const rucm::UseCaseDocument& spec) {
  Findings findings;
  auto violation = [&](const std::string& rule, const std::string& msg) {
    findings.push_back({Finding::Severity::Violation, rule, msg});
  };

  std::set<std::string> selected_variants;
  std::set<std::pair<std::string, std::string>> decided_vps;

  for (const auto& d : m.diagram_decisions) {
    const auto* vp = diagram.find_variation_point(d.variation_point);
    if (!vp) {
      violation("unknown-element", "decision on unknown variation point '" +
                                       d.variation_point + "'");
      continue;
    }
    auto includers = diagram.including_use_cases(d.variation_point);
    if (std::find(includers.begin(), includers.end(), d.including_use_case) ==
        includers.end()) {
      violation("unknown-element",
                "variation point '" + d.variation_point +
                    "' is not included by '" + d.including_use_case + "'");
    }
    decided_vps.insert({d.variation_point, d.including_use_case});

    std::set<std::string> sel(d.selected.begin(), d.selected.end());
    std::set<std::string> unsel(d.unselected.begin(), d.unselected.end());
    std::vector<std::string> vp_variants = vp->all_variants();
    std::set<std::string> all(vp_variants.begin(), vp_variants.end());
    std::set<std::string> both;
    std::set_intersection(sel.begin(), sel.end(), unsel.begin(), unsel.end(),
                          std::inserter(both, both.begin()));
    if (!both.empty()) {
      violation("selection-overlap",
                "variants both selected and unselected at '" +
                    d.variation_point + "': " +
                    text::join({both.begin(), both.end()}, ", "));
    }
    std::set<std::string> covered;
    std::set_union(sel.begin(), sel.end(), unsel.begin(), unsel.end(),
                   std::inserter(covered, covered.begin()));
    if (covered != all) {
      violation("selection-coverage",
                "decision at '" + d.variation_point +
                    "' does not cover exactly the variation point's variants");
    }
    for (const auto& rel : vp->relations) {
      int count = static_cast<int>(std::count_if(
          rel.variants.begin(), rel.variants.end(),
          [&](const std::string& v) { return sel.count(v) > 0; }));
      if (count < rel.min || count > rel.max) {
        violation("cardinality",
                  "selection at '" + d.variation_point + "' picks " +
                      std::to_string(count) + " variants from a [" +
                      std::to_string(rel.min) + ".." + std::to_string(rel.max) +
                      "] relation");
      }
    }
    if (vp->mandatory && sel.empty()) {
      violation("mandatory-vp",
                "mandatory variation point '" + d.variation_point +
                    "' has no selected variant");
    }
    selected_variants.insert(sel.begin(), sel.end());
  }

  for (const auto& dep : diagram.dependencies) {
    bool from_sel = selected_variants.count(dep.from) > 0;
    bool to_sel = selected_variants.count(dep.to) > 0;
    if (dep.kind == diagram::Dependency::Kind::Require && from_sel && !to_sel) {
      violation("require", "'" + dep.from + "' is selected but required '" +
                               dep.to + "' is not");
    }
    if (dep.kind == diagram::Dependency::Kind::Conflict && from_sel && to_sel) {
      violation("conflict", "conflicting variants '" + dep.from + "' and '" +
                                dep.to + "' are both selected");
    }
  }

  std::set<DecisionKey> decided_spec;
  for (const auto& d : m.spec_decisions) {
    if (!decided_spec.insert(d.key()).second) {
      violation("duplicate-decision", "duplicate decision " + d.key().render());
    }
    const rucm::UseCase* uc = spec.find(d.use_case);
    if (!uc) {
      violation("unknown-element",
                "decision on unknown use case '" + d.use_case + "'");
      continue;
    }
    const rucm::Flow* flow = uc->find_flow(d.flow);
    if (!flow) {
      violation("unknown-element", "decision on unknown flow '" + d.flow +
                                       "' in '" + d.use_case + "'");
      continue;
    }
    if (d.element == SpecDecision::Element::OptionalFlow) {
      if (!flow->optional) {
        violation("not-optional", "flow '" + d.flow + "' in '" + d.use_case +
                                      "' is not optional");
      }
      continue;
    }
    const rucm::Step* step = nullptr;
    for (const auto& s : flow->steps) {
      if (s.number == d.step) step = &s;
    }
    if (!step) {
      violation("unknown-element", "decision on unknown step " + d.flow + "." +
                                       d.step + " in '" + d.use_case + "'");
      continue;
    }
    bool variant_order = !d.step.empty() && d.step[0] == 'V';
    if (d.element == SpecDecision::Element::VariantOrder && !variant_order) {
      violation("not-variant-order", "step " + d.flow + "." + d.step +
                                         " carries no variant order label");
    }
    if (!step->optional) {
      violation("not-optional", "step " + d.flow + "." + d.step + " in '" +
                                    d.use_case + "' is not optional");
    }
    if (d.element == SpecDecision::Element::VariantOrder && d.selected &&
        !d.order_number) {
      violation("missing-order", "selected variant step " + d.flow + "." +
                                     d.step + " has no order number");
    }
  }

  // Distinct order numbers among the selected steps of each group.
  std::map<std::pair<std::string, std::string>, std::set<int>> orders;
  for (const auto& d : m.spec_decisions) {
    if (d.element != SpecDecision::Element::VariantOrder || !d.selected ||
        !d.order_number) {
      continue;
    }
    if (!orders[{d.use_case, d.flow}].insert(*d.order_number).second) {
      violation("duplicate-order",
                "order " + std::to_string(*d.order_number) +
                    " used twice in '" + d.use_case + "' flow " + d.flow);
    }
  }

  // Completeness: every variation point inclusion and every optional
  // element needs a decision for deterministic configuration.
  for (const auto& vp : diagram.variation_points) {
    for (const auto& includer : diagram.including_use_cases(vp.name)) {
      if (!decided_vps.count({vp.name, includer})) {
        violation("missing-decision", "no decision for variation point '" +
                                          vp.name + "' included by '" +
                                          includer + "'");
      }
    }
  }
  for (const auto& uc : spec.use_cases) {
    auto need_step_decisions = [&](const rucm::Flow& flow) {
      for (const auto& s : flow.steps) {
        if (!s.optional) continue;
        DecisionKey key;
        key.kind = DecisionKey::Kind::OptionalStep;
        key.use_case = uc.name;
        key.flow = flow.id;
        key.step = s.number;
        if (!decided_spec.count(key)) {
          violation("missing-decision", "no decision for optional step " +
                                            flow.id + "." + s.number +
                                            " in '" + uc.name + "'");
        }
      }
    };
    need_step_decisions(uc.basic_flow);
    for (const auto& flow : uc.alternative_flows) {
      need_step_decisions(flow);
      if (flow.optional) {
        DecisionKey key;
        key.kind = DecisionKey::Kind::OptionalFlow;
        key.use_case = uc.name;
        key.flow = flow.id;
        if (!decided_spec.count(key)) {
          violation("missing-decision", "no decision for optional flow '" +
                                            flow.id + "' in '" + uc.name +
                                            "'");
        }
      }
    }
  }
  return findings;
}

namespace {

const char* element_name(SpecDecision::Element e) {
  switch (e) {
    case SpecDecision::Element::OptionalStep: return "optional-step";
    case SpecDecision::Element::OptionalFlow: return "optional-flow";
    case SpecDecision::Element::VariantOrder: return "variant-order";
  }
  return "?";
}

json key_to_json(const DecisionKey& key) {
  json j;
  switch (key.kind) {
    case DecisionKey::Kind::VariationPoint:
      j["type"] = "variation-point";
      j["variation_point"] = key.variation_point;
      j["including_use_case"] = key.use_case;
      break;
    case DecisionKey::Kind::OptionalFlow:
      j["type"] = "optional-flow";
      j["use_case"] = key.use_case;
      j["flow"] = key.flow;
      break;
    case DecisionKey::Kind::OptionalStep:
      j["type"] = "optional-step";
      j["use_case"] = key.use_case;
      j["flow"] = key.flow;
      j["step"] = key.step;
      break;
  }
  return j;
}

}  // namespace

DecisionModel parse_decisions(std::string_view json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw Error(ErrorCode::SchemaError, "decision file is not a JSON object");
  }
  DecisionModel m;
  if (!root.contains("product_id") || !root["product_id"].is_string()) {
    throw Error(ErrorCode::SchemaError, "decision file lacks 'product_id'");
  }
  m.product_id = root["product_id"].get<std::string>();
  m.created_on = root.value("created_on", "");
  for (const auto& d : root.value("diagram_decisions", json::array())) {
    DiagramDecision decision;
    if (!d.contains("variation_point") || !d.contains("including_use_case")) {
      throw Error(ErrorCode::SchemaError,
                  "diagram decision lacks variation_point/including_use_case");
    }
    decision.variation_point = d["variation_point"].get<std::string>();
    decision.including_use_case = d["including_use_case"].get<std::string>();
    for (const auto& v : d.value("selected_variants", json::array())) {
      decision.selected.push_back(v.get<std::string>());
    }
    for (const auto& v : d.value("unselected_variants", json::array())) {
      decision.unselected.push_back(v.get<std::string>());
    }
    m.diagram_decisions.push_back(std::move(decision));
  }
  for (const auto& d : root.value("spec_decisions", json::array())) {
    SpecDecision decision;
    std::string element = d.value("element", "");
    if (element == "optional-step") {
      decision.element = SpecDecision::Element::OptionalStep;
    } else if (element == "optional-flow") {
      decision.element = SpecDecision::Element::OptionalFlow;
    } else if (element == "variant-order") {
      decision.element = SpecDecision::Element::VariantOrder;
    } else {
      throw Error(ErrorCode::SchemaError,
                  "unknown spec decision element '" + element + "'");
    }
    if (!d.contains("use_case") || !d.contains("flow")) {
      throw Error(ErrorCode::SchemaError, "spec decision lacks use_case/flow");
    }
    decision.use_case = d["use_case"].get<std::string>();
    decision.flow = d["flow"].get<std::string>();
    decision.step = d.value("step", "");
    if (decision.element != SpecDecision::Element::OptionalFlow &&
        decision.step.empty()) {
      throw Error(ErrorCode::SchemaError, "step decision lacks 'step'");
    }
    decision.selected = d.value("selected", false);
    if (d.contains("order_number")) {
      decision.order_number = d["order_number"].get<int>();
    }
    m.spec_decisions.push_back(std::move(decision));
  }
  return m;
}

DecisionModel read_decisions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_decisions(buf.str());
}

std::string serialize_decisions(const DecisionModel& m) {
  json root;
  root["product_id"] = m.product_id;
  root["created_on"] = m.created_on;
  root["diagram_decisions"] = json::array();
  for (const auto& d : m.diagram_decisions) {
    root["diagram_decisions"].push_back(
        {{"variation_point", d.variation_point},
         {"including_use_case", d.including_use_case},
         {"selected_variants", d.selected},
         {"unselected_variants", d.unselected}});
  }
  root["spec_decisions"] = json::array();
  for (const auto& d : m.spec_decisions) {
    json j{{"element", element_name(d.element)},
           {"use_case", d.use_case},
           {"flow", d.flow},
           {"selected", d.selected}};
    if (!d.step.empty()) j["step"] = d.step;
    if (d.order_number) j["order_number"] = *d.order_number;
    root["spec_decisions"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

std::string serialize_change_set(const ChangeSet& changes) {
  json root;
  root["added"] = json::array();
  for (const auto& key : changes.added) root["added"].push_back(key_to_json(key));
  root["deleted"] = json::array();
  for (const auto& key : changes.deleted) {
    root["deleted"].push_back(key_to_json(key));
  }
  root["updated"] = json::array();
  for (const auto& update : changes.updated) {
    json j = key_to_json(update.key);
    j["update_kind"] = to_string(update.kind);
    j["old_value"] = update.old_value;
    j["new_value"] = update.new_value;
    root["updated"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

}  // namespace plucase::decision
