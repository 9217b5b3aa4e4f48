#include "plucase/configure.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "plucase/text.hpp"

namespace plucase::configure {
namespace {

using decision::DecisionKey;
using decision::DecisionModel;
using decision::DiagramDecision;
using decision::SpecDecision;
using diagram::PLDiagram;
using rucm::Flow;
using rucm::FlowKind;
using rucm::Step;
using rucm::StepKind;
using rucm::StepRef;
using rucm::UseCase;
using rucm::UseCaseDocument;

void require_valid(const DecisionModel& m, const PLDiagram& diagram,
                   const UseCaseDocument& spec) {
  Findings findings = decision::validate_decisions(m, diagram, spec);
  std::vector<const Finding*> violations;
  for (const auto& f : findings)
    if (f.severity == Finding::Severity::Violation) violations.push_back(&f);
  if (violations.empty()) return;
  std::string msg = "decisions for product '" + m.product_id +
                    "' are inconsistent: " + violations.front()->rule + ": " +
                    violations.front()->message;
  if (violations.size() > 1)
    msg += " (and " + std::to_string(violations.size() - 1) + " more)";
  throw Error(ErrorCode::InvalidDecisions, msg);
}

DecisionKey vp_key(const std::string& vp, const std::string& including) {
  return DecisionKey{DecisionKey::Kind::VariationPoint, vp, including, "", ""};
}

DecisionKey flow_key(const std::string& uc, const std::string& flow) {
  return DecisionKey{DecisionKey::Kind::OptionalFlow, "", uc, flow, ""};
}

DecisionKey step_key(const std::string& uc, const std::string& flow,
                     const std::string& step) {
  return DecisionKey{DecisionKey::Kind::OptionalStep, "", uc, flow, step};
}

// Selected variants of one variation point decision, ordered by the
// declaration order of the diagram relations.
std::vector<std::string> ordered_selected(const diagram::VariationPoint& vp,
                                          const DiagramDecision& d) {
  std::set<std::string> chosen(d.selected.begin(), d.selected.end());
  std::vector<std::string> out;
  for (const auto& rel : vp.relations)
    for (const auto& v : rel.variants)
      if (chosen.count(v)) out.push_back(v);
  return out;
}

// Essential use cases plus every selected variant whose including use case
// itself made it into the product.
std::set<std::string> reachable_use_cases(const PLDiagram& pl,
                                          const DecisionModel& m) {
  std::set<std::string> in_product;
  for (const auto& uc : pl.use_cases)
    if (!uc.variant) in_product.insert(uc.name);
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& d : m.diagram_decisions) {
      if (!in_product.count(d.including_use_case)) continue;
      for (const auto& v : d.selected)
        if (in_product.insert(v).second) grew = true;
    }
  }
  return in_product;
}

std::string synth_origin(const std::string& vp, const std::string& uc,
                         const std::string& role, const std::string& variant) {
  return "vp|" + vp + "|" + uc + "|" + role + "|" + variant;
}

Step synth_step(const std::string& line, std::string label,
                std::string origin, std::string provenance) {
  Step s = rucm::classify_step(line);
  s.number = std::move(label);
  s.origin = std::move(origin);
  s.provenance = std::move(provenance);
  return s;
}

int next_specific_index(const UseCase& uc) {
  int max_index = 0;
  for (const auto& f : uc.alternative_flows) {
    if (!text::starts_with(f.id, "SAF")) continue;
    std::string suffix = f.id.substr(3);
    if (suffix.empty() ||
        !std::all_of(suffix.begin(), suffix.end(),
                     [](unsigned char c) { return std::isdigit(c); }))
      continue;
    max_index = std::max(max_index, std::stoi(suffix));
  }
  return max_index + 1;
}

class Generator {
 public:
  Generator(const UseCaseDocument& pl, const PLDiagram& diagram,
            const DecisionModel& m)
      : pl_(pl), diagram_(diagram), m_(m) {}

  SpecResult run() {
    require_valid(m_, diagram_, pl_);
    auto in_product = reachable_use_cases(diagram_, m_);
    SpecResult result;
    result.spec.source_path = pl_.source_path;
    for (const auto& uc : pl_.use_cases) {
      if (!in_product.count(uc.name)) continue;
      result.spec.use_cases.push_back(configure_use_case(uc));
    }
    warnings_.swap(result.warnings);
    return result;
  }

 private:
  UseCase configure_use_case(const UseCase& pl_uc) {
    UseCase uc = pl_uc;
    if (uc.variant) {
      uc.variant = false;
      uc.provenance = selecting_decision(uc.name);
    }

    std::vector<Flow> kept;
    kept.push_back(uc.basic_flow);
    for (const auto& flow : uc.alternative_flows) {
      if (!flow.optional) {
        kept.push_back(flow);
        continue;
      }
      const SpecDecision* d = m_.find_spec(flow_key(uc.name, flow.id));
      if (!d || !d->selected) continue;
      Flow f = flow;
      f.optional = false;
      f.provenance = d->key().render();
      kept.push_back(f);
    }
    uc.alternative_flows.clear();

    for (auto& flow : kept) {
      filter_steps(uc.name, flow);
      reorder_variant_steps(flow);
    }
    uc.basic_flow = std::move(kept.front());
    uc.alternative_flows.assign(kept.begin() + 1, kept.end());
    next_saf_ = next_specific_index(uc);

    pending_flows_.clear();
    expand_variation_points(uc, uc.basic_flow);
    for (auto& f : uc.alternative_flows) expand_variation_points(uc, f);
    for (auto& f : pending_flows_)
      uc.alternative_flows.push_back(std::move(f));
    pending_flows_.clear();

    renumber(uc);
    check_residue(uc);
    return uc;
  }

  std::string selecting_decision(const std::string& variant) const {
    for (const auto& d : m_.diagram_decisions)
      for (const auto& v : d.selected)
        if (v == variant) return d.key().render();
    return "";
  }

  void filter_steps(const std::string& uc_name, Flow& flow) {
    std::vector<Step> out;
    for (const auto& step : flow.steps) {
      bool variant_ordered = !step.number.empty() && step.number[0] == 'V';
      if (!step.optional && !variant_ordered) {
        out.push_back(step);
        continue;
      }
      const SpecDecision* d =
          m_.find_spec(step_key(uc_name, flow.id, step.number));
      if (!d || !d->selected) continue;
      Step s = step;
      s.optional = false;
      s.provenance = d->key().render();
      if (variant_ordered) order_of_[key_of(uc_name, flow.id, step.number)] =
          d->order_number.value_or(0);
      out.push_back(s);
    }
    flow.steps = std::move(out);
    uc_of_flow_[flow.id] = uc_name;
  }

  static std::string key_of(const std::string& uc, const std::string& flow,
                            const std::string& step) {
    return uc + "\x1f" + flow + "\x1f" + step;
  }

  void reorder_variant_steps(Flow& flow) {
    std::vector<size_t> slots;
    std::vector<Step> block;
    for (size_t i = 0; i < flow.steps.size(); ++i) {
      if (!flow.steps[i].number.empty() && flow.steps[i].number[0] == 'V') {
        slots.push_back(i);
        block.push_back(flow.steps[i]);
      }
    }
    if (block.size() < 2) return;
    const std::string& uc = uc_of_flow_[flow.id];
    std::stable_sort(block.begin(), block.end(),
                     [&](const Step& a, const Step& b) {
                       return order_of_[key_of(uc, flow.id, a.number)] <
                              order_of_[key_of(uc, flow.id, b.number)];
                     });
    for (size_t i = 0; i < slots.size(); ++i)
      flow.steps[slots[i]] = block[i];
  }

  void expand_variation_points(const UseCase& uc, Flow& flow) {
    std::vector<Step> out;
    for (const auto& step : flow.steps) {
      if (step.kind != StepKind::IncludeVariationPoint) {
        out.push_back(step);
        continue;
      }
      expand_one(uc, flow.id, step, out);
    }
    flow.steps = std::move(out);
  }

  void expand_one(const UseCase& uc, const std::string& flow_id,
                  const Step& step, std::vector<Step>& out) {
    const std::string& vp_name = step.target;
    const diagram::VariationPoint* vp =
        diagram_.find_variation_point(vp_name);
    const DiagramDecision* d = m_.find_diagram(vp_key(vp_name, uc.name));
    if (!vp || !d) {
      throw Error(ErrorCode::InvalidDecisions,
                  "no decision resolves variation point '" + vp_name +
                      "' in use case '" + uc.name + "'");
    }
    std::vector<std::string> variants = ordered_selected(*vp, *d);
    const std::string provenance = d->key().render();
    if (variants.empty()) return;  // nothing selected: the step disappears

    auto include_line = [](const std::string& v) {
      return "INCLUDE USE CASE " + v + ".";
    };
    auto condition_line = [this](const std::string& v) {
      note_missing_precondition(v);
      return "The system VALIDATES THAT 'Precondition of " + v + "'.";
    };

    if (variants.size() == 1) {
      out.push_back(synth_step(include_line(variants[0]), step.number,
                               synth_origin(vp_name, uc.name, "include",
                                            variants[0]),
                               provenance));
      return;
    }

    // First variant validates in place; each further variant gets a
    // specific alternative flow anchored on the previous validation.
    out.push_back(synth_step(condition_line(variants[0]), step.number,
                             synth_origin(vp_name, uc.name, "cond",
                                          variants[0]),
                             provenance));
    out.push_back(synth_step(include_line(variants[0]),
                             temp_label(),
                             synth_origin(vp_name, uc.name, "include",
                                          variants[0]),
                             provenance));
    std::string anchor_flow = flow_id;
    std::string anchor_step = step.number;
    for (size_t i = 1; i < variants.size(); ++i) {
      const std::string& v = variants[i];
      bool last = i + 1 == variants.size();
      Flow alt;
      alt.id = "SAF" + std::to_string(next_saf_++);
      alt.kind = FlowKind::SpecificAlt;
      alt.rfs.push_back(StepRef{anchor_flow, anchor_step});
      alt.provenance = provenance;
      int label = 1;
      if (!last) {
        alt.steps.push_back(synth_step(
            condition_line(v), std::to_string(label++),
            synth_origin(vp_name, uc.name, "cond", v), provenance));
        anchor_flow = alt.id;
        anchor_step = alt.steps.front().number;
      }
      alt.steps.push_back(synth_step(
          include_line(v), std::to_string(label++),
          synth_origin(vp_name, uc.name, "include", v), provenance));
      alt.steps.push_back(synth_step(
          "ABORT.", std::to_string(label++),
          synth_origin(vp_name, uc.name, "abort", v), provenance));
      pending_flows_.push_back(std::move(alt));
    }
  }

  void note_missing_precondition(const std::string& variant) {
    const UseCase* spec = pl_.find(variant);
    if (spec && !spec->precondition.empty()) return;
    if (!warned_preconditions_.insert(variant).second) return;
    warnings_.push_back(
        {Finding::Severity::Warning, "missing-precondition",
         "variant use case '" + variant +
             "' has no precondition to validate before inclusion"});
  }

  std::string temp_label() { return "#" + std::to_string(temp_counter_++); }

  void renumber(UseCase& uc) {
    std::map<std::pair<std::string, std::string>, std::string> remap;
    auto number_flow = [&](Flow& flow) {
      for (size_t i = 0; i < flow.steps.size(); ++i) {
        std::string fresh = std::to_string(i + 1);
        remap[{flow.id, flow.steps[i].number}] = fresh;
        flow.steps[i].number = std::move(fresh);
      }
    };
    number_flow(uc.basic_flow);
    for (auto& f : uc.alternative_flows) number_flow(f);

    auto remap_refs = [&](Flow& flow) {
      std::vector<StepRef> refs;
      for (const auto& ref : flow.rfs) {
        auto it = remap.find({ref.flow_id, ref.number});
        if (it == remap.end()) continue;  // target was configured away
        refs.push_back(StepRef{ref.flow_id, it->second});
      }
      flow.rfs = std::move(refs);
      if (flow.rfs.empty() && (flow.kind == FlowKind::SpecificAlt ||
                               flow.kind == FlowKind::BoundedAlt)) {
        throw Error(ErrorCode::InvalidDecisions,
                    "alternative flow '" + flow.id + "' in '" + uc.name +
                        "' lost every reference step");
      }
    };
    for (auto& f : uc.alternative_flows) remap_refs(f);

    auto check_empty = [&](const Flow& flow) {
      if (flow.steps.empty()) {
        throw Error(ErrorCode::InvalidDecisions,
                    "flow '" + flow.id + "' in '" + uc.name +
                        "' has no steps left after configuration");
      }
    };
    check_empty(uc.basic_flow);
    for (const auto& f : uc.alternative_flows) check_empty(f);
  }

  void check_residue(const UseCase& uc) const {
    auto scan = [&](const Flow& flow) {
      for (const auto& step : flow.steps) {
        if (step.kind == StepKind::IncludeVariationPoint) {
          throw Error(ErrorCode::InvalidDecisions,
                      "variation point '" + step.target +
                          "' survived configuration in '" + uc.name + "'");
        }
      }
    };
    scan(uc.basic_flow);
    for (const auto& f : uc.alternative_flows) scan(f);
  }

  const UseCaseDocument& pl_;
  const PLDiagram& diagram_;
  const DecisionModel& m_;
  Findings warnings_;
  std::set<std::string> warned_preconditions_;
  std::map<std::string, int> order_of_;
  std::map<std::string, std::string> uc_of_flow_;
  std::vector<Flow> pending_flows_;
  int next_saf_ = 1;
  int temp_counter_ = 0;
};

}  // namespace

PLDiagram generate_ps_diagram(const PLDiagram& pl,
                              const UseCaseDocument& pl_spec,
                              const DecisionModel& m) {
  require_valid(m, pl, pl_spec);
  auto in_product = reachable_use_cases(pl, m);

  PLDiagram ps;
  for (const auto& uc : pl.use_cases)
    if (in_product.count(uc.name))
      ps.use_cases.push_back({uc.name, false});
  for (const auto& inc : pl.includes) {
    if (!in_product.count(inc.from)) continue;
    if (inc.kind == diagram::Include::Kind::UseCase) {
      if (in_product.count(inc.to)) ps.includes.push_back(inc);
      continue;
    }
    const DiagramDecision* d = m.find_diagram(vp_key(inc.to, inc.from));
    const diagram::VariationPoint* vp = pl.find_variation_point(inc.to);
    if (!d || !vp) continue;
    for (const auto& v : ordered_selected(*vp, *d))
      ps.includes.push_back(
          {inc.from, v, diagram::Include::Kind::UseCase});
  }
  return ps;
}

SpecResult generate_ps_specification(const UseCaseDocument& pl,
                                     const PLDiagram& pl_diagram,
                                     const DecisionModel& m) {
  return Generator(pl, pl_diagram, m).run();
}

}  // namespace plucase::configure
