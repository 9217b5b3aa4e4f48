#include "plucase/diagram.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace plucase::diagram {

using nlohmann::json;

std::vector<std::string> VariationPoint::all_variants() const {
  std::vector<std::string> out;
  for (const auto& rel : relations) {
    out.insert(out.end(), rel.variants.begin(), rel.variants.end());
  }
  return out;
}

const VariationPoint* PLDiagram::find_variation_point(
    std::string_view name) const {
  for (const auto& vp : variation_points) {
    if (vp.name == name) return &vp;
  }
  return nullptr;
}

bool PLDiagram::has_use_case(std::string_view name) const {
  return std::any_of(use_cases.begin(), use_cases.end(),
                     [&](const UseCaseRef& uc) { return uc.name == name; });
}

bool PLDiagram::is_variant(std::string_view name) const {
  for (const auto& uc : use_cases) {
    if (uc.name == name) return uc.variant;
  }
  return false;
}

std::vector<std::string> PLDiagram::including_use_cases(
    std::string_view vp) const {
  std::vector<std::string> out;
  for (const auto& inc : includes) {
    if (inc.kind == Include::Kind::VariationPoint && inc.to == vp) {
      out.push_back(inc.from);
    }
  }
  return out;
}

namespace {

const json& require(const json& obj, const char* key, const char* context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::SchemaError,
                std::string("missing field '") + key + "' in " + context);
  }
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           const char* context) {
  const json& v = require(obj, key, context);
  if (!v.is_string()) {
    throw Error(ErrorCode::SchemaError,
                std::string("field '") + key + "' in " + context +
                    " must be a string");
  }
  return v.get<std::string>();
}

void validate(const PLDiagram& d) {
  std::set<std::string> vp_names;
  for (const auto& vp : d.variation_points) {
    if (!vp_names.insert(vp.name).second) {
      throw Error(ErrorCode::SchemaError,
                  "duplicate variation point '" + vp.name + "'");
    }
    if (vp.mandatory && vp.relations.empty()) {
      throw Error(ErrorCode::SchemaError,
                  "mandatory variation point '" + vp.name +
                      "' has no variability relation");
    }
    for (const auto& rel : vp.relations) {
      if (rel.min < 0 || rel.max < rel.min || rel.max > rel.n()) {
        throw Error(ErrorCode::SchemaError,
                    "invalid cardinality [" + std::to_string(rel.min) + ".." +
                        std::to_string(rel.max) + "] over " +
                        std::to_string(rel.n()) + " variants in '" + vp.name +
                        "'");
      }
      for (const auto& v : rel.variants) {
        if (!d.has_use_case(v)) {
          throw Error(ErrorCode::UnknownReference,
                      "variation point '" + vp.name +
                          "' references unknown variant '" + v + "'");
        }
        if (!d.is_variant(v)) {
          throw Error(ErrorCode::SchemaError,
                      "use case '" + v + "' in variation point '" + vp.name +
                          "' is not marked as a variant");
        }
      }
    }
  }
  for (const auto& inc : d.includes) {
    if (!d.has_use_case(inc.from)) {
      throw Error(ErrorCode::UnknownReference,
                  "include from unknown use case '" + inc.from + "'");
    }
    bool ok = inc.kind == Include::Kind::UseCase
                  ? d.has_use_case(inc.to)
                  : d.find_variation_point(inc.to) != nullptr;
    if (!ok) {
      throw Error(ErrorCode::UnknownReference,
                  "include of unknown element '" + inc.to + "'");
    }
  }
  for (const auto& dep : d.dependencies) {
    if (!d.has_use_case(dep.from) || !d.has_use_case(dep.to)) {
      throw Error(ErrorCode::UnknownReference,
                  "dependency between unknown use cases '" + dep.from +
                      "' and '" + dep.to + "'");
    }
  }
  for (const auto& vp : d.variation_points) {
    if (d.including_use_cases(vp.name).empty()) {
      throw Error(ErrorCode::UnknownReference,
                  "variation point '" + vp.name +
                      "' is not included by any use case");
    }
  }
}

}  // namespace

PLDiagram parse_diagram(std::string_view json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw Error(ErrorCode::SchemaError, "diagram file is not a JSON object");
  }
  PLDiagram d;
  for (const auto& uc : require(root, "use_cases", "diagram")) {
    d.use_cases.push_back(
        {require_string(uc, "name", "use_cases"), uc.value("variant", false)});
  }
  for (const auto& vp : root.value("variation_points", json::array())) {
    VariationPoint point;
    point.name = require_string(vp, "name", "variation_points");
    point.mandatory = vp.value("mandatory", false);
    for (const auto& rel : require(vp, "relations", "variation_points")) {
      VariabilityRelation r;
      for (const auto& v : require(rel, "variants", "relations")) {
        r.variants.push_back(v.get<std::string>());
      }
      r.min = require(rel, "min", "relations").get<int>();
      r.max = require(rel, "max", "relations").get<int>();
      point.relations.push_back(std::move(r));
    }
    d.variation_points.push_back(std::move(point));
  }
  for (const auto& inc : root.value("includes", json::array())) {
    Include include;
    include.from = require_string(inc, "from", "includes");
    include.to = require_string(inc, "to", "includes");
    std::string kind = require_string(inc, "kind", "includes");
    if (kind == "use-case") {
      include.kind = Include::Kind::UseCase;
    } else if (kind == "variation-point") {
      include.kind = Include::Kind::VariationPoint;
    } else {
      throw Error(ErrorCode::SchemaError, "unknown include kind '" + kind + "'");
    }
    d.includes.push_back(std::move(include));
  }
  for (const auto& dep : root.value("dependencies", json::array())) {
    Dependency dependency;
    std::string kind = require_string(dep, "kind", "dependencies");
    if (kind == "require") {
      dependency.kind = Dependency::Kind::Require;
    } else if (kind == "conflict") {
      dependency.kind = Dependency::Kind::Conflict;
    } else {
      throw Error(ErrorCode::SchemaError,
                  "unknown dependency kind '" + kind + "'");
    }
    dependency.from = require_string(dep, "from", "dependencies");
    dependency.to = require_string(dep, "to", "dependencies");
    d.dependencies.push_back(std::move(dependency));
  }
  validate(d);
  return d;
}

PLDiagram read_diagram(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_diagram(buf.str());
}

std::string serialize_diagram(const PLDiagram& diagram) {
  json root;
  root["use_cases"] = json::array();
  for (const auto& uc : diagram.use_cases) {
    root["use_cases"].push_back({{"name", uc.name}, {"variant", uc.variant}});
  }
  root["variation_points"] = json::array();
  for (const auto& vp : diagram.variation_points) {
    json relations = json::array();
    for (const auto& rel : vp.relations) {
      relations.push_back(
          {{"variants", rel.variants}, {"min", rel.min}, {"max", rel.max}});
    }
    root["variation_points"].push_back({{"name", vp.name},
                                        {"mandatory", vp.mandatory},
                                        {"relations", relations}});
  }
  root["includes"] = json::array();
  for (const auto& inc : diagram.includes) {
    root["includes"].push_back(
        {{"from", inc.from},
         {"to", inc.to},
         {"kind", inc.kind == Include::Kind::UseCase ? "use-case"
                                                     : "variation-point"}});
  }
  root["dependencies"] = json::array();
  for (const auto& dep : diagram.dependencies) {
    root["dependencies"].push_back(
        {{"kind",
          dep.kind == Dependency::Kind::Require ? "require" : "conflict"},
         {"from", dep.from},
         {"to", dep.to}});
  }
  return root.dump(2) + "\n";
}

Findings cross_check(const PLDiagram& diagram,
                     const rucm::UseCaseDocument& spec) {
  Findings findings;
  auto violation = [&](const std::string& rule, const std::string& msg) {
    findings.push_back({Finding::Severity::Violation, rule, msg});
  };

  auto check_step_includes = [&](const rucm::UseCase& uc,
                                 const rucm::Flow& flow) {
    for (const auto& step : flow.steps) {
      if (step.kind == rucm::StepKind::IncludeVariationPoint &&
          !diagram.find_variation_point(step.target)) {
        violation("vp-not-in-diagram",
                  "'" + uc.name + "' includes variation point '" + step.target +
                      "', which is not in the diagram");
      }
    }
  };
  for (const auto& uc : spec.use_cases) {
    check_step_includes(uc, uc.basic_flow);
    for (const auto& flow : uc.alternative_flows) {
      check_step_includes(uc, flow);
    }
    if (uc.variant && diagram.has_use_case(uc.name) &&
        !diagram.is_variant(uc.name)) {
      violation("variant-mismatch", "'" + uc.name +
                                        "' is a variant in the specification "
                                        "but not in the diagram");
    }
  }
  for (const auto& uc : diagram.use_cases) {
    if (uc.variant && !spec.find(uc.name)) {
      violation("variant-without-spec",
                "variant use case '" + uc.name + "' has no specification");
    }
  }
  for (const auto& uc : spec.use_cases) {
    if (uc.variant && !diagram.has_use_case(uc.name)) {
      violation("variant-not-in-diagram",
                "variant use case '" + uc.name + "' is not in the diagram");
    }
  }
  return findings;
}

}  // namespace plucase::diagram
