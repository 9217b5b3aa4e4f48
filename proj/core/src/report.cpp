#include "plucase/report.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>

#include "json.hpp"
#include "plucase/csv.hpp"

namespace plucase::report {
namespace {

using classify::EditOp;
using classify::Verdict;
using nlohmann::json;

std::string origin_key(const std::vector<scenario::Node>& path) {
  std::string key;
  for (const auto& n : path) {
    key += n.origin;
    key += '\x1f';
  }
  return key;
}

std::string view_key(const ScenarioView& view) {
  std::string key;
  for (const auto& s : view.steps) {
    key += s.origin;
    key += '\x1f';
  }
  return key;
}

ScenarioView to_view(const scenario::Scenario& s) {
  ScenarioView v;
  v.id = s.id;
  v.root = s.root;
  v.aborts = s.aborts;
  v.size_s = s.size_s;
  v.size_v = s.size_v;
  v.covered_flows = s.covered_flows;
  for (const auto& n : s.path) {
    switch (n.kind) {
      case scenario::NodeKind::Interaction:
      case scenario::NodeKind::Internal:
      case scenario::NodeKind::Condition:
      case scenario::NodeKind::Include:
        v.steps.push_back({n.origin, n.text, to_string(n.kind)});
        break;
      default:
        break;
    }
  }
  return v;
}

Verdict verdict_from(const std::string& s) {
  if (s == "reusable") return Verdict::Reusable;
  if (s == "retestable") return Verdict::Retestable;
  if (s == "obsolete") return Verdict::Obsolete;
  throw Error(ErrorCode::SchemaError, "unknown class '" + s + "'");
}

EditOp::Kind op_from(const std::string& s) {
  if (s == "add") return EditOp::Kind::Add;
  if (s == "remove") return EditOp::Kind::Remove;
  if (s == "reorder") return EditOp::Kind::Reorder;
  throw Error(ErrorCode::SchemaError, "unknown edit op '" + s + "'");
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c; break;
    }
  }
  return out;
}

}  // namespace

ImpactReport aggregate(const std::string& new_product,
                       const std::vector<ProductResult>& results) {
  if (results.empty())
    throw Error(ErrorCode::EmptyInput, "no previous products to report on");

  ImpactReport report;
  report.new_product = new_product;
  for (const auto& r : results)
    report.previous_products.push_back({r.product_id, r.created_on});

  struct GroupEntry {
    std::string product_id;
    std::string created_on;
    std::string test_id;
    std::string scenario_id;
    Verdict verdict;
  };
  std::map<std::string, std::vector<GroupEntry>> groups;  // by origin key

  for (const auto& r : results) {
    std::map<std::string, std::string> key_of_scenario;
    for (const auto& s : r.scenarios) key_of_scenario[s.id] = origin_key(s.path);
    for (const auto& tv : r.analysis.tests) {
      TestEntry entry;
      entry.product_id = r.product_id;
      entry.test_id = tv.test_id;
      entry.scenario_id = tv.scenario_id;
      entry.verdict = tv.verdict;
      entry.reasons = tv.reasons;
      auto succ = r.analysis.successors.find(tv.test_id);
      if (succ != r.analysis.successors.end()) {
        entry.size_v = succ->second.size_v;
        entry.size_s = succ->second.size_s;
      }
      report.tests.push_back(std::move(entry));
      if (tv.verdict == Verdict::Obsolete) continue;
      groups[key_of_scenario[tv.scenario_id]].push_back(
          {r.product_id, r.created_on, tv.test_id, tv.scenario_id, tv.verdict});
    }
    for (const auto& f : r.analysis.findings) {
      Finding tagged = f;
      tagged.message = r.product_id + ": " + f.message;
      report.findings.push_back(std::move(tagged));
    }
  }

  for (const auto& [key, entries] : groups) {
    bool any_reusable = false, any_retestable = false;
    for (const auto& e : entries) {
      (e.verdict == Verdict::Reusable ? any_reusable : any_retestable) = true;
    }
    const GroupEntry* winner = &entries.front();
    for (const auto& e : entries) {
      if (e.created_on != winner->created_on
              ? e.created_on > winner->created_on
              : e.product_id > winner->product_id)
        winner = &e;
    }
    Selection sel;
    sel.scenario_id = winner->scenario_id;
    sel.manual_choice = any_reusable && any_retestable;
    sel.verdict = any_retestable ? Verdict::Retestable : Verdict::Reusable;
    std::set<std::string> tied;
    for (const auto& e : entries)
      if (e.created_on == winner->created_on) tied.insert(e.product_id);
    if (tied.size() > 1) {
      std::string list;
      for (const auto& p : tied) list += (list.empty() ? "'" : ", '") + p + "'";
      report.findings.push_back(
          {Finding::Severity::Warning, "recency-tie",
           "scenario '" + sel.scenario_id + "': products " + list +
               " share created_on " + winner->created_on + "; tests of '" +
               winner->product_id + "' chosen by product id"});
    }
    for (const auto& e : entries) {
      bool pick = sel.manual_choice || e.product_id == winner->product_id;
      (pick ? sel.chosen : sel.alternatives).push_back({e.product_id, e.test_id});
    }
    std::sort(sel.chosen.begin(), sel.chosen.end());
    std::sort(sel.alternatives.begin(), sel.alternatives.end());
    report.selections.push_back(std::move(sel));
  }
  std::sort(report.selections.begin(), report.selections.end(),
            [](const Selection& a, const Selection& b) {
              if (a.scenario_id != b.scenario_id)
                return a.scenario_id < b.scenario_id;
              return a.chosen < b.chosen;
            });

  // A scenario stays new only when every previous product derives it.
  std::vector<std::set<std::string>> keys_per_product;
  for (const auto& r : results) {
    std::set<std::string> keys;
    for (const auto& ns : r.analysis.new_scenarios)
      keys.insert(origin_key(ns.shape.path));
    keys_per_product.push_back(std::move(keys));
  }
  int ordinal = 0;
  for (const auto& ns : results.front().analysis.new_scenarios) {
    std::string key = origin_key(ns.shape.path);
    bool everywhere = std::all_of(
        keys_per_product.begin(), keys_per_product.end(),
        [&](const std::set<std::string>& keys) { return keys.count(key) > 0; });
    if (!everywhere) continue;

    NewScenarioView view;
    view.id = "NEW#" + std::to_string(++ordinal);
    view.shape = to_view(ns.shape);
    view.shape.id = view.id;

    struct Sourced {
      GuidanceView view;
      size_t edit_count;
      long removals;
    };
    std::vector<Sourced> sourced;
    for (const auto& r : results) {
      for (const auto& other : r.analysis.new_scenarios) {
        if (origin_key(other.shape.path) != key) continue;
        for (const auto& g : other.guidance) {
          GuidanceView gv;
          gv.source_product = r.product_id;
          gv.source_scenario = g.source_scenario;
          gv.source_tests = g.source_tests;
          gv.edits = g.edits;
          long removals = std::count_if(
              g.edits.begin(), g.edits.end(),
              [](const EditOp& op) { return op.kind == EditOp::Kind::Remove; });
          sourced.push_back({std::move(gv), g.edits.size(), removals});
        }
      }
    }
    size_t best_count = SIZE_MAX;
    for (const auto& s : sourced) best_count = std::min(best_count, s.edit_count);
    long best_removals = -1;
    for (const auto& s : sourced)
      if (s.edit_count == best_count)
        best_removals = std::max(best_removals, s.removals);
    for (auto& s : sourced)
      if (s.edit_count == best_count && s.removals == best_removals)
        view.guidance.push_back(std::move(s.view));
    report.new_scenarios.push_back(std::move(view));
  }
  return report;
}

namespace {

json edits_to_json(const std::vector<EditOp>& edits) {
  json arr = json::array();
  for (const auto& op : edits) {
    json j;
    j["op"] = to_string(op.kind);
    j["origin"] = op.origin;
    j["text"] = op.text;
    j["from_position"] = op.from_position;
    j["position"] = op.position;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<EditOp> edits_from_json(const json& arr) {
  std::vector<EditOp> out;
  for (const auto& j : arr) {
    EditOp op;
    op.kind = op_from(j.at("op").get<std::string>());
    op.origin = j.value("origin", "");
    op.text = j.value("text", "");
    op.from_position = j.value("from_position", 0);
    op.position = j.value("position", 0);
    out.push_back(std::move(op));
  }
  return out;
}

}  // namespace

std::string to_json(const ImpactReport& report) {
  json root;
  root["new_product"] = report.new_product;
  root["previous_products"] = json::array();
  for (const auto& p : report.previous_products) {
    json j;
    j["id"] = p.id;
    j["created_on"] = p.created_on;
    root["previous_products"].push_back(std::move(j));
  }
  root["tests"] = json::array();
  for (const auto& t : report.tests) {
    json j;
    j["product_id"] = t.product_id;
    j["test_id"] = t.test_id;
    j["scenario_id"] = t.scenario_id;
    j["class"] = classify::to_string(t.verdict);
    j["size_v"] = t.size_v;
    j["size_s"] = t.size_s;
    j["reasons"] = json::array();
    for (const auto& r : t.reasons) {
      json jr;
      jr["rule"] = r.rule;
      jr["detail"] = r.detail;
      j["reasons"].push_back(std::move(jr));
    }
    root["tests"].push_back(std::move(j));
  }
  root["selections"] = json::array();
  for (const auto& s : report.selections) {
    json j;
    j["scenario_id"] = s.scenario_id;
    j["class"] = classify::to_string(s.verdict);
    j["manual_choice"] = s.manual_choice;
    auto refs = [](const std::vector<TestRef>& list) {
      json arr = json::array();
      for (const auto& ref : list) {
        json jr;
        jr["product_id"] = ref.product_id;
        jr["test_id"] = ref.test_id;
        arr.push_back(std::move(jr));
      }
      return arr;
    };
    j["chosen"] = refs(s.chosen);
    j["alternatives"] = refs(s.alternatives);
    root["selections"].push_back(std::move(j));
  }
  root["new_scenarios"] = json::array();
  for (const auto& ns : report.new_scenarios) {
    json j;
    j["id"] = ns.id;
    j["root"] = ns.shape.root;
    j["aborts"] = ns.shape.aborts;
    j["size_s"] = ns.shape.size_s;
    j["size_v"] = ns.shape.size_v;
    j["steps"] = json::array();
    for (const auto& st : ns.shape.steps) {
      json js;
      js["origin"] = st.origin;
      js["text"] = st.text;
      js["kind"] = st.kind;
      j["steps"].push_back(std::move(js));
    }
    j["covered_flows"] = json::array();
    for (const auto& cf : ns.shape.covered_flows) {
      json jc;
      jc["use_case"] = cf.use_case;
      jc["flow_id"] = cf.flow_id;
      jc["provenance"] = cf.provenance;
      j["covered_flows"].push_back(std::move(jc));
    }
    j["guidance"] = json::array();
    for (const auto& g : ns.guidance) {
      json jg;
      jg["source_product"] = g.source_product;
      jg["source_scenario"] = g.source_scenario;
      jg["source_tests"] = g.source_tests;
      jg["edits"] = edits_to_json(g.edits);
      j["guidance"].push_back(std::move(jg));
    }
    root["new_scenarios"].push_back(std::move(j));
  }
  root["findings"] = json::array();
  for (const auto& f : report.findings) {
    json j;
    j["severity"] =
        f.severity == Finding::Severity::Warning ? "warning" : "violation";
    j["rule"] = f.rule;
    j["message"] = f.message;
    root["findings"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

ImpactReport parse_report(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object())
    throw Error(ErrorCode::SchemaError, "impact report is not valid JSON");
  ImpactReport report;
  report.new_product = root.value("new_product", "");
  for (const auto& j : root.value("previous_products", json::array()))
    report.previous_products.push_back(
        {j.value("id", ""), j.value("created_on", "")});
  for (const auto& j : root.value("tests", json::array())) {
    TestEntry t;
    t.product_id = j.value("product_id", "");
    t.test_id = j.value("test_id", "");
    t.scenario_id = j.value("scenario_id", "");
    t.verdict = verdict_from(j.at("class").get<std::string>());
    t.size_v = j.value("size_v", 0);
    t.size_s = j.value("size_s", 0);
    for (const auto& jr : j.value("reasons", json::array()))
      t.reasons.push_back({jr.value("rule", ""), jr.value("detail", "")});
    report.tests.push_back(std::move(t));
  }
  for (const auto& j : root.value("selections", json::array())) {
    Selection s;
    s.scenario_id = j.value("scenario_id", "");
    s.verdict = verdict_from(j.at("class").get<std::string>());
    s.manual_choice = j.value("manual_choice", false);
    for (const auto& jr : j.value("chosen", json::array()))
      s.chosen.push_back({jr.value("product_id", ""), jr.value("test_id", "")});
    for (const auto& jr : j.value("alternatives", json::array()))
      s.alternatives.push_back(
          {jr.value("product_id", ""), jr.value("test_id", "")});
    report.selections.push_back(std::move(s));
  }
  for (const auto& j : root.value("new_scenarios", json::array())) {
    NewScenarioView ns;
    ns.id = j.value("id", "");
    ns.shape.id = ns.id;
    ns.shape.root = j.value("root", "");
    ns.shape.aborts = j.value("aborts", false);
    ns.shape.size_s = j.value("size_s", 0);
    ns.shape.size_v = j.value("size_v", 0);
    for (const auto& js : j.value("steps", json::array()))
      ns.shape.steps.push_back({js.value("origin", ""), js.value("text", ""),
                                js.value("kind", "")});
    for (const auto& jc : j.value("covered_flows", json::array())) {
      scenario::CoveredFlow cf;
      cf.use_case = jc.value("use_case", "");
      cf.flow_id = jc.value("flow_id", "");
      cf.provenance = jc.value("provenance", "");
      ns.shape.covered_flows.push_back(std::move(cf));
    }
    for (const auto& jg : j.value("guidance", json::array())) {
      GuidanceView g;
      g.source_product = jg.value("source_product", "");
      g.source_scenario = jg.value("source_scenario", "");
      for (const auto& t : jg.value("source_tests", json::array()))
        g.source_tests.push_back(t.get<std::string>());
      g.edits = edits_from_json(jg.value("edits", json::array()));
      ns.guidance.push_back(std::move(g));
    }
    report.new_scenarios.push_back(std::move(ns));
  }
  for (const auto& j : root.value("findings", json::array())) {
    Finding f;
    f.severity = j.value("severity", "") == "warning"
                     ? Finding::Severity::Warning
                     : Finding::Severity::Violation;
    f.rule = j.value("rule", "");
    f.message = j.value("message", "");
    report.findings.push_back(std::move(f));
  }
  return report;
}

std::string to_csv(const ImpactReport& report) {
  std::string out = "test_id,product_id,class,scenario_id\n";
  for (const auto& t : report.tests) {
    out += csv::write_row({t.test_id, t.product_id,
                           classify::to_string(t.verdict), t.scenario_id});
    out += "\n";
  }
  return out;
}

std::string to_html(const ImpactReport& report) {
  std::string h;
  h += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  h += "<title>Impact report: " + html_escape(report.new_product) +
       "</title>\n";
  h += "<style>\n";
  h += "body { font-family: sans-serif; margin: 2em; }\n";
  h += "table { border-collapse: collapse; }\n";
  h += "td, th { border: 1px solid #999; padding: 4px 8px; }\n";
  h += ".add { color: #060; background: #e6ffe6; }\n";
  h += ".del { color: #900; background: #ffe6e6; text-decoration: line-through; }\n";
  h += ".move { color: #036; background: #e6f0ff; }\n";
  h += "</style>\n</head>\n<body>\n";
  h += "<h1>Impact report for " + html_escape(report.new_product) + "</h1>\n";

  h += "<h2>Test classification</h2>\n<table>\n";
  h += "<tr><th>test</th><th>product</th><th>class</th><th>scenario</th></tr>\n";
  for (const auto& t : report.tests) {
    h += "<tr><td>" + html_escape(t.test_id) + "</td><td>" +
         html_escape(t.product_id) + "</td><td>" +
         classify::to_string(t.verdict) + "</td><td>" +
         html_escape(t.scenario_id) + "</td></tr>\n";
  }
  h += "</table>\n";

  h += "<h2>Test selection</h2>\n<table>\n";
  h += "<tr><th>scenario</th><th>class</th><th>selected tests</th>"
       "<th>note</th></tr>\n";
  for (const auto& s : report.selections) {
    std::string tests;
    for (const auto& ref : s.chosen) {
      if (!tests.empty()) tests += ", ";
      tests += ref.test_id + " (" + ref.product_id + ")";
    }
    h += "<tr><td>" + html_escape(s.scenario_id) + "</td><td>" +
         classify::to_string(s.verdict) + "</td><td>" + html_escape(tests) +
         "</td><td>" + (s.manual_choice ? "manual choice required" : "") +
         "</td></tr>\n";
  }
  h += "</table>\n";

  h += "<h2>New scenarios</h2>\n";
  h += "<p>Legend: <span class=\"add\">added step</span>, "
       "<span class=\"del\">removed step</span>, "
       "<span class=\"move\">reordered step</span></p>\n";
  for (const auto& ns : report.new_scenarios) {
    h += "<h3>" + html_escape(ns.id) + " (" + html_escape(ns.shape.root) +
         ")</h3>\n<ol>\n";
    for (const auto& st : ns.shape.steps)
      h += "<li>" + html_escape(st.text) + "</li>\n";
    h += "</ol>\n";
    for (const auto& g : ns.guidance) {
      std::string tests;
      for (const auto& t : g.source_tests) {
        if (!tests.empty()) tests += ", ";
        tests += t;
      }
      h += "<p>Guidance from scenario " + html_escape(g.source_scenario) +
           " of " + html_escape(g.source_product) + " (tests: " +
           html_escape(tests) + ")</p>\n<ul>\n";
      for (const auto& op : g.edits) {
        switch (op.kind) {
          case EditOp::Kind::Add:
            h += "<li class=\"add\">+ " + html_escape(op.text) + "</li>\n";
            break;
          case EditOp::Kind::Remove:
            h += "<li class=\"del\">- " + html_escape(op.text) + "</li>\n";
            break;
          case EditOp::Kind::Reorder:
            h += "<li class=\"move\">&#8633; " + html_escape(op.text) +
                 " (to position " + std::to_string(op.position) + ")</li>\n";
            break;
        }
      }
      h += "</ul>\n";
    }
  }
  h += "</body>\n</html>\n";
  return h;
}

std::string features_csv(const ImpactReport& report) {
  std::map<std::pair<std::string, std::string>, const TestEntry*> by_ref;
  for (const auto& t : report.tests) by_ref[{t.product_id, t.test_id}] = &t;

  std::string out = "product_id,test_id,V,S,R,is_new_scenario\n";
  std::set<std::string> emitted;
  for (const auto& sel : report.selections) {
    for (const auto& ref : sel.chosen) {
      if (!emitted.insert(ref.test_id).second) continue;
      const TestEntry* entry = by_ref.at({ref.product_id, ref.test_id});
      out += csv::write_row(
          {report.new_product, ref.test_id, std::to_string(entry->size_v),
           std::to_string(entry->size_s),
           entry->verdict == Verdict::Retestable ? "1" : "0", "0"});
      out += "\n";
    }
  }
  for (const auto& ns : report.new_scenarios) {
    out += csv::write_row({report.new_product, ns.id,
                           std::to_string(ns.shape.size_v),
                           std::to_string(ns.shape.size_s), "1", "1"});
    out += "\n";
  }
  return out;
}

}  // namespace plucase::report
