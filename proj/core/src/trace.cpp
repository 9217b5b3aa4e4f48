#include "plucase/trace.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "plucase/csv.hpp"
#include "plucase/text.hpp"

namespace plucase::trace {
namespace {

using scenario::Scenario;

bool is_basic(const std::string& flow_id) { return flow_id == "BF"; }

using FlowKey = std::pair<std::string, std::string>;

std::set<FlowKey> alt_covered(const Scenario& s) {
  std::set<FlowKey> out;
  for (const auto& cf : s.covered_flows)
    if (!is_basic(cf.flow_id)) out.insert({cf.use_case, cf.flow_id});
  return out;
}

std::set<FlowKey> covered(const Scenario& s) {
  std::set<FlowKey> out;
  for (const auto& cf : s.covered_flows) out.insert({cf.use_case, cf.flow_id});
  return out;
}

// Step at which the scenario enters the given flow: the label of the
// last in-flow step node preceding the flow's first covered node.
std::string entry_step(const Scenario& s, const FlowKey& key) {
  std::string last_label;
  for (const auto& n : s.path) {
    if (n.use_case == key.first && n.flow_id == key.second && !n.label.empty())
      return last_label;
    if (n.use_case == key.first && !n.label.empty()) last_label = n.label;
  }
  return "";
}

bool matches_order(const Scenario& s, const TracedTest& t) {
  std::vector<const TraceLink*> ordered;
  for (const auto& l : t.links)
    if (l.order > 0) ordered.push_back(&l);
  if (ordered.empty()) return true;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const TraceLink* a, const TraceLink* b) {
                     return a->order < b->order;
                   });
  std::set<FlowKey> traced;
  for (const auto* l : ordered) traced.insert({l->use_case, l->flow_id});
  std::vector<FlowKey> entry_sequence;
  for (const auto& cf : s.covered_flows) {
    FlowKey key{cf.use_case, cf.flow_id};
    if (traced.count(key)) entry_sequence.push_back(key);
  }
  if (entry_sequence.size() != ordered.size()) return false;
  for (size_t i = 0; i < ordered.size(); ++i)
    if (entry_sequence[i] != FlowKey{ordered[i]->use_case, ordered[i]->flow_id})
      return false;
  return true;
}

bool matches_entry_steps(const Scenario& s, const TracedTest& t) {
  for (const auto& l : t.links) {
    if (l.to_step.empty()) continue;
    if (entry_step(s, {l.use_case, l.flow_id}) != l.to_step) return false;
  }
  return true;
}

}  // namespace

std::vector<TracedTest> parse_traces(const std::string& content) {
  csv::Table table = csv::parse(content);
  int c_test = table.column("test_id");
  int c_uc = table.column("use_case");
  int c_flow = table.column("flow_id");
  int c_order = table.column("order");
  int c_to = table.column("to_step");
  if (c_test < 0 || c_uc < 0 || c_flow < 0)
    throw Error(ErrorCode::SchemaError,
                "trace file needs columns test_id,use_case,flow_id", 1);
  std::vector<TracedTest> tests;
  std::map<std::string, size_t> index;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    int line = static_cast<int>(r) + 2;
    TraceLink link;
    link.test_id = text::trim(row[c_test]);
    link.use_case = text::trim(row[c_uc]);
    link.flow_id = text::trim(row[c_flow]);
    if (link.test_id.empty() || link.use_case.empty() || link.flow_id.empty())
      throw Error(ErrorCode::SchemaError, "empty trace field", line);
    if (c_order >= 0 && !text::trim(row[c_order]).empty()) {
      try {
        link.order = std::stoi(text::trim(row[c_order]));
      } catch (const std::exception&) {
        throw Error(ErrorCode::SchemaError,
                    "order must be an integer: '" + row[c_order] + "'", line);
      }
      if (link.order < 1)
        throw Error(ErrorCode::SchemaError, "order must be >= 1", line);
    }
    if (c_to >= 0) link.to_step = text::trim(row[c_to]);
    auto it = index.find(link.test_id);
    if (it == index.end()) {
      index[link.test_id] = tests.size();
      tests.push_back({link.test_id, {}});
      it = index.find(link.test_id);
    }
    tests[it->second].links.push_back(link);
  }
  return tests;
}

std::vector<TracedTest> read_traces(const std::string& path) {
  return parse_traces(text::read_text_file(path));
}

std::map<std::string, std::string> read_overrides(const std::string& path) {
  csv::Table table = csv::read_file(path);
  int c_test = table.column("test_id");
  int c_scen = table.column("scenario_id");
  if (c_test < 0 || c_scen < 0)
    throw Error(ErrorCode::SchemaError,
                "overrides file needs columns test_id,scenario_id", 1);
  std::map<std::string, std::string> out;
  for (const auto& row : table.rows)
    out[text::trim(row[c_test])] = text::trim(row[c_scen]);
  return out;
}

MatchResult match_tests(const std::vector<Scenario>& scenarios,
                        const std::vector<TracedTest>& tests,
                        const std::map<std::string, std::string>& overrides) {
  MatchResult result;
  for (const auto& t : tests) {
    std::set<std::string> traced_ucs;
    std::set<FlowKey> traced_alt;
    std::set<FlowKey> traced_basic;
    for (const auto& l : t.links) {
      traced_ucs.insert(l.use_case);
      (is_basic(l.flow_id) ? traced_basic : traced_alt)
          .insert({l.use_case, l.flow_id});
    }
    std::vector<const Scenario*> candidates;
    for (const auto& s : scenarios) {
      if (!traced_ucs.count(s.root)) continue;
      if (alt_covered(s) != traced_alt) continue;
      std::set<FlowKey> cov = covered(s);
      bool basics_ok = std::all_of(
          traced_basic.begin(), traced_basic.end(),
          [&](const FlowKey& key) { return cov.count(key) > 0; });
      if (basics_ok) candidates.push_back(&s);
    }
    if (candidates.size() > 1) {
      std::vector<const Scenario*> narrowed;
      for (const auto* s : candidates)
        if (matches_order(*s, t) && matches_entry_steps(*s, t))
          narrowed.push_back(s);
      if (!narrowed.empty()) candidates = narrowed;
    }
    if (candidates.size() > 1) {
      auto it = overrides.find(t.test_id);
      if (it != overrides.end()) {
        for (const auto* s : candidates) {
          if (s->id == it->second) {
            candidates = {s};
            break;
          }
        }
      }
    }
    if (candidates.empty()) {
      result.findings.push_back(
          {Finding::Severity::Warning, "unmatched-test",
           "test '" + t.test_id +
               "' traces no enumerated scenario; excluded from analysis"});
      continue;
    }
    if (candidates.size() > 1) {
      std::string list;
      for (const auto* s : candidates) {
        if (!list.empty()) list += ", ";
        list += s->id;
      }
      throw Error(ErrorCode::AmbiguousTrace,
                  "test '" + t.test_id + "' matches several scenarios: " +
                      list + "; resolve via an overrides file");
    }
    result.test_to_scenario[t.test_id] = candidates[0]->id;
    result.scenario_to_tests[candidates[0]->id].push_back(t.test_id);
  }
  for (auto& [id, list] : result.scenario_to_tests)
    std::sort(list.begin(), list.end());
  return result;
}

}  // namespace plucase::trace
