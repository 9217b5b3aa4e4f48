#include <string>
#include <vector>

#include "doctest.h"
#include "plucase/report.hpp"

using namespace plucase;
using classify::Verdict;
using report::ProductResult;

namespace {

scenario::Scenario make_scenario(const std::string& id,
                                 const std::vector<std::string>& origins,
                                 int size_v = 1, int size_s = 0) {
  scenario::Scenario s;
  s.id = id;
  s.root = "M";
  for (const auto& o : origins) {
    scenario::Node n;
    n.kind = scenario::NodeKind::Internal;
    n.origin = o;
    n.text = "step " + o;
    s.path.push_back(n);
  }
  s.size_s = size_s ? size_s : static_cast<int>(origins.size());
  s.size_v = size_v;
  s.covered_flows.push_back({"M", "BF", ""});
  return s;
}

ProductResult make_product(const std::string& id, const std::string& date,
                           const std::string& scenario_id,
                           const std::string& test_id, Verdict verdict) {
  ProductResult r;
  r.product_id = id;
  r.created_on = date;
  r.scenarios.push_back(make_scenario(scenario_id, {"p", "q"}));
  classify::TestVerdict tv;
  tv.test_id = test_id;
  tv.scenario_id = scenario_id;
  tv.verdict = verdict;
  r.analysis.tests.push_back(tv);
  if (verdict != Verdict::Obsolete)
    r.analysis.successors[test_id] =
        make_scenario(scenario_id, {"p", "q"}, id == "A" ? 2 : 3,
                      id == "A" ? 5 : 6);
  return r;
}

classify::NewScenario make_new(const std::vector<std::string>& origins,
                               const std::string& source_scenario,
                               const std::string& source_test,
                               std::vector<classify::EditOp> edits) {
  classify::NewScenario ns;
  ns.id = "NEW#9";
  ns.shape = make_scenario("NEW#9", origins);
  ns.shape.aborts = true;
  classify::Guidance g;
  g.source_scenario = source_scenario;
  g.source_tests = {source_test};
  g.edits = std::move(edits);
  ns.guidance.push_back(std::move(g));
  return ns;
}

classify::EditOp op(classify::EditOp::Kind kind, const std::string& origin,
                    int from = 0, int to = 0) {
  classify::EditOp e;
  e.kind = kind;
  e.origin = origin;
  e.text = "step " + origin;
  e.from_position = from;
  e.position = to;
  return e;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("aggregate rejects an empty product list") {
  CHECK_THROWS_AS(report::aggregate("P", {}), Error);
  try {
    report::aggregate("P", {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
}

TEST_CASE("the most recent product wins a shared scenario") {
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Reusable);
  auto b = make_product("B", "2016-01-01", "B#7", "tb", Verdict::Reusable);
  auto rep = report::aggregate("P3", {a, b});

  CHECK(rep.new_product == "P3");
  REQUIRE(rep.previous_products.size() == 2);
  CHECK(rep.previous_products[0].id == "A");
  CHECK(rep.previous_products[0].created_on == "2015-01-01");

  REQUIRE(rep.tests.size() == 2);
  CHECK(rep.tests[0].product_id == "A");
  CHECK(rep.tests[0].size_v == 2);
  CHECK(rep.tests[0].size_s == 5);
  CHECK(rep.tests[1].product_id == "B");
  CHECK(rep.tests[1].size_v == 3);
  CHECK(rep.tests[1].size_s == 6);

  REQUIRE(rep.selections.size() == 1);
  const auto& sel = rep.selections[0];
  CHECK(sel.scenario_id == "B#7");
  CHECK(sel.verdict == Verdict::Reusable);
  CHECK_FALSE(sel.manual_choice);
  REQUIRE(sel.chosen.size() == 1);
  CHECK(sel.chosen[0] == report::TestRef{"B", "tb"});
  REQUIRE(sel.alternatives.size() == 1);
  CHECK(sel.alternatives[0] == report::TestRef{"A", "t1"});
  CHECK(rep.findings.empty());
  CHECK(rep.new_scenarios.empty());
}

TEST_CASE("mixed classes require a manual choice") {
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Reusable);
  auto b = make_product("B", "2016-01-01", "B#7", "tb", Verdict::Retestable);
  auto rep = report::aggregate("P3", {a, b});

  REQUIRE(rep.selections.size() == 1);
  const auto& sel = rep.selections[0];
  CHECK(sel.manual_choice);
  CHECK(sel.verdict == Verdict::Retestable);
  REQUIRE(sel.chosen.size() == 2);
  CHECK(sel.chosen[0] == report::TestRef{"A", "t1"});
  CHECK(sel.chosen[1] == report::TestRef{"B", "tb"});
  CHECK(sel.alternatives.empty());
}

TEST_CASE("a created_on tie is broken by product id and reported") {
  auto a = make_product("A", "2015-06-10", "A#1", "t1", Verdict::Reusable);
  auto b = make_product("B", "2015-06-10", "B#7", "tb", Verdict::Reusable);
  auto rep = report::aggregate("P3", {a, b});

  REQUIRE(rep.selections.size() == 1);
  CHECK(rep.selections[0].chosen ==
        std::vector<report::TestRef>{{"B", "tb"}});
  REQUIRE(rep.findings.size() == 1);
  CHECK(rep.findings[0].rule == "recency-tie");
  CHECK(rep.findings[0].severity == Finding::Severity::Warning);
  CHECK(rep.findings[0].message ==
        "scenario 'B#7': products 'A', 'B' share created_on 2015-06-10; "
        "tests of 'B' chosen by product id");
}

TEST_CASE("obsolete tests are listed but never selected") {
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Obsolete);
  auto rep = report::aggregate("P3", {a});
  REQUIRE(rep.tests.size() == 1);
  CHECK(rep.tests[0].verdict == Verdict::Obsolete);
  CHECK(rep.tests[0].size_v == 0);
  CHECK(rep.tests[0].size_s == 0);
  CHECK(rep.selections.empty());
}

TEST_CASE("scenarios with different steps form separate selections") {
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Reusable);
  classify::TestVerdict tv;
  tv.test_id = "t2";
  tv.scenario_id = "A#2";
  tv.verdict = Verdict::Retestable;
  a.analysis.tests.push_back(tv);
  a.analysis.successors["t2"] = make_scenario("A#2", {"p", "r"});
  a.scenarios.push_back(make_scenario("A#2", {"p", "r"}));

  auto rep = report::aggregate("P3", {a});
  REQUIRE(rep.selections.size() == 2);
  CHECK(rep.selections[0].scenario_id == "A#1");
  CHECK(rep.selections[1].scenario_id == "A#2");
  CHECK(rep.selections[1].verdict == Verdict::Retestable);
}

TEST_CASE("product findings are tagged with their product") {
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Reusable);
  a.analysis.findings.push_back({Finding::Severity::Warning, "unmatched-test",
                                 "test 'z' traces no enumerated scenario; "
                                 "excluded from analysis"});
  auto rep = report::aggregate("P3", {a});
  REQUIRE(rep.findings.size() == 1);
  CHECK(rep.findings[0].message ==
        "A: test 'z' traces no enumerated scenario; excluded from analysis");
}

TEST_CASE("new scenarios survive only when every product derives them") {
  using K = classify::EditOp::Kind;
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Obsolete);
  a.analysis.new_scenarios.push_back(make_new(
      {"n1", "n2"}, "A#1", "t1", {op(K::Remove, "x", 3), op(K::Add, "y", 0, 3)}));
  a.analysis.new_scenarios.push_back(
      make_new({"n9"}, "A#1", "t1", {op(K::Add, "z", 0, 1)}));

  auto b = make_product("B", "2016-01-01", "B#7", "tb", Verdict::Obsolete);
  auto shared = make_new({"n1", "n2"}, "B#7", "tb", {op(K::Remove, "x", 3)});
  classify::Guidance more;
  more.source_scenario = "B#8";
  more.source_tests = {"tc"};
  more.edits = {op(K::Add, "w", 0, 2)};
  shared.guidance.push_back(more);
  b.analysis.new_scenarios.push_back(shared);

  auto rep = report::aggregate("P3", {a, b});
  REQUIRE(rep.new_scenarios.size() == 1);
  const auto& ns = rep.new_scenarios[0];
  CHECK(ns.id == "NEW#1");
  CHECK(ns.shape.id == "NEW#1");
  CHECK(ns.shape.aborts);
  REQUIRE(ns.shape.steps.size() == 2);
  CHECK(ns.shape.steps[0].origin == "n1");
  CHECK(ns.shape.steps[0].kind == "internal");

  // Guidance keeps the fewest edits, removal-heavy on ties: only B's
  // one-removal source survives against its one-add sibling and A's
  // two-edit script.
  REQUIRE(ns.guidance.size() == 1);
  CHECK(ns.guidance[0].source_product == "B");
  CHECK(ns.guidance[0].source_scenario == "B#7");
  CHECK(ns.guidance[0].source_tests == std::vector<std::string>{"tb"});
  REQUIRE(ns.guidance[0].edits.size() == 1);
  CHECK(ns.guidance[0].edits[0].kind == K::Remove);
}

TEST_CASE("new scenario ordinals are assigned after intersection") {
  using K = classify::EditOp::Kind;
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Obsolete);
  a.analysis.new_scenarios.push_back(
      make_new({"only-a"}, "A#1", "t1", {op(K::Add, "z", 0, 1)}));
  a.analysis.new_scenarios.push_back(
      make_new({"n1", "n2"}, "A#1", "t1", {op(K::Remove, "x", 3)}));
  auto b = make_product("B", "2016-01-01", "B#7", "tb", Verdict::Obsolete);
  b.analysis.new_scenarios.push_back(
      make_new({"n1", "n2"}, "B#7", "tb", {op(K::Remove, "x", 3)}));

  auto rep = report::aggregate("P3", {a, b});
  REQUIRE(rep.new_scenarios.size() == 1);
  CHECK(rep.new_scenarios[0].id == "NEW#1");
}

TEST_CASE("json serialization round-trips") {
  using K = classify::EditOp::Kind;
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Retestable);
  a.analysis.tests[0].reasons.push_back(
      {classify::rules::internal_changed, "M/BF: internal step updated 'x'"});
  a.analysis.new_scenarios.push_back(make_new(
      {"n1", "n2"}, "A#1", "t1",
      {op(K::Remove, "x", 3), op(K::Add, "y", 0, 3), op(K::Reorder, "q", 5, 2)}));
  auto b = make_product("B", "2015-01-01", "B#7", "tb", Verdict::Reusable);
  b.analysis.new_scenarios.push_back(
      make_new({"n1", "n2"}, "B#7", "tb", {op(K::Remove, "x", 3)}));

  auto rep = report::aggregate("P3", {a, b});
  REQUIRE(!rep.findings.empty());  // recency tie plus manual choice data

  std::string json_text = report::to_json(rep);
  CHECK(json_text.back() == '\n');
  auto parsed = report::parse_report(json_text);
  CHECK(report::to_json(parsed) == json_text);

  CHECK_THROWS_AS(report::parse_report("{ not json"), Error);
  CHECK_THROWS_AS(report::parse_report("[1, 2]"), Error);
}

TEST_CASE("csv lists one row per classified test") {
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Reusable);
  auto b = make_product("B", "2016-01-01", "B#7", "tb", Verdict::Obsolete);
  auto rep = report::aggregate("P3", {a, b});
  CHECK(report::to_csv(rep) ==
        "test_id,product_id,class,scenario_id\n"
        "t1,A,reusable,A#1\n"
        "tb,B,obsolete,B#7\n");
}

TEST_CASE("html report marks edits and manual choices") {
  using K = classify::EditOp::Kind;
  auto a = make_product("A&Co", "2015-01-01", "A#1", "t1", Verdict::Reusable);
  auto b = make_product("B", "2016-01-01", "B#7", "tb", Verdict::Retestable);
  b.analysis.new_scenarios.push_back(make_new(
      {"n1"}, "B#7", "tb",
      {op(K::Add, "y", 0, 3), op(K::Remove, "x", 2), op(K::Reorder, "q", 5, 4)}));
  a.analysis.new_scenarios.push_back(make_new(
      {"n1"}, "A#1", "t1",
      {op(K::Add, "y", 0, 3), op(K::Remove, "x", 2), op(K::Reorder, "q", 5, 4)}));

  auto rep = report::aggregate("P3", {a, b});
  auto html = report::to_html(rep);
  CHECK(html.find("manual choice required") != std::string::npos);
  CHECK(html.find("<li class=\"add\">+ step y</li>") != std::string::npos);
  CHECK(html.find("<li class=\"del\">- step x</li>") != std::string::npos);
  CHECK(html.find("(to position 4)") != std::string::npos);
  CHECK(html.find("A&amp;Co") != std::string::npos);
  CHECK(html.find("A&Co") == std::string::npos);
}

TEST_CASE("features csv covers chosen tests and new scenarios") {
  using K = classify::EditOp::Kind;
  auto a = make_product("A", "2015-01-01", "A#1", "t1", Verdict::Reusable);
  auto b = make_product("B", "2016-01-01", "B#7", "tb", Verdict::Retestable);
  // Same test id traced to a second scenario in B: the row is emitted once.
  classify::TestVerdict tv;
  tv.test_id = "tb";
  tv.scenario_id = "B#8";
  tv.verdict = Verdict::Retestable;
  b.analysis.tests.push_back(tv);
  b.scenarios.push_back(make_scenario("B#8", {"z"}));
  b.analysis.new_scenarios.push_back(
      make_new({"n1", "n2", "n3"}, "B#7", "tb", {op(K::Remove, "x", 1)}));
  a.analysis.new_scenarios.push_back(
      make_new({"n1", "n2", "n3"}, "A#1", "t1", {op(K::Remove, "x", 1)}));

  auto rep = report::aggregate("P3", {a, b});
  auto csv_text = report::features_csv(rep);
  CHECK(csv_text ==
        "product_id,test_id,V,S,R,is_new_scenario\n"
        "P3,t1,2,5,0,0\n"
        "P3,tb,3,6,1,0\n"
        "P3,NEW#1,1,3,1,1\n");
}

}
