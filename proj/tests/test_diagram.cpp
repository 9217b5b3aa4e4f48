#include <algorithm>

#include "doctest.h"
#include "plucase/diagram.hpp"
#include "plucase/text.hpp"
#include "support/util.hpp"

using namespace plucase;

TEST_SUITE("diagram") {

TEST_CASE("parses the fixture diagram") {
  auto d = diagram::read_diagram(testing::fixture("sto_mini/diagram.json"));
  CHECK(d.use_cases.size() == 11);
  CHECK(d.is_variant("Provide Data via Standard Mode"));
  CHECK_FALSE(d.is_variant("Recognize Gesture"));
  CHECK(d.has_use_case("Clear Error Data"));
  CHECK_FALSE(d.has_use_case("Nope"));

  const auto* vp = d.find_variation_point("Method of Providing Data");
  REQUIRE(vp != nullptr);
  CHECK(vp->mandatory);
  REQUIRE(vp->relations.size() == 2);
  CHECK(vp->relations[0].mandatory());
  CHECK(vp->relations[0].min == 2);
  CHECK(vp->relations[0].max == 2);
  CHECK_FALSE(vp->relations[1].mandatory());
  auto all = vp->all_variants();
  CHECK(all.size() == 3);

  auto inc = d.including_use_cases("Method of Providing Data");
  CHECK(inc == std::vector<std::string>{"Provide System User Data"});

  REQUIRE(d.dependencies.size() == 1);
  CHECK(d.dependencies[0].kind == diagram::Dependency::Kind::Require);
  CHECK(d.dependencies[0].from == "Store Error Status");
}

TEST_CASE("serialization round-trips byte-stably") {
  auto d = diagram::read_diagram(testing::fixture("sto_mini/diagram.json"));
  std::string once = diagram::serialize_diagram(d);
  auto reparsed = diagram::parse_diagram(once);
  CHECK(diagram::serialize_diagram(reparsed) == once);
}

TEST_CASE("rejects malformed documents") {
  auto code_of = [](const char* json) {
    try {
      diagram::parse_diagram(json);
      return ErrorCode::NoFailures;
    } catch (const Error& e) {
      return e.code();
    }
  };

  CHECK(code_of("not json") == ErrorCode::SchemaError);
  CHECK(code_of("[]") == ErrorCode::SchemaError);
  // Relation over a variant that is not declared.
  CHECK(code_of(R"({
    "use_cases": [{"name": "A", "variant": false}],
    "variation_points": [{
      "name": "P", "mandatory": true,
      "relations": [{"variants": ["Ghost"], "min": 1, "max": 1}]
    }],
    "includes": [{"from": "A", "to": "P", "kind": "variation-point"}],
    "dependencies": []
  })") == ErrorCode::UnknownReference);
  // Include of an unknown target.
  CHECK(code_of(R"({
    "use_cases": [{"name": "A", "variant": false}],
    "variation_points": [],
    "includes": [{"from": "A", "to": "B", "kind": "use-case"}],
    "dependencies": []
  })") == ErrorCode::UnknownReference);
  // Orphan variation point: nothing includes it.
  CHECK(code_of(R"({
    "use_cases": [{"name": "A", "variant": false},
                  {"name": "B", "variant": true}],
    "variation_points": [{
      "name": "P", "mandatory": false,
      "relations": [{"variants": ["B"], "min": 0, "max": 1}]
    }],
    "includes": [],
    "dependencies": []
  })") == ErrorCode::UnknownReference);
  // Cardinality outside 0 <= min <= max <= n.
  CHECK(code_of(R"({
    "use_cases": [{"name": "A", "variant": false},
                  {"name": "B", "variant": true}],
    "variation_points": [{
      "name": "P", "mandatory": false,
      "relations": [{"variants": ["B"], "min": 2, "max": 1}]
    }],
    "includes": [{"from": "A", "to": "P", "kind": "variation-point"}],
    "dependencies": []
  })") == ErrorCode::SchemaError);
}

TEST_CASE("cross_check relates diagram and specification") {
  auto spec = rucm::parse_specification(
      "USE CASE A\n"
      "1 Basic Flow\n"
      "1. INCLUDE ⟨VARIATION POINT : Ghost Point⟩.\n"
      "\n"
      "⟨VARIANT⟩ USE CASE Spec Only Variant\n"
      "1 Basic Flow\n"
      "1. x.\n");
  auto d = diagram::parse_diagram(R"({
    "use_cases": [{"name": "A", "variant": false},
                  {"name": "Diagram Only Variant", "variant": true}],
    "variation_points": [{
      "name": "P", "mandatory": false,
      "relations": [{"variants": ["Diagram Only Variant"],
                     "min": 0, "max": 1}]
    }],
    "includes": [{"from": "A", "to": "P", "kind": "variation-point"}],
    "dependencies": []
  })");
  auto findings = diagram::cross_check(d, spec);
  auto has = [&](const char* rule) {
    return std::any_of(findings.begin(), findings.end(),
                       [&](const Finding& f) { return f.rule == rule; });
  };
  CHECK(has("vp-not-in-diagram"));       // Ghost Point
  CHECK(has("variant-not-in-diagram"));  // Spec Only Variant
  CHECK(has("variant-without-spec"));    // Diagram Only Variant
}

TEST_CASE("fixture diagram and spec cross_check cleanly") {
  auto d = diagram::read_diagram(testing::fixture("sto_mini/diagram.json"));
  auto spec = rucm::read_specification(testing::fixture("sto_mini/pl.rucm"));
  auto findings = diagram::cross_check(d, spec);
  for (const auto& f : findings) {
    CAPTURE(f.rule);
    CAPTURE(f.message);
  }
  CHECK(findings.empty());
}

}
