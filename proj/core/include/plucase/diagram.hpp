#ifndef PLUCASE_DIAGRAM_HPP
#define PLUCASE_DIAGRAM_HPP

#include <string>
#include <string_view>
#include <vector>

#include "plucase/error.hpp"
#include "plucase/rucm.hpp"

namespace plucase::diagram {

// A group of variant use cases selectable at a variation point, with a
// [min..max] cardinality. The relation is mandatory exactly when every
// variant must be selected (min = max = n); otherwise it is optional.
struct VariabilityRelation {
  std::vector<std::string> variants;
  int min = 0;
  int max = 0;

  int n() const { return static_cast<int>(variants.size()); }
  bool mandatory() const { return min == max && max == n(); }
};

struct VariationPoint {
  std::string name;
  bool mandatory = false;  // the customer must make a selection here
  std::vector<VariabilityRelation> relations;

  std::vector<std::string> all_variants() const;
};

struct Include {
  enum class Kind { UseCase, VariationPoint };
  std::string from;  // including use case
  std::string to;    // included use case or variation point
  Kind kind = Kind::UseCase;
};

struct Dependency {
  enum class Kind { Require, Conflict };
  Kind kind = Kind::Require;
  std::string from;
  std::string to;
};

struct PLDiagram {
  struct UseCaseRef {
    std::string name;
    bool variant = false;
  };

  std::vector<UseCaseRef> use_cases;
  std::vector<VariationPoint> variation_points;
  std::vector<Include> includes;
  std::vector<Dependency> dependencies;

  const VariationPoint* find_variation_point(std::string_view name) const;
  bool has_use_case(std::string_view name) const;
  bool is_variant(std::string_view name) const;
  // Including use cases of a variation point, in declaration order.
  std::vector<std::string> including_use_cases(std::string_view vp) const;
};

// Parses and validates the diagram JSON. Throws SchemaError on malformed
// documents and UnknownReference on dangling includes/dependencies,
// orphan variation points, or relations over unknown variants.
PLDiagram parse_diagram(std::string_view json_text);
PLDiagram read_diagram(const std::string& path);
std::string serialize_diagram(const PLDiagram& diagram);

// Consistency between the diagram and the specification document:
// variation points included in specs but missing from the diagram,
// variant use cases lacking a specification, and vice versa.
Findings cross_check(const PLDiagram& diagram,
                     const rucm::UseCaseDocument& spec);

}  // namespace plucase::diagram

#endif
