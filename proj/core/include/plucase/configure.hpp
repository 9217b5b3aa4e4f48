#ifndef PLUCASE_CONFIGURE_HPP
#define PLUCASE_CONFIGURE_HPP

#include "plucase/decision.hpp"
#include "plucase/diagram.hpp"
#include "plucase/error.hpp"
#include "plucase/rucm.hpp"

namespace plucase::configure {

struct SpecResult {
  rucm::UseCaseDocument spec;
  Findings warnings;
};

// Materializes the product-specific diagram: essential use cases plus the
// variant use cases selected by the decisions (transitively reachable
// through their including use cases), variation points replaced by plain
// include relations. Throws InvalidDecisions when the decisions do not
// validate against the product line artifacts.
diagram::PLDiagram generate_ps_diagram(const diagram::PLDiagram& pl,
                                       const rucm::UseCaseDocument& pl_spec,
                                       const decision::DecisionModel& m);

// Derives the product-specific specification: unselected optional flows
// and steps removed, selected variant-order steps emitted in the decided
// order, variation point includes substituted (single selected variant:
// a plain include; several: a validation-step chain with one specific
// alternative flow per further variant), steps renumbered and rfs
// references remapped. Generated elements carry provenance stamps naming
// the decision that produced them. Warnings report variants without a
// precondition used in a validation chain.
SpecResult generate_ps_specification(const rucm::UseCaseDocument& pl,
                                     const diagram::PLDiagram& pl_diagram,
                                     const decision::DecisionModel& m);

}  // namespace plucase::configure

#endif
