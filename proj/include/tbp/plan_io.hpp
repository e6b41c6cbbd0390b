#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tbp/model.hpp"
#include "tbp/plan.hpp"

namespace tbp {

struct PlanReadResult {
  std::optional<FlexiblePlan> plan;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return plan.has_value(); }
};

// Renders a plan as JSON. Keys appear in a fixed order and infinite window
// ends print as "+inf", so write -> read -> write reproduces the input byte
// for byte.
std::string write_plan(const FlexiblePlan& plan);

// Parses what write_plan produces. All structural problems are reported as
// diagnostics; no plan is returned unless the whole document is sound,
// including every relation operand resolving to a token.
PlanReadResult read_plan(const std::string& text);

}  // namespace tbp
