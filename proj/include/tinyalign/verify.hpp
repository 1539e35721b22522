#pragma once

#include <functional>
#include <string>

namespace tinyalign {

// Numeric property suite behind the `verify` CLI command: tilting identity,
// convexity/monotonicity, CD reductions, gradient checks, oracle agreement.
// Reports one line per check through `report` and returns true when every
// check passes.
bool run_verification(const std::function<void(const std::string&)>& report);

}  // namespace tinyalign
