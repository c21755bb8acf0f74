#pragma once

#include <map>

#include "probcirc/matrix.hpp"
#include "probcirc/surface.hpp"

namespace probcirc::testsupport {

/// Independent reference semantics for programs: a direct weighted-world
/// interpreter over value words. Function calls are interpreted by
/// evaluating the argument and then the body, without using the library's
/// inliner, and each of the three parts of a conditional contributes its
/// weight, matching the compositional circuit semantics.
///
/// Returns the unnormalised transition matrix from context words (free
/// variables of main, first occurrence first / most significant first) to
/// result words.
SubStochMatrix interp_matrix(const surface::Program& p);

}  // namespace probcirc::testsupport
