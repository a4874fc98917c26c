#pragma once

#include <string>

#include "cantor/tower.hpp"

namespace cantor {

enum class DiagramFormat { Ascii, Dot };

// Tower picture of the loop decomposition: one column per loop, blocks boxed
// bottom to top, the exit word annotated above the top block.  Output is
// deterministic, so renderings are golden-testable.
std::string render_diagram(const PartialTransformation& t, DiagramFormat format);

}  // namespace cantor
