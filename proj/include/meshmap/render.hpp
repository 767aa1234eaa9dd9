#pragma once

#include <string>

#include "meshmap/fitness.hpp"

namespace meshmap {

struct RenderOptions {
  bool heat = false;  // per-link load overlay
  int cell = 48;      // router cell size in SVG units
};

// Mesh diagram: one panel per chip, north up. Used slots are filled with
// their layer colour, unused usable slots are hollow, disabled slots are
// grey and crossed. With `heat`, every loaded link is drawn with a
// data-load attribute and the root carries data-max-load.
std::string render_svg(const MappingProblem& p, const Mapping& m, const RenderOptions& options = {});

// Plain-text grid, north row first. Each router prints its slots as layer
// digits/letters, '.' for unused and '#' for disabled.
std::string render_text(const MappingProblem& p, const Mapping& m);

}  // namespace meshmap
