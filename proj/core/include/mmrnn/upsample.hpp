#pragma once

#include "mmrnn/grid.hpp"

namespace mmrnn {

/// Per-channel bilinear interpolation with align-corners semantics: source
/// cell (0,0) lands on target (0,0) and source (H-1,W-1) on the last target
/// cell. Throws std::invalid_argument when the target is smaller than the
/// source in either dimension.
ProbMap bilinear_upsample(const ProbMap& map, int target_height, int target_width);

// Per-cell argmax; the lowest class index wins ties.
LabelMap argmax_map(const ProbMap& map);

}  // namespace mmrnn
