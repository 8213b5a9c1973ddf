#pragma once

#include <vector>

#include "palmtrack/geometry/camera.hpp"

namespace palmtrack {

/// Exact area of the union of axis-aligned rectangles, by coordinate
/// compression: every rectangle covers whole cells of the compressed grid.
double union_area(const std::vector<BBox2D>& rects);

/// Exact area of target intersected with the union of rects.
double covered_area_within(const BBox2D& target, const std::vector<BBox2D>& rects);

}  // namespace palmtrack
