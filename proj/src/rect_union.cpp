#include "palmtrack/geometry/rect_union.hpp"

#include <algorithm>

namespace palmtrack {

namespace {

double union_area_impl(const std::vector<BBox2D>& rects) {
  std::vector<double> xs, ys;
  for (const auto& r : rects) {
    if (r.width <= 0.0 || r.height <= 0.0) continue;
    xs.push_back(r.left);
    xs.push_back(r.right());
    ys.push_back(r.top);
    ys.push_back(r.bottom());
  }
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double mx = 0.5 * (xs[i] + xs[i + 1]);
      const double my = 0.5 * (ys[j] + ys[j + 1]);
      for (const auto& r : rects) {
        if (r.width <= 0.0 || r.height <= 0.0) continue;
        if (mx > r.left && mx < r.right() && my > r.top && my < r.bottom()) {
          total += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
          break;
        }
      }
    }
  }
  return total;
}

}  // namespace

double union_area(const std::vector<BBox2D>& rects) { return union_area_impl(rects); }

namespace {

// Clipped overlap of r with target; zero-size result means no overlap.
BBox2D clip(const BBox2D& target, const BBox2D& r) {
  const double left = std::max(target.left, r.left);
  const double top = std::max(target.top, r.top);
  const double right = std::min(target.right(), r.right());
  const double bottom = std::min(target.bottom(), r.bottom());
  if (right > left && bottom > top) return {left, top, right - left, bottom - top};
  return {};
}

double intersection_area(const BBox2D& a, const BBox2D& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

}  // namespace

double covered_area_within(const BBox2D& target, const std::vector<BBox2D>& rects) {
  // One and two rectangles have closed forms; they dominate the Monte-Carlo
  // hot path.
  if (rects.size() == 1) return clip(target, rects.front()).area();
  if (rects.size() == 2) {
    const BBox2D a = clip(target, rects[0]);
    const BBox2D b = clip(target, rects[1]);
    return a.area() + b.area() - intersection_area(a, b);
  }
  std::vector<BBox2D> clipped;
  clipped.reserve(rects.size());
  for (const auto& r : rects) {
    const BBox2D c = clip(target, r);
    if (c.area() > 0.0) clipped.push_back(c);
  }
  return union_area_impl(clipped);
}

}  // namespace palmtrack
