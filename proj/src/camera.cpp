#include "palmtrack/geometry/camera.hpp"

#include <algorithm>
#include <cmath>

namespace palmtrack {

namespace {
constexpr double kNearPlane = 1e-6;
}

BBox2D project_bbox(const PedestrianState& state, const CameraModel& cam) {
  if (state.z() <= kNearPlane) throw BehindCameraError();

  const double half_w = 0.5 * state.width();
  const double cos_t = std::cos(cam.tilt);
  const double sin_t = std::sin(cam.tilt);

  double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
  bool first = true;
  for (const double dx : {-half_w, half_w}) {
    for (const double dy : {0.0, -state.height()}) {  // bottom row, top row (y is down)
      const double xw = state.x() + dx;
      const double yw = state.y() + dy;
      const double zw = state.z();
      const double yc = cos_t * yw - sin_t * zw;
      const double zc = sin_t * yw + cos_t * zw;
      if (zc <= kNearPlane) throw BehindCameraError();
      const double u = cam.fx * xw / zc + cam.cx;
      const double v = cam.fy * yc / zc + cam.cy;
      if (first) {
        u_min = u_max = u;
        v_min = v_max = v;
        first = false;
      } else {
        u_min = std::min(u_min, u);
        u_max = std::max(u_max, u);
        v_min = std::min(v_min, v);
        v_max = std::max(v_max, v);
      }
    }
  }
  return {u_min, v_min, u_max - u_min, v_max - v_min};
}

}  // namespace palmtrack
