#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "palmtrack/geometry/pedestrian.hpp"

namespace palmtrack {

struct BBox2D {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double area() const { return width * height; }
};

/// Measurement-space parameterization of a box: (left, top, width, height).
inline Eigen::Vector4d box_vec(const BBox2D& b) { return {b.left, b.top, b.width, b.height}; }

inline BBox2D box_from_vec(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }

/// Pinhole camera with optional tilt about the horizontal axis. The camera
/// sits at the origin of the pedestrian coordinate frame; `height` is the
/// camera's elevation above the ground plane and is scene metadata used by the
/// simulator (feet of grounded pedestrians are at y = height).
struct CameraModel {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 960.0;
  double cy = 540.0;
  double height = 1.6;
  double tilt = 0.0;  // radians, rotation about the x axis
  int image_width = 1920;
  int image_height = 1080;
};

struct BehindCameraError : std::runtime_error {
  BehindCameraError() : std::runtime_error("projection requested for a state behind the camera") {}
};

/// Projects the upright width x height rectangle whose lower-bottom center is
/// the state position, and returns the axis-aligned bound of the projected
/// corners. No clipping to image bounds is applied.
BBox2D project_bbox(const PedestrianState& state, const CameraModel& cam);

}  // namespace palmtrack
