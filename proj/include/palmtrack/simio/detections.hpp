#pragma once

#include <Eigen/Dense>
#include <vector>

namespace palmtrack {

/// Detections of one frame in the (left, top, width, height) box
/// parameterization, with optional detector confidences.
struct DetectionFrame {
  int frame = 1;
  std::vector<Eigen::Vector4d> boxes;
  std::vector<double> confidences;  // empty or one per box
};

}  // namespace palmtrack
