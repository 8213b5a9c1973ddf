#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "palmtrack/geometry/visibility.hpp"
#include "palmtrack/simio/detections.hpp"

namespace palmtrack {

/// One simulated pedestrian: piecewise-linear 3D waypoints (frame, position of
/// the lower-bottom center) active on [enter_frame, exit_frame].
struct ScenarioObject {
  int enter_frame = 1;
  int exit_frame = 1;
  std::vector<std::pair<int, Eigen::Vector3d>> waypoints;
  double width = 0.6;
  double height = 1.7;
};

struct ScenarioSpec {
  int num_frames = 0;
  double dt = 1.0 / 30.0;
  CameraModel camera;
  OcclusionConfig occlusion;
  std::vector<ScenarioObject> objects;
  double clutter_rate = 0.0;
  Eigen::Matrix4d measurement_noise = Eigen::Matrix4d::Zero();
  double clutter_min_size = 40.0;   // pixels
  double clutter_max_size = 320.0;  // pixels
};

struct SpecInvalidError : std::runtime_error {
  explicit SpecInvalidError(const std::string& what)
      : std::runtime_error("invalid scenario spec: " + what) {}
};

/// Resolved ground truth: per frame, per object, the state (when active) and
/// its visibility ratio under the spec's camera and occlusion gates.
struct Scenario {
  int num_frames = 0;
  double dt = 1.0 / 30.0;
  CameraModel camera;
  OcclusionConfig occlusion;
  double clutter_rate = 0.0;
  Eigen::Matrix4d measurement_noise = Eigen::Matrix4d::Zero();
  double clutter_min_size = 40.0;
  double clutter_max_size = 320.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::optional<PedestrianState>>> states;  // [frame][object]
  std::vector<std::vector<double>> visibility;                      // aligned with states

  int num_objects() const {
    return states.empty() ? 0 : static_cast<int>(states.front().size());
  }
};

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

/// Samples detections from the dependent-detection model: each object is
/// detected with probability curve(visibility) and contributes its projected
/// box plus Gaussian noise; clutter is Poisson with uniform boxes.
std::vector<DetectionFrame> simulate_detections(const Scenario& scenario, const PodCurve& curve,
                                                const OcclusionConfig& cfg, std::uint64_t seed);

/// Two pedestrians walking the same direction at different depths, tuned so
/// the rear one is fully occluded for `occlusion_frames` frames around the
/// middle of the sequence.
ScenarioSpec crossing_scenario_spec(int num_frames = 200, int occlusion_frames = 30,
                                    double clutter_rate = 0.5, double noise_sd = 4.0);

}  // namespace palmtrack
