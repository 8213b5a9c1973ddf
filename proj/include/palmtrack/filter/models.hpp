#pragma once

#include <Eigen/Dense>
#include <optional>

#include "palmtrack/epd/epd.hpp"
#include "palmtrack/geometry/camera.hpp"

namespace palmtrack {

/// Linear-Gaussian motion with survival probability. The default factory is
/// constant velocity in (x, y, z) with static width/height.
struct MotionModel {
  Eigen::MatrixXd F;
  Eigen::MatrixXd Q;
  double survival = 0.99;
  double dt = 1.0 / 30.0;

  static MotionModel constant_velocity(double dt, double accel_sd, double size_sd,
                                       double survival);
};

/// Single-object measurement model: either a linear map z = H x + v or the
/// pinhole box projection linearized by the unscented transform. Clutter is
/// Poisson with a uniform spatial density over the measurement region.
struct MeasurementModel {
  std::optional<Eigen::MatrixXd> H;
  std::optional<CameraModel> camera;
  Eigen::MatrixXd R;
  double clutter_rate = 0.0;
  double clutter_log_density = 0.0;
  double ut_alpha = 1e-3;

  int meas_dim() const { return static_cast<int>(R.rows()); }
};

struct FilterConfig {
  double gate_threshold = 6.0;
  int max_hypotheses = 100;
  double prune_log_weight = -300.0;
  double murty_factor = 10.0;
  double exist_threshold = 0.5;
  double constant_pd = 0.529;
  Strategy strategy = Strategy::kConstant;
  double discard_existence = 1e-3;
};

}  // namespace palmtrack
