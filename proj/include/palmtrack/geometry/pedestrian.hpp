#pragma once

#include <Eigen/Dense>

namespace palmtrack {

/// 3D pedestrian state [x, vx, y, vy, z, vz, width, height]. Positions are in
/// meters relative to the camera (x right, y down, z forward/depth), the
/// position refers to the lower-bottom center of the body box, velocities are
/// in meters per second, and width/height are the box extents in meters.
struct PedestrianState {
  Eigen::Matrix<double, 8, 1> v = Eigen::Matrix<double, 8, 1>::Zero();

  static constexpr int kDim = 8;

  double x() const { return v[0]; }
  double vx() const { return v[1]; }
  double y() const { return v[2]; }
  double vy() const { return v[3]; }
  double z() const { return v[4]; }
  double vz() const { return v[5]; }
  double width() const { return v[6]; }
  double height() const { return v[7]; }

  static PedestrianState from_vector(const Eigen::VectorXd& full) {
    PedestrianState s;
    s.v = full.head<8>();
    return s;
  }

  static PedestrianState at(double x, double y, double z, double width, double height,
                            double vx = 0.0, double vy = 0.0, double vz = 0.0) {
    PedestrianState s;
    s.v << x, vx, y, vy, z, vz, width, height;
    return s;
  }
};

}  // namespace palmtrack
