#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "palmtrack/geometry/camera.hpp"
#include "palmtrack/geometry/pedestrian.hpp"
#include "palmtrack/rfs/gaussian.hpp"

namespace palmtrack {

/// Depth gates that decide which other objects may occlude a given one.
struct OcclusionConfig {
  double z_max = 15.0;   // occluders beyond this depth are ignored
  double kappa = 0.425;  // minimum depth margin in front of the subject
};

struct DegenerateBoxError : std::runtime_error {
  DegenerateBoxError() : std::runtime_error("visibility undefined for a zero-area bounding box") {}
};

/// Piecewise-linear probability of detection as a function of the visibility
/// ratio. Knots must cover v = 0 and v = 1 with strictly increasing v.
class PodCurve {
 public:
  PodCurve(std::vector<std::pair<double, double>> knots);

  double operator()(double v) const;

  static PodCurve constant(double pd) { return PodCurve({{0.0, pd}, {1.0, pd}}); }

  /// Synthetic monotone default used by the simulator; substitute an
  /// identified curve for real data.
  static PodCurve default_synthetic() { return PodCurve({{0.0, 0.05}, {1.0, 0.8}}); }

  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  /// Text format: one "v pd" pair per line, '#' comments allowed.
  static PodCurve load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::vector<std::pair<double, double>> knots_;
};

/// Other objects eligible to occlude x: closer than z_max and at least kappa
/// in front of x.
std::vector<PedestrianState> eligible_occluders(const PedestrianState& x,
                                                const std::vector<PedestrianState>& others,
                                                const OcclusionConfig& cfg);

/// Fraction of x's projected box area not covered by eligible occluders'
/// boxes. Exact via rectangle-union sweep.
double visibility_ratio(const PedestrianState& x, const std::vector<PedestrianState>& others,
                        const CameraModel& cam, const OcclusionConfig& cfg);

/// Detection probability of x given the other objects, through the visibility
/// ratio.
double pod_spo_d(const PedestrianState& x, const std::vector<PedestrianState>& others,
                 const CameraModel& cam, const OcclusionConfig& cfg, const PodCurve& curve);

/// Monte-Carlo test whether an occluder with spatial density `occluder` leaves
/// the expected detection probability of `subject` unchanged within eps.
/// Common random numbers make the comparison deterministic for a fixed seed.
bool occlusion_independence_test(const GaussianMixture& subject, const GaussianMixture& occluder,
                                 const CameraModel& cam, const OcclusionConfig& cfg,
                                 const PodCurve& curve, int samples, std::uint64_t seed,
                                 double eps = 0.01);

}  // namespace palmtrack
