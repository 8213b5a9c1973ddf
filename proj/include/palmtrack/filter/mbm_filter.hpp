#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "palmtrack/filter/models.hpp"
#include "palmtrack/filter/unscented.hpp"
#include "palmtrack/simio/detections.hpp"

namespace palmtrack {

struct MissingPodError : std::runtime_error {
  explicit MissingPodError(int mark)
      : std::runtime_error("no detection probability assigned to mark " + std::to_string(mark)) {}
};

struct FilterRunError : std::runtime_error {
  FilterRunError(int frame, const std::string& what)
      : std::runtime_error("frame " + std::to_string(frame) + ": " + what), frame(frame) {}
  int frame;
};

/// Kalman-predicts every hypothesis, scales existence by survival, and appends
/// the birth components (whose marks must be fresh) to each hypothesis.
GmMbm predict(const GmMbm& posterior, const MotionModel& motion,
              const std::vector<GmBernoulli>& birth);

/// Strategy-parameterized MBM measurement update: per parent hypothesis builds
/// the gated association cost matrix, expands the best assignments, and
/// applies the standard detected/missed Bernoulli updates, followed by
/// prune_and_cap. The prior must be normalized.
GmMbm update(const GmMbm& prior, const std::vector<Eigen::VectorXd>& measurements,
             const PodAssignment& pod, const MeasurementModel& model, const FilterConfig& cfg);

/// Drops hypotheses below the log-weight floor, caps their number, drops
/// negligible-existence Bernoullis, and renormalizes.
GmMbm prune_and_cap(const GmMbm& mbm, const FilterConfig& cfg);

struct TrackEstimate {
  int mark = 0;
  Eigen::VectorXd state;
  double existence = 0.0;
  std::optional<BBox2D> box;
};

/// Reports the Bernoullis of the highest-weight hypothesis whose existence
/// reaches the threshold; boxes are projected when a camera is given.
std::vector<TrackEstimate> estimate(const GmMbm& mbm, const FilterConfig& cfg,
                                    const CameraModel* cam = nullptr, double ut_alpha = 1e-3);

struct TrackOutput {
  std::vector<int> frame_numbers;
  std::vector<std::vector<TrackEstimate>> frames;
};

struct TrackerModels {
  MotionModel motion;
  MeasurementModel meas;
  CameraModel camera;
  OcclusionConfig occlusion;
  PodCurve curve = PodCurve::default_synthetic();
  EpdConfig epd;
  std::vector<std::pair<double, GaussianMixture>> birth;  // existence, spatial density
};

/// Per-frame diagnostics sink for the detection-probability strategies.
struct EpdReportSink {
  virtual ~EpdReportSink() = default;
  virtual void frame_diagnostics(int frame, const std::vector<EpdDiagnosticsRow>& rows) = 0;
};

/// Full tracking loop: predict, assign detection probabilities per the
/// configured strategy, update, estimate. Errors are rethrown with the frame
/// index attached.
TrackOutput run_tracker(const std::vector<DetectionFrame>& frames, const TrackerModels& models,
                        const FilterConfig& cfg, std::uint64_t seed,
                        EpdReportSink* report = nullptr);

}  // namespace palmtrack
