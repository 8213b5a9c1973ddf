#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "palmtrack/geometry/camera.hpp"

namespace palmtrack {

struct DegenerateBoxesError : std::runtime_error {
  DegenerateBoxesError() : std::runtime_error("IoU undefined for two zero-area boxes") {}
};

/// Intersection over union of two boxes; defined whenever at least one has
/// positive area.
double iou(const BBox2D& a, const BBox2D& b);

struct TrajectoryEntry {
  BBox2D box;
  double visibility = 1.0;  // ground-truth visibility ratio of the box
};

/// Time-indexed boxes per trajectory id, at most one box per (id, frame).
struct TrajectorySet {
  std::map<int, std::map<int, TrajectoryEntry>> trajectories;

  void add(int id, int frame, const BBox2D& box, double visibility = 1.0) {
    trajectories[id][frame] = {box, visibility};
  }
  bool empty() const { return trajectories.empty(); }
};

struct TgospaParams {
  double p = 2.41;
  double c = 1.0;
  double gamma = 2.60;
  // Exact-solver limits; larger instances need approximate = true.
  int max_exact_gt = 6;
  int max_exact_est = 6;
  int max_exact_frames = 50;
};

struct InstanceTooLargeError : std::runtime_error {
  InstanceTooLargeError() : std::runtime_error("instance exceeds the exact solver limits") {}
};

struct TgospaFrameRow {
  int frame = 0;
  double e_tp = 0.0, e_fn = 0.0, e_fp = 0.0, e_sw = 0.0;
};

struct TgospaResult {
  double value = 0.0;
  double e_tp = 0.0, e_tp_occluded = 0.0, e_tp_visible = 0.0;
  double e_fn = 0.0, e_fn_occluded = 0.0, e_fn_visible = 0.0;
  double e_fp = 0.0;
  double e_sw = 0.0;
  double n_tp = 0.0, n_tp_occluded = 0.0, n_tp_visible = 0.0;
  double n_fn = 0.0, n_fn_occluded = 0.0, n_fn_visible = 0.0;
  double n_fp = 0.0;
  double n_sw = 0.0;
  std::vector<TgospaFrameRow> per_frame;
};

/// Trajectory metric between ground truth and estimates: minimizes
/// localization, missed, false, and switching costs over per-frame assignment
/// sequences. The exact solver is a dynamic program over assignment vectors;
/// the approximate solver assigns frame by frame with the switch cost folded
/// into the per-frame matrix and reports the true cost of that sequence (an
/// upper bound on the metric).
TgospaResult tgospa(const TrajectorySet& gt, const TrajectorySet& est, const TgospaParams& params,
                    bool approximate = false);

/// Delimited-text result table mirroring the evaluation columns.
void write_tgospa_report(const std::string& path, const TgospaResult& result,
                         const TgospaParams& params, bool per_frame_series = false);

}  // namespace palmtrack
