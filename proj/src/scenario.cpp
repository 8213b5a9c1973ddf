#include "palmtrack/simio/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace palmtrack {

namespace {

Eigen::Vector3d interpolate(const std::vector<std::pair<int, Eigen::Vector3d>>& waypoints,
                            int frame) {
  if (frame <= waypoints.front().first) return waypoints.front().second;
  if (frame >= waypoints.back().first) return waypoints.back().second;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (frame <= waypoints[i].first) {
      const auto& [f0, p0] = waypoints[i - 1];
      const auto& [f1, p1] = waypoints[i];
      const double t = static_cast<double>(frame - f0) / (f1 - f0);
      return p0 + t * (p1 - p0);
    }
  }
  return waypoints.back().second;
}

Eigen::Vector3d velocity_at(const std::vector<std::pair<int, Eigen::Vector3d>>& waypoints,
                            int frame, double dt) {
  if (waypoints.size() < 2) return Eigen::Vector3d::Zero();
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (frame < waypoints[i].first || i + 1 == waypoints.size()) {
      const auto& [f0, p0] = waypoints[i - 1];
      const auto& [f1, p1] = waypoints[i];
      return (p1 - p0) / ((f1 - f0) * dt);
    }
  }
  return Eigen::Vector3d::Zero();
}

Eigen::Matrix4d matrix_sqrt_psd(const Eigen::Matrix4d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(0.5 * (m + m.transpose()));
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  if (spec.num_frames < 1) throw SpecInvalidError("num_frames must be >= 1");
  if (spec.dt <= 0.0) throw SpecInvalidError("dt must be positive");
  if (spec.clutter_rate < 0.0) throw SpecInvalidError("clutter_rate must be nonnegative");
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& obj = spec.objects[i];
    const std::string tag = "object " + std::to_string(i) + ": ";
    if (obj.enter_frame < 1 || obj.exit_frame > spec.num_frames ||
        obj.enter_frame > obj.exit_frame)
      throw SpecInvalidError(tag + "active interval out of range");
    if (obj.waypoints.empty()) throw SpecInvalidError(tag + "no waypoints");
    for (std::size_t w = 1; w < obj.waypoints.size(); ++w)
      if (obj.waypoints[w].first <= obj.waypoints[w - 1].first)
        throw SpecInvalidError(tag + "waypoint frames must increase");
    if (obj.width <= 0.0 || obj.height <= 0.0)
      throw SpecInvalidError(tag + "width and height must be positive");
  }

  Scenario out;
  out.num_frames = spec.num_frames;
  out.dt = spec.dt;
  out.camera = spec.camera;
  out.occlusion = spec.occlusion;
  out.clutter_rate = spec.clutter_rate;
  out.measurement_noise = spec.measurement_noise;
  out.clutter_min_size = spec.clutter_min_size;
  out.clutter_max_size = spec.clutter_max_size;
  out.seed = seed;

  out.states.assign(static_cast<std::size_t>(spec.num_frames),
                    std::vector<std::optional<PedestrianState>>(spec.objects.size()));
  out.visibility.assign(static_cast<std::size_t>(spec.num_frames),
                        std::vector<double>(spec.objects.size(), 1.0));

  for (int frame = 1; frame <= spec.num_frames; ++frame) {
    auto& row = out.states[static_cast<std::size_t>(frame - 1)];
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      const auto& obj = spec.objects[i];
      if (frame < obj.enter_frame || frame > obj.exit_frame) continue;
      const Eigen::Vector3d pos = interpolate(obj.waypoints, frame);
      const Eigen::Vector3d vel = velocity_at(obj.waypoints, frame, spec.dt);
      if (pos.z() <= 0.0) throw SpecInvalidError("object depth must stay positive");
      PedestrianState s;
      s.v << pos.x(), vel.x(), pos.y(), vel.y(), pos.z(), vel.z(), obj.width, obj.height;
      row[i] = s;
    }
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      if (!row[i].has_value()) continue;
      std::vector<PedestrianState> others;
      for (std::size_t j = 0; j < spec.objects.size(); ++j)
        if (j != i && row[j].has_value()) others.push_back(*row[j]);
      out.visibility[static_cast<std::size_t>(frame - 1)][i] =
          visibility_ratio(*row[i], others, spec.camera, spec.occlusion);
    }
  }
  return out;
}

std::vector<DetectionFrame> simulate_detections(const Scenario& scenario, const PodCurve& curve,
                                                const OcclusionConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Matrix4d noise_sqrt = matrix_sqrt_psd(scenario.measurement_noise);

  std::vector<DetectionFrame> out;
  out.reserve(static_cast<std::size_t>(scenario.num_frames));
  for (int frame = 1; frame <= scenario.num_frames; ++frame) {
    const auto& row = scenario.states[static_cast<std::size_t>(frame - 1)];
    DetectionFrame det;
    det.frame = frame;

    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!row[i].has_value()) continue;
      std::vector<PedestrianState> others;
      for (std::size_t j = 0; j < row.size(); ++j)
        if (j != i && row[j].has_value()) others.push_back(*row[j]);
      const double pd = pod_spo_d(*row[i], others, scenario.camera, cfg, curve);
      if (rng.uniform() >= pd) continue;
      Eigen::Vector4d z = box_vec(project_bbox(*row[i], scenario.camera));
      Eigen::Vector4d g;
      for (int k = 0; k < 4; ++k) g[k] = rng.gaussian();
      z += noise_sqrt * g;
      det.boxes.push_back(z);
      det.confidences.push_back(1.0);
    }

    const int n_clutter = rng.poisson(scenario.clutter_rate);
    for (int k = 0; k < n_clutter; ++k) {
      Eigen::Vector4d z;
      z[0] = rng.uniform(0.0, scenario.camera.image_width);
      z[1] = rng.uniform(0.0, scenario.camera.image_height);
      z[2] = rng.uniform(scenario.clutter_min_size, scenario.clutter_max_size);
      z[3] = rng.uniform(scenario.clutter_min_size, scenario.clutter_max_size);
      det.boxes.push_back(z);
      det.confidences.push_back(1.0);
    }
    out.push_back(std::move(det));
  }
  return out;
}

ScenarioSpec crossing_scenario_spec(int num_frames, int occlusion_frames, double clutter_rate,
                                    double noise_sd) {
  ScenarioSpec spec;
  spec.num_frames = num_frames;
  spec.clutter_rate = clutter_rate;
  spec.measurement_noise = noise_sd * noise_sd * Eigen::Matrix4d::Identity();

  const double mid = 0.5 * (1 + num_frames);
  const double ground = spec.camera.height;

  // Front walker: depth 6 m, image speed fx * dx / z per frame.
  const double step_front = 0.04;  // meters per frame (1.2 m/s at 30 fps)
  ScenarioObject front;
  front.enter_frame = 1;
  front.exit_frame = num_frames;
  front.width = 0.6;
  front.height = 1.7;
  front.waypoints = {
      {1, {step_front * (1 - mid), ground, 6.0}},
      {num_frames, {step_front * (num_frames - mid), ground, 6.0}},
  };

  // Rear walker: depth 8 m, slightly slower in the image so its box stays
  // inside the front one's for the requested number of frames. Full occlusion
  // holds while |du| < (w_front - w_rear)/2 in pixels.
  const double u_front = spec.camera.fx * step_front / 6.0;  // px per frame
  const double half_width_gap =
      0.5 * (spec.camera.fx * front.width / 6.0 - spec.camera.fx * 0.6 / 8.0);
  const double du = 2.0 * half_width_gap / occlusion_frames;
  const double step_rear = (u_front - du) * 8.0 / spec.camera.fx;
  ScenarioObject rear;
  rear.enter_frame = 1;
  rear.exit_frame = num_frames;
  rear.width = 0.6;
  rear.height = 1.7;
  rear.waypoints = {
      {1, {step_rear * (1 - mid), ground, 8.0}},
      {num_frames, {step_rear * (num_frames - mid), ground, 8.0}},
  };

  spec.objects = {front, rear};
  return spec;
}

}  // namespace palmtrack
