#pragma once

#include <string>

#include "palmtrack/filter/mbm_filter.hpp"
#include "palmtrack/metrics/tgospa.hpp"
#include "palmtrack/simio/scenario.hpp"

namespace palmtrack {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error("config: " + what) {}
};

/// Everything the pipeline needs, with defaults materialized in code and any
/// subset overridable from one JSON file (see README for the schema).
struct AppConfig {
  CameraModel camera;
  OcclusionConfig occlusion;
  PodCurve curve = PodCurve::default_synthetic();
  FilterConfig filter;
  EpdConfig epd;
  double motion_dt = 1.0 / 30.0;
  double motion_accel_sd = 0.7;
  double motion_size_sd = 0.05;
  double motion_survival = 0.99;
  std::vector<double> measurement_noise_sd = {4.0, 4.0, 4.0, 4.0};
  double ut_alpha = 1e-3;
  std::vector<std::pair<double, GaussianMixture>> birth;
  ScenarioSpec scenario;
  TgospaParams tgospa;

  MotionModel motion_model() const;
  MeasurementModel measurement_model() const;
  TrackerModels tracker_models() const;
};

/// Paper-constant defaults plus the synthetic crossing scenario.
AppConfig default_config();

/// Loads a JSON config, overriding defaults key by key.
AppConfig load_config(const std::string& path);

/// Writes the fully-resolved configuration as JSON.
void save_config(const AppConfig& config, const std::string& path);

void save_camera(const CameraModel& cam, const std::string& path);
CameraModel load_camera(const std::string& path);

}  // namespace palmtrack
