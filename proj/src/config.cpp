#include "palmtrack/simio/config.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace palmtrack {

using nlohmann::json;

namespace {

GaussianMixture birth_component(const std::vector<double>& mean, const std::vector<double>& sd) {
  if (mean.size() != 8 || sd.size() != 8)
    throw ConfigError("birth mean and sd must have 8 entries");
  Eigen::VectorXd m(8);
  Eigen::VectorXd var(8);
  for (int i = 0; i < 8; ++i) {
    m[i] = mean[static_cast<std::size_t>(i)];
    var[i] = sd[static_cast<std::size_t>(i)] * sd[static_cast<std::size_t>(i)];
  }
  return GaussianMixture::single(m, var.asDiagonal());
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

CameraModel camera_from_json(const json& j, CameraModel cam) {
  maybe(j, "fx", cam.fx);
  maybe(j, "fy", cam.fy);
  maybe(j, "cx", cam.cx);
  maybe(j, "cy", cam.cy);
  maybe(j, "height", cam.height);
  maybe(j, "tilt", cam.tilt);
  maybe(j, "image_width", cam.image_width);
  maybe(j, "image_height", cam.image_height);
  return cam;
}

json camera_to_json(const CameraModel& cam) {
  return {{"fx", cam.fx},
          {"fy", cam.fy},
          {"cx", cam.cx},
          {"cy", cam.cy},
          {"height", cam.height},
          {"tilt", cam.tilt},
          {"image_width", cam.image_width},
          {"image_height", cam.image_height}};
}

}  // namespace

MotionModel AppConfig::motion_model() const {
  return MotionModel::constant_velocity(motion_dt, motion_accel_sd, motion_size_sd,
                                        motion_survival);
}

MeasurementModel AppConfig::measurement_model() const {
  MeasurementModel m;
  m.camera = camera;
  Eigen::VectorXd var(4);
  for (int i = 0; i < 4; ++i)
    var[i] = measurement_noise_sd[static_cast<std::size_t>(i)] *
             measurement_noise_sd[static_cast<std::size_t>(i)];
  m.R = var.asDiagonal();
  m.clutter_rate = scenario.clutter_rate;
  const double size_range = scenario.clutter_max_size - scenario.clutter_min_size;
  m.clutter_log_density = -std::log(static_cast<double>(camera.image_width) *
                                    camera.image_height * size_range * size_range);
  m.ut_alpha = ut_alpha;
  return m;
}

TrackerModels AppConfig::tracker_models() const {
  TrackerModels models;
  models.motion = motion_model();
  models.meas = measurement_model();
  models.camera = camera;
  models.occlusion = occlusion;
  models.curve = curve;
  models.epd = epd;
  models.birth = birth;
  return models;
}

AppConfig default_config() {
  AppConfig cfg;
  cfg.scenario = crossing_scenario_spec();
  cfg.scenario.camera = cfg.camera;
  cfg.scenario.occlusion = cfg.occlusion;

  // Birth components at the walkers' entry region, broad in position, depth,
  // and velocity.
  const std::vector<double> sd = {1.5, 0.8, 0.2, 0.1, 2.5, 0.5, 0.12, 0.12};
  cfg.birth.emplace_back(0.03, birth_component({-4.2, 1.2, 1.6, 0.0, 6.0, 0.0, 0.6, 1.7}, sd));
  cfg.birth.emplace_back(0.03, birth_component({-4.8, 1.2, 1.6, 0.0, 8.5, 0.0, 0.6, 1.7}, sd));
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("parse failure: ") + e.what());
  }

  AppConfig cfg = default_config();
  try {
    if (j.contains("camera")) cfg.camera = camera_from_json(j.at("camera"), cfg.camera);
    if (j.contains("occlusion")) {
      maybe(j.at("occlusion"), "z_max", cfg.occlusion.z_max);
      maybe(j.at("occlusion"), "kappa", cfg.occlusion.kappa);
    }
    if (j.contains("curve")) {
      std::vector<std::pair<double, double>> knots;
      for (const auto& k : j.at("curve")) knots.emplace_back(k.at(0), k.at(1));
      cfg.curve = PodCurve(std::move(knots));
    }
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      maybe(f, "gate_threshold", cfg.filter.gate_threshold);
      maybe(f, "max_hypotheses", cfg.filter.max_hypotheses);
      maybe(f, "prune_log_weight", cfg.filter.prune_log_weight);
      maybe(f, "murty_factor", cfg.filter.murty_factor);
      maybe(f, "exist_threshold", cfg.filter.exist_threshold);
      maybe(f, "constant_pd", cfg.filter.constant_pd);
      maybe(f, "discard_existence", cfg.filter.discard_existence);
      if (f.contains("strategy")) cfg.filter.strategy = strategy_from_name(f.at("strategy"));
    }
    if (j.contains("epd")) {
      const auto& e = j.at("epd");
      maybe(e, "r_discard", cfg.epd.r_discard);
      maybe(e, "r_certain", cfg.epd.r_certain);
      maybe(e, "mc_samples", cfg.epd.mc_samples);
      maybe(e, "independence_eps", cfg.epd.independence_eps);
      maybe(e, "max_uncertain", cfg.epd.max_uncertain);
    }
    if (j.contains("motion")) {
      const auto& m = j.at("motion");
      maybe(m, "dt", cfg.motion_dt);
      maybe(m, "accel_sd", cfg.motion_accel_sd);
      maybe(m, "size_sd", cfg.motion_size_sd);
      maybe(m, "survival", cfg.motion_survival);
    }
    if (j.contains("measurement")) {
      const auto& m = j.at("measurement");
      maybe(m, "noise_sd", cfg.measurement_noise_sd);
      maybe(m, "ut_alpha", cfg.ut_alpha);
      if (cfg.measurement_noise_sd.size() != 4)
        throw ConfigError("measurement.noise_sd must have 4 entries");
    }
    if (j.contains("birth")) {
      cfg.birth.clear();
      for (const auto& b : j.at("birth")) {
        cfg.birth.emplace_back(b.at("existence").get<double>(),
                               birth_component(b.at("mean").get<std::vector<double>>(),
                                               b.at("sd").get<std::vector<double>>()));
      }
    }
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      int num_frames = cfg.scenario.num_frames;
      maybe(s, "num_frames", num_frames);
      double clutter_rate = cfg.scenario.clutter_rate;
      maybe(s, "clutter_rate", clutter_rate);
      double noise_sd = 4.0;
      maybe(s, "noise_sd", noise_sd);
      if (s.contains("crossing")) {
        int occl = 30;
        maybe(s.at("crossing"), "occlusion_frames", occl);
        cfg.scenario = crossing_scenario_spec(num_frames, occl, clutter_rate, noise_sd);
      } else if (s.contains("objects")) {
        cfg.scenario = ScenarioSpec{};
        cfg.scenario.num_frames = num_frames;
        cfg.scenario.clutter_rate = clutter_rate;
        cfg.scenario.measurement_noise = noise_sd * noise_sd * Eigen::Matrix4d::Identity();
        for (const auto& o : s.at("objects")) {
          ScenarioObject obj;
          maybe(o, "enter", obj.enter_frame);
          maybe(o, "exit", obj.exit_frame);
          maybe(o, "width", obj.width);
          maybe(o, "height", obj.height);
          for (const auto& w : o.at("waypoints")) {
            const auto& p = w.at(1);
            obj.waypoints.emplace_back(w.at(0).get<int>(),
                                       Eigen::Vector3d(p.at(0), p.at(1), p.at(2)));
          }
          cfg.scenario.objects.push_back(std::move(obj));
        }
      } else {
        cfg.scenario.num_frames = num_frames;
        cfg.scenario.clutter_rate = clutter_rate;
        cfg.scenario.measurement_noise = noise_sd * noise_sd * Eigen::Matrix4d::Identity();
      }
      maybe(s, "clutter_min_size", cfg.scenario.clutter_min_size);
      maybe(s, "clutter_max_size", cfg.scenario.clutter_max_size);
      maybe(s, "dt", cfg.scenario.dt);
    }
    if (j.contains("tgospa")) {
      const auto& t = j.at("tgospa");
      maybe(t, "p", cfg.tgospa.p);
      maybe(t, "c", cfg.tgospa.c);
      maybe(t, "gamma", cfg.tgospa.gamma);
      maybe(t, "max_exact_gt", cfg.tgospa.max_exact_gt);
      maybe(t, "max_exact_est", cfg.tgospa.max_exact_est);
      maybe(t, "max_exact_frames", cfg.tgospa.max_exact_frames);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema failure: ") + e.what());
  }

  cfg.scenario.camera = cfg.camera;
  cfg.scenario.occlusion = cfg.occlusion;
  return cfg;
}

void save_config(const AppConfig& cfg, const std::string& path) {
  json j;
  j["camera"] = camera_to_json(cfg.camera);
  j["occlusion"] = {{"z_max", cfg.occlusion.z_max}, {"kappa", cfg.occlusion.kappa}};
  json curve = json::array();
  for (const auto& [v, pd] : cfg.curve.knots()) curve.push_back({v, pd});
  j["curve"] = curve;
  j["filter"] = {{"gate_threshold", cfg.filter.gate_threshold},
                 {"max_hypotheses", cfg.filter.max_hypotheses},
                 {"prune_log_weight", cfg.filter.prune_log_weight},
                 {"murty_factor", cfg.filter.murty_factor},
                 {"exist_threshold", cfg.filter.exist_threshold},
                 {"constant_pd", cfg.filter.constant_pd},
                 {"discard_existence", cfg.filter.discard_existence},
                 {"strategy", strategy_name(cfg.filter.strategy)}};
  j["epd"] = {{"r_discard", cfg.epd.r_discard},
              {"r_certain", cfg.epd.r_certain},
              {"mc_samples", cfg.epd.mc_samples},
              {"independence_eps", cfg.epd.independence_eps},
              {"max_uncertain", cfg.epd.max_uncertain}};
  j["motion"] = {{"dt", cfg.motion_dt},
                 {"accel_sd", cfg.motion_accel_sd},
                 {"size_sd", cfg.motion_size_sd},
                 {"survival", cfg.motion_survival}};
  j["measurement"] = {{"noise_sd", cfg.measurement_noise_sd}, {"ut_alpha", cfg.ut_alpha}};
  json births = json::array();
  for (const auto& [r, gm] : cfg.birth) {
    std::vector<double> mean(8), sd(8);
    const auto& c = gm.components().front();
    for (int i = 0; i < 8; ++i) {
      mean[static_cast<std::size_t>(i)] = c.mean[i];
      sd[static_cast<std::size_t>(i)] = std::sqrt(c.cov(i, i));
    }
    births.push_back({{"existence", r}, {"mean", mean}, {"sd", sd}});
  }
  j["birth"] = births;
  j["tgospa"] = {{"p", cfg.tgospa.p}, {"c", cfg.tgospa.c}, {"gamma", cfg.tgospa.gamma}};
  j["scenario"] = {{"num_frames", cfg.scenario.num_frames},
                   {"clutter_rate", cfg.scenario.clutter_rate},
                   {"clutter_min_size", cfg.scenario.clutter_min_size},
                   {"clutter_max_size", cfg.scenario.clutter_max_size},
                   {"dt", cfg.scenario.dt}};

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void save_camera(const CameraModel& cam, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << camera_to_json(cam).dump(2) << "\n";
}

CameraModel load_camera(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("parse failure: ") + e.what());
  }
  return camera_from_json(j, CameraModel{});
}

}  // namespace palmtrack
