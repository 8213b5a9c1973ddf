#include "palmtrack/geometry/visibility.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "palmtrack/geometry/rect_union.hpp"

namespace palmtrack {

PodCurve::PodCurve(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw std::invalid_argument("PodCurve: need at least two knots");
  if (knots_.front().first != 0.0 || knots_.back().first != 1.0)
    throw std::invalid_argument("PodCurve: knots must cover v=0 and v=1");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (knots_[i].second < 0.0 || knots_[i].second > 1.0)
      throw std::invalid_argument("PodCurve: pd outside [0,1]");
    if (i > 0 && knots_[i].first <= knots_[i - 1].first)
      throw std::invalid_argument("PodCurve: v must be strictly increasing");
  }
}

double PodCurve::operator()(double v) const {
  if (v <= 0.0) return knots_.front().second;
  if (v >= 1.0) return knots_.back().second;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (v <= knots_[i].first) {
      const auto& [v0, p0] = knots_[i - 1];
      const auto& [v1, p1] = knots_[i];
      const double t = (v - v0) / (v1 - v0);
      return p0 + t * (p1 - p0);
    }
  }
  return knots_.back().second;
}

PodCurve PodCurve::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("PodCurve: cannot open " + path);
  std::vector<std::pair<double, double>> knots;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double v, pd;
    if (ss >> v >> pd) knots.emplace_back(v, pd);
  }
  return PodCurve(std::move(knots));
}

void PodCurve::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("PodCurve: cannot write " + path);
  out << "# visibility_ratio  detection_probability\n";
  char buf[64];
  for (const auto& [v, pd] : knots_) {
    std::snprintf(buf, sizeof(buf), "%.6f %.6f\n", v, pd);
    out << buf;
  }
}

std::vector<PedestrianState> eligible_occluders(const PedestrianState& x,
                                                const std::vector<PedestrianState>& others,
                                                const OcclusionConfig& cfg) {
  std::vector<PedestrianState> out;
  for (const auto& o : others) {
    if (o.z() < cfg.z_max && o.z() < x.z() - cfg.kappa) out.push_back(o);
  }
  return out;
}

double visibility_ratio(const PedestrianState& x, const std::vector<PedestrianState>& others,
                        const CameraModel& cam, const OcclusionConfig& cfg) {
  const BBox2D own = project_bbox(x, cam);
  if (own.area() <= 0.0) throw DegenerateBoxError();

  const auto eligible = eligible_occluders(x, others, cfg);
  if (eligible.empty()) return 1.0;

  std::vector<BBox2D> boxes;
  boxes.reserve(eligible.size());
  for (const auto& o : eligible) boxes.push_back(project_bbox(o, cam));
  const double covered = covered_area_within(own, boxes);
  return (own.area() - covered) / own.area();
}

double pod_spo_d(const PedestrianState& x, const std::vector<PedestrianState>& others,
                 const CameraModel& cam, const OcclusionConfig& cfg, const PodCurve& curve) {
  return curve(visibility_ratio(x, others, cam, cfg));
}

bool occlusion_independence_test(const GaussianMixture& subject, const GaussianMixture& occluder,
                                 const CameraModel& cam, const OcclusionConfig& cfg,
                                 const PodCurve& curve, int samples, std::uint64_t seed,
                                 double eps) {
  if (samples < 1) throw std::invalid_argument("occlusion_independence_test: samples must be >= 1");
  Rng rng(seed);

  // Samples that fall behind the camera or project degenerately count as
  // undetectable; an occluder sample behind the camera cannot occlude.
  double with_occluder = 0.0;
  double alone = 0.0;
  for (int s = 0; s < samples; ++s) {
    const PedestrianState x = PedestrianState::from_vector(subject.sample(rng));
    const PedestrianState o = PedestrianState::from_vector(occluder.sample(rng));

    BBox2D own;
    bool subject_ok = false;
    try {
      own = project_bbox(x, cam);
      subject_ok = own.area() > 0.0;
    } catch (const BehindCameraError&) {
    }
    if (!subject_ok) {
      const double floor = curve(0.0);
      with_occluder += floor;
      alone += floor;
      continue;
    }
    alone += curve(1.0);

    double ratio = 1.0;
    if (o.z() > 0.0 && o.z() < cfg.z_max && o.z() < x.z() - cfg.kappa) {
      try {
        const BBox2D block = project_bbox(o, cam);
        ratio = (own.area() - covered_area_within(own, {block})) / own.area();
      } catch (const BehindCameraError&) {
      }
    }
    with_occluder += curve(ratio);
  }
  return std::abs(with_occluder - alone) / samples < eps;
}

}  // namespace palmtrack
