#include "palmtrack/epd/epd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "palmtrack/geometry/rect_union.hpp"

namespace palmtrack {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kConstant: return "constant";
    case Strategy::kEso: return "eso";
    case Strategy::kPro: return "pro";
  }
  return "constant";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "constant") return Strategy::kConstant;
  if (name == "eso") return Strategy::kEso;
  if (name == "pro") return Strategy::kPro;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::vector<std::vector<int>> enumerate_combinations(const std::vector<int>& certain,
                                                     const std::vector<int>& uncertain,
                                                     int max_uncertain) {
  const int nu = static_cast<int>(uncertain.size());
  if (nu > max_uncertain) throw CombinationBlowupError(nu);

  std::vector<std::vector<int>> out;
  out.reserve(1ull << nu);
  for (int size = 0; size <= nu; ++size) {
    // Subsets of `uncertain` of the given size, in positional order.
    std::vector<int> pick;
    const std::function<void(int)> rec = [&](int start) {
      if (static_cast<int>(pick.size()) == size) {
        std::vector<int> combo(certain);
        combo.insert(combo.end(), pick.begin(), pick.end());
        out.push_back(std::move(combo));
        return;
      }
      for (int i = start; i < nu; ++i) {
        pick.push_back(uncertain[static_cast<std::size_t>(i)]);
        rec(i + 1);
        pick.pop_back();
      }
    };
    rec(0);
  }
  return out;
}

EpdComputer::EpdComputer(const CameraModel& cam, const OcclusionConfig& occ, const PodCurve& curve,
                         const EpdConfig& cfg, std::uint64_t seed)
    : cam_(cam), occ_(occ), curve_(curve), cfg_(cfg), seed_(seed) {}

bool EpdComputer::independent_cached(const GaussianMixture& subject,
                                     const GaussianMixture& occluder) const {
  ContentHasher h;
  subject.hash_into(h);
  occluder.hash_into(h);
  const std::uint64_t key = h.digest();
  const auto it = independence_cache_.find(key);
  if (it != independence_cache_.end()) return it->second;
  const bool result =
      occlusion_independence_test(subject, occluder, cam_, occ_, curve_, cfg_.mc_samples,
                                  mix_seed({seed_, key}), cfg_.independence_eps);
  independence_cache_.emplace(key, result);
  return result;
}

Simplification EpdComputer::simplify(int mark, const GmHypothesis& hyp) const {
  const auto* subject = hyp.find_mark(mark);
  if (subject == nullptr) throw MarkNotInHypothesisError(mark);

  Simplification out;
  for (const auto& b : hyp.bernoullis) {
    if (b.mark == mark) continue;
    if (b.existence < cfg_.r_discard) {
      out.discarded_low_existence.push_back(b.mark);
      continue;
    }
    if (independent_cached(subject->spatial, b.spatial)) {
      out.discarded_independent.push_back(b.mark);
      continue;
    }
    if (b.existence > cfg_.r_certain)
      out.certain.push_back(b.mark);
    else
      out.uncertain.push_back(b.mark);
  }
  return out;
}

double EpdComputer::integrate(const GaussianMixture& subject,
                              const std::vector<Occluder>& occluders) const {
  // Cache key covers the full configuration; the sampling seed covers only the
  // spatial densities so that existence changes reuse the same draws (common
  // random numbers across subsets and across existence perturbations).
  ContentHasher full;
  ContentHasher spatial_only;
  subject.hash_into(full);
  subject.hash_into(spatial_only);
  for (const auto& o : occluders) {
    full.f64(o.existence);
    full.i64(o.certain ? 1 : 0);
    o.spatial->hash_into(full);
    o.spatial->hash_into(spatial_only);
  }
  full.i64(cfg_.mc_samples);
  const std::uint64_t key = full.digest();
  const auto it = epd_cache_.find(key);
  if (it != epd_cache_.end()) return it->second;

  std::vector<int> certain, uncertain;
  for (std::size_t i = 0; i < occluders.size(); ++i) {
    if (occluders[i].certain)
      certain.push_back(static_cast<int>(i));
    else
      uncertain.push_back(static_cast<int>(i));
  }
  const auto subsets = enumerate_combinations(certain, uncertain, cfg_.max_uncertain);

  Rng rng(mix_seed({seed_, spatial_only.digest()}));
  const int samples = cfg_.mc_samples;

  // Draw all samples up front: one subject draw and one draw per occluder per
  // sample, shared across every subset.
  struct SampleGeometry {
    BBox2D subject_box;
    double subject_z = 0.0;
    bool subject_ok = false;
    std::vector<BBox2D> occ_box;
    std::vector<double> occ_z;
    std::vector<char> occ_ok;
  };
  std::vector<SampleGeometry> geom(static_cast<std::size_t>(samples));
  for (auto& g : geom) {
    const PedestrianState x = PedestrianState::from_vector(subject.sample(rng));
    g.subject_z = x.z();
    try {
      g.subject_box = project_bbox(x, cam_);
      g.subject_ok = g.subject_box.area() > 0.0;
    } catch (const BehindCameraError&) {
      g.subject_ok = false;
    }
    g.occ_box.resize(occluders.size());
    g.occ_z.resize(occluders.size());
    g.occ_ok.assign(occluders.size(), 0);
    for (std::size_t j = 0; j < occluders.size(); ++j) {
      const PedestrianState o = PedestrianState::from_vector(occluders[j].spatial->sample(rng));
      g.occ_z[j] = o.z();
      try {
        g.occ_box[j] = project_bbox(o, cam_);
        g.occ_ok[j] = 1;
      } catch (const BehindCameraError&) {
        g.occ_ok[j] = 0;
      }
    }
  }

  double value = 0.0;
  std::vector<BBox2D> eligible;
  for (const auto& subset : subsets) {
    double w = 1.0;
    for (std::size_t i = 0; i < occluders.size(); ++i) {
      if (occluders[i].certain) continue;
      const bool in_subset =
          std::find(subset.begin(), subset.end(), static_cast<int>(i)) != subset.end();
      w *= in_subset ? occluders[i].existence : 1.0 - occluders[i].existence;
    }
    if (w == 0.0) continue;

    double acc = 0.0;
    for (const auto& g : geom) {
      if (!g.subject_ok) {
        // A sample behind the camera or with a degenerate box cannot be
        // detected; count it at the fully-occluded end of the curve.
        acc += curve_(0.0);
        continue;
      }
      eligible.clear();
      for (int j : subset) {
        const auto ju = static_cast<std::size_t>(j);
        if (!g.occ_ok[ju]) continue;
        if (g.occ_z[ju] < occ_.z_max && g.occ_z[ju] < g.subject_z - occ_.kappa)
          eligible.push_back(g.occ_box[ju]);
      }
      double ratio = 1.0;
      if (!eligible.empty()) {
        const double covered = covered_area_within(g.subject_box, eligible);
        ratio = (g.subject_box.area() - covered) / g.subject_box.area();
      }
      acc += curve_(ratio);
    }
    value += w * acc / samples;
  }

  value = std::clamp(value, 0.0, 1.0);
  epd_cache_.emplace(key, value);
  return value;
}

double EpdComputer::epd_hypothesis(int mark, const GmHypothesis& hyp, bool simplify) const {
  const auto* subject = hyp.find_mark(mark);
  if (subject == nullptr) return 0.0;

  std::vector<Occluder> occluders;
  if (simplify) {
    const Simplification s = this->simplify(mark, hyp);
    for (int m : s.certain) {
      const auto* b = hyp.find_mark(m);
      occluders.push_back({m, 1.0, true, &b->spatial});
    }
    for (int m : s.uncertain) {
      const auto* b = hyp.find_mark(m);
      occluders.push_back({m, b->existence, false, &b->spatial});
    }
  } else {
    for (const auto& b : hyp.bernoullis) {
      if (b.mark == mark) continue;
      occluders.push_back({b.mark, b.existence, false, &b.spatial});
    }
  }
  std::sort(occluders.begin(), occluders.end(),
            [](const Occluder& a, const Occluder& b) { return a.mark < b.mark; });
  return integrate(subject->spatial, occluders);
}

double EpdComputer::epd_per_mark(const GmMbm& prior, int mark) const {
  double num = 0.0;
  double den = 0.0;
  for (const auto& h : prior.hypotheses) {
    const auto* b = h.find_mark(mark);
    if (b == nullptr) continue;
    const double wr = std::exp(h.log_weight) * b->existence;
    if (wr == 0.0) continue;
    den += wr;
    num += wr * epd_hypothesis(mark, h);
  }
  if (den <= 0.0) throw NeverExistingError(mark);
  return num / den;
}

PodAssignment EpdComputer::pro(const GmMbm& prior) const {
  PodAssignment out;
  out.strategy = Strategy::kPro;
  diagnostics_.clear();

  for (int mark : all_marks(prior)) {
    EpdDiagnosticsRow row;
    row.mark = mark;
    double best_w = -1.0;
    const GmHypothesis* best = nullptr;
    for (const auto& h : prior.hypotheses) {
      const auto* b = h.find_mark(mark);
      if (b == nullptr || b->existence <= 0.0) continue;
      ++row.hypotheses;
      const double w = std::exp(h.log_weight);
      if (w > best_w) {
        best_w = w;
        best = &h;
      }
    }
    if (row.hypotheses == 0) {
      // No existence mass anywhere: the value is never used by the update, so
      // report the unoccluded curve value.
      out.per_mark[mark] = curve_(1.0);
      diagnostics_.push_back(row);
      continue;
    }
    out.per_mark[mark] = epd_per_mark(prior, mark);
    const Simplification s = simplify(mark, *best);
    row.occluders = static_cast<int>(s.certain.size() + s.uncertain.size());
    row.value = out.per_mark[mark];
    diagnostics_.push_back(row);
  }
  return out;
}

PodAssignment EpdComputer::eso(const GmMbm& prior, double exist_threshold) const {
  PodAssignment out;
  out.strategy = Strategy::kEso;

  const auto& best = prior.hypotheses[best_hypothesis_index(prior)];
  std::vector<std::pair<int, PedestrianState>> estimates;
  for (const auto& b : best.bernoullis) {
    if (b.existence >= exist_threshold)
      estimates.emplace_back(b.mark, PedestrianState::from_vector(b.spatial.mean()));
  }

  for (int mark : all_marks(prior)) {
    const auto it = std::find_if(estimates.begin(), estimates.end(),
                                 [&](const auto& e) { return e.first == mark; });
    if (it != estimates.end()) {
      std::vector<PedestrianState> others;
      for (const auto& e : estimates)
        if (e.first != mark) others.push_back(e.second);
      out.per_mark[mark] = pod_spo_d(it->second, others, cam_, occ_, curve_);
      continue;
    }
    // Below-threshold marks fall back to the unoccluded evaluation at their
    // highest-weight hypothesis mean.
    double best_w = -1.0;
    const GmBernoulli* fallback = nullptr;
    for (const auto& h : prior.hypotheses) {
      const auto* b = h.find_mark(mark);
      if (b == nullptr) continue;
      const double w = std::exp(h.log_weight);
      if (w > best_w) {
        best_w = w;
        fallback = b;
      }
    }
    out.per_mark[mark] =
        pod_spo_d(PedestrianState::from_vector(fallback->spatial.mean()), {}, cam_, occ_, curve_);
  }
  return out;
}

PodAssignment EpdComputer::constant(const GmMbm& prior, double pd) const {
  PodAssignment out;
  out.strategy = Strategy::kConstant;
  for (int mark : all_marks(prior)) out.per_mark[mark] = pd;
  return out;
}

}  // namespace palmtrack
