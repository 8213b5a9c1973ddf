#include "palmtrack/filter/mbm_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "palmtrack/filter/murty.hpp"

namespace palmtrack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxDetectionMass = 1.0 - 1e-12;  // keeps the missed branch finite

struct ComponentProjection {
  bool ok = false;
  Eigen::VectorXd zhat;
  Eigen::MatrixXd chol;  // lower factor of the innovation covariance
  Eigen::MatrixXd gain;
  Eigen::MatrixXd post_cov;
  double log_norm = 0.0;

  double log_likelihood(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd sol = chol.triangularView<Eigen::Lower>().solve(z - zhat);
    return -0.5 * sol.squaredNorm() - log_norm;
  }

  double mahalanobis2(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd sol = chol.triangularView<Eigen::Lower>().solve(z - zhat);
    return sol.squaredNorm();
  }
};

ComponentProjection project_component(const GaussianComponent& c, const MeasurementModel& model) {
  ComponentProjection out;
  Eigen::VectorXd zhat;
  Eigen::MatrixXd pzz, cross;
  if (model.H.has_value()) {
    const Eigen::MatrixXd& H = *model.H;
    zhat = H * c.mean;
    pzz = H * c.cov * H.transpose();
    cross = c.cov * H.transpose();
  } else {
    try {
      const auto ut = unscented_transform(
          c.mean, c.cov,
          [&](const Eigen::VectorXd& x) {
            return Eigen::VectorXd(
                box_vec(project_bbox(PedestrianState::from_vector(x), *model.camera)));
          },
          model.ut_alpha);
      zhat = ut.mean;
      pzz = ut.cov;
      cross = ut.cross;
    } catch (const BehindCameraError&) {
      return out;  // not detectable from this component
    }
  }

  Eigen::MatrixXd S = pzz + model.R;
  S = 0.5 * (S + S.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) return out;
  out.chol = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < out.chol.rows(); ++i) log_det += std::log(out.chol(i, i));
  out.log_norm = 0.5 * static_cast<double>(S.rows()) * std::log(2.0 * std::numbers::pi) + log_det;
  out.gain = llt.solve(cross.transpose()).transpose();
  out.post_cov = c.cov - out.gain * S * out.gain.transpose();
  out.zhat = std::move(zhat);
  out.ok = true;
  return out;
}

GaussianMixture kalman_updated_mixture(const GaussianMixture& prior,
                                       const std::vector<ComponentProjection>& proj,
                                       const Eigen::VectorXd& z) {
  std::vector<GaussianComponent> comps;
  comps.reserve(prior.components().size());
  for (std::size_t c = 0; c < prior.components().size(); ++c) {
    if (!proj[c].ok) continue;
    const auto& pc = prior.components()[c];
    GaussianComponent upd;
    upd.weight = pc.weight * std::exp(proj[c].log_likelihood(z));
    upd.mean = pc.mean + proj[c].gain * (z - proj[c].zhat);
    upd.cov = proj[c].post_cov;
    comps.push_back(std::move(upd));
  }
  return GaussianMixture(std::move(comps));
}

}  // namespace

MotionModel MotionModel::constant_velocity(double dt, double accel_sd, double size_sd,
                                           double survival) {
  MotionModel m;
  m.dt = dt;
  m.survival = survival;
  m.F = Eigen::MatrixXd::Identity(8, 8);
  m.Q = Eigen::MatrixXd::Zero(8, 8);
  const double q = accel_sd * accel_sd;
  for (int axis = 0; axis < 3; ++axis) {
    const int p = 2 * axis;
    m.F(p, p + 1) = dt;
    m.Q(p, p) = q * dt * dt * dt / 3.0;
    m.Q(p, p + 1) = q * dt * dt / 2.0;
    m.Q(p + 1, p) = q * dt * dt / 2.0;
    m.Q(p + 1, p + 1) = q * dt;
  }
  m.Q(6, 6) = size_sd * size_sd * dt;
  m.Q(7, 7) = size_sd * size_sd * dt;
  return m;
}

std::vector<BBox2D> project_estimates_ut(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>& states,
    const CameraModel& cam, double alpha) {
  std::vector<BBox2D> out;
  out.reserve(states.size());
  for (const auto& [mean, cov] : states) {
    try {
      const auto ut = unscented_transform(
          mean, cov,
          [&](const Eigen::VectorXd& x) {
            return Eigen::VectorXd(box_vec(project_bbox(PedestrianState::from_vector(x), cam)));
          },
          alpha);
      out.push_back(box_from_vec(ut.mean));
    } catch (const BehindCameraError&) {
      // Sigma-point spillover behind the camera; fall back to the mean.
      out.push_back(project_bbox(PedestrianState::from_vector(mean), cam));
    }
  }
  return out;
}

GmMbm predict(const GmMbm& posterior, const MotionModel& motion,
              const std::vector<GmBernoulli>& birth) {
  GmMbm out;
  out.hypotheses.reserve(posterior.hypotheses.size());
  for (const auto& h : posterior.hypotheses) {
    GmHypothesis next;
    next.log_weight = h.log_weight;
    next.bernoullis.reserve(h.bernoullis.size() + birth.size());
    for (const auto& b : h.bernoullis) {
      std::vector<GaussianComponent> comps;
      comps.reserve(b.spatial.components().size());
      for (const auto& c : b.spatial.components()) {
        comps.push_back({c.weight, motion.F * c.mean,
                         motion.F * c.cov * motion.F.transpose() + motion.Q});
      }
      next.bernoullis.push_back(
          {b.mark, motion.survival * b.existence, GaussianMixture(std::move(comps))});
    }
    for (const auto& b : birth) next.bernoullis.push_back(b);
    out.hypotheses.push_back(std::move(next));
  }
  return out;
}

GmMbm prune_and_cap(const GmMbm& mbm, const FilterConfig& cfg) {
  GmMbm out = mbm;
  normalize_log_weights(out);

  std::vector<std::size_t> order(out.hypotheses.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.hypotheses[a].log_weight > out.hypotheses[b].log_weight;
  });

  GmMbm kept;
  for (std::size_t idx : order) {
    if (out.hypotheses[idx].log_weight < cfg.prune_log_weight) continue;
    if (static_cast<int>(kept.hypotheses.size()) >= cfg.max_hypotheses) break;
    kept.hypotheses.push_back(std::move(out.hypotheses[idx]));
  }
  if (kept.hypotheses.empty())
    kept.hypotheses.push_back(std::move(out.hypotheses[order.front()]));
  normalize_log_weights(kept);

  for (auto& h : kept.hypotheses) {
    std::erase_if(h.bernoullis,
                  [&](const GmBernoulli& b) { return b.existence < cfg.discard_existence; });
  }
  return kept;
}

GmMbm update(const GmMbm& prior, const std::vector<Eigen::VectorXd>& measurements,
             const PodAssignment& pod, const MeasurementModel& model, const FilterConfig& cfg) {
  for (int mark : all_marks(prior))
    if (pod.per_mark.find(mark) == pod.per_mark.end()) throw MissingPodError(mark);

  GmMbm normalized = prior;
  normalize_log_weights(normalized);

  const int n_meas = static_cast<int>(measurements.size());
  const double lw_clutter =
      model.clutter_rate > 0.0 ? std::log(model.clutter_rate) + model.clutter_log_density : -kInf;

  GmMbm children;
  for (const auto& parent : normalized.hypotheses) {
    const int n_tracks = static_cast<int>(parent.bernoullis.size());

    // Per-track per-component measurement projections.
    std::vector<std::vector<ComponentProjection>> proj(static_cast<std::size_t>(n_tracks));
    std::vector<double> lw_miss(static_cast<std::size_t>(n_tracks));
    std::vector<double> pd(static_cast<std::size_t>(n_tracks));
    for (int i = 0; i < n_tracks; ++i) {
      const auto& b = parent.bernoullis[static_cast<std::size_t>(i)];
      pd[static_cast<std::size_t>(i)] = pod.per_mark.at(b.mark);
      const double mass =
          std::min(b.existence * pd[static_cast<std::size_t>(i)], kMaxDetectionMass);
      lw_miss[static_cast<std::size_t>(i)] = std::log1p(-mass);
      for (const auto& c : b.spatial.components())
        proj[static_cast<std::size_t>(i)].push_back(project_component(c, model));
    }

    // Association log-likelihoods with ellipsoidal gating.
    Eigen::MatrixXd lw_det(n_meas, std::max(n_tracks, 1));
    lw_det.setConstant(-kInf);
    for (int j = 0; j < n_meas; ++j) {
      for (int i = 0; i < n_tracks; ++i) {
        const auto& b = parent.bernoullis[static_cast<std::size_t>(i)];
        if (b.existence <= 0.0 || pd[static_cast<std::size_t>(i)] <= 0.0) continue;
        bool gated_in = false;
        std::vector<double> comp_terms;
        for (std::size_t c = 0; c < proj[static_cast<std::size_t>(i)].size(); ++c) {
          const auto& p = proj[static_cast<std::size_t>(i)][c];
          if (!p.ok) continue;
          if (p.mahalanobis2(measurements[static_cast<std::size_t>(j)]) <= cfg.gate_threshold)
            gated_in = true;
          comp_terms.push_back(std::log(b.spatial.components()[c].weight) +
                               p.log_likelihood(measurements[static_cast<std::size_t>(j)]));
        }
        if (!gated_in || comp_terms.empty()) continue;
        lw_det(j, i) = std::log(b.existence) + std::log(pd[static_cast<std::size_t>(i)]) +
                       log_sum_exp(comp_terms);
      }
    }

    // Cost matrix: measurement rows; track columns then one clutter dummy per
    // measurement.
    Eigen::MatrixXd cost(n_meas, n_tracks + n_meas);
    cost.setConstant(kInf);
    for (int j = 0; j < n_meas; ++j) {
      for (int i = 0; i < n_tracks; ++i) {
        if (std::isfinite(lw_det(j, i)))
          cost(j, i) = -(lw_det(j, i) - lw_miss[static_cast<std::size_t>(i)]);
      }
      cost(j, n_tracks + j) = -lw_clutter;
    }

    const int k_best = std::max(
        1, static_cast<int>(std::ceil(std::exp(parent.log_weight) * cfg.murty_factor)));
    const auto assignments = murty_kbest(cost, k_best);

    double miss_total = 0.0;
    for (int i = 0; i < n_tracks; ++i) miss_total += lw_miss[static_cast<std::size_t>(i)];

    for (const auto& assignment : assignments) {
      GmHypothesis child;
      child.log_weight = parent.log_weight + miss_total - assignment.cost;

      std::vector<int> detected_by(static_cast<std::size_t>(n_tracks), -1);
      for (int j = 0; j < n_meas; ++j) {
        const int col = assignment.row_to_col[static_cast<std::size_t>(j)];
        if (col < n_tracks) detected_by[static_cast<std::size_t>(col)] = j;
      }

      for (int i = 0; i < n_tracks; ++i) {
        const auto& b = parent.bernoullis[static_cast<std::size_t>(i)];
        const int j = detected_by[static_cast<std::size_t>(i)];
        if (j < 0) {
          const double mass =
              std::min(b.existence * pd[static_cast<std::size_t>(i)], kMaxDetectionMass);
          const double r_missed = b.existence * (1.0 - pd[static_cast<std::size_t>(i)]) /
                                  (1.0 - mass);
          child.bernoullis.push_back({b.mark, r_missed, b.spatial});
        } else {
          child.bernoullis.push_back(
              {b.mark, 1.0,
               kalman_updated_mixture(b.spatial, proj[static_cast<std::size_t>(i)],
                                      measurements[static_cast<std::size_t>(j)])});
        }
      }
      children.hypotheses.push_back(std::move(child));
    }
  }

  if (children.hypotheses.empty())
    throw std::runtime_error("no feasible measurement association in any hypothesis");
  return prune_and_cap(children, cfg);
}

std::vector<TrackEstimate> estimate(const GmMbm& mbm, const FilterConfig& cfg,
                                    const CameraModel* cam, double ut_alpha) {
  const auto& best = mbm.hypotheses[best_hypothesis_index(mbm)];
  std::vector<TrackEstimate> out;
  std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>> to_project;
  for (const auto& b : best.bernoullis) {
    if (b.existence < cfg.exist_threshold) continue;
    TrackEstimate e;
    e.mark = b.mark;
    e.state = b.spatial.mean();
    e.existence = b.existence;
    out.push_back(std::move(e));
    if (cam != nullptr) to_project.emplace_back(b.spatial.mean(), b.spatial.moment_cov());
  }
  if (cam != nullptr) {
    const auto boxes = project_estimates_ut(to_project, *cam, ut_alpha);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].box = boxes[i];
  }
  return out;
}

TrackOutput run_tracker(const std::vector<DetectionFrame>& frames, const TrackerModels& models,
                        const FilterConfig& cfg, std::uint64_t seed, EpdReportSink* report) {
  GmMbm posterior;
  posterior.hypotheses.push_back(GmHypothesis{0.0, {}});
  MarkAllocator marks;
  TrackOutput out;

  int last_frame = 0;
  for (const auto& det : frames) {
    if (det.frame <= last_frame)
      throw FilterRunError(det.frame, "detection frames must be strictly increasing");
    last_frame = det.frame;

    try {
      std::vector<GmBernoulli> birth;
      birth.reserve(models.birth.size());
      for (const auto& [r, gm] : models.birth) birth.push_back({marks.fresh(), r, gm});

      GmMbm predicted = predict(posterior, models.motion, birth);
      normalize_log_weights(predicted);

      EpdComputer epd(models.camera, models.occlusion, models.curve, models.epd,
                      mix_seed({seed, static_cast<std::uint64_t>(det.frame)}));
      PodAssignment pod;
      switch (cfg.strategy) {
        case Strategy::kConstant: pod = epd.constant(predicted, cfg.constant_pd); break;
        case Strategy::kEso: pod = epd.eso(predicted, cfg.exist_threshold); break;
        case Strategy::kPro: pod = epd.pro(predicted); break;
      }
      if (report != nullptr) {
        if (cfg.strategy == Strategy::kPro) {
          report->frame_diagnostics(det.frame, epd.last_diagnostics());
        } else {
          std::vector<EpdDiagnosticsRow> rows;
          for (const auto& [mark, value] : pod.per_mark) rows.push_back({mark, value, 0, 0});
          report->frame_diagnostics(det.frame, rows);
        }
      }

      std::vector<Eigen::VectorXd> z;
      z.reserve(det.boxes.size());
      for (const auto& b : det.boxes) z.emplace_back(b);

      posterior = update(predicted, z, pod, models.meas, cfg);
      out.frame_numbers.push_back(det.frame);
      out.frames.push_back(estimate(posterior, cfg, &models.camera, models.meas.ut_alpha));
    } catch (const FilterRunError&) {
      throw;
    } catch (const std::exception& e) {
      throw FilterRunError(det.frame, e.what());
    }
  }
  return out;
}

}  // namespace palmtrack
