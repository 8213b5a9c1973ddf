#include "palmtrack/epd/kld_oracle.hpp"

#include <cmath>
#include <limits>

namespace palmtrack {

namespace {

double amb_eval(const DiscreteHypothesis& h, const std::vector<MarkedCell>& points) {
  for (const auto& p : points)
    if (!h.has_mark(p.mark)) return 0.0;
  double out = 1.0;
  for (const auto& b : h.bernoullis) {
    const MarkedCell* found = nullptr;
    for (const auto& p : points) {
      if (p.mark == b.mark) {
        found = &p;
        break;
      }
    }
    out *= found != nullptr ? b.existence * b.spatial.pdf(found->cell) : 1.0 - b.existence;
  }
  return out;
}

double prior_eval(const DiscreteMbm& prior, const std::vector<MarkedCell>& points) {
  double out = 0.0;
  for (const auto& h : prior.hypotheses) out += std::exp(h.log_weight) * amb_eval(h, points);
  return out;
}

}  // namespace

void DiscreteSensorModel::normalize_likelihood() {
  for (Eigen::Index x = 0; x < likelihood.rows(); ++x) {
    const double mass = likelihood.row(x).sum() * meas_space.cell_volume;
    if (mass <= 0.0) throw std::invalid_argument("likelihood row has zero mass");
    likelihood.row(x) /= mass;
  }
}

double epd_hypothesis_exact(const DiscreteSensorModel& model, const DiscreteHypothesis& hyp,
                            int mark) {
  const auto* subject = hyp.find_mark(mark);
  if (subject == nullptr) return 0.0;

  std::vector<const DiscreteBernoulli*> others;
  for (const auto& b : hyp.bernoullis)
    if (b.mark != mark) others.push_back(&b);

  std::vector<int> other_marks;
  for (const auto* b : others) other_marks.push_back(b->mark);
  const auto subsets = enumerate_combinations({}, other_marks, 20);

  const int ns = model.state_space.cells();
  const double vol = model.state_space.cell_volume;

  double total = 0.0;
  for (const auto& subset : subsets) {
    const double w = omega(subset, hyp, mark);
    if (w == 0.0) continue;

    std::vector<const DiscreteBernoulli*> present;
    for (int m : subset)
      for (const auto* b : others)
        if (b->mark == m) present.push_back(b);

    // Expectation of the detection probability over the subject state and the
    // states of the present occluders, fully enumerated.
    double integral = 0.0;
    std::vector<MarkedCell> occupied(present.size());
    const std::function<void(std::size_t, double)> assign = [&](std::size_t idx, double weight) {
      if (idx == present.size()) {
        for (int x = 0; x < ns; ++x) {
          const double px = subject->spatial.pdf(x) * vol;
          if (px == 0.0) continue;
          integral += weight * px * model.pod(x, mark, occupied);
        }
        return;
      }
      for (int c = 0; c < ns; ++c) {
        const double pc = present[idx]->spatial.pdf(c) * vol;
        if (pc == 0.0) continue;
        occupied[idx] = {c, present[idx]->mark};
        assign(idx + 1, weight * pc);
      }
    };
    assign(0, 1.0);
    total += w * integral;
  }
  return total;
}

double epd_per_mark_exact(const DiscreteSensorModel& model, const DiscreteMbm& prior, int mark) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& h : prior.hypotheses) {
    const auto* b = h.find_mark(mark);
    if (b == nullptr) continue;
    const double wr = std::exp(h.log_weight) * b->existence;
    if (wr == 0.0) continue;
    den += wr;
    num += wr * epd_hypothesis_exact(model, h, mark);
  }
  if (den <= 0.0) throw NeverExistingError(mark);
  return num / den;
}

PodAssignment pro_exact(const DiscreteSensorModel& model, const DiscreteMbm& prior) {
  PodAssignment out;
  out.strategy = Strategy::kPro;
  for (int mark : all_marks(prior)) out.per_mark[mark] = epd_per_mark_exact(model, prior, mark);
  return out;
}

double kld_oracle(const DiscreteSensorModel& model, const DiscreteMbm& prior,
                  const PodAssignment& pod_map) {
  const int ns = model.state_space.cells();
  const int nz = model.meas_space.cells();
  const auto marks = all_marks(prior);
  if (ns > 4 || nz > 4 || model.state_space.max_cardinality > 3 ||
      model.meas_space.max_cardinality > 3 || static_cast<int>(marks.size()) > 3)
    throw SpaceTooLargeError();

  const double vol_x = model.state_space.cell_volume;
  const double vol_z = model.meas_space.cell_volume;
  const double inf = std::numeric_limits<double>::infinity();

  // Detection factor of one object given its measurement option.
  // option: -1 for missed, otherwise the measurement cell.
  const auto detection_factor = [&](int state_cell, int option, double pod) {
    if (option < 0) return 1.0 - pod;
    return pod * model.likelihood(state_cell, option);
  };

  double kld = 0.0;

  // Enumerate marked state sets: a subset of marks, each assigned a cell.
  std::vector<MarkedCell> points;
  bool diverged = false;

  const std::function<void(std::size_t)> with_state_set = [&](std::size_t next_mark_idx) {
    if (diverged) return;

    const double prior_value = prior_eval(prior, points);
    if (prior_value > 0.0) {
      const double w_x = std::pow(vol_x, static_cast<double>(points.size()));
      const int n = static_cast<int>(points.size());

      // Per-object detection probabilities under both models.
      std::vector<double> pod_true(points.size()), pod_const(points.size());
      for (int i = 0; i < n; ++i) {
        std::vector<MarkedCell> rest;
        for (int j = 0; j < n; ++j)
          if (j != i) rest.push_back(points[static_cast<std::size_t>(j)]);
        const auto& p = points[static_cast<std::size_t>(i)];
        pod_true[static_cast<std::size_t>(i)] = model.pod(p.cell, p.mark, rest);
        pod_const[static_cast<std::size_t>(i)] = pod_map.per_mark.at(p.mark);
      }

      // Enumerate measurement sets: per object missed or one measurement cell,
      // plus any subset of clutter cells.
      std::vector<int> options(points.size(), -1);
      const std::function<void(std::size_t)> with_detections = [&](std::size_t idx) {
        if (diverged) return;
        if (idx == points.size()) {
          int detected = 0;
          double p_obj = 1.0, q_obj = 1.0;
          for (int i = 0; i < n; ++i) {
            const auto iu = static_cast<std::size_t>(i);
            if (options[iu] >= 0) ++detected;
            p_obj *= detection_factor(points[iu].cell, options[iu], pod_true[iu]);
            q_obj *= detection_factor(points[iu].cell, options[iu], pod_const[iu]);
          }
          for (std::size_t clutter_mask = 0; clutter_mask < (1u << nz); ++clutter_mask) {
            double clut = std::exp(-model.clutter_rate);
            int n_clutter = 0;
            for (int z = 0; z < nz; ++z) {
              if (clutter_mask & (1u << z)) {
                clut *= model.clutter_rate * model.clutter.pdf(z);
                ++n_clutter;
              }
            }
            if (clut == 0.0) continue;
            const double p_like = p_obj * clut;
            if (p_like == 0.0) continue;
            const double q_like = q_obj * clut;
            if (q_like == 0.0) {
              diverged = true;
              return;
            }
            const double w_z = std::pow(vol_z, static_cast<double>(detected + n_clutter));
            kld += w_x * w_z * prior_value * p_like * std::log(p_like / q_like);
          }
          return;
        }
        for (int option = -1; option < nz; ++option) {
          options[idx] = option;
          with_detections(idx + 1);
        }
      };
      with_detections(0);
    }

    if (static_cast<int>(points.size()) >= model.state_space.max_cardinality) return;
    for (std::size_t mi = next_mark_idx; mi < marks.size(); ++mi) {
      for (int c = 0; c < ns; ++c) {
        points.push_back({c, marks[mi]});
        with_state_set(mi + 1);
        points.pop_back();
      }
    }
  };
  with_state_set(0);

  return diverged ? inf : kld;
}

}  // namespace palmtrack
