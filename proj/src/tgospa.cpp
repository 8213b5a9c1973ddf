#include "palmtrack/metrics/tgospa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <set>

#include "palmtrack/assignment/hungarian.hpp"

namespace palmtrack {

double iou(const BBox2D& a, const BBox2D& b) {
  if (a.area() <= 0.0 && b.area() <= 0.0) throw DegenerateBoxesError();
  const double left = std::max(a.left, b.left);
  const double top = std::max(a.top, b.top);
  const double right = std::min(a.right(), b.right());
  const double bottom = std::min(a.bottom(), b.bottom());
  const double inter =
      (right > left && bottom > top) ? (right - left) * (bottom - top) : 0.0;
  // Clamp away rounding spill so 1 - iou stays a nonnegative base distance.
  return std::clamp(inter / (a.area() + b.area() - inter), 0.0, 1.0);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kUnassigned = -1;

// Half/one switch rule on assignment indices (kUnassigned plays the role of
// "not assigned").
double switch_step(int before, int after) {
  if (before == after) return 0.0;
  if (before != kUnassigned && after != kUnassigned) return 1.0;
  return 0.5;
}

struct Problem {
  std::vector<int> gt_ids, est_ids;
  std::vector<int> frames;
  // entry pointers per frame per trajectory (nullptr when absent)
  std::vector<std::vector<const TrajectoryEntry*>> gt_at;   // [frame][gt]
  std::vector<std::vector<const TrajectoryEntry*>> est_at;  // [frame][est]
  // base distances per frame: d = 1 - IoU, or +inf when unassignable
  std::vector<Eigen::MatrixXd> dist;

  int n_frames() const { return static_cast<int>(frames.size()); }
  int n_gt() const { return static_cast<int>(gt_ids.size()); }
  int n_est() const { return static_cast<int>(est_ids.size()); }
};

Problem build_problem(const TrajectorySet& gt, const TrajectorySet& est,
                      const TgospaParams& params) {
  Problem prob;
  std::set<int> frame_set;
  for (const auto& [id, traj] : gt.trajectories) {
    prob.gt_ids.push_back(id);
    for (const auto& [frame, entry] : traj) frame_set.insert(frame);
  }
  for (const auto& [id, traj] : est.trajectories) {
    prob.est_ids.push_back(id);
    for (const auto& [frame, entry] : traj) frame_set.insert(frame);
  }
  prob.frames.assign(frame_set.begin(), frame_set.end());

  prob.gt_at.assign(prob.frames.size(),
                    std::vector<const TrajectoryEntry*>(prob.gt_ids.size(), nullptr));
  prob.est_at.assign(prob.frames.size(),
                     std::vector<const TrajectoryEntry*>(prob.est_ids.size(), nullptr));
  for (std::size_t k = 0; k < prob.frames.size(); ++k) {
    Eigen::MatrixXd d(prob.n_gt(), prob.n_est());
    d.setConstant(kInf);
    for (int i = 0; i < prob.n_gt(); ++i) {
      const auto& traj = gt.trajectories.at(prob.gt_ids[static_cast<std::size_t>(i)]);
      const auto it = traj.find(prob.frames[k]);
      if (it != traj.end()) prob.gt_at[k][static_cast<std::size_t>(i)] = &it->second;
    }
    for (int j = 0; j < prob.n_est(); ++j) {
      const auto& traj = est.trajectories.at(prob.est_ids[static_cast<std::size_t>(j)]);
      const auto it = traj.find(prob.frames[k]);
      if (it != traj.end()) prob.est_at[k][static_cast<std::size_t>(j)] = &it->second;
    }
    for (int i = 0; i < prob.n_gt(); ++i) {
      for (int j = 0; j < prob.n_est(); ++j) {
        const auto* g = prob.gt_at[k][static_cast<std::size_t>(i)];
        const auto* e = prob.est_at[k][static_cast<std::size_t>(j)];
        if (g == nullptr || e == nullptr) continue;
        const double base = 1.0 - iou(g->box, e->box);
        if (base < params.c) d(i, j) = base;
      }
    }
    prob.dist.push_back(std::move(d));
  }
  return prob;
}

// Totals of a fixed assignment sequence. An assignment may persist while
// either trajectory is absent; a one-sided frame counts as a miss (ground
// truth present) or a false estimate (estimate present) at half the cutoff
// cost, exactly as if the pair were unassigned.
TgospaResult accumulate(const Problem& prob, const TgospaParams& params,
                        const std::vector<std::vector<int>>& sequence) {
  TgospaResult out;
  const double miss_cost = 0.5 * std::pow(params.c, params.p);
  const double gamma_p = std::pow(params.gamma, params.p);

  for (int k = 0; k < prob.n_frames(); ++k) {
    TgospaFrameRow row;
    row.frame = prob.frames[static_cast<std::size_t>(k)];
    const auto& pi = sequence[static_cast<std::size_t>(k)];
    std::vector<char> est_covered(static_cast<std::size_t>(prob.n_est()), 0);

    const auto count_fn = [&](double v) {
      out.e_fn += miss_cost;
      out.e_fn_occluded += miss_cost * (1.0 - v);
      out.e_fn_visible += miss_cost * v;
      out.n_fn += 1.0;
      out.n_fn_occluded += 1.0 - v;
      out.n_fn_visible += v;
      row.e_fn += miss_cost;
    };
    const auto count_fp = [&] {
      out.e_fp += miss_cost;
      out.n_fp += 1.0;
      row.e_fp += miss_cost;
    };

    for (int i = 0; i < prob.n_gt(); ++i) {
      const auto* g = prob.gt_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      const int j = pi[static_cast<std::size_t>(i)];
      const auto* e = j == kUnassigned
                          ? nullptr
                          : prob.est_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      if (j != kUnassigned) est_covered[static_cast<std::size_t>(j)] = 1;

      if (g != nullptr && e != nullptr) {
        const double d = prob.dist[static_cast<std::size_t>(k)](i, j);
        const double dp = std::pow(d, params.p);
        const double v = g->visibility;
        out.e_tp += dp;
        out.e_tp_occluded += (1.0 - v) * dp;
        out.e_tp_visible += v * dp;
        out.n_tp += 1.0;
        out.n_tp_occluded += 1.0 - v;
        out.n_tp_visible += v;
        row.e_tp += dp;
      } else if (g != nullptr) {
        count_fn(g->visibility);
      } else if (e != nullptr) {
        count_fp();
      }
    }
    for (int j = 0; j < prob.n_est(); ++j) {
      if (prob.est_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] != nullptr &&
          !est_covered[static_cast<std::size_t>(j)])
        count_fp();
    }
    if (k > 0) {
      for (int i = 0; i < prob.n_gt(); ++i) {
        const double s = switch_step(sequence[static_cast<std::size_t>(k) - 1][static_cast<std::size_t>(i)],
                                     pi[static_cast<std::size_t>(i)]);
        out.n_sw += s;
        row.e_sw += gamma_p * s;
      }
    }
    out.per_frame.push_back(row);
  }
  out.e_sw = gamma_p * out.n_sw;
  out.value = std::pow(out.e_tp + out.e_fn + out.e_fp + out.e_sw, 1.0 / params.p);
  return out;
}

// Per-frame cost of an assignment vector, excluding switch terms.
double local_cost(const Problem& prob, const TgospaParams& params, int k,
                  const std::vector<int>& pi) {
  const double miss_cost = 0.5 * std::pow(params.c, params.p);
  double cost = 0.0;
  std::vector<char> est_covered(static_cast<std::size_t>(prob.n_est()), 0);
  for (int i = 0; i < prob.n_gt(); ++i) {
    const auto* g = prob.gt_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
    const int j = pi[static_cast<std::size_t>(i)];
    const auto* e = j == kUnassigned
                        ? nullptr
                        : prob.est_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    if (j != kUnassigned) est_covered[static_cast<std::size_t>(j)] = 1;
    if (g != nullptr && e != nullptr)
      cost += std::pow(prob.dist[static_cast<std::size_t>(k)](i, j), params.p);
    else if (g != nullptr || e != nullptr)
      cost += miss_cost;
  }
  for (int j = 0; j < prob.n_est(); ++j) {
    if (prob.est_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] != nullptr &&
        !est_covered[static_cast<std::size_t>(j)])
      cost += miss_cost;
  }
  return cost;
}

// All valid assignment vectors at frame k: any injective partial map from
// ground truths to estimates; a pair where both are present must be within
// the cutoff, and a pair may persist while either side is absent.
std::vector<std::vector<int>> valid_assignments(const Problem& prob, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> pi(static_cast<std::size_t>(prob.n_gt()), kUnassigned);
  std::vector<char> used(static_cast<std::size_t>(prob.n_est()), 0);
  const std::function<void(int)> rec = [&](int i) {
    if (i == prob.n_gt()) {
      out.push_back(pi);
      return;
    }
    pi[static_cast<std::size_t>(i)] = kUnassigned;
    rec(i + 1);
    const bool gt_present =
        prob.gt_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] != nullptr;
    for (int j = 0; j < prob.n_est(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const bool est_present =
          prob.est_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] != nullptr;
      if (gt_present && est_present &&
          !std::isfinite(prob.dist[static_cast<std::size_t>(k)](i, j)))
        continue;
      used[static_cast<std::size_t>(j)] = 1;
      pi[static_cast<std::size_t>(i)] = j;
      rec(i + 1);
      pi[static_cast<std::size_t>(i)] = kUnassigned;
      used[static_cast<std::size_t>(j)] = 0;
    }
  };
  rec(0);
  return out;
}

std::vector<std::vector<int>> solve_exact(const Problem& prob, const TgospaParams& params) {
  if (prob.n_gt() > params.max_exact_gt || prob.n_est() > params.max_exact_est ||
      prob.n_frames() > params.max_exact_frames)
    throw InstanceTooLargeError();

  const double gamma_p = std::pow(params.gamma, params.p);
  std::vector<std::vector<std::vector<int>>> states;  // per frame
  std::vector<std::vector<double>> best;              // per frame per state
  std::vector<std::vector<int>> parent;               // per frame per state

  for (int k = 0; k < prob.n_frames(); ++k) {
    states.push_back(valid_assignments(prob, k));
    const auto& cur = states.back();
    std::vector<double> cost(cur.size(), kInf);
    std::vector<int> from(cur.size(), -1);
    for (std::size_t s = 0; s < cur.size(); ++s) {
      const double local = local_cost(prob, params, k, cur[s]);
      if (k == 0) {
        cost[s] = local;
        continue;
      }
      const auto& prev = states[static_cast<std::size_t>(k) - 1];
      for (std::size_t t = 0; t < prev.size(); ++t) {
        double sw = 0.0;
        for (int i = 0; i < prob.n_gt(); ++i)
          sw += switch_step(prev[t][static_cast<std::size_t>(i)], cur[s][static_cast<std::size_t>(i)]);
        const double candidate = best[static_cast<std::size_t>(k) - 1][t] + gamma_p * sw + local;
        if (candidate < cost[s]) {
          cost[s] = candidate;
          from[s] = static_cast<int>(t);
        }
      }
    }
    best.push_back(std::move(cost));
    parent.push_back(std::move(from));
  }

  // Backtrack the cheapest terminal state.
  std::vector<std::vector<int>> sequence(static_cast<std::size_t>(prob.n_frames()));
  int state = 0;
  const auto& final_costs = best.back();
  for (std::size_t s = 1; s < final_costs.size(); ++s)
    if (final_costs[s] < final_costs[static_cast<std::size_t>(state)]) state = static_cast<int>(s);
  for (int k = prob.n_frames() - 1; k >= 0; --k) {
    sequence[static_cast<std::size_t>(k)] = states[static_cast<std::size_t>(k)][static_cast<std::size_t>(state)];
    state = parent[static_cast<std::size_t>(k)][static_cast<std::size_t>(state)];
  }
  return sequence;
}

std::vector<std::vector<int>> solve_greedy(const Problem& prob, const TgospaParams& params) {
  const double miss_cost = 0.5 * std::pow(params.c, params.p);
  const double gamma_p = std::pow(params.gamma, params.p);

  std::vector<std::vector<int>> sequence;
  std::vector<int> prev(static_cast<std::size_t>(prob.n_gt()), kUnassigned);

  for (int k = 0; k < prob.n_frames(); ++k) {
    // Rows: all ground truths (absent ones may coast an assignment through a
    // gap). Columns: estimates, then one no-match dummy per row. Covering an
    // estimate removes its false-positive cost, hence the credit.
    const int ng = prob.n_gt();
    std::vector<int> pi(static_cast<std::size_t>(ng), kUnassigned);
    if (ng > 0) {
      Eigen::MatrixXd cost(ng, prob.n_est() + ng);
      cost.setConstant(kInf);
      for (int i = 0; i < ng; ++i) {
        const bool gt_present =
            prob.gt_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] != nullptr;
        for (int j = 0; j < prob.n_est(); ++j) {
          const bool est_present =
              prob.est_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] != nullptr;
          const double sw = k > 0 ? switch_step(prev[static_cast<std::size_t>(i)], j) : 0.0;
          double local;
          if (gt_present && est_present) {
            const double d = prob.dist[static_cast<std::size_t>(k)](i, j);
            if (!std::isfinite(d)) continue;
            local = std::pow(d, params.p) - miss_cost;  // credit: estimate not false
          } else if (est_present) {
            local = miss_cost - miss_cost;  // one-sided cost cancels the credit
          } else {
            local = gt_present ? miss_cost : 0.0;
          }
          cost(i, j) = local + gamma_p * sw;
        }
        const double sw_none =
            k > 0 ? switch_step(prev[static_cast<std::size_t>(i)], kUnassigned) : 0.0;
        cost(i, prob.n_est() + i) = (gt_present ? miss_cost : 0.0) + gamma_p * sw_none;
      }
      const auto solved = solve_assignment(cost);
      if (solved.has_value()) {
        for (int i = 0; i < ng; ++i) {
          const int col = solved->row_to_col[static_cast<std::size_t>(i)];
          if (col < prob.n_est()) pi[static_cast<std::size_t>(i)] = col;
        }
      }
    }
    sequence.push_back(pi);
    prev = sequence.back();
  }
  return sequence;
}

}  // namespace

TgospaResult tgospa(const TrajectorySet& gt, const TrajectorySet& est, const TgospaParams& params,
                    bool approximate) {
  const Problem prob = build_problem(gt, est, params);
  if (prob.n_frames() == 0) return TgospaResult{};
  const auto sequence = approximate ? solve_greedy(prob, params) : solve_exact(prob, params);
  return accumulate(prob, params, sequence);
}

void write_tgospa_report(const std::string& path, const TgospaResult& r,
                         const TgospaParams& params, bool per_frame_series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[512];
  std::snprintf(buf, sizeof(buf), "# tgospa p=%g c=%g gamma=%g base=1-IoU\n", params.p, params.c,
                params.gamma);
  out << buf;
  out << "value\te_tp\tn_tp\te_tp_occ\tn_tp_occ\te_tp_vis\tn_tp_vis"
         "\te_fn\tn_fn\te_fn_occ\tn_fn_occ\te_fn_vis\tn_fn_vis\te_fp\tn_fp\te_sw\tn_sw\n";
  std::snprintf(buf, sizeof(buf),
                "%.6f\t%.6f\t%.2f\t%.6f\t%.2f\t%.6f\t%.2f\t%.6f\t%.2f\t%.6f\t%.2f\t%.6f\t%.2f"
                "\t%.6f\t%.2f\t%.6f\t%.2f\n",
                r.value, r.e_tp, r.n_tp, r.e_tp_occluded, r.n_tp_occluded, r.e_tp_visible,
                r.n_tp_visible, r.e_fn, r.n_fn, r.e_fn_occluded, r.n_fn_occluded, r.e_fn_visible,
                r.n_fn_visible, r.e_fp, r.n_fp, r.e_sw, r.n_sw);
  out << buf;
  if (per_frame_series) {
    out << "\n# per-frame error components\nframe\te_tp\te_fn\te_fp\te_sw\n";
    for (const auto& row : r.per_frame) {
      std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\t%.6f\t%.6f\n", row.frame, row.e_tp,
                    row.e_fn, row.e_fp, row.e_sw);
      out << buf;
    }
  }
}

}  // namespace palmtrack
