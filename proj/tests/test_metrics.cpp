#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "palmtrack/metrics/tgospa.hpp"
#include "test_util.hpp"

using namespace palmtrack;

namespace {

BBox2D unit_square(double left, double top) { return {left, top, 1.0, 1.0}; }

// Exhaustive minimization over all per-frame assignment sequences, for tiny
// instances only.
double brute_force_tgospa(const TrajectorySet& gt, const TrajectorySet& est,
                          const TgospaParams& params) {
  std::vector<int> frames;
  for (const auto& [id, t] : gt.trajectories)
    for (const auto& [f, e] : t) frames.push_back(f);
  for (const auto& [id, t] : est.trajectories)
    for (const auto& [f, e] : t) frames.push_back(f);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  std::vector<int> gt_ids, est_ids;
  for (const auto& [id, t] : gt.trajectories) gt_ids.push_back(id);
  for (const auto& [id, t] : est.trajectories) est_ids.push_back(id);
  const int ng = static_cast<int>(gt_ids.size());
  const int ne = static_cast<int>(est_ids.size());

  const auto entry = [](const TrajectorySet& s, int id, int frame) -> const TrajectoryEntry* {
    const auto& t = s.trajectories.at(id);
    const auto it = t.find(frame);
    return it == t.end() ? nullptr : &it->second;
  };

  // All assignment vectors per frame: any injective partial map; a pair with
  // both sides present must be within the cutoff.
  std::vector<std::vector<std::vector<int>>> options;
  for (int f : frames) {
    std::vector<std::vector<int>> out;
    std::vector<int> pi(static_cast<std::size_t>(ng), -1);
    std::vector<char> used(static_cast<std::size_t>(ne), 0);
    const std::function<void(int)> rec = [&](int i) {
      if (i == ng) {
        out.push_back(pi);
        return;
      }
      rec(i + 1);
      const auto* g = entry(gt, gt_ids[static_cast<std::size_t>(i)], f);
      for (int j = 0; j < ne; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const auto* e = entry(est, est_ids[static_cast<std::size_t>(j)], f);
        if (g != nullptr && e != nullptr && 1.0 - iou(g->box, e->box) >= params.c) continue;
        used[static_cast<std::size_t>(j)] = 1;
        const int keep = pi[static_cast<std::size_t>(i)];
        pi[static_cast<std::size_t>(i)] = j;
        rec(i + 1);
        pi[static_cast<std::size_t>(i)] = keep;
        used[static_cast<std::size_t>(j)] = 0;
      }
    };
    rec(0);
    options.push_back(out);
  }

  const double miss = 0.5 * std::pow(params.c, params.p);
  const double gamma_p = std::pow(params.gamma, params.p);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> seq(frames.size());
  const std::function<void(std::size_t, double)> rec = [&](std::size_t k, double acc) {
    if (k == frames.size()) {
      best = std::min(best, acc);
      return;
    }
    for (const auto& pi : options[k]) {
      double cost = 0.0;
      std::vector<char> used(static_cast<std::size_t>(ne), 0);
      for (int i = 0; i < ng; ++i) {
        const auto* g = entry(gt, gt_ids[static_cast<std::size_t>(i)], frames[k]);
        const int j = pi[static_cast<std::size_t>(i)];
        const auto* e = j >= 0 ? entry(est, est_ids[static_cast<std::size_t>(j)], frames[k]) : nullptr;
        if (j >= 0) used[static_cast<std::size_t>(j)] = 1;
        if (g != nullptr && e != nullptr)
          cost += std::pow(1.0 - iou(g->box, e->box), params.p);
        else if (g != nullptr || e != nullptr)
          cost += miss;
      }
      for (int j = 0; j < ne; ++j)
        if (!used[static_cast<std::size_t>(j)] &&
            entry(est, est_ids[static_cast<std::size_t>(j)], frames[k]) != nullptr)
          cost += miss;
      if (k > 0) {
        for (int i = 0; i < ng; ++i) {
          const int a = seq[k - 1][static_cast<std::size_t>(i)];
          const int b = pi[static_cast<std::size_t>(i)];
          if (a != b) cost += gamma_p * ((a >= 0 && b >= 0) ? 1.0 : 0.5);
        }
      }
      seq[k] = pi;
      rec(k + 1, acc + cost);
    }
  };
  rec(0, 0.0);
  return std::pow(best, 1.0 / params.p);
}

TrajectorySet random_set(Rng& rng, int n_traj, int n_frames, int first_id) {
  TrajectorySet out;
  for (int t = 0; t < n_traj; ++t) {
    const int id = first_id + t;
    double x = rng.uniform(0.0, 4.0);
    double y = rng.uniform(0.0, 4.0);
    const int start = 1 + rng.uniform_int(2);
    const int stop = n_frames - rng.uniform_int(2);
    for (int f = start; f <= stop; ++f) {
      out.add(id, f, {x, y, 1.0, 1.0}, rng.uniform());
      x += rng.uniform(-0.4, 0.4);
      y += rng.uniform(-0.4, 0.4);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("iou basics") {
  CHECK(iou(unit_square(0, 0), unit_square(0, 0)) == doctest::Approx(1.0));
  CHECK(iou(unit_square(0, 0), unit_square(5, 5)) == 0.0);
  // Unit squares overlapping by half: 0.5 / 1.5.
  CHECK(iou(unit_square(0, 0), unit_square(0.5, 0)) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(iou(BBox2D{0, 0, 0, 0}, BBox2D{1, 1, 0, 0}), DegenerateBoxesError);
  CHECK(iou(BBox2D{0, 0, 0, 0}, unit_square(0, 0)) == 0.0);
}

TEST_CASE("tgospa identity, pure misses, and fragment switching") {
  TgospaParams params;

  TrajectorySet gt;
  for (int f = 1; f <= 6; ++f) gt.add(1, f, unit_square(0.1 * f, 0.0));

  // Identical estimate: zero everywhere.
  {
    TrajectorySet est;
    for (int f = 1; f <= 6; ++f) est.add(10, f, unit_square(0.1 * f, 0.0));
    const auto r = tgospa(gt, est, params);
    CHECK(r.value == doctest::Approx(0.0));
    CHECK(r.n_tp == doctest::Approx(6.0));
    CHECK(r.e_fn == 0.0);
    CHECK(r.e_fp == 0.0);
    CHECK(r.n_sw == 0.0);
  }

  // Empty estimate: closed-form pure-miss value.
  {
    TrajectorySet est;
    const auto r = tgospa(gt, est, params);
    const double expect = std::pow(6.0 * std::pow(params.c, params.p) / 2.0, 1.0 / params.p);
    CHECK(r.value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.n_fn == doctest::Approx(6.0));
  }

  // Two perfect fragments split mid-sequence. With a switch penalty mild
  // enough that a switch beats coasting through the second half
  // (gamma^p < 3 * c^p), the optimum is exactly one full switch.
  {
    TgospaParams mild = params;
    mild.gamma = 1.5;
    TrajectorySet est;
    for (int f = 1; f <= 3; ++f) est.add(10, f, unit_square(0.1 * f, 0.0));
    for (int f = 4; f <= 6; ++f) est.add(11, f, unit_square(0.1 * f, 0.0));
    const auto r = tgospa(gt, est, mild);
    CHECK(r.n_sw == doctest::Approx(1.0));
    CHECK(r.e_sw == doctest::Approx(std::pow(mild.gamma, mild.p)));
    CHECK(r.e_tp == doctest::Approx(0.0));
    CHECK(r.value == doctest::Approx(mild.gamma).epsilon(1e-12));
    // The exact value matches exhaustive assignment enumeration, with the
    // paper's stiffer switch penalty too.
    CHECK(r.value == doctest::Approx(brute_force_tgospa(gt, est, mild)).epsilon(1e-12));
    CHECK(tgospa(gt, est, params).value ==
          doctest::Approx(brute_force_tgospa(gt, est, params)).epsilon(1e-12));
  }
}

TEST_CASE("tgospa matches brute force on random small instances") {
  TgospaParams params;
  Rng rng(404);
  for (int trial = 0; trial < 15; ++trial) {
    const auto gt = random_set(rng, 1 + rng.uniform_int(2), 5, 1);
    const auto est = random_set(rng, 1 + rng.uniform_int(2), 5, 100);
    const auto exact = tgospa(gt, est, params);
    CHECK(exact.value ==
          doctest::Approx(brute_force_tgospa(gt, est, params)).epsilon(1e-10));

    // Decomposition identity.
    CHECK(std::pow(exact.value, params.p) ==
          doctest::Approx(exact.e_tp + exact.e_fn + exact.e_fp + exact.e_sw).epsilon(1e-9));

    // The greedy solver never undercuts the exact one.
    const auto approx = tgospa(gt, est, params, true);
    CHECK(approx.value >= exact.value - 1e-9);
  }
}

TEST_CASE("visibility decomposition splits") {
  TgospaParams params;

  // Fully visible ground truth: occluded parts vanish.
  {
    TrajectorySet gt, est;
    for (int f = 1; f <= 4; ++f) {
      gt.add(1, f, unit_square(0.0, 0.0), 1.0);
      est.add(9, f, unit_square(0.2, 0.0));
    }
    const auto r = tgospa(gt, est, params);
    CHECK(r.e_tp_occluded == 0.0);
    CHECK(r.n_tp_occluded == 0.0);
    CHECK(r.e_tp_visible == doctest::Approx(r.e_tp));
  }

  // Half-visible everywhere: equal halves.
  {
    TrajectorySet gt, est;
    for (int f = 1; f <= 4; ++f) {
      gt.add(1, f, unit_square(0.0, 0.0), 0.5);
      if (f <= 2) est.add(9, f, unit_square(0.2, 0.0));
    }
    const auto r = tgospa(gt, est, params);
    CHECK(r.e_tp_occluded == doctest::Approx(0.5 * r.e_tp));
    CHECK(r.e_fn_occluded == doctest::Approx(0.5 * r.e_fn));
    CHECK(r.n_fn_occluded == doctest::Approx(0.5 * r.n_fn));
  }

  // Mixed visibilities: splits sum to the totals exactly.
  {
    Rng rng(11);
    const auto gt = random_set(rng, 2, 5, 1);
    const auto est = random_set(rng, 2, 5, 100);
    const auto r = tgospa(gt, est, params);
    CHECK(r.e_tp == doctest::Approx(r.e_tp_occluded + r.e_tp_visible).epsilon(1e-12));
    CHECK(r.e_fn == doctest::Approx(r.e_fn_occluded + r.e_fn_visible).epsilon(1e-12));
    CHECK(r.n_tp == doctest::Approx(r.n_tp_occluded + r.n_tp_visible).epsilon(1e-12));
    CHECK(r.n_fn == doctest::Approx(r.n_fn_occluded + r.n_fn_visible).epsilon(1e-12));
  }
}

TEST_CASE("metric properties: symmetry and triangle inequality spot-checks") {
  TgospaParams params;
  Rng rng(2025);
  for (int trial = 0; trial < 8; ++trial) {
    const auto a = random_set(rng, 2, 4, 1);
    const auto b = random_set(rng, 2, 4, 100);
    const auto c = random_set(rng, 1 + rng.uniform_int(2), 4, 200);

    const double ab = tgospa(a, b, params).value;
    const double ba = tgospa(b, a, params).value;
    CHECK(ab == doctest::Approx(ba).epsilon(1e-9));

    const double ac = tgospa(a, c, params).value;
    const double cb = tgospa(c, b, params).value;
    CHECK(ab <= ac + cb + 1e-9);

    CHECK(tgospa(a, a, params).value == doctest::Approx(0.0));
  }
}

TEST_CASE("cutoff economics: errors beyond c/2^(1/p) are better omitted") {
  TgospaParams params;  // p = 2.41, c = 1
  const double breakeven = params.c / std::pow(2.0, 1.0 / params.p);
  CHECK(breakeven == doctest::Approx(0.75).epsilon(2e-3));

  // Build single-frame instances with a controlled IoU distance.
  const auto with_distance = [&](double d) {
    TrajectorySet gt, est;
    gt.add(1, 1, unit_square(0.0, 0.0));
    // Shift so that 1 - IoU = d; for unit squares shifted by s horizontally,
    // IoU = (1-s)/(1+s)  =>  s = d / (2 - d).
    const double s = d / (2.0 - d);
    est.add(9, 1, unit_square(s, 0.0));
    return std::make_pair(gt, est);
  };

  for (const double d : {0.73, 0.7495}) {
    const auto [gt, est] = with_distance(d);
    TrajectorySet empty;
    CHECK(std::pow(tgospa(gt, est, params).value, params.p) <
          std::pow(tgospa(gt, empty, params).value, params.p));
  }
  for (const double d : {0.7505, 0.8, 0.9}) {
    const auto [gt, est] = with_distance(d);
    TrajectorySet empty;
    CHECK(std::pow(tgospa(gt, est, params).value, params.p) >
          std::pow(tgospa(gt, empty, params).value, params.p));
  }
}

TEST_CASE("exact solver rejects oversized instances") {
  TgospaParams params;
  TrajectorySet gt, est;
  for (int id = 1; id <= 7; ++id) gt.add(id, 1, unit_square(id, 0.0));
  est.add(100, 1, unit_square(0.0, 0.0));
  CHECK_THROWS_AS(tgospa(gt, est, params), InstanceTooLargeError);
  CHECK_NOTHROW(tgospa(gt, est, params, true));
}
