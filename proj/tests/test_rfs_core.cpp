#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "palmtrack/rfs/discrete.hpp"
#include "palmtrack/rfs/eval.hpp"
#include "test_util.hpp"

using namespace palmtrack;
using test::vec1;

namespace {

using GridBernoulli = Bernoulli<GridDensity>;
using GridPoisson = Poisson<GridDensity>;

std::vector<Eigen::VectorXd> index_points(int n) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) pts.push_back(vec1(i));
  return pts;
}

// All subsets of {0..cells-1} up to max_card, as sorted index vectors.
std::vector<std::vector<int>> all_subsets(int cells, int max_card) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  const std::function<void(int)> rec = [&](int start) {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) >= max_card) return;
    for (int i = start; i < cells; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace

TEST_CASE("eval_bernoulli basics") {
  GmBernoulli b{1, 0.3, test::unit_gaussian_1d()};
  CHECK(eval_bernoulli(b, std::vector<Eigen::VectorXd>{}) == doctest::Approx(0.7));

  GmBernoulli never{2, 0.0, test::unit_gaussian_1d()};
  CHECK(eval_bernoulli(never, std::vector<Eigen::VectorXd>{vec1(0.3)}) == 0.0);

  GmBernoulli half{3, 0.5, test::unit_gaussian_1d()};
  const double expect = 0.5 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(eval_bernoulli(half, std::vector<Eigen::VectorXd>{vec1(0.0)}) ==
        doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.199471).epsilon(1e-5));

  CHECK(eval_bernoulli(half, std::vector<Eigen::VectorXd>{vec1(0.0), vec1(1.0)}) == 0.0);
}

TEST_CASE("eval_mb matches hand enumeration") {
  GmBernoulli b1{1, 0.5, test::unit_gaussian_1d(0.0)};
  GmBernoulli b2{2, 0.5, test::unit_gaussian_1d(2.0)};

  CHECK(eval_mb(std::vector<GmBernoulli>{b1, b2}, std::vector<Eigen::VectorXd>{}) ==
        doctest::Approx(0.25));

  const std::vector<Eigen::VectorXd> x{vec1(0.7)};
  CHECK(eval_mb(std::vector<GmBernoulli>{b1}, x) == doctest::Approx(eval_bernoulli(b1, x)));

  const double expect = 0.5 * b1.spatial.pdf(x[0]) * 0.5 + 0.5 * 0.5 * b2.spatial.pdf(x[0]);
  CHECK(eval_mb(std::vector<GmBernoulli>{b1, b2}, x) == doctest::Approx(expect).epsilon(1e-12));

  // More points than components is impossible.
  CHECK(eval_mb(std::vector<GmBernoulli>{b1},
                std::vector<Eigen::VectorXd>{vec1(0.0), vec1(1.0)}) == 0.0);
}

TEST_CASE("eval_poisson basics") {
  GmPoisson p0{0.0, test::unit_gaussian_1d()};
  CHECK(eval_poisson(p0, std::vector<Eigen::VectorXd>{}) == 1.0);

  GmPoisson p2{2.0, test::unit_gaussian_1d()};
  CHECK(eval_poisson(p2, std::vector<Eigen::VectorXd>{}) == doctest::Approx(std::exp(-2.0)));

  GmPoisson p1{1.0, test::unit_gaussian_1d()};
  const double expect = std::exp(-1.0) / std::sqrt(2.0 * std::numbers::pi);
  CHECK(eval_poisson(p1, std::vector<Eigen::VectorXd>{vec1(0.0)}) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("eval_pmb degenerate and split cases") {
  Rng rng(7);
  GmBernoulli b1{1, 0.6, test::unit_gaussian_1d(-1.0)};
  GmBernoulli b2{2, 0.4, test::unit_gaussian_1d(1.5)};
  const std::vector<GmBernoulli> comps{b1, b2};

  GmPoisson degenerate{0.0, test::unit_gaussian_1d()};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::VectorXd> xs;
    const int n = rng.uniform_int(3);
    for (int i = 0; i < n; ++i) xs.push_back(vec1(rng.uniform(-3.0, 3.0)));
    CHECK(eval_pmb(degenerate, comps, xs) == eval_mb(comps, xs));
  }

  GmPoisson p1{1.0, test::unit_gaussian_1d()};
  const std::vector<Eigen::VectorXd> singleton{vec1(0.4)};
  CHECK(eval_pmb(p1, {}, singleton) == doctest::Approx(eval_poisson(p1, singleton)));

  // One component, one point: split into (point from Poisson) + (point from MB).
  const std::vector<GmBernoulli> one{b1};
  const double by_hand = eval_poisson(p1, singleton) * (1.0 - b1.existence) +
                         std::exp(-1.0) * b1.existence * b1.spatial.pdf(singleton[0]);
  CHECK(eval_pmb(p1, one, singleton) == doctest::Approx(by_hand).epsilon(1e-12));
}

TEST_CASE("phd_pmb closed form and discretized integral") {
  // rate 0, single certain component: PHD equals the spatial density.
  GmPoisson none{0.0, test::unit_gaussian_1d()};
  GmBernoulli certain{1, 1.0, test::unit_gaussian_1d(0.5)};
  CHECK(phd_pmb(none, std::vector<GmBernoulli>{certain}, vec1(0.2)) ==
        doctest::Approx(certain.spatial.pdf(vec1(0.2))));

  // rate 2, no components, uniform spatial density: PHD is twice the density.
  const int cells = 4;
  const double vol = 0.5;
  GridDensity uniform(std::vector<double>(cells, 1.0), vol);
  Poisson<GridDensity> two{2.0, uniform};
  CHECK(phd_pmb(two, std::vector<GridBernoulli>{}, 1) == doctest::Approx(2.0 * uniform.pdf(1)));

  // Mixed case against the set-integral oracle: integrate p(X u {x}) over the
  // cells other than x. Pairwise-disjoint supports keep the subset quadrature
  // free of same-cell coincidences, and a small Poisson rate bounds that
  // part's remaining grid error at O(rate^2).
  Poisson<GridDensity> small{1e-3, GridDensity({1.0, 1.0, 0.0, 0.0, 0.0, 0.0}, vol)};
  std::vector<GridBernoulli> comps{
      GridBernoulli{1, 0.6, GridDensity({0.0, 0.0, 0.0, 0.0, 1.0, 3.0}, vol)},
      GridBernoulli{2, 0.4, GridDensity({0.0, 0.0, 2.0, 1.0, 0.0, 0.0}, vol)}};
  const int x = 5;
  DiscreteSpace rest(index_points(5), vol, 5);  // cells 0..4
  const double oracle = set_integral(rest, [&](const std::vector<int>& subset) {
    std::vector<int> with_x(subset);
    with_x.push_back(x);
    return eval_pmb(small, comps, with_x);
  });
  CHECK(oracle == doctest::Approx(phd_pmb(small, comps, x)).epsilon(1e-6));
}

TEST_CASE("rpd_pmb: Slivnyak, exclusion, and overlap weights") {
  // Pure Poisson: conditioning adds no information; parameters come back
  // bit-identical.
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Poisson<GridDensity> pois{rng.uniform(0.1, 3.0), test::random_grid_density(rng, 4, 0.5)};
    const auto mixture = rpd_pmb(pois, std::vector<GridBernoulli>{}, rng.uniform_int(4));
    REQUIRE(mixture.terms.size() == 1);
    CHECK(mixture.terms[0].weight == 1.0);
    REQUIRE(mixture.terms[0].poisson.has_value());
    CHECK(mixture.terms[0].poisson->rate == pois.rate);
    CHECK(mixture.terms[0].poisson->spatial.values() == pois.spatial.values());
    CHECK(mixture.terms[0].bernoullis.empty());
  }

  // Two components, the second impossible at x: all weight on removing the
  // first, and the remaining set is component 2 alone.
  GridDensity at01({1.0, 1.0, 0.0, 0.0}, 0.5);
  GridDensity at23({0.0, 0.0, 1.0, 1.0}, 0.5);
  GridPoisson no_poisson{0.0, at01};
  GridBernoulli b1{1, 0.7, at01};
  GridBernoulli b2{2, 0.6, at23};
  const auto mixture = rpd_pmb(no_poisson, std::vector<GridBernoulli>{b1, b2}, 0);
  REQUIRE(mixture.terms.size() == 3);
  CHECK(mixture.terms[0].weight == 0.0);  // Poisson origin
  CHECK(mixture.terms[1].weight == doctest::Approx(1.0));
  CHECK(mixture.terms[2].weight == 0.0);
  REQUIRE(mixture.terms[1].bernoullis.size() == 1);
  CHECK(mixture.terms[1].bernoullis[0].mark == 2);

  // Overlapping components plus Poisson: weights proportional to the three
  // PHD contributions, and the defining identity holds pointwise.
  Rng rng2(5);
  Poisson<GridDensity> pois{0.5, test::random_grid_density(rng2, 4, 0.5)};
  GridBernoulli c1 = test::random_grid_bernoulli(rng2, 1, 4, 0.5);
  GridBernoulli c2 = test::random_grid_bernoulli(rng2, 2, 4, 0.5);
  const std::vector<GridBernoulli> comps{c1, c2};
  const int x = 2;
  const auto rpd = rpd_pmb(pois, comps, x);
  const double phd = phd_pmb(pois, comps, x);
  CHECK(rpd.terms[0].weight == doctest::Approx(pois.rate * pois.spatial.pdf(x) / phd));
  CHECK(rpd.terms[1].weight ==
        doctest::Approx(c1.existence * c1.spatial.pdf(x) / phd));
  CHECK(rpd.terms[2].weight ==
        doctest::Approx(c2.existence * c2.spatial.pdf(x) / phd));
  for (const auto& subset : all_subsets(4, 3)) {
    if (std::find(subset.begin(), subset.end(), x) != subset.end()) continue;
    std::vector<int> with_x(subset);
    with_x.push_back(x);
    CHECK(eval_pmb(pois, comps, with_x) ==
          doctest::Approx(eval_rpd(rpd, subset) * phd).epsilon(1e-9));
  }

  CHECK_THROWS_AS(rpd_pmb(no_poisson, std::vector<GridBernoulli>{b1}, 3), ZeroPhdError);
}

TEST_CASE("rpd_ambm weights over hypotheses") {
  Rng rng(9);
  const auto sp1 = test::random_grid_density(rng, 4, 0.5);
  const auto sp2 = test::random_grid_density(rng, 4, 0.5);
  const auto sp3 = test::random_grid_density(rng, 4, 0.5);

  // Single hypothesis with two marks: removing the conditioned mark leaves the
  // other Bernoulli with weight one.
  MbmDensity<GridDensity> single;
  single.hypotheses.push_back({0.0, {{1, 0.8, sp1}, {2, 0.5, sp2}}});
  const auto rpd1 = rpd_ambm(single, 1, 0);
  REQUIRE(rpd1.terms.size() == 1);
  CHECK(rpd1.terms[0].weight == doctest::Approx(1.0));
  REQUIRE(rpd1.terms[0].bernoullis.size() == 1);
  CHECK(rpd1.terms[0].bernoullis[0].mark == 2);
  CHECK(!rpd1.terms[0].poisson.has_value());

  // Mark present in only one of two hypotheses.
  MbmDensity<GridDensity> partial;
  partial.hypotheses.push_back({std::log(0.6), {{1, 0.8, sp1}, {3, 0.4, sp3}}});
  partial.hypotheses.push_back({std::log(0.4), {{1, 0.7, sp2}}});
  const auto rpd2 = rpd_ambm(partial, 3, 1);
  REQUIRE(rpd2.terms.size() == 1);
  CHECK(rpd2.terms[0].weight == doctest::Approx(1.0));
  REQUIRE(rpd2.terms[0].bernoullis.size() == 1);
  CHECK(rpd2.terms[0].bernoullis[0].mark == 1);

  // Mark in both hypotheses: weights w*r*p normalized.
  const auto rpd3 = rpd_ambm(partial, 1, 2);
  REQUIRE(rpd3.terms.size() == 2);
  const double w1 = 0.6 * 0.8 * sp1.pdf(2);
  const double w2 = 0.4 * 0.7 * sp2.pdf(2);
  CHECK(rpd3.terms[0].weight == doctest::Approx(w1 / (w1 + w2)));
  CHECK(rpd3.terms[1].weight == doctest::Approx(w2 / (w1 + w2)));

  CHECK_THROWS_AS(rpd_ambm(partial, 99, 0), UnknownMarkError);
}

TEST_CASE("set integral oracle on reference densities") {
  // Bernoulli with a Gaussian spatial density on a fine 1D grid normalizes.
  GmBernoulli b{1, 0.5, test::unit_gaussian_1d()};
  DiscreteSpace fine = DiscreteSpace::regular_1d(-8.0, 8.0, 400, 2);
  const double bern_total = set_integral(fine, [&](const std::vector<int>& subset) {
    std::vector<Eigen::VectorXd> xs;
    for (int i : subset) xs.push_back(fine.points[i]);
    return eval_bernoulli(b, xs);
  });
  CHECK(bern_total == doctest::Approx(1.0).epsilon(1e-3));

  // Poisson normalization needs the ordered-tuple form; truncation at
  // cardinality 8 is bounded by the Poisson tail.
  GridDensity uniform(std::vector<double>(4, 1.0), 0.5);
  Poisson<GridDensity> pois{1.0, uniform};
  DiscreteSpace coarse(index_points(4), 0.5, 8);
  const double pois_total = set_integral_tuples(coarse, [&](const std::vector<int>& subset) {
    return eval_poisson(pois, subset);
  });
  CHECK(pois_total == doctest::Approx(1.0).epsilon(1e-3));

  // Constant 1 restricted to singletons integrates to the total volume.
  const double volume = set_integral(coarse, [](const std::vector<int>& subset) {
    return subset.size() == 1 ? 1.0 : 0.0;
  });
  CHECK(volume == doctest::Approx(4 * 0.5));
}

TEST_CASE("normalization of grid-supported Bernoulli, MB, and PMB") {
  Rng rng(21);
  const int cells = 4;
  const double vol = 0.5;
  // The tuple quadrature is exact for grid-supported densities; truncation at
  // cardinality 6 leaves only the Poisson tail.
  DiscreteSpace space(index_points(cells), vol, 6);

  const auto b1 = test::random_grid_bernoulli(rng, 1, cells, vol);
  const auto b2 = test::random_grid_bernoulli(rng, 2, cells, vol);
  const std::vector<GridBernoulli> comps{b1, b2};

  const double bern = set_integral_tuples(space, [&](const std::vector<int>& s) {
    return eval_bernoulli(b1, s);
  });
  CHECK(bern == doctest::Approx(1.0).epsilon(1e-12));

  const double mb = set_integral_tuples(space, [&](const std::vector<int>& s) {
    return eval_mb(comps, s);
  });
  CHECK(mb == doctest::Approx(1.0).epsilon(1e-12));

  Poisson<GridDensity> pois{0.8, test::random_grid_density(rng, cells, vol)};
  const double pmb = set_integral_tuples(space, [&](const std::vector<int>& s) {
    return eval_pmb(pois, comps, s);
  });
  CHECK(pmb == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("RPD identity on randomized PMB densities") {
  Rng rng(2024);
  const int cells = 4;
  const double vol = 0.5;
  const auto subsets = all_subsets(cells, 3);

  for (int trial = 0; trial < 100; ++trial) {
    const int n_bern = rng.uniform_int(4);
    std::vector<GridBernoulli> comps;
    for (int i = 0; i < n_bern; ++i)
      comps.push_back(test::random_grid_bernoulli(rng, i + 1, cells, vol));
    Poisson<GridDensity> pois{rng.uniform(0.0, 2.0), test::random_grid_density(rng, cells, vol)};

    const int x = rng.uniform_int(cells);
    if (phd_pmb(pois, comps, x) <= 0.0) continue;
    const auto rpd = rpd_pmb(pois, comps, x);
    const double phd = phd_pmb(pois, comps, x);

    double weight_sum = 0.0;
    for (const auto& t : rpd.terms) {
      CHECK(t.weight >= 0.0);
      weight_sum += t.weight;
    }
    CHECK(weight_sum == doctest::Approx(1.0).epsilon(1e-9));

    for (const auto& subset : subsets) {
      if (std::find(subset.begin(), subset.end(), x) != subset.end()) continue;
      std::vector<int> with_x(subset);
      with_x.push_back(x);
      const double lhs = eval_pmb(pois, comps, with_x);
      const double rhs = eval_rpd(rpd, subset) * phd;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("Campbell-Mecke identity on a grid MB density") {
  Rng rng(77);
  const int cells = 4;
  const double vol = 0.5;
  DiscreteSpace space(index_points(cells), vol, cells);

  const std::vector<GridBernoulli> comps{test::random_grid_bernoulli(rng, 1, cells, vol),
                                         test::random_grid_bernoulli(rng, 2, cells, vol),
                                         test::random_grid_bernoulli(rng, 3, cells, vol)};
  Poisson<GridDensity> none{0.0, test::random_grid_density(rng, cells, vol)};

  // Arbitrary bounded function of a point and the rest of the set.
  const auto f = [](int x, const std::vector<int>& rest) {
    double out = std::sin(x + 1.0) + 0.3;
    for (int o : rest) out *= 1.0 + 0.1 * o;
    return out;
  };

  const double lhs = set_integral(space, [&](const std::vector<int>& xs) {
    double inner = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::vector<int> rest;
      for (std::size_t j = 0; j < xs.size(); ++j)
        if (j != i) rest.push_back(xs[j]);
      inner += f(xs[i], rest);
    }
    return inner * eval_mb(comps, xs);
  });

  double rhs = 0.0;
  for (int x = 0; x < cells; ++x) {
    const double phd = phd_pmb(none, comps, x);
    if (phd <= 0.0) continue;
    const auto rpd = rpd_pmb(none, comps, x);
    // Expectation of f under the reduced Palm density, enumerated over the
    // remaining cells.
    std::vector<Eigen::VectorXd> rest_points;
    std::vector<int> rest_cells;
    for (int c = 0; c < cells; ++c)
      if (c != x) {
        rest_points.push_back(vec1(c));
        rest_cells.push_back(c);
      }
    DiscreteSpace rest(rest_points, vol, cells - 1);
    const double expectation = set_integral(rest, [&](const std::vector<int>& subset) {
      std::vector<int> actual;
      for (int i : subset) actual.push_back(rest_cells[static_cast<std::size_t>(i)]);
      return f(x, actual) * eval_rpd(rpd, actual);
    });
    rhs += expectation * phd * vol;
  }

  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("MB evaluation equals PMB with vanishing rate, exactly") {
  Rng rng(31);
  const int cells = 4;
  const double vol = 0.5;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<GridBernoulli> comps;
    const int n = 1 + rng.uniform_int(3);
    for (int i = 0; i < n; ++i)
      comps.push_back(test::random_grid_bernoulli(rng, i + 1, cells, vol));
    Poisson<GridDensity> zero{0.0, test::random_grid_density(rng, cells, vol)};

    std::vector<int> xs;
    const int k = rng.uniform_int(n + 1);
    for (int i = 0; i < k; ++i) xs.push_back(rng.uniform_int(cells));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    CHECK(eval_mb(comps, xs) == eval_pmb(zero, comps, xs));
  }
}

TEST_CASE("MBM normalization and best-hypothesis tie break") {
  MbmDensity<GridDensity> mbm;
  GridDensity sp({1.0, 1.0, 1.0, 1.0}, 0.5);
  mbm.hypotheses.push_back({std::log(2.0), {{1, 0.5, sp}}});
  mbm.hypotheses.push_back({std::log(6.0), {{2, 0.5, sp}}});
  normalize_log_weights(mbm);
  double total = 0.0;
  for (const auto& h : mbm.hypotheses) total += std::exp(h.log_weight);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::exp(mbm.hypotheses[0].log_weight) == doctest::Approx(0.25));

  CHECK(best_hypothesis_index(mbm) == 1);
  mbm.hypotheses[0].log_weight = mbm.hypotheses[1].log_weight;
  CHECK(best_hypothesis_index(mbm) == 0);

  CHECK(marks_distinct(mbm.hypotheses[0]));
  MbHypothesis<GridDensity> dup{0.0, {{1, 0.5, sp}, {1, 0.3, sp}}};
  CHECK(!marks_distinct(dup));
}
