#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "palmtrack/rfs/gaussian.hpp"

namespace palmtrack {

/// Bernoulli set component: empty with probability 1 - existence, otherwise a
/// single marked point drawn from the spatial density.
template <class Pdf>
struct Bernoulli {
  int mark = 0;
  double existence = 0.0;
  Pdf spatial;
};

template <class Pdf>
struct Poisson {
  double rate = 0.0;
  Pdf spatial;
};

/// One global association hypothesis: a multi-Bernoulli with pairwise-distinct
/// marks and a log-domain mixture weight.
template <class Pdf>
struct MbHypothesis {
  double log_weight = 0.0;
  std::vector<Bernoulli<Pdf>> bernoullis;

  bool has_mark(int mark) const {
    return std::any_of(bernoullis.begin(), bernoullis.end(),
                       [&](const auto& b) { return b.mark == mark; });
  }

  const Bernoulli<Pdf>* find_mark(int mark) const {
    for (const auto& b : bernoullis)
      if (b.mark == mark) return &b;
    return nullptr;
  }
};

template <class Pdf>
struct MbmDensity {
  std::vector<MbHypothesis<Pdf>> hypotheses;
};

/// Weighted term of a reduced Palm mixture. The Poisson part is present only
/// when the conditioned density had one.
template <class Pdf>
struct RpdTerm {
  double weight = 0.0;
  std::optional<Poisson<Pdf>> poisson;
  std::vector<Bernoulli<Pdf>> bernoullis;
};

template <class Pdf>
struct RpdMixture {
  std::vector<RpdTerm<Pdf>> terms;
};

using GmBernoulli = Bernoulli<GaussianMixture>;
using GmPoisson = Poisson<GaussianMixture>;
using GmHypothesis = MbHypothesis<GaussianMixture>;
using GmMbm = MbmDensity<GaussianMixture>;
using GmRpdMixture = RpdMixture<GaussianMixture>;

/// Monotone mark source; marks are never reused within a run.
class MarkAllocator {
 public:
  int fresh() { return next_++; }

 private:
  int next_ = 1;
};

template <class Pdf>
bool marks_distinct(const MbHypothesis<Pdf>& hyp) {
  std::set<int> seen;
  for (const auto& b : hyp.bernoullis)
    if (!seen.insert(b.mark).second) return false;
  return true;
}

/// All marks appearing in any hypothesis, ascending.
template <class Pdf>
std::vector<int> all_marks(const MbmDensity<Pdf>& mbm) {
  std::set<int> marks;
  for (const auto& h : mbm.hypotheses)
    for (const auto& b : h.bernoullis) marks.insert(b.mark);
  return {marks.begin(), marks.end()};
}

inline double log_sum_exp(const std::vector<double>& vals) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : vals) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : vals) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

/// Rescales hypothesis log-weights so their exponentials sum to one.
template <class Pdf>
void normalize_log_weights(MbmDensity<Pdf>& mbm) {
  if (mbm.hypotheses.empty()) throw std::invalid_argument("MbmDensity: no hypotheses");
  std::vector<double> lw;
  lw.reserve(mbm.hypotheses.size());
  for (const auto& h : mbm.hypotheses) lw.push_back(h.log_weight);
  const double norm = log_sum_exp(lw);
  if (!std::isfinite(norm)) throw std::runtime_error("MbmDensity: all hypothesis weights vanished");
  for (auto& h : mbm.hypotheses) h.log_weight -= norm;
}

/// Highest-weight hypothesis; ties resolve to the lowest index.
template <class Pdf>
std::size_t best_hypothesis_index(const MbmDensity<Pdf>& mbm) {
  if (mbm.hypotheses.empty()) throw std::invalid_argument("MbmDensity: no hypotheses");
  std::size_t best = 0;
  for (std::size_t i = 1; i < mbm.hypotheses.size(); ++i)
    if (mbm.hypotheses[i].log_weight > mbm.hypotheses[best].log_weight) best = i;
  return best;
}

}  // namespace palmtrack
