#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "palmtrack/geometry/visibility.hpp"
#include "palmtrack/rfs/components.hpp"

namespace palmtrack {

enum class Strategy { kConstant, kEso, kPro };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);  // throws std::invalid_argument

/// Detection probability assigned to each mark by a strategy.
struct PodAssignment {
  std::map<int, double> per_mark;
  Strategy strategy = Strategy::kConstant;
};

struct EpdConfig {
  double r_discard = 1e-3;       // drop occluders below this existence
  double r_certain = 0.999;      // treat occluders above this as surely present
  int mc_samples = 1000;         // Monte-Carlo samples per integral
  double independence_eps = 0.01;
  int max_uncertain = 12;        // cap on the subset enumeration
};

struct MarkNotInHypothesisError : std::runtime_error {
  explicit MarkNotInHypothesisError(int mark)
      : std::runtime_error("mark " + std::to_string(mark) + " not in the hypothesis") {}
};

struct CombinationBlowupError : std::runtime_error {
  explicit CombinationBlowupError(int n)
      : std::runtime_error("too many uncertain occluders to enumerate: " + std::to_string(n)) {}
};

struct NeverExistingError : std::runtime_error {
  explicit NeverExistingError(int mark)
      : std::runtime_error("mark " + std::to_string(mark) +
                           " has zero existence mass across hypotheses") {}
};

/// Probability that, among the hypothesis' marks other than `mark`, exactly
/// those in A exist. A must be a subset of the other marks.
template <class Pdf>
double omega(const std::vector<int>& A, const MbHypothesis<Pdf>& hyp, int mark) {
  if (!hyp.has_mark(mark)) throw MarkNotInHypothesisError(mark);
  double out = 1.0;
  for (const auto& b : hyp.bernoullis) {
    if (b.mark == mark) continue;
    const bool in_A = std::find(A.begin(), A.end(), b.mark) != A.end();
    out *= in_A ? b.existence : 1.0 - b.existence;
  }
  // Validate A against the hypothesis support.
  for (int a : A) {
    if (a == mark || !hyp.has_mark(a)) throw MarkNotInHypothesisError(a);
  }
  return out;
}

/// All occluder sets certain + (subset of uncertain), ordered by size then by
/// the order of `uncertain`.
std::vector<std::vector<int>> enumerate_combinations(const std::vector<int>& certain,
                                                     const std::vector<int>& uncertain,
                                                     int max_uncertain = 12);

/// Outcome of reducing a hypothesis' occluder set for one subject mark.
struct Simplification {
  std::vector<int> certain;
  std::vector<int> uncertain;
  std::vector<int> discarded_low_existence;
  std::vector<int> discarded_independent;
};

struct EpdDiagnosticsRow {
  int mark = 0;
  double value = 0.0;
  int hypotheses = 0;  // hypotheses contributing existence mass for the mark
  int occluders = 0;   // surviving occluders in the best contributing hypothesis
};

/// Expected-probability-of-detection engine for Gaussian-mixture MBM priors.
/// All randomness derives from (seed, spatial content), so results are
/// reproducible and independent of evaluation order; per-hypothesis values are
/// memoized on the surviving occluder configuration.
class EpdComputer {
 public:
  EpdComputer(const CameraModel& cam, const OcclusionConfig& occ, const PodCurve& curve,
              const EpdConfig& cfg, std::uint64_t seed);

  Simplification simplify(int mark, const GmHypothesis& hyp) const;

  /// Expected detection probability of `mark` under hypothesis `hyp`; zero if
  /// the hypothesis does not contain the mark. With simplify=false the full
  /// occluder set is enumerated with exact existence probabilities.
  double epd_hypothesis(int mark, const GmHypothesis& hyp, bool simplify = true) const;

  /// Existence-weighted mixture of per-hypothesis values over the prior.
  double epd_per_mark(const GmMbm& prior, int mark) const;

  PodAssignment pro(const GmMbm& prior) const;
  PodAssignment eso(const GmMbm& prior, double exist_threshold) const;
  PodAssignment constant(const GmMbm& prior, double pd) const;

  /// Per-mark diagnostics from the most recent pro() call.
  const std::vector<EpdDiagnosticsRow>& last_diagnostics() const { return diagnostics_; }

 private:
  struct Occluder {
    int mark = 0;
    double existence = 0.0;  // 1.0 once promoted to certain
    bool certain = false;
    const GaussianMixture* spatial = nullptr;
  };

  double integrate(const GaussianMixture& subject, const std::vector<Occluder>& occluders) const;
  /// Monte-Carlo estimates of the expected detection probability for every
  /// occluder subset (indexed by bitmask over the occluder list), shared
  /// across hypotheses with the same spatial densities.
  const std::vector<double>& subset_table(const GaussianMixture& subject,
                                          const std::vector<Occluder>& occluders,
                                          std::uint64_t spatial_key) const;
  bool independent_cached(const GaussianMixture& subject, const GaussianMixture& occluder) const;

  CameraModel cam_;
  OcclusionConfig occ_;
  PodCurve curve_;
  EpdConfig cfg_;
  std::uint64_t seed_;

  mutable std::unordered_map<std::uint64_t, double> epd_cache_;
  mutable std::unordered_map<std::uint64_t, std::vector<double>> mc_cache_;
  mutable std::unordered_map<std::uint64_t, bool> independence_cache_;
  mutable std::vector<EpdDiagnosticsRow> diagnostics_;
};

}  // namespace palmtrack
