#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "palmtrack/rfs/components.hpp"

namespace palmtrack {

/// Palm conditioning requested at a point where the PHD vanishes.
struct ZeroPhdError : std::runtime_error {
  ZeroPhdError() : std::runtime_error("reduced Palm density undefined: PHD is zero at the point") {}
};

/// A mark was requested that no hypothesis contains.
struct UnknownMarkError : std::runtime_error {
  explicit UnknownMarkError(int mark)
      : std::runtime_error("mark " + std::to_string(mark) + " not present in any hypothesis") {}
};

// Point sets are std::vector<Point> with pairwise-distinct elements.

template <class Pdf, class Point>
double eval_bernoulli(const Bernoulli<Pdf>& comp, const std::vector<Point>& xs) {
  if (xs.empty()) return 1.0 - comp.existence;
  if (xs.size() == 1) return comp.existence * comp.spatial.pdf(xs.front());
  return 0.0;
}

template <class Pdf, class Point>
double eval_poisson(const Poisson<Pdf>& comp, const std::vector<Point>& xs) {
  double out = std::exp(-comp.rate);
  for (const auto& x : xs) out *= comp.rate * comp.spatial.pdf(x);
  return out;
}

/// Multi-Bernoulli density: sum over injective assignments of points to
/// components, unused components contributing their emptiness probability.
template <class Pdf, class Point>
double eval_mb(const std::vector<Bernoulli<Pdf>>& comps, const std::vector<Point>& xs) {
  const std::size_t n = comps.size();
  if (xs.size() > n) return 0.0;

  std::vector<char> used(n, 0);
  double empties = 1.0;
  for (const auto& c : comps) empties *= 1.0 - c.existence;

  double total = 0.0;
  // Recurse over points; each picks a distinct component. The product of
  // emptiness terms for unused components is folded in at the leaf.
  auto recurse = [&](auto&& self, std::size_t point_idx, double acc) -> void {
    if (point_idx == xs.size()) {
      double rest = 1.0;
      for (std::size_t c = 0; c < n; ++c)
        if (!used[c]) rest *= 1.0 - comps[c].existence;
      total += acc * rest;
      return;
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (used[c]) continue;
      const double term = comps[c].existence * comps[c].spatial.pdf(xs[point_idx]);
      if (term == 0.0) continue;
      used[c] = 1;
      self(self, point_idx + 1, acc * term);
      used[c] = 0;
    }
  };
  (void)empties;
  recurse(recurse, 0, 1.0);
  return total;
}

/// PMB density: convolution over all splits of the point set between the
/// Poisson part and the multi-Bernoulli part.
template <class Pdf, class Point>
double eval_pmb(const Poisson<Pdf>& poisson, const std::vector<Bernoulli<Pdf>>& comps,
                const std::vector<Point>& xs) {
  const std::size_t n = xs.size();
  if (n > 20) throw std::invalid_argument("eval_pmb: point set too large to enumerate splits");
  double total = 0.0;
  for (std::size_t mask = 0; mask < (1ull << n); ++mask) {
    std::vector<Point> to_poisson, to_mb;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ull << i))
        to_poisson.push_back(xs[i]);
      else
        to_mb.push_back(xs[i]);
    }
    total += eval_poisson(poisson, to_poisson) * eval_mb(comps, to_mb);
  }
  return total;
}

template <class Pdf, class Point>
double phd_pmb(const Poisson<Pdf>& poisson, const std::vector<Bernoulli<Pdf>>& comps,
               const Point& x) {
  double out = poisson.rate * poisson.spatial.pdf(x);
  for (const auto& c : comps) out += c.existence * c.spatial.pdf(x);
  return out;
}

/// Reduced Palm density of a PMB at x: a mixture that either keeps the full
/// multi-Bernoulli (the point came from the Poisson part) or removes one
/// Bernoulli component; the Poisson part is retained in every term.
template <class Pdf, class Point>
RpdMixture<Pdf> rpd_pmb(const Poisson<Pdf>& poisson, const std::vector<Bernoulli<Pdf>>& comps,
                        const Point& x) {
  const double phd = phd_pmb(poisson, comps, x);
  if (phd <= 0.0) throw ZeroPhdError();

  RpdMixture<Pdf> out;
  {
    RpdTerm<Pdf> keep;
    keep.weight = poisson.rate * poisson.spatial.pdf(x) / phd;
    keep.poisson = poisson;
    keep.bernoullis = comps;
    out.terms.push_back(std::move(keep));
  }
  for (std::size_t l = 0; l < comps.size(); ++l) {
    RpdTerm<Pdf> term;
    term.weight = comps[l].existence * comps[l].spatial.pdf(x) / phd;
    term.poisson = poisson;
    for (std::size_t m = 0; m < comps.size(); ++m)
      if (m != l) term.bernoullis.push_back(comps[m]);
    out.terms.push_back(std::move(term));
  }
  return out;
}

/// Reduced Palm density of a marked MBM, conditioned on a point with the given
/// mark: a mixture over hypotheses containing the mark, each with the mark's
/// Bernoulli removed.
template <class Pdf, class Point>
RpdMixture<Pdf> rpd_ambm(const MbmDensity<Pdf>& prior, int mark, const Point& x) {
  bool mark_seen = false;
  std::vector<double> raw;
  raw.reserve(prior.hypotheses.size());
  for (const auto& h : prior.hypotheses) {
    const auto* b = h.find_mark(mark);
    if (b == nullptr) {
      raw.push_back(0.0);
      continue;
    }
    mark_seen = true;
    raw.push_back(std::exp(h.log_weight) * b->existence * b->spatial.pdf(x));
  }
  if (!mark_seen) throw UnknownMarkError(mark);

  double total = 0.0;
  for (double w : raw) total += w;
  if (total <= 0.0) throw ZeroPhdError();

  RpdMixture<Pdf> out;
  for (std::size_t i = 0; i < prior.hypotheses.size(); ++i) {
    if (raw[i] == 0.0) continue;
    RpdTerm<Pdf> term;
    term.weight = raw[i] / total;
    for (const auto& b : prior.hypotheses[i].bernoullis)
      if (b.mark != mark) term.bernoullis.push_back(b);
    out.terms.push_back(std::move(term));
  }
  return out;
}

/// Density of a reduced Palm mixture at a point set.
template <class Pdf, class Point>
double eval_rpd(const RpdMixture<Pdf>& mixture, const std::vector<Point>& xs) {
  double out = 0.0;
  for (const auto& t : mixture.terms) {
    if (t.poisson.has_value())
      out += t.weight * eval_pmb(*t.poisson, t.bernoullis, xs);
    else
      out += t.weight * eval_mb(t.bernoullis, xs);
  }
  return out;
}

}  // namespace palmtrack
