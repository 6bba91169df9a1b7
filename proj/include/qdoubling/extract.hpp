#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdoubling/doubling.hpp"

namespace qdoubling {

/// One threshold of the superlevel family with both sides of the defining
/// inequality of the admissible set S.
struct ThresholdTrace {
  Rational threshold;
  Rational level_measure;          // mu_Q(piA_s)
  Rational level_square_measure;   // mu_Q(piA_s piA_s)
  Rational bound;                  // alpha K mu_Q(piA_s)
  bool admissible = false;
};

template <class Set>
struct ExtractionCertificate {
  Rational alpha;
  Rational K;
  Rational chosen_s;
  Set B;
  Rational measure_ratio;      // mu(B)/mu(A)
  Rational quotient_doubling;  // mu_Q(piB^2)/mu_Q(piB)
  std::vector<Rational> admissible_set;
  std::vector<ThresholdTrace> trace;

  bool measure_bound_holds() const { return measure_ratio > (alpha - 1) / alpha; }
  bool doubling_bound_holds() const { return quotient_doubling < alpha * K; }
};

namespace detail {

inline void check_alpha(const Rational& alpha) {
  if (alpha <= 1) throw InvalidArgument("alpha must exceed 1, got " + to_pq(alpha));
}

template <QuotientModel M>
std::vector<ThresholdTrace> threshold_trace(const M& model, const LevelFamily<typename M::coset_set_type>& family,
                                            const Rational& alpha, const Rational& K) {
  std::vector<ThresholdTrace> out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    ThresholdTrace t;
    t.threshold = family.thresholds[i];
    t.level_measure = model.quotient_measure(family.levels[i]);
    t.level_square_measure = model.quotient_measure(model.quotient_product(family.levels[i], family.levels[i]));
    t.bound = alpha * K * t.level_measure;
    t.admissible = t.level_measure != 0 && t.level_square_measure < t.bound;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace detail

/// Realized thresholds s with mu_Q(piA_s) != 0 and
/// mu_Q(piA_s piA_s) < alpha K mu_Q(piA_s), K = mu(A^2)/mu(A).
/// Between consecutive realized fiber values piA_s is constant, so these
/// thresholds represent the whole admissible set.
template <QuotientModel M>
std::vector<Rational> admissible_thresholds(const M& model, const typename M::set_type& a, const Rational& alpha) {
  detail::check_alpha(alpha);
  if (model.empty(a)) throw InvalidArgument("admissible thresholds need a nonempty set");
  const Rational K = model.measure(model.product(a, a)) / model.measure(a);
  std::vector<Rational> out;
  for (auto& t : detail::threshold_trace(model, model.levels(a), alpha, K))
    if (t.admissible) out.push_back(t.threshold);
  return out;
}

/// B = pi^{-1}(piA_s) cap A for the smallest admissible s meeting
/// mu(B) > (alpha-1)/alpha mu(A). With finitely many positive thresholds
/// the inf S = 0 and inf S > 0 cases of the existence argument coincide,
/// and the smallest admissible s already meets the measure bound; the scan
/// over larger s is kept for safety. No admissible s satisfying both bounds
/// means the existence argument was contradicted: InternalConsistencyError.
template <QuotientModel M>
ExtractionCertificate<typename M::set_type> extract_subset(const M& model, const typename M::set_type& a,
                                                           const Rational& alpha) {
  detail::check_alpha(alpha);
  if (model.empty(a)) throw InvalidArgument("extraction needs a nonempty set");
  const Rational mu_a = model.measure(a);
  const Rational K = model.measure(model.product(a, a)) / mu_a;
  const auto family = model.levels(a);
  auto trace = detail::threshold_trace(model, family, alpha, K);

  std::vector<Rational> admissible;
  for (const auto& t : trace)
    if (t.admissible) admissible.push_back(t.threshold);

  const Rational keep_fraction = (alpha - 1) / alpha;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (!trace[i].admissible) continue;
    auto b = model.saturate(a, family.levels[i]);
    const Rational ratio = model.measure(b) / mu_a;
    if (ratio <= keep_fraction) continue;
    const auto pb = model.project(b);
    const Rational qd = model.quotient_measure(model.quotient_product(pb, pb)) / model.quotient_measure(pb);
    ExtractionCertificate<typename M::set_type> cert{alpha, K, family.thresholds[i], std::move(b), ratio, qd,
                                                     std::move(admissible), std::move(trace)};
    if (!cert.doubling_bound_holds())
      throw InternalConsistencyError("saturated level does not inherit its admissible quotient doubling");
    return cert;
  }
  throw InternalConsistencyError("no admissible threshold retains more than " + to_pq(keep_fraction) +
                                 " of mu(A) (alpha = " + to_pq(alpha) + ")");
}

}  // namespace qdoubling
