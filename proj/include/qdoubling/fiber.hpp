#pragma once

#include <algorithm>
#include <concepts>
#include <map>
#include <utility>
#include <vector>

#include "qdoubling/quotient.hpp"

namespace qdoubling {

/// Superlevel family of a fiber function: thresholds t_1 < ... < t_k are
/// the distinct positive fiber values and levels[i] = {cosets : f >= t_i}.
template <class CosetSet>
struct LevelFamily {
  std::vector<Rational> thresholds;
  std::vector<CosetSet> levels;

  std::size_t size() const noexcept { return thresholds.size(); }
  bool empty() const noexcept { return thresholds.empty(); }
};

/// Operations the theorem checks need from a (G, H, A) setting: product
/// sets in G and G/H, projections, fiber superlevel sets and saturation.
/// Implemented by ExplicitModel (element lists) and by the block model used
/// for the large sharpness instance.
template <class M>
concept QuotientModel = requires(const M& m, const typename M::set_type& a, const typename M::coset_set_type& q,
                                 const Rational& t) {
  { m.measure(a) } -> std::same_as<Rational>;
  { m.empty(a) } -> std::same_as<bool>;
  { m.product(a, a) } -> std::same_as<typename M::set_type>;
  { m.inverse(a) } -> std::same_as<typename M::set_type>;
  { m.equal(a, a) } -> std::same_as<bool>;
  { m.project(a) } -> std::same_as<typename M::coset_set_type>;
  { m.quotient_measure(q) } -> std::same_as<Rational>;
  { m.quotient_product(q, q) } -> std::same_as<typename M::coset_set_type>;
  { m.quotient_includes(q, q) } -> std::same_as<bool>;
  { m.levels(a) } -> std::same_as<LevelFamily<typename M::coset_set_type>>;
  { m.superlevel(a, t) } -> std::same_as<typename M::coset_set_type>;
  { m.saturate(a, q) } -> std::same_as<typename M::set_type>;
};

/// Fiber length function f_A(gH) = w_H * |g^{-1}A cap H| = w_H * |A cap gH|.
template <class G, class QG>
class FiberProfile {
 public:
  using coset_type = typename QG::element_type;

  FiberProfile(const QuotientStructure<G, QG>& q, const Subset<G>& a) : source_(a) {
    if (a.owner() != q.ambient()) throw OwnerMismatch("subset is not in the quotient's ambient group");
    if constexpr (is_finite_group_v<QG>) {
      std::vector<std::size_t> counts(q.quotient()->order(), 0);
      for (auto x : a.elements()) ++counts[q.project(x)];
      for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c]) fibers_.emplace_back(static_cast<coset_type>(c), Rational(BigInt(counts[c])) * q.subgroup_weight());
    } else {
      std::map<coset_type, std::size_t> counts;
      for (const auto& x : a.elements()) ++counts[q.project(x)];
      for (auto& [c, n] : counts) fibers_.emplace_back(c, Rational(BigInt(n)) * q.subgroup_weight());
    }
    quotient_ = q.quotient();
  }

  /// Support cosets with their (positive) fiber values, in coset order.
  const std::vector<std::pair<coset_type, Rational>>& support_fibers() const noexcept { return fibers_; }

  Rational fiber(const coset_type& c) const {
    auto it = std::lower_bound(fibers_.begin(), fibers_.end(), c,
                               [](const auto& p, const coset_type& key) { return p.first < key; });
    return (it != fibers_.end() && it->first == c) ? it->second : Rational(0);
  }

  /// pi A = cosets with positive fiber.
  Subset<QG> support() const { return superlevel(Rational(0), true); }

  /// {cosets : f >= t} (or f > t when strict).
  Subset<QG> superlevel(const Rational& t, bool strict = false) const {
    std::vector<coset_type> out;
    for (const auto& [c, f] : fibers_)
      if (strict ? f > t : f >= t) out.push_back(c);
    return Subset<QG>::from_sorted(quotient_, std::move(out));
  }

  LevelFamily<Subset<QG>> levels() const {
    std::vector<Rational> values;
    for (const auto& p : fibers_) values.push_back(p.second);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    LevelFamily<Subset<QG>> family;
    for (const auto& t : values) {
      family.thresholds.push_back(t);
      family.levels.push_back(superlevel(t));
    }
    return family;
  }

  const Subset<G>& source() const noexcept { return source_; }
  const std::shared_ptr<const QG>& quotient() const noexcept { return quotient_; }

 private:
  Subset<G> source_;
  std::shared_ptr<const QG> quotient_;
  std::vector<std::pair<coset_type, Rational>> fibers_;
};

template <class G, class QG>
FiberProfile<G, QG> fiber_profile(const Subset<G>& a, const QuotientStructure<G, QG>& q) {
  return FiberProfile<G, QG>(q, a);
}

/// Direct evaluation of mu_H(g^{-1}A cap H) from a chosen representative g.
/// Used to check representative independence of fiber_profile.
template <class G, class QG>
Rational fiber_at_representative(const Subset<G>& a, const QuotientStructure<G, QG>& q,
                                 const typename G::element_type& g) {
  const auto shifted = translate_left(a.owner()->inverse(g), a);
  std::size_t count = 0;
  for (const auto& x : shifted.elements())
    if (q.subgroup().contains(x)) ++count;
  return Rational(BigInt(count)) * q.subgroup_weight();
}

/// QuotientModel over explicit element lists.
template <class G, class QG>
class ExplicitModel {
 public:
  using set_type = Subset<G>;
  using coset_set_type = Subset<QG>;

  explicit ExplicitModel(QuotientStructure<G, QG> q) : q_(std::move(q)) {}

  const QuotientStructure<G, QG>& structure() const noexcept { return q_; }

  Rational measure(const set_type& a) const { return a.measure(); }
  bool empty(const set_type& a) const { return a.empty(); }
  set_type product(const set_type& a, const set_type& b) const { return mul_set(a, b); }
  set_type inverse(const set_type& a) const { return inv_set(a); }
  bool equal(const set_type& a, const set_type& b) const { return a == b; }
  coset_set_type project(const set_type& a) const { return q_.project(a); }
  Rational quotient_measure(const coset_set_type& c) const { return c.measure(); }
  coset_set_type quotient_product(const coset_set_type& a, const coset_set_type& b) const { return mul_set(a, b); }
  bool quotient_includes(const coset_set_type& big, const coset_set_type& small) const { return big.includes(small); }
  LevelFamily<coset_set_type> levels(const set_type& a) const { return fiber_profile(a, q_).levels(); }
  coset_set_type superlevel(const set_type& a, const Rational& t) const { return fiber_profile(a, q_).superlevel(t); }

  /// pi^{-1}(cosets) cap A.
  set_type saturate(const set_type& a, const coset_set_type& cosets) const {
    std::vector<typename G::element_type> out;
    for (const auto& x : a.elements())
      if (cosets.contains(q_.project(x))) out.push_back(x);
    return set_type::from_sorted(a.owner(), std::move(out));
  }

 private:
  QuotientStructure<G, QG> q_;
};

template <class G, class QG>
ExplicitModel<G, QG> make_model(QuotientStructure<G, QG> q) {
  return ExplicitModel<G, QG>(std::move(q));
}

struct LayerCake {
  Rational lhs;  // mu_G(A)
  Rational rhs;  // sum_i (t_i - t_{i-1}) mu_Q(level_i)
};

/// Finite telescoping sum of mu_Q over the superlevel family.
template <class CosetSet, class Measure>
Rational level_integral(const LevelFamily<CosetSet>& family, Measure&& measure_of_level) {
  Rational total = 0, previous = 0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    total += (family.thresholds[i] - previous) * measure_of_level(i);
    previous = family.thresholds[i];
  }
  return total;
}

/// mu_G(A) = integral over t of mu_Q(pi A_t); throws InternalConsistencyError
/// if the exact identity fails.
template <QuotientModel M>
LayerCake layer_cake(const M& model, const typename M::set_type& a) {
  const auto family = model.levels(a);
  LayerCake out{model.measure(a),
                level_integral(family, [&](std::size_t i) { return model.quotient_measure(family.levels[i]); })};
  if (out.lhs != out.rhs)
    throw InternalConsistencyError("layer-cake identity failed: " + to_pq(out.lhs) + " != " + to_pq(out.rhs));
  return out;
}

/// Both forms of the spillover inequality with unmodified superlevel sets of
/// B (every subset of a finite group is compact, so the sigma-compact
/// modification is the identity):
///   mu_G(AB) >= sum dt * mu_Q(piA . piB_t)
///   mu_G(BA) >= sum dt * mu_Q(piB_t . piA)
struct Spillover {
  Rational lhs_left;   // mu_G(AB)
  Rational rhs_left;
  Rational lhs_right;  // mu_G(BA)
  Rational rhs_right;

  bool holds() const { return lhs_left >= rhs_left && lhs_right >= rhs_right; }
};

template <QuotientModel M>
Spillover spillover_check(const M& model, const typename M::set_type& a, const typename M::set_type& b) {
  const auto pa = model.project(a);
  const auto family = model.levels(b);
  Spillover out;
  out.lhs_left = model.measure(model.product(a, b));
  out.lhs_right = model.measure(model.product(b, a));
  out.rhs_left = level_integral(family, [&](std::size_t i) {
    return model.quotient_measure(model.quotient_product(pa, family.levels[i]));
  });
  out.rhs_right = level_integral(family, [&](std::size_t i) {
    return model.quotient_measure(model.quotient_product(family.levels[i], pa));
  });
  return out;
}

/// The containments behind the spillover inequality, at every realized
/// threshold t of B: piA . piB_t within pi(AB)_t and piB_t . piA within pi(BA)_t.
template <QuotientModel M>
bool containment_check(const M& model, const typename M::set_type& a, const typename M::set_type& b) {
  const auto pa = model.project(a);
  const auto family = model.levels(b);
  const auto ab = model.product(a, b);
  const auto ba = model.product(b, a);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& t = family.thresholds[i];
    if (!model.quotient_includes(model.superlevel(ab, t), model.quotient_product(pa, family.levels[i]))) return false;
    if (!model.quotient_includes(model.superlevel(ba, t), model.quotient_product(family.levels[i], pa))) return false;
  }
  return true;
}

}  // namespace qdoubling
