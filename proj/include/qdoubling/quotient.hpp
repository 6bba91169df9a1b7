#pragma once

#include <algorithm>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "qdoubling/subset.hpp"

namespace qdoubling {

enum class SubgroupWeight { counting, normalized };

/// G -> G/H with Fubini-compatible weights: quotient_weight * subgroup_weight
/// equals the ambient weight exactly.
template <WeightedGroup G, WeightedGroup QG>
class QuotientStructure {
 public:
  using element_type = typename G::element_type;
  using coset_type = typename QG::element_type;

  const std::shared_ptr<const G>& ambient() const noexcept { return ambient_; }
  const Subset<G>& subgroup() const noexcept { return subgroup_; }
  const std::shared_ptr<const QG>& quotient() const noexcept { return quotient_; }
  const Rational& subgroup_weight() const noexcept { return subgroup_weight_; }
  const Rational& quotient_weight() const noexcept { return quotient_->weight(); }
  /// Indices of the factors kept by a projection quotient (empty otherwise).
  const std::vector<std::size_t>& kept_factors() const noexcept { return keep_; }

  coset_type project(const element_type& x) const {
    if constexpr (is_finite_group_v<G>) {
      return projection_[x];
    } else {
      coset_type out;
      out.reserve(keep_.size());
      for (auto i : keep_) out.push_back(x[i]);
      return out;
    }
  }

  Subset<QG> project(const Subset<G>& a) const {
    if (a.owner() != ambient_) throw OwnerMismatch("subset is not in the quotient's ambient group");
    std::vector<coset_type> items;
    items.reserve(a.size());
    for (const auto& x : a.elements()) items.push_back(project(x));
    return detail::collect(quotient_, std::move(items));
  }

  /// Finite ambient groups: the full preimage of a set of cosets.
  Subset<G> preimage(const Subset<QG>& cosets) const requires is_finite_group_v<G> {
    std::vector<element_type> out;
    for (std::size_t x = 0; x < ambient_->order(); ++x)
      if (cosets.contains(projection_[x])) out.push_back(static_cast<element_type>(x));
    return Subset<G>::from_sorted(ambient_, std::move(out));
  }

  // Construction helpers; use quotient() / projection_quotient() instead.
  QuotientStructure(std::shared_ptr<const G> ambient, Subset<G> subgroup, std::shared_ptr<const QG> quotient,
                    Rational subgroup_weight, std::vector<typename QG::element_type> projection,
                    std::vector<std::size_t> keep)
      : ambient_(std::move(ambient)), subgroup_(std::move(subgroup)), quotient_(std::move(quotient)),
        subgroup_weight_(std::move(subgroup_weight)), projection_(std::move(projection)), keep_(std::move(keep)) {
    if (quotient_->weight() * subgroup_weight_ != ambient_->weight())
      throw InternalConsistencyError("Fubini convention violated: w_Q * w_H != w_G");
  }

 private:
  std::shared_ptr<const G> ambient_;
  Subset<G> subgroup_;
  std::shared_ptr<const QG> quotient_;
  Rational subgroup_weight_;
  std::vector<typename QG::element_type> projection_;
  std::vector<std::size_t> keep_;
};

using FiniteQuotient = QuotientStructure<FiniteGroup, FiniteGroup>;
using LazyQuotient = QuotientStructure<LazyGroup, LazyGroup>;

/// Subgroup generated by `generators` (finite groups).
inline Subset<FiniteGroup> generated_subgroup(const std::shared_ptr<const FiniteGroup>& g,
                                              const std::vector<FiniteGroup::element_type>& generators) {
  std::vector<char> in(g->order(), 0);
  std::vector<FiniteGroup::element_type> members{g->identity()};
  in[g->identity()] = 1;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (auto s : generators) {
      const auto y = g->op(members[i], s);
      if (!in[y]) {
        in[y] = 1;
        members.push_back(y);
      }
    }
  }
  std::sort(members.begin(), members.end());
  return Subset<FiniteGroup>::from_sorted(g, std::move(members));
}

inline bool is_subgroup(const Subset<FiniteGroup>& h) {
  const auto& g = *h.owner();
  if (!h.contains(g.identity())) return false;
  for (auto x : h.elements()) {
    if (!h.contains(g.inverse(x))) return false;
    for (auto y : h.elements())
      if (!h.contains(g.op(x, y))) return false;
  }
  return true;
}

inline bool is_normal(const Subset<FiniteGroup>& h) {
  const auto& g = *h.owner();
  for (std::size_t x = 0; x < g.order(); ++x) {
    const auto xi = g.inverse(static_cast<FiniteGroup::element_type>(x));
    for (auto y : h.elements())
      if (!h.contains(g.op(g.op(static_cast<FiniteGroup::element_type>(x), y), xi))) return false;
  }
  return true;
}

/// Every normal subgroup of a finite group, ordered by (order, elements).
/// Normal subgroups are exactly the joins of normal closures of single
/// elements, so the search closes that generating family under joins.
inline std::vector<Subset<FiniteGroup>> normal_subgroups(const std::shared_ptr<const FiniteGroup>& g,
                                                         std::size_t cap = 64) {
  if (g->order() > cap)
    throw CapExceeded("normal subgroup enumeration: |G| = " + std::to_string(g->order()) + " exceeds cap " +
                      std::to_string(cap));
  using E = FiniteGroup::element_type;
  const std::size_t n = g->order();
  std::vector<Subset<FiniteGroup>> closures;
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<E> conj_class;
    for (std::size_t y = 0; y < n; ++y) {
      const auto ye = static_cast<E>(y);
      conj_class.push_back(g->op(g->op(ye, static_cast<E>(x)), g->inverse(ye)));
    }
    auto nc = generated_subgroup(g, conj_class);
    if (std::find(closures.begin(), closures.end(), nc) == closures.end()) closures.push_back(std::move(nc));
  }
  std::vector<Subset<FiniteGroup>> found{generated_subgroup(g, {})};
  std::deque<std::size_t> work{0};
  while (!work.empty()) {
    const Subset<FiniteGroup> current = found[work.front()];
    work.pop_front();
    for (const auto& c : closures) {
      if (current.includes(c)) continue;
      auto gens = set_union(current, c).elements();
      auto joined = generated_subgroup(g, gens);
      if (std::find(found.begin(), found.end(), joined) == found.end()) {
        found.push_back(std::move(joined));
        work.push_back(found.size() - 1);
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.elements() < b.elements();
  });
  return found;
}

/// G/H for a normal subgroup H of a finite group. Cosets are numbered by
/// their smallest element, so the result does not depend on representatives.
inline FiniteQuotient quotient(const std::shared_ptr<const FiniteGroup>& g, const Subset<FiniteGroup>& h,
                               SubgroupWeight mode = SubgroupWeight::counting) {
  using E = FiniteGroup::element_type;
  if (h.owner() != g) throw OwnerMismatch("subgroup is not a subset of the given group");
  if (!is_subgroup(h)) throw InvalidArgument("H is not a subgroup");
  if (!is_normal(h)) throw InvalidArgument("H is not normal");
  const std::size_t n = g->order();
  constexpr E unassigned = ~E{0};
  std::vector<E> projection(n, unassigned);
  std::vector<E> reps;
  for (std::size_t x = 0; x < n; ++x) {
    if (projection[x] != unassigned) continue;
    const auto id = static_cast<E>(reps.size());
    reps.push_back(static_cast<E>(x));
    for (auto y : h.elements()) projection[g->op(static_cast<E>(x), y)] = id;
  }
  const std::size_t q = reps.size();
  std::vector<E> table(q * q);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) table[i * q + j] = projection[g->op(reps[i], reps[j])];
  const Rational wh = mode == SubgroupWeight::counting ? Rational(1) : Rational(BigInt(1), BigInt(h.size()));
  auto qg = FiniteGroup::trusted_table(std::move(table), q, g->weight() / wh, g->name() + "/N" + std::to_string(h.size()));
  return FiniteQuotient(g, h, std::move(qg), wh, std::move(projection), {});
}

namespace detail {

inline void check_keep(std::size_t arity, const std::vector<std::size_t>& keep) {
  if (keep.empty()) throw InvalidArgument("projection quotient must keep at least one factor");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= arity) throw InvalidArgument("kept factor index out of range");
    if (i > 0 && keep[i] <= keep[i - 1]) throw InvalidArgument("kept factor indices must be strictly increasing");
  }
}

}  // namespace detail

/// Projection of a finite product group onto the kept factors; the kernel is
/// the product of the dropped ones.
inline FiniteQuotient projection_quotient(const std::shared_ptr<const FiniteGroup>& g, std::vector<std::size_t> keep) {
  using E = FiniteGroup::element_type;
  if (g->kind() != GroupKind::product) throw InvalidArgument("projection quotient requires a product group");
  const auto& factors = g->factors();
  detail::check_keep(factors.size(), keep);
  std::vector<std::shared_ptr<const FiniteGroup>> kept;
  Rational wh = 1;
  for (std::size_t i = 0, k = 0; i < factors.size(); ++i) {
    if (k < keep.size() && keep[k] == i) {
      kept.push_back(factors[i]);
      ++k;
    } else {
      wh *= factors[i]->weight();
    }
  }
  auto qg = FiniteGroup::product(kept);
  std::vector<E> projection(g->order());
  std::vector<E> kernel;
  for (std::size_t x = 0; x < g->order(); ++x) {
    const auto coords = g->coordinates(static_cast<E>(x));
    std::vector<E> sub;
    bool in_kernel = true;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      sub.push_back(coords[keep[k]]);
      in_kernel = in_kernel && coords[keep[k]] == factors[keep[k]]->identity();
    }
    projection[x] = qg->from_coordinates(sub);
    if (in_kernel) kernel.push_back(static_cast<E>(x));
  }
  return FiniteQuotient(g, Subset<FiniteGroup>::from_sorted(g, std::move(kernel)), std::move(qg), wh,
                        std::move(projection), std::move(keep));
}

/// Projection of a lazy product onto the kept factors. Dropped factors must
/// be finite so the kernel is enumerable.
inline LazyQuotient projection_quotient(const std::shared_ptr<const LazyGroup>& g, std::vector<std::size_t> keep) {
  const auto& factors = g->factors();
  detail::check_keep(factors.size(), keep);
  std::vector<LazyGroup::Factor> kept;
  Rational wh = 1;
  std::vector<std::size_t> dropped;
  for (std::size_t i = 0, k = 0; i < factors.size(); ++i) {
    if (k < keep.size() && keep[k] == i) {
      kept.push_back(factors[i]);
      ++k;
    } else {
      if (g->is_matrix_factor(i)) throw InvalidArgument("dropped factors of a lazy quotient must be finite");
      wh *= g->finite_factor(i).weight();
      dropped.push_back(i);
    }
  }
  // kernel = dropped factors x identity elsewhere
  std::vector<LazyElement> kernel{g->identity()};
  for (auto i : dropped) {
    std::vector<LazyElement> next;
    for (const auto& e : kernel)
      for (std::size_t v = 0; v < g->finite_factor(i).order(); ++v) {
        auto x = e;
        x[i] = static_cast<std::uint32_t>(v);
        next.push_back(std::move(x));
      }
    kernel = std::move(next);
  }
  auto qg = LazyGroup::make(std::move(kept));
  return LazyQuotient(g, Subset<LazyGroup>(g, std::move(kernel)), std::move(qg), wh, {}, std::move(keep));
}

}  // namespace qdoubling
