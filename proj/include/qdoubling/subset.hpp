#pragma once

#include <algorithm>
#include <concepts>
#include <memory>
#include <type_traits>
#include <vector>

#include "qdoubling/errors.hpp"
#include "qdoubling/finite_group.hpp"
#include "qdoubling/lazy_group.hpp"
#include "qdoubling/rational.hpp"

namespace qdoubling {

template <class G>
concept WeightedGroup = requires(const G& g, const typename G::element_type& x) {
  { g.op(x, x) } -> std::same_as<typename G::element_type>;
  { g.inverse(x) } -> std::same_as<typename G::element_type>;
  { g.identity() } -> std::convertible_to<typename G::element_type>;
  { g.valid(x) } -> std::convertible_to<bool>;
  { g.weight() } -> std::convertible_to<Rational>;
};

template <class G>
inline constexpr bool is_finite_group_v = std::is_same_v<G, FiniteGroup>;

/// Finite set of elements of a weighted group, kept sorted and distinct.
/// measure() = |elements| * weight, exactly.
template <WeightedGroup G>
class Subset {
 public:
  using element_type = typename G::element_type;

  explicit Subset(std::shared_ptr<const G> owner) : owner_(std::move(owner)) {}

  Subset(std::shared_ptr<const G> owner, std::vector<element_type> elements)
      : owner_(std::move(owner)), elements_(std::move(elements)) {
    std::sort(elements_.begin(), elements_.end());
    elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
    for (const auto& x : elements_)
      if (!owner_->valid(x)) throw InvalidArgument("subset element is not valid in its group");
  }

  /// Whole group; finite groups only.
  static Subset full(std::shared_ptr<const G> owner) requires is_finite_group_v<G> {
    std::vector<element_type> all(owner->order());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<element_type>(i);
    return from_sorted(std::move(owner), std::move(all));
  }

  /// Skips sorting and validation; caller guarantees both.
  static Subset from_sorted(std::shared_ptr<const G> owner, std::vector<element_type> sorted) {
    Subset s(std::move(owner));
    s.elements_ = std::move(sorted);
    return s;
  }

  const std::shared_ptr<const G>& owner() const noexcept { return owner_; }
  const std::vector<element_type>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  bool empty() const noexcept { return elements_.empty(); }
  Rational measure() const { return Rational(BigInt(elements_.size())) * owner_->weight(); }

  bool contains(const element_type& x) const {
    return std::binary_search(elements_.begin(), elements_.end(), x);
  }

  bool includes(const Subset& other) const {
    return std::includes(elements_.begin(), elements_.end(), other.elements_.begin(), other.elements_.end());
  }

  friend bool operator==(const Subset& a, const Subset& b) {
    return a.owner_ == b.owner_ && a.elements_ == b.elements_;
  }

 private:
  std::shared_ptr<const G> owner_;
  std::vector<element_type> elements_;
};

template <class G>
void require_same_owner(const Subset<G>& a, const Subset<G>& b) {
  if (a.owner() != b.owner()) throw OwnerMismatch("subsets belong to different groups");
}

namespace detail {

template <class G>
Subset<G> collect(const std::shared_ptr<const G>& owner, std::vector<typename G::element_type> items) {
  if constexpr (is_finite_group_v<G>) {
    std::vector<char> mark(owner->order(), 0);
    for (auto x : items) mark[x] = 1;
    std::vector<typename G::element_type> out;
    for (std::size_t i = 0; i < mark.size(); ++i)
      if (mark[i]) out.push_back(static_cast<typename G::element_type>(i));
    return Subset<G>::from_sorted(owner, std::move(out));
  } else {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return Subset<G>::from_sorted(owner, std::move(items));
  }
}

}  // namespace detail

/// Product set AB = {ab : a in A, b in B}.
template <class G>
Subset<G> mul_set(const Subset<G>& a, const Subset<G>& b) {
  require_same_owner(a, b);
  const G& g = *a.owner();
  if constexpr (is_finite_group_v<G>) {
    std::vector<char> mark(g.order(), 0);
    for (auto x : a.elements())
      for (auto y : b.elements()) mark[g.op(x, y)] = 1;
    std::vector<typename G::element_type> out;
    for (std::size_t i = 0; i < mark.size(); ++i)
      if (mark[i]) out.push_back(static_cast<typename G::element_type>(i));
    return Subset<G>::from_sorted(a.owner(), std::move(out));
  } else {
    std::vector<typename G::element_type> items;
    items.reserve(a.size() * b.size());
    for (const auto& x : a.elements())
      for (const auto& y : b.elements()) items.push_back(g.op(x, y));
    return detail::collect(a.owner(), std::move(items));
  }
}

/// A^{-1} = {a^{-1} : a in A}.
template <class G>
Subset<G> inv_set(const Subset<G>& a) {
  std::vector<typename G::element_type> items;
  items.reserve(a.size());
  for (const auto& x : a.elements()) items.push_back(a.owner()->inverse(x));
  return detail::collect(a.owner(), std::move(items));
}

/// Left translate xA.
template <class G>
Subset<G> translate_left(const typename G::element_type& x, const Subset<G>& a) {
  std::vector<typename G::element_type> items;
  for (const auto& y : a.elements()) items.push_back(a.owner()->op(x, y));
  return detail::collect(a.owner(), std::move(items));
}

/// Right translate Ax.
template <class G>
Subset<G> translate_right(const Subset<G>& a, const typename G::element_type& x) {
  std::vector<typename G::element_type> items;
  for (const auto& y : a.elements()) items.push_back(a.owner()->op(y, x));
  return detail::collect(a.owner(), std::move(items));
}

template <class G>
Subset<G> set_union(const Subset<G>& a, const Subset<G>& b) {
  require_same_owner(a, b);
  std::vector<typename G::element_type> out;
  std::set_union(a.elements().begin(), a.elements().end(), b.elements().begin(), b.elements().end(),
                 std::back_inserter(out));
  return Subset<G>::from_sorted(a.owner(), std::move(out));
}

template <class G>
bool is_symmetric(const Subset<G>& a) {
  return inv_set(a) == a;
}

}  // namespace qdoubling
