#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qdoubling/subset.hpp"

namespace qdoubling::testing {

/// Random nonempty subset, each element kept with probability p.
inline Subset<FiniteGroup> random_subset(const std::shared_ptr<const FiniteGroup>& g, std::mt19937_64& rng,
                                         double p = 0.4) {
  std::bernoulli_distribution keep(p);
  std::vector<FiniteGroup::element_type> items;
  for (std::size_t x = 0; x < g->order(); ++x)
    if (keep(rng)) items.push_back(static_cast<FiniteGroup::element_type>(x));
  if (items.empty()) items.push_back(static_cast<FiniteGroup::element_type>(rng() % g->order()));
  return Subset<FiniteGroup>(g, std::move(items));
}

inline Subset<FiniteGroup> subset_from_mask(const std::shared_ptr<const FiniteGroup>& g, std::uint64_t mask) {
  std::vector<FiniteGroup::element_type> items;
  for (std::size_t x = 0; x < g->order(); ++x)
    if (mask >> x & 1) items.push_back(static_cast<FiniteGroup::element_type>(x));
  return Subset<FiniteGroup>::from_sorted(g, std::move(items));
}

inline Subset<FiniteGroup> make_subset(const std::shared_ptr<const FiniteGroup>& g,
                                       std::vector<FiniteGroup::element_type> items) {
  return Subset<FiniteGroup>(g, std::move(items));
}

}  // namespace qdoubling::testing
