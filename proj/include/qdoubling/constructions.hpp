#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "qdoubling/block_model.hpp"
#include "qdoubling/doubling.hpp"

namespace qdoubling {

/// |S - S| for S = {2^k : 1 <= k <= N}, by brute force over all pairs.
/// Throws InternalConsistencyError if the count is not N(N-1)+1.
inline std::size_t powers_diff_count(std::size_t n) {
  if (n == 0) throw InvalidArgument("N must be positive");
  std::vector<BigInt> s;
  for (std::size_t k = 1; k <= n; ++k) s.push_back(BigInt(1) << k);
  std::set<BigInt> diffs;
  for (const auto& a : s)
    for (const auto& b : s) diffs.insert(a - b);
  if (diffs.size() != n * (n - 1) + 1)
    throw InternalConsistencyError("|S-S| = " + std::to_string(diffs.size()) + " for N = " + std::to_string(n));
  return diffs.size();
}

/// M_k = (0 1; 1 2^k) for k = 1..N, their inverses, and the identity.
struct MatrixFamily {
  std::size_t N = 0;
  std::vector<Mat2> M;  // M_1..M_N, then M_1^{-1}..M_N^{-1}
  Mat2 I;

  static MatrixFamily build(std::size_t n) {
    if (n == 0) throw InvalidArgument("N must be positive");
    MatrixFamily f;
    f.N = n;
    for (std::size_t k = 1; k <= n; ++k) f.M.push_back(Mat2{0, 1, 1, BigInt(1) << k});
    for (std::size_t k = 0; k < n; ++k) f.M.push_back(f.M[k].inverse());
    return f;
  }

  /// I together with M.
  std::vector<Mat2> generators() const {
    std::vector<Mat2> out{I};
    out.insert(out.end(), M.begin(), M.end());
    return out;
  }
};

/// |(I u M)^2| from all (2N+1)^2 exact products. Throws
/// InternalConsistencyError if the count is not 4N^2+1.
inline std::size_t matrix_family_square_count(std::size_t n) {
  const auto gens = MatrixFamily::build(n).generators();
  std::set<Mat2> products;
  for (const auto& a : gens)
    for (const auto& b : gens) products.insert(a * b);
  if (products.size() != 4 * n * n + 1)
    throw InternalConsistencyError("|(I u M)^2| = " + std::to_string(products.size()) + " for N = " +
                                   std::to_string(n));
  return products.size();
}

inline std::size_t exact_sqrt(std::size_t m) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(m)));
  while (r * r > m) --r;
  while ((r + 1) * (r + 1) <= m) ++r;
  return r;
}

/// C = {-r..r} u rZ_m in Z_m (normalized) with m = r^2: symmetric, C + C
/// covers Z_m, and |C| = 3r - 2 so mu(C) -> 0. Stands in for a null
/// symmetric set whose sumset is the whole torus.
inline Subset<FiniteGroup> cantor_analog(std::size_t m) {
  const std::size_t r = exact_sqrt(m);
  if (r < 2 || r * r != m) throw InvalidArgument("cantor analog needs m = r^2 with r >= 2, got m = " + std::to_string(m));
  auto torus = FiniteGroup::cyclic(m, WeightMode::normalized);
  std::vector<FiniteGroup::element_type> items;
  for (std::size_t a = 0; a <= r; ++a) {
    items.push_back(static_cast<FiniteGroup::element_type>(a % m));
    items.push_back(static_cast<FiniteGroup::element_type>((m - a) % m));
  }
  for (std::size_t j = 0; j < r; ++j) items.push_back(static_cast<FiniteGroup::element_type>(j * r));
  auto c = detail::collect(torus, std::move(items));
  if (!is_symmetric(c)) throw InternalConsistencyError("cantor analog is not symmetric");
  std::vector<char> hit(m, 0);
  std::size_t covered = 0;
  for (auto x : c.elements())
    for (auto y : c.elements()) {
      const auto s = (static_cast<std::size_t>(x) + y) % m;
      if (!hit[s]) {
        hit[s] = 1;
        ++covered;
      }
    }
  if (covered != m) throw InternalConsistencyError("cantor analog does not cover Z_m");
  return c;
}

struct SharpnessParams {
  std::size_t N = 1;
  std::size_t h = 2;
  std::size_t m = 4;
};

/// A = A1 u A2 in G = H_h x GL2(Z) x Z_m with A1 = H x {I} x Z_m and
/// A2 = {1_H} x M x C, projected onto Q = GL2(Z) x Z_m.
struct SharpnessInstance {
  SharpnessParams params;
  std::size_t r = 0;
  MatrixFamily family;
  Subset<FiniteGroup> C;
  BlockModel model;
  BlockModel::BlockSet A;
  QuotientMeasures measured;

  Rational K() const { return measured.mu_a2 / measured.mu_a; }
  Rational quotient_doubling() const { return measured.quotient_doubling(); }
  /// K^2 - 2K + 2 for the nominal K = 2N + 1, i.e. 4N^2 + 1.
  std::size_t limit_ratio() const { return 4 * params.N * params.N + 1; }
};

inline void validate(const SharpnessParams& p) {
  if (p.N == 0) throw InvalidArgument("N must be positive");
  if (p.h < 2) throw InvalidArgument("h must be at least 2");
  const std::size_t r = exact_sqrt(p.m);
  if (r < 2 || r * r != p.m) throw InvalidArgument("m must be a perfect square r^2 with r >= 2");
}

/// Builds the discretized sharpness instance and measures it exactly. H
/// defaults to the cyclic group of order h with normalized weight.
inline SharpnessInstance build_sharpness_instance(const SharpnessParams& p,
                                                  std::shared_ptr<const FiniteGroup> h_group = nullptr) {
  validate(p);
  if (!h_group) h_group = FiniteGroup::cyclic(p.h, WeightMode::normalized);
  if (h_group->order() != p.h) throw InvalidArgument("H must have order h");
  if (h_group->weight() * BigInt(p.h) != 1) throw InvalidArgument("H must carry normalized weight");
  auto c = cantor_analog(p.m);
  BlockModel model(h_group, p.m);
  auto family = MatrixFamily::build(p.N);

  Bits c_bits(p.m);
  for (auto x : c.elements()) c_bits.set(x);
  BlockModel::BlockSet a;
  a.blocks.push_back({model.full_h(), family.I, model.full_t()});
  for (const auto& mk : family.M) a.blocks.push_back({model.identity_h(), mk, c_bits});

  auto measured = quotient_measures(model, a);
  return SharpnessInstance{p, exact_sqrt(p.m), std::move(family), std::move(c), std::move(model), std::move(a),
                           std::move(measured)};
}

/// The same instance as explicit element lists over a lazy product group,
/// for brute-force cross-checks at small (N, h, m).
struct ExplicitSharpness {
  std::shared_ptr<const LazyGroup> G;
  LazyQuotient Q;
  Subset<LazyGroup> A;
};

inline ExplicitSharpness build_explicit_sharpness(const SharpnessParams& p, std::size_t element_cap = 200000) {
  validate(p);
  auto h_group = FiniteGroup::cyclic(p.h, WeightMode::normalized);
  auto torus = FiniteGroup::cyclic(p.m, WeightMode::normalized);
  auto g = LazyGroup::make({h_group, Gl2z{}, torus});
  auto q = projection_quotient(g, {1, 2});
  auto c = cantor_analog(p.m);
  auto family = MatrixFamily::build(p.N);
  const std::size_t size = p.h * p.m + family.M.size() * c.size();
  if (size > element_cap) throw CapExceeded("explicit sharpness instance has " + std::to_string(size) + " elements");
  std::vector<LazyElement> items;
  items.reserve(size);
  for (std::uint32_t h = 0; h < p.h; ++h)
    for (std::uint32_t t = 0; t < p.m; ++t) items.push_back({h, family.I, t});
  for (const auto& mk : family.M)
    for (auto t : c.elements()) items.push_back({h_group->identity(), mk, t});
  Subset<LazyGroup> a(g, std::move(items));
  return {g, std::move(q), std::move(a)};
}

}  // namespace qdoubling
