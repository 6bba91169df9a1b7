#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <set>

#include "qdoubling/quotient.hpp"
#include "test_util.hpp"

namespace qdoubling {
namespace {

using testing::make_subset;
using testing::random_subset;
using testing::subset_from_mask;
using E = FiniteGroup::element_type;

std::vector<std::vector<E>> table_of(const FiniteGroup& g) {
  std::vector<std::vector<E>> rows(g.order(), std::vector<E>(g.order()));
  for (E x = 0; x < g.order(); ++x)
    for (E y = 0; y < g.order(); ++y) rows[x][y] = g.op(x, y);
  return rows;
}

TEST(BuildGroup, CyclicCountingAndNormalized) {
  auto g = FiniteGroup::cyclic(6);
  EXPECT_EQ(Subset<FiniteGroup>::full(g).measure(), Rational(6));
  auto n = FiniteGroup::cyclic(6, WeightMode::normalized);
  EXPECT_EQ(n->weight(), make_rational(1, 6));
  EXPECT_EQ(Subset<FiniteGroup>::full(n).measure(), Rational(1));
}

TEST(BuildGroup, BuiltInFamiliesSatisfyGroupAxioms) {
  // from_table runs the exhaustive axiom check
  for (auto g : {FiniteGroup::dihedral(4), FiniteGroup::dihedral(5), FiniteGroup::symmetric(4), FiniteGroup::quaternion(),
                 FiniteGroup::product({FiniteGroup::dihedral(3), FiniteGroup::cyclic(4)})}) {
    EXPECT_NO_THROW(FiniteGroup::from_table(table_of(*g))) << g->name();
    for (E x = 0; x < g->order(); ++x) {
      EXPECT_EQ(g->op(x, g->inverse(x)), g->identity());
      EXPECT_EQ(g->op(g->identity(), x), x);
    }
  }
}

TEST(BuildGroup, ProductWeightsMultiply) {
  auto g = FiniteGroup::product({FiniteGroup::cyclic(2, WeightMode::normalized), FiniteGroup::cyclic(4)});
  EXPECT_EQ(g->order(), 8u);
  EXPECT_EQ(g->weight(), make_rational(1, 2));
  EXPECT_EQ(g->coordinates(5), (std::vector<E>{1, 1}));
  EXPECT_EQ(g->from_coordinates({1, 3}), 7u);
}

TEST(BuildGroup, RejectsBadTables) {
  // not associative: a Latin square without an associative law
  std::vector<std::vector<E>> bad = {{0, 1, 2, 3, 4}, {1, 0, 3, 4, 2}, {2, 4, 0, 1, 3}, {3, 2, 4, 0, 1}, {4, 3, 1, 2, 0}};
  EXPECT_THROW(FiniteGroup::from_table(bad), GroupAxiomError);
  std::vector<std::vector<E>> no_inverse = {{0, 1}, {1, 1}};
  EXPECT_THROW(FiniteGroup::from_table(no_inverse), GroupAxiomError);
  std::vector<std::vector<E>> out_of_range = {{0, 2}, {1, 0}};
  EXPECT_THROW(FiniteGroup::from_table(out_of_range), GroupAxiomError);
  EXPECT_THROW(FiniteGroup::symmetric(6), CapExceeded);
  FiniteGroupLimits tight;
  tight.max_table_validation = 4;
  EXPECT_THROW(FiniteGroup::from_table(table_of(*FiniteGroup::cyclic(6)), WeightMode::counting, tight), CapExceeded);
}

TEST(BuildGroup, Gl2zMatrices) {
  auto g = LazyGroup::gl2z();
  const Mat2 m1{0, 1, 1, 2};
  EXPECT_EQ(m1.det(), -1);
  const LazyElement x{m1};
  EXPECT_EQ(g->op(x, g->inverse(x)), g->identity());
  EXPECT_FALSE(g->valid(LazyElement{Mat2{2, 0, 0, 1}}));
}

TEST(MulSet, IntervalSumsetInZ6) {
  auto g = FiniteGroup::cyclic(6);
  auto a = make_subset(g, {0, 1});
  auto ab = mul_set(a, a);
  EXPECT_EQ(ab.elements(), (std::vector<E>{0, 1, 2}));
  EXPECT_EQ(ab.measure(), Rational(3));
}

TEST(MulSet, FullGroupAbsorbs) {
  auto g = FiniteGroup::dihedral(4);
  auto full = Subset<FiniteGroup>::full(g);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(mul_set(full, random_subset(g, rng)), full);
}

TEST(MulSet, OwnerMismatch) {
  auto a = Subset<FiniteGroup>::full(FiniteGroup::cyclic(6));
  auto b = Subset<FiniteGroup>::full(FiniteGroup::cyclic(6));
  EXPECT_THROW(mul_set(a, b), OwnerMismatch);
}

TEST(MulSet, Gl2zFamilySquareHasFiveElements) {
  // oracle: int64 matrix products and a set of 4-tuples
  using M = std::array<long long, 4>;
  auto mul = [](const M& x, const M& y) {
    return M{x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
  };
  const std::vector<M> gens = {{1, 0, 0, 1}, {0, 1, 1, 2}, {-2, 1, 1, 0}};
  std::set<M> oracle;
  for (const auto& x : gens)
    for (const auto& y : gens) oracle.insert(mul(x, y));
  ASSERT_EQ(oracle.size(), 5u);

  auto g = LazyGroup::gl2z();
  Subset<LazyGroup> a(g, {LazyElement{Mat2{}}, LazyElement{Mat2{0, 1, 1, 2}}, LazyElement{Mat2{-2, 1, 1, 0}}});
  EXPECT_EQ(mul_set(a, a).size(), oracle.size());
  EXPECT_EQ(mul_set(a, a).measure(), Rational(5));
}

TEST(InvSet, Examples) {
  auto g = FiniteGroup::cyclic(6);
  EXPECT_EQ(inv_set(make_subset(g, {1, 2})).elements(), (std::vector<E>{4, 5}));
  auto sym = make_subset(g, {0, 1, 5});
  EXPECT_EQ(inv_set(sym), sym);

  auto gl = LazyGroup::gl2z();
  Subset<LazyGroup> m1(gl, {LazyElement{Mat2{0, 1, 1, 2}}});
  EXPECT_EQ(std::get<Mat2>(inv_set(m1).elements().front()[0]), (Mat2{-2, 1, 1, 0}));
}

TEST(ProductSetProperties, SizeBoundsAndInvolution) {
  std::mt19937_64 rng(11);
  for (auto g : {FiniteGroup::cyclic(12), FiniteGroup::dihedral(4), FiniteGroup::symmetric(3), FiniteGroup::quaternion(),
                 FiniteGroup::symmetric(4)}) {
    for (int i = 0; i < 50; ++i) {
      auto a = random_subset(g, rng, 0.3);
      auto b = random_subset(g, rng, 0.3);
      auto ab = mul_set(a, b);
      EXPECT_LE(ab.size(), a.size() * b.size());
      EXPECT_GE(ab.size(), std::max(a.size(), b.size()));
      EXPECT_EQ(inv_set(inv_set(a)), a);
      EXPECT_EQ(inv_set(a).measure(), a.measure());
    }
  }
}

// brute-force oracle: every subset that is a normal subgroup
std::set<std::vector<E>> brute_force_normal_subgroups(const std::shared_ptr<const FiniteGroup>& g) {
  std::set<std::vector<E>> out;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << g->order()); ++mask) {
    auto s = subset_from_mask(g, mask);
    if (is_subgroup(s) && is_normal(s)) out.insert(s.elements());
  }
  return out;
}

TEST(NormalSubgroups, CyclicSix) {
  auto subs = normal_subgroups(FiniteGroup::cyclic(6));
  std::vector<std::size_t> orders;
  for (const auto& s : subs) orders.push_back(s.size());
  EXPECT_EQ(orders, (std::vector<std::size_t>{1, 2, 3, 6}));
}

TEST(NormalSubgroups, MatchBruteForce) {
  for (auto g : {FiniteGroup::symmetric(3), FiniteGroup::quaternion(), FiniteGroup::dihedral(4), FiniteGroup::dihedral(6),
                 FiniteGroup::product({FiniteGroup::cyclic(2), FiniteGroup::cyclic(4)}), FiniteGroup::cyclic(12)}) {
    std::set<std::vector<E>> found;
    for (const auto& s : normal_subgroups(g)) found.insert(s.elements());
    EXPECT_EQ(found, brute_force_normal_subgroups(g)) << g->name();
  }
  EXPECT_EQ(normal_subgroups(FiniteGroup::symmetric(3)).size(), 3u);
  EXPECT_EQ(normal_subgroups(FiniteGroup::quaternion()).size(), 6u);
}

TEST(NormalSubgroups, CapAndS4) {
  EXPECT_THROW(normal_subgroups(FiniteGroup::cyclic(65)), CapExceeded);
  // S4: 1, V4, A4, S4
  std::vector<std::size_t> orders;
  for (const auto& s : normal_subgroups(FiniteGroup::symmetric(4))) orders.push_back(s.size());
  EXPECT_EQ(orders, (std::vector<std::size_t>{1, 4, 12, 24}));
}

TEST(Quotient, CyclicSixByOrderTwo) {
  auto g = FiniteGroup::cyclic(6);
  auto h = make_subset(g, {0, 3});
  auto q = quotient(g, h);
  EXPECT_EQ(q.quotient()->order(), 3u);
  EXPECT_EQ(q.quotient_weight(), Rational(1));
  auto qn = quotient(g, h, SubgroupWeight::normalized);
  EXPECT_EQ(qn.subgroup_weight(), make_rational(1, 2));
  EXPECT_EQ(qn.quotient_weight(), Rational(2));
  EXPECT_EQ(qn.quotient_weight() * qn.subgroup_weight(), g->weight());
}

TEST(Quotient, S3ByA3IsOrderTwo) {
  auto g = FiniteGroup::symmetric(3);
  auto q = quotient(g, make_subset(g, {0, 3, 4}));
  ASSERT_EQ(q.quotient()->order(), 2u);
  EXPECT_EQ(q.quotient()->op(1, 1), 0u);
}

TEST(Quotient, Errors) {
  auto g = FiniteGroup::symmetric(3);
  EXPECT_THROW(quotient(g, make_subset(g, {0, 1})), InvalidArgument);  // not normal
  EXPECT_THROW(quotient(g, make_subset(g, {0, 3})), InvalidArgument);  // not a subgroup
}

TEST(Quotient, ProjectionIsHomomorphismOnSets) {
  std::mt19937_64 rng(3);
  for (auto g : {FiniteGroup::dihedral(4), FiniteGroup::symmetric(4), FiniteGroup::cyclic(12)}) {
    for (const auto& h : normal_subgroups(g)) {
      auto q = quotient(g, h);
      for (E x = 0; x < g->order(); ++x)
        for (E y = 0; y < g->order(); ++y)
          ASSERT_EQ(q.project(g->op(x, y)), q.quotient()->op(q.project(x), q.project(y)));
      for (int i = 0; i < 10; ++i) {
        auto a = random_subset(g, rng);
        auto b = random_subset(g, rng);
        EXPECT_EQ(q.project(mul_set(a, b)), mul_set(q.project(a), q.project(b)));
      }
    }
  }
}

TEST(Quotient, IndependentOfElementOrder) {
  // relabel D4 by a random permutation, quotient by the relabelled subgroup,
  // and compare projected measures
  auto g = FiniteGroup::dihedral(4);
  std::vector<E> perm(g->order());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(5);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<E>> rows(g->order(), std::vector<E>(g->order()));
  for (E x = 0; x < g->order(); ++x)
    for (E y = 0; y < g->order(); ++y) rows[perm[x]][perm[y]] = perm[g->op(x, y)];
  auto relabelled = FiniteGroup::from_table(rows);
  auto relabel = [&](const Subset<FiniteGroup>& s) {
    std::vector<E> items;
    for (auto x : s.elements()) items.push_back(perm[x]);
    return Subset<FiniteGroup>(relabelled, items);
  };
  for (const auto& h : normal_subgroups(g)) {
    auto q1 = quotient(g, h);
    auto q2 = quotient(relabelled, relabel(h));
    EXPECT_EQ(q1.quotient()->order(), q2.quotient()->order());
    for (int i = 0; i < 20; ++i) {
      auto a = random_subset(g, rng);
      EXPECT_EQ(q1.project(a).measure(), q2.project(relabel(a)).measure());
      EXPECT_EQ(q1.project(mul_set(a, a)).measure(), q2.project(mul_set(relabel(a), relabel(a))).measure());
    }
  }
}

TEST(ProjectionQuotient, DropFirstFactor) {
  auto g = FiniteGroup::product({FiniteGroup::cyclic(2), FiniteGroup::cyclic(4)});
  auto q = projection_quotient(g, {1});
  EXPECT_EQ(q.quotient()->order(), 4u);
  EXPECT_EQ(q.subgroup().elements(), (std::vector<E>{g->from_coordinates({0, 0}), g->from_coordinates({1, 0})}));
  EXPECT_EQ(q.project(g->from_coordinates({1, 3})), 3u);
}

TEST(ProjectionQuotient, KeepAllIsIdentity) {
  auto g = FiniteGroup::product({FiniteGroup::cyclic(3), FiniteGroup::dihedral(3)});
  auto q = projection_quotient(g, {0, 1});
  std::mt19937_64 rng(1);
  auto a = random_subset(g, rng);
  EXPECT_EQ(q.project(a).elements(), a.elements());
  EXPECT_EQ(q.subgroup().size(), 1u);
}

TEST(ProjectionQuotient, Errors) {
  auto g = FiniteGroup::product({FiniteGroup::cyclic(2), FiniteGroup::cyclic(4)});
  EXPECT_THROW(projection_quotient(g, {}), InvalidArgument);
  EXPECT_THROW(projection_quotient(g, {2}), InvalidArgument);
  EXPECT_THROW(projection_quotient(FiniteGroup::cyclic(4), {0}), InvalidArgument);
  auto lazy = LazyGroup::make({FiniteGroup::cyclic(2), Gl2z{}});
  EXPECT_THROW(projection_quotient(lazy, {0}), InvalidArgument);  // cannot drop GL2(Z)
}

TEST(ProjectionQuotient, LazyWeightsFollowFubini) {
  auto lazy = LazyGroup::make({FiniteGroup::cyclic(4, WeightMode::normalized), Gl2z{},
                               FiniteGroup::cyclic(9, WeightMode::normalized)});
  auto q = projection_quotient(lazy, {1, 2});
  EXPECT_EQ(q.subgroup_weight(), make_rational(1, 4));
  EXPECT_EQ(q.quotient_weight(), make_rational(1, 9));
  EXPECT_EQ(q.subgroup().size(), 4u);
}

}  // namespace
}  // namespace qdoubling
