#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "qdoubling/fiber.hpp"
#include "test_util.hpp"

namespace qdoubling {
namespace {

using testing::make_subset;
using testing::random_subset;
using E = FiniteGroup::element_type;

// Independent oracle: cosets as explicit gH sets, fibers as |g^{-1}X cap H|
// at the smallest representative, and the step-function integral
// sum over breakpoints of (t_i - t_{i-1}) * w_Q * |{gH : pred}|.
struct BruteQuotient {
  std::shared_ptr<const FiniteGroup> g;
  std::vector<E> h;
  Rational wh, wq;
  std::vector<std::set<E>> cosets;

  BruteQuotient(std::shared_ptr<const FiniteGroup> group, std::vector<E> sub, Rational w_h)
      : g(std::move(group)), h(std::move(sub)), wh(w_h), wq(g->weight() / w_h) {
    std::set<E> seen;
    for (E x = 0; x < g->order(); ++x) {
      if (seen.count(x)) continue;
      std::set<E> c;
      for (auto y : h) c.insert(g->op(x, y));
      seen.insert(c.begin(), c.end());
      cosets.push_back(c);
    }
  }

  std::size_t coset_of(E x) const {
    for (std::size_t i = 0; i < cosets.size(); ++i)
      if (cosets[i].count(x)) return i;
    return cosets.size();
  }

  Rational fiber(const std::set<E>& x, std::size_t c) const {
    const E rep = *cosets[c].begin();
    std::size_t n = 0;
    for (auto y : h)
      if (x.count(g->op(rep, y))) ++n;
    return Rational(BigInt(n)) * wh;
  }

  std::set<std::size_t> superlevel(const std::set<E>& x, const Rational& t) const {
    std::set<std::size_t> out;
    for (std::size_t c = 0; c < cosets.size(); ++c) {
      Rational f = fiber(x, c);
      if (f > 0 && f >= t) out.insert(c);
    }
    return out;
  }

  std::set<std::size_t> product(const std::set<std::size_t>& a, const std::set<std::size_t>& b) const {
    std::set<std::size_t> out;
    for (auto i : a)
      for (auto j : b) out.insert(coset_of(g->op(*cosets[i].begin(), *cosets[j].begin())));
    return out;
  }

  std::set<std::size_t> project(const std::set<E>& x) const {
    std::set<std::size_t> out;
    for (auto e : x) out.insert(coset_of(e));
    return out;
  }

  template <class F>
  Rational integral(const std::set<E>& b, F&& measure_at) const {
    std::set<Rational> values;
    for (std::size_t c = 0; c < cosets.size(); ++c)
      if (fiber(b, c) > 0) values.insert(fiber(b, c));
    Rational total = 0, prev = 0;
    for (const auto& t : values) {
      total += (t - prev) * measure_at(superlevel(b, t));
      prev = t;
    }
    return total;
  }
};

std::set<E> as_set(const Subset<FiniteGroup>& s) { return {s.elements().begin(), s.elements().end()}; }

TEST(FiberProfile, OneElementPerFiber) {
  auto g = FiniteGroup::cyclic(6);
  auto q = quotient(g, make_subset(g, {0, 3}));
  auto f = fiber_profile(make_subset(g, {0, 1}), q);
  EXPECT_EQ(f.fiber(0), Rational(1));
  EXPECT_EQ(f.fiber(1), Rational(1));
  EXPECT_EQ(f.fiber(2), Rational(0));
  EXPECT_EQ(f.support().elements(), (std::vector<E>{0, 1}));
}

TEST(FiberProfile, FullFiber) {
  auto g = FiniteGroup::dihedral(4);
  for (auto mode : {SubgroupWeight::counting, SubgroupWeight::normalized}) {
    for (const auto& h : normal_subgroups(g)) {
      auto q = quotient(g, h, mode);
      auto f = fiber_profile(h, q);
      const Rational full = Rational(BigInt(h.size())) * q.subgroup_weight();
      EXPECT_EQ(f.fiber(q.project(g->identity())), full);
      EXPECT_EQ(f.support_fibers().size(), 1u);
    }
  }
}

TEST(FiberProfile, OwnerMismatch) {
  auto g = FiniteGroup::cyclic(6);
  auto q = quotient(g, make_subset(g, {0, 3}));
  auto other = FiniteGroup::cyclic(6);
  EXPECT_THROW(fiber_profile(make_subset(other, {0}), q), OwnerMismatch);
}

TEST(FiberProfile, RepresentativeIndependenceAndBounds) {
  std::mt19937_64 rng(21);
  for (auto g : {FiniteGroup::dihedral(4), FiniteGroup::symmetric(4), FiniteGroup::quaternion(), FiniteGroup::cyclic(12)}) {
    for (const auto& h : normal_subgroups(g)) {
      auto q = quotient(g, h, SubgroupWeight::normalized);
      for (int i = 0; i < 10; ++i) {
        auto a = random_subset(g, rng);
        auto f = fiber_profile(a, q);
        for (E x = 0; x < g->order(); ++x) {
          const auto value = fiber_at_representative(a, q, x);
          ASSERT_EQ(value, f.fiber(q.project(x)));
          ASSERT_LE(value, Rational(1));
          // f_{A^{-1}}(gH) = f_A(g^{-1}H)
          ASSERT_EQ(fiber_profile(inv_set(a), q).fiber(q.project(x)), f.fiber(q.project(g->inverse(x))));
        }
      }
    }
  }
}

TEST(LevelFamily, NestedAndStartsAtSupport) {
  std::mt19937_64 rng(8);
  auto g = FiniteGroup::product({FiniteGroup::cyclic(3), FiniteGroup::dihedral(4)});
  for (const auto& h : normal_subgroups(g)) {
    auto q = quotient(g, h);
    auto a = random_subset(g, rng, 0.5);
    auto f = fiber_profile(a, q);
    auto family = f.levels();
    ASSERT_FALSE(family.empty());
    EXPECT_EQ(family.levels.front(), f.support());
    for (std::size_t i = 1; i < family.size(); ++i) {
      EXPECT_LT(family.thresholds[i - 1], family.thresholds[i]);
      EXPECT_TRUE(family.levels[i - 1].includes(family.levels[i]));
    }
  }
}

TEST(LayerCake, EmptySet) {
  auto g = FiniteGroup::cyclic(6);
  auto model = make_model(quotient(g, make_subset(g, {0, 3})));
  auto r = layer_cake(model, Subset<FiniteGroup>(g));
  EXPECT_EQ(r.lhs, Rational(0));
  EXPECT_EQ(r.rhs, Rational(0));
}

TEST(LayerCake, TwoLevels) {
  auto g = FiniteGroup::cyclic(6);
  auto q = quotient(g, make_subset(g, {0, 3}));
  auto a = make_subset(g, {0, 1, 3});
  auto f = fiber_profile(a, q);
  EXPECT_EQ(f.fiber(0), Rational(2));
  EXPECT_EQ(f.fiber(1), Rational(1));
  auto r = layer_cake(make_model(q), a);
  EXPECT_EQ(r.lhs, Rational(3));
  EXPECT_EQ(r.rhs, Rational(3));
}

TEST(LayerCake, ConstantFiberIsSingleLevel) {
  auto g = FiniteGroup::cyclic(12);
  auto q = quotient(g, make_subset(g, {0, 4, 8}), SubgroupWeight::normalized);
  auto a = make_subset(g, {0, 4, 1, 5, 2, 6});  // two elements in each of three cosets
  auto model = make_model(q);
  auto family = model.levels(a);
  ASSERT_EQ(family.size(), 1u);
  EXPECT_EQ(layer_cake(model, a).rhs, family.thresholds[0] * model.project(a).measure());
}

TEST(LayerCake, ExactOnRandomInstances) {
  std::mt19937_64 rng(99);
  for (auto g : {FiniteGroup::symmetric(4), FiniteGroup::dihedral(6), FiniteGroup::quaternion()}) {
    for (const auto& h : normal_subgroups(g)) {
      for (auto mode : {SubgroupWeight::counting, SubgroupWeight::normalized}) {
        auto model = make_model(quotient(g, h, mode));
        for (int i = 0; i < 10; ++i) {
          auto a = random_subset(g, rng);
          BruteQuotient bq(g, h.elements(), model.structure().subgroup_weight());
          auto r = layer_cake(model, a);
          EXPECT_EQ(r.lhs, r.rhs);
          auto sa = as_set(a);
          EXPECT_EQ(r.rhs, bq.integral(sa, [&](const auto& lvl) { return Rational(BigInt(lvl.size())) * bq.wq; }));
        }
      }
    }
  }
}

TEST(Spillover, SubgroupB) {
  auto g = FiniteGroup::cyclic(12);
  auto h = make_subset(g, {0, 4, 8});
  auto model = make_model(quotient(g, h));
  auto saturated = make_subset(g, {0, 4, 8, 1, 5, 9});
  auto s = spillover_check(model, saturated, h);
  EXPECT_EQ(s.rhs_left, Rational(3) * model.project(saturated).measure());
  EXPECT_EQ(s.lhs_left, s.rhs_left);
  auto a = make_subset(g, {0, 1, 5});
  auto s2 = spillover_check(model, a, h);
  EXPECT_EQ(s2.rhs_left, Rational(3) * model.project(a).measure());
  EXPECT_EQ(s2.lhs_left, mul_set(a, h).measure());
  EXPECT_TRUE(s2.holds());
}

TEST(Spillover, IntervalInZ6) {
  auto g = FiniteGroup::cyclic(6);
  auto q = quotient(g, make_subset(g, {0, 3}));
  auto model = make_model(q);
  auto a = make_subset(g, {0, 1});
  auto s = spillover_check(model, a, a);
  EXPECT_EQ(s.lhs_left, Rational(3));
  BruteQuotient bq(g, {0, 3}, Rational(1));
  auto pa = bq.project(as_set(a));
  const Rational oracle =
      bq.integral(as_set(a), [&](const auto& lvl) { return Rational(BigInt(bq.product(pa, lvl).size())) * bq.wq; });
  EXPECT_EQ(oracle, Rational(3));
  EXPECT_EQ(s.rhs_left, oracle);
  EXPECT_TRUE(s.holds());
}

TEST(Spillover, BothFormsOnRandomNonabelianInstances) {
  std::mt19937_64 rng(1234);
  for (auto g : {FiniteGroup::symmetric(4), FiniteGroup::dihedral(5), FiniteGroup::quaternion(),
                 FiniteGroup::product({FiniteGroup::symmetric(3), FiniteGroup::cyclic(2)})}) {
    for (const auto& h : normal_subgroups(g)) {
      auto model = make_model(quotient(g, h));
      BruteQuotient bq(g, h.elements(), Rational(1));
      for (int i = 0; i < 8; ++i) {
        auto a = random_subset(g, rng);
        auto b = random_subset(g, rng);
        auto s = spillover_check(model, a, b);
        EXPECT_TRUE(s.holds());
        EXPECT_EQ(s.lhs_right, mul_set(b, a).measure());
        auto pa = bq.project(as_set(a));
        EXPECT_EQ(s.rhs_left, bq.integral(as_set(b), [&](const auto& lvl) {
          return Rational(BigInt(bq.product(pa, lvl).size())) * bq.wq;
        }));
        EXPECT_EQ(s.rhs_right, bq.integral(as_set(b), [&](const auto& lvl) {
          return Rational(BigInt(bq.product(lvl, pa).size())) * bq.wq;
        }));
      }
    }
  }
}

TEST(Containment, IdentityA) {
  auto g = FiniteGroup::dihedral(4);
  std::mt19937_64 rng(4);
  for (const auto& h : normal_subgroups(g)) {
    auto model = make_model(quotient(g, h));
    EXPECT_TRUE(containment_check(model, make_subset(g, {g->identity()}), random_subset(g, rng)));
  }
}

TEST(Containment, RandomZ12Instances) {
  auto g = FiniteGroup::cyclic(12);
  auto model = make_model(quotient(g, make_subset(g, {0, 6})));
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::mt19937_64 rng(seed);
    ASSERT_TRUE(containment_check(model, random_subset(g, rng), random_subset(g, rng))) << "seed " << seed;
  }
}

}  // namespace
}  // namespace qdoubling
