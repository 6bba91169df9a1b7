#include <gtest/gtest.h>

#include <random>

#include "qdoubling/extract.hpp"
#include "test_util.hpp"

namespace qdoubling {
namespace {

using testing::make_subset;
using testing::random_subset;
using E = FiniteGroup::element_type;

// Oracle: scan every coset-count threshold directly from the definition
// of S, without the level family.
std::vector<Rational> brute_force_admissible(const FiniteQuotient& q, const Subset<FiniteGroup>& a,
                                             const Rational& alpha) {
  const auto& g = *q.ambient();
  const Rational K = Rational(BigInt(mul_set(a, a).size())) / Rational(BigInt(a.size()));
  std::vector<std::size_t> counts(q.quotient()->order(), 0);
  for (auto x : a.elements()) ++counts[q.project(x)];
  std::vector<Rational> out;
  for (std::size_t n = 1; n <= q.subgroup().size(); ++n) {
    const Rational s = Rational(BigInt(n)) * q.subgroup_weight();
    bool realized = false;
    std::vector<E> level;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == n) realized = true;
      if (counts[c] >= n) level.push_back(static_cast<E>(c));
    }
    if (!realized || level.empty()) continue;
    std::set<E> sq;
    for (auto x : level)
      for (auto y : level) sq.insert(q.quotient()->op(x, y));
    const Rational wq = q.quotient_weight();
    if (Rational(BigInt(sq.size())) * wq < alpha * K * Rational(BigInt(level.size())) * wq) out.push_back(s);
  }
  (void)g;
  return out;
}

TEST(AdmissibleThresholds, SubgroupIsSingleThreshold) {
  auto g = FiniteGroup::dihedral(4);
  for (const auto& h : normal_subgroups(g)) {
    auto model = make_model(quotient(g, h));
    auto a = normal_subgroups(g).back();  // whole group
    auto s = admissible_thresholds(model, a, Rational(2));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], Rational(BigInt(h.size())));
  }
}

TEST(AdmissibleThresholds, Z12ModTwo) {
  auto g = FiniteGroup::cyclic(12);
  auto q = quotient(g, make_subset(g, {0, 6}));
  auto a = make_subset(g, {0, 1, 2, 6});
  auto expected = brute_force_admissible(q, a, Rational(2));
  ASSERT_EQ(expected, (std::vector<Rational>{Rational(1), Rational(2)}));
  EXPECT_EQ(admissible_thresholds(make_model(q), a, Rational(2)), expected);
}

TEST(AdmissibleThresholds, Errors) {
  auto g = FiniteGroup::cyclic(12);
  auto model = make_model(quotient(g, make_subset(g, {0, 6})));
  EXPECT_THROW(admissible_thresholds(model, make_subset(g, {0}), Rational(1)), InvalidArgument);
  EXPECT_THROW(admissible_thresholds(model, Subset<FiniteGroup>(g), Rational(2)), InvalidArgument);
}

TEST(AdmissibleThresholds, OracleAgreementAndMonotoneInAlpha) {
  std::mt19937_64 rng(10);
  for (auto g : {FiniteGroup::symmetric(4), FiniteGroup::dihedral(6), FiniteGroup::cyclic(24),
                 FiniteGroup::product({FiniteGroup::quaternion(), FiniteGroup::cyclic(3)})}) {
    for (const auto& h : normal_subgroups(g)) {
      auto q = quotient(g, h);
      auto model = make_model(q);
      for (int i = 0; i < 10; ++i) {
        auto a = random_subset(g, rng, 0.3);
        if (model.levels(a).size() > 6) continue;
        std::vector<Rational> previous;
        for (auto alpha : {make_rational(11, 10), make_rational(3, 2), Rational(2), Rational(3)}) {
          auto s = admissible_thresholds(model, a, alpha);
          ASSERT_EQ(s, brute_force_admissible(q, a, alpha));
          for (const auto& t : previous) ASSERT_TRUE(std::find(s.begin(), s.end(), t) != s.end());
          previous = s;
        }
      }
    }
  }
}

TEST(ExtractSubset, SubgroupKeepsEverything) {
  auto g = FiniteGroup::cyclic(12);
  auto model = make_model(quotient(g, make_subset(g, {0, 6})));
  auto a = make_subset(g, {0, 3, 6, 9});
  auto cert = extract_subset(model, a, Rational(2));
  EXPECT_EQ(cert.B, a);
  EXPECT_EQ(cert.measure_ratio, Rational(1));
  EXPECT_EQ(cert.quotient_doubling, Rational(1));
}

TEST(ExtractSubset, Z12ModTwo) {
  auto g = FiniteGroup::cyclic(12);
  auto q = quotient(g, make_subset(g, {0, 6}));
  auto a = make_subset(g, {0, 1, 2, 6});
  auto cert = extract_subset(make_model(q), a, Rational(2));
  EXPECT_TRUE(cert.measure_bound_holds());
  EXPECT_TRUE(cert.doubling_bound_holds());
  EXPECT_GT(cert.measure_ratio, make_rational(1, 2));
  EXPECT_EQ(cert.chosen_s, Rational(1));
  EXPECT_EQ(cert.admissible_set.size(), 2u);
  EXPECT_EQ(cert.trace.size(), 2u);
}

TEST(ExtractSubset, Errors) {
  auto g = FiniteGroup::cyclic(12);
  auto model = make_model(quotient(g, make_subset(g, {0, 6})));
  EXPECT_THROW(extract_subset(model, make_subset(g, {1}), make_rational(1, 2)), InvalidArgument);
  EXPECT_THROW(extract_subset(model, Subset<FiniteGroup>(g), Rational(2)), InvalidArgument);
}

TEST(ExtractSubset, CertificatesOnRandomInstances) {
  std::mt19937_64 rng(555);
  for (auto g : {FiniteGroup::symmetric(4), FiniteGroup::dihedral(8), FiniteGroup::cyclic(18),
                 FiniteGroup::product({FiniteGroup::symmetric(3), FiniteGroup::cyclic(4)})}) {
    for (const auto& h : normal_subgroups(g)) {
      auto q = quotient(g, h);
      auto model = make_model(q);
      for (int i = 0; i < 15; ++i) {
        auto a = random_subset(g, rng, 0.35);
        for (auto alpha : {make_rational(3, 2), Rational(2), Rational(3)}) {
          auto cert = extract_subset(model, a, alpha);
          ASSERT_TRUE(cert.measure_bound_holds());
          ASSERT_TRUE(cert.doubling_bound_holds());
          ASSERT_TRUE(a.includes(cert.B));
          // saturation: B = pi^{-1}(piA_s) cap A and f_B = f_A on piA_s
          auto level = fiber_profile(a, q).superlevel(cert.chosen_s);
          ASSERT_EQ(q.project(cert.B), level);
          ASSERT_EQ(model.saturate(a, level), cert.B);
          auto fa = fiber_profile(a, q), fb = fiber_profile(cert.B, q);
          for (auto c : level.elements()) ASSERT_EQ(fa.fiber(c), fb.fiber(c));
        }
      }
    }
  }
}

}  // namespace
}  // namespace qdoubling
