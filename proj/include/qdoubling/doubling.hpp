#pragma once

#include <cmath>
#include <string>

#include "qdoubling/fiber.hpp"

namespace qdoubling {

/// K = mu(A^2)/mu(A) (also K1) and K2 = mu(A^{-1}A)/mu(A).
struct DoublingStats {
  Rational K;
  Rational K2;
  bool symmetric = false;

  const Rational& K1() const noexcept { return K; }
};

/// Set operations on explicit subsets, for callers without a quotient.
template <class G>
struct SubsetOps {
  using set_type = Subset<G>;
  Rational measure(const set_type& a) const { return a.measure(); }
  bool empty(const set_type& a) const { return a.empty(); }
  set_type product(const set_type& a, const set_type& b) const { return mul_set(a, b); }
  set_type inverse(const set_type& a) const { return inv_set(a); }
  bool equal(const set_type& a, const set_type& b) const { return a == b; }
};

template <class Ops>
DoublingStats doubling_stats(const Ops& ops, const typename Ops::set_type& a) {
  if (ops.empty(a)) throw InvalidArgument("doubling constants need a nonempty set");
  const Rational mu = ops.measure(a);
  const auto inv = ops.inverse(a);
  return {ops.measure(ops.product(a, a)) / mu, ops.measure(ops.product(inv, a)) / mu, ops.equal(inv, a)};
}

template <class G>
DoublingStats doubling_stats(const Subset<G>& a) {
  return doubling_stats(SubsetOps<G>{}, a);
}

/// exp(d(A,B))^2 = mu(AB^{-1})^2 / (mu(A) mu(B)). Stored squared so that it
/// stays rational; log-scaled distances are for display only.
struct RuzsaSq {
  Rational value;

  double distance() const { return 0.5 * std::log(to_double(value)); }
  friend bool operator==(const RuzsaSq&, const RuzsaSq&) = default;
};

template <class G>
RuzsaSq ruzsa_sq(const Subset<G>& a, const Subset<G>& b) {
  require_same_owner(a, b);
  if (a.empty() || b.empty()) throw InvalidArgument("Ruzsa distance needs nonempty sets");
  const Rational m = mul_set(a, inv_set(b)).measure();
  return {m * m / (a.measure() * b.measure())};
}

/// d(A,C) <= d(A,B) + d(B,C), in multiplicative squared form.
template <class G>
bool ruzsa_triangle_check(const Subset<G>& a, const Subset<G>& b, const Subset<G>& c) {
  require_same_owner(a, b);
  require_same_owner(b, c);
  return ruzsa_sq(a, c).value <= ruzsa_sq(a, b).value * ruzsa_sq(b, c).value;
}

/// Every measured quantity the quotient-doubling bounds need for one set.
struct QuotientMeasures {
  Rational mu_a;         // mu_G(A)
  Rational mu_a2;        // mu_G(A^2)
  Rational mu_inv_a_a;   // mu_G(A^{-1}A)
  Rational mu_pa;        // mu_Q(pi A)
  Rational mu_pa2;       // mu_Q(pi A^2)
  bool symmetric = false;

  DoublingStats stats() const { return {mu_a2 / mu_a, mu_inv_a_a / mu_a, symmetric}; }
  Rational quotient_doubling() const { return mu_pa2 / mu_pa; }
};

template <QuotientModel M>
QuotientMeasures quotient_measures(const M& model, const typename M::set_type& a) {
  if (model.empty(a)) throw InvalidArgument("quotient doubling needs a nonempty set");
  const auto inv = model.inverse(a);
  const auto pa = model.project(a);
  return {model.measure(a),
          model.measure(model.product(a, a)),
          model.measure(model.product(inv, a)),
          model.quotient_measure(pa),
          model.quotient_measure(model.quotient_product(pa, pa)),
          model.equal(inv, a)};
}

enum class Thm42Variant { symmetric_k2, general_k3, mixed_k1k2 };

inline const char* to_string(Thm42Variant v) {
  switch (v) {
    case Thm42Variant::symmetric_k2: return "i";
    case Thm42Variant::general_k3: return "ii";
    case Thm42Variant::mixed_k1k2: return "iii";
  }
  return "?";
}

/// One quotient-doubling bound with both sides. `pass` is decided on the
/// cross-multiplied form (no division); ratio/bound are for reporting.
struct Thm42Result {
  Thm42Variant variant;
  Rational quotient_doubling;  // mu_Q(piA^2) / mu_Q(piA)
  Rational bound;              // K^2, K^3 or K1 K2
  bool pass = false;

  Rational margin() const { return bound - quotient_doubling; }
};

inline Thm42Result theorem42_check(const QuotientMeasures& m, Thm42Variant variant) {
  if (variant == Thm42Variant::symmetric_k2 && !m.symmetric)
    throw InvalidArgument("the K^2 bound requires a symmetric set");
  Thm42Result r{variant, m.quotient_doubling(), 0, false};
  const auto stats = m.stats();
  switch (variant) {
    case Thm42Variant::symmetric_k2:
      r.bound = stats.K * stats.K;
      r.pass = m.mu_pa2 * m.mu_a * m.mu_a <= m.mu_a2 * m.mu_a2 * m.mu_pa;
      break;
    case Thm42Variant::general_k3:
      r.bound = stats.K * stats.K * stats.K;
      r.pass = m.mu_pa2 * m.mu_a * m.mu_a * m.mu_a <= m.mu_a2 * m.mu_a2 * m.mu_a2 * m.mu_pa;
      break;
    case Thm42Variant::mixed_k1k2:
      r.bound = stats.K * stats.K2;
      r.pass = m.mu_pa2 * m.mu_a * m.mu_a <= m.mu_a2 * m.mu_inv_a_a * m.mu_pa;
      break;
  }
  return r;
}

template <QuotientModel M>
Thm42Result theorem42_check(const M& model, const typename M::set_type& a, Thm42Variant variant) {
  return theorem42_check(quotient_measures(model, a), variant);
}

}  // namespace qdoubling
