#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "qdoubling/errors.hpp"
#include "qdoubling/rational.hpp"

namespace qdoubling {

enum class GroupKind { finite_table, cyclic, dihedral, symmetric, product, lazy_matrix };

enum class WeightMode { counting, normalized };

inline const char* to_string(GroupKind k) {
  switch (k) {
    case GroupKind::finite_table: return "table";
    case GroupKind::cyclic: return "cyclic";
    case GroupKind::dihedral: return "dihedral";
    case GroupKind::symmetric: return "symmetric";
    case GroupKind::product: return "product";
    case GroupKind::lazy_matrix: return "gl2z";
  }
  return "?";
}

inline const char* to_string(WeightMode m) {
  return m == WeightMode::counting ? "counting" : "normalized";
}

struct FiniteGroupLimits {
  std::size_t max_symmetric_degree = 5;
  std::size_t max_table_validation = 256;  // associativity check is cubic
  std::size_t max_cached_table = 512;
};

/// A finite group on the canonical element universe 0..n-1 with a uniform
/// Haar weight. Discrete counting measure is bi-invariant, so unimodularity
/// holds for every group here without any check.
///
/// Canonical element orders:
///  - cyclic n: k is the residue k.
///  - dihedral n (order 2n): i < n is r^i, n + i is s r^i.
///  - symmetric n: permutations of {0..n-1} in lexicographic order, composed
///    right-to-left ((p q)(x) = p(q(x))).
///  - product: mixed radix, first factor most significant.
class FiniteGroup {
 public:
  using element_type = std::uint32_t;

  static std::shared_ptr<const FiniteGroup> cyclic(std::size_t n, WeightMode mode = WeightMode::counting) {
    if (n == 0) throw InvalidArgument("cyclic group order must be positive");
    auto g = std::shared_ptr<FiniteGroup>(new FiniteGroup(GroupKind::cyclic, n, mode));
    g->param_ = n;
    g->name_ = "Z" + std::to_string(n);
    g->finish();
    return g;
  }

  /// Dihedral group of the regular n-gon (order 2n).
  static std::shared_ptr<const FiniteGroup> dihedral(std::size_t n, WeightMode mode = WeightMode::counting) {
    if (n == 0) throw InvalidArgument("dihedral parameter must be positive");
    auto g = std::shared_ptr<FiniteGroup>(new FiniteGroup(GroupKind::dihedral, 2 * n, mode));
    g->param_ = n;
    g->name_ = "D" + std::to_string(n);
    g->finish();
    return g;
  }

  static std::shared_ptr<const FiniteGroup> symmetric(std::size_t n, WeightMode mode = WeightMode::counting,
                                                      const FiniteGroupLimits& limits = {}) {
    if (n == 0) throw InvalidArgument("symmetric group degree must be positive");
    if (n > limits.max_symmetric_degree)
      throw CapExceeded("symmetric group degree " + std::to_string(n) + " exceeds cap " +
                        std::to_string(limits.max_symmetric_degree));
    std::vector<std::vector<int>> perms;
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    auto index_of = [&](const std::vector<int>& q) {
      return static_cast<element_type>(std::lower_bound(perms.begin(), perms.end(), q) - perms.begin());
    };
    const std::size_t order = perms.size();
    std::vector<element_type> table(order * order);
    std::vector<int> r(n);
    for (std::size_t i = 0; i < order; ++i) {
      for (std::size_t j = 0; j < order; ++j) {
        for (std::size_t x = 0; x < n; ++x) r[x] = perms[i][perms[j][x]];
        table[i * order + j] = index_of(r);
      }
    }
    auto g = std::shared_ptr<FiniteGroup>(new FiniteGroup(GroupKind::symmetric, order, mode));
    g->param_ = n;
    g->name_ = "S" + std::to_string(n);
    g->table_ = std::move(table);
    g->finish();
    return g;
  }

  /// Quaternion group Q8 in the order 1, -1, i, -i, j, -j, k, -k.
  static std::shared_ptr<const FiniteGroup> quaternion(WeightMode mode = WeightMode::counting) {
    // unit u in {1,i,j,k} as 0..3, sign bit; index = 2*u + sign
    static constexpr int unit_mul[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
    static constexpr int sign_mul[4][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
    std::vector<std::vector<element_type>> rows(8, std::vector<element_type>(8));
    for (int x = 0; x < 8; ++x) {
      for (int y = 0; y < 8; ++y) {
        const int u = unit_mul[x / 2][y / 2];
        const int s = (x % 2) ^ (y % 2) ^ sign_mul[x / 2][y / 2];
        rows[x][y] = static_cast<element_type>(2 * u + s);
      }
    }
    auto g = from_table(rows, mode);
    std::const_pointer_cast<FiniteGroup>(g)->name_ = "Q8";
    return g;
  }

  /// Validated Cayley table. Rejects anything that is not a group.
  static std::shared_ptr<const FiniteGroup> from_table(const std::vector<std::vector<element_type>>& rows,
                                                       WeightMode mode = WeightMode::counting,
                                                       const FiniteGroupLimits& limits = {}) {
    const std::size_t n = rows.size();
    if (n == 0) throw GroupAxiomError("empty multiplication table");
    if (n > limits.max_table_validation)
      throw CapExceeded("table of order " + std::to_string(n) + " exceeds validation cap " +
                        std::to_string(limits.max_table_validation));
    std::vector<element_type> table(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) throw GroupAxiomError("multiplication table is not square");
      for (std::size_t j = 0; j < n; ++j) {
        if (rows[i][j] >= n) throw GroupAxiomError("table entry out of range");
        table[i * n + j] = rows[i][j];
      }
    }
    auto g = std::shared_ptr<FiniteGroup>(new FiniteGroup(GroupKind::finite_table, n, mode));
    g->name_ = "T" + std::to_string(n);
    g->table_ = std::move(table);
    g->validate_table();
    g->finish();
    return g;
  }

  /// Direct product; the weight is the product of the factor weights.
  static std::shared_ptr<const FiniteGroup> product(std::vector<std::shared_ptr<const FiniteGroup>> factors,
                                                    const FiniteGroupLimits& limits = {}) {
    if (factors.empty()) throw InvalidArgument("product of zero factors");
    std::size_t order = 1;
    Rational weight = 1;
    std::string name;
    for (const auto& f : factors) {
      if (order > (std::size_t{1} << 31) / f->order()) throw CapExceeded("product group too large");
      order *= f->order();
      weight *= f->weight();
      name += (name.empty() ? "" : "x") + f->name();
    }
    auto g = std::shared_ptr<FiniteGroup>(new FiniteGroup(GroupKind::product, order, WeightMode::counting));
    g->weight_ = weight;
    g->factors_ = std::move(factors);
    g->name_ = name;
    g->radix_.resize(g->factors_.size());
    std::size_t stride = 1;
    for (std::size_t i = g->factors_.size(); i-- > 0;) {
      g->radix_[i] = stride;
      stride *= g->factors_[i]->order();
    }
    g->limits_ = limits;
    g->finish();
    return g;
  }

  /// Quotient or other derived group from an already-trusted table.
  static std::shared_ptr<const FiniteGroup> trusted_table(std::vector<element_type> table, std::size_t n,
                                                          Rational weight, std::string name) {
    auto g = std::shared_ptr<FiniteGroup>(new FiniteGroup(GroupKind::finite_table, n, WeightMode::counting));
    g->table_ = std::move(table);
    g->weight_ = std::move(weight);
    g->name_ = std::move(name);
    g->finish();
    return g;
  }

  std::size_t order() const noexcept { return order_; }
  GroupKind kind() const noexcept { return kind_; }
  WeightMode weight_mode() const noexcept { return mode_; }
  const Rational& weight() const noexcept { return weight_; }
  const std::string& name() const noexcept { return name_; }
  /// n for cyclic/dihedral/symmetric, 0 otherwise.
  std::size_t parameter() const noexcept { return param_; }
  element_type identity() const noexcept { return identity_; }
  const std::vector<std::shared_ptr<const FiniteGroup>>& factors() const noexcept { return factors_; }

  element_type op(element_type x, element_type y) const {
    if (!table_.empty()) return table_[static_cast<std::size_t>(x) * order_ + y];
    return raw_op(x, y);
  }

  element_type inverse(element_type x) const { return inverses_[x]; }

  std::vector<element_type> coordinates(element_type x) const {
    std::vector<element_type> out(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i)
      out[i] = static_cast<element_type>((x / radix_[i]) % factors_[i]->order());
    return out;
  }

  element_type from_coordinates(const std::vector<element_type>& coords) const {
    if (coords.size() != factors_.size()) throw InvalidArgument("coordinate arity mismatch");
    std::size_t x = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i] >= factors_[i]->order()) throw InvalidArgument("coordinate out of range");
      x += coords[i] * radix_[i];
    }
    return static_cast<element_type>(x);
  }

  bool valid(element_type x) const noexcept { return x < order_; }

 private:
  FiniteGroup(GroupKind kind, std::size_t order, WeightMode mode)
      : kind_(kind), mode_(mode), order_(order),
        weight_(mode == WeightMode::counting ? Rational(1) : Rational(BigInt(1), BigInt(order))) {}

  element_type raw_op(element_type x, element_type y) const {
    switch (kind_) {
      case GroupKind::cyclic:
        return static_cast<element_type>((static_cast<std::uint64_t>(x) + y) % order_);
      case GroupKind::dihedral: {
        // s^f r^a * s^g r^b = s^(f+g) r^((-1)^g a + b)
        const std::size_t n = param_;
        const std::size_t f = x / n, a = x % n, gg = y / n, b = y % n;
        const std::size_t signed_a = gg ? (n - a) % n : a;
        return static_cast<element_type>(((f + gg) % 2) * n + (signed_a + b) % n);
      }
      case GroupKind::product: {
        std::size_t out = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
          const auto& f = *factors_[i];
          const auto xi = static_cast<element_type>((x / radix_[i]) % f.order());
          const auto yi = static_cast<element_type>((y / radix_[i]) % f.order());
          out += f.op(xi, yi) * radix_[i];
        }
        return static_cast<element_type>(out);
      }
      default:
        return table_[static_cast<std::size_t>(x) * order_ + y];
    }
  }

  void validate_table() const {
    const std::size_t n = order_;
    std::size_t e = n;
    for (std::size_t c = 0; c < n && e == n; ++c) {
      bool ok = true;
      for (std::size_t x = 0; x < n && ok; ++x)
        ok = table_[c * n + x] == x && table_[x * n + c] == x;
      if (ok) e = c;
    }
    if (e == n) throw GroupAxiomError("table has no two-sided identity");
    for (std::size_t x = 0; x < n; ++x) {
      bool found = false;
      for (std::size_t y = 0; y < n && !found; ++y)
        found = table_[x * n + y] == e && table_[y * n + x] == e;
      if (!found) throw GroupAxiomError("element " + std::to_string(x) + " has no inverse");
    }
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const std::size_t xy = table_[x * n + y];
        for (std::size_t z = 0; z < n; ++z)
          if (table_[xy * n + z] != table_[x * n + table_[y * n + z]])
            throw GroupAxiomError("table is not associative at (" + std::to_string(x) + "," +
                                  std::to_string(y) + "," + std::to_string(z) + ")");
      }
  }

  void finish() {
    if (kind_ == GroupKind::product && order_ <= limits_.max_cached_table) {
      std::vector<element_type> table(order_ * order_);
      for (std::size_t x = 0; x < order_; ++x)
        for (std::size_t y = 0; y < order_; ++y)
          table[x * order_ + y] = raw_op(static_cast<element_type>(x), static_cast<element_type>(y));
      table_ = std::move(table);
    }
    if (kind_ == GroupKind::product) {
      std::vector<element_type> ids;
      for (const auto& f : factors_) ids.push_back(f->identity());
      identity_ = from_coordinates(ids);
    } else if (!table_.empty()) {
      for (std::size_t c = 0; c < order_; ++c)
        if (table_[c * order_ + c] == c) {
          identity_ = static_cast<element_type>(c);
          break;
        }
    } else {
      identity_ = 0;
    }
    inverses_.resize(order_);
    switch (kind_) {
      case GroupKind::cyclic:
        for (std::size_t x = 0; x < order_; ++x) inverses_[x] = static_cast<element_type>((order_ - x) % order_);
        break;
      case GroupKind::dihedral:
        for (std::size_t x = 0; x < order_; ++x)
          inverses_[x] = x < param_ ? static_cast<element_type>((param_ - x) % param_) : static_cast<element_type>(x);
        break;
      case GroupKind::product:
        for (std::size_t x = 0; x < order_; ++x) {
          auto c = coordinates(static_cast<element_type>(x));
          for (std::size_t i = 0; i < c.size(); ++i) c[i] = factors_[i]->inverse(c[i]);
          inverses_[x] = from_coordinates(c);
        }
        break;
      default:
        for (std::size_t x = 0; x < order_; ++x)
          for (std::size_t y = 0; y < order_; ++y)
            if (table_[x * order_ + y] == identity_) {
              inverses_[x] = static_cast<element_type>(y);
              break;
            }
    }
  }

  GroupKind kind_;
  WeightMode mode_;
  std::size_t order_;
  Rational weight_;
  std::string name_;
  std::size_t param_ = 0;
  element_type identity_ = 0;
  std::vector<element_type> table_;
  std::vector<element_type> inverses_;
  std::vector<std::shared_ptr<const FiniteGroup>> factors_;
  std::vector<std::size_t> radix_;
  FiniteGroupLimits limits_;
};

}  // namespace qdoubling
