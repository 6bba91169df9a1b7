#pragma once

#include <boost/dynamic_bitset.hpp>

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <vector>

#include "qdoubling/fiber.hpp"
#include "qdoubling/matrix.hpp"

namespace qdoubling {

using Bits = boost::dynamic_bitset<std::uint64_t>;

/// Subsets of G = H x GL2(Z) x Z_m stored as unions of rectangles
/// S_H x {M} x S_T, with the quotient G -> GL2(Z) x Z_m that drops H.
/// Only finitely many matrices are ever touched, and Z_m sets are bitsets,
/// so product sets cost O(blocks^2 * m / 64) instead of O(|A|^2).
///
/// Weights: H carries its own weight, Z_m is normalized (1/m), GL2(Z) counts.
class BlockModel {
 public:
  struct Block {
    Bits h;
    Mat2 matrix;
    Bits t;
  };

  struct BlockSet {
    std::vector<Block> blocks;
  };

  /// Cosets of H: matrix -> set of Z_m residues. Rows are never empty.
  struct CosetSet {
    std::map<Mat2, Bits> rows;
    friend bool operator==(const CosetSet&, const CosetSet&) = default;
  };

  using set_type = BlockSet;
  using coset_set_type = CosetSet;

  BlockModel(std::shared_ptr<const FiniteGroup> h_group, std::size_t m)
      : h_group_(std::move(h_group)), m_(m), torus_weight_(BigInt(1), BigInt(m)) {
    if (m == 0) throw InvalidArgument("torus modulus must be positive");
  }

  const FiniteGroup& h_group() const noexcept { return *h_group_; }
  std::size_t modulus() const noexcept { return m_; }
  Rational ambient_weight() const { return h_group_->weight() * torus_weight_; }
  const Rational& quotient_weight() const noexcept { return torus_weight_; }
  const Rational& subgroup_weight() const noexcept { return h_group_->weight(); }

  Bits empty_h() const { return Bits(h_group_->order()); }
  Bits full_h() const { return Bits(h_group_->order()).set(); }
  Bits identity_h() const {
    Bits b(h_group_->order());
    b.set(h_group_->identity());
    return b;
  }
  Bits empty_t() const { return Bits(m_); }
  Bits full_t() const { return Bits(m_).set(); }

  Rational measure(const BlockSet& a) const {
    BigInt count = 0;
    for (const auto& [matrix, members] : by_matrix(a)) count += union_count(members);
    return Rational(count) * ambient_weight();
  }

  bool empty(const BlockSet& a) const { return normalize(a).blocks.empty(); }

  BlockSet product(const BlockSet& a, const BlockSet& b) const {
    SumsetCache t_cache(*this);
    BlockSet out;
    for (const auto& x : a.blocks) {
      for (const auto& y : b.blocks) {
        if (x.h.none() || y.h.none() || x.t.none() || y.t.none()) continue;
        out.blocks.push_back({h_product(x.h, y.h), x.matrix * y.matrix, t_cache.get(x.t, y.t)});
      }
    }
    return normalize(out);
  }

  BlockSet inverse(const BlockSet& a) const {
    BlockSet out;
    for (const auto& x : a.blocks) {
      Bits h(h_group_->order());
      for (auto i = x.h.find_first(); i != Bits::npos; i = x.h.find_next(i))
        h.set(h_group_->inverse(static_cast<FiniteGroup::element_type>(i)));
      out.blocks.push_back({std::move(h), x.matrix.inverse(), negate(x.t)});
    }
    return normalize(out);
  }

  bool equal(const BlockSet& a, const BlockSet& b) const {
    BlockSet both = a;
    both.blocks.insert(both.blocks.end(), b.blocks.begin(), b.blocks.end());
    const Rational u = measure(both);
    return u == measure(a) && u == measure(b);
  }

  CosetSet project(const BlockSet& a) const {
    CosetSet out;
    for (const auto& x : a.blocks) {
      if (x.h.none() || x.t.none()) continue;
      auto [it, inserted] = out.rows.try_emplace(x.matrix, x.t);
      if (!inserted) it->second |= x.t;
    }
    return out;
  }

  Rational quotient_measure(const CosetSet& c) const {
    BigInt count = 0;
    for (const auto& [matrix, t] : c.rows) count += t.count();
    return Rational(count) * torus_weight_;
  }

  CosetSet quotient_product(const CosetSet& a, const CosetSet& b) const {
    SumsetCache cache(*this);
    CosetSet out;
    for (const auto& [ma, ta] : a.rows)
      for (const auto& [mb, tb] : b.rows) {
        const Bits& s = cache.get(ta, tb);
        auto [it, inserted] = out.rows.try_emplace(ma * mb, s);
        if (!inserted) it->second |= s;
      }
    return out;
  }

  bool quotient_includes(const CosetSet& big, const CosetSet& small) const {
    for (const auto& [matrix, t] : small.rows) {
      auto it = big.rows.find(matrix);
      if (it == big.rows.end() || !t.is_subset_of(it->second)) return false;
    }
    return true;
  }

  /// Fiber classes: cosets grouped by (matrix, fiber value).
  struct FiberClass {
    Mat2 matrix;
    Bits t;
    Rational fiber;
  };

  std::vector<FiberClass> fiber_classes(const BlockSet& a) const {
    std::vector<FiberClass> out;
    for (const auto& [matrix, members] : by_matrix(a)) {
      if (members.size() > 64) throw CapExceeded("more than 64 blocks share one matrix");
      std::map<std::uint64_t, Bits> by_signature;
      for (std::size_t t = 0; t < m_; ++t) {
        std::uint64_t sig = 0;
        for (std::size_t i = 0; i < members.size(); ++i)
          if (members[i]->t.test(t)) sig |= std::uint64_t{1} << i;
        if (!sig) continue;
        auto [it, inserted] = by_signature.try_emplace(sig, Bits(m_));
        it->second.set(t);
      }
      std::map<Rational, Bits> by_fiber;
      for (auto& [sig, ts] : by_signature) {
        Bits hs(h_group_->order());
        for (std::size_t i = 0; i < members.size(); ++i)
          if (sig >> i & 1) hs |= members[i]->h;
        if (hs.none()) continue;
        const Rational f = Rational(BigInt(hs.count())) * h_group_->weight();
        auto [it, inserted] = by_fiber.try_emplace(f, ts);
        if (!inserted) it->second |= ts;
      }
      for (auto& [f, ts] : by_fiber) out.push_back({matrix, std::move(ts), f});
    }
    return out;
  }

  LevelFamily<CosetSet> levels(const BlockSet& a) const {
    const auto classes = fiber_classes(a);
    std::vector<Rational> values;
    for (const auto& c : classes) values.push_back(c.fiber);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    LevelFamily<CosetSet> family;
    for (const auto& t : values) {
      family.thresholds.push_back(t);
      family.levels.push_back(superlevel_from(classes, t));
    }
    return family;
  }

  CosetSet superlevel(const BlockSet& a, const Rational& t) const { return superlevel_from(fiber_classes(a), t); }

  BlockSet saturate(const BlockSet& a, const CosetSet& cosets) const {
    BlockSet out;
    for (const auto& x : a.blocks) {
      auto it = cosets.rows.find(x.matrix);
      if (it == cosets.rows.end()) continue;
      out.blocks.push_back({x.h, x.matrix, x.t & it->second});
    }
    return normalize(out);
  }

  /// Sumset X + Y in Z_m.
  Bits sumset(const Bits& x, const Bits& y) const {
    if (x.none() || y.none()) return Bits(m_);
    if (x.all() || y.all()) return full_t();
    const Bits& small = x.count() <= y.count() ? x : y;
    const Bits& large = x.count() <= y.count() ? y : x;
    Bits out(m_);
    for (auto s = small.find_first(); s != Bits::npos; s = small.find_next(s)) {
      if (s == 0) out |= large;
      else out |= (large << s) | (large >> (m_ - s));
    }
    return out;
  }

  Bits negate(const Bits& x) const {
    Bits out(m_);
    for (auto s = x.find_first(); s != Bits::npos; s = x.find_next(s)) out.set((m_ - s) % m_);
    return out;
  }

 private:
  class SumsetCache {
   public:
    explicit SumsetCache(const BlockModel& model) : model_(model) {}
    const Bits& get(const Bits& x, const Bits& y) {
      for (const auto& e : entries_)
        if (e.x == x && e.y == y) return e.sum;
      entries_.push_back({x, y, model_.sumset(x, y)});
      return entries_.back().sum;
    }

   private:
    struct Entry {
      Bits x, y, sum;
    };
    const BlockModel& model_;
    std::deque<Entry> entries_;
  };

  Bits h_product(const Bits& x, const Bits& y) const {
    if (x.none() || y.none()) return empty_h();
    if (x.all() || y.all()) return full_h();
    Bits out(h_group_->order());
    for (auto i = x.find_first(); i != Bits::npos; i = x.find_next(i))
      for (auto j = y.find_first(); j != Bits::npos; j = y.find_next(j))
        out.set(h_group_->op(static_cast<FiniteGroup::element_type>(i), static_cast<FiniteGroup::element_type>(j)));
    return out;
  }

  std::map<Mat2, std::vector<const Block*>> by_matrix(const BlockSet& a) const {
    std::map<Mat2, std::vector<const Block*>> out;
    for (const auto& x : a.blocks)
      if (x.h.any() && x.t.any()) out[x.matrix].push_back(&x);
    return out;
  }

  BigInt union_count(const std::vector<const Block*>& members) const {
    if (members.size() > 64) throw CapExceeded("more than 64 blocks share one matrix");
    std::map<std::uint64_t, std::size_t> h_by_signature;
    for (std::size_t h = 0; h < h_group_->order(); ++h) {
      std::uint64_t sig = 0;
      for (std::size_t i = 0; i < members.size(); ++i)
        if (members[i]->h.test(h)) sig |= std::uint64_t{1} << i;
      if (sig) ++h_by_signature[sig];
    }
    BigInt count = 0;
    for (const auto& [sig, hs] : h_by_signature) {
      Bits ts(m_);
      for (std::size_t i = 0; i < members.size(); ++i)
        if (sig >> i & 1) ts |= members[i]->t;
      count += BigInt(hs) * BigInt(ts.count());
    }
    return count;
  }

  /// Drops empty blocks and merges blocks with the same H part and matrix.
  BlockSet normalize(const BlockSet& a) const {
    BlockSet out;
    for (const auto& x : a.blocks) {
      if (x.h.none() || x.t.none()) continue;
      bool merged = false;
      for (auto& y : out.blocks)
        if (y.matrix == x.matrix && y.h == x.h) {
          y.t |= x.t;
          merged = true;
          break;
        }
      if (!merged) out.blocks.push_back(x);
    }
    return out;
  }

  CosetSet superlevel_from(const std::vector<FiberClass>& classes, const Rational& t) const {
    CosetSet out;
    for (const auto& c : classes) {
      if (c.fiber < t) continue;
      auto [it, inserted] = out.rows.try_emplace(c.matrix, c.t);
      if (!inserted) it->second |= c.t;
    }
    return out;
  }

  std::shared_ptr<const FiniteGroup> h_group_;
  std::size_t m_;
  Rational torus_weight_;
};

static_assert(QuotientModel<BlockModel>);

}  // namespace qdoubling
