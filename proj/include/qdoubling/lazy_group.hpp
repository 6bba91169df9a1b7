#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qdoubling/finite_group.hpp"
#include "qdoubling/matrix.hpp"

namespace qdoubling {

/// GL2(Z) with the discrete (counting) measure.
struct Gl2z {};

/// One coordinate of a lazy product element.
using LazyCoord = std::variant<std::uint32_t, Mat2>;
using LazyElement = std::vector<LazyCoord>;

/// Product of finite factors and GL2(Z) factors. Never enumerated: only op,
/// inverse, finite product sets and projection quotients are supported.
class LazyGroup {
 public:
  using element_type = LazyElement;
  using Factor = std::variant<std::shared_ptr<const FiniteGroup>, Gl2z>;

  static std::shared_ptr<const LazyGroup> gl2z() { return make({Factor{Gl2z{}}}); }

  static std::shared_ptr<const LazyGroup> make(std::vector<Factor> factors) {
    if (factors.empty()) throw InvalidArgument("lazy product of zero factors");
    auto g = std::shared_ptr<LazyGroup>(new LazyGroup());
    g->weight_ = 1;
    for (const auto& f : factors) {
      if (const auto* fg = std::get_if<std::shared_ptr<const FiniteGroup>>(&f)) {
        g->weight_ *= (*fg)->weight();
        g->name_ += (g->name_.empty() ? "" : "x") + (*fg)->name();
      } else {
        g->name_ += (g->name_.empty() ? "" : "x") + std::string("GL2Z");
      }
    }
    g->factors_ = std::move(factors);
    return g;
  }

  const std::vector<Factor>& factors() const noexcept { return factors_; }
  const Rational& weight() const noexcept { return weight_; }
  const std::string& name() const noexcept { return name_; }
  bool is_matrix_factor(std::size_t i) const { return std::holds_alternative<Gl2z>(factors_.at(i)); }
  const FiniteGroup& finite_factor(std::size_t i) const {
    return *std::get<std::shared_ptr<const FiniteGroup>>(factors_.at(i));
  }

  element_type identity() const {
    element_type e;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (is_matrix_factor(i)) e.emplace_back(Mat2::identity());
      else e.emplace_back(finite_factor(i).identity());
    }
    return e;
  }

  element_type op(const element_type& x, const element_type& y) const {
    element_type out;
    out.reserve(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (is_matrix_factor(i)) out.emplace_back(std::get<Mat2>(x[i]) * std::get<Mat2>(y[i]));
      else out.emplace_back(finite_factor(i).op(std::get<std::uint32_t>(x[i]), std::get<std::uint32_t>(y[i])));
    }
    return out;
  }

  element_type inverse(const element_type& x) const {
    element_type out;
    out.reserve(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (is_matrix_factor(i)) out.emplace_back(std::get<Mat2>(x[i]).inverse());
      else out.emplace_back(finite_factor(i).inverse(std::get<std::uint32_t>(x[i])));
    }
    return out;
  }

  bool valid(const element_type& x) const {
    if (x.size() != factors_.size()) return false;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (is_matrix_factor(i)) {
        const auto* m = std::get_if<Mat2>(&x[i]);
        if (!m) return false;
        const BigInt d = m->det();
        if (d != 1 && d != -1) return false;
      } else {
        const auto* v = std::get_if<std::uint32_t>(&x[i]);
        if (!v || !finite_factor(i).valid(*v)) return false;
      }
    }
    return true;
  }

 private:
  LazyGroup() = default;

  std::vector<Factor> factors_;
  Rational weight_;
  std::string name_;
};

}  // namespace qdoubling
