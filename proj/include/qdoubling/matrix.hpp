#pragma once

#include <compare>
#include <string>

#include "qdoubling/rational.hpp"

namespace qdoubling {

/// Exact 2x2 integer matrix (a b; c d). Elements of GL2(Z) keep det = +-1.
struct Mat2 {
  BigInt a{1}, b{0}, c{0}, d{1};

  static Mat2 identity() { return {}; }

  BigInt det() const { return a * d - b * c; }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }

  /// Inverse over Z; requires det = +-1.
  Mat2 inverse() const {
    const BigInt dt = det();
    if (dt != 1 && dt != -1) throw InvalidArgument("matrix is not invertible over Z");
    // adj / det with det = +-1 is adj * det
    return {d * dt, -b * dt, -c * dt, a * dt};
  }

  bool operator==(const Mat2&) const = default;
  friend std::strong_ordering operator<=>(const Mat2& x, const Mat2& y) {
    auto cmp = [](const BigInt& p, const BigInt& q) {
      return p < q ? std::strong_ordering::less
                   : (q < p ? std::strong_ordering::greater : std::strong_ordering::equal);
    };
    if (auto r = cmp(x.a, y.a); r != 0) return r;
    if (auto r = cmp(x.b, y.b); r != 0) return r;
    if (auto r = cmp(x.c, y.c); r != 0) return r;
    return cmp(x.d, y.d);
  }

  std::string str() const {
    return "(" + a.str() + " " + b.str() + "; " + c.str() + " " + d.str() + ")";
  }
};

}  // namespace qdoubling
