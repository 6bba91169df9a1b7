#pragma once

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qdoubling/constructions.hpp"
#include "qdoubling/extract.hpp"
#include "qdoubling/fiber.hpp"
#include "qdoubling/lazy_group.hpp"
#include "qdoubling/quotient.hpp"

namespace qdoubling::io {

using json = nlohmann::ordered_json;
using FinitePtr = std::shared_ptr<const FiniteGroup>;
using LazyPtr = std::shared_ptr<const LazyGroup>;
using E = FiniteGroup::element_type;

// ---------------------------------------------------------------- rationals

/// Exact value plus a non-authoritative decimal shadow.
inline json rational_json(const Rational& r) { return json{{"value", to_pq(r)}, {"approx", to_double(r)}}; }

/// Reads "p/q", a JSON integer, or a {"value": "p/q"} object.
inline Rational read_rational(const json& j, const std::string& ptr) {
  try {
    if (j.is_object() && j.contains("value")) return read_rational(j.at("value"), ptr + "/value");
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(BigInt(j.get<std::int64_t>()));
  } catch (const InvalidArgument& e) {
    throw SchemaError(ptr, e.what());
  }
  throw SchemaError(ptr, "expected a rational as \"p/q\"");
}

// ------------------------------------------------------------ schema helpers

namespace detail {

inline std::string join_ptr(const std::string& base, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') escaped += "~0";
    else if (c == '/') escaped += "~1";
    else escaped += c;
  }
  return base + "/" + escaped;
}

inline std::string join_ptr(const std::string& base, std::size_t index) { return base + "/" + std::to_string(index); }

inline void require_object(const json& j, const std::string& ptr, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw SchemaError(ptr, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw SchemaError(join_ptr(ptr, key), "unknown key '" + key + "'");
  }
}

inline const json& member(const json& j, const std::string& ptr, const std::string& key) {
  if (!j.contains(key)) throw SchemaError(ptr, "missing required key '" + key + "'");
  return j.at(key);
}

inline std::size_t read_size(const json& j, const std::string& ptr, std::size_t min = 0) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) throw SchemaError(ptr, "expected a non-negative integer");
  const auto v = j.get<std::size_t>();
  if (v < min) throw SchemaError(ptr, "must be at least " + std::to_string(min));
  return v;
}

inline BigInt read_bigint(const json& j, const std::string& ptr) {
  if (j.is_number_integer()) return BigInt(j.get<std::int64_t>());
  if (j.is_string()) {
    try {
      const Rational r = parse_rational(j.get<std::string>());
      if (boost::multiprecision::denominator(r) == 1) return boost::multiprecision::numerator(r);
    } catch (const InvalidArgument&) {
    }
  }
  throw SchemaError(ptr, "expected an integer");
}

inline json bigint_json(const BigInt& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
    return json(v.convert_to<std::int64_t>());
  return json(v.str());
}

inline WeightMode read_weight(const json& spec, const std::string& ptr) {
  if (!spec.contains("weight")) return WeightMode::counting;
  const auto& w = spec.at("weight");
  if (w == "counting") return WeightMode::counting;
  if (w == "normalized") return WeightMode::normalized;
  throw SchemaError(join_ptr(ptr, "weight"), "weight must be \"counting\" or \"normalized\"");
}

}  // namespace detail

// ---------------------------------------------------------------- groups

/// A parsed group together with the canonical JSON spec it came from.
struct GroupSpec {
  json spec;
  std::variant<FinitePtr, LazyPtr> group;

  bool is_lazy() const { return std::holds_alternative<LazyPtr>(group); }
  const FinitePtr& finite() const {
    if (is_lazy()) throw UnsupportedOperation("operation needs a finite group");
    return std::get<FinitePtr>(group);
  }
  const LazyPtr& lazy() const { return std::get<LazyPtr>(group); }
  std::string name() const { return is_lazy() ? lazy()->name() : finite()->name(); }
};

namespace detail {

inline bool spec_has_gl2z(const json& spec) {
  if (spec.value("type", "") == "gl2z") return true;
  if (spec.value("type", "") == "product" && spec.contains("factors"))
    for (const auto& f : spec.at("factors"))
      if (f.is_object() && f.value("type", "") == "gl2z") return true;
  return false;
}

inline json canonical_weight(json out, WeightMode mode) {
  out["weight"] = to_string(mode);
  return out;
}

inline std::pair<FinitePtr, json> build_finite(const json& spec, const std::string& ptr,
                                               const FiniteGroupLimits& limits) {
  if (!spec.is_object()) throw SchemaError(ptr, "group spec must be an object");
  const auto& type_node = member(spec, ptr, "type");
  if (!type_node.is_string()) throw SchemaError(join_ptr(ptr, "type"), "type must be a string");
  const std::string type = type_node.get<std::string>();
  try {
    if (type == "cyclic" || type == "dihedral" || type == "symmetric") {
      require_object(spec, ptr, {"type", "n", "weight"});
      const auto n = read_size(member(spec, ptr, "n"), join_ptr(ptr, "n"), 1);
      const auto mode = read_weight(spec, ptr);
      FinitePtr g = type == "cyclic"     ? FiniteGroup::cyclic(n, mode)
                    : type == "dihedral" ? FiniteGroup::dihedral(n, mode)
                                         : FiniteGroup::symmetric(n, mode, limits);
      return {g, canonical_weight(json{{"type", type}, {"n", n}}, mode)};
    }
    if (type == "quaternion") {
      require_object(spec, ptr, {"type", "weight"});
      const auto mode = read_weight(spec, ptr);
      return {FiniteGroup::quaternion(mode), canonical_weight(json{{"type", type}}, mode)};
    }
    if (type == "table") {
      require_object(spec, ptr, {"type", "table", "weight"});
      const auto& rows_node = member(spec, ptr, "table");
      const auto rptr = join_ptr(ptr, "table");
      if (!rows_node.is_array()) throw SchemaError(rptr, "table must be an array of rows");
      std::vector<std::vector<E>> rows;
      for (std::size_t i = 0; i < rows_node.size(); ++i) {
        const auto& row = rows_node[i];
        if (!row.is_array()) throw SchemaError(join_ptr(rptr, i), "row must be an array");
        std::vector<E> r;
        for (std::size_t k = 0; k < row.size(); ++k)
          r.push_back(static_cast<E>(read_size(row[k], join_ptr(join_ptr(rptr, i), k))));
        rows.push_back(std::move(r));
      }
      const auto mode = read_weight(spec, ptr);
      return {FiniteGroup::from_table(rows, mode, limits), canonical_weight(json{{"type", type}, {"table", rows}}, mode)};
    }
    if (type == "product") {
      require_object(spec, ptr, {"type", "factors"});
      const auto& fs = member(spec, ptr, "factors");
      const auto fptr = join_ptr(ptr, "factors");
      if (!fs.is_array() || fs.empty()) throw SchemaError(fptr, "factors must be a nonempty array");
      std::vector<FinitePtr> factors;
      json canon = json::array();
      for (std::size_t i = 0; i < fs.size(); ++i) {
        auto [f, c] = build_finite(fs[i], join_ptr(fptr, i), limits);
        factors.push_back(f);
        canon.push_back(std::move(c));
      }
      return {FiniteGroup::product(std::move(factors), limits), json{{"type", "product"}, {"factors", canon}}};
    }
    if (type == "gl2z") throw SchemaError(ptr, "gl2z is only allowed alone or as a top-level product factor");
  } catch (const SchemaError&) {
    throw;
  } catch (const GroupAxiomError& e) {
    throw SchemaError(ptr, e.what());
  } catch (const InvalidArgument& e) {
    throw SchemaError(ptr, e.what());
  }
  throw SchemaError(join_ptr(ptr, "type"), "unknown group type '" + type + "'");
}

}  // namespace detail

/// Parses a group-spec. Products with a gl2z factor become lazy groups.
inline GroupSpec parse_group(const json& spec, const std::string& ptr = "", const FiniteGroupLimits& limits = {}) {
  if (!detail::spec_has_gl2z(spec)) {
    auto [g, canon] = detail::build_finite(spec, ptr, limits);
    return {std::move(canon), g};
  }
  if (spec.at("type") == "gl2z") {
    detail::require_object(spec, ptr, {"type"});
    return {json{{"type", "gl2z"}}, LazyGroup::gl2z()};
  }
  detail::require_object(spec, ptr, {"type", "factors"});
  const auto fptr = detail::join_ptr(ptr, "factors");
  std::vector<LazyGroup::Factor> factors;
  json canon = json::array();
  const auto& fs = spec.at("factors");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto iptr = detail::join_ptr(fptr, i);
    if (fs[i].is_object() && fs[i].value("type", "") == "gl2z") {
      detail::require_object(fs[i], iptr, {"type"});
      factors.emplace_back(Gl2z{});
      canon.push_back(json{{"type", "gl2z"}});
    } else {
      auto [f, c] = detail::build_finite(fs[i], iptr, limits);
      factors.emplace_back(f);
      canon.push_back(std::move(c));
    }
  }
  return {json{{"type", "product"}, {"factors", canon}}, LazyGroup::make(std::move(factors))};
}

// Short syntax: "cyclic:12", "dihedral:4:normalized", "symmetric:3", "quaternion",
// "gl2z", "table:0.1/1.0", products joined with 'x', parentheses for nesting.

namespace detail {

class ShortParser {
 public:
  explicit ShortParser(std::string_view text) {
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c))) s_ += c;
  }

  json parse() {
    auto out = product();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return out;
  }

 private:
  std::string s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("group '" + s_ + "' at offset " + std::to_string(pos_) + ": " + what);
  }

  json product() {
    std::vector<json> factors{factor()};
    while (pos_ < s_.size() && s_[pos_] == 'x') {
      ++pos_;
      factors.push_back(factor());
    }
    if (factors.size() == 1) return factors.front();
    return json{{"type", "product"}, {"factors", factors}};
  }

  json factor() {
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      auto inner = product();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
      ++pos_;
      return inner;
    }
    std::string word;
    // 'x' separates factors; no kind or weight name contains it
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != 'x') word += s_[pos_++];
    json out{{"type", word}};
    if (word == "cyclic" || word == "dihedral" || word == "symmetric") {
      expect(':');
      out["n"] = number();
    } else if (word == "table") {
      expect(':');
      json rows = json::array();
      json row = json::array({number()});
      while (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == '/')) {
        const char sep = s_[pos_++];
        if (sep == '/') {
          rows.push_back(row);
          row = json::array();
        }
        row.push_back(number());
      }
      rows.push_back(row);
      out["table"] = rows;
    } else if (word == "gl2z") {
      return out;
    } else if (word != "quaternion") {
      fail("unknown group kind '" + word + "'");
    }
    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      std::string w;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != 'x') w += s_[pos_++];
      if (w != "normalized" && w != "counting") fail("unknown weight '" + w + "'");
      out["weight"] = w;
    }
    return out;
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::size_t number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a number");
    return std::stoul(s_.substr(start, pos_ - start));
  }
};

}  // namespace detail

inline json parse_group_short(std::string_view text) { return detail::ShortParser(text).parse(); }

/// Inverse of parse_group_short for canonical specs.
inline std::string group_short(const json& spec) {
  const std::string type = spec.at("type").get<std::string>();
  std::string weight = spec.value("weight", "counting") == "normalized" ? ":normalized" : "";
  if (type == "product") {
    std::string out;
    for (const auto& f : spec.at("factors")) {
      const bool nested = f.at("type") == "product";
      out += (out.empty() ? "" : "x") + (nested ? "(" + group_short(f) + ")" : group_short(f));
    }
    return out;
  }
  if (type == "gl2z") return type;
  if (type == "quaternion") return type + weight;
  if (type == "table") {
    std::string rows;
    for (const auto& row : spec.at("table")) {
      std::string r;
      for (const auto& v : row) r += (r.empty() ? "" : ".") + std::to_string(v.get<std::size_t>());
      rows += (rows.empty() ? "" : "/") + r;
    }
    return "table:" + rows + weight;
  }
  return type + ":" + std::to_string(spec.at("n").get<std::size_t>()) + weight;
}

/// Accepts either a JSON spec or a string in short syntax.
inline GroupSpec parse_group_any(const json& j, const std::string& ptr = "", const FiniteGroupLimits& limits = {}) {
  if (j.is_string()) {
    try {
      return parse_group(parse_group_short(j.get<std::string>()), ptr, limits);
    } catch (const SchemaError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw SchemaError(ptr, e.what());
    }
  }
  return parse_group(j, ptr, limits);
}

// ---------------------------------------------------------------- elements

inline json encode_element(const FiniteGroup& g, E x) {
  if (g.kind() != GroupKind::product) return json(x);
  json out = json::array();
  const auto coords = g.coordinates(x);
  for (std::size_t i = 0; i < coords.size(); ++i) out.push_back(encode_element(*g.factors()[i], coords[i]));
  return out;
}

inline E decode_element(const FiniteGroup& g, const json& j, const std::string& ptr) {
  if (g.kind() != GroupKind::product) {
    const auto v = detail::read_size(j, ptr);
    if (v >= g.order()) throw SchemaError(ptr, "element " + std::to_string(v) + " out of range for " + g.name());
    return static_cast<E>(v);
  }
  if (!j.is_array() || j.size() != g.factors().size())
    throw SchemaError(ptr, "product element must be a tuple of " + std::to_string(g.factors().size()) + " coordinates");
  std::vector<E> coords;
  for (std::size_t i = 0; i < j.size(); ++i)
    coords.push_back(decode_element(*g.factors()[i], j[i], detail::join_ptr(ptr, i)));
  return g.from_coordinates(coords);
}

inline json encode_matrix(const Mat2& m) {
  return json::array({json::array({detail::bigint_json(m.a), detail::bigint_json(m.b)}),
                      json::array({detail::bigint_json(m.c), detail::bigint_json(m.d)})});
}

inline Mat2 decode_matrix(const json& j, const std::string& ptr) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 || j[1].size() != 2)
    throw SchemaError(ptr, "matrix must be [[a,b],[c,d]]");
  Mat2 m{detail::read_bigint(j[0][0], ptr + "/0/0"), detail::read_bigint(j[0][1], ptr + "/0/1"),
         detail::read_bigint(j[1][0], ptr + "/1/0"), detail::read_bigint(j[1][1], ptr + "/1/1")};
  const auto det = m.det();
  if (det != 1 && det != -1) throw SchemaError(ptr, "matrix determinant must be +1 or -1");
  return m;
}

inline json encode_element(const LazyGroup& g, const LazyElement& x) {
  if (g.factors().size() == 1 && g.is_matrix_factor(0)) return encode_matrix(std::get<Mat2>(x[0]));
  json out = json::array();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (g.is_matrix_factor(i)) out.push_back(encode_matrix(std::get<Mat2>(x[i])));
    else out.push_back(encode_element(g.finite_factor(i), std::get<std::uint32_t>(x[i])));
  }
  return out;
}

inline LazyElement decode_element(const LazyGroup& g, const json& j, const std::string& ptr) {
  if (g.factors().size() == 1 && g.is_matrix_factor(0)) return {decode_matrix(j, ptr)};
  if (!j.is_array() || j.size() != g.factors().size())
    throw SchemaError(ptr, "element must be a tuple of " + std::to_string(g.factors().size()) + " coordinates");
  LazyElement out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto iptr = detail::join_ptr(ptr, i);
    if (g.is_matrix_factor(i)) out.emplace_back(decode_matrix(j[i], iptr));
    else out.emplace_back(decode_element(g.finite_factor(i), j[i], iptr));
  }
  return out;
}

template <class G>
json encode_subset(const Subset<G>& a) {
  json out = json::array();
  for (const auto& x : a.elements()) out.push_back(encode_element(*a.owner(), x));
  return out;
}

// ---------------------------------------------------------------- hex masks

/// Bit i set iff element i is in the set; lowercase hex, no prefix.
inline std::string mask_hex(const Subset<FiniteGroup>& a) {
  const std::size_t n = a.owner()->order();
  std::vector<int> nibbles((n + 3) / 4, 0);
  for (auto x : a.elements()) nibbles[x / 4] |= 1 << (x % 4);
  std::string out;
  for (std::size_t i = nibbles.size(); i-- > 0;) {
    if (out.empty() && nibbles[i] == 0) continue;
    out += "0123456789abcdef"[nibbles[i]];
  }
  return out.empty() ? "0" : out;
}

inline Subset<FiniteGroup> subset_from_hex(const FinitePtr& g, std::string_view hex) {
  if (hex.empty()) throw InvalidArgument("empty hex mask");
  std::vector<E> items;
  const std::size_t len = hex.size();
  for (std::size_t k = 0; k < len; ++k) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(hex[len - 1 - k])));
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else throw InvalidArgument("bad hex digit in mask '" + std::string(hex) + "'");
    for (int b = 0; b < 4; ++b) {
      if (!(v >> b & 1)) continue;
      const std::size_t x = 4 * k + static_cast<std::size_t>(b);
      if (x >= g->order()) throw InvalidArgument("mask '" + std::string(hex) + "' has bits beyond |G|");
      items.push_back(static_cast<E>(x));
    }
  }
  std::sort(items.begin(), items.end());
  return Subset<FiniteGroup>::from_sorted(g, std::move(items));
}

// ---------------------------------------------------------------- subsets

/// Subset of a finite group from {"elements": [...]} or {"mask": "hex"} or
/// {"construction": "cantor", "m": m}.
inline Subset<FiniteGroup> parse_finite_subset(const FinitePtr& g, const json& j, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "subset spec must be an object");
  if (j.contains("elements")) {
    detail::require_object(j, ptr, {"elements"});
    const auto& el = j.at("elements");
    const auto eptr = detail::join_ptr(ptr, "elements");
    if (!el.is_array()) throw SchemaError(eptr, "elements must be an array");
    std::vector<E> items;
    for (std::size_t i = 0; i < el.size(); ++i) items.push_back(decode_element(*g, el[i], detail::join_ptr(eptr, i)));
    return Subset<FiniteGroup>(g, std::move(items));
  }
  if (j.contains("mask")) {
    detail::require_object(j, ptr, {"mask"});
    try {
      return subset_from_hex(g, j.at("mask").get<std::string>());
    } catch (const std::exception& e) {
      throw SchemaError(detail::join_ptr(ptr, "mask"), e.what());
    }
  }
  if (j.contains("construction")) {
    detail::require_object(j, ptr, {"construction", "m"});
    if (j.at("construction") != "cantor")
      throw SchemaError(detail::join_ptr(ptr, "construction"), "finite groups support only the \"cantor\" construction");
    const auto m = detail::read_size(detail::member(j, ptr, "m"), detail::join_ptr(ptr, "m"));
    if (g->kind() != GroupKind::cyclic || g->order() != m)
      throw SchemaError(ptr, "cantor construction needs the cyclic group of order m");
    try {
      const auto c = cantor_analog(m);
      return Subset<FiniteGroup>::from_sorted(g, c.elements());
    } catch (const InvalidArgument& e) {
      throw SchemaError(ptr, e.what());
    }
  }
  throw SchemaError(ptr, "subset spec needs 'elements', 'mask' or 'construction'");
}

inline Subset<LazyGroup> parse_lazy_subset(const LazyPtr& g, const json& j, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "subset spec must be an object");
  if (j.contains("construction")) {
    detail::require_object(j, ptr, {"construction", "N"});
    if (j.at("construction") != "matrix_family" || g->factors().size() != 1)
      throw SchemaError(ptr, "this construction cannot be materialized as an explicit lazy subset");
    const auto n = detail::read_size(detail::member(j, ptr, "N"), detail::join_ptr(ptr, "N"), 1);
    std::vector<LazyElement> items;
    for (const auto& m : MatrixFamily::build(n).generators()) items.push_back({m});
    return Subset<LazyGroup>(g, std::move(items));
  }
  detail::require_object(j, ptr, {"elements"});
  const auto& el = detail::member(j, ptr, "elements");
  const auto eptr = detail::join_ptr(ptr, "elements");
  if (!el.is_array()) throw SchemaError(eptr, "elements must be an array");
  std::vector<LazyElement> items;
  for (std::size_t i = 0; i < el.size(); ++i) items.push_back(decode_element(*g, el[i], detail::join_ptr(eptr, i)));
  return Subset<LazyGroup>(g, std::move(items));
}

// ---------------------------------------------------------------- subgroups

struct SubgroupChoice {
  std::optional<Subset<FiniteGroup>> elements;  // explicit normal subgroup
  std::vector<std::size_t> project;             // or a projection quotient
  SubgroupWeight weight = SubgroupWeight::counting;
};

/// {"elements": [...]} | {"generators": [...]} | {"index": k} | {"project": [kept factors]},
/// each with optional "weight". Elements must already form a normal subgroup.
inline SubgroupChoice parse_subgroup(const GroupSpec& g, const json& j, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "subgroup spec must be an object");
  detail::require_object(j, ptr, {"elements", "generators", "index", "project", "weight"});
  SubgroupChoice out;
  if (j.contains("weight")) {
    if (j.at("weight") == "normalized") out.weight = SubgroupWeight::normalized;
    else if (j.at("weight") != "counting")
      throw SchemaError(detail::join_ptr(ptr, "weight"), "weight must be \"counting\" or \"normalized\"");
  }
  if (j.contains("project")) {
    const auto pptr = detail::join_ptr(ptr, "project");
    if (!j.at("project").is_array()) throw SchemaError(pptr, "project must be an array of factor indices");
    for (std::size_t i = 0; i < j.at("project").size(); ++i)
      out.project.push_back(detail::read_size(j.at("project")[i], detail::join_ptr(pptr, i)));
    return out;
  }
  const auto& fg = g.finite();
  if (j.contains("index")) {
    const auto k = detail::read_size(j.at("index"), detail::join_ptr(ptr, "index"));
    const auto all = normal_subgroups(fg);
    if (k >= all.size())
      throw SchemaError(detail::join_ptr(ptr, "index"), "group has only " + std::to_string(all.size()) + " normal subgroups");
    out.elements = all[k];
    return out;
  }
  if (j.contains("generators")) {
    const auto& gens = j.at("generators");
    const auto gptr = detail::join_ptr(ptr, "generators");
    if (!gens.is_array()) throw SchemaError(gptr, "generators must be an array");
    std::vector<E> items;
    for (std::size_t i = 0; i < gens.size(); ++i) items.push_back(decode_element(*fg, gens[i], detail::join_ptr(gptr, i)));
    out.elements = generated_subgroup(fg, items);
  } else if (j.contains("elements")) {
    out.elements = parse_finite_subset(fg, json{{"elements", j.at("elements")}}, ptr);
  } else {
    throw SchemaError(ptr, "subgroup spec needs 'elements', 'generators', 'index' or 'project'");
  }
  if (!is_subgroup(*out.elements)) throw SchemaError(ptr, "elements do not form a subgroup");
  if (!is_normal(*out.elements)) throw SchemaError(ptr, "subgroup is not normal");
  return out;
}

// ---------------------------------------------------------------- files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- reports

template <class G, class QG>
json fiber_profile_json(const FiberProfile<G, QG>& f) {
  json cosets = json::array();
  std::size_t seq = 0;
  for (const auto& [c, value] : f.support_fibers()) {
    json entry;
    if constexpr (is_finite_group_v<QG>) entry["id"] = c;
    else entry["id"] = seq++;
    entry["coset"] = encode_element(*f.quotient(), c);
    entry["fiber"] = to_pq(value);
    cosets.push_back(std::move(entry));
  }
  return json{{"cosets", cosets}, {"support_size", cosets.size()}};
}

template <class Set, class Encode>
json certificate_json(const ExtractionCertificate<Set>& c, Encode&& encode_set) {
  json trace = json::array();
  for (const auto& t : c.trace)
    trace.push_back(json{{"threshold", rational_json(t.threshold)},
                         {"level_measure", rational_json(t.level_measure)},
                         {"level_square_measure", rational_json(t.level_square_measure)},
                         {"bound", rational_json(t.bound)},
                         {"admissible", t.admissible}});
  json admissible = json::array();
  for (const auto& s : c.admissible_set) admissible.push_back(to_pq(s));
  return json{{"alpha", rational_json(c.alpha)},
              {"K", rational_json(c.K)},
              {"chosen_s", rational_json(c.chosen_s)},
              {"admissible_set", admissible},
              {"measure_ratio", rational_json(c.measure_ratio)},
              {"measure_ratio_floor", rational_json((c.alpha - 1) / c.alpha)},
              {"quotient_doubling", rational_json(c.quotient_doubling)},
              {"doubling_ceiling", rational_json(c.alpha * c.K)},
              {"measure_bound_holds", c.measure_bound_holds()},
              {"doubling_bound_holds", c.doubling_bound_holds()},
              {"B", encode_set(c.B)},
              {"trace", trace}};
}

}  // namespace qdoubling::io
