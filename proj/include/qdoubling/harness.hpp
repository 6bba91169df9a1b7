#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qdoubling/block_model.hpp"
#include "qdoubling/doubling.hpp"
#include "qdoubling/extract.hpp"
#include "qdoubling/fiber.hpp"
#include "qdoubling/io.hpp"

namespace qdoubling::harness {

using io::json;
using E = FiniteGroup::element_type;
using FinitePtr = std::shared_ptr<const FiniteGroup>;

// ---------------------------------------------------------------- suites

enum class Suite { layer_cake, spillover, containment, fact41, thm42_i, thm42_ii, thm42_iii, extract };

inline constexpr Suite kAllSuites[] = {Suite::layer_cake, Suite::spillover, Suite::containment, Suite::fact41,
                                       Suite::thm42_i,    Suite::thm42_ii,  Suite::thm42_iii,   Suite::extract};

inline const char* to_string(Suite s) {
  switch (s) {
    case Suite::layer_cake: return "layer-cake";
    case Suite::spillover: return "spillover";
    case Suite::containment: return "containment";
    case Suite::fact41: return "fact41";
    case Suite::thm42_i: return "thm42-i";
    case Suite::thm42_ii: return "thm42-ii";
    case Suite::thm42_iii: return "thm42-iii";
    case Suite::extract: return "extract";
  }
  return "?";
}

inline std::vector<Suite> all_suites() { return {std::begin(kAllSuites), std::end(kAllSuites)}; }

/// Comma-separated names, or "all". Result is deduplicated in canonical order.
inline std::vector<Suite> parse_suites(std::string_view text) {
  std::vector<bool> on(std::size(kAllSuites), false);
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const auto name = text.substr(start, end - start);
    bool found = false;
    if (name == "all") {
      std::fill(on.begin(), on.end(), true);
      found = true;
    }
    for (std::size_t i = 0; i < std::size(kAllSuites); ++i) {
      if (name == to_string(kAllSuites[i])) {
        on[i] = true;
        found = true;
      }
    }
    if (!found) throw InvalidArgument("unknown suite '" + std::string(name) + "'");
    start = end + 1;
  }
  std::vector<Suite> out;
  for (std::size_t i = 0; i < on.size(); ++i)
    if (on[i]) out.push_back(kAllSuites[i]);
  return out;
}

inline std::string suites_string(const std::vector<Suite>& s) {
  if (s == all_suites()) return "all";
  std::string out;
  for (auto x : s) out += (out.empty() ? "" : ",") + std::string(to_string(x));
  return out;
}

inline bool has(const std::vector<Suite>& s, Suite x) { return std::find(s.begin(), s.end(), x) != s.end(); }

inline std::string compact_rational(const Rational& r) {
  return boost::multiprecision::denominator(r) == 1 ? boost::multiprecision::numerator(r).str() : to_pq(r);
}

inline std::vector<Rational> default_alphas() { return {make_rational(3, 2), Rational(2), Rational(3)}; }

// ---------------------------------------------------------------- catalog

/// Built-in groups in short syntax, counting variants then normalized ones.
inline std::vector<std::string> catalog() {
  std::vector<std::string> base;
  for (int n = 2; n <= 24; ++n) base.push_back("cyclic:" + std::to_string(n));
  for (int n = 2; n <= 8; ++n) base.push_back("dihedral:" + std::to_string(n));
  base.insert(base.end(), {"symmetric:3", "symmetric:4", "quaternion"});
  base.insert(base.end(), {"cyclic:2xcyclic:2",     "cyclic:2xcyclic:2xcyclic:2", "cyclic:4xcyclic:2",
                           "cyclic:3xcyclic:3",     "cyclic:4xcyclic:4",          "symmetric:3xcyclic:2",
                           "symmetric:3xcyclic:3",  "symmetric:3xsymmetric:3",    "dihedral:4xcyclic:2",
                           "dihedral:4xcyclic:3",   "dihedral:4xcyclic:4",        "dihedral:4xsymmetric:3",
                           "quaternionxcyclic:2",   "quaternionxcyclic:3",        "quaternionxcyclic:4",
                           "symmetric:4xcyclic:2",  "dihedral:8xcyclic:2",        "dihedral:5xcyclic:3",
                           "quaternionxsymmetric:3"});
  std::vector<std::string> out = base;
  for (const auto& s : base) {
    // normalized variant: each factor normalized, so the whole group has mass 1
    std::string n;
    std::size_t start = 0;
    while (start <= s.size()) {
      auto end = s.find('x', start);
      if (end == std::string::npos) end = s.size();
      n += (n.empty() ? "" : "x") + s.substr(start, end - start) + ":normalized";
      start = end + 1;
    }
    out.push_back(n);
  }
  return out;
}

// ---------------------------------------------------------------- instance ids

/// Replayable description of one instance: group, normal subgroup H, the set A,
/// companion sets B and C, translations x and y, suites and alpha list.
struct InstanceSpec {
  std::string group;  // short syntax
  std::string h;      // hex mask
  SubgroupWeight h_weight = SubgroupWeight::counting;
  std::string a, b, c;
  E x = 0, y = 0;
  std::vector<Suite> suites = all_suites();
  std::vector<Rational> alphas = default_alphas();

  std::string id() const {
    std::string al;
    for (const auto& r : alphas) al += (al.empty() ? "" : ",") + compact_rational(r);
    return "g=" + group + ";H=" + h + ";w=" + (h_weight == SubgroupWeight::counting ? "c" : "n") + ";A=" + a +
           ";B=" + b + ";C=" + c + ";x=" + std::to_string(x) + ";y=" + std::to_string(y) +
           ";s=" + suites_string(suites) + ";a=" + al;
  }

  static InstanceSpec parse(std::string_view id) {
    std::map<std::string, std::string> fields;
    std::size_t start = 0;
    while (start < id.size()) {
      auto end = id.find(';', start);
      if (end == std::string_view::npos) end = id.size();
      const auto item = id.substr(start, end - start);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw InvalidArgument("malformed instance id field '" + std::string(item) + "'");
      if (!fields.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1))).second)
        throw InvalidArgument("duplicate instance id field '" + std::string(item.substr(0, eq)) + "'");
      start = end + 1;
    }
    auto take = [&](const char* key) {
      auto it = fields.find(key);
      if (it == fields.end()) throw InvalidArgument(std::string("instance id lacks field '") + key + "'");
      auto v = it->second;
      fields.erase(it);
      return v;
    };
    auto number = [](const std::string& s) {
      if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw InvalidArgument("instance id: '" + s + "' is not a number");
      return static_cast<E>(std::stoul(s));
    };
    InstanceSpec out;
    out.group = take("g");
    out.h = take("H");
    const auto w = take("w");
    if (w != "c" && w != "n") throw InvalidArgument("instance id: weight must be c or n");
    out.h_weight = w == "c" ? SubgroupWeight::counting : SubgroupWeight::normalized;
    out.a = take("A");
    out.b = take("B");
    out.c = take("C");
    out.x = number(take("x"));
    out.y = number(take("y"));
    out.suites = parse_suites(take("s"));
    out.alphas.clear();
    const auto al = take("a");
    std::size_t p = 0;
    while (p <= al.size()) {
      auto end = al.find(',', p);
      if (end == std::string::npos) end = al.size();
      out.alphas.push_back(parse_rational(al.substr(p, end - p)));
      p = end + 1;
    }
    if (!fields.empty()) throw InvalidArgument("instance id has unknown field '" + fields.begin()->first + "'");
    return out;
  }
};

// ---------------------------------------------------------------- reports

/// One evaluated instance. `detail` is the full JSON; the other members are
/// the quantities the aggregate and the CSV export need.
struct InstanceReport {
  std::string id;
  std::size_t order_g = 0, order_h = 0, size_a = 0;
  Rational K, K2, quotient_doubling, bound, ratio;
  bool symmetric = false;
  std::vector<std::string> violations;
  json detail;

  bool pass() const { return violations.empty(); }
  Rational margin() const { return bound - quotient_doubling; }
};

namespace detail {

inline json check_json(const Rational& lhs, const char* relation, const Rational& rhs, bool pass) {
  return json{{"lhs", io::rational_json(lhs)}, {"relation", relation}, {"rhs", io::rational_json(rhs)}, {"pass", pass}};
}

}  // namespace detail

/// Runs every model-level suite (all but fact41) and fills `r`.
template <QuotientModel M, class EncodeSet>
void run_model_suites(const M& model, const typename M::set_type& a, const typename M::set_type& b,
                      const std::vector<Suite>& suites, const std::vector<Rational>& alphas, InstanceReport& r,
                      EncodeSet&& encode_set) {
  const auto m = quotient_measures(model, a);
  const auto st = m.stats();
  r.K = st.K;
  r.K2 = st.K2;
  r.symmetric = m.symmetric;
  r.quotient_doubling = m.quotient_doubling();
  r.bound = r.symmetric ? st.K * st.K : st.K * st.K2;
  r.ratio = r.quotient_doubling / (st.K * st.K);

  auto& d = r.detail;
  d["stats"] = json{{"K", io::rational_json(st.K)},
                    {"K1", io::rational_json(st.K1())},
                    {"K2", io::rational_json(st.K2)},
                    {"symmetric", m.symmetric}};
  d["measures"] = json{{"mu_A", io::rational_json(m.mu_a)},
                       {"mu_A2", io::rational_json(m.mu_a2)},
                       {"mu_invA_A", io::rational_json(m.mu_inv_a_a)},
                       {"mu_piA", io::rational_json(m.mu_pa)},
                       {"mu_piA2", io::rational_json(m.mu_pa2)}};
  d["quotient_doubling"] = io::rational_json(r.quotient_doubling);
  d["ratio_to_K2"] = io::rational_json(r.ratio);
  json& out = d["suites"];
  out = json::object();

  auto guard = [&](Suite s, auto&& body) {
    if (!has(suites, s)) return;
    try {
      body();
    } catch (const InternalConsistencyError& e) {
      out[to_string(s)] = json{{"pass", false}, {"error", e.what()}};
      r.violations.push_back(to_string(s));
    }
  };

  guard(Suite::layer_cake, [&] {
    const auto family = model.levels(a);
    const Rational rhs = level_integral(family, [&](std::size_t i) { return model.quotient_measure(family.levels[i]); });
    const bool pass = m.mu_a == rhs;
    json j = detail::check_json(m.mu_a, "==", rhs, pass);
    j["levels"] = family.thresholds.size();
    out["layer-cake"] = std::move(j);
    if (!pass) r.violations.push_back("layer-cake");
  });
  guard(Suite::spillover, [&] {
    const auto s = spillover_check(model, a, b);
    const bool left = s.lhs_left >= s.rhs_left, right = s.lhs_right >= s.rhs_right;
    out["spillover"] = json{{"left", detail::check_json(s.lhs_left, ">=", s.rhs_left, left)},
                            {"right", detail::check_json(s.lhs_right, ">=", s.rhs_right, right)},
                            {"pass", left && right}};
    if (!(left && right)) r.violations.push_back("spillover");
  });
  guard(Suite::containment, [&] {
    const bool pass = containment_check(model, a, b);
    out["containment"] = json{{"pass", pass}};
    if (!pass) r.violations.push_back("containment");
  });
  for (auto [suite, variant] : {std::pair{Suite::thm42_i, Thm42Variant::symmetric_k2},
                                std::pair{Suite::thm42_ii, Thm42Variant::general_k3},
                                std::pair{Suite::thm42_iii, Thm42Variant::mixed_k1k2}}) {
    guard(suite, [&, suite = suite, variant = variant] {
      if (variant == Thm42Variant::symmetric_k2 && !m.symmetric) {
        out[to_string(suite)] = json{{"applicable", false}};
        return;
      }
      const auto t = theorem42_check(m, variant);
      // pass is recomputed from the cross-multiplied sides
      const Rational lhs = m.mu_pa2, rhs = t.bound * m.mu_pa;
      const bool pass = lhs <= rhs;
      json j = detail::check_json(lhs, "<=", rhs, pass);
      j["quotient_doubling"] = io::rational_json(t.quotient_doubling);
      j["bound"] = io::rational_json(t.bound);
      j["margin"] = io::rational_json(t.margin());
      out[to_string(suite)] = std::move(j);
      if (!pass || !t.pass) r.violations.push_back(to_string(suite));
    });
  }
  guard(Suite::extract, [&] {
    json certs = json::array();
    bool pass = true;
    for (const auto& alpha : alphas) {
      const auto c = extract_subset(model, a, alpha);
      pass = pass && c.measure_bound_holds() && c.doubling_bound_holds();
      certs.push_back(io::certificate_json(c, encode_set));
    }
    out["extract"] = json{{"certificates", certs}, {"pass", pass}};
    if (!pass) r.violations.push_back("extract");
  });
}

/// A is a left coset of a subgroup iff a^{-1}A is a subgroup for a in A.
inline bool is_left_coset(const Subset<FiniteGroup>& a) {
  const auto& g = *a.owner();
  return is_subgroup(translate_left(g.inverse(a.elements().front()), a));
}

struct Companions {
  Subset<FiniteGroup> b, c;
  E x, y;
};

/// Full report for a finite instance.
inline InstanceReport evaluate(const FiniteQuotient& q, const InstanceSpec& spec, const Subset<FiniteGroup>& a,
                               const Companions& comp) {
  if (a.empty() || comp.b.empty() || comp.c.empty()) throw InvalidArgument("instance sets must be nonempty");
  InstanceReport r;
  r.id = spec.id();
  r.order_g = q.ambient()->order();
  r.order_h = q.subgroup().size();
  r.size_a = a.size();
  r.detail["id"] = r.id;
  r.detail["group"] = q.ambient()->name();
  r.detail["order_G"] = r.order_g;
  r.detail["order_H"] = r.order_h;
  r.detail["size_A"] = r.size_a;

  const auto model = make_model(q);
  run_model_suites(model, a, comp.b, spec.suites, spec.alphas, r, [](const Subset<FiniteGroup>& s) { return io::mask_hex(s); });

  if (has(spec.suites, Suite::fact41)) {
    const auto daa = ruzsa_sq(a, a).value;
    const bool coset = is_left_coset(a);
    const bool zero_iff = (daa == 1) == coset;
    const auto dab = ruzsa_sq(a, comp.b).value, dba = ruzsa_sq(comp.b, a).value;
    const auto dac = ruzsa_sq(a, comp.c).value, dbc = ruzsa_sq(comp.b, comp.c).value;
    const auto shifted = ruzsa_sq(translate_left(comp.x, a), translate_left(comp.y, comp.b)).value;
    const bool nonneg = dab >= 1, sym = dab == dba, tri = dac <= dab * dbc, trans = shifted == dab;
    r.detail["suites"]["fact41"] = json{
        {"zero_iff_coset", json{{"ruzsa_sq_AA", io::rational_json(daa)}, {"is_coset", coset}, {"pass", zero_iff}}},
        {"nonnegative", detail::check_json(dab, ">=", Rational(1), nonneg)},
        {"symmetry", detail::check_json(dab, "==", dba, sym)},
        {"triangle", detail::check_json(dac, "<=", dab * dbc, tri)},
        {"translation", detail::check_json(shifted, "==", dab, trans)},
        {"pass", zero_iff && nonneg && sym && tri && trans}};
    if (!(zero_iff && nonneg && sym && tri && trans)) r.violations.push_back("fact41");
  }
  r.detail["violations"] = r.violations;
  r.detail["pass"] = r.pass();
  return r;
}

/// Recomputes a report from its id alone.
inline InstanceReport replay(std::string_view id) {
  const auto spec = InstanceSpec::parse(id);
  const auto gs = io::parse_group_any(json(spec.group), "/g");
  const auto& g = gs.finite();
  const auto h = io::subset_from_hex(g, spec.h);
  if (!is_subgroup(h) || !is_normal(h)) throw InvalidArgument("instance id: H is not a normal subgroup");
  const auto q = quotient(g, h, spec.h_weight);
  for (auto v : {spec.x, spec.y})
    if (v >= g->order()) throw InvalidArgument("instance id: translation out of range");
  return evaluate(q, spec, io::subset_from_hex(g, spec.a),
                  {io::subset_from_hex(g, spec.b), io::subset_from_hex(g, spec.c), spec.x, spec.y});
}

// ---------------------------------------------------------------- scan config

enum class ScanMode { exhaustive, random };

struct ScanConfig {
  std::vector<std::string> groups{"catalog"};
  std::string subgroups = "all";  // all | proper | nontrivial | named
  std::vector<json> named_subgroups;
  ScanMode mode = ScanMode::exhaustive;
  bool symmetric_only = false;
  std::optional<std::size_t> size_cap;
  std::size_t trials = 1000;
  std::optional<std::uint64_t> seed;
  std::vector<Suite> suites = all_suites();
  std::vector<Rational> alphas = default_alphas();
  SubgroupWeight subgroup_weight = SubgroupWeight::counting;
  bool emit_instances = true;
  std::size_t max_instances = 2'000'000;

  static ScanConfig from_json(const json& j) {
    using io::detail::join_ptr;
    io::detail::require_object(j, "", {"groups", "subgroups", "mode", "symmetric_only", "size_cap", "trials", "seed",
                                       "suites", "alphas", "subgroup_weight", "emit_instances", "max_instances"});
    ScanConfig c;
    if (j.contains("groups")) {
      const auto& g = j.at("groups");
      c.groups.clear();
      if (g.is_string()) {
        c.groups.push_back(g.get<std::string>());
      } else if (g.is_array()) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (!g[i].is_string() && !g[i].is_object()) throw SchemaError(join_ptr("/groups", i), "expected a group spec");
          c.groups.push_back(g[i].is_string() ? g[i].get<std::string>()
                                              : io::group_short(io::parse_group(g[i], join_ptr("/groups", i)).spec));
        }
      } else {
        throw SchemaError("/groups", "groups must be \"catalog\", a group, or an array of groups");
      }
    }
    if (j.contains("subgroups")) {
      const auto& s = j.at("subgroups");
      if (s.is_string()) {
        c.subgroups = s.get<std::string>();
        if (c.subgroups != "all" && c.subgroups != "proper" && c.subgroups != "nontrivial")
          throw SchemaError("/subgroups", "expected all, proper, nontrivial, or an array of element lists");
      } else if (s.is_array()) {
        c.subgroups = "named";
        for (const auto& x : s) c.named_subgroups.push_back(x);
      } else {
        throw SchemaError("/subgroups", "expected all, proper, nontrivial, or an array of element lists");
      }
    }
    if (j.contains("mode")) {
      if (j.at("mode") == "exhaustive") c.mode = ScanMode::exhaustive;
      else if (j.at("mode") == "random") c.mode = ScanMode::random;
      else throw SchemaError("/mode", "mode must be exhaustive or random");
    }
    if (j.contains("symmetric_only")) {
      if (!j.at("symmetric_only").is_boolean()) throw SchemaError("/symmetric_only", "expected a boolean");
      c.symmetric_only = j.at("symmetric_only").get<bool>();
    }
    if (j.contains("size_cap")) c.size_cap = io::detail::read_size(j.at("size_cap"), "/size_cap", 1);
    if (j.contains("trials")) c.trials = io::detail::read_size(j.at("trials"), "/trials", 1);
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw SchemaError("/seed", "seed must be a non-negative integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("suites")) {
      const auto& s = j.at("suites");
      try {
        if (s.is_string()) {
          c.suites = parse_suites(s.get<std::string>());
        } else if (s.is_array()) {
          std::string joined;
          for (const auto& x : s) joined += (joined.empty() ? "" : ",") + x.get<std::string>();
          c.suites = parse_suites(joined);
        } else {
          throw InvalidArgument("expected a suite list");
        }
      } catch (const std::exception& e) {
        throw SchemaError("/suites", e.what());
      }
    }
    if (j.contains("alphas")) {
      const auto& a = j.at("alphas");
      if (!a.is_array() || a.empty()) throw SchemaError("/alphas", "alphas must be a nonempty array");
      c.alphas.clear();
      for (std::size_t i = 0; i < a.size(); ++i) {
        auto v = io::read_rational(a[i], join_ptr("/alphas", i));
        if (v <= 1) throw SchemaError(join_ptr("/alphas", i), "alpha must exceed 1");
        c.alphas.push_back(v);
      }
    }
    if (j.contains("subgroup_weight")) {
      if (j.at("subgroup_weight") == "counting") c.subgroup_weight = SubgroupWeight::counting;
      else if (j.at("subgroup_weight") == "normalized") c.subgroup_weight = SubgroupWeight::normalized;
      else throw SchemaError("/subgroup_weight", "expected counting or normalized");
    }
    if (j.contains("emit_instances")) {
      if (!j.at("emit_instances").is_boolean()) throw SchemaError("/emit_instances", "expected a boolean");
      c.emit_instances = j.at("emit_instances").get<bool>();
    }
    if (j.contains("max_instances")) c.max_instances = io::detail::read_size(j.at("max_instances"), "/max_instances", 1);
    if (c.mode == ScanMode::random && !c.seed) throw SchemaError("/seed", "random scans require an explicit seed");
    return c;
  }

  /// Resolved configuration as recorded in the report. Thread count is
  /// deliberately absent so reports do not depend on it.
  json to_json() const {
    json j;
    j["groups"] = groups;
    if (subgroups == "named") j["subgroups"] = named_subgroups;
    else j["subgroups"] = subgroups;
    j["mode"] = mode == ScanMode::exhaustive ? "exhaustive" : "random";
    j["symmetric_only"] = symmetric_only;
    j["size_cap"] = size_cap ? json(*size_cap) : json(nullptr);
    if (mode == ScanMode::random) j["trials"] = trials;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["suites"] = suites_string(suites);
    json al = json::array();
    for (const auto& a : alphas) al.push_back(to_pq(a));
    j["alphas"] = al;
    j["subgroup_weight"] = subgroup_weight == SubgroupWeight::counting ? "counting" : "normalized";
    j["emit_instances"] = emit_instances;
    j["max_instances"] = max_instances;
    return j;
  }
};

// ---------------------------------------------------------------- rng

/// splitmix64: tiny, platform-independent, good enough for sampling.
struct SplitMix {
  std::uint64_t state;
  std::uint64_t operator()() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return (*this)() % n; }
};

inline SplitMix instance_rng(std::uint64_t seed, std::uint64_t index) {
  SplitMix s{seed};
  const auto a = s();
  SplitMix t{a ^ (index * 0xD1B54A32D192ED03ULL)};
  t();
  return t;
}

// ---------------------------------------------------------------- scanning

struct PreparedGroup {
  std::string short_form;
  FinitePtr g;
  std::vector<FiniteQuotient> quotients;
  std::vector<std::uint64_t> orbits;  // inverse-pair orbits as masks
};

inline std::uint64_t to_mask(const Subset<FiniteGroup>& s) {
  std::uint64_t m = 0;
  for (auto x : s.elements()) m |= std::uint64_t{1} << x;
  return m;
}

inline Subset<FiniteGroup> from_mask(const FinitePtr& g, std::uint64_t mask) {
  std::vector<E> items;
  for (std::size_t x = 0; x < g->order(); ++x)
    if (mask >> x & 1) items.push_back(static_cast<E>(x));
  return Subset<FiniteGroup>::from_sorted(g, std::move(items));
}

inline std::vector<std::string> expand_groups(const std::vector<std::string>& groups) {
  std::vector<std::string> out;
  for (const auto& g : groups) {
    if (g == "catalog") {
      for (auto& c : catalog()) out.push_back(std::move(c));
    } else {
      out.push_back(io::group_short(io::parse_group_short(g)));
    }
  }
  return out;
}

inline PreparedGroup prepare_group(const std::string& short_form, const ScanConfig& cfg) {
  PreparedGroup p;
  p.short_form = short_form;
  const auto gs = io::parse_group_any(json(short_form), "/groups");
  p.g = gs.finite();
  if (p.g->order() > 64) throw CapExceeded("scan groups are limited to order 64, got " + p.g->name());
  std::vector<Subset<FiniteGroup>> hs;
  if (cfg.subgroups == "named") {
    for (std::size_t i = 0; i < cfg.named_subgroups.size(); ++i) {
      auto choice = io::parse_subgroup(gs, json{{"elements", cfg.named_subgroups[i]}}, "/subgroups/" + std::to_string(i));
      hs.push_back(*choice.elements);
    }
  } else {
    for (auto& h : normal_subgroups(p.g)) {
      const bool trivial = h.size() == 1, full = h.size() == p.g->order();
      if (cfg.subgroups == "proper" && full) continue;
      if (cfg.subgroups == "nontrivial" && (trivial || full)) continue;
      hs.push_back(std::move(h));
    }
  }
  for (const auto& h : hs) p.quotients.push_back(quotient(p.g, h, cfg.subgroup_weight));
  std::vector<bool> seen(p.g->order(), false);
  for (std::size_t x = 0; x < p.g->order(); ++x) {
    if (seen[x]) continue;
    const auto inv = p.g->inverse(static_cast<E>(x));
    seen[x] = seen[inv] = true;
    p.orbits.push_back((std::uint64_t{1} << x) | (std::uint64_t{1} << inv));
  }
  return p;
}

struct Task {
  std::uint32_t group, subgroup;
  std::uint64_t a, b, c;
  E x, y;
};

namespace detail {

inline std::uint64_t sample_mask(SplitMix& rng, std::size_t n, int mode) {
  std::uint64_t m = 0;
  if (mode == 0 || mode == 1) {
    for (std::size_t x = 0; x < n; ++x) {
      const bool keep = mode == 0 ? (rng() & 3) == 0 : (rng() & 1) == 1;
      if (keep) m |= std::uint64_t{1} << x;
    }
  } else {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    const std::size_t k = 1 + rng.below(n);
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(perm[i], perm[i + rng.below(n - i)]);
      m |= std::uint64_t{1} << perm[i];
    }
  }
  if (!m) m = std::uint64_t{1} << rng.below(n);
  return m;
}

inline std::uint64_t symmetrize(const PreparedGroup& p, std::uint64_t m) {
  std::uint64_t out = 0;
  for (auto o : p.orbits)
    if (m & o) out |= o;
  return out;
}

inline void add_companions(Task& t, const PreparedGroup& p, SplitMix& rng) {
  const std::size_t n = p.g->order();
  t.b = sample_mask(rng, n, 1);
  t.c = sample_mask(rng, n, 1);
  t.x = static_cast<E>(rng.below(n));
  t.y = static_cast<E>(rng.below(n));
}

/// Next subset of the same popcount in increasing numeric order (Gosper).
inline bool next_combination(std::uint64_t& v, std::size_t width) {
  const std::uint64_t c = v & (~v + 1);
  const std::uint64_t r = v + c;
  if (r == 0) return false;
  v = (((r ^ v) >> 2) / c) | r;
  return width == 64 || v < (std::uint64_t{1} << width);
}

}  // namespace detail

/// Every instance of the scan in canonical order.
inline std::vector<Task> plan(const std::vector<PreparedGroup>& groups, const ScanConfig& cfg) {
  std::vector<Task> tasks;
  const std::uint64_t seed = cfg.seed.value_or(0);
  auto push = [&](Task t) {
    if (tasks.size() >= cfg.max_instances)
      throw CapExceeded("scan would exceed " + std::to_string(cfg.max_instances) + " instances");
    auto rng = instance_rng(seed, tasks.size());
    detail::add_companions(t, groups[t.group], rng);
    tasks.push_back(t);
  };
  if (cfg.mode == ScanMode::random) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::uint32_t gi = 0; gi < groups.size(); ++gi)
      for (std::uint32_t hi = 0; hi < groups[gi].quotients.size(); ++hi) pairs.emplace_back(gi, hi);
    if (pairs.empty()) throw InvalidArgument("scan selects no (group, subgroup) pairs");
    if (cfg.trials > cfg.max_instances) throw CapExceeded("trials exceed max_instances");
    tasks.reserve(cfg.trials);
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      auto rng = instance_rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL, i);
      const auto [gi, hi] = pairs[rng.below(pairs.size())];
      const auto& p = groups[gi];
      const int sampling = static_cast<int>(rng.below(3));
      auto a = detail::sample_mask(rng, p.g->order(), sampling);
      if (cfg.symmetric_only) a = detail::symmetrize(p, a);
      push(Task{gi, hi, a, 0, 0, 0, 0});
    }
    return tasks;
  }
  for (std::uint32_t gi = 0; gi < groups.size(); ++gi) {
    const auto& p = groups[gi];
    const std::size_t n = p.g->order();
    if (n > 16 && !cfg.size_cap)
      throw CapExceeded("exhaustive scan of " + p.g->name() + " (order " + std::to_string(n) + ") needs size_cap");
    const std::size_t cap = cfg.size_cap.value_or(n);
    // enumerate over orbits (symmetric) or single elements, by count then Gosper order
    const std::size_t width = cfg.symmetric_only ? p.orbits.size() : n;
    auto expand = [&](std::uint64_t sel) {
      if (!cfg.symmetric_only) return sel;
      std::uint64_t m = 0;
      for (std::size_t i = 0; i < width; ++i)
        if (sel >> i & 1) m |= p.orbits[i];
      return m;
    };
    for (std::uint32_t hi = 0; hi < p.quotients.size(); ++hi) {
      if (!cfg.size_cap || cap >= n) {
        // plain bitmask order
        const std::uint64_t end = width == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
        for (std::uint64_t sel = 1;; ++sel) {
          push(Task{gi, hi, expand(sel), 0, 0, 0, 0});
          if (sel == end) break;
        }
        continue;
      }
      for (std::size_t k = 1; k <= std::min(cap, width); ++k) {
        std::uint64_t sel = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
        do {
          const auto m = expand(sel);
          if (static_cast<std::size_t>(std::popcount(m)) <= cap) push(Task{gi, hi, m, 0, 0, 0, 0});
        } while (detail::next_combination(sel, width));
      }
    }
  }
  return tasks;
}

inline InstanceSpec task_spec(const Task& t, const std::vector<PreparedGroup>& groups, const ScanConfig& cfg) {
  const auto& p = groups[t.group];
  const auto& q = p.quotients[t.subgroup];
  InstanceSpec s;
  s.group = p.short_form;
  s.h = io::mask_hex(q.subgroup());
  s.h_weight = cfg.subgroup_weight;
  s.a = io::mask_hex(from_mask(p.g, t.a));
  s.b = io::mask_hex(from_mask(p.g, t.b));
  s.c = io::mask_hex(from_mask(p.g, t.c));
  s.x = t.x;
  s.y = t.y;
  s.suites = cfg.suites;
  s.alphas = cfg.alphas;
  return s;
}

inline InstanceReport run_task(const Task& t, const std::vector<PreparedGroup>& groups, const ScanConfig& cfg) {
  const auto& p = groups[t.group];
  return evaluate(p.quotients[t.subgroup], task_spec(t, groups, cfg), from_mask(p.g, t.a),
                  {from_mask(p.g, t.b), from_mask(p.g, t.c), t.x, t.y});
}

/// Evaluates f(0..n-1) on `threads` workers; results land at their index so
/// the outcome does not depend on scheduling. The lowest-index exception wins.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, std::size_t threads, F&& f) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct Witness {
  Rational ratio;
  std::size_t index;
  std::string id;
};

/// Deterministic fold over reports in instance order.
struct Aggregate {
  std::size_t instances = 0, passed = 0, symmetric_instances = 0;
  std::map<std::string, std::size_t> suite_failures;
  std::vector<json> violations;
  std::vector<Witness> top_symmetric, top_all;
  std::vector<json> reports;
  std::vector<std::string> csv_rows;

  static void offer(std::vector<Witness>& top, Witness w) {
    top.push_back(std::move(w));
    std::sort(top.begin(), top.end(), [](const Witness& x, const Witness& y) {
      if (x.ratio != y.ratio) return x.ratio > y.ratio;
      return x.index < y.index;
    });
    if (top.size() > 10) top.pop_back();
  }

  void add(InstanceReport r, std::size_t index, bool keep_report, bool keep_csv);

  json to_json() const {
    auto witnesses = [](const std::vector<Witness>& top) {
      json arr = json::array();
      for (const auto& w : top)
        arr.push_back(json{{"index", w.index}, {"id", w.id}, {"ratio", io::rational_json(w.ratio)}});
      return arr;
    };
    json fails = json::object();
    for (const auto& [k, v] : suite_failures) fails[k] = v;
    return json{{"instances", instances},
                {"passed", passed},
                {"violation_count", violations.size()},
                {"suite_failures", fails},
                {"symmetric_instances", symmetric_instances},
                {"max_symmetric_ratio", top_symmetric.empty() ? json(nullptr) : io::rational_json(top_symmetric.front().ratio)},
                {"max_ratio", top_all.empty() ? json(nullptr) : io::rational_json(top_all.front().ratio)},
                {"top_symmetric", witnesses(top_symmetric)},
                {"top_all", witnesses(top_all)},
                {"violations", violations}};
  }
};

inline std::string csv_header() {
  return "# lossy export: decimal approximations only, the JSON report is authoritative\n"
         "instance_id,order_G,order_H,size_A,K,K2,quotient_doubling,bound,margin\n";
}

inline std::string csv_row(const InstanceReport& r) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << '"' << r.id << "\"," << r.order_g << ',' << r.order_h << ',' << r.size_a << ',' << to_double(r.K) << ','
      << to_double(r.K2) << ',' << to_double(r.quotient_doubling) << ',' << to_double(r.bound) << ','
      << to_double(r.margin()) << '\n';
  return out.str();
}

inline void Aggregate::add(InstanceReport r, std::size_t index, bool keep_report, bool keep_csv) {
  ++instances;
  if (r.pass()) ++passed;
  for (const auto& v : r.violations) ++suite_failures[v];
  if (!r.pass()) violations.push_back(json{{"index", index}, {"id", r.id}, {"suites", r.violations}});
  if (r.symmetric) {
    ++symmetric_instances;
    offer(top_symmetric, {r.ratio, index, r.id});
  }
  offer(top_all, {r.ratio, index, r.id});
  if (keep_csv) csv_rows.push_back(csv_row(r));
  if (keep_report) reports.push_back(std::move(r.detail));
}

struct ScanResult {
  json report;
  std::string csv;
  bool clean = true;
};

/// Runs a scan. `threads` only affects speed: the report is identical for any value.
inline ScanResult scan(const ScanConfig& cfg, std::size_t threads, bool want_csv = false,
                       const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  std::vector<PreparedGroup> groups;
  for (const auto& g : expand_groups(cfg.groups)) groups.push_back(prepare_group(g, cfg));
  const auto tasks = plan(groups, cfg);
  Aggregate agg;
  constexpr std::size_t kBlock = 4096;
  for (std::size_t start = 0; start < tasks.size(); start += kBlock) {
    const std::size_t n = std::min(kBlock, tasks.size() - start);
    auto block = parallel_map<InstanceReport>(n, threads, [&](std::size_t i) { return run_task(tasks[start + i], groups, cfg); });
    for (std::size_t i = 0; i < n; ++i) agg.add(std::move(block[i]), start + i, cfg.emit_instances, want_csv);
    if (progress) progress(start + n, tasks.size());
  }
  ScanResult out;
  out.clean = agg.violations.empty();
  json groups_json = json::array();
  for (const auto& g : groups)
    groups_json.push_back(json{{"group", g.short_form}, {"order", g.g->order()}, {"subgroups", g.quotients.size()}});
  out.report = json{{"config", cfg.to_json()}, {"groups", groups_json}, {"aggregate", agg.to_json()}};
  if (cfg.emit_instances) out.report["instances"] = std::move(agg.reports);
  if (want_csv) {
    out.csv = csv_header();
    for (const auto& row : agg.csv_rows) out.csv += row;
  }
  return out;
}

}  // namespace qdoubling::harness
