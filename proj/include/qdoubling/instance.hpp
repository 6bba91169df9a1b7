#pragma once

#include <optional>
#include <string>
#include <variant>

#include "qdoubling/constructions.hpp"
#include "qdoubling/harness.hpp"
#include "qdoubling/io.hpp"

namespace qdoubling::instance {

using io::json;
using harness::InstanceReport;
using harness::Suite;

/// Instance file:
///   {"group": spec, "subgroup": spec, "subset": spec,
///    "companions": {"B": subset, "C": subset, "x": element, "y": element},
///    "suites": "all", "alphas": ["3/2", ...], "meta": {...}}
/// Only group, subgroup and subset are required.
struct FiniteCase {
  FiniteQuotient q;
  Subset<FiniteGroup> a;
  harness::Companions companions;
  SubgroupWeight weight = SubgroupWeight::counting;
  bool projected = false;  // projection quotients cannot be named by an id
};

struct LazyCase {
  LazyQuotient q;
  Subset<LazyGroup> a, b;
};

struct BlockCase {
  std::shared_ptr<const SharpnessInstance> sharp;
};

struct Loaded {
  io::GroupSpec group;
  json canonical;  // normalized instance document
  std::vector<Suite> suites = harness::all_suites();
  std::vector<Rational> alphas = harness::default_alphas();
  std::variant<std::monostate, FiniteCase, LazyCase, BlockCase> body;
};

inline json sharpness_instance_json(const SharpnessParams& p) {
  return json{{"group", json{{"type", "product"},
                             {"factors", json::array({json{{"type", "cyclic"}, {"n", p.h}, {"weight", "normalized"}},
                                                      json{{"type", "gl2z"}},
                                                      json{{"type", "cyclic"}, {"n", p.m}, {"weight", "normalized"}}})}}},
              {"subgroup", json{{"project", json::array({1, 2})}}},
              {"subset", json{{"construction", "sharpness"}, {"N", p.N}, {"h", p.h}, {"m", p.m}}}};
}

namespace detail {

using io::detail::join_ptr;
using io::detail::member;
using io::detail::read_size;

inline SharpnessParams read_sharpness(const json& j, const std::string& ptr) {
  io::detail::require_object(j, ptr, {"construction", "N", "h", "m"});
  return {read_size(member(j, ptr, "N"), join_ptr(ptr, "N"), 1), read_size(member(j, ptr, "h"), join_ptr(ptr, "h"), 2),
          read_size(member(j, ptr, "m"), join_ptr(ptr, "m"), 4)};
}

inline bool is_sharpness(const json& subset) {
  return subset.is_object() && subset.contains("construction") && subset.at("construction") == "sharpness";
}

}  // namespace detail

inline Loaded load(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw SchemaError("", "instance must be an object");
  io::detail::require_object(doc, "", {"group", "subgroup", "subset", "companions", "suites", "alphas", "meta"});
  Loaded out{io::parse_group_any(member(doc, "", "group"), "/group"), json::object(), harness::all_suites(),
             harness::default_alphas(), {}};
  if (doc.contains("suites")) {
    try {
      const auto& s = doc.at("suites");
      std::string joined;
      if (s.is_string()) joined = s.get<std::string>();
      else for (const auto& x : s) joined += (joined.empty() ? "" : ",") + x.get<std::string>();
      out.suites = harness::parse_suites(joined);
    } catch (const std::exception& e) {
      throw SchemaError("/suites", e.what());
    }
  }
  if (doc.contains("alphas")) {
    const auto& a = doc.at("alphas");
    if (!a.is_array() || a.empty()) throw SchemaError("/alphas", "alphas must be a nonempty array");
    out.alphas.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto v = io::read_rational(a[i], join_ptr("/alphas", i));
      if (v <= 1) throw SchemaError(join_ptr("/alphas", i), "alpha must exceed 1");
      out.alphas.push_back(v);
    }
  }
  const auto& sub = member(doc, "", "subgroup");
  const auto& set = member(doc, "", "subset");
  out.canonical = json{{"group", out.group.spec}, {"subgroup", sub}, {"subset", set}};
  if (doc.contains("companions")) out.canonical["companions"] = doc.at("companions");

  if (is_sharpness(set)) {
    const auto p = read_sharpness(set, "/subset");
    // the group must be exactly C_h x GL2(Z) x C_m, normalized, projected onto the last two factors
    const auto expected = sharpness_instance_json(p);
    if (out.group.spec != expected.at("group"))
      throw SchemaError("/group", "sharpness construction needs group " + io::group_short(expected.at("group")));
    if (sub != expected.at("subgroup")) throw SchemaError("/subgroup", "sharpness construction needs {\"project\":[1,2]}");
    if (doc.contains("companions")) throw SchemaError("/companions", "sharpness instances take no companions");
    out.body = BlockCase{std::make_shared<const SharpnessInstance>(build_sharpness_instance(p))};
    return out;
  }

  const auto choice = io::parse_subgroup(out.group, sub, "/subgroup");
  if (out.group.is_lazy()) {
    if (choice.project.empty()) throw SchemaError("/subgroup", "lazy groups need a projection subgroup spec");
    const auto& g = out.group.lazy();
    auto q = projection_quotient(g, choice.project);
    auto a = io::parse_lazy_subset(g, set, "/subset");
    auto b = a;
    if (doc.contains("companions")) {
      const auto& c = doc.at("companions");
      io::detail::require_object(c, "/companions", {"B"});
      if (c.contains("B")) b = io::parse_lazy_subset(g, c.at("B"), "/companions/B");
    }
    if (a.empty() || b.empty()) throw SchemaError("/subset", "subset must be nonempty");
    out.body = LazyCase{std::move(q), std::move(a), std::move(b)};
    return out;
  }

  const auto& g = out.group.finite();
  FiniteQuotient q = choice.project.empty() ? quotient(g, *choice.elements, choice.weight)
                                            : projection_quotient(g, choice.project);
  auto a = io::parse_finite_subset(g, set, "/subset");
  if (a.empty()) throw SchemaError("/subset", "subset must be nonempty");
  harness::Companions comp{a, a, g->identity(), g->identity()};
  if (doc.contains("companions")) {
    const auto& c = doc.at("companions");
    io::detail::require_object(c, "/companions", {"B", "C", "x", "y"});
    if (c.contains("B")) comp.b = io::parse_finite_subset(g, c.at("B"), "/companions/B");
    comp.c = comp.b;
    if (c.contains("C")) comp.c = io::parse_finite_subset(g, c.at("C"), "/companions/C");
    if (c.contains("x")) comp.x = io::decode_element(*g, c.at("x"), "/companions/x");
    if (c.contains("y")) comp.y = io::decode_element(*g, c.at("y"), "/companions/y");
    if (comp.b.empty() || comp.c.empty()) throw SchemaError("/companions", "companion sets must be nonempty");
  }
  out.body = FiniteCase{std::move(q), std::move(a), std::move(comp), choice.weight, !choice.project.empty()};
  return out;
}

inline json block_set_json(const BlockModel& model, const BlockModel::BlockSet& s) {
  json blocks = json::array();
  for (const auto& b : s.blocks)
    blocks.push_back(json{{"h_count", b.h.count()}, {"matrix", io::encode_matrix(b.matrix)}, {"t_count", b.t.count()}});
  return json{{"measure", io::rational_json(model.measure(s))}, {"blocks", blocks}};
}

/// Id for instances the compact form cannot name: the canonical document
/// plus the resolved suites and alphas.
inline std::string inline_id(const Loaded& inst) {
  json doc = inst.canonical;
  doc["suites"] = harness::suites_string(inst.suites);
  json al = json::array();
  for (const auto& a : inst.alphas) al.push_back(to_pq(a));
  doc["alphas"] = al;
  return "instance:" + doc.dump();
}

/// Evaluates every requested suite on a loaded instance.
inline InstanceReport evaluate(const Loaded& inst) {
  if (const auto* f = std::get_if<FiniteCase>(&inst.body)) {
    harness::InstanceSpec spec;
    spec.group = io::group_short(inst.group.spec);
    spec.h = io::mask_hex(f->q.subgroup());
    spec.h_weight = f->weight;
    spec.a = io::mask_hex(f->a);
    spec.b = io::mask_hex(f->companions.b);
    spec.c = io::mask_hex(f->companions.c);
    spec.x = f->companions.x;
    spec.y = f->companions.y;
    spec.suites = inst.suites;
    spec.alphas = inst.alphas;
    auto r = harness::evaluate(f->q, spec, f->a, f->companions);
    if (f->projected) {
      r.id = inline_id(inst);
      r.detail["id"] = r.id;
    }
    return r;
  }
  InstanceReport r;
  r.id = inline_id(inst);
  r.detail["id"] = r.id;
  std::vector<Suite> suites;
  for (auto s : inst.suites)
    if (s != Suite::fact41) suites.push_back(s);
  if (const auto* l = std::get_if<LazyCase>(&inst.body)) {
    r.detail["group"] = l->q.ambient()->name();
    r.detail["order_H"] = r.order_h = l->q.subgroup().size();
    r.detail["size_A"] = r.size_a = l->a.size();
    harness::run_model_suites(make_model(l->q), l->a, l->b, suites, inst.alphas, r,
                              [](const Subset<LazyGroup>& s) { return io::encode_subset(s); });
  } else {
    const auto& b = *std::get<BlockCase>(inst.body).sharp;
    r.detail["group"] = "Z" + std::to_string(b.params.h) + "xGL2ZxZ" + std::to_string(b.params.m);
    r.detail["order_H"] = r.order_h = b.params.h;
    r.detail["size_A"] = r.size_a = b.params.h * b.params.m + b.family.M.size() * b.C.size();
    harness::run_model_suites(b.model, b.A, b.A, suites, inst.alphas, r,
                              [&](const BlockModel::BlockSet& s) { return block_set_json(b.model, s); });
  }
  if (harness::has(inst.suites, Suite::fact41))
    r.detail["suites"]["fact41"] = json{{"applicable", false}, {"reason", "needs an enumerable ambient group"}};
  r.detail["violations"] = r.violations;
  r.detail["pass"] = r.pass();
  return r;
}

// ---------------------------------------------------------------- sharpness report

struct ClosedForms {
  Rational mu_a, mu_pa, mu_pa2, mu_a2;
};

inline ClosedForms sharpness_closed_forms(const SharpnessParams& p) {
  const BigInt N(p.N), h(p.h), m(p.m), c(3 * exact_sqrt(p.m) - 2);
  return {1 + Rational(2 * N * c, h * m), 1 + Rational(2 * N * c, m), Rational(4 * N * N + 1),
          Rational(2 * N + 1) + Rational(4 * N * N - 2 * N, h)};
}

/// Builds and measures the sharpness instance, checking every exact count.
/// `ok` is false if any closed form or theorem check disagrees.
inline json construct_report(const SharpnessParams& p, bool& ok) {
  const auto inst = build_sharpness_instance(p);
  const auto expect = sharpness_closed_forms(p);
  const auto& m = inst.measured;
  const std::size_t diffs = powers_diff_count(p.N), squares = matrix_family_square_count(p.N);
  ok = true;
  auto compare = [&](const Rational& got, const Rational& want) {
    const bool match = got == want;
    ok = ok && match;
    return json{{"measured", io::rational_json(got)}, {"closed_form", io::rational_json(want)}, {"match", match}};
  };
  json thm = json::object();
  for (auto v : {Thm42Variant::symmetric_k2, Thm42Variant::general_k3, Thm42Variant::mixed_k1k2}) {
    const auto t = theorem42_check(m, v);
    ok = ok && t.pass;
    thm[to_string(v)] = json{{"quotient_doubling", io::rational_json(t.quotient_doubling)},
                             {"bound", io::rational_json(t.bound)},
                             {"pass", t.pass}};
  }
  const Rational limit(BigInt(inst.limit_ratio()));
  const Rational nominal_k(BigInt(2 * p.N + 1));
  return json{{"params", json{{"N", p.N}, {"h", p.h}, {"m", p.m}}},
              {"r", inst.r},
              {"cantor_size", inst.C.size()},
              {"counts", json{{"powers_diff", diffs}, {"powers_diff_expected", p.N * (p.N - 1) + 1},
                              {"matrix_square", squares}, {"matrix_square_expected", 4 * p.N * p.N + 1}}},
              {"measures", json{{"mu_A", compare(m.mu_a, expect.mu_a)},
                                {"mu_piA", compare(m.mu_pa, expect.mu_pa)},
                                {"mu_piA2", compare(m.mu_pa2, expect.mu_pa2)},
                                {"mu_A2", compare(m.mu_a2, expect.mu_a2)},
                                {"mu_invA_A", io::rational_json(m.mu_inv_a_a)}}},
              {"K", io::rational_json(inst.K())},
              {"K_nominal", io::rational_json(nominal_k)},
              {"K_relative_error", io::rational_json(abs(inst.K() - nominal_k) / nominal_k)},
              {"quotient_doubling", io::rational_json(inst.quotient_doubling())},
              {"limit", io::rational_json(limit)},
              {"limit_relative_gap", io::rational_json((limit - inst.quotient_doubling()) / limit)},
              {"thm42", thm}};
}

}  // namespace qdoubling::instance
