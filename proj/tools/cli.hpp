#pragma once

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qdoubling/instance.hpp"

namespace qdoubling::cli {

using io::json;

enum Exit : int { kPass = 0, kUsage = 1, kViolation = 2 };

namespace detail {

/// Explicit flag, then QDOUBLING_THREADS, then the hardware.
inline std::size_t resolve_threads(std::size_t flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("QDOUBLING_THREADS"); env && *env) {
    const std::string s(env);
    if (s.find_first_not_of("0123456789") != std::string::npos || std::stoul(s) == 0)
      throw InvalidArgument("QDOUBLING_THREADS must be a positive integer, got '" + s + "'");
    return std::stoul(s);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void emit(const json& doc, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") out << io::dump(doc);
  else io::write_text(path, io::dump(doc));
}

inline json with_command(const char* name, const json& body) {
  json out{{"command", name}};
  for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
  return out;
}

/// Group given as short syntax or inline JSON.
inline json group_arg(const std::string& text) {
  if (!text.empty() && text.front() == '{') return json::parse(text);
  return json(text);
}

/// "0,1,2" or JSON (an array becomes an element list, an object is passed through).
inline json set_arg(const std::string& text, const char* what) {
  if (!text.empty() && (text.front() == '[' || text.front() == '{')) {
    auto j = json::parse(text);
    return j.is_array() ? json{{"elements", j}} : j;
  }
  json elems = json::array();
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
      throw InvalidArgument(std::string(what) + ": '" + item + "' is not an element index");
    elems.push_back(std::stoul(item));
  }
  return json{{"elements", elems}};
}

inline std::vector<Rational> alpha_args(const std::vector<std::string>& raw) {
  std::vector<Rational> out;
  for (const auto& a : raw) {
    const auto v = parse_rational(a);
    if (v <= 1) throw InvalidArgument("alpha must exceed 1, got " + a);
    out.push_back(v);
  }
  return out;
}

inline json alphas_json(const std::vector<Rational>& alphas) {
  json out = json::array();
  for (const auto& a : alphas) out.push_back(to_pq(a));
  return out;
}

inline int status(bool clean) { return clean ? kPass : kViolation; }

}  // namespace detail

// ---------------------------------------------------------------- options

struct VerifyOptions {
  std::string group, instance, suite = "all", subgroups = "all", out, csv;
  std::vector<std::string> alphas;
  std::optional<std::size_t> size_cap, trials;
  std::optional<std::uint64_t> seed;
  bool symmetric_only = false, emit_instances = false;
  std::size_t threads = 0;
};

struct ConstructOptions {
  std::size_t N = 0, h = 0, m = 0;
  std::string emit, out;
};

struct ExtractOptions {
  std::string instance, group, subgroup, subset, out, trace;
  std::vector<std::string> alphas;
};

struct ScanOptions {
  std::string config, out, csv;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  bool progress = false;
};

struct ReplayOptions {
  std::string id, report, instance, out;
};

// ---------------------------------------------------------------- commands

inline int verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  if (!o.instance.empty()) {
    auto inst = instance::load(io::read_json_file(o.instance));
    if (o.suite != "all") inst.suites = harness::parse_suites(o.suite);
    if (!o.alphas.empty()) inst.alphas = detail::alpha_args(o.alphas);
    const auto r = instance::evaluate(inst);
    json cfg{{"instance", o.instance}, {"suites", harness::suites_string(inst.suites)},
             {"alphas", detail::alphas_json(inst.alphas)}};
    detail::emit(json{{"command", "verify"}, {"config", cfg}, {"instance", inst.canonical}, {"report", r.detail}},
                 o.out, out);
    if (!r.pass()) err << "THEOREM-VIOLATION in " << r.id << "\n";
    return detail::status(r.pass());
  }

  json cfg{{"groups", json::array({detail::group_arg(o.group)})}, {"subgroups", o.subgroups},
           {"symmetric_only", o.symmetric_only}, {"suites", o.suite}, {"emit_instances", o.emit_instances}};
  if (!o.alphas.empty()) cfg["alphas"] = detail::alphas_json(detail::alpha_args(o.alphas));
  if (o.size_cap) cfg["size_cap"] = *o.size_cap;
  // small groups are enumerated; larger ones are sampled unless a size cap bounds the enumeration
  const auto order = io::parse_group_any(cfg["groups"][0], "/group").finite()->order();
  const bool random = o.trials || (order > 16 && !o.size_cap && !o.symmetric_only);
  if (random) {
    if (!o.seed) throw InvalidArgument("--seed is required when sampling (group order " + std::to_string(order) + ")");
    cfg["mode"] = "random";
    cfg["trials"] = o.trials.value_or(1000);
  }
  if (o.seed) cfg["seed"] = *o.seed;
  const auto sc = harness::ScanConfig::from_json(cfg);
  const auto threads = detail::resolve_threads(o.threads);
  err << "verify: " << sc.to_json().dump() << " threads=" << threads << "\n";
  const auto res = harness::scan(sc, threads, !o.csv.empty());
  detail::emit(detail::with_command("verify", res.report), o.out, out);
  if (!o.csv.empty()) io::write_text(o.csv, res.csv);
  if (!res.clean)
    err << "THEOREM-VIOLATION: " << res.report.at("aggregate").at("violation_count") << " instance(s), see report\n";
  return detail::status(res.clean);
}

inline int construct(const ConstructOptions& o, std::ostream& out, std::ostream& err) {
  const SharpnessParams p{o.N, o.h, o.m};
  validate(p);
  bool ok = true;
  auto body = instance::construct_report(p, ok);
  json report{{"command", "construct"}, {"config", json{{"N", o.N}, {"h", o.h}, {"m", o.m}}}};
  for (auto it = body.begin(); it != body.end(); ++it) report[it.key()] = it.value();
  report["pass"] = ok;
  if (!o.emit.empty()) {
    json inst = instance::sharpness_instance_json(p);
    inst["meta"] = json{{"note", "sharpness construction"}, {"quotient_doubling", report.at("quotient_doubling")}};
    io::write_text(o.emit, io::dump(inst));
    report["emitted"] = o.emit;
  }
  detail::emit(report, o.out, out);
  if (!ok) err << "THEOREM-VIOLATION: construction does not match its closed forms\n";
  return detail::status(ok);
}

namespace detail {

template <class Model, class Set, class Encode>
json extract_all(const Model& model, const Set& a, const std::vector<Rational>& alphas, Encode&& encode, bool& ok,
                 std::ostream* trace) {
  json certs = json::array();
  for (const auto& alpha : alphas) {
    const auto c = extract_subset(model, a, alpha);
    ok = ok && c.measure_bound_holds() && c.doubling_bound_holds();
    certs.push_back(io::certificate_json(c, encode));
    if (!trace) continue;
    auto& t = *trace;
    t << "alpha = " << to_pq(c.alpha) << ", K = " << to_pq(c.K) << "\n";
    t << "  S is the set of s with mu_Q(piA_s piA_s) < alpha K mu_Q(piA_s):\n";
    for (const auto& row : c.trace)
      t << "    s = " << to_pq(row.threshold) << ": " << to_pq(row.level_square_measure)
        << (row.admissible ? " < " : " >= ") << to_pq(row.bound) << (row.admissible ? "  in S" : "") << "\n";
    t << "  chosen s = " << to_pq(c.chosen_s) << "\n";
    t << "  mu(B)/mu(A) = " << to_pq(c.measure_ratio) << " > " << to_pq((c.alpha - 1) / c.alpha) << "\n";
    t << "  mu_Q(piB^2)/mu_Q(piB) = " << to_pq(c.quotient_doubling) << " < " << to_pq(c.alpha * c.K) << "\n";
  }
  return certs;
}

}  // namespace detail

inline int extract(const ExtractOptions& o, std::ostream& out, std::ostream& err) {
  json doc;
  if (!o.instance.empty()) {
    if (!o.group.empty() || !o.subgroup.empty() || !o.subset.empty())
      throw InvalidArgument("--instance excludes --group/--subgroup/--subset");
    doc = io::read_json_file(o.instance);
  } else {
    if (o.group.empty() || o.subset.empty()) throw InvalidArgument("extract needs --instance or --group and --subset");
    doc = json{{"group", detail::group_arg(o.group)},
               {"subgroup", o.subgroup.empty() ? json{{"index", 0}} : detail::set_arg(o.subgroup, "--subgroup")},
               {"subset", detail::set_arg(o.subset, "--subset")}};
  }
  const auto inst = instance::load(doc);
  const auto alphas = detail::alpha_args(o.alphas);

  std::ostringstream trace_text;
  std::ostream* trace = o.trace.empty() ? nullptr : &trace_text;
  bool ok = true;
  json certs;
  if (const auto* f = std::get_if<instance::FiniteCase>(&inst.body)) {
    certs = detail::extract_all(make_model(f->q), f->a, alphas,
                                [](const Subset<FiniteGroup>& s) { return io::encode_subset(s); }, ok, trace);
  } else if (const auto* l = std::get_if<instance::LazyCase>(&inst.body)) {
    certs = detail::extract_all(make_model(l->q), l->a, alphas,
                                [](const Subset<LazyGroup>& s) { return io::encode_subset(s); }, ok, trace);
  } else {
    const auto& b = *std::get<instance::BlockCase>(inst.body).sharp;
    certs = detail::extract_all(
        b.model, b.A, alphas, [&](const BlockModel::BlockSet& s) { return instance::block_set_json(b.model, s); }, ok,
        trace);
  }
  json cfg{{"source", o.instance.empty() ? "inline" : o.instance}, {"alphas", detail::alphas_json(alphas)}};
  detail::emit(json{{"command", "extract"}, {"config", cfg}, {"instance", inst.canonical}, {"certificates", certs},
                    {"pass", ok}},
               o.out, out);
  if (trace) {
    if (o.trace == "-") err << trace_text.str();
    else io::write_text(o.trace, trace_text.str());
  }
  if (!ok) err << "THEOREM-VIOLATION: extraction certificate fails a bound\n";
  return detail::status(ok);
}

inline int scan(const ScanOptions& o, std::ostream& out, std::ostream& err) {
  auto doc = io::read_json_file(o.config);
  if (o.seed) {
    if (!doc.is_object()) throw SchemaError("", "scan config must be an object");
    doc["seed"] = *o.seed;
  }
  const auto cfg = harness::ScanConfig::from_json(doc);
  const auto threads = detail::resolve_threads(o.threads);
  err << "scan: " << cfg.to_json().dump() << " threads=" << threads << "\n";
  std::function<void(std::size_t, std::size_t)> progress;
  if (o.progress) progress = [&](std::size_t done, std::size_t total) { err << "  " << done << "/" << total << "\n"; };
  const auto res = harness::scan(cfg, threads, !o.csv.empty(), progress);
  detail::emit(detail::with_command("scan", res.report), o.out, out);
  if (!o.csv.empty()) io::write_text(o.csv, res.csv);
  if (!res.clean) {
    err << "THEOREM-VIOLATION on proved statements:\n";
    for (const auto& v : res.report.at("aggregate").at("violations")) err << "  " << v.dump() << "\n";
  }
  return detail::status(res.clean);
}

namespace detail {

inline harness::InstanceReport replay_id(const std::string& id) {
  static constexpr std::string_view kInline = "instance:";
  if (id.starts_with(kInline)) return instance::evaluate(instance::load(json::parse(id.substr(kInline.size()))));
  return harness::replay(id);
}

}  // namespace detail

inline int replay(const ReplayOptions& o, std::ostream& out, std::ostream& err) {
  const int given = !o.id.empty() + !o.report.empty() + !o.instance.empty();
  if (given != 1) throw InvalidArgument("replay needs exactly one of --id, --report, --instance");

  if (!o.id.empty()) {
    const auto r = detail::replay_id(o.id);
    detail::emit(json{{"command", "replay"}, {"config", json{{"id", o.id}}}, {"report", r.detail}}, o.out, out);
    return detail::status(r.pass());
  }

  if (!o.instance.empty()) {
    const auto doc = io::read_json_file(o.instance);
    const auto inst = instance::load(doc);
    const auto r = instance::evaluate(inst);
    json result{{"command", "replay"}, {"config", json{{"instance", o.instance}}}, {"report", r.detail}};
    bool ok = r.pass();
    if (const auto* b = std::get_if<instance::BlockCase>(&inst.body)) {
      // measures recomputed through the suites must agree with the construction's closed forms
      const auto expect = instance::sharpness_closed_forms(b->sharp->params);
      const auto& got = r.detail.at("measures");
      json checks = json::object();
      auto check = [&](const char* key, const Rational& want) {
        const bool match = io::read_rational(got.at(key), "/measures") == want;
        ok = ok && match;
        checks[key] = json{{"replayed", got.at(key)}, {"closed_form", io::rational_json(want)}, {"match", match}};
      };
      check("mu_A", expect.mu_a);
      check("mu_A2", expect.mu_a2);
      check("mu_piA", expect.mu_pa);
      check("mu_piA2", expect.mu_pa2);
      result["closed_forms"] = checks;
    }
    result["pass"] = ok;
    detail::emit(result, o.out, out);
    if (!ok) err << "replay of " << o.instance << " disagrees with its expected values\n";
    return detail::status(ok);
  }

  const auto doc = io::read_json_file(o.report);
  std::vector<std::string> mismatches;
  std::size_t replayed = 0;
  bool clean = true;
  auto compare = [&](const json& stored) {
    const auto id = stored.at("id").get<std::string>();
    const auto r = detail::replay_id(id);
    ++replayed;
    clean = clean && r.pass();
    if (r.detail.dump() != stored.dump()) mismatches.push_back(id);
  };
  if (doc.contains("instances"))
    for (const auto& inst : doc.at("instances")) compare(inst);
  if (doc.contains("report")) compare(doc.at("report"));
  if (doc.contains("aggregate")) {
    // witnesses carry only ratios; recheck those against a fresh evaluation
    const auto& agg = doc.at("aggregate");
    for (const char* key : {"top_symmetric", "top_all"})
      for (const auto& w : agg.at(key)) {
        const auto id = w.at("id").get<std::string>();
        const auto r = detail::replay_id(id);
        ++replayed;
        if (io::rational_json(r.ratio) != w.at("ratio")) mismatches.push_back(id);
      }
  }
  if (doc.value("command", "") == "construct") {
    const auto& c = doc.at("config");
    bool ok = true;
    auto fresh = json{{"command", "construct"}, {"config", c}};
    const SharpnessParams p{c.at("N").get<std::size_t>(), c.at("h").get<std::size_t>(), c.at("m").get<std::size_t>()};
    const auto body = instance::construct_report(p, ok);
    for (auto it = body.begin(); it != body.end(); ++it) fresh[it.key()] = it.value();
    fresh["pass"] = ok;
    if (doc.contains("emitted")) fresh["emitted"] = doc.at("emitted");
    ++replayed;
    clean = clean && ok;
    if (fresh.dump() != doc.dump()) mismatches.push_back("construct");
  }
  if (replayed == 0) throw SchemaError("", "report holds nothing replayable");
  detail::emit(json{{"command", "replay"}, {"config", json{{"report", o.report}}}, {"replayed", replayed},
                    {"mismatches", mismatches}, {"pass", mismatches.empty() && clean}},
               o.out, out);
  for (const auto& m : mismatches) err << "replay mismatch: " << m << "\n";
  return detail::status(mismatches.empty() && clean);
}

// ---------------------------------------------------------------- entry point

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Quotient doubling toolkit: verify, construct, extract, scan, replay"};
  app.require_subcommand(1);

  VerifyOptions vo;
  auto* v = app.add_subcommand("verify", "Run the check suites on a group or an instance file");
  auto* vg = v->add_option("--group", vo.group, "Group in short syntax (cyclic:12, dihedral:4xcyclic:3) or JSON");
  auto* vi = v->add_option("--instance", vo.instance, "Instance JSON file")->check(CLI::ExistingFile);
  vg->excludes(vi);
  v->add_option("--suite", vo.suite, "all, or a comma list of suites")->capture_default_str();
  v->add_option("--subgroups", vo.subgroups, "all | proper | nontrivial")
      ->check(CLI::IsMember({"all", "proper", "nontrivial"}))
      ->capture_default_str();
  v->add_flag("--symmetric-only", vo.symmetric_only, "Only symmetric subsets");
  v->add_option("--size-cap", vo.size_cap, "Enumerate subsets up to this size");
  v->add_option("--trials", vo.trials, "Random subsets per group (switches to sampling)");
  v->add_option("--seed", vo.seed, "Seed for sampling");
  v->add_option("--alpha", vo.alphas, "Extraction alphas as p/q")->delimiter(',');
  v->add_flag("--emit-instances", vo.emit_instances, "Embed every instance report");
  v->add_option("--threads", vo.threads, "Worker threads (default: QDOUBLING_THREADS or hardware)");
  v->add_option("--out", vo.out, "Report path (default stdout)");
  v->add_option("--csv", vo.csv, "CSV export path");

  ConstructOptions co;
  auto* c = app.add_subcommand("construct", "Build and measure the sharpness construction");
  c->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  c->add_option("--N", co.N, "Matrix family size")->required()->check(CLI::PositiveNumber);
  c->add_option("--h", co.h, "Order of the finite factor H")->required();
  c->add_option("--m", co.m, "Torus discretization, a perfect square")->required();
  c->add_option("--emit", co.emit, "Write a loadable instance file");
  c->add_option("--out", co.out, "Report path (default stdout)");

  ExtractOptions eo;
  auto* e = app.add_subcommand("extract", "Extract a large subset with small quotient doubling");
  e->add_option("--alpha", eo.alphas, "alpha > 1 as p/q, repeatable or comma separated")->required()->delimiter(',');
  e->add_option("--instance", eo.instance, "Instance JSON file")->check(CLI::ExistingFile);
  e->add_option("--group", eo.group, "Group in short syntax or JSON");
  e->add_option("--subgroup", eo.subgroup, "Normal subgroup: element indices 0,6 or a JSON spec");
  e->add_option("--subset", eo.subset, "Subset: element indices 0,1,2 or a JSON spec");
  e->add_option("--trace", eo.trace, "Write a readable proof trace to this path ('-' for stderr)");
  e->add_option("--out", eo.out, "Report path (default stdout)");

  ScanOptions so;
  auto* s = app.add_subcommand("scan", "Search harness over a configured catalog");
  s->add_option("--config", so.config, "Scan config JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out", so.out, "Report path (default stdout)");
  s->add_option("--csv", so.csv, "CSV export path");
  s->add_option("--seed", so.seed, "Seed (overrides the config)");
  s->add_option("--threads", so.threads, "Worker threads (default: QDOUBLING_THREADS or hardware)");
  s->add_flag("--progress", so.progress, "Progress lines on stderr");

  ReplayOptions ro;
  auto* r = app.add_subcommand("replay", "Recompute reports and compare");
  r->add_option("--id", ro.id, "Instance id");
  r->add_option("--report", ro.report, "Report file whose instances are re-evaluated")->check(CLI::ExistingFile);
  r->add_option("--instance", ro.instance, "Instance file, e.g. one written by construct --emit")
      ->check(CLI::ExistingFile);
  r->add_option("--out", ro.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << "\n";
    return kUsage;
  }

  try {
    if (*v) {
      if (vo.group.empty() && vo.instance.empty()) throw InvalidArgument("verify needs --group or --instance");
      return verify(vo, out, err);
    }
    if (*c) return construct(co, out, err);
    if (*e) return extract(eo, out, err);
    if (*s) return scan(so, out, err);
    return replay(ro, out, err);
  } catch (const SchemaError& ex) {
    err << "schema error: " << ex.what() << "\n";
    return kUsage;
  } catch (const InternalConsistencyError& ex) {
    err << "THEOREM-VIOLATION: " << ex.what() << "\n";
    return kViolation;
  } catch (const json::exception& ex) {
    err << "error: malformed JSON: " << ex.what() << "\n";
    return kUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  }
}

}  // namespace qdoubling::cli
