#include "polyjoin/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "polyjoin/averaging.hpp"
#include "polyjoin/errors.hpp"
#include "polyjoin/joinings.hpp"
#include "polyjoin/records.hpp"
#include "polyjoin/seminorms.hpp"
#include "polyjoin/sequences.hpp"

namespace polyjoin::app {

ConfigError::ConfigError(const std::string& msg, int line_, int column_)
    : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ", column " + std::to_string(column_) +
                                         ": " + msg
                                   : msg),
      line(line_),
      column(column_) {}

namespace {

using YAML::Node;
using Library = std::map<std::string, Observable>;

[[noreturn]] void fail(const Node& n, const std::string& msg) {
  const YAML::Mark m = n.Mark();
  throw ConfigError(msg, m.line + 1, m.column + 1);
}

template <class T>
T as(const Node& n, const std::string& what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, "expected " + what);
  }
}

Node req(const Node& parent, const std::string& key) {
  if (!parent.IsMap()) fail(parent, "expected a mapping");
  const Node v = parent[key];
  if (!v) fail(parent, "missing key '" + key + "'");
  return v;
}

template <class T>
T get(const Node& parent, const std::string& key, T fallback, const std::string& what) {
  const Node v = parent[key];
  if (!v) return fallback;
  return as<T>(v, what);
}

void only_keys(const Node& n, const std::set<std::string>& allowed) {
  if (!n.IsMap()) fail(n, "expected a mapping");
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "'");
  }
}

nlohmann::json to_canonical(const Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& kv : n) j[kv.first.as<std::string>()] = to_canonical(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& v : n) j.push_back(to_canonical(v));
      return j;
    }
    case YAML::NodeType::Scalar:
      return n.Scalar();
    default:
      return nullptr;
  }
}

// --- literals ---------------------------------------------------------------

Integer big_integer(const Node& n) {
  try {
    return parse_integer(n.Scalar());
  } catch (const std::exception& e) {
    fail(n, std::string("expected an integer: ") + e.what());
  }
}

u128 hex_u128(const Node& n) {
  try {
    return parse_hex_u128(n.Scalar());
  } catch (const std::exception& e) {
    fail(n, std::string("expected a hex constant: ") + e.what());
  }
}

SystemSpec parse_system(const Node& n) {
  try {
    const std::string kind = n.IsScalar() ? n.Scalar() : as<std::string>(req(n, "kind"), "a system kind");
    if (n.IsMap()) only_keys(n, {"kind", "modulus", "step", "width", "alpha", "lookahead"});
    const Node empty;
    const Node& m = n.IsMap() ? n : empty;
    auto alpha128 = [&]() -> std::optional<u128> {
      if (!m.IsMap() || !m["alpha"]) return std::nullopt;
      return hex_u128(m["alpha"]);
    };
    if (kind == "cyclic" || kind == "CyclicRotation") {
      return SystemSpec::cyclic(as<std::uint64_t>(req(n, "modulus"), "a positive modulus"),
                                get<std::int64_t>(n, "step", 1, "an integer step"));
    }
    if (kind == "torus" || kind == "TorusRotation") {
      return SystemSpec::torus(m.IsMap() ? get<int>(m, "width", 128, "a bit width") : 128, alpha128());
    }
    if (kind == "skew" || kind == "SkewProduct") {
      return SystemSpec::skew(m.IsMap() ? get<int>(m, "width", 128, "a bit width") : 128, alpha128());
    }
    if (kind == "bernoulli" || kind == "BernoulliShift") return SystemSpec::bernoulli();
    if (kind == "circle" || kind == "CircleBitstream") {
      std::optional<UInt256> alpha;
      if (m.IsMap() && m["alpha"]) {
        try {
          alpha = parse_hex_u256(m["alpha"].Scalar());
        } catch (const std::exception& e) {
          fail(m["alpha"], std::string("expected a hex constant: ") + e.what());
        }
      }
      return SystemSpec::circle_bitstream(m.IsMap() ? get<int>(m, "lookahead", 64, "a lookahead") : 64, alpha);
    }
    fail(n, "unknown system kind '" + kind + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(n, e.what());
  }
}

Observable parse_observable_def(const Node& n) {
  const std::string type = as<std::string>(req(n, "type"), "an observable type");
  try {
    if (type == "constant") {
      only_keys(n, {"type", "value"});
      return Observable::constant(as<double>(req(n, "value"), "a number"));
    }
    if (type == "cosine") {
      only_keys(n, {"type", "frequency", "coefficient", "coordinate"});
      return Observable::cosine(get<std::int64_t>(n, "frequency", 1, "an integer frequency"),
                                get<double>(n, "coefficient", 1.0, "a number"),
                                get<int>(n, "coordinate", 0, "a coordinate index"));
    }
    if (type == "trig") {
      only_keys(n, {"type", "constant", "terms", "coordinate"});
      TrigPoly p;
      p.constant = get<double>(n, "constant", 0.0, "a number");
      p.coordinate = get<int>(n, "coordinate", 0, "a coordinate index");
      if (const Node ts = n["terms"]) {
        if (!ts.IsSequence()) fail(ts, "expected a list of terms");
        for (const auto& t : ts) {
          only_keys(t, {"frequency", "coefficient", "phase"});
          p.terms.push_back(TrigTerm{as<std::int64_t>(req(t, "frequency"), "an integer frequency"),
                                     as<double>(req(t, "coefficient"), "a number"),
                                     get<double>(t, "phase", 0.0, "a phase in turns")});
        }
      }
      return Observable::trig(std::move(p));
    }
    if (type == "indicator") {
      only_keys(n, {"type", "members"});
      return Observable::indicator(as<std::vector<std::uint64_t>>(req(n, "members"), "a list of residues"));
    }
    if (type == "bitword") {
      only_keys(n, {"type", "width", "table"});
      return Observable::bitword(as<int>(req(n, "width"), "a width"),
                                 as<std::vector<double>>(req(n, "table"), "a list of numbers"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(n, e.what());
  }
  fail(n, "unknown observable type '" + type + "'");
}

Library parse_library(const Node& n, Library base = {}) {
  if (!n) return base;
  if (!n.IsMap()) fail(n, "observables must be a mapping from names to definitions");
  for (const auto& kv : n) base.insert_or_assign(kv.first.as<std::string>(), parse_observable_def(kv.second));
  return base;
}

Observable resolve_observable(const Node& n, const Library& lib, const SystemSpec* sys) {
  Observable f = Observable::constant(1.0);
  if (n.IsScalar()) {
    const auto name = n.Scalar();
    auto it = lib.find(name);
    if (it == lib.end()) fail(n, "unknown observable '" + name + "'");
    f = it->second;
  } else {
    f = parse_observable_def(n);
  }
  if (sys != nullptr) {
    try {
      check_observable(*sys, f);
    } catch (const std::exception& e) {
      fail(n, e.what());
    }
  }
  return f;
}

IntPolynomial parse_poly(const Node& n) {
  try {
    return IntPolynomial::parse(n.Scalar());
  } catch (const std::exception& e) {
    fail(n, std::string("bad polynomial: ") + e.what());
  }
}

std::vector<IntPolynomial> parse_polys(const Node& scenario) {
  std::vector<IntPolynomial> out;
  if (const Node ps = scenario["polynomials"]) {
    if (!ps.IsSequence()) fail(ps, "expected a list of polynomials");
    for (const auto& p : ps) out.push_back(parse_poly(p));
  } else if (const Node p = scenario["polynomial"]) {
    out.push_back(parse_poly(p));
  }
  return out;
}

PolynomialFamily family_of(const Node& scenario) {
  const auto polys = parse_polys(scenario);
  if (polys.empty()) fail(scenario, "missing key 'polynomials'");
  try {
    return PolynomialFamily(polys);
  } catch (const std::exception& e) {
    fail(scenario["polynomials"] ? scenario["polynomials"] : scenario["polynomial"], e.what());
  }
}

Action parse_action_node(const Node& n, const SystemSpec& sys) {
  try {
    const Action a = parse_action(n.Scalar());
    sys.resolve(a);
    return a;
  } catch (const std::exception& e) {
    fail(n, e.what());
  }
}

Point parse_point(const Node& n, const SystemSpec& sys, std::uint64_t seed) {
  if (!n) return sample(sys, seed);
  only_keys(n, {"seed", "residue", "x", "y", "stream", "offset", "phase"});
  Point p = sample(sys, get<std::uint64_t>(n, "seed", seed, "a 64-bit seed"));
  if (n["residue"]) p = CyclicPoint{as<std::uint64_t>(n["residue"], "a residue")};
  if (n["x"] && n["y"]) {
    p = SkewPoint{hex_u128(n["x"]), hex_u128(n["y"])};
  } else if (n["x"]) {
    p = TorusPoint{hex_u128(n["x"])};
  }
  if (n["stream"] || n["offset"] || n["phase"]) {
    StreamPoint s{get<std::uint64_t>(n, "stream", seed, "a 64-bit seed"), Integer(0), UInt256(0)};
    if (n["offset"]) s.offset = big_integer(n["offset"]);
    if (n["phase"]) {
      try {
        s.phase = parse_hex_u256(n["phase"].Scalar());
      } catch (const std::exception& e) {
        fail(n["phase"], e.what());
      }
    }
    p = s;
  }
  try {
    check_point(sys, p);
  } catch (const std::exception& e) {
    fail(n, e.what());
  }
  return p;
}

// --- budgets ------------------------------------------------------------------

struct Budget {
  Caps caps;
  bool override_budget = false;

  void n(const Node& at, double value) const {
    if (!override_budget && value > static_cast<double>(caps.max_n)) {
      fail(at, "N = " + format_double(value) + " exceeds the cap max_n = " + std::to_string(caps.max_n) +
                   " (use --override-budget)");
    }
  }
  void seminorm(const Node& at, double h, int k, double n_len) const {
    const double work = std::pow(h, k - 1) * n_len;
    if (!override_budget && work > caps.max_seminorm_work) {
      fail(at, "H^(k-1) N = " + format_double(work) + " exceeds the cap max_seminorm_work = " +
                   format_double(caps.max_seminorm_work) + " (use --override-budget)");
    }
  }
  void cells(const Node& at, int bins, int length) const {
    const double c = std::pow(static_cast<double>(bins), length);
    if (!override_budget && c > static_cast<double>(caps.max_cells)) {
      fail(at, "B^L = " + format_double(c) + " exceeds the cap max_cells = " + std::to_string(caps.max_cells) +
                   " (use --override-budget)");
    }
  }
};

NSchedule parse_schedule(const Node& s, const Budget& budget, const Node& scenario) {
  NSchedule out;
  if (s) {
    only_keys(s, {"n0", "factor", "levels", "n_max"});
    const auto factor = get<std::uint32_t>(s, "factor", 2, "an integer factor");
    const auto levels = get<std::uint32_t>(s, "levels", 8, "a level count");
    try {
      if (s["n_max"]) {
        out = NSchedule::up_to(as<std::uint64_t>(s["n_max"], "a positive integer"), levels, factor);
      } else {
        out = NSchedule{get<std::uint64_t>(s, "n0", 1000, "a positive integer"), factor, levels};
      }
      out.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(s, e.what());
    }
  }
  budget.n(s ? s : scenario, static_cast<double>(out.max_n()));
  return out;
}

// --- outcomes -----------------------------------------------------------------

Outcome from_estimate(const Estimate& e) {
  Outcome o;
  o.n = e.sizes.empty() ? 0 : e.sizes.back();
  o.value = e.value;
  if (!e.residuals.empty()) o.residual = e.residuals.back();
  o.std_error = e.std_error;
  o.converged = e.converged;
  o.detail = estimate_json(e);
  return o;
}

Outcome from_report(const VerifyReport& r, std::uint64_t n) {
  Outcome o;
  o.ok = r.pass;
  o.n = n;
  o.value = r.lhs;
  o.residual = r.residual;
  o.std_error = r.std_error;
  o.converged = r.pass;
  o.detail = report_json(r);
  return o;
}

// --- scenario pieces ------------------------------------------------------------

struct Common {
  const Node& node;
  Library lib;
  Budget budget;
  std::uint64_t seed = 1;
  std::size_t samples = 32;
  double tol = kDefaultTolerance;
};

std::vector<Term> parse_terms(const Node& n, const Common& c, const SystemSpec& sys) {
  if (!n || !n.IsSequence() || n.size() == 0) fail(n ? n : c.node, "expected a non-empty list 'terms'");
  const auto polys = parse_polys(c.node);
  std::vector<Term> out;
  for (const auto& t : n) {
    only_keys(t, {"polynomial", "observable", "action"});
    Term term{Action::Main, IntPolynomial::linear(1), Observable::constant(1.0)};
    const Node p = req(t, "polynomial");
    if (polys.size() > 0 && p.IsScalar() && p.Scalar().find('n') == std::string::npos) {
      const auto idx = as<std::size_t>(p, "a 1-based family index");
      if (idx < 1 || idx > polys.size()) fail(p, "family index out of range");
      term.polynomial = polys[idx - 1];
    } else {
      term.polynomial = parse_poly(p);
    }
    term.observable = resolve_observable(req(t, "observable"), c.lib, &sys);
    if (t["action"]) term.action = parse_action_node(t["action"], sys);
    out.push_back(std::move(term));
  }
  return out;
}

std::map<GridKey, Observable> parse_grid(const Node& g, const Common& c, const SystemSpec& sys) {
  std::map<GridKey, Observable> out;
  if (!g) return out;
  if (!g.IsSequence()) fail(g, "expected a list of {j, i, observable} entries");
  for (const auto& e : g) {
    only_keys(e, {"j", "i", "observable"});
    const int j = as<int>(req(e, "j"), "an integer j");
    const int i = as<int>(req(e, "i"), "a 1-based member index i");
    if (i < 1) fail(e["i"], "member index i is 1-based");
    const GridKey key{j, static_cast<std::size_t>(i - 1)};
    if (out.count(key)) fail(e, "duplicate grid slot");
    out.emplace(key, resolve_observable(req(e, "observable"), c.lib, &sys));
  }
  return out;
}

CylinderSpec parse_cylinder(const Node& n, const Common& c, const SystemSpec& sys, std::size_t d) {
  only_keys(n, {"l", "grid", "actions"});
  CylinderSpec cyl;
  cyl.l = get<int>(n, "l", 0, "a radius");
  cyl.grid = parse_grid(n["grid"], c, sys);
  if (const Node a = n["actions"]) {
    if (!a.IsSequence()) fail(a, "expected a list of actions");
    for (const auto& v : a) cyl.actions.push_back(parse_action_node(v, sys));
  }
  for (const auto& [key, f] : cyl.grid) {
    if (key.first < -cyl.l || key.first > cyl.l) fail(n, "grid slot j = " + std::to_string(key.first) + " outside [-l, l]");
    if (key.second >= d) fail(n, "grid slot i = " + std::to_string(key.second + 1) + " outside the family");
  }
  return cyl;
}

Sampling parse_sampling(const Common& c) {
  const Node s = c.node["sampling"];
  if (s && s.IsScalar() && s.Scalar() == "enumerate") return Sampling::enumerate();
  if (s && !(s.IsScalar() && s.Scalar() == "sampled")) fail(s, "sampling is 'sampled' or 'enumerate'");
  return Sampling::sampled(c.samples, c.seed);
}

SequenceSource parse_sequence(const Node& n, const Common& c, const SystemSpec* scenario_sys) {
  if (!n) fail(c.node, "missing key 'sequence'");
  if (n["values"]) {
    only_keys(n, {"values", "lo", "hi"});
    try {
      return SequenceSource(ExplicitSequence{as<std::vector<double>>(n["values"], "a list of numbers"),
                                             get<double>(n, "lo", -1.0, "a number"),
                                             get<double>(n, "hi", 1.0, "a number")});
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(n, e.what());
    }
  }
  only_keys(n, {"system", "action", "polynomial", "observable", "point"});
  if (!n["system"] && scenario_sys == nullptr) fail(n, "missing key 'system'");
  const SystemSpec sys = n["system"] ? parse_system(n["system"]) : *scenario_sys;
  OrbitSequence o{sys, Action::Main, parse_point(n["point"], sys, c.seed),
                  n["polynomial"] ? parse_poly(n["polynomial"]) : IntPolynomial::linear(1),
                  resolve_observable(req(n, "observable"), c.lib, &sys)};
  if (n["action"]) o.action = parse_action_node(n["action"], sys);
  try {
    return SequenceSource(std::move(o));
  } catch (const std::exception& e) {
    fail(n, e.what());
  }
}

std::vector<std::vector<std::int64_t>> parse_shift_sets(const Node& n) {
  std::vector<std::vector<std::int64_t>> out;
  if (!n) return {{0}};
  if (!n.IsSequence()) fail(n, "expected a list of shift tuples");
  for (const auto& t : n) {
    auto v = as<std::vector<std::int64_t>>(t, "a list of integer shifts");
    if (v.empty()) fail(t, "a shift tuple needs at least one entry");
    out.push_back(std::move(v));
  }
  return out;
}

const std::set<std::string> kScenarioKeys{
    "id",      "operation", "system",      "observables", "polynomials", "polynomial", "terms",    "point",
    "schedule", "samples",  "seed",        "tolerance",   "observable",  "k",          "H",        "N",
    "exact_base", "sequence", "cylinder",  "split",       "sampling",    "waive_spade", "exact",   "shifts",
    "structure", "empirical", "set",       "weight",      "slopes",      "nil_system", "shift_system",
    "nil_point", "shift_point", "h",       "g",           "l"};

std::function<Outcome()> build(const std::string& op, Common& c) {
  const Node& n = c.node;
  auto system = [&]() { return parse_system(req(n, "system")); };

  if (op == "average") {
    const SystemSpec sys = system();
    const auto terms = parse_terms(n["terms"], c, sys);
    const Point x = parse_point(n["point"], sys, c.seed);
    const NSchedule sched = parse_schedule(n["schedule"], c.budget, n);
    const double tol = c.tol;
    return [=] { return from_estimate(limit_multiple_average(sys, x, terms, sched, tol)); };
  }
  if (op == "l2profile") {
    const SystemSpec sys = system();
    const auto terms = parse_terms(n["terms"], c, sys);
    const NSchedule sched = parse_schedule(n["schedule"], c.budget, n);
    const std::size_t samples = c.samples;
    const std::uint64_t seed = c.seed;
    const double tol = c.tol;
    return [=] {
      const L2Profile p = l2_profile(sys, terms, sched, samples, seed);
      Outcome o;
      o.n = p.sizes.back();
      o.value = p.mean_final;
      o.residual = p.rms.back();
      o.converged = p.rms.back() <= tol;
      o.detail = {{"sizes", p.sizes}, {"rms", p.rms}, {"final_values", p.final_values}, {"mean_final", p.mean_final}};
      return o;
    };
  }
  if (op == "seminorm") {
    const SystemSpec sys = system();
    const Observable f = resolve_observable(req(n, "observable"), c.lib, &sys);
    SeminormBudget b;
    const int k = get<int>(n, "k", 2, "an order k >= 1");
    if (k < 1) fail(n["k"], "order k must be >= 1");
    b.k_max = std::max(k, b.k_max);
    b.H = get<std::uint64_t>(n, "H", b.H, "a shift range H");
    b.N = get<std::uint64_t>(n, "N", b.N, "a length N");
    b.seed = c.seed;
    b.exact_base = get<bool>(n, "exact_base", true, "true or false");
    c.budget.n(n, static_cast<double>(b.N));
    c.budget.seminorm(n, static_cast<double>(b.H), k, static_cast<double>(b.N));
    if (!sys.is_ergodic()) fail(req(n, "system"), "seminorms need an ergodic system");
    const double tol = c.tol;
    return [=] {
      Outcome o = from_estimate(hk_seminorm(sys, f, k, b, tol));
      o.detail["k"] = k;
      o.detail["H"] = b.H;
      return o;
    };
  }
  if (op == "seqnorm") {
    const SystemSpec* sp = nullptr;
    std::optional<SystemSpec> sys;
    if (n["system"]) sp = &sys.emplace(system());
    const SequenceSource z = parse_sequence(n["sequence"], c, sp);
    const int k = get<int>(n, "k", 2, "an order k >= 2");
    if (k < 2) fail(n["k"], "sequence norms need k >= 2");
    const auto H = get<std::uint64_t>(n, "H", 200, "a shift range H");
    const auto N = get<std::uint64_t>(n, "N", 100000, "a length N");
    if (H < 2 || N < 2) fail(n, "seqnorm needs H >= 2 and N >= 2");
    c.budget.n(n, static_cast<double>(N));
    c.budget.seminorm(n, static_cast<double>(H), k, static_cast<double>(N));
    const double tol = c.tol;
    return [=] {
      const double half = seq_norm(z, k, H / 2, N / 2);
      const double full = seq_norm(z, k, H, N);
      return from_estimate(make_estimate({N / 2, N}, {half, full}, tol));
    };
  }
  if (op == "joining" || op == "component") {
    const SystemSpec sys = system();
    const PolynomialFamily fam = family_of(n);
    const CylinderSpec cyl = parse_cylinder(req(n, "cylinder"), c, sys, fam.size());
    const NSchedule sched = parse_schedule(n["schedule"], c.budget, n);
    const bool waive = get<bool>(n, "waive_spade", false, "true or false");
    const double tol = c.tol;
    if (!waive) {
      const SpadeReport r = satisfies_spade(fam);
      if (!r.ok) fail(req(n, "polynomials"), "family fails the spade condition (" + r.reason + "); set waive_spade");
    }
    if (op == "component") {
      const Point x = parse_point(n["point"], sys, c.seed);
      return [=] { return from_estimate(component_corr(sys, fam, cyl, x, sched, tol)); };
    }
    const Sampling sampling = parse_sampling(c);
    if (sampling.mode == Sampling::Mode::Enumerate && !sys.is_cyclic()) {
      fail(n["sampling"], "enumeration needs a cyclic system");
    }
    const bool exact = get<bool>(n, "exact", false, "true or false");
    return [=] {
      Outcome o = from_estimate(cylinder_corr(sys, fam, cyl, sampling, sched, true, tol));
      o.detail["spade_waived"] = waive;
      if (exact) o.detail["exact"] = rational_string(cylinder_corr_exact(sys, fam, cyl));
      return o;
    };
  }
  if (op == "tilde") {
    const SystemSpec sys = system();
    const PolynomialFamily fam = family_of(n);
    const Node s = req(n, "split");
    only_keys(s, {"linear", "l", "grid"});
    SplitCylinderSpec split;
    if (const Node lin = s["linear"]) {
      if (!lin.IsSequence()) fail(lin, "expected a list of observables");
      for (const auto& v : lin) split.linear.push_back(resolve_observable(v, c.lib, &sys));
    }
    split.l = get<int>(s, "l", 0, "a radius");
    split.grid = parse_grid(s["grid"], c, sys);
    try {
      tilde_terms(fam, split);
    } catch (const std::exception& e) {
      fail(s, e.what());
    }
    const NSchedule sched = parse_schedule(n["schedule"], c.budget, n);
    const Sampling sampling = parse_sampling(c);
    const bool waive = get<bool>(n, "waive_spade", false, "true or false");
    const bool exact = get<bool>(n, "exact", false, "true or false");
    const double tol = c.tol;
    return [=] {
      Outcome o = from_estimate(tilde_cylinder_corr(sys, fam, split, sampling, sched, waive, tol));
      if (exact) o.detail["exact"] = rational_string(tilde_cylinder_corr_exact(sys, fam, split));
      return o;
    };
  }
  if (op == "sequence") {
    const SystemSpec* sp = nullptr;
    std::optional<SystemSpec> sys;
    if (n["system"]) sp = &sys.emplace(system());
    const SequenceSource z = parse_sequence(n["sequence"], c, sp);
    const auto shifts = parse_shift_sets(n["shifts"]);
    const NSchedule sched = parse_schedule(n["schedule"], c.budget, n);
    const bool structure = get<bool>(n, "structure", false, "true or false");
    std::optional<std::tuple<int, int, std::uint64_t>> empirical;
    if (const Node e = n["empirical"]) {
      only_keys(e, {"L", "B", "N"});
      const int L = get<int>(e, "L", 3, "a word length");
      const int B = get<int>(e, "B", 4, "a bin count");
      const auto N = get<std::uint64_t>(e, "N", sched.max_n(), "a length");
      c.budget.cells(e, B, L);
      c.budget.n(e, static_cast<double>(N));
      empirical.emplace(L, B, N);
    }
    if (structure) {
      const auto* o = std::get_if<OrbitSequence>(&z.value());
      if (o == nullptr || !o->system.is_weakly_mixing(o->action) || o->polynomial.degree() < 2) {
        fail(n["structure"], "structure tests need an orbit sequence with a weakly mixing action and deg p >= 2");
      }
    }
    const double tol = c.tol;
    return [=] {
      const auto checks = admits_correlations(z, shifts, sched, tol);
      Outcome o = from_estimate(checks.front().estimate);
      nlohmann::json corr = nlohmann::json::array();
      for (const auto& ch : checks) {
        corr.push_back({{"shifts", ch.shifts}, {"estimate", estimate_json(ch.estimate)}, {"pass", ch.pass}});
      }
      o.detail = {{"correlations", corr}};
      if (structure) {
        const StructureReport rep = structure_test(z, sched);
        nlohmann::json js = nlohmann::json::array();
        for (const auto& ch : rep.checks) {
          js.push_back({{"shifts", ch.shifts},
                        {"estimate", ch.estimate},
                        {"prediction", ch.prediction},
                        {"residual", ch.residual},
                        {"pass", ch.pass}});
        }
        o.detail["structure"] = {{"header", rep.header}, {"checks", js}, {"pass", rep.pass}};
        o.ok = rep.pass;
      }
      if (empirical) {
        const auto [L, B, N] = *empirical;
        const EmpiricalMeasure m = generic_cylinder(z, L, B, N);
        o.detail["empirical"] = {{"L", L},
                                 {"B", B},
                                 {"N", N},
                                 {"counts", m.counts},
                                 {"product_residual", m.product_residual()}};
      }
      return o;
    };
  }
  if (op == "recurrence") {
    const SystemSpec sys = system();
    if (!sys.is_cyclic()) fail(req(n, "system"), "recurrence scenarios need a cyclic system");
    const Observable set = resolve_observable(req(n, "set"), c.lib, &sys);
    if (!std::holds_alternative<IndicatorSet>(set.value())) fail(n["set"], "the set must be an indicator");
    const PolynomialFamily fam = family_of(n);
    const NSchedule sched = parse_schedule(n["schedule"], c.budget, n);
    return [=] {
      const RecurrenceResult r = recurrence_average(sys, set, fam, sched);
      Outcome o = from_estimate(r.estimate);
      o.detail["exact"] = rational_string(r.exact);
      o.detail["period"] = r.period;
      o.ok = r.exact > 0;
      return o;
    };
  }
  if (op == "weighted") {
    const SystemSpec sys = system();
    const auto terms = parse_terms(n["terms"], c, sys);
    const Point x = parse_point(n["point"], sys, c.seed);
    const Node w = req(n, "weight");
    only_keys(w, {"system", "point", "observable", "polynomial"});
    const SystemSpec wsys = w["system"] ? parse_system(w["system"]) : SystemSpec::skew();
    NilWeight weight{wsys, parse_point(w["point"], wsys, c.seed ^ 0x77),
                     resolve_observable(req(w, "observable"), c.lib, &wsys),
                     w["polynomial"] ? parse_poly(w["polynomial"]) : IntPolynomial::linear(1)};
    const NSchedule sched = parse_schedule(n["schedule"], c.budget, n);
    const double tol = c.tol;
    return [=] { return from_estimate(weighted_average(sys, x, weight, terms, sched, tol)); };
  }
  if (op == "verify-identity" || op == "verify-linear" || op == "verify-wm") {
    const SystemSpec sys = system();
    std::vector<Integer> slopes;
    PolynomialFamily fam({IntPolynomial::linear(1)});
    if (op == "verify-linear") {
      const Node s = req(n, "slopes");
      if (!s.IsSequence() || s.size() == 0) fail(s, "expected a list of slopes");
      std::vector<IntPolynomial> members;
      for (const auto& v : s) {
        slopes.push_back(big_integer(v));
        members.push_back(IntPolynomial::linear(slopes.back()));
      }
      fam = PolynomialFamily(members);
    } else if (op == "verify-wm") {
      fam = family_of(n);
    }
    const CylinderSpec cyl = parse_cylinder(req(n, "cylinder"), c, sys, fam.size());
    const NSchedule sched = parse_schedule(n["schedule"], c.budget, n);
    const Sampling sampling = parse_sampling(c);
    std::optional<double> tol;
    if (n["tolerance"]) tol = c.tol;
    if (op == "verify-identity") {
      return [=] { return from_report(verify_identity_case(sys, cyl, sampling, sched, tol), sched.max_n()); };
    }
    if (op == "verify-linear") {
      return [=] { return from_report(verify_linear_case(sys, slopes, cyl, sampling, sched, tol), sched.max_n()); };
    }
    const double wm_tol = tol.value_or(0.03);
    return [=] { return from_report(verify_wm_product(sys, fam, cyl, sampling, sched, wm_tol), sched.max_n()); };
  }
  if (op == "verify-product") {
    ProductSystem ps{n["nil_system"] ? parse_system(n["nil_system"]) : SystemSpec::skew(),
                     n["shift_system"] ? parse_system(n["shift_system"]) : SystemSpec::bernoulli()};
    const auto polys = parse_polys(n);
    if (polys.size() != 1) fail(n, "verify-product takes a single 'polynomial'");
    const IntPolynomial p = polys.front();
    if (p.degree() < 2) fail(n["polynomial"], "verify-product needs a nonlinear polynomial");
    const int l = get<int>(n, "l", 1, "a radius");
    const Observable h = resolve_observable(req(n, "h"), c.lib, &ps.nil);
    const Observable g = resolve_observable(req(n, "g"), c.lib, &ps.shift);
    const ProductPoint x{parse_point(n["nil_point"], ps.nil, c.seed), parse_point(n["shift_point"], ps.shift, c.seed ^ 0x5)};
    const NSchedule sched = parse_schedule(n["schedule"], c.budget, n);
    const double tol = n["tolerance"] ? c.tol : 0.05;
    return [=] {
      const auto r = verify_product_components(ps, p, l, h, g, x, sched, tol);
      Outcome o;
      o.ok = r.pass;
      o.n = sched.max_n();
      o.value = r.joint.value;
      o.residual = r.residual;
      o.converged = r.pass;
      o.detail = {{"joint", estimate_json(r.joint)},
                  {"nil_part", estimate_json(r.nil_part)},
                  {"shift_factor", r.shift_factor},
                  {"prediction", r.prediction},
                  {"residual", r.residual},
                  {"pass", r.pass}};
      return o;
    };
  }
  fail(req(n, "operation"), "unknown operation '" + op + "'");
}

Caps parse_caps(const Node& n) {
  Caps caps;
  if (!n) return caps;
  only_keys(n, {"max_n", "max_seminorm_work", "max_cells"});
  caps.max_n = get<std::uint64_t>(n, "max_n", caps.max_n, "a positive integer");
  caps.max_seminorm_work = get<double>(n, "max_seminorm_work", caps.max_seminorm_work, "a number");
  caps.max_cells = get<std::uint64_t>(n, "max_cells", caps.max_cells, "a positive integer");
  return caps;
}

}  // namespace

Config parse_config(const std::string& text, bool override_budget) {
  Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  Config cfg;
  if (!root || root.IsNull()) return cfg;
  only_keys(root, {"budget", "observables", "scenarios"});
  cfg.caps = parse_caps(root["budget"]);
  const Library shared = parse_library(root["observables"]);
  const Node list = root["scenarios"];
  if (!list || list.IsNull()) return cfg;
  if (!list.IsSequence()) fail(list, "'scenarios' must be a list");

  std::set<std::string> ids;
  for (const auto& s : list) {
    only_keys(s, kScenarioKeys);
    Scenario sc;
    sc.id = as<std::string>(req(s, "id"), "a scenario id");
    if (sc.id.empty() || sc.id.find_first_of(",\n\"") != std::string::npos) {
      fail(s["id"], "scenario ids must be non-empty and free of commas, quotes and newlines");
    }
    if (!ids.insert(sc.id).second) fail(s["id"], "duplicate scenario id '" + sc.id + "'");
    sc.operation = as<std::string>(req(s, "operation"), "an operation name");
    sc.line = s.Mark().line + 1;
    sc.canonical = to_canonical(s).dump();
    Common c{s, parse_library(s["observables"], shared), Budget{cfg.caps, override_budget}};
    c.seed = get<std::uint64_t>(s, "seed", 1, "a 64-bit seed");
    c.samples = get<std::size_t>(s, "samples", 32, "a sample count");
    c.tol = get<double>(s, "tolerance", kDefaultTolerance, "a positive tolerance");
    if (!(c.tol > 0.0)) fail(s["tolerance"], "tolerance must be positive");
    if (c.samples < 2) fail(s["samples"], "samples must be >= 2");
    sc.run = build(sc.operation, c);
    cfg.scenarios.push_back(std::move(sc));
  }
  return cfg;
}

Config load_config(const std::string& path, bool override_budget) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), override_budget);
}

}  // namespace polyjoin::app
