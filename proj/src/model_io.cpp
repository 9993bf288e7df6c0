#include "ctx/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ctx/mcohom.hpp"

namespace ctx {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ParseError(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where.empty() ? key : where + "." + key, "missing field");
  return *it;
}

std::string path(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }
std::string path(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

const json& expect_array(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where, "expected an array");
  return v;
}

std::string expect_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where, "expected a string");
  return v.get<std::string>();
}

std::int64_t expect_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where, "expected an integer");
  return v.get<std::int64_t>();
}

Integer expect_big(const json& v, const std::string& where) {
  if (v.is_number_integer()) return Integer(v.get<std::int64_t>());
  if (v.is_string()) {
    try {
      return Integer(v.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw ParseError(where, "expected an integer");
}

GaussianStateVector parse_state(const json& v, std::size_t n, const std::string& where) {
  if (v.is_string()) {
    try {
      return GaussianStateVector::parse_named(v.get<std::string>());
    } catch (const Error& e) {
      throw ParseError(where, e.what());
    }
  }
  expect_array(v, where);
  std::vector<Gaussian> amps;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = expect_array(v[i], path(where, i));
    if (a.size() != 2) throw ParseError(path(where, i), "expected [re, im]");
    amps.push_back({expect_big(a[0], path(where, i)), expect_big(a[1], path(where, i))});
  }
  if (amps.size() != (std::size_t{1} << n)) throw ParseError(where, "expected 2^n amplitudes");
  return GaussianStateVector(n, std::move(amps));
}

LoadedModel parse_pauli(const json& spec, const std::string& name) {
  const std::string where = "pauli";
  if (!spec.is_object()) throw ParseError(where, "expected an object");
  reject_unknown(spec, {"generators", "close", "state"}, where);
  const auto& gens_json = expect_array(field(spec, "generators", where), path(where, "generators"));
  std::vector<PauliOperator> gens;
  for (std::size_t i = 0; i < gens_json.size(); ++i) {
    auto w = path(path(where, "generators"), i);
    const auto& text = expect_string(gens_json[i], w);
    try {
      gens.push_back(PauliOperator::parse(text));
    } catch (const Error& e) {
      throw ParseError(w, e.what());
    }
  }
  if (gens.empty()) throw ParseError(path(where, "generators"), "no operators");
  const std::size_t n = gens.front().qubits();
  bool close = true;
  if (auto it = spec.find("close"); it != spec.end()) {
    if (!it->is_boolean()) throw ParseError(path(where, "close"), "expected a boolean");
    close = it->get<bool>();
  }
  std::optional<GaussianStateVector> state;
  if (auto it = spec.find("state"); it != spec.end()) state = parse_state(*it, n, path(where, "state"));

  std::vector<PauliOperator> ops;
  if (close) {
    ops = close_under_commuting_products(gens, n);
  } else {
    ops = gens;
    ops.push_back(PauliOperator::identity(n));
    ops.push_back(PauliOperator::identity(n).negated());
  }
  auto pm = build_pauli_model(std::move(ops), state);
  LoadedModel out{name, pm.model, std::nullopt, std::nullopt};
  if (pm.closed) out.structure = pauli_structure(pm);
  out.pauli = std::move(pm);
  return out;
}

MonoidStructure parse_partial_monoid(const json& spec, const MeasurementScenario& sc) {
  const std::string where = "partial_monoid";
  if (!spec.is_object()) throw ParseError(where, "expected an object");
  reject_unknown(spec, {"identity", "embedding", "compositions"}, where);
  auto element = [&](const json& v, const std::string& w) {
    auto label = expect_string(v, w);
    try {
      return sc.index_of(label);
    } catch (const Error&) {
      throw ParseError(w, "unknown measurement '" + label + "'");
    }
  };
  const std::size_t size = sc.num_measurements();
  const std::size_t identity = element(field(spec, "identity", where), path(where, "identity"));
  const auto& emb = expect_array(field(spec, "embedding", where), path(where, "embedding"));
  if (emb.size() != static_cast<std::size_t>(sc.modulus()))
    throw ParseError(path(where, "embedding"), "expected one element per outcome");
  std::vector<std::size_t> embedding;
  for (std::size_t a = 0; a < emb.size(); ++a) embedding.push_back(element(emb[a], path(path(where, "embedding"), a)));

  std::vector<std::size_t> table(size * size, kUndefined);
  const auto& comps = expect_array(field(spec, "compositions", where), path(where, "compositions"));
  auto set = [&](std::size_t x, std::size_t y, std::size_t z, const std::string& w) {
    auto& slot = table[x * size + y];
    if (slot != kUndefined && slot != z) throw ParseError(w, "conflicting composition");
    slot = z;
  };
  for (std::size_t i = 0; i < comps.size(); ++i) {
    auto w = path(path(where, "compositions"), i);
    const auto& t = expect_array(comps[i], w);
    if (t.size() != 3) throw ParseError(w, "expected [x, y, x + y]");
    auto x = element(t[0], w), y = element(t[1], w), z = element(t[2], w);
    set(x, y, z, w);
    set(y, x, z, w);
  }
  PartialMonoid monoid(size, identity, std::move(table), sc.contexts(), sc.labels());
  return {std::move(monoid), CoefficientAction{FiniteAbelianGroup({sc.modulus()}), std::move(embedding)}};
}

LoadedModel parse_tables(const json& doc, const std::string& name) {
  const auto& ms = expect_array(field(doc, "measurements", ""), "measurements");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < ms.size(); ++i) labels.push_back(expect_string(ms[i], path("measurements", i)));
  {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (!seen.insert(labels[i]).second) throw ParseError(path("measurements", i), "duplicate label");
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;
  const std::int64_t d = expect_int(field(doc, "outcome_modulus", ""), "outcome_modulus");
  if (d < 2) throw ParseError("outcome_modulus", "must be at least 2");

  const auto& cs = expect_array(field(doc, "contexts", ""), "contexts");
  std::vector<std::vector<std::size_t>> written;  // file order
  std::vector<MeasurementSet> contexts;
  for (std::size_t c = 0; c < cs.size(); ++c) {
    const auto& arr = expect_array(cs[c], path("contexts", c));
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto w = path(path("contexts", c), i);
      auto label = expect_string(arr[i], w);
      auto it = index.find(label);
      if (it == index.end()) throw ParseError(w, "unknown measurement '" + label + "'");
      members.push_back(it->second);
    }
    auto sorted = make_set(members);
    if (sorted.size() != members.size()) throw ParseError(path("contexts", c), "repeated measurement");
    written.push_back(std::move(members));
    contexts.push_back(std::move(sorted));
  }

  const auto& ss = field(doc, "sections", "");
  if (!ss.is_object()) throw ParseError("sections", "expected an object keyed by context index");
  std::vector<std::vector<Assignment>> sections(contexts.size());
  std::vector<bool> seen(contexts.size(), false);
  for (auto it = ss.begin(); it != ss.end(); ++it) {
    const std::string w = path("sections", it.key());
    std::size_t c = 0;
    try {
      std::size_t used = 0;
      c = std::stoul(it.key(), &used);
      if (used != it.key().size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(w, "key is not a context index");
    }
    if (c >= contexts.size()) throw ParseError(w, "no such context");
    seen[c] = true;
    const auto& rows = expect_array(it.value(), w);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& row = expect_array(rows[k], path(w, k));
      if (row.size() != written[c].size()) throw ParseError(path(w, k), "length differs from the context");
      Assignment a(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) {
        auto v = expect_int(row[i], path(path(w, k), i));
        auto pos = std::lower_bound(contexts[c].begin(), contexts[c].end(), written[c][i]) - contexts[c].begin();
        a[static_cast<std::size_t>(pos)] = v;
      }
      sections[c].push_back(std::move(a));
    }
  }
  for (std::size_t c = 0; c < contexts.size(); ++c)
    if (!seen[c]) throw ParseError(path("sections", std::to_string(c)), "missing sections for context");

  MeasurementScenario scenario(std::move(labels), std::move(contexts), d);
  LoadedModel out{name, EmpiricalModel(std::move(scenario), std::move(sections)), std::nullopt, std::nullopt};
  if (auto it = doc.find("partial_monoid"); it != doc.end())
    out.structure = parse_partial_monoid(*it, out.model.scenario());
  return out;
}

}  // namespace

LoadedModel parse_model(const json& doc, const std::string& name) {
  if (!doc.is_object()) throw ParseError("", "model document must be an object");
  LoadedModel out = [&] {
    if (doc.contains("pauli")) {
      reject_unknown(doc, {"pauli"}, "");
      return parse_pauli(doc["pauli"], name);
    }
    reject_unknown(doc, {"measurements", "outcome_modulus", "contexts", "sections", "partial_monoid"}, "");
    return parse_tables(doc, name);
  }();
  auto report = validate_model(out);
  if (!report.ok()) {
    std::string msg = "model '" + name + "' is invalid:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw PreconditionError(msg);
  }
  return out;
}

ValidationReport validate_model(const LoadedModel& m) {
  ValidationReport report = validate_scenario(m.model.scenario());
  report.merge(check_no_signalling(m.model));
  if (m.structure) report.merge(validate_monoid_structure(m.model, *m.structure), "structure: ");
  return report;
}

json model_to_json(const LoadedModel& m) {
  const auto& sc = m.model.scenario();
  json doc;
  doc["measurements"] = sc.labels();
  doc["outcome_modulus"] = sc.modulus();
  json contexts = json::array();
  json sections = json::object();
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    json ctx = json::array();
    for (auto x : sc.context(c)) ctx.push_back(sc.label(x));
    contexts.push_back(std::move(ctx));
    sections[std::to_string(c)] = m.model.sections(c);
  }
  doc["contexts"] = std::move(contexts);
  doc["sections"] = std::move(sections);
  if (m.structure) {
    const auto& p = m.structure->monoid;
    json pm;
    pm["identity"] = sc.label(p.identity());
    json emb = json::array();
    for (auto e : m.structure->action.embedding) emb.push_back(sc.label(e));
    pm["embedding"] = std::move(emb);
    json comps = json::array();
    for (std::size_t x = 0; x < p.size(); ++x)
      for (std::size_t y = x; y < p.size(); ++y)
        if (p.defined(x, y)) comps.push_back({sc.label(x), sc.label(y), sc.label(p.op(x, y))});
    pm["compositions"] = std::move(comps);
    doc["partial_monoid"] = std::move(pm);
  }
  return doc;
}

LoadedModel load_model(const std::string& source) {
  const std::string prefix = "fixture:";
  if (source.rfind(prefix, 0) == 0) return load_fixture(source.substr(prefix.size()));
  std::ifstream in(source);
  if (!in) throw ParseError(source, "cannot open model file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(source, e.what());
  }
  return parse_model(doc, source);
}

}  // namespace ctx
