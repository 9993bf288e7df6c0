#include "ctx/analysis.hpp"

#include <chrono>
#include <set>
#include <sstream>

#include "ctx/avn.hpp"
#include "ctx/cech.hpp"
#include "ctx/mcohom.hpp"

namespace ctx {

using nlohmann::json;

namespace {

json integer_json(const Integer& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
    return static_cast<std::int64_t>(v);
  return v.str();
}

std::string section_text(const MeasurementScenario& sc, const Section& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.domain.size(); ++i) {
    if (i) out += ", ";
    out += sc.label(s.domain[i]) + "=" + std::to_string(s.values[i]);
  }
  return out + "}";
}

json section_json(const EmpiricalModel& m, std::size_t c, std::size_t k) {
  return {{"context", c}, {"section", k}, {"assignment", section_text(m.scenario(), m.section(c, k))}};
}

json certificate_json(const MeasurementScenario& sc, const FamilyCertificate& cert) {
  json rows = json::array();
  for (const auto& r : cert.rows) rows.push_back({{"constraint", describe(r.constraint, sc)}, {"numerator", integer_json(r.numerator)}});
  return {{"denominator", integer_json(cert.denominator)}, {"rational", cert.rational}, {"rows", std::move(rows)}};
}

json family_json(const IntFamily& family) {
  json out = json::array();
  for (std::size_t c = 0; c < family.size(); ++c)
    for (std::size_t s = 0; s < family[c].size(); ++s)
      if (!family[c][s].is_zero()) out.push_back({{"context", c}, {"section", s}, {"coefficient", integer_json(family[c][s])}});
  return out;
}

json map_json(const MeasurementScenario& sc, const ElementMap& g) {
  json out = json::object();
  for (std::size_t x = 0; x < g.size(); ++x) out[sc.label(x)] = g[x];
  return out;
}

/// Sections without a global extension, as (context, section) pairs.
std::set<std::pair<std::size_t, std::size_t>> contextual_sections(const EmpiricalModel& m,
                                                                  const ContextualityClass& cls) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  if (cls.kind == ContextualityKind::StronglyContextual) {
    for (std::size_t c = 0; c < m.scenario().num_contexts(); ++c)
      for (std::size_t k = 0; k < m.sections(c).size(); ++k) out.emplace(c, k);
  } else {
    for (const auto& w : cls.witnesses) out.emplace(w.context, w.section);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> selected(const EmpiricalModel& m, const SectionSelector& sel,
                                                          const std::set<std::pair<std::size_t, std::size_t>>& auto_set) {
  const auto& sc = m.scenario();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (sel.context && *sel.context >= sc.num_contexts())
    throw PreconditionError("context " + std::to_string(*sel.context) + " does not exist");
  switch (sel.kind) {
    case SectionSelector::Kind::One:
      if (!sel.context) throw PreconditionError("a section index needs --context");
      if (sel.section >= m.sections(*sel.context).size())
        throw PreconditionError("context " + std::to_string(*sel.context) + " has no section " +
                                std::to_string(sel.section));
      out.emplace_back(*sel.context, sel.section);
      break;
    case SectionSelector::Kind::All:
    case SectionSelector::Kind::Auto:
      for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
        if (sel.context && c != *sel.context) continue;
        for (std::size_t k = 0; k < m.sections(c).size(); ++k)
          if (sel.kind == SectionSelector::Kind::All || auto_set.count({c, k})) out.emplace_back(c, k);
      }
      break;
  }
  return out;
}

std::string selector_text(const SectionSelector& sel) {
  std::string ctx = sel.context ? "context " + std::to_string(*sel.context) : "all contexts";
  switch (sel.kind) {
    case SectionSelector::Kind::All:
      return "all sections, " + ctx;
    case SectionSelector::Kind::Auto:
      return "sections without a global extension, " + ctx;
    case SectionSelector::Kind::One:
      return ctx + ", section " + std::to_string(sel.section);
  }
  return {};
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

AnalysisReport run(const AnalysisRequest& request) { return run(request, load_model(request.source)); }

AnalysisReport run(const AnalysisRequest& request, const LoadedModel& loaded) {
  AnalysisReport report;
  const auto& m = loaded.model;
  const auto& sc = m.scenario();
  json& out = report.payload;

  {
    json counts = json::array();
    for (std::size_t c = 0; c < sc.num_contexts(); ++c) counts.push_back(m.sections(c).size());
    json contexts = json::array();
    for (const auto& ctx : sc.contexts()) {
      json labels = json::array();
      for (auto x : ctx) labels.push_back(sc.label(x));
      contexts.push_back(std::move(labels));
    }
    out["model"] = {{"name", loaded.name},
                    {"measurements", sc.num_measurements()},
                    {"outcome_modulus", sc.modulus()},
                    {"contexts", std::move(contexts)},
                    {"section_counts", std::move(counts)},
                    {"total_sections", m.total_sections()},
                    {"connected", cover_is_connected(sc)},
                    {"structure", loaded.structure ? "valid" : "absent"}};
  }

  std::optional<ContextualityClass> cls;
  auto classification = [&]() -> const ContextualityClass& {
    if (!cls) cls = classify(m);
    return *cls;
  };

  if (request.classify) {
    Stopwatch sw;
    const auto& c = classification();
    json witnesses = json::array();
    for (const auto& w : c.witnesses) witnesses.push_back(section_json(m, w.context, w.section));
    out["classify"] = {{"kind", to_string(c.kind)}, {"witnesses", std::move(witnesses)}};
    if (c.kind == ContextualityKind::NonContextual) {
      auto g = global_sections(m, 1);
      json gj = json::object();
      for (std::size_t x = 0; x < g.front().size(); ++x) gj[sc.label(x)] = g.front()[x];
      out["classify"]["global_section"] = std::move(gj);
    }
    report.timings["classify"] = sw.seconds();
  }

  if (request.avn) {
    Stopwatch sw;
    const auto d = sc.modulus();
    auto theory = theory_of(m, d);
    auto result = is_avn(m, theory);
    json eqs = json::array();
    for (const auto& e : theory.equations) eqs.push_back(format_equation(sc, e, d));
    json a = {{"modulus", d}, {"is_avn", result.is_avn}, {"equations", std::move(eqs)}};
    if (result.is_avn) {
      json cert = json::array();
      for (std::size_t k = 0; k < result.certificate.size(); ++k)
        if (result.certificate[k] != 0)
          cert.push_back({{"equation", format_equation(sc, theory.equations[k], d)}, {"coefficient", result.certificate[k]}});
      a["certificate"] = std::move(cert);
    } else {
      json w = json::object();
      for (std::size_t x = 0; x < result.witness.size(); ++x) w[sc.label(x)] = result.witness[x];
      a["witness"] = std::move(w);
    }
    out["avn"] = std::move(a);
    report.timings["avn"] = sw.seconds();
  }

  std::optional<CechAnalyzer> analyzer;
  if (request.cech) {
    Stopwatch sw;
    analyzer.emplace(m);
    auto auto_set = contextual_sections(m, classification());
    json results = json::array();
    std::size_t false_positives = 0;
    for (auto [c, k] : selected(m, request.selector, auto_set)) {
      auto verdict = analyzer->obstruction(c, k);
      auto cocycle = analyzer->connecting_cocycle(c, k);
      json r = section_json(m, c, k);
      r["vanishes"] = verdict.vanishes;
      r["routes_agree"] = verdict.vanishes == cocycle.is_coboundary;
      if (verdict.vanishes != cocycle.is_coboundary) report.invariant_failure = true;
      const bool extends = !auto_set.count({c, k});
      r["has_global_extension"] = extends;
      r["false_positive"] = verdict.vanishes && !extends;
      if (verdict.vanishes && !extends) ++false_positives;
      if (verdict.vanishes)
        r["family"] = family_json(verdict.family);
      else
        r["certificate"] = certificate_json(sc, verdict.certificate);
      results.push_back(std::move(r));
    }
    out["cech"] = {{"selector", selector_text(request.selector)},
                   {"results", std::move(results)},
                   {"false_positives", false_positives}};
    if (request.avn || request.all) {
      auto consistency = avn_cech_consistency(*analyzer, sc.modulus());
      out["cech"]["avn_consistent"] = consistency.consistent();
      if (!consistency.consistent()) {
        report.invariant_failure = true;
        out["cech"]["avn_violations"] = consistency.violations;
      }
    }
    report.timings["cech"] = sw.seconds();
  }

  const bool need_structure = request.beta || request.theorem41;
  if (need_structure && !loaded.structure && !request.all)
    throw PreconditionError("model has no partial monoid structure; beta and theorem41 need one");

  if (request.beta) {
    if (!loaded.structure) {
      out["beta"] = {{"skipped", "model has no partial monoid structure"}};
    } else {
      Stopwatch sw;
      GroupCohomology gc(m, *loaded.structure);
      auto auto_set = request.selector.kind == SectionSelector::Kind::Auto
                          ? contextual_sections(m, classification())
                          : std::set<std::pair<std::size_t, std::size_t>>{};
      const auto& qm = gc.quotient_monoid();
      json results = json::array();
      for (auto [c, k] : selected(m, request.selector, auto_set)) {
        auto g = group_obstruction(gc, c, k);
        json r = section_json(m, c, k);
        r["vanishes"] = g.vanishes;
        if (g.vanishes) {
          r["global_splitting"] = map_json(sc, g.global_splitting);
        } else {
          json cert = json::array();
          for (const auto& e : g.certificate) {
            const auto& t = gc.tuples().tuple(2, e.pair);
            cert.push_back({{"pair", {qm.name(t[0]), qm.name(t[1])}}, {"coefficient", e.coefficient}});
          }
          r["certificate"] = std::move(cert);
        }
        results.push_back(std::move(r));
      }
      out["beta"] = {{"selector", selector_text(request.selector)}, {"results", std::move(results)}};
      report.timings["beta"] = sw.seconds();
    }
  }

  if (request.theorem41) {
    if (!loaded.structure) {
      out["theorem41"] = {{"skipped", "model has no partial monoid structure"}};
    } else {
      Stopwatch sw;
      auto t = check_splitting_implication(m, *loaded.structure);
      std::size_t cech_vanishing = 0, group_vanishing = 0, collapsed = 0;
      for (const auto& e : t.entries) {
        cech_vanishing += e.cech_vanishes;
        group_vanishing += e.group_vanishes;
        collapsed += e.collapse_verified;
      }
      out["theorem41"] = {{"holds", t.holds()},
                          {"sections", t.entries.size()},
                          {"cech_vanishing", cech_vanishing},
                          {"group_vanishing", group_vanishing},
                          {"collapse_verified", collapsed},
                          {"violations", t.violations}};
      if (!t.holds()) report.invariant_failure = true;
      report.timings["theorem41"] = sw.seconds();
    }
  }
  return report;
}

std::string render_text(const json& p) {
  std::ostringstream os;
  const auto& model = p.at("model");
  os << "model " << model.at("name").get<std::string>() << ": " << model.at("measurements") << " measurements, "
     << model.at("contexts").size() << " contexts, " << model.at("total_sections") << " sections, outcomes Z_"
     << model.at("outcome_modulus") << ", structure " << model.at("structure").get<std::string>() << "\n";

  if (p.contains("classify")) {
    const auto& c = p["classify"];
    os << "classify: " << c.at("kind").get<std::string>() << "\n";
    for (const auto& w : c.at("witnesses"))
      os << "  no global extension: context " << w.at("context") << " " << w.at("assignment").get<std::string>()
         << "\n";
  }
  if (p.contains("avn")) {
    const auto& a = p["avn"];
    os << "avn: " << (a.at("is_avn").get<bool>() ? "AvN" : "not AvN") << " over Z_" << a.at("modulus") << " ("
       << a.at("equations").size() << " equations)\n";
    for (const auto& e : a.at("equations")) os << "  " << e.get<std::string>() << "\n";
    if (a.contains("certificate")) {
      os << "  refutation:\n";
      for (const auto& r : a["certificate"])
        os << "    " << r.at("coefficient") << " x [" << r.at("equation").get<std::string>() << "]\n";
    }
  }
  if (p.contains("cech")) {
    const auto& c = p["cech"];
    os << "cech (" << c.at("selector").get<std::string>() << "):\n";
    for (const auto& r : c.at("results")) {
      os << "  context " << r.at("context") << " " << r.at("assignment").get<std::string>() << ": gamma "
         << (r.at("vanishes").get<bool>() ? "vanishes" : "does not vanish")
         << (r.at("routes_agree").get<bool>() ? "" : " [ROUTES DISAGREE]")
         << (r.at("false_positive").get<bool>() ? " [false positive: no global extension]" : "") << "\n";
      if (r.contains("family") && r.at("false_positive").get<bool>()) {
        os << "    family:";
        for (const auto& f : r["family"])
          os << " " << f.at("coefficient") << "*C" << f.at("context") << "[" << f.at("section") << "]";
        os << "\n";
      }
    }
    os << "  false positives: " << c.at("false_positives") << "\n";
    if (c.contains("avn_consistent"))
      os << "  AvN consistency: " << (c["avn_consistent"].get<bool>() ? "ok" : "VIOLATED") << "\n";
  }
  if (p.contains("beta")) {
    const auto& b = p["beta"];
    if (b.contains("skipped")) {
      os << "beta: skipped (" << b["skipped"].get<std::string>() << ")\n";
    } else {
      std::size_t vanishing = 0;
      for (const auto& r : b.at("results")) vanishing += r.at("vanishes").get<bool>();
      os << "beta (" << b.at("selector").get<std::string>() << "): " << b.at("results").size() << " sections, "
         << vanishing << " with [beta] = 0\n";
      for (const auto& r : b.at("results"))
        os << "  context " << r.at("context") << " " << r.at("assignment").get<std::string>() << ": [beta] "
           << (r.at("vanishes").get<bool>() ? "= 0" : "!= 0") << "\n";
    }
  }
  if (p.contains("theorem41")) {
    const auto& t = p["theorem41"];
    if (t.contains("skipped")) {
      os << "theorem41: skipped (" << t["skipped"].get<std::string>() << ")\n";
    } else {
      os << "theorem41: " << (t.at("holds").get<bool>() ? "holds" : "VIOLATED") << " on " << t.at("sections")
         << " sections (gamma = 0: " << t.at("cech_vanishing") << ", [beta] = 0: " << t.at("group_vanishing")
         << ", collapses verified: " << t.at("collapse_verified") << ")\n";
      for (const auto& v : t.at("violations")) os << "  " << v.get<std::string>() << "\n";
    }
  }
  return os.str();
}

}  // namespace ctx
