#include "ctx/avn.hpp"

#include <algorithm>
#include <map>

#include "ctx/cech.hpp"
#include "ctx/linalg.hpp"

namespace ctx {

namespace {

std::int64_t residue(std::int64_t v, std::int64_t d) { return mod_floor(static_cast<long long>(v), d); }

bool holds(const LinearEquation& e, const Assignment& s, std::int64_t d) {
  Integer acc = 0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += Integer(e.coefficients[i]) * s[i];
  return mod_floor(acc, Integer(d)) == e.constant;
}

}  // namespace

Theory theory_of(const EmpiricalModel& model, std::int64_t d) {
  const auto& sc = model.scenario();
  if (d != sc.modulus())
    throw PreconditionError("theory modulus " + std::to_string(d) + " differs from the outcome modulus " +
                            std::to_string(sc.modulus()));
  Theory t;
  t.modulus = d;
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    const auto& points = model.sections(c);
    for (auto& rel : linalg::affine_annihilator(points, d)) {
      LinearEquation e{c, std::move(rel.coefficients), rel.constant};
      for (const auto& s : points)
        if (!holds(e, s, d)) throw InvariantViolation("extracted equation fails on a section");
      t.equations.push_back(std::move(e));
    }
  }
  return t;
}

GlobalEquation to_global(const MeasurementScenario& sc, const LinearEquation& e) {
  GlobalEquation g;
  const auto& ctx = sc.context(e.context);
  for (std::size_t i = 0; i < ctx.size(); ++i)
    if (e.coefficients[i] != 0) g.terms.emplace_back(ctx[i], e.coefficients[i]);
  g.constant = e.constant;
  return g;
}

std::string format_equation(const MeasurementScenario& sc, const GlobalEquation& e, std::int64_t d) {
  std::string lhs;
  for (const auto& [x, c] : e.terms) {
    auto r = residue(c, d);
    if (r == 0) continue;
    if (!lhs.empty()) lhs += " + ";
    const auto& label = sc.label(x);
    lhs += (r == 1 ? "" : std::to_string(r) + "*") + (label.starts_with('-') ? "(" + label + ")" : label);
  }
  if (lhs.empty()) lhs = "0";
  return lhs + " = " + std::to_string(residue(e.constant, d)) + " (mod " + std::to_string(d) + ")";
}

std::string format_equation(const MeasurementScenario& sc, const LinearEquation& e, std::int64_t d) {
  return format_equation(sc, to_global(sc, e), d);
}

std::optional<Entailment> entails(const EmpiricalModel& model, const Theory& theory, const GlobalEquation& e) {
  const auto& sc = model.scenario();
  const std::int64_t d = theory.modulus;
  std::map<std::size_t, std::int64_t> target;
  for (const auto& [x, c] : e.terms) target[x] = residue(target[x] + c, d);
  MeasurementSet support;
  for (const auto& [x, c] : target) support.push_back(x);
  for (std::size_t c : sc.contexts_containing(support)) {
    const auto& ctx = sc.context(c);
    std::vector<std::size_t> eqs;
    for (std::size_t k = 0; k < theory.equations.size(); ++k)
      if (theory.equations[k].context == c) eqs.push_back(k);
    // Rows: one per measurement of C, then the constant.
    std::vector<std::int64_t> rhs;
    for (auto x : ctx) rhs.push_back(target.count(x) ? target[x] : 0);
    rhs.push_back(residue(e.constant, d));
    if (eqs.empty()) {
      if (std::all_of(rhs.begin(), rhs.end(), [](std::int64_t v) { return v == 0; })) return Entailment{c, {}};
      continue;
    }
    linalg::ModMatrix a(ctx.size() + 1, eqs.size(), d);
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      const auto& eq = theory.equations[eqs[k]];
      for (std::size_t i = 0; i < ctx.size(); ++i) a.set(i, k, eq.coefficients[i]);
      a.set(ctx.size(), k, eq.constant);
    }
    auto sol = linalg::solve_mod(a, rhs);
    if (!sol.feasible) continue;
    if (!linalg::verify_mod_solution(a, rhs, sol.x)) throw InvariantViolation("entailment combination fails");
    Entailment out{c, {}};
    for (std::size_t k = 0; k < eqs.size(); ++k)
      if (sol.x[k] != 0) out.combination.emplace_back(eqs[k], sol.x[k]);
    return out;
  }
  return std::nullopt;
}

AvnResult is_avn(const EmpiricalModel& model, std::int64_t d) { return is_avn(model, theory_of(model, d)); }

AvnResult is_avn(const EmpiricalModel& model, const Theory& theory) {
  const auto& sc = model.scenario();
  const std::int64_t d = theory.modulus;
  linalg::ModMatrix a(theory.equations.size(), sc.num_measurements(), d);
  std::vector<std::int64_t> b;
  for (std::size_t k = 0; k < theory.equations.size(); ++k) {
    const auto& e = theory.equations[k];
    const auto& ctx = sc.context(e.context);
    for (std::size_t i = 0; i < ctx.size(); ++i) a.set(k, ctx[i], e.coefficients[i]);
    b.push_back(e.constant);
  }
  AvnResult out;
  if (theory.equations.empty()) {
    out.witness.assign(sc.num_measurements(), 0);
    return out;
  }
  auto sol = linalg::solve_mod(a, b);
  out.is_avn = !sol.feasible;
  if (sol.feasible) {
    if (!linalg::verify_mod_solution(a, b, sol.x)) throw InvariantViolation("theory solution fails substitution");
    out.witness = std::move(sol.x);
  } else {
    if (!linalg::verify_mod_certificate(a, b, sol.certificate))
      throw InvariantViolation("theory refutation fails to verify");
    out.certificate = std::move(sol.certificate);
  }
  return out;
}

AvnCechReport avn_cech_consistency(const EmpiricalModel& model, std::int64_t d) {
  return avn_cech_consistency(CechAnalyzer(model), d);
}

AvnCechReport avn_cech_consistency(const CechAnalyzer& analyzer, std::int64_t d) {
  const auto& model = analyzer.model();
  AvnCechReport report;
  report.is_avn = is_avn(model, d).is_avn;
  if (!report.is_avn) return report;
  const auto& sc = model.scenario();
  for (std::size_t c = 0; c < sc.num_contexts(); ++c)
    for (std::size_t k = 0; k < model.sections(c).size(); ++k) {
      ++report.sections_checked;
      if (analyzer.obstruction(c, k).vanishes)
        report.violations.push_back("AvN model with vanishing obstruction at context " + std::to_string(c) +
                                    " section " + std::to_string(k));
    }
  return report;
}

}  // namespace ctx
