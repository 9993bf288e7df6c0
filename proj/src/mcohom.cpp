#include "ctx/mcohom.hpp"

#include <algorithm>

#include "ctx/linalg.hpp"

namespace ctx {

namespace {

constexpr std::size_t kMaxTupleCarrier = 128;

std::string join_report(const ValidationReport& r) {
  std::string out;
  for (const auto& v : r.violations) out += (out.empty() ? "" : "; ") + v;
  return out;
}

bool contains(const std::vector<std::size_t>& sorted, std::size_t x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

}  // namespace

ComposableTuples::ComposableTuples(const PartialMonoid& m) : m_(m.size()) {
  if (m_ > kMaxTupleCarrier) throw DomainError("composable triples are only tabulated for at most 128 elements");
  tuples_.assign(kMaxDegree + 1, {});
  lookup_.assign(kMaxDegree + 1, {});
  tuples_[0].push_back({});
  lookup_[0].assign(1, 0);
  std::size_t space = 1;
  for (std::size_t n = 1; n <= kMaxDegree; ++n) {
    space *= m_;
    std::vector<bool> mark(space, false);
    for (const auto& block : m.blocks()) {
      std::vector<std::size_t> pos(n, 0);
      const std::size_t b = block.size();
      if (b == 0) continue;
      while (true) {
        std::size_t code = 0;
        for (std::size_t k = 0; k < n; ++k) code = code * m_ + block[pos[k]];
        mark[code] = true;
        std::size_t k = n;
        while (k > 0 && ++pos[k - 1] == b) pos[--k] = 0;
        if (k == 0) break;
      }
    }
    lookup_[n].assign(space, kUndefined);
    for (std::size_t code = 0; code < space; ++code) {
      if (!mark[code]) continue;
      std::vector<std::size_t> t(n);
      std::size_t c = code;
      for (std::size_t k = n; k-- > 0;) {
        t[k] = c % m_;
        c /= m_;
      }
      lookup_[n][code] = tuples_[n].size();
      tuples_[n].push_back(std::move(t));
    }
  }
}

std::size_t ComposableTuples::index(const std::vector<std::size_t>& t) const {
  if (t.size() > kMaxDegree) return kUndefined;
  std::size_t code = 0;
  for (auto x : t) {
    if (x >= m_) return kUndefined;
    code = code * m_ + x;
  }
  return lookup_[t.size()][code];
}

Cochain zero_cochain(const ComposableTuples& t, std::size_t degree) {
  return {degree, std::vector<std::size_t>(t.count(degree), 0)};
}

Cochain coboundary(const PartialMonoid& m, const ComposableTuples& t, const FiniteAbelianGroup& a, const Cochain& f) {
  if (f.degree > 2) throw DomainError("coboundary is implemented for degrees 0, 1 and 2");
  if (f.values.size() != t.count(f.degree)) throw DomainError("cochain does not match the composable tuples");
  Cochain out = zero_cochain(t, f.degree + 1);
  if (f.degree == 0) return out;
  auto at = [&](const std::vector<std::size_t>& tuple) {
    auto k = t.index(tuple);
    if (k == kUndefined) throw InvariantViolation("face of a composable tuple is not composable");
    return f.values[k];
  };
  for (std::size_t k = 0; k < t.count(f.degree + 1); ++k) {
    const auto& u = t.tuple(f.degree + 1, k);
    std::size_t v;
    if (f.degree == 1) {
      const std::size_t s = m.op(u[0], u[1]);
      v = a.add(a.sub(at({u[1]}), at({s})), at({u[0]}));
    } else {
      const std::size_t s12 = m.op(u[0], u[1]);
      const std::size_t s23 = m.op(u[1], u[2]);
      v = at({u[1], u[2]});
      v = a.sub(v, at({s12, u[2]}));
      v = a.add(v, at({u[0], s23}));
      v = a.sub(v, at({u[0], u[1]}));
    }
    out.values[k] = v;
  }
  return out;
}

bool vanishes_on(const ComposableTuples& t, const Cochain& f, const std::vector<std::size_t>& relative) {
  for (std::size_t k = 0; k < t.count(f.degree); ++k) {
    const auto& u = t.tuple(f.degree, k);
    if (std::all_of(u.begin(), u.end(), [&](std::size_t x) { return contains(relative, x); }) && f.values[k] != 0)
      return false;
  }
  return true;
}

Cochain random_relative_cochain(const ComposableTuples& t, const FiniteAbelianGroup& a, std::size_t degree,
                                const std::vector<std::size_t>& relative, std::mt19937_64& rng) {
  Cochain f = zero_cochain(t, degree);
  std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
  for (std::size_t k = 0; k < t.count(degree); ++k) {
    const auto& u = t.tuple(degree, k);
    bool inside = std::all_of(u.begin(), u.end(), [&](std::size_t x) { return contains(relative, x); });
    f.values[k] = inside ? 0 : pick(rng);
  }
  return f;
}

ValidationReport validate_monoid_structure(const EmpiricalModel& model, const MonoidStructure& structure) {
  ValidationReport report;
  const auto& sc = model.scenario();
  const auto& orders = structure.action.group.orders();
  if (orders.size() != 1 || orders[0] != sc.modulus())
    report.add("outcome group: coefficient group is not Z_" + std::to_string(sc.modulus()));
  const auto& p = structure.monoid;
  if (p.size() != sc.num_measurements()) {
    report.add("context monoids: carrier size differs from the number of measurements");
    return report;
  }
  report.merge(validate_partial_monoid(p), "context monoids: ");
  auto blocks = p.blocks();
  auto contexts = sc.contexts();
  std::sort(blocks.begin(), blocks.end());
  std::sort(contexts.begin(), contexts.end());
  if (blocks != contexts) report.add("context monoids: maximal total submonoids differ from the contexts");
  auto action_report = validate_action(p, structure.action);
  report.merge(action_report, "action: ");
  if (!action_report.ok() || !report.ok()) return report;
  for (std::size_t c = 0; c < sc.num_contexts(); ++c)
    for (std::size_t k = 0; k < model.sections(c).size(); ++k) {
      ElementMap s(p.size(), kUndefined);
      const auto& ctx = sc.context(c);
      for (std::size_t i = 0; i < ctx.size(); ++i) s[ctx[i]] = static_cast<std::size_t>(model.sections(c)[k][i]);
      auto r = check_left_splitting(p, structure.action, ctx, s);
      if (!r.ok())
        report.add("sections: section " + std::to_string(k) + " of context " + std::to_string(c) +
                   " is not a left splitting (" + r.violations.front() + ")");
    }
  return report;
}

namespace {

Quotient checked_quotient(const EmpiricalModel& model, const MonoidStructure& structure) {
  auto report = validate_monoid_structure(model, structure);
  if (!report.ok()) throw PreconditionError("invalid monoid structure: " + join_report(report));
  return Quotient(structure.monoid, structure.action);
}

}  // namespace

// Per relative set: one prepared system per cyclic component of A, over the
// equations of the composable pairs that are not entirely relative.
struct GroupCohomology::Prepared {
  std::vector<std::size_t> rows;     // pair indices
  std::vector<std::size_t> columns;  // orbit -> unknown position or kUndefined
  std::vector<std::size_t> unknowns;
  std::vector<linalg::ModLinearSystem> systems;
};

GroupCohomology::GroupCohomology(const EmpiricalModel& model, const MonoidStructure& structure)
    : model_(model), quotient_(checked_quotient(model, structure)), tuples_(quotient_.quotient_monoid()) {}

ElementMap GroupCohomology::section_splitting(std::size_t c, std::size_t k) const {
  const auto& ctx = model_.scenario().context(c);
  const auto& values = model_.sections(c).at(k);
  ElementMap s(quotient_.monoid().size(), kUndefined);
  for (std::size_t i = 0; i < ctx.size(); ++i) s[ctx[i]] = static_cast<std::size_t>(values[i]);
  return s;
}

std::vector<std::size_t> GroupCohomology::representatives(std::size_t c, const ElementMap& s,
                                                          const std::optional<std::vector<std::size_t>>& off) const {
  const auto& q = quotient_;
  std::vector<std::size_t> eta(q.num_orbits(), kUndefined);
  for (std::size_t o = 0; o < q.num_orbits(); ++o) {
    if (off) {
      if (off->size() != q.num_orbits() || q.orbit_of(off->at(o)) != o)
        throw DomainError("alternative representative lies outside its orbit");
      eta[o] = (*off)[o];
    } else {
      eta[o] = q.least_representative(o);
    }
  }
  for (std::size_t x : model_.scenario().context(c)) {
    if (s.at(x) == kUndefined) throw DomainError("splitting is undefined on its context");
    eta[q.orbit_of(x)] = q.act(group().neg(s[x]), x);
  }
  return eta;
}

Cochain GroupCohomology::beta(const std::vector<std::size_t>& eta) const {
  const auto& qm = quotient_monoid();
  const auto& p = quotient_.monoid();
  Cochain out = zero_cochain(tuples_, 2);
  for (std::size_t k = 0; k < tuples_.count(2); ++k) {
    const auto& u = tuples_.tuple(2, k);
    const std::size_t sum = qm.op(u[0], u[1]);
    const std::size_t rhs = p.op(eta[u[0]], eta[u[1]]);
    if (sum == kUndefined || rhs == kUndefined)
      throw InvariantViolation("representatives of a composable pair do not compose");
    out.values[k] = quotient_.difference(eta[sum], rhs);
  }
  return out;
}

const GroupCohomology::Prepared& GroupCohomology::prepared(const std::vector<std::size_t>& relative) const {
  auto it = cache_.find(relative);
  if (it != cache_.end()) return *it->second;
  auto prep = std::make_shared<Prepared>();
  const auto& qm = quotient_monoid();
  prep->columns.assign(qm.size(), kUndefined);
  for (std::size_t o = 0; o < qm.size(); ++o)
    if (!contains(relative, o)) {
      prep->columns[o] = prep->unknowns.size();
      prep->unknowns.push_back(o);
    }
  for (std::size_t k = 0; k < tuples_.count(2); ++k) {
    const auto& u = tuples_.tuple(2, k);
    const std::size_t s = qm.op(u[0], u[1]);
    if (contains(relative, u[0]) && contains(relative, u[1]) && contains(relative, s)) continue;
    prep->rows.push_back(k);
  }
  for (auto d : group().orders()) {
    linalg::ModMatrix a(prep->rows.size(), prep->unknowns.size(), std::max<std::int64_t>(d, 2));
    for (std::size_t r = 0; r < prep->rows.size(); ++r) {
      const auto& u = tuples_.tuple(2, prep->rows[r]);
      const std::size_t s = qm.op(u[0], u[1]);
      auto bump = [&](std::size_t o, std::int64_t coeff) {
        if (prep->columns[o] != kUndefined) a.set(r, prep->columns[o], a(r, prep->columns[o]) + coeff);
      };
      bump(u[1], 1);
      bump(s, -1);
      bump(u[0], 1);
    }
    prep->systems.emplace_back(std::move(a));
  }
  auto& slot = cache_[relative];
  slot = std::move(prep);
  return *slot;
}

CoboundaryResult GroupCohomology::is_coboundary(const Cochain& beta, const std::vector<std::size_t>& relative) const {
  if (beta.degree != 2 || beta.values.size() != tuples_.count(2)) throw DomainError("expected a degree-2 cochain");
  if (!vanishes_on(tuples_, beta, relative)) throw PreconditionError("cochain does not vanish on the relative set");
  const auto& prep = prepared(relative);
  const auto& orders = group().orders();
  CoboundaryResult out;
  std::vector<std::vector<std::int64_t>> gamma_parts(orders.size());
  for (std::size_t comp = 0; comp < orders.size(); ++comp) {
    if (orders[comp] == 1) {
      gamma_parts[comp].assign(prep.unknowns.size(), 0);
      continue;
    }
    std::vector<std::int64_t> rhs(prep.rows.size());
    for (std::size_t r = 0; r < prep.rows.size(); ++r) rhs[r] = group().decode(beta.values[prep.rows[r]])[comp];
    auto sol = prep.systems[comp].solve(rhs);
    if (!sol.feasible) {
      for (std::size_t r = 0; r < prep.rows.size(); ++r)
        if (sol.certificate[r] != 0) out.certificate.push_back({prep.rows[r], comp, sol.certificate[r]});
      out.is_coboundary = false;
      return out;
    }
    gamma_parts[comp] = std::move(sol.x);
  }
  out.is_coboundary = true;
  out.gamma = zero_cochain(tuples_, 1);
  for (std::size_t j = 0; j < prep.unknowns.size(); ++j) {
    std::vector<std::int64_t> comps(orders.size());
    for (std::size_t comp = 0; comp < orders.size(); ++comp) comps[comp] = gamma_parts[comp][j];
    out.gamma.values[tuples_.index({prep.unknowns[j]})] = group().encode(comps);
  }
  if (coboundary(quotient_monoid(), tuples_, group(), out.gamma) != beta)
    throw InvariantViolation("solved gamma does not reproduce beta");
  return out;
}

bool GroupCohomology::verify_certificate(const Cochain& beta, const std::vector<std::size_t>& relative,
                                         const std::vector<CertificateEntry>& certificate) const {
  if (certificate.empty()) return false;
  const auto& qm = quotient_monoid();
  const auto& orders = group().orders();
  const std::size_t comp = certificate.front().component;
  const std::int64_t d = orders.at(comp);
  std::vector<std::int64_t> column(qm.size(), 0);
  std::int64_t yb = 0;
  for (const auto& e : certificate) {
    if (e.component != comp || e.pair >= tuples_.count(2)) return false;
    const auto& u = tuples_.tuple(2, e.pair);
    const std::size_t s = qm.op(u[0], u[1]);
    column[u[1]] += e.coefficient;
    column[s] -= e.coefficient;
    column[u[0]] += e.coefficient;
    yb += e.coefficient * group().decode(beta.values[e.pair])[comp];
  }
  for (std::size_t o = 0; o < qm.size(); ++o)
    if (!contains(relative, o) && mod_floor(column[o], d) != 0) return false;
  return mod_floor(yb, d) != 0;
}

GroupObstruction group_obstruction(const GroupCohomology& gc, std::size_t c, std::size_t k,
                                   const std::optional<std::vector<std::size_t>>& off_context) {
  GroupObstruction out;
  out.context = c;
  out.section = k;
  out.relative = gc.relative_set(c);
  const ElementMap s0 = gc.section_splitting(c, k);
  out.eta = gc.representatives(c, s0, off_context);
  out.beta = gc.beta(out.eta);
  const auto& t = gc.tuples();
  if (!vanishes_on(t, out.beta, out.relative)) throw InvariantViolation("beta does not vanish on the relative set");
  if (coboundary(gc.quotient_monoid(), t, gc.group(), out.beta) != zero_cochain(t, 3))
    throw InvariantViolation("beta is not a cocycle");
  auto result = gc.is_coboundary(out.beta, out.relative);
  out.vanishes = result.is_coboundary;
  if (!out.vanishes) {
    out.certificate = std::move(result.certificate);
    if (!gc.verify_certificate(out.beta, out.relative, out.certificate))
      throw InvariantViolation("coboundary refutation does not verify");
    return out;
  }
  out.gamma = std::move(result.gamma);
  const auto& q = gc.quotient();
  ElementMap h(q.num_orbits());
  for (std::size_t o = 0; o < q.num_orbits(); ++o) h[o] = q.act(out.gamma.values[t.index({o})], out.eta[o]);
  std::vector<std::size_t> everything(q.monoid().size());
  for (std::size_t x = 0; x < everything.size(); ++x) everything[x] = x;
  auto phi = trivialisation_from_right_splitting(q, everything, h);
  out.global_splitting = phi.first;
  if (!check_left_splitting(q, everything, out.global_splitting).ok())
    throw InvariantViolation("rebuilt global map is not a left splitting");
  for (std::size_t x : gc.model().scenario().context(c))
    if (out.global_splitting[x] != s0[x]) throw InvariantViolation("rebuilt global splitting does not extend the section");
  return out;
}

std::vector<std::size_t> random_representatives(const Quotient& q, std::mt19937_64& rng) {
  std::vector<std::size_t> eta(q.num_orbits());
  for (std::size_t o = 0; o < q.num_orbits(); ++o) {
    const auto& orbit = q.orbit(o);
    eta[o] = orbit[rng() % orbit.size()];
  }
  return eta;
}

}  // namespace ctx
