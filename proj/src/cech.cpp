#include "ctx/cech.hpp"

#include <algorithm>

#include "ctx/mcohom.hpp"

namespace ctx {

namespace {

MeasurementSet common_support(const MeasurementScenario& sc, const std::vector<std::size_t>& tuple) {
  MeasurementSet u = sc.context(tuple.front());
  for (std::size_t i = 1; i < tuple.size() && !u.empty(); ++i) u = set_intersection(u, sc.context(tuple[i]));
  return u;
}

std::vector<std::size_t> drop(const std::vector<std::size_t>& t, std::size_t i) {
  std::vector<std::size_t> out;
  out.reserve(t.size() - 1);
  for (std::size_t j = 0; j < t.size(); ++j)
    if (j != i) out.push_back(t[j]);
  return out;
}

}  // namespace

CechComplex::CechComplex(const EmpiricalModel& model, std::size_t max_degree) : model_(model) {
  const auto& sc = model_.scenario();
  const std::size_t n = sc.num_contexts();
  simplices_.resize(max_degree + 1);
  lookup_.resize(max_degree + 1);
  for (std::size_t q = 0; q <= max_degree; ++q) {
    std::size_t total = 1;
    for (std::size_t i = 0; i <= q; ++i) {
      if (total > 50'000'000 / std::max<std::size_t>(n, 1))
        throw DomainError("nerve too large to materialize in degree " + std::to_string(q));
      total *= n;
    }
    lookup_[q].assign(total, kUndefined);
    std::vector<std::size_t> tuple(q + 1, 0);
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t rest = code;
      for (std::size_t i = q + 1; i-- > 0;) {
        tuple[i] = rest % n;
        rest /= n;
      }
      MeasurementSet u = common_support(sc, tuple);
      if (u.empty()) continue;
      Simplex s;
      s.tuple = tuple;
      s.support = std::move(u);
      s.basis = basis_ptr(s.support);
      if (q > 0) {
        for (std::size_t i = 0; i <= q; ++i) {
          auto face = drop(tuple, i);
          auto f = index(face);
          if (!f) throw InvariantViolation("nerve face missing");
          s.faces.push_back(*f);
          s.face_tables.push_back(&restriction(simplices_[q - 1][*f].support, s.support));
        }
      }
      lookup_[q][code] = simplices_[q].size();
      simplices_[q].push_back(std::move(s));
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    const auto& basis = *simplices_[0][*index({c})].basis;
    const auto& sections = model_.sections(c);
    if (basis.size() != sections.size())
      throw PreconditionError("sections of context " + std::to_string(c) + " differ from the presheaf basis");
    for (std::size_t k = 0; k < basis.size(); ++k)
      if (basis[k].values != sections[k])
        throw PreconditionError("sections of context " + std::to_string(c) + " differ from the presheaf basis");
  }
}

std::optional<std::size_t> CechComplex::index(const std::vector<std::size_t>& tuple) const {
  if (tuple.empty() || tuple.size() > simplices_.size()) return std::nullopt;
  const std::size_t n = model_.scenario().num_contexts();
  std::size_t code = 0;
  for (auto c : tuple) {
    if (c >= n) return std::nullopt;
    code = code * n + c;
  }
  auto v = lookup_[tuple.size() - 1].size() > code ? lookup_[tuple.size() - 1][code] : kUndefined;
  if (v == kUndefined) return std::nullopt;
  return v;
}

std::shared_ptr<const std::vector<Section>> CechComplex::basis_ptr(const MeasurementSet& u) const {
  auto it = presheaf_.find(u);
  if (it != presheaf_.end()) return it->second;
  auto p = std::make_shared<const std::vector<Section>>(sections_below(model_, u));
  presheaf_.emplace(u, p);
  return p;
}

const std::vector<Section>& CechComplex::sections_over(const MeasurementSet& u) const { return *basis_ptr(u); }

const std::vector<std::size_t>& CechComplex::restriction(const MeasurementSet& v, const MeasurementSet& u) const {
  auto key = std::make_pair(v, u);
  auto it = restrictions_.find(key);
  if (it != restrictions_.end()) return it->second;
  if (!is_subset(u, v)) throw DomainError("restriction to a set that is not a subset");
  const auto& from = sections_over(v);
  const auto& to = sections_over(u);
  Table table;
  table.reserve(from.size());
  for (const auto& s : from) {
    auto r = restrict_section(s, u);
    auto pos = std::lower_bound(to.begin(), to.end(), r);
    if (pos == to.end() || *pos != r)
      throw PreconditionError("model is signalling: a restricted section is missing from S(U)");
    table.push_back(static_cast<std::size_t>(pos - to.begin()));
  }
  return restrictions_.emplace(std::move(key), std::move(table)).first->second;
}

IntCochain CechComplex::zero(std::size_t q) const {
  IntCochain w;
  w.degree = q;
  w.values.reserve(count(q));
  for (const auto& s : simplices_.at(q)) w.values.emplace_back(s.basis->size());
  return w;
}

IntCochain CechComplex::coboundary(const IntCochain& w) const {
  const std::size_t q = w.degree;
  if (q + 1 > max_degree()) throw DomainError("coboundary target degree is not materialized");
  if (w.values.size() != count(q)) throw DomainError("cochain does not match the nerve");
  IntCochain out = zero(q + 1);
  for (std::size_t i = 0; i < count(q + 1); ++i) {
    const Simplex& s = simplices_[q + 1][i];
    auto& target = out.values[i];
    for (std::size_t f = 0; f < s.faces.size(); ++f) {
      const auto& src = w.values[s.faces[f]];
      const Table& table = *s.face_tables[f];
      for (std::size_t k = 0; k < src.size(); ++k) {
        if (src[k].is_zero()) continue;
        if (f % 2 == 0)
          target[table[k]] += src[k];
        else
          target[table[k]] -= src[k];
      }
    }
  }
  return out;
}

std::vector<Integer> CechComplex::face_sum(const IntCochain& w, const std::vector<std::size_t>& sigma,
                                           const MeasurementSet& support) const {
  std::vector<Integer> out(sections_over(support).size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    auto face = drop(sigma, i);
    auto f = index(face);
    if (!f || face.size() != w.degree + 1) throw DomainError("face is not a simplex of the cochain's degree");
    const auto& table = restriction(simplices_[w.degree][*f].support, support);
    const auto& src = w.values.at(*f);
    for (std::size_t k = 0; k < src.size(); ++k) {
      if (i % 2 == 0)
        out[table[k]] += src[k];
      else
        out[table[k]] -= src[k];
    }
  }
  return out;
}

std::vector<Integer> CechComplex::coboundary_at(const IntCochain& w, const std::vector<std::size_t>& sigma) const {
  if (sigma.size() != w.degree + 2) throw DomainError("simplex has the wrong degree");
  MeasurementSet u = common_support(model_.scenario(), sigma);
  if (u.empty()) throw DomainError("simplex has empty support");
  return face_sum(w, sigma, u);
}

std::vector<Integer> CechComplex::double_coboundary_at(const IntCochain& w,
                                                       const std::vector<std::size_t>& sigma) const {
  if (sigma.size() != w.degree + 3) throw DomainError("simplex has the wrong degree");
  MeasurementSet u = common_support(model_.scenario(), sigma);
  if (u.empty()) throw DomainError("simplex has empty support");
  std::vector<Integer> out(sections_over(u).size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    auto face = drop(sigma, i);
    MeasurementSet fu = common_support(model_.scenario(), face);
    auto values = face_sum(w, face, fu);
    const auto& table = restriction(fu, u);
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (i % 2 == 0)
        out[table[k]] += values[k];
      else
        out[table[k]] -= values[k];
    }
  }
  return out;
}

bool CechComplex::is_relative(const IntCochain& w, std::size_t c0) const {
  const std::size_t q = w.degree;
  if (w.values.size() != count(q)) throw DomainError("cochain does not match the nerve");
  auto key = std::make_pair(q, c0);
  auto it = relative_tables_.find(key);
  if (it == relative_tables_.end()) {
    std::vector<const Table*> tables;
    const auto& ctx0 = model_.scenario().context(c0);
    for (const auto& s : simplices_[q]) tables.push_back(&restriction(s.support, set_intersection(s.support, ctx0)));
    it = relative_tables_.emplace(key, std::move(tables)).first;
  }
  std::vector<Integer> acc;
  for (std::size_t i = 0; i < count(q); ++i) {
    const Table& table = *it->second[i];
    const auto& v = w.values[i];
    std::size_t width = 0;
    for (auto t : table) width = std::max(width, t + 1);
    acc.assign(width, Integer(0));
    for (std::size_t k = 0; k < v.size(); ++k) acc[table[k]] += v[k];
    for (const auto& a : acc)
      if (!a.is_zero()) return false;
  }
  return true;
}

std::string describe(const FamilyConstraint& c, const MeasurementScenario& sc) {
  auto section_text = [&](const Section& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.domain.size(); ++i) {
      if (i) out += ", ";
      out += sc.label(s.domain[i]) + "=" + std::to_string(s.values[i]);
    }
    return out + "}";
  };
  switch (c.kind) {
    case FamilyConstraint::Kind::Overlap:
      return "overlap C" + std::to_string(c.first) + "/C" + std::to_string(c.second) + " at " + section_text(c.at);
    case FamilyConstraint::Kind::Pin:
      return "pin C" + std::to_string(c.first) + " at " + section_text(c.at);
    case FamilyConstraint::Kind::Relative:
      return "relative C" + std::to_string(c.first) + " at " + section_text(c.at);
  }
  return {};
}

struct CechAnalyzer::Overlap {
  std::size_t first;
  std::size_t second;
  std::size_t simplex;  // index of (first, second) among the 1-simplices
  const std::vector<std::size_t>* first_table;
  const std::vector<std::size_t>* second_table;
  const std::vector<Section>* basis;
  std::size_t first_row;
};

struct CechAnalyzer::Prepared {
  linalg::LatticeSystem system;
  std::vector<FamilyConstraint> extra;  // rows after the overlap rows
};

CechAnalyzer::CechAnalyzer(const EmpiricalModel& model) : complex_(model, 1) {
  const auto& sc = model.scenario();
  if (!cover_is_connected(sc)) throw PreconditionError("cover is not connected");
  const std::size_t n = sc.num_contexts();
  offsets_.resize(n + 1);
  for (std::size_t c = 0; c < n; ++c) offsets_[c + 1] = offsets_[c] + model.sections(c).size();

  auto base = std::make_shared<linalg::LatticeSystem>(offsets_[n]);
  std::size_t row = 0;
  for (std::size_t i = 0; i < complex_.count(1); ++i) {
    const auto& t = complex_.simplex(1, i);
    if (t[0] >= t[1]) continue;
    const auto& u = complex_.support(1, i);
    Overlap o{t[0],
              t[1],
              i,
              &complex_.restriction(sc.context(t[0]), u),
              &complex_.restriction(sc.context(t[1]), u),
              &complex_.basis(1, i),
              row};
    // Row for section w of U: (x_second - x_first)|_U at w.
    std::vector<linalg::SparseRow> rows(o.basis->size());
    for (std::size_t s = 0; s < o.second_table->size(); ++s) rows[(*o.second_table)[s]].add(offsets_[o.second] + s, 1);
    for (std::size_t s = 0; s < o.first_table->size(); ++s) rows[(*o.first_table)[s]].add(offsets_[o.first] + s, -1);
    for (auto& r : rows) base->add_row(std::move(r));
    row += o.basis->size();
    overlaps_.push_back(o);
  }
  base_ = std::move(base);
}

CechAnalyzer::~CechAnalyzer() = default;

const CechAnalyzer::Prepared& CechAnalyzer::family_system(std::size_t c0) const {
  auto it = family_cache_.find(c0);
  if (it != family_cache_.end()) return *it->second;
  auto p = std::make_shared<Prepared>(Prepared{*base_, {}});
  const auto& sections = model().sections(c0);
  for (std::size_t s = 0; s < sections.size(); ++s) {
    linalg::SparseRow r;
    r.add(offsets_[c0] + s, 1);
    p->system.add_row(std::move(r));
    p->extra.push_back({FamilyConstraint::Kind::Pin, c0, s, model().section(c0, s)});
  }
  return *family_cache_.emplace(c0, std::move(p)).first->second;
}

const CechAnalyzer::Prepared& CechAnalyzer::relative_system(std::size_t c0) const {
  auto it = relative_cache_.find(c0);
  if (it != relative_cache_.end()) return *it->second;
  auto p = std::make_shared<Prepared>(Prepared{*base_, {}});
  const auto& sc = model().scenario();
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    auto v = set_intersection(sc.context(c), sc.context(c0));
    const auto& table = complex_.restriction(sc.context(c), v);
    const auto& basis = complex_.sections_over(v);
    std::vector<linalg::SparseRow> rows(basis.size());
    for (std::size_t s = 0; s < table.size(); ++s) rows[table[s]].add(offsets_[c] + s, 1);
    for (std::size_t w = 0; w < rows.size(); ++w) {
      p->system.add_row(std::move(rows[w]));
      p->extra.push_back({FamilyConstraint::Kind::Relative, c, w, basis[w]});
    }
  }
  return *relative_cache_.emplace(c0, std::move(p)).first->second;
}

FamilyCertificate CechAnalyzer::certificate_rows(const Prepared& p, const linalg::IntegerCertificate& cert) const {
  FamilyCertificate out;
  out.denominator = cert.denominator;
  out.rational = cert.rational;
  const std::size_t base_rows = base_->num_rows();
  for (const auto& [row, v] : cert.numerators) {
    FamilyConstraint fc;
    if (row >= base_rows) {
      fc = p.extra.at(row - base_rows);
    } else {
      auto it = std::upper_bound(overlaps_.begin(), overlaps_.end(), row,
                                 [](std::size_t r, const Overlap& o) { return r < o.first_row; });
      const Overlap& o = *std::prev(it);
      fc = {FamilyConstraint::Kind::Overlap, o.first, o.second, (*o.basis)[row - o.first_row]};
    }
    out.rows.push_back({std::move(fc), v});
  }
  return out;
}

CechVerdict CechAnalyzer::obstruction(std::size_t c0, std::size_t k) const {
  const auto& sc = model().scenario();
  if (c0 >= sc.num_contexts() || k >= model().sections(c0).size()) throw DomainError("no such section");
  const Prepared& p = family_system(c0);
  std::vector<Integer> rhs(p.system.num_rows());
  rhs[base_->num_rows() + k] = 1;
  auto sol = p.system.solve(rhs);
  CechVerdict out;
  out.context = c0;
  out.section = k;
  out.vanishes = sol.feasible;
  if (sol.feasible) {
    if (!p.system.verify_solution(rhs, sol.x)) throw InvariantViolation("family solution fails substitution");
    out.family.resize(sc.num_contexts());
    for (std::size_t c = 0; c < sc.num_contexts(); ++c)
      out.family[c].assign(sol.x.begin() + static_cast<std::ptrdiff_t>(offsets_[c]),
                           sol.x.begin() + static_cast<std::ptrdiff_t>(offsets_[c + 1]));
    if (!is_compatible(out.family) || !is_pinned(out.family, c0, k))
      throw InvariantViolation("witness family is not compatible and pinned");
  } else {
    if (!p.system.verify_certificate(rhs, sol.certificate))
      throw InvariantViolation("family infeasibility certificate fails to verify");
    out.certificate = certificate_rows(p, sol.certificate);
  }
  return out;
}

std::vector<std::size_t> CechAnalyzer::lift(std::size_t c0, std::size_t k) const {
  const auto& sc = model().scenario();
  const Section s0 = model().section(c0, k);
  std::vector<std::size_t> out(sc.num_contexts());
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    auto v = set_intersection(sc.context(c), sc.context(c0));
    auto target = restrict_section(s0, v);
    const auto& sections = model().sections(c);
    std::size_t chosen = kUndefined;
    for (std::size_t s = 0; s < sections.size() && chosen == kUndefined; ++s)
      if (restrict_section(model().section(c, s), v) == target) chosen = s;
    // Flasque beneath the cover: every restriction of s0 extends.
    if (chosen == kUndefined) throw PreconditionError("model is signalling: s0 does not extend to a context");
    out[c] = chosen;
  }
  return out;
}

IntCochain CechAnalyzer::lift_cochain(const std::vector<std::size_t>& lift) const {
  IntCochain w = complex_.zero(0);
  for (std::size_t c = 0; c < lift.size(); ++c) w.values[*complex_.index({c})][lift[c]] = 1;
  return w;
}

ConnectingCocycle CechAnalyzer::connecting_cocycle(std::size_t c0, std::size_t k) const {
  const auto& sc = model().scenario();
  if (c0 >= sc.num_contexts() || k >= model().sections(c0).size()) throw DomainError("no such section");
  ConnectingCocycle out;
  out.context = c0;
  out.section = k;
  out.lift = lift(c0, k);
  IntCochain omega = lift_cochain(out.lift);
  out.z = complex_.coboundary(omega);
  if (!complex_.is_relative(out.z, c0)) throw InvariantViolation("connecting cocycle is not relative");

  const Prepared& p = relative_system(c0);
  std::vector<Integer> rhs(p.system.num_rows());
  for (const auto& o : overlaps_) {
    const auto& z = out.z.values[o.simplex];
    for (std::size_t w = 0; w < z.size(); ++w) rhs[o.first_row + w] = z[w];
  }
  auto sol = p.system.solve(rhs);
  out.is_coboundary = sol.feasible;
  if (!sol.feasible) {
    if (!p.system.verify_certificate(rhs, sol.certificate))
      throw InvariantViolation("coboundary infeasibility certificate fails to verify");
    out.certificate = certificate_rows(p, sol.certificate);
    return out;
  }
  if (!p.system.verify_solution(rhs, sol.x)) throw InvariantViolation("coboundary solution fails substitution");
  out.nu = complex_.zero(0);
  out.family.resize(sc.num_contexts());
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    auto& nu = out.nu.values[*complex_.index({c})];
    for (std::size_t s = 0; s < nu.size(); ++s) nu[s] = sol.x[offsets_[c] + s];
    out.family[c] = omega.values[*complex_.index({c})];
    for (std::size_t s = 0; s < nu.size(); ++s) out.family[c][s] -= nu[s];
  }
  if (complex_.coboundary(out.nu) != out.z || !complex_.is_relative(out.nu, c0))
    throw InvariantViolation("relative cochain does not bound the connecting cocycle");
  if (!is_compatible(out.family) || !is_pinned(out.family, c0, k))
    throw InvariantViolation("omega - nu is not a pinned compatible family");
  return out;
}

bool CechAnalyzer::is_compatible(const IntFamily& family) const {
  const auto& sc = model().scenario();
  if (family.size() != sc.num_contexts()) return false;
  for (std::size_t c = 0; c < sc.num_contexts(); ++c)
    if (family[c].size() != model().sections(c).size()) return false;
  for (const auto& o : overlaps_) {
    std::vector<Integer> diff(o.basis->size());
    for (std::size_t s = 0; s < o.second_table->size(); ++s) diff[(*o.second_table)[s]] += family[o.second][s];
    for (std::size_t s = 0; s < o.first_table->size(); ++s) diff[(*o.first_table)[s]] -= family[o.first][s];
    for (const auto& d : diff)
      if (!d.is_zero()) return false;
  }
  return true;
}

bool CechAnalyzer::is_pinned(const IntFamily& family, std::size_t c0, std::size_t k) const {
  if (c0 >= family.size()) return false;
  for (std::size_t s = 0; s < family[c0].size(); ++s)
    if (family[c0][s] != (s == k ? 1 : 0)) return false;
  return true;
}

CechVerdict cech_obstruction_vanishes(const EmpiricalModel& model, std::size_t c0, std::size_t k) {
  return CechAnalyzer(model).obstruction(c0, k);
}

ElementMap collapse_family(const EmpiricalModel& model, const IntFamily& family) {
  const auto& sc = model.scenario();
  const Integer d = sc.modulus();
  if (family.size() != sc.num_contexts()) throw PreconditionError("family does not cover every context");
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    if (family[c].size() != model.sections(c).size()) throw PreconditionError("family has the wrong shape");
    Integer total = 0;
    for (const auto& v : family[c]) total += v;
    if (total != 1) throw PreconditionError("coefficients of context " + std::to_string(c) + " do not sum to 1");
  }
  ElementMap g(sc.num_measurements(), kUndefined);
  for (std::size_t x = 0; x < sc.num_measurements(); ++x) {
    for (std::size_t c : sc.contexts_containing(x)) {
      const auto& ctx = sc.context(c);
      const std::size_t pos = static_cast<std::size_t>(std::lower_bound(ctx.begin(), ctx.end(), x) - ctx.begin());
      Integer acc = 0;
      for (std::size_t s = 0; s < family[c].size(); ++s) acc += family[c][s] * model.sections(c)[s][pos];
      const auto value = static_cast<std::size_t>(mod_floor(acc, d));
      if (g[x] == kUndefined)
        g[x] = value;
      else if (g[x] != value)
        throw PreconditionError("collapsed value of " + sc.label(x) + " depends on the context");
    }
  }
  return g;
}

ImplicationReport check_splitting_implication(const EmpiricalModel& model, const MonoidStructure& structure) {
  GroupCohomology gc(model, structure);
  CechAnalyzer cech(model);
  ImplicationReport report;
  const auto& sc = model.scenario();
  std::vector<std::size_t> carrier(structure.monoid.size());
  for (std::size_t x = 0; x < carrier.size(); ++x) carrier[x] = x;
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    for (std::size_t k = 0; k < model.sections(c).size(); ++k) {
      ImplicationEntry e;
      e.context = c;
      e.section = k;
      auto verdict = cech.obstruction(c, k);
      auto group = group_obstruction(gc, c, k);
      e.cech_vanishes = verdict.vanishes;
      e.group_vanishes = group.vanishes;
      const std::string where = "context " + std::to_string(c) + " section " + std::to_string(k);
      if (e.cech_vanishes && !e.group_vanishes)
        report.violations.push_back(where + ": gamma vanishes but [beta] does not");
      if (e.cech_vanishes) {
        auto g = collapse_family(model, verdict.family);
        bool extends = true;
        const auto& ctx = sc.context(c);
        for (std::size_t i = 0; i < ctx.size(); ++i)
          if (g[ctx[i]] != static_cast<std::size_t>(model.sections(c)[k][i])) extends = false;
        e.collapse_verified = extends && check_left_splitting(structure.monoid, structure.action, carrier, g).ok();
        if (!e.collapse_verified)
          report.violations.push_back(where + ": collapsed family is not a splitting extending s0");
      }
      report.entries.push_back(e);
    }
  }
  return report;
}

}  // namespace ctx
