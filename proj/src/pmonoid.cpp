#include "ctx/pmonoid.hpp"

#include <algorithm>
#include <set>

#include "ctx/cliques.hpp"

namespace ctx {

namespace {

std::string join_report(const ValidationReport& r) {
  std::string out;
  for (const auto& v : r.violations) out += (out.empty() ? "" : "; ") + v;
  return out;
}

// Adds a violation unless the report already holds `cap` of them.
struct CappedReport {
  ValidationReport& report;
  std::size_t cap = 20;
  std::size_t suppressed = 0;
  void add(std::string msg) {
    if (report.violations.size() < cap) {
      report.add(std::move(msg));
    } else {
      ++suppressed;
    }
  }
  ~CappedReport() {
    if (suppressed) report.add("... and " + std::to_string(suppressed) + " more violations");
  }
};

}  // namespace

PartialMonoid::PartialMonoid(std::size_t size, std::size_t identity, std::vector<std::size_t> table,
                             std::vector<std::vector<std::size_t>> blocks, std::vector<std::string> names)
    : size_(size), identity_(identity), table_(std::move(table)), blocks_(std::move(blocks)), names_(std::move(names)) {
  if (size_ == 0) throw PreconditionError("partial monoid carrier is empty");
  if (identity_ >= size_) throw PreconditionError("identity element out of range");
  if (table_.size() != size_ * size_) throw PreconditionError("operation table has the wrong size");
  for (auto v : table_)
    if (v != kUndefined && v >= size_) throw PreconditionError("operation table refers to an unknown element");
  if (names_.empty()) {
    for (std::size_t x = 0; x < size_; ++x) names_.push_back(std::to_string(x));
  } else if (names_.size() != size_) {
    throw PreconditionError("element names do not match the carrier size");
  }
  if (blocks_.empty()) {
    std::vector<std::vector<bool>> adj(size_, std::vector<bool>(size_));
    for (std::size_t x = 0; x < size_; ++x)
      for (std::size_t y = 0; y < size_; ++y) adj[x][y] = defined(x, y) && defined(y, x);
    blocks_ = maximal_cliques(adj);
  }
  member_of_.assign(size_, {});
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    auto& block = blocks_[b];
    std::sort(block.begin(), block.end());
    block.erase(std::unique(block.begin(), block.end()), block.end());
    for (std::size_t x : block) {
      if (x >= size_) throw PreconditionError("block refers to an unknown element");
      member_of_[x].push_back(b);
    }
  }
}

bool PartialMonoid::composable(const std::vector<std::size_t>& tuple) const {
  if (tuple.empty()) return true;
  std::vector<std::size_t> common = member_of_.at(tuple.front());
  for (std::size_t k = 1; k < tuple.size() && !common.empty(); ++k) {
    std::vector<std::size_t> next;
    const auto& other = member_of_.at(tuple[k]);
    std::set_intersection(common.begin(), common.end(), other.begin(), other.end(), std::back_inserter(next));
    common = std::move(next);
  }
  return !common.empty();
}

ValidationReport validate_partial_monoid(const PartialMonoid& p) {
  ValidationReport report;
  {
    CappedReport r{report};
    const std::size_t n = p.size();
    const std::size_t e = p.identity();
    for (std::size_t x = 0; x < n; ++x)
      if (p.op(e, x) != x || p.op(x, e) != x) r.add("identity: 0 + " + p.name(x) + " is not " + p.name(x));
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y)
        if (p.op(x, y) != p.op(y, x))
          r.add("commutativity: " + p.name(x) + " + " + p.name(y) + " differs from " + p.name(y) + " + " + p.name(x));
    for (std::size_t b = 0; b < p.blocks().size(); ++b) {
      const auto& block = p.blocks()[b];
      std::set<std::size_t> members(block.begin(), block.end());
      if (!members.count(e)) r.add("block " + std::to_string(b) + " does not contain the identity");
      for (std::size_t x : block)
        for (std::size_t y : block) {
          std::size_t v = p.op(x, y);
          if (v == kUndefined || !members.count(v))
            r.add("block " + std::to_string(b) + " is not a total submonoid at " + p.name(x) + " + " + p.name(y));
        }
      for (std::size_t c = 0; c < p.blocks().size(); ++c)
        if (c != b && std::includes(p.blocks()[c].begin(), p.blocks()[c].end(), block.begin(), block.end()))
          r.add("block " + std::to_string(b) + " is contained in block " + std::to_string(c));
    }
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (p.defined(x, y) && !p.composable({x, y}))
          r.add("definedness: " + p.name(x) + " + " + p.name(y) + " is defined outside every block");
    for (const auto& block : p.blocks())
      for (std::size_t x : block)
        for (std::size_t y : block) {
          std::size_t xy = p.op(x, y);
          if (xy == kUndefined) continue;
          for (std::size_t z : block) {
            std::size_t yz = p.op(y, z);
            if (yz == kUndefined) continue;
            std::size_t left = p.op(xy, z);
            std::size_t right = p.op(x, yz);
            if (left != right || left == kUndefined)
              r.add("associativity: (" + p.name(x) + " + " + p.name(y) + ") + " + p.name(z) + " fails");
          }
        }
  }
  return report;
}

PartialMonoid glue_contexts(std::size_t size, const std::vector<ContextMonoid>& contexts,
                            std::vector<std::string> names) {
  if (contexts.empty()) throw PreconditionError("no contexts to glue");
  std::vector<std::size_t> table(size * size, kUndefined);
  std::vector<std::size_t> owner(size * size, kUndefined);
  const std::size_t identity = contexts.front().identity;
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t c = 0; c < contexts.size(); ++c) {
    const auto& ctx = contexts[c];
    const std::size_t k = ctx.elements.size();
    if (!std::is_sorted(ctx.elements.begin(), ctx.elements.end()))
      throw PreconditionError("context " + std::to_string(c) + " elements are not sorted");
    if (ctx.table.size() != k * k) throw PreconditionError("context " + std::to_string(c) + " table has the wrong size");
    if (ctx.identity != identity)
      throw PreconditionError("contexts 0 and " + std::to_string(c) + " have different identities");
    if (!std::binary_search(ctx.elements.begin(), ctx.elements.end(), identity))
      throw PreconditionError("context " + std::to_string(c) + " does not contain its identity");
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        const std::size_t x = ctx.elements[a], y = ctx.elements[b], v = ctx.table[a * k + b];
        if (x >= size || y >= size) throw PreconditionError("context " + std::to_string(c) + " has an unknown element");
        if (!std::binary_search(ctx.elements.begin(), ctx.elements.end(), v))
          throw PreconditionError("context " + std::to_string(c) + " is not closed under its operation");
        std::size_t& slot = table[x * size + y];
        if (slot == kUndefined) {
          slot = v;
          owner[x * size + y] = c;
        } else if (slot != v) {
          throw PreconditionError("contexts " + std::to_string(owner[x * size + y]) + " and " + std::to_string(c) +
                                  " disagree on the pair (" + std::to_string(x) + ", " + std::to_string(y) + ")");
        }
      }
    blocks.push_back(ctx.elements);
  }
  PartialMonoid glued(size, identity, table, blocks, names);
  // The maximal total submonoids must be exactly the contexts.
  PartialMonoid computed(size, identity, std::move(table), {}, std::move(names));
  auto expected = glued.blocks();
  std::sort(expected.begin(), expected.end());
  if (computed.blocks() != expected)
    throw PreconditionError("maximal total submonoids of the glued operation differ from the contexts");
  return glued;
}

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<std::int64_t> orders) : orders_(std::move(orders)), size_(1) {
  for (auto d : orders_) {
    if (d < 1) throw DomainError("cyclic factor orders must be positive");
    size_ *= static_cast<std::size_t>(d);
  }
}

std::vector<std::int64_t> FiniteAbelianGroup::decode(std::size_t a) const {
  std::vector<std::int64_t> out(orders_.size());
  for (std::size_t k = 0; k < orders_.size(); ++k) {
    const auto d = static_cast<std::size_t>(orders_[k]);
    out[k] = static_cast<std::int64_t>(a % d);
    a /= d;
  }
  return out;
}

std::size_t FiniteAbelianGroup::encode(const std::vector<std::int64_t>& components) const {
  if (components.size() != orders_.size()) throw DomainError("wrong number of group components");
  std::size_t a = 0;
  for (std::size_t k = orders_.size(); k-- > 0;) {
    const std::int64_t d = orders_[k];
    a = a * static_cast<std::size_t>(d) + static_cast<std::size_t>(((components[k] % d) + d) % d);
  }
  return a;
}

std::size_t FiniteAbelianGroup::add(std::size_t a, std::size_t b) const {
  auto x = decode(a), y = decode(b);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] += y[k];
  return encode(x);
}

std::size_t FiniteAbelianGroup::neg(std::size_t a) const {
  auto x = decode(a);
  for (auto& v : x) v = -v;
  return encode(x);
}

std::string FiniteAbelianGroup::to_string(std::size_t a) const {
  auto x = decode(a);
  if (x.size() == 1) return std::to_string(x[0]);
  std::string out = "(";
  for (std::size_t k = 0; k < x.size(); ++k) out += (k ? "," : "") + std::to_string(x[k]);
  return out + ")";
}

ValidationReport validate_action(const PartialMonoid& p, const CoefficientAction& action) {
  ValidationReport report;
  CappedReport r{report};
  const auto& g = action.group;
  if (action.embedding.size() != g.size()) {
    r.add("embedding does not list one element per group element");
    return report;
  }
  for (auto x : action.embedding)
    if (x >= p.size()) {
      r.add("embedding refers to an unknown element");
      return report;
    }
  if (action.embedding[0] != p.identity()) r.add("embedding does not send 0 to the identity");
  std::set<std::size_t> image(action.embedding.begin(), action.embedding.end());
  if (image.size() != g.size()) r.add("embedding is not injective");
  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t b = 0; b < g.size(); ++b)
      if (p.op(action.embedding[a], action.embedding[b]) != action.embedding[g.add(a, b)])
        r.add("embedding is not a homomorphism at (" + g.to_string(a) + ", " + g.to_string(b) + ")");
  for (std::size_t b = 0; b < p.blocks().size(); ++b)
    for (auto x : action.embedding)
      if (!std::binary_search(p.blocks()[b].begin(), p.blocks()[b].end(), x))
        r.add("embedded element " + p.name(x) + " is missing from block " + std::to_string(b));
  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t x = 0; x < p.size(); ++x) {
      std::size_t v = p.op(action.embedding[a], x);
      if (v == kUndefined) {
        r.add("action is not total: i(" + g.to_string(a) + ") + " + p.name(x) + " is undefined");
      } else if (a != 0 && v == x) {
        r.add("action is not free: i(" + g.to_string(a) + ") fixes " + p.name(x));
      }
    }
  return report;
}

namespace {

PartialMonoid placeholder_monoid() { return PartialMonoid(1, 0, {0}, {{0}}); }

}  // namespace

Quotient::Quotient(const PartialMonoid& p, CoefficientAction action)
    : p_(p), action_(std::move(action)), quotient_(placeholder_monoid()) {
  auto report = validate_action(p_, action_);
  if (!report.ok()) throw PreconditionError("invalid coefficient action: " + join_report(report));
  const std::size_t n = p_.size();
  orbit_of_.assign(n, kUndefined);
  for (std::size_t x = 0; x < n; ++x) {
    if (orbit_of_[x] != kUndefined) continue;
    std::vector<std::size_t> orbit;
    for (std::size_t a = 0; a < group().size(); ++a) orbit.push_back(act(a, x));
    std::sort(orbit.begin(), orbit.end());
    for (auto y : orbit) orbit_of_[y] = orbits_.size();
    orbits_.push_back(std::move(orbit));
  }
  const std::size_t m = orbits_.size();
  std::vector<std::size_t> table(m * m, kUndefined);
  for (std::size_t q1 = 0; q1 < m; ++q1)
    for (std::size_t q2 = 0; q2 < m; ++q2) {
      bool first = true;
      std::size_t value = kUndefined;
      for (auto x : orbits_[q1])
        for (auto y : orbits_[q2]) {
          std::size_t v = p_.op(x, y);
          std::size_t o = v == kUndefined ? kUndefined : orbit_of_[v];
          if (first) {
            value = o;
            first = false;
          } else if (o != value) {
            throw PreconditionError("induced operation is not well defined on [" + p_.name(orbits_[q1].front()) +
                                    "] + [" + p_.name(orbits_[q2].front()) + "]");
          }
        }
      table[q1 * m + q2] = value;
    }
  std::set<std::vector<std::size_t>> images;
  for (const auto& block : p_.blocks()) images.insert(image(block));
  std::vector<std::string> names;
  for (const auto& orbit : orbits_) names.push_back("[" + p_.name(orbit.front()) + "]");
  quotient_ = PartialMonoid(m, orbit_of_[p_.identity()], std::move(table),
                            std::vector<std::vector<std::size_t>>(images.begin(), images.end()), std::move(names));
}

std::size_t Quotient::difference(std::size_t x, std::size_t y) const {
  for (std::size_t a = 0; a < group().size(); ++a)
    if (act(a, y) == x) return a;
  throw DomainError("elements " + p_.name(x) + " and " + p_.name(y) + " lie in different orbits");
}

std::vector<std::size_t> Quotient::image(const std::vector<std::size_t>& elements) const {
  std::set<std::size_t> out;
  for (auto x : elements) out.insert(orbit_of_.at(x));
  return {out.begin(), out.end()};
}

ValidationReport check_left_splitting(const Quotient& q, const std::vector<std::size_t>& domain, const ElementMap& s) {
  return check_left_splitting(q.monoid(), q.action(), domain, s);
}

ValidationReport check_left_splitting(const PartialMonoid& p, const CoefficientAction& action,
                                      const std::vector<std::size_t>& domain, const ElementMap& s) {
  ValidationReport report;
  CappedReport r{report};
  const auto& g = action.group;
  if (s.size() != p.size()) {
    r.add("map is not indexed by the carrier");
    return report;
  }
  std::vector<bool> in_domain(p.size(), false);
  for (auto x : domain) {
    in_domain.at(x) = true;
    if (s[x] == kUndefined || s[x] >= g.size()) r.add("map is undefined or out of range at " + p.name(x));
  }
  if (!r.report.ok()) return report;
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto e = action.embedding.at(a);
    if (!in_domain[e]) {
      r.add("domain does not contain i(" + g.to_string(a) + ")");
    } else if (s[e] != a) {
      r.add("s(i(" + g.to_string(a) + ")) != " + g.to_string(a));
    }
  }
  for (auto x : domain)
    for (auto y : domain) {
      auto v = p.op(x, y);
      if (v == kUndefined) continue;
      if (!in_domain[v]) {
        r.add("domain is not closed at " + p.name(x) + " + " + p.name(y));
      } else if (s[v] != g.add(s[x], s[y])) {
        r.add("not a homomorphism at " + p.name(x) + " + " + p.name(y));
      }
    }
  return report;
}

Trivialisation trivialisation_from_splitting(const Quotient& q, const std::vector<std::size_t>& domain,
                                             const ElementMap& s) {
  auto report = check_left_splitting(q, domain, s);
  if (!report.ok()) throw PreconditionError("not a left splitting: " + join_report(report));
  Trivialisation phi;
  phi.domain = domain;
  phi.first.assign(q.monoid().size(), kUndefined);
  phi.second.assign(q.monoid().size(), kUndefined);
  for (auto x : domain) {
    phi.first[x] = s[x];
    phi.second[x] = q.orbit_of(x);
  }
  return phi;
}

ValidationReport check_trivialisation(const Quotient& q, const Trivialisation& phi) {
  ValidationReport report;
  if (phi.first.size() != q.monoid().size() || phi.second.size() != q.monoid().size()) {
    report.add("trivialisation is not indexed by the carrier");
    return report;
  }
  for (auto x : phi.domain)
    if (phi.second[x] != q.orbit_of(x)) report.add("second component differs from the projection at " + q.monoid().name(x));
  // phi ∘ i = in_1 is the splitting condition on the first component.
  report.merge(check_left_splitting(q, phi.domain, phi.first));
  return report;
}

ElementMap splitting_from_trivialisation(const Quotient& q, const Trivialisation& phi) {
  auto report = check_trivialisation(q, phi);
  if (!report.ok()) throw PreconditionError("not a trivialisation: " + join_report(report));
  return phi.first;
}

std::vector<std::size_t> invert_trivialisation(const Quotient& q, const Trivialisation& phi) {
  auto report = check_trivialisation(q, phi);
  if (!report.ok()) throw PreconditionError("not a trivialisation: " + join_report(report));
  const auto& g = q.group();
  const std::size_t na = g.size();
  std::vector<std::size_t> table(q.num_orbits() * na, kUndefined);
  std::vector<bool> seen(q.num_orbits(), false);
  for (auto x : phi.domain) {
    const auto o = q.orbit_of(x);
    if (seen[o]) continue;
    seen[o] = true;
    for (std::size_t a = 0; a < na; ++a) table[o * na + a] = q.act(g.sub(a, phi.first[x]), x);
  }
  // Two-sided inverse check.
  std::set<std::size_t> hit;
  for (std::size_t o = 0; o < q.num_orbits(); ++o) {
    if (!seen[o]) continue;
    for (std::size_t a = 0; a < na; ++a) {
      auto y = table[o * na + a];
      if (!std::binary_search(phi.domain.begin(), phi.domain.end(), y) || phi.first[y] != a || phi.second[y] != o)
        throw InvariantViolation("trivialisation inverse fails phi(phi^-1(a, q)) = (a, q)");
      hit.insert(y);
    }
  }
  for (auto x : phi.domain)
    if (table[phi.second[x] * na + phi.first[x]] != x)
      throw InvariantViolation("trivialisation inverse fails phi^-1(phi(x)) = x");
  if (hit.size() != phi.domain.size()) throw InvariantViolation("trivialisation is not a bijection");
  return table;
}

ElementMap right_splitting_of(const Quotient& q, const Trivialisation& phi) {
  auto inv = invert_trivialisation(q, phi);
  const std::size_t na = q.group().size();
  ElementMap h(q.num_orbits(), kUndefined);
  for (std::size_t o = 0; o < q.num_orbits(); ++o) h[o] = inv[o * na];
  return h;
}

Trivialisation trivialisation_from_right_splitting(const Quotient& q, const std::vector<std::size_t>& domain,
                                                   const ElementMap& h) {
  const auto& p = q.monoid();
  if (h.size() != q.num_orbits()) throw PreconditionError("right splitting is not indexed by the orbits");
  auto orbits = q.image(domain);
  for (auto o : orbits) {
    if (h[o] == kUndefined || h[o] >= p.size() || q.orbit_of(h[o]) != o)
      throw PreconditionError("h is not a section of the projection at orbit " + q.quotient_monoid().name(o));
    for (auto x : q.orbit(o))
      if (!std::binary_search(domain.begin(), domain.end(), x))
        throw PreconditionError("domain is not a union of orbits");
  }
  const auto& qm = q.quotient_monoid();
  for (auto o1 : orbits)
    for (auto o2 : orbits) {
      auto o = qm.op(o1, o2);
      if (o == kUndefined || !std::binary_search(orbits.begin(), orbits.end(), o)) continue;
      if (p.op(h[o1], h[o2]) != h[o])
        throw PreconditionError("h is not a homomorphism at " + qm.name(o1) + " + " + qm.name(o2));
    }
  Trivialisation phi;
  phi.domain = domain;
  phi.first.assign(p.size(), kUndefined);
  phi.second.assign(p.size(), kUndefined);
  for (auto x : domain) {
    phi.second[x] = q.orbit_of(x);
    phi.first[x] = q.difference(x, h[phi.second[x]]);
  }
  return phi;
}

}  // namespace ctx
