#include <doctest.h>

#include <random>
#include <set>

#include "ctx/errors.hpp"
#include "ctx/mcohom.hpp"
#include "ctx/model_io.hpp"
#include "ctx/pmonoid.hpp"

using namespace ctx;

namespace {

// Z2 x Z2 encoded as a + 2b.
ContextMonoid klein(std::vector<std::size_t> elements) {
  ContextMonoid c{std::move(elements), 0, {}};
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) c.table.push_back(c.elements[a ^ b]);
  c.identity = c.elements[0];
  return c;
}

// e, a shared; {e, a, b, a+b} and {e, a, c, a+c}.
PartialMonoid two_blocks() { return glue_contexts(6, {klein({0, 1, 2, 3}), klein({0, 1, 4, 5})}); }

CoefficientAction z2_on(std::size_t generator) { return {FiniteAbelianGroup({2}), {0, generator}}; }

bool same_on(const std::vector<std::size_t>& domain, const ElementMap& a, const ElementMap& b) {
  for (auto x : domain)
    if (a[x] != b[x]) return false;
  return true;
}

// Every left splitting of the domain, by exhaustive search over maps into A.
std::vector<ElementMap> all_left_splittings(const Quotient& q, const std::vector<std::size_t>& domain) {
  std::vector<ElementMap> out;
  const std::size_t na = q.group().size();
  std::vector<std::size_t> digits(domain.size(), 0);
  while (true) {
    ElementMap s(q.monoid().size(), kUndefined);
    for (std::size_t i = 0; i < domain.size(); ++i) s[domain[i]] = digits[i];
    if (check_left_splitting(q, domain, s).ok()) out.push_back(s);
    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] == na) digits[i++] = 0;
    if (i == digits.size()) break;
  }
  return out;
}

}  // namespace

TEST_CASE("glued partial monoid") {
  auto p = two_blocks();
  CHECK(validate_partial_monoid(p).ok());
  CHECK(p.blocks().size() == 2);
  CHECK(p.op(1, 2) == 3);
  CHECK(p.op(3, 3) == 0);
  CHECK_FALSE(p.defined(2, 4));
  CHECK(p.composable({1, 2, 3}));
  CHECK_FALSE(p.composable({2, 4}));
  CHECK(p.blocks_containing(1).size() == 2);
}

TEST_CASE("gluing rejects conflicting contexts") {
  auto a = klein({0, 1, 2, 3});
  auto b = klein({0, 1, 4, 5});
  b.table[1 * 4 + 1] = 4;  // a + a disagrees with the first context
  CHECK_THROWS_AS(glue_contexts(6, {a, b}), PreconditionError);
  auto c = klein({0, 1, 4, 5});
  c.identity = 1;
  CHECK_THROWS_AS(glue_contexts(6, {a, c}), PreconditionError);
  auto open = klein({0, 1, 2, 3});
  open.table[2 * 4 + 3] = 5;
  CHECK_THROWS_AS(glue_contexts(6, {open}), PreconditionError);
  CHECK_THROWS_AS(glue_contexts(6, {}), PreconditionError);
}

TEST_CASE("validation catches broken laws") {
  // Z3 with a non-commutative perturbation.
  std::vector<std::size_t> table{0, 1, 2, 1, 2, 0, 2, 0, 1};
  CHECK(validate_partial_monoid(PartialMonoid(3, 0, table)).ok());
  table[1 * 3 + 2] = 1;
  CHECK_FALSE(validate_partial_monoid(PartialMonoid(3, 0, table)).ok());
  std::vector<std::size_t> bad_identity{0, 1, 2, 1, 2, 0, 2, 0, 1};
  CHECK_FALSE(validate_partial_monoid(PartialMonoid(3, 1, bad_identity)).ok());
  CHECK_THROWS_AS(PartialMonoid(3, 0, {0, 1}), PreconditionError);
}

TEST_CASE("finite abelian groups") {
  FiniteAbelianGroup g({2, 3});
  CHECK(g.size() == 6);
  for (std::size_t a = 0; a < g.size(); ++a) {
    CHECK(g.encode(g.decode(a)) == a);
    CHECK(g.add(a, g.neg(a)) == 0);
    for (std::size_t b = 0; b < g.size(); ++b) {
      CHECK(g.add(a, b) == g.add(b, a));
      auto da = g.decode(a), db = g.decode(b), ds = g.decode(g.add(a, b));
      CHECK(ds[0] == (da[0] + db[0]) % 2);
      CHECK(ds[1] == (da[1] + db[1]) % 3);
    }
  }
  CHECK(g.decode(5) == std::vector<std::int64_t>{1, 2});
  CHECK_THROWS_AS(g.encode({1}), DomainError);
  CHECK_THROWS_AS(FiniteAbelianGroup({0}), DomainError);
}

TEST_CASE("quotient by a free action") {
  auto p = two_blocks();
  auto action = z2_on(1);
  CHECK(validate_action(p, action).ok());
  Quotient q(p, action);
  CHECK(q.num_orbits() == 3);
  CHECK(q.orbit_of(2) == q.orbit_of(3));
  CHECK(q.least_representative(q.orbit_of(5)) == 4);
  CHECK(q.difference(3, 2) == 1);
  CHECK_THROWS_AS(q.difference(3, 4), DomainError);
  CHECK(validate_partial_monoid(q.quotient_monoid()).ok());
  CHECK(q.quotient_monoid().blocks().size() == 2);
  CHECK(q.image({0, 1, 2, 3}).size() == 2);
  // Acting by b is not free on the second block (it is not even defined).
  CHECK_FALSE(validate_action(p, z2_on(2)).ok());
  CHECK_THROWS_AS(Quotient(p, z2_on(2)), PreconditionError);
}

TEST_CASE("left splittings of small monoids") {
  auto p = two_blocks();
  Quotient q(p, z2_on(1));
  std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
  // s(b) and s(c) are free, everything else is forced.
  CHECK(all_left_splittings(q, all).size() == 4);
  ElementMap bad{0, 1, 1, 1, 0, 1};
  CHECK_FALSE(check_left_splitting(q, all, bad).ok());

  // Z4 over Z2 = {0, 2}: the extension does not split.
  std::vector<std::size_t> z4;
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = 0; y < 4; ++y) z4.push_back((x + y) % 4);
  Quotient cyclic(PartialMonoid(4, 0, z4), z2_on(2));
  CHECK(all_left_splittings(cyclic, {0, 1, 2, 3}).empty());
}

TEST_CASE("splitting lemma round trips on every fixture context") {
  for (const auto& name : fixture_names()) {
    auto loaded = load_fixture(name);
    if (!loaded.structure) continue;
    GroupCohomology gc(loaded.model, *loaded.structure);
    const auto& q = gc.quotient();
    const auto& sc = loaded.model.scenario();
    const std::size_t na = q.group().size();
    for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
      const auto& domain = sc.context(c);
      for (std::size_t k = 0; k < loaded.model.sections(c).size(); ++k) {
        auto s = gc.section_splitting(c, k);
        REQUIRE(check_left_splitting(q, domain, s).ok());
        auto phi = trivialisation_from_splitting(q, domain, s);
        REQUIRE(check_trivialisation(q, phi).ok());
        REQUIRE(same_on(domain, splitting_from_trivialisation(q, phi), s));

        auto inverse = invert_trivialisation(q, phi);
        std::set<std::size_t> image;
        for (std::size_t o : q.image(domain))
          for (std::size_t a = 0; a < na; ++a) {
            auto x = inverse[o * na + a];
            REQUIRE(x != kUndefined);
            REQUIRE(phi.first[x] == a);
            REQUIRE(phi.second[x] == o);
            image.insert(x);
          }
        REQUIRE(image == std::set<std::size_t>(domain.begin(), domain.end()));
        for (auto x : domain) REQUIRE(inverse[phi.second[x] * na + phi.first[x]] == x);

        auto h = right_splitting_of(q, phi);
        for (auto o : q.image(domain)) REQUIRE(q.orbit_of(h[o]) == o);
        auto back = trivialisation_from_right_splitting(q, domain, h);
        REQUIRE(same_on(domain, back.first, phi.first));
        REQUIRE(same_on(domain, back.second, phi.second));
        REQUIRE(right_splitting_of(q, back) == h);
      }
    }
  }
}

TEST_CASE("left splittings of Mermin contexts are exactly its sections") {
  auto loaded = load_fixture("mermin");
  GroupCohomology gc(loaded.model, *loaded.structure);
  const auto& q = gc.quotient();
  const auto& sc = loaded.model.scenario();
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
    auto found = all_left_splittings(q, sc.context(c));
    REQUIRE(found.size() == loaded.model.sections(c).size());
    for (std::size_t k = 0; k < found.size(); ++k) {
      bool present = false;
      for (const auto& s : found) present = present || same_on(sc.context(c), s, gc.section_splitting(c, k));
      REQUIRE(present);
    }
    // Right splittings: every choice of orbit representatives that is a
    // homomorphism, recovered exhaustively, matches one-to-one.
    auto orbits = q.image(sc.context(c));
    std::size_t accepted = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << orbits.size()); ++mask) {
      ElementMap h(q.num_orbits(), kUndefined);
      for (std::size_t i = 0; i < orbits.size(); ++i) h[orbits[i]] = q.orbit(orbits[i])[(mask >> i) & 1];
      try {
        auto phi = trivialisation_from_right_splitting(q, sc.context(c), h);
        REQUIRE(check_trivialisation(q, phi).ok());
        REQUIRE(right_splitting_of(q, phi) == h);
        ++accepted;
      } catch (const PreconditionError&) {
      }
    }
    CHECK(accepted == found.size());
  }
}

TEST_CASE("monoid structure validation on fixtures") {
  auto mermin = load_fixture("mermin");
  CHECK(validate_monoid_structure(mermin.model, *mermin.structure).ok());
  CHECK(validate_action(mermin.structure->monoid, mermin.structure->action).ok());
  CHECK(validate_partial_monoid(mermin.structure->monoid).ok());
  // A context section that is not a splitting breaks the structure.
  auto sections = std::vector<std::vector<Assignment>>{};
  for (std::size_t c = 0; c < mermin.model.scenario().num_contexts(); ++c) sections.push_back(mermin.model.sections(c));
  for (auto& v : sections[0][0]) v = 0;
  EmpiricalModel broken(mermin.model.scenario(), sections);
  CHECK_FALSE(validate_monoid_structure(broken, *mermin.structure).ok());
}
