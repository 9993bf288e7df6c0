#include <doctest.h>

#include <random>

#include "ctx/errors.hpp"
#include "ctx/model_io.hpp"
#include "ctx/scenario.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace ctx;

namespace {

MeasurementScenario square() {
  return MeasurementScenario({"a", "b", "c", "d"}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}, 2);
}

}  // namespace

TEST_CASE("scenario shape checks") {
  CHECK_THROWS_AS(MeasurementScenario({"a"}, {{0, 1}}, 2), DomainError);
  CHECK_THROWS_AS(MeasurementScenario({"a", "b"}, {{0, 1}}, 1), DomainError);
  CHECK_THROWS_AS(MeasurementScenario({"a", "b"}, {{0, 0}}, 2), DomainError);
  CHECK_THROWS_AS(MeasurementScenario({"a", "a"}, {{0, 1}}, 2), DomainError);
  CHECK_THROWS_AS(square().index_of("z"), DomainError);
  auto sc = square();
  CHECK(sc.num_measurements() == 4);
  CHECK(sc.index_of("c") == 2);
  CHECK(sc.contexts_containing(std::size_t{0}) == std::vector<std::size_t>{0, 3});
  CHECK(sc.first_context_containing({1, 2}) == 1);
  CHECK_FALSE(sc.is_compatible({0, 2}));
  CHECK(sc.contexts_containing(MeasurementSet{3}) == std::vector<std::size_t>{2, 3});
}

TEST_CASE("cover validation") {
  CHECK(validate_scenario(square()).ok());
  CHECK(cover_is_connected(square()));
  MeasurementScenario nested({"a", "b", "c"}, {{0, 1}, {0}, {2}}, 2);
  auto r = validate_scenario(nested);
  CHECK_FALSE(r.ok());
  MeasurementScenario uncovered({"a", "b", "c"}, {{0, 1}}, 2);
  CHECK_FALSE(validate_scenario(uncovered).ok());
  MeasurementScenario split({"a", "b", "c", "d"}, {{0, 1}, {2, 3}}, 2);
  CHECK_FALSE(cover_is_connected(split));
}

TEST_CASE("restriction and set helpers") {
  Section s{{0, 2, 5}, {1, 0, 1}};
  CHECK(restrict_section(s, {0, 5}) == Section{{0, 5}, {1, 1}});
  CHECK(restrict_section(s, {}) == Section{{}, {}});
  CHECK_THROWS_AS(restrict_section(s, {1}), DomainError);
  CHECK(s.value_at(2) == 0);
  CHECK_FALSE(s.value_at(3).has_value());
  CHECK(make_set({3, 1, 3, 0}) == MeasurementSet{0, 1, 3});
  CHECK(set_intersection({0, 1, 4}, {1, 4, 5}) == MeasurementSet{1, 4});
  CHECK(is_subset({1, 4}, {0, 1, 4}));
  CHECK_FALSE(is_subset({2}, {0, 1, 4}));
}

TEST_CASE("model construction sorts and rejects bad tables") {
  EmpiricalModel m(square(), {{{1, 1}, {0, 0}, {0, 0}}, {{0, 0}}, {{0, 0}}, {{0, 0}}});
  CHECK(m.sections(0) == std::vector<Assignment>{{0, 0}, {1, 1}});
  CHECK(m.total_sections() == 5);
  CHECK(m.find_section(0, {1, 1}) == 1);
  CHECK_FALSE(m.find_section(0, {1, 0}).has_value());
  CHECK_THROWS_AS(EmpiricalModel(square(), {{{0, 0}}, {{0, 0}}, {{0, 0}}}), PreconditionError);
  CHECK_THROWS_AS(EmpiricalModel(square(), {{{0, 2}}, {{0, 0}}, {{0, 0}}, {{0, 0}}}), PreconditionError);
  CHECK_THROWS_AS(EmpiricalModel(square(), {{{0}}, {{0, 0}}, {{0, 0}}, {{0, 0}}}), PreconditionError);
  CHECK_THROWS_AS(EmpiricalModel(square(), {{}, {{0, 0}}, {{0, 0}}, {{0, 0}}}), PreconditionError);
}

TEST_CASE("no-signalling") {
  auto hardy = load_fixture("hardy").model;
  CHECK(check_no_signalling(hardy).ok());
  EmpiricalModel signalling(square(), {{{0, 0}}, {{1, 0}}, {{0, 0}}, {{0, 0}}});
  CHECK_FALSE(check_no_signalling(signalling).ok());
}

TEST_CASE("sections below a compatible set") {
  auto hardy = load_fixture("hardy").model;
  const auto& sc = hardy.scenario();
  auto a0 = sc.index_of("a0"), b1 = sc.index_of("b1");
  auto below = sections_below(hardy, {a0});
  REQUIRE(below.size() == 2);
  CHECK(below[0].values == Assignment{0});
  CHECK(below[1].values == Assignment{1});
  CHECK(sections_below(hardy, make_set({a0, b1})).size() == 3);
  auto empty = sections_below(hardy, {});
  REQUIRE(empty.size() == 1);
  CHECK(empty[0].domain.empty());
  CHECK_THROWS_AS(sections_below(hardy, make_set({a0, sc.index_of("a1")})), DomainError);
}

TEST_CASE("global sections agree with exhaustive enumeration") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    EmpiricalModel m = trial % 2 ? gen::random_cycle_model(rng, 3 + rng() % 4) : gen::random_noncontextual_model(rng);
    auto expected = oracle::brute_force_global_sections(gen::to_table(m));
    auto got = global_sections(m);
    std::sort(got.begin(), got.end());
    std::vector<Assignment> want(expected.begin(), expected.end());
    std::sort(want.begin(), want.end());
    REQUIRE(got == want);
    if (!want.empty()) CHECK(global_sections(m, 1).size() == 1);
    for (std::size_t c = 0; c < m.scenario().num_contexts(); ++c)
      for (std::size_t k = 0; k < m.sections(c).size(); ++k) {
        auto s = m.section(c, k);
        bool extends = std::any_of(want.begin(), want.end(), [&](const Assignment& g) {
          for (std::size_t i = 0; i < s.domain.size(); ++i)
            if (g[s.domain[i]] != s.values[i]) return false;
          return true;
        });
        auto ext = find_global_extension(m, s);
        REQUIRE(ext.has_value() == extends);
        if (ext)
          for (std::size_t i = 0; i < s.domain.size(); ++i) CHECK((*ext)[s.domain[i]] == s.values[i]);
      }
  }
}

TEST_CASE("classification of the fixtures") {
  auto hardy = classify(load_fixture("hardy").model);
  CHECK(hardy.kind == ContextualityKind::LogicallyContextual);
  REQUIRE(hardy.witnesses.size() == 1);
  CHECK(hardy.witnesses[0].context == 0);
  CHECK(load_fixture("hardy").model.sections(0)[hardy.witnesses[0].section] == Assignment{0, 0});
  CHECK(classify(load_fixture("mermin").model).kind == ContextualityKind::StronglyContextual);
  CHECK(to_string(ContextualityKind::StronglyContextual) == "strongly contextual");
}

TEST_CASE("classification agrees with exhaustive enumeration") {
  std::mt19937_64 rng(202);
  int seen[3] = {0, 0, 0};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng() % 3;
    EmpiricalModel m = trial % 3 == 0   ? gen::random_noncontextual_model(rng)
                       : trial % 3 == 1 ? gen::random_cycle_model(rng, n)
                                        : gen::random_parity_cycle(rng, n);
    auto globals = oracle::brute_force_global_sections(gen::to_table(m));
    auto cls = classify(m);
    ++seen[static_cast<int>(cls.kind)];
    if (globals.empty()) {
      REQUIRE(cls.kind == ContextualityKind::StronglyContextual);
      continue;
    }
    std::size_t missing = 0;
    for (std::size_t c = 0; c < m.scenario().num_contexts(); ++c)
      for (const auto& s : m.sections(c)) {
        bool covered = false;
        for (const auto& g : globals) {
          bool match = true;
          for (std::size_t i = 0; i < s.size(); ++i) match = match && g[m.scenario().context(c)[i]] == s[i];
          covered = covered || match;
        }
        missing += covered ? 0 : 1;
      }
    REQUIRE(cls.kind == (missing ? ContextualityKind::LogicallyContextual : ContextualityKind::NonContextual));
    REQUIRE(cls.witnesses.size() == missing);
  }
  CHECK(seen[0] > 0);
  CHECK(seen[1] > 0);
  CHECK(seen[2] > 0);
}
