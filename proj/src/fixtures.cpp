#include <stdexcept>

#include "ctx/model_io.hpp"

namespace ctx {

using nlohmann::json;

namespace {

struct FixtureSpec {
  const char* name;
  const char* description;
  json (*document)();
};

std::vector<std::string> words(const std::string& letters, std::size_t n, bool both_signs) {
  std::vector<std::string> out{""};
  for (std::size_t q = 0; q < n; ++q) {
    std::vector<std::string> next;
    for (const auto& w : out)
      for (char c : letters) next.push_back(w + c);
    out = std::move(next);
  }
  if (both_signs) {
    const auto n_words = out.size();
    for (std::size_t i = 0; i < n_words; ++i) out.push_back("-" + out[i]);
  }
  return out;
}

json mermin() {
  return {{"pauli", {{"generators", {"XI", "IX", "XX", "IZ", "ZI", "ZZ", "XZ", "ZX", "YY"}}, {"close", true}}}};
}

json ghz() {
  return {{"pauli", {{"generators", words("IXYZ", 3, true)}, {"close", true}, {"state", "ghz:3"}}}};
}

json ghz_xy() {
  return {{"pauli", {{"generators", words("IXY", 3, true)}, {"close", false}, {"state", "ghz:3"}}}};
}

json hardy() {
  // Two parties, two binary measurements each. The a0=0, b0=0 outcome
  // forces b1=1 and a1=1, which a1 b1 forbids.
  return {
      {"measurements", {"a0", "a1", "b0", "b1"}},
      {"outcome_modulus", 2},
      {"contexts", json::array({json::array({"a0", "b0"}), json::array({"a0", "b1"}), json::array({"a1", "b0"}),
                                json::array({"a1", "b1"})})},
      {"sections",
       {{"0", {{0, 0}, {0, 1}, {1, 0}, {1, 1}}},
        {"1", {{0, 1}, {1, 0}, {1, 1}}},
        {"2", {{0, 1}, {1, 0}, {1, 1}}},
        {"3", {{0, 0}, {0, 1}, {1, 0}}}}},
  };
}

const std::vector<FixtureSpec>& specs() {
  static const std::vector<FixtureSpec> all{
      {"mermin", "state-independent model of the Mermin square, closed under commuting products", mermin},
      {"ghz", "GHZ state on all three-qubit Paulis {I,X,Y,Z}, closed under commuting products", ghz},
      {"ghz-xy", "GHZ state on the three-qubit Paulis {I,X,Y} with both signs (not closed)", ghz_xy},
      {"hardy", "two-party possibilistic Hardy model", hardy},
  };
  return all;
}

const FixtureSpec& find(const std::string& name) {
  for (const auto& s : specs())
    if (name == s.name) return s;
  throw DomainError("unknown fixture '" + name + "'");
}

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& s : specs()) out.emplace_back(s.name);
  return out;
}

std::string fixture_description(const std::string& name) { return find(name).description; }

LoadedModel load_fixture(const std::string& name) {
  const auto& s = find(name);
  return parse_model(s.document(), "fixture:" + name);
}

}  // namespace ctx
