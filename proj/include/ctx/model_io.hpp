#pragma once

// Model files (JSON) and built-in fixtures.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctx/pauli.hpp"
#include "ctx/pmonoid.hpp"
#include "ctx/scenario.hpp"

namespace ctx {

/// A validated model with whatever algebraic structure its source provides.
struct LoadedModel {
  std::string name;
  EmpiricalModel model;
  std::optional<MonoidStructure> structure;
  std::optional<PauliModel> pauli;
};

/// Accepts either explicit tables
///   measurements, outcome_modulus, contexts, sections[, partial_monoid]
/// or a Pauli specification
///   pauli: {generators, close = true, state}
/// and rejects unknown fields. Throws ParseError naming the field, or
/// PreconditionError with the validation report on semantic failure.
LoadedModel parse_model(const nlohmann::json& doc, const std::string& name = "model");

/// Explicit-table form of a model; the structure, when present, is written
/// as a partial_monoid section. parse_model(model_to_json(m)) reproduces m.
nlohmann::json model_to_json(const LoadedModel& m);

/// Scenario checks, no-signalling and (when present) the monoid structure.
ValidationReport validate_model(const LoadedModel& m);

std::vector<std::string> fixture_names();
std::string fixture_description(const std::string& name);
/// Throws DomainError for an unknown name.
LoadedModel load_fixture(const std::string& name);

/// "fixture:<name>" or a path to a JSON model file.
LoadedModel load_model(const std::string& source);

}  // namespace ctx
