#pragma once

// Z_d-linear theories of empirical models and the all-versus-nothing test.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctx/errors.hpp"
#include "ctx/scenario.hpp"

namespace ctx {

class CechAnalyzer;

/// sum_{x in C} r(x) x = a (mod d), coefficients aligned with context C.
struct LinearEquation {
  std::size_t context = 0;
  std::vector<std::int64_t> coefficients;
  std::int64_t constant = 0;
  bool operator==(const LinearEquation&) const = default;
};

/// Generating set of every context's affine relations.
struct Theory {
  std::int64_t modulus = 2;
  std::vector<LinearEquation> equations;
};

/// Throws PreconditionError when d differs from the model's outcome
/// modulus, InvariantViolation if an extracted equation fails on a section.
Theory theory_of(const EmpiricalModel& model, std::int64_t d);

/// An equation over arbitrary measurements: pairs (measurement, coefficient).
struct GlobalEquation {
  std::vector<std::pair<std::size_t, std::int64_t>> terms;
  std::int64_t constant = 0;
};

/// "X1 + X2 + X1X2 = 0 (mod 2)".
std::string format_equation(const MeasurementScenario& sc, const GlobalEquation& e, std::int64_t d);
std::string format_equation(const MeasurementScenario& sc, const LinearEquation& e, std::int64_t d);
GlobalEquation to_global(const MeasurementScenario& sc, const LinearEquation& e);

/// A derivation of an equation inside one context: coefficients c_k over the
/// theory's equations of that context with sum c_k e_k = the equation.
struct Entailment {
  std::size_t context = 0;
  std::vector<std::pair<std::size_t, std::int64_t>> combination;  // (equation index, c_k)
};

/// Whether e is a Z_d-combination of the equations of some context that
/// contains all of its measurements.
std::optional<Entailment> entails(const EmpiricalModel& model, const Theory& theory, const GlobalEquation& e);

struct AvnResult {
  bool is_avn = false;
  /// Global assignment satisfying the theory when not AvN.
  Assignment witness;
  /// y over the theory's equations with y^T A = 0 and y^T b != 0 (mod d).
  std::vector<std::int64_t> certificate;
};

/// Solvability of the stacked theory over Z_d; the witness or certificate is
/// re-verified before returning.
AvnResult is_avn(const EmpiricalModel& model, std::int64_t d);
AvnResult is_avn(const EmpiricalModel& model, const Theory& theory);

struct AvnCechReport {
  bool is_avn = false;
  std::size_t sections_checked = 0;
  std::vector<std::string> violations;
  bool consistent() const { return violations.empty(); }
};

/// When the model is AvN, gamma(1 · s) must be nonzero for every section.
AvnCechReport avn_cech_consistency(const EmpiricalModel& model, std::int64_t d);
AvnCechReport avn_cech_consistency(const CechAnalyzer& analyzer, std::int64_t d);

}  // namespace ctx
