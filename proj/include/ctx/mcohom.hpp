#pragma once

// Relative cohomology of commutative partial monoids in low degree and the
// obstruction [beta_s] to extending a local trivialisation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "ctx/errors.hpp"
#include "ctx/pmonoid.hpp"
#include "ctx/scenario.hpp"

namespace ctx {

/// Composable n-tuples (n = 0..3) of a partial monoid: tuples whose entries
/// lie in a common block.
class ComposableTuples {
 public:
  static constexpr std::size_t kMaxDegree = 3;

  explicit ComposableTuples(const PartialMonoid& m);

  std::size_t count(std::size_t n) const { return tuples_.at(n).size(); }
  const std::vector<std::size_t>& tuple(std::size_t n, std::size_t k) const { return tuples_.at(n)[k]; }
  /// Position of a tuple in the degree-n list, or kUndefined.
  std::size_t index(const std::vector<std::size_t>& t) const;

 private:
  std::size_t m_;
  std::vector<std::vector<std::vector<std::size_t>>> tuples_;
  std::vector<std::vector<std::size_t>> lookup_;  // dense, per degree
};

/// Values in A (as group element codes) on the composable n-tuples.
struct Cochain {
  std::size_t degree = 0;
  std::vector<std::size_t> values;
  bool operator==(const Cochain&) const = default;
};

Cochain zero_cochain(const ComposableTuples& t, std::size_t degree);

/// d^n for n in {0, 1, 2}:
///   d^0 f = 0,
///   d^1 f(m1, m2) = f(m2) - f(m1 + m2) + f(m1),
///   d^2 f(m1, m2, m3) = f(m2, m3) - f(m1 + m2, m3) + f(m1, m2 + m3) - f(m1, m2).
Cochain coboundary(const PartialMonoid& m, const ComposableTuples& t, const FiniteAbelianGroup& a, const Cochain& f);

/// Whether f vanishes on every tuple drawn from `relative` (sorted).
bool vanishes_on(const ComposableTuples& t, const Cochain& f, const std::vector<std::size_t>& relative);

/// Uniformly random cochain vanishing on `relative`.
Cochain random_relative_cochain(const ComposableTuples& t, const FiniteAbelianGroup& a, std::size_t degree,
                                const std::vector<std::size_t>& relative, std::mt19937_64& rng);

/// Conditions on a model with algebraic structure: outcomes form the
/// coefficient group, the blocks are the contexts, the action is free with
/// i(A) in every context, and every section is a left splitting.
ValidationReport validate_monoid_structure(const EmpiricalModel& model, const MonoidStructure& structure);

/// One row of a refutation: coefficient of the equation for a composable
/// pair in one cyclic component of A.
struct CertificateEntry {
  std::size_t pair;  // index into the degree-2 tuples
  std::size_t component;
  std::int64_t coefficient;
};

struct CoboundaryResult {
  bool is_coboundary = false;
  Cochain gamma;  // degree 1, vanishing on the relative set
  /// Functional y with y^T D = 0 and y^T beta != 0 in the component.
  std::vector<CertificateEntry> certificate;
};

/// Everything reusable across sections of one model: the quotient X/A and
/// its composable tuples.
class GroupCohomology {
 public:
  /// Throws PreconditionError if the structure fails validation.
  GroupCohomology(const EmpiricalModel& model, const MonoidStructure& structure);

  const EmpiricalModel& model() const { return model_; }
  const Quotient& quotient() const { return quotient_; }
  const PartialMonoid& quotient_monoid() const { return quotient_.quotient_monoid(); }
  const ComposableTuples& tuples() const { return tuples_; }
  const FiniteAbelianGroup& group() const { return quotient_.group(); }

  /// Splitting of context c given by its k-th section, over the carrier.
  ElementMap section_splitting(std::size_t c, std::size_t k) const;
  /// pi(C), sorted.
  std::vector<std::size_t> relative_set(std::size_t c) const { return quotient_.image(model_.scenario().context(c)); }

  /// Representatives: [x] -> x - i(s(x)) on pi(C), least representative
  /// elsewhere (or `off_context` when given, which must pick an element of
  /// each orbit).
  std::vector<std::size_t> representatives(std::size_t c, const ElementMap& s,
                                           const std::optional<std::vector<std::size_t>>& off_context = {}) const;
  /// beta from eta(q1 + q2) = eta(q1) + eta(q2) + i(beta(q1, q2)).
  Cochain beta(const std::vector<std::size_t>& eta) const;
  /// Decides beta = d^1 gamma for gamma vanishing on `relative`.
  CoboundaryResult is_coboundary(const Cochain& beta, const std::vector<std::size_t>& relative) const;
  /// Checks a certificate by recomputing y^T D and y^T beta.
  bool verify_certificate(const Cochain& beta, const std::vector<std::size_t>& relative,
                          const std::vector<CertificateEntry>& certificate) const;

 private:
  struct Prepared;
  const Prepared& prepared(const std::vector<std::size_t>& relative) const;

  EmpiricalModel model_;
  Quotient quotient_;
  ComposableTuples tuples_;
  mutable std::map<std::vector<std::size_t>, std::shared_ptr<const Prepared>> cache_;
};

struct GroupObstruction {
  std::size_t context = 0;
  std::size_t section = 0;
  std::vector<std::size_t> relative;  // pi(C0)
  std::vector<std::size_t> eta;
  Cochain beta;
  bool vanishes = false;
  Cochain gamma;
  /// When the class vanishes: a left splitting of the whole carrier that
  /// extends the section, rebuilt from h = eta + i∘gamma.
  ElementMap global_splitting;
  std::vector<CertificateEntry> certificate;
};

/// [beta_s] for s the k-th section of context c. Throws InvariantViolation
/// if beta fails to be a relative cocycle or the rebuilt splitting does not
/// verify.
GroupObstruction group_obstruction(const GroupCohomology& gc, std::size_t c, std::size_t k,
                                   const std::optional<std::vector<std::size_t>>& off_context = {});

/// Random choice of one element per orbit.
std::vector<std::size_t> random_representatives(const Quotient& q, std::mt19937_64& rng);

}  // namespace ctx
