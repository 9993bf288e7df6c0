#pragma once

// Pauli n-group arithmetic, exact state vectors and Pauli empirical models.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctx/integer.hpp"
#include "ctx/pmonoid.hpp"
#include "ctx/scenario.hpp"

namespace ctx {

/// i^phase * (sigma(x_1, z_1) ⊗ ... ⊗ sigma(x_n, z_n)) with sigma(0,0) = I,
/// sigma(1,0) = X, sigma(1,1) = Y, sigma(0,1) = Z. Bit j of the masks is
/// qubit j + 1, which is written leftmost.
///
/// Ordering is by word (I < X < Y < Z from the first qubit), then phase, so
/// +P precedes -P.
class PauliOperator {
 public:
  static constexpr std::size_t kMaxQubits = 16;

  PauliOperator() = default;
  PauliOperator(std::size_t n, std::uint32_t x, std::uint32_t z, int phase = 0);

  static PauliOperator identity(std::size_t n) { return {n, 0, 0, 0}; }
  /// Parses `[+|-]` followed by letters from {I,X,Y,Z}, e.g. "-YY".
  static PauliOperator parse(const std::string& text);

  std::size_t qubits() const { return n_; }
  std::uint32_t x() const { return x_; }
  std::uint32_t z() const { return z_; }
  int phase() const { return phase_; }
  /// Pauli letter on qubit j (0-based): 'I', 'X', 'Y' or 'Z'.
  char letter(std::size_t j) const;

  bool is_measurement() const { return phase_ % 2 == 0; }
  bool is_identity_word() const { return x_ == 0 && z_ == 0; }
  PauliOperator negated() const { return {n_, x_, z_, (phase_ + 2) % 4}; }
  /// Same word with phase 0.
  PauliOperator unsigned_word() const { return {n_, x_, z_, 0}; }

  /// "+XXI", "-YY"; odd phases print as "+i" / "-i".
  std::string to_string() const;
  /// Compact form naming the non-identity factors by qubit: "X1X2",
  /// "-Y1Z3", "I" and "-I" for the identity word.
  std::string label() const;

  auto operator<=>(const PauliOperator& other) const {
    if (auto c = n_ <=> other.n_; c != 0) return c;
    for (std::size_t j = 0; j < n_; ++j)
      if (auto c = letter_rank(j) <=> other.letter_rank(j); c != 0) return c;
    return phase_ <=> other.phase_;
  }
  bool operator==(const PauliOperator&) const = default;

 private:
  int letter_rank(std::size_t j) const;

  std::size_t n_ = 0;
  std::uint32_t x_ = 0;
  std::uint32_t z_ = 0;
  int phase_ = 0;
};

/// Exact group product. Throws DomainError on mismatched qubit counts.
PauliOperator multiply(const PauliOperator& p, const PauliOperator& q);
/// Symplectic test x_P.z_Q + z_P.x_Q = 0 (mod 2).
bool commutes(const PauliOperator& p, const PauliOperator& q);

/// Least superset of gens ∪ {±I} closed under products of commuting
/// measurements, sorted. `n` is used when gens is empty.
std::vector<PauliOperator> close_under_commuting_products(const std::vector<PauliOperator>& gens, std::size_t n);
bool is_closed_under_commuting_products(const std::vector<PauliOperator>& ops);

/// Maximal sets of pairwise commuting elements, as sorted index lists into
/// `ops`. No closure requirement.
std::vector<std::vector<std::size_t>> maximal_commuting_subsets(const std::vector<PauliOperator>& ops);
/// Maximal commuting subsets of a closed set; each one is checked to be
/// closed under products. Throws PreconditionError if ops is not closed.
std::vector<std::vector<std::size_t>> maximal_contexts(const std::vector<PauliOperator>& ops);

struct Gaussian {
  Integer re = 0;
  Integer im = 0;
  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  bool operator==(const Gaussian&) const = default;
};

/// Unnormalized state vector with Gaussian-integer amplitudes. Basis index
/// bits are read with qubit 1 as the most significant bit.
class GaussianStateVector {
 public:
  GaussianStateVector(std::size_t n, std::vector<Gaussian> amplitudes);

  /// |0...0> + |1...1>.
  static GaussianStateVector ghz(std::size_t n);
  /// "ghz:N".
  static GaussianStateVector parse_named(const std::string& name);

  std::size_t qubits() const { return n_; }
  const std::vector<Gaussian>& amplitudes() const { return amps_; }
  bool is_zero() const;
  GaussianStateVector negated() const;

  bool operator==(const GaussianStateVector&) const = default;

 private:
  std::size_t n_;
  std::vector<Gaussian> amps_;
};

GaussianStateVector apply_pauli(const PauliOperator& p, const GaussianStateVector& v);

/// Whether prod_k (I + (-1)^{s_k} M_k) v is nonzero for the commuting
/// measurements M_k with outcomes s_k in Z_2. Throws PreconditionError if
/// two of the measurements anticommute.
bool born_consistent(const std::vector<PauliOperator>& measurements, const std::vector<Outcome>& outcomes,
                     const GaussianStateVector& v);

/// All homomorphisms s: C -> Z_2 with s(-I) = 1, as assignments aligned with
/// `context` and sorted. Throws PreconditionError unless the context is a
/// commuting, product-closed set of measurements containing ±I.
std::vector<Assignment> context_splittings(const std::vector<PauliOperator>& context);

/// {M in ops : M v = ±v}, sorted.
std::vector<PauliOperator> determined_submonoid(const std::vector<PauliOperator>& ops, const GaussianStateVector& v);

/// An empirical model whose measurements are Pauli operators. Outcome
/// modulus is 2 with -1 encoded as 1.
struct PauliModel {
  std::vector<PauliOperator> operators;  // measurement index -> operator
  EmpiricalModel model;
  bool closed = false;
  std::optional<GaussianStateVector> state;
};

/// Contexts are the maximal commuting subsets of `ops` (which must contain
/// ±I and consist of measurements). The sections of a context are the
/// restrictions of the splittings of the group it generates, filtered by
/// the Born rule when a state is given. Throws PreconditionError when some
/// context ends up with no section (the zero vector, for example).
PauliModel build_pauli_model(std::vector<PauliOperator> ops, const std::optional<GaussianStateVector>& state);

/// Contexts glued under matrix multiplication with Z_2 embedded as
/// k -> (-1)^k I. Requires a closed measurement set; throws
/// PreconditionError otherwise.
MonoidStructure pauli_structure(const PauliModel& model);

/// Closed X only.
EmpiricalModel build_state_independent_model(const std::vector<PauliOperator>& closed_ops);
EmpiricalModel build_state_dependent_model(const std::vector<PauliOperator>& closed_ops,
                                           const GaussianStateVector& v);

}  // namespace ctx
