#pragma once

// Commutative partial monoids, coefficient-group actions, quotients,
// splittings and trivialisations.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ctx/errors.hpp"

namespace ctx {

constexpr std::size_t kUndefined = std::numeric_limits<std::size_t>::max();

/// Finite carrier 0..size-1 with a partial operation table and a list of
/// blocks: the maximal total submonoids. A tuple is composable when all its
/// entries lie in a common block.
class PartialMonoid {
 public:
  /// `table[x * size + y]` is x + y or kUndefined. If `blocks` is empty they
  /// are computed as the maximal cliques of the composability graph.
  PartialMonoid(std::size_t size, std::size_t identity, std::vector<std::size_t> table,
                std::vector<std::vector<std::size_t>> blocks = {}, std::vector<std::string> names = {});

  std::size_t size() const { return size_; }
  std::size_t identity() const { return identity_; }
  std::size_t op(std::size_t x, std::size_t y) const { return table_[x * size_ + y]; }
  bool defined(std::size_t x, std::size_t y) const { return op(x, y) != kUndefined; }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
  const std::vector<std::size_t>& blocks_containing(std::size_t x) const { return member_of_[x]; }
  /// All entries lie in a common block.
  bool composable(const std::vector<std::size_t>& tuple) const;
  const std::string& name(std::size_t x) const { return names_[x]; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::size_t size_;
  std::size_t identity_;
  std::vector<std::size_t> table_;
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::vector<std::size_t>> member_of_;
  std::vector<std::string> names_;
};

/// Identity law, commutativity, associativity on triples inside a block,
/// closure of blocks and agreement of definedness with the blocks.
ValidationReport validate_partial_monoid(const PartialMonoid& p);

/// A context with its own total operation, given on global element indices.
struct ContextMonoid {
  std::vector<std::size_t> elements;  // sorted
  std::size_t identity;
  std::vector<std::size_t> table;  // local: table[a * k + b] is a global index
};

/// Glues compatible context monoids into one partial monoid whose blocks are
/// the contexts. Throws PreconditionError naming the offending contexts or
/// pair when identities or operations disagree, or when a context is not
/// closed under its own operation.
PartialMonoid glue_contexts(std::size_t size, const std::vector<ContextMonoid>& contexts,
                            std::vector<std::string> names = {});

/// Z_{d_1} ⊕ ... ⊕ Z_{d_k} with elements encoded as mixed-radix integers
/// (component 0 least significant); 0 is the identity.
class FiniteAbelianGroup {
 public:
  explicit FiniteAbelianGroup(std::vector<std::int64_t> orders);

  const std::vector<std::int64_t>& orders() const { return orders_; }
  std::size_t size() const { return size_; }
  std::vector<std::int64_t> decode(std::size_t a) const;
  std::size_t encode(const std::vector<std::int64_t>& components) const;
  std::size_t add(std::size_t a, std::size_t b) const;
  std::size_t neg(std::size_t a) const;
  std::size_t sub(std::size_t a, std::size_t b) const { return add(a, neg(b)); }
  std::string to_string(std::size_t a) const;

  bool operator==(const FiniteAbelianGroup&) const = default;

 private:
  std::vector<std::int64_t> orders_;
  std::size_t size_;
};

/// Embedding i: A -> X; the action is (a, x) -> i(a) + x.
struct CoefficientAction {
  FiniteAbelianGroup group;
  std::vector<std::size_t> embedding;  // group element -> carrier element
};

/// i is an injective homomorphism into every block, the action is total and
/// free.
ValidationReport validate_action(const PartialMonoid& p, const CoefficientAction& action);

/// Orbits of a free total action and the induced partial operation.
class Quotient {
 public:
  /// Throws PreconditionError if the action is not total and free or the
  /// induced operation on orbits is not well defined.
  Quotient(const PartialMonoid& p, CoefficientAction action);

  const PartialMonoid& monoid() const { return p_; }
  const CoefficientAction& action() const { return action_; }
  const FiniteAbelianGroup& group() const { return action_.group; }

  std::size_t num_orbits() const { return orbits_.size(); }
  std::size_t orbit_of(std::size_t x) const { return orbit_of_[x]; }
  const std::vector<std::size_t>& orbit(std::size_t q) const { return orbits_[q]; }
  /// Least element of the orbit.
  std::size_t least_representative(std::size_t q) const { return orbits_[q].front(); }
  /// i(a) + x.
  std::size_t act(std::size_t a, std::size_t x) const { return p_.op(action_.embedding[a], x); }
  /// The unique a with i(a) + y = x; x and y must share an orbit.
  std::size_t difference(std::size_t x, std::size_t y) const;
  /// X/A with the induced operation; blocks are the images of the blocks of X.
  const PartialMonoid& quotient_monoid() const { return quotient_; }
  /// pi(S) for a set of elements, sorted.
  std::vector<std::size_t> image(const std::vector<std::size_t>& elements) const;

 private:
  PartialMonoid p_;
  CoefficientAction action_;
  std::vector<std::size_t> orbit_of_;
  std::vector<std::vector<std::size_t>> orbits_;
  PartialMonoid quotient_;
};

/// Partial maps are dense vectors over the carrier (or over the orbits) with
/// kUndefined outside their domain.
using ElementMap = std::vector<std::size_t>;

/// s: D -> A with s(x + y) = s(x) + s(y) for composable x, y in D and
/// s(i(a)) = a. D must contain i(A).
ValidationReport check_left_splitting(const PartialMonoid& p, const CoefficientAction& action,
                                      const std::vector<std::size_t>& domain, const ElementMap& s);
ValidationReport check_left_splitting(const Quotient& q, const std::vector<std::size_t>& domain, const ElementMap& s);

/// x -> (s(x), [x]) on its domain.
struct Trivialisation {
  std::vector<std::size_t> domain;  // sorted carrier elements
  ElementMap first;                 // A component
  ElementMap second;                // orbit
};

Trivialisation trivialisation_from_splitting(const Quotient& q, const std::vector<std::size_t>& domain,
                                             const ElementMap& s);
/// proj_1 ∘ phi; checks that phi is a trivialisation first.
ElementMap splitting_from_trivialisation(const Quotient& q, const Trivialisation& phi);
ValidationReport check_trivialisation(const Quotient& q, const Trivialisation& phi);

/// phi^{-1}(a, [x]) = x + i(a - phi_1(x)); table indexed by orbit * |A| + a,
/// kUndefined outside A × pi(domain). Verified two-sided by exhaustive
/// composition.
std::vector<std::size_t> invert_trivialisation(const Quotient& q, const Trivialisation& phi);

/// R(phi): [x] -> phi^{-1}(0, [x]) on pi(domain); dense over orbits.
ElementMap right_splitting_of(const Quotient& q, const Trivialisation& phi);
/// Phi(h): x -> (s(x), [x]) with h([x]) = x - i(s(x)). `domain` must be the
/// preimage of the domain of h. Throws PreconditionError if h is not a
/// section of pi or not a homomorphism.
Trivialisation trivialisation_from_right_splitting(const Quotient& q, const std::vector<std::size_t>& domain,
                                                   const ElementMap& h);

/// Algebraic structure on a model's measurements: the glued partial monoid
/// (same element indices as the measurements) and the coefficient action.
struct MonoidStructure {
  PartialMonoid monoid;
  CoefficientAction action;
};

}  // namespace ctx
