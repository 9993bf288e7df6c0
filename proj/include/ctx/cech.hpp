#pragma once

// Čech cochains of the cover nerve with coefficients in formal integer sums
// of local sections, and the obstruction gamma(1 · s0).

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctx/errors.hpp"
#include "ctx/integer.hpp"
#include "ctx/linalg.hpp"
#include "ctx/pmonoid.hpp"
#include "ctx/scenario.hpp"

namespace ctx {

/// Degree-q cochain: for each q-simplex sigma, integer coefficients over
/// the basis S(supp sigma) of the complex.
struct IntCochain {
  std::size_t degree = 0;
  std::vector<std::vector<Integer>> values;
  bool operator==(const IntCochain&) const = default;
};

/// Nerve of the cover (ordered tuples, degenerate ones included, with
/// nonempty common support) up to `max_degree`, together with the presheaf
/// U -> Z[S(U)] and its restriction maps.
///
/// The number of q-simplices grows like |M|^(q+1), so large covers are
/// built with max_degree 1 and degree-2 values are evaluated pointwise with
/// coboundary_at.
class CechComplex {
 public:
  /// Throws PreconditionError when some restriction of a context's sections
  /// is missing from S(U) (a signalling model).
  explicit CechComplex(const EmpiricalModel& model, std::size_t max_degree = 1);

  const EmpiricalModel& model() const { return model_; }
  std::size_t max_degree() const { return simplices_.size() - 1; }

  std::size_t count(std::size_t q) const { return simplices_.at(q).size(); }
  const std::vector<std::size_t>& simplex(std::size_t q, std::size_t i) const { return simplices_.at(q)[i].tuple; }
  const MeasurementSet& support(std::size_t q, std::size_t i) const { return simplices_.at(q)[i].support; }
  /// S(supp sigma), sorted.
  const std::vector<Section>& basis(std::size_t q, std::size_t i) const { return *simplices_.at(q)[i].basis; }
  /// Position of a tuple among the simplices of its degree.
  std::optional<std::size_t> index(const std::vector<std::size_t>& tuple) const;

  /// S(U) for U contained in a context; S(∅) is the single empty section.
  const std::vector<Section>& sections_over(const MeasurementSet& u) const;
  /// k -> position of S(V)[k]|_U in S(U), for U ⊆ V.
  const std::vector<std::size_t>& restriction(const MeasurementSet& v, const MeasurementSet& u) const;

  IntCochain zero(std::size_t q) const;
  /// d^q w for q + 1 <= max_degree:
  ///   d^q(w)(sigma) = sum_{i=0}^{q+1} (-1)^i w(∂_i sigma)|_{supp sigma}.
  IntCochain coboundary(const IntCochain& w) const;
  /// d(w)(sigma) for one (q+1)-tuple sigma with nonempty support, whose
  /// faces must be materialized; sigma itself need not be.
  std::vector<Integer> coboundary_at(const IntCochain& w, const std::vector<std::size_t>& sigma) const;
  /// d(d(w))(sigma) for a (q+2)-tuple, evaluated through faces.
  std::vector<Integer> double_coboundary_at(const IntCochain& w, const std::vector<std::size_t>& sigma) const;

  /// w(sigma)|_{supp sigma ∩ C0} = 0 for every simplex.
  bool is_relative(const IntCochain& w, std::size_t c0) const;

 private:
  using Table = std::vector<std::size_t>;
  struct Simplex {
    std::vector<std::size_t> tuple;
    MeasurementSet support;
    std::shared_ptr<const std::vector<Section>> basis;
    std::vector<std::size_t> faces;           // face i, for degree >= 1
    std::vector<const Table*> face_tables;    // S(supp face i) -> S(supp sigma)
  };

  std::shared_ptr<const std::vector<Section>> basis_ptr(const MeasurementSet& u) const;
  std::vector<Integer> face_sum(const IntCochain& w, const std::vector<std::size_t>& sigma,
                                const MeasurementSet& support) const;

  EmpiricalModel model_;
  std::vector<std::vector<Simplex>> simplices_;
  std::vector<std::size_t> lookup_stride_;
  std::vector<std::vector<std::size_t>> lookup_;  // dense, per degree
  mutable std::map<MeasurementSet, std::shared_ptr<const std::vector<Section>>> presheaf_;
  mutable std::map<std::pair<MeasurementSet, MeasurementSet>, Table> restrictions_;
  // Per degree and C0: S(supp sigma) -> S(supp sigma ∩ C0).
  mutable std::map<std::pair<std::size_t, std::size_t>, std::vector<const Table*>> relative_tables_;
};

/// r_C ∈ Z[S(C)] per context, indexed like model.sections(C).
using IntFamily = std::vector<std::vector<Integer>>;

/// One equation of the family systems.
struct FamilyConstraint {
  enum class Kind {
    Overlap,   // r_C|_U - r_C'|_U has coefficient 0 at `at` (U = C ∩ C')
    Pin,       // r_C0 has coefficient [s = s0] at section `second`
    Relative,  // nu_C|_{C ∩ C0} has coefficient 0 at `at`
  };
  Kind kind = Kind::Overlap;
  std::size_t first = 0;
  std::size_t second = 0;
  Section at;
};

std::string describe(const FamilyConstraint& c, const MeasurementScenario& scenario);

struct CertificateRow {
  FamilyConstraint constraint;
  Integer numerator;
};

/// Refutation y (rows / denominator) of an integer system: y^T A is
/// integral and y^T b is not (or y^T A = 0 when `rational`).
struct FamilyCertificate {
  std::vector<CertificateRow> rows;
  Integer denominator = 1;
  bool rational = false;
};

struct CechVerdict {
  std::size_t context = 0;
  std::size_t section = 0;
  bool vanishes = false;
  IntFamily family;               // compatible, r_C0 = 1 · s0
  FamilyCertificate certificate;  // when the obstruction does not vanish
};

/// The connecting cocycle z = d^0 omega of a lift omega of 1 · s0|_{C ∩ C0}
/// and the decision whether z = d^0 nu for a relative nu.
struct ConnectingCocycle {
  std::size_t context = 0;
  std::size_t section = 0;
  std::vector<std::size_t> lift;  // omega_C = 1 · S(C)[lift[C]]
  IntCochain z;                   // degree 1, relative to C0
  bool is_coboundary = false;
  IntCochain nu;                  // degree 0, relative to C0, d^0 nu = z
  IntFamily family;               // omega - nu
  FamilyCertificate certificate;
};

/// Both decision procedures for gamma(1 · s0) over one model. The
/// compatibility equations are eliminated once; each context C0 then adds
/// its pins (resp. relative equations) to a shared copy, and each section
/// costs a single solve.
class CechAnalyzer {
 public:
  /// Throws PreconditionError when the cover is disconnected.
  explicit CechAnalyzer(const EmpiricalModel& model);
  ~CechAnalyzer();

  const CechComplex& complex() const { return complex_; }
  const EmpiricalModel& model() const { return complex_.model(); }

  /// Integer feasibility of a compatible family with r_C0 = 1 · s0.
  CechVerdict obstruction(std::size_t c0, std::size_t k) const;
  /// Coboundary test for the connecting cocycle of 1 · s0.
  ConnectingCocycle connecting_cocycle(std::size_t c0, std::size_t k) const;

  /// Least section of each context extending s0|_{C ∩ C0}.
  std::vector<std::size_t> lift(std::size_t c0, std::size_t k) const;
  IntCochain lift_cochain(const std::vector<std::size_t>& lift) const;

  bool is_compatible(const IntFamily& family) const;
  bool is_pinned(const IntFamily& family, std::size_t c0, std::size_t k) const;

 private:
  struct Overlap;
  struct Prepared;
  const Prepared& family_system(std::size_t c0) const;
  const Prepared& relative_system(std::size_t c0) const;
  FamilyCertificate certificate_rows(const Prepared& p, const linalg::IntegerCertificate& cert) const;

  CechComplex complex_;
  std::vector<std::size_t> offsets_;  // unknown index of (C, s) = offsets_[C] + s
  std::vector<Overlap> overlaps_;
  std::shared_ptr<const linalg::LatticeSystem> base_;
  mutable std::map<std::size_t, std::shared_ptr<const Prepared>> family_cache_;
  mutable std::map<std::size_t, std::shared_ptr<const Prepared>> relative_cache_;
};

/// gamma(1 · s0) = 0, deciding with a fresh analyzer.
CechVerdict cech_obstruction_vanishes(const EmpiricalModel& model, std::size_t c0, std::size_t k);

/// g(x) = sum_s r_C(s) · s(x) in Z_d over any context C containing x.
/// Throws PreconditionError when some r_C does not sum to 1 or the value
/// depends on the context chosen.
ElementMap collapse_family(const EmpiricalModel& model, const IntFamily& family);

struct ImplicationEntry {
  std::size_t context = 0;
  std::size_t section = 0;
  bool cech_vanishes = false;
  bool group_vanishes = false;
  /// When gamma vanishes: the collapsed family is a left splitting of the
  /// whole carrier extending s0.
  bool collapse_verified = false;
};

struct ImplicationReport {
  std::vector<ImplicationEntry> entries;
  std::vector<std::string> violations;
  bool holds() const { return violations.empty(); }
};

/// For every section s0: gamma(1 · s0) = 0 implies [beta_s0] = 0, with the
/// collapsed family checked as a splitting whenever gamma vanishes.
ImplicationReport check_splitting_implication(const EmpiricalModel& model, const MonoidStructure& structure);

}  // namespace ctx
