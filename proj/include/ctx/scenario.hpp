#pragma once

// Measurement scenarios, sections and possibilistic empirical models.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ctx/errors.hpp"

namespace ctx {

using Outcome = std::int64_t;
/// Measurement indices, strictly increasing.
using MeasurementSet = std::vector<std::size_t>;
/// Outcomes aligned with a MeasurementSet.
using Assignment = std::vector<Outcome>;

/// (X, M, O): labelled measurements, a cover by contexts and outcomes Z_d.
///
/// The constructor only checks shape (indices in range, d >= 2, no repeated
/// measurement inside a context). Cover conditions are reported by
/// validate_scenario.
class MeasurementScenario {
 public:
  MeasurementScenario(std::vector<std::string> labels, std::vector<MeasurementSet> contexts,
                      std::int64_t modulus);

  std::size_t num_measurements() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t m) const { return labels_.at(m); }
  std::size_t index_of(const std::string& label) const;

  std::size_t num_contexts() const { return contexts_.size(); }
  const std::vector<MeasurementSet>& contexts() const { return contexts_; }
  const MeasurementSet& context(std::size_t c) const { return contexts_.at(c); }
  /// Indices of the contexts containing measurement m.
  const std::vector<std::size_t>& contexts_containing(std::size_t m) const { return containing_.at(m); }

  std::int64_t modulus() const { return modulus_; }

  /// Index of the first context containing every measurement of v.
  std::optional<std::size_t> first_context_containing(const MeasurementSet& v) const;
  bool is_compatible(const MeasurementSet& v) const { return first_context_containing(v).has_value(); }
  /// The contexts containing v, ascending.
  std::vector<std::size_t> contexts_containing(const MeasurementSet& v) const;

  bool operator==(const MeasurementScenario&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<MeasurementSet> contexts_;
  std::int64_t modulus_;
  std::vector<std::vector<std::size_t>> containing_;
};

/// Anti-chain, covering and connectedness of the cover.
ValidationReport validate_scenario(const MeasurementScenario& scenario);
bool cover_is_connected(const MeasurementScenario& scenario);

struct Section {
  MeasurementSet domain;
  Assignment values;

  std::optional<Outcome> value_at(std::size_t m) const;
  auto operator<=>(const Section&) const = default;
};

/// s|_U. Throws DomainError when U is not a subset of domain(s).
Section restrict_section(const Section& s, const MeasurementSet& u);

/// Sorted, duplicate-free copy of an index list.
MeasurementSet make_set(std::vector<std::size_t> v);
MeasurementSet set_intersection(const MeasurementSet& a, const MeasurementSet& b);
bool is_subset(const MeasurementSet& a, const MeasurementSet& b);

/// A scenario together with the nonempty set S(C) of allowed assignments on
/// every context. Sections are stored sorted and without duplicates.
class EmpiricalModel {
 public:
  /// Throws PreconditionError on misaligned assignments, outcomes outside
  /// [0, d) or an empty S(C).
  EmpiricalModel(MeasurementScenario scenario, std::vector<std::vector<Assignment>> sections);

  const MeasurementScenario& scenario() const { return scenario_; }
  const std::vector<Assignment>& sections(std::size_t c) const { return sections_.at(c); }
  Section section(std::size_t c, std::size_t k) const { return {scenario_.context(c), sections_.at(c).at(k)}; }
  std::size_t total_sections() const;
  /// Position of s within S(C), if present.
  std::optional<std::size_t> find_section(std::size_t c, const Assignment& s) const;

  bool operator==(const EmpiricalModel&) const = default;

 private:
  MeasurementScenario scenario_;
  std::vector<std::vector<Assignment>> sections_;
};

/// {s|_V : s in S(C)} for the first context C containing V, sorted.
/// Throws DomainError if V is not compatible.
std::vector<Section> sections_below(const EmpiricalModel& model, const MeasurementSet& v);

/// Pairwise agreement of restriction sets on every nonempty overlap.
ValidationReport check_no_signalling(const EmpiricalModel& model);

/// Global assignments g: X -> Z_d with g|_C in S(C) for every context,
/// extending `fixed` when given, in the deterministic search order. Stops
/// after `limit` results.
std::vector<Assignment> global_sections(const EmpiricalModel& model,
                                        std::size_t limit = std::numeric_limits<std::size_t>::max(),
                                        const std::optional<Section>& fixed = std::nullopt);

/// A global assignment extending s, if one exists.
std::optional<Assignment> find_global_extension(const EmpiricalModel& model, const Section& s);

enum class ContextualityKind { NonContextual, LogicallyContextual, StronglyContextual };

std::string to_string(ContextualityKind kind);

struct ContextualityWitness {
  std::size_t context;
  std::size_t section;  // index into S(context)
};

struct ContextualityClass {
  ContextualityKind kind = ContextualityKind::NonContextual;
  /// Sections with no global extension; only filled for logical
  /// contextuality.
  std::vector<ContextualityWitness> witnesses;
};

ContextualityClass classify(const EmpiricalModel& model);

}  // namespace ctx
