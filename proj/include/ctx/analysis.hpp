#pragma once

// The analysis pipeline behind the command-line tool.

#include <cstddef>
#include <optional>
#include <string>

#include "json.hpp"

#include "ctx/model_io.hpp"

namespace ctx {

/// Which sections the per-section analyses (cech, beta) visit.
struct SectionSelector {
  enum class Kind {
    All,   // every section, optionally of one context
    Auto,  // sections without a global extension
    One,
  };
  Kind kind = Kind::All;
  std::optional<std::size_t> context;
  std::size_t section = 0;
};

struct AnalysisRequest {
  std::string source;
  bool classify = false;
  bool cech = false;
  bool beta = false;
  bool avn = false;
  bool theorem41 = false;
  /// Set by --all: analyses needing a monoid structure are skipped, not
  /// rejected, when the model has none.
  bool all = false;
  SectionSelector selector;
};

struct AnalysisReport {
  /// Deterministic for a fixed request; everything comparable lives here.
  nlohmann::json payload;
  /// Wall-clock seconds per analysis.
  nlohmann::json timings;
  /// A proven implication failed (theorem41, AvN vs Čech, route agreement).
  bool invariant_failure = false;
};

/// Runs the requested analyses in the order classify, avn, cech, beta,
/// theorem41. Precondition failures propagate as exceptions.
AnalysisReport run(const AnalysisRequest& request);
AnalysisReport run(const AnalysisRequest& request, const LoadedModel& model);

/// Human-readable rendering of a payload.
std::string render_text(const nlohmann::json& payload);

}  // namespace ctx
