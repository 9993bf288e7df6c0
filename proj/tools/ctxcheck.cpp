// ctxcheck: contextuality analyses of finite empirical models.
//
// Exit codes: 0 success, 2 bad input or failed precondition, 3 internal
// invariant violation (a computed result contradicting a proven implication).

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctx/analysis.hpp"
#include "ctx/model_io.hpp"

namespace {

constexpr int kUserError = 2;
constexpr int kInvariantFailure = 3;

ctx::SectionSelector make_selector(const std::string& section, int context) {
  ctx::SectionSelector sel;
  if (context >= 0) sel.context = static_cast<std::size_t>(context);
  if (section == "all") {
    sel.kind = ctx::SectionSelector::Kind::All;
  } else if (section == "auto") {
    sel.kind = ctx::SectionSelector::Kind::Auto;
  } else {
    std::size_t used = 0;
    unsigned long k = 0;
    try {
      k = std::stoul(section, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != section.size())
      throw ctx::ParseError("--section", "expected an index, 'auto' or 'all'");
    sel.kind = ctx::SectionSelector::Kind::One;
    sel.section = k;
  }
  return sel;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextuality analyses of finite empirical models"};
  app.require_subcommand(1);

  auto* analyze = app.add_subcommand("analyze", "run analyses on a model file or fixture:<name>");
  std::string source;
  bool classify = false, cech = false, beta = false, avn = false, theorem41 = false, all = false;
  int context = -1;
  std::string section = "all";
  std::string format = "text";
  analyze->add_option("source", source, "model file or fixture:<name>")->required();
  analyze->add_flag("--classify", classify, "contextuality class");
  analyze->add_flag("--cech", cech, "Čech obstruction of the selected sections");
  analyze->add_flag("--beta", beta, "group cohomology obstruction of the selected sections");
  analyze->add_flag("--avn", avn, "Z_d-linear theory and the AvN test");
  analyze->add_flag("--theorem41", theorem41, "check gamma = 0 => [beta] = 0 on every section");
  analyze->add_flag("--all", all, "every analysis");
  analyze->add_option("--context", context, "restrict the section selector to one context");
  analyze->add_option("--section", section, "section index, 'auto' (no global extension) or 'all'");
  analyze->add_option("--format", format, "output format")->check(CLI::IsMember({"text", "structured"}));

  auto* fixtures = app.add_subcommand("fixtures", "built-in models");
  auto* list = fixtures->add_subcommand("list", "list fixtures");
  fixtures->require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "check a model and report violations");
  std::string validate_source;
  validate->add_option("source", validate_source, "model file or fixture:<name>")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUserError;
  }

  try {
    if (list->parsed()) {
      for (const auto& name : ctx::fixture_names())
        std::cout << "fixture:" << name << "  " << ctx::fixture_description(name) << "\n";
      return 0;
    }
    if (validate->parsed()) {
      auto m = ctx::load_model(validate_source);
      std::cout << m.name << ": valid (" << m.model.scenario().num_measurements() << " measurements, "
                << m.model.scenario().num_contexts() << " contexts, " << m.model.total_sections() << " sections"
                << (m.structure ? ", monoid structure" : "") << ")\n";
      return 0;
    }
    ctx::AnalysisRequest request;
    request.source = source;
    request.all = all;
    request.classify = classify || all;
    request.cech = cech || all;
    request.beta = beta || all;
    request.avn = avn || all;
    request.theorem41 = theorem41 || all;
    if (!(request.classify || request.cech || request.beta || request.avn || request.theorem41))
      request.classify = true;
    request.selector = make_selector(section, context);
    auto report = ctx::run(request);
    if (format == "structured")
      std::cout << nlohmann::json{{"report", report.payload}, {"timings", report.timings}}.dump(2) << "\n";
    else
      std::cout << ctx::render_text(report.payload);
    return report.invariant_failure ? kInvariantFailure : 0;
  } catch (const ctx::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariantFailure;
  } catch (const ctx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  }
}
