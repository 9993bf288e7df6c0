#include "ctx/scenario.hpp"

#include <algorithm>
#include <boost/dynamic_bitset.hpp>
#include <numeric>
#include <set>

namespace ctx {

MeasurementScenario::MeasurementScenario(std::vector<std::string> labels, std::vector<MeasurementSet> contexts,
                                         std::int64_t modulus)
    : labels_(std::move(labels)), contexts_(std::move(contexts)), modulus_(modulus) {
  if (modulus_ < 2) throw DomainError("outcome modulus must be at least 2");
  {
    std::set<std::string> seen;
    for (const auto& l : labels_)
      if (!seen.insert(l).second) throw DomainError("duplicate measurement label '" + l + "'");
  }
  containing_.assign(labels_.size(), {});
  for (std::size_t c = 0; c < contexts_.size(); ++c) {
    auto& ctx = contexts_[c];
    std::sort(ctx.begin(), ctx.end());
    if (std::adjacent_find(ctx.begin(), ctx.end()) != ctx.end())
      throw DomainError("context " + std::to_string(c) + " repeats a measurement");
    for (std::size_t m : ctx) {
      if (m >= labels_.size()) throw DomainError("context " + std::to_string(c) + " refers to an unknown measurement");
      containing_[m].push_back(c);
    }
  }
}

std::size_t MeasurementScenario::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw DomainError("unknown measurement '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

std::optional<std::size_t> MeasurementScenario::first_context_containing(const MeasurementSet& v) const {
  for (std::size_t c = 0; c < contexts_.size(); ++c)
    if (is_subset(v, contexts_[c])) return c;
  return std::nullopt;
}

std::vector<std::size_t> MeasurementScenario::contexts_containing(const MeasurementSet& v) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < contexts_.size(); ++c)
    if (is_subset(v, contexts_[c])) out.push_back(c);
  return out;
}

bool cover_is_connected(const MeasurementScenario& scenario) {
  const std::size_t k = scenario.num_contexts();
  if (k <= 1) return true;
  std::vector<bool> reached(k, false);
  std::vector<std::size_t> stack{0};
  reached[0] = true;
  while (!stack.empty()) {
    std::size_t c = stack.back();
    stack.pop_back();
    for (std::size_t m : scenario.context(c))
      for (std::size_t d : scenario.contexts_containing(m))
        if (!reached[d]) {
          reached[d] = true;
          stack.push_back(d);
        }
  }
  return std::all_of(reached.begin(), reached.end(), [](bool b) { return b; });
}

ValidationReport validate_scenario(const MeasurementScenario& scenario) {
  ValidationReport report;
  const auto& contexts = scenario.contexts();
  for (std::size_t a = 0; a < contexts.size(); ++a)
    for (std::size_t b = 0; b < contexts.size(); ++b) {
      if (a == b) continue;
      if (is_subset(contexts[a], contexts[b]) && (contexts[a] != contexts[b] || a < b))
        report.add("anti-chain: context " + std::to_string(a) + " is contained in context " + std::to_string(b));
    }
  for (std::size_t m = 0; m < scenario.num_measurements(); ++m)
    if (scenario.contexts_containing(m).empty())
      report.add("covering: measurement '" + scenario.label(m) + "' lies in no context");
  if (contexts.empty()) report.add("covering: the cover is empty");
  if (!cover_is_connected(scenario)) report.add("connectedness: the cover splits into disjoint components");
  return report;
}

std::optional<Outcome> Section::value_at(std::size_t m) const {
  auto it = std::lower_bound(domain.begin(), domain.end(), m);
  if (it == domain.end() || *it != m) return std::nullopt;
  return values[static_cast<std::size_t>(it - domain.begin())];
}

MeasurementSet make_set(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

MeasurementSet set_intersection(const MeasurementSet& a, const MeasurementSet& b) {
  MeasurementSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(const MeasurementSet& a, const MeasurementSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Section restrict_section(const Section& s, const MeasurementSet& u) {
  Section out;
  out.domain = u;
  out.values.reserve(u.size());
  std::size_t k = 0;
  for (std::size_t m : u) {
    while (k < s.domain.size() && s.domain[k] < m) ++k;
    if (k == s.domain.size() || s.domain[k] != m)
      throw DomainError("restriction target is not a subset of the section's domain");
    out.values.push_back(s.values[k]);
  }
  return out;
}

EmpiricalModel::EmpiricalModel(MeasurementScenario scenario, std::vector<std::vector<Assignment>> sections)
    : scenario_(std::move(scenario)), sections_(std::move(sections)) {
  if (sections_.size() != scenario_.num_contexts())
    throw PreconditionError("expected section sets for " + std::to_string(scenario_.num_contexts()) +
                            " contexts, got " + std::to_string(sections_.size()));
  for (std::size_t c = 0; c < sections_.size(); ++c) {
    auto& list = sections_[c];
    if (list.empty()) throw PreconditionError("context " + std::to_string(c) + " has no sections");
    for (const auto& s : list) {
      if (s.size() != scenario_.context(c).size())
        throw PreconditionError("section of context " + std::to_string(c) + " has the wrong length");
      for (Outcome o : s)
        if (o < 0 || o >= scenario_.modulus())
          throw PreconditionError("outcome " + std::to_string(o) + " outside Z_" +
                                  std::to_string(scenario_.modulus()));
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

std::size_t EmpiricalModel::total_sections() const {
  std::size_t n = 0;
  for (const auto& s : sections_) n += s.size();
  return n;
}

std::optional<std::size_t> EmpiricalModel::find_section(std::size_t c, const Assignment& s) const {
  const auto& list = sections_.at(c);
  auto it = std::lower_bound(list.begin(), list.end(), s);
  if (it == list.end() || *it != s) return std::nullopt;
  return static_cast<std::size_t>(it - list.begin());
}

namespace {

std::vector<Section> restrictions(const EmpiricalModel& model, std::size_t c, const MeasurementSet& v) {
  std::set<Section> out;
  for (std::size_t k = 0; k < model.sections(c).size(); ++k) out.insert(restrict_section(model.section(c, k), v));
  return {out.begin(), out.end()};
}

}  // namespace

std::vector<Section> sections_below(const EmpiricalModel& model, const MeasurementSet& v) {
  auto c = model.scenario().first_context_containing(v);
  if (!c) throw DomainError("measurement set is not contained in any context");
  return restrictions(model, *c, v);
}

ValidationReport check_no_signalling(const EmpiricalModel& model) {
  ValidationReport report;
  const auto& sc = model.scenario();
  for (std::size_t a = 0; a < sc.num_contexts(); ++a)
    for (std::size_t b = a + 1; b < sc.num_contexts(); ++b) {
      auto overlap = set_intersection(sc.context(a), sc.context(b));
      if (overlap.empty()) continue;
      if (restrictions(model, a, overlap) != restrictions(model, b, overlap))
        report.add("no-signalling: contexts " + std::to_string(a) + " and " + std::to_string(b) +
                   " disagree on their overlap");
    }
  // Flasqueness below the cover: every restriction of a section extends back
  // to a section of each context containing its domain. For set-of-function
  // data this follows from the pairwise check; asserted on single
  // measurements for a cheap independent signal.
  for (std::size_t m = 0; m < sc.num_measurements(); ++m) {
    const auto& cs = sc.contexts_containing(m);
    if (cs.size() < 2) continue;
    auto reference = restrictions(model, cs.front(), {m});
    for (std::size_t c : cs)
      if (restrictions(model, c, {m}) != reference)
        report.add("flasque: outcomes of '" + sc.label(m) + "' differ between contexts " +
                   std::to_string(cs.front()) + " and " + std::to_string(c));
  }
  return report;
}

namespace {

using Bits = boost::dynamic_bitset<>;

class GlobalSearch {
 public:
  explicit GlobalSearch(const EmpiricalModel& model) : model_(model), sc_(model.scenario()) {
    const std::size_t nm = sc_.num_measurements();
    order_.resize(nm);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const auto da = sc_.contexts_containing(a).size(), db = sc_.contexts_containing(b).size();
      return da != db ? da > db : sc_.label(a) < sc_.label(b);
    });
    const auto d = static_cast<std::size_t>(sc_.modulus());
    masks_.resize(sc_.num_contexts());
    position_.assign(nm, {});
    for (std::size_t c = 0; c < sc_.num_contexts(); ++c) {
      const auto& ctx = sc_.context(c);
      const auto& secs = model.sections(c);
      masks_[c].assign(ctx.size() * d, Bits(secs.size()));
      for (std::size_t p = 0; p < ctx.size(); ++p) {
        position_[ctx[p]].emplace_back(c, p);
        for (std::size_t k = 0; k < secs.size(); ++k) masks_[c][p * d + static_cast<std::size_t>(secs[k][p])].set(k);
      }
    }
  }

  std::vector<Assignment> run(std::size_t limit, const std::optional<Section>& fixed) {
    limit_ = limit;
    results_.clear();
    alive_.clear();
    for (std::size_t c = 0; c < sc_.num_contexts(); ++c) {
      Bits b(model_.sections(c).size());
      b.set();
      alive_.push_back(std::move(b));
    }
    assignment_.assign(sc_.num_measurements(), -1);
    std::vector<std::size_t> order;
    if (fixed) {
      for (std::size_t i = 0; i < fixed->domain.size(); ++i) {
        std::size_t m = fixed->domain[i];
        if (m >= sc_.num_measurements()) throw DomainError("fixed section refers to an unknown measurement");
        if (!assign(m, fixed->values[i])) return {};
      }
    }
    for (std::size_t m : order_)
      if (assignment_[m] < 0) order.push_back(m);
    recurse(order, 0);
    return std::move(results_);
  }

 private:
  bool assign(std::size_t m, Outcome v) {
    if (v < 0 || v >= sc_.modulus()) return false;
    const auto d = static_cast<std::size_t>(sc_.modulus());
    for (const auto& [c, p] : position_[m]) {
      alive_[c] &= masks_[c][p * d + static_cast<std::size_t>(v)];
      if (alive_[c].none()) return false;
    }
    assignment_[m] = v;
    return true;
  }

  void recurse(const std::vector<std::size_t>& order, std::size_t depth) {
    if (results_.size() >= limit_) return;
    if (depth == order.size()) {
      results_.push_back(assignment_);
      return;
    }
    const std::size_t m = order[depth];
    std::vector<Bits> saved;
    saved.reserve(position_[m].size());
    for (const auto& [c, p] : position_[m]) saved.push_back(alive_[c]);
    for (Outcome v = 0; v < sc_.modulus() && results_.size() < limit_; ++v) {
      if (assign(m, v)) recurse(order, depth + 1);
      for (std::size_t i = 0; i < position_[m].size(); ++i) alive_[position_[m][i].first] = saved[i];
      assignment_[m] = -1;
    }
  }

  const EmpiricalModel& model_;
  const MeasurementScenario& sc_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> position_;
  std::vector<std::vector<Bits>> masks_;
  std::vector<Bits> alive_;
  Assignment assignment_;
  std::vector<Assignment> results_;
  std::size_t limit_ = 0;
};

}  // namespace

std::vector<Assignment> global_sections(const EmpiricalModel& model, std::size_t limit,
                                        const std::optional<Section>& fixed) {
  GlobalSearch search(model);
  return search.run(limit, fixed);
}

std::optional<Assignment> find_global_extension(const EmpiricalModel& model, const Section& s) {
  auto found = global_sections(model, 1, s);
  if (found.empty()) return std::nullopt;
  return found.front();
}

std::string to_string(ContextualityKind kind) {
  switch (kind) {
    case ContextualityKind::NonContextual:
      return "noncontextual";
    case ContextualityKind::LogicallyContextual:
      return "logically contextual";
    case ContextualityKind::StronglyContextual:
      return "strongly contextual";
  }
  return "unknown";
}

ContextualityClass classify(const EmpiricalModel& model) {
  ContextualityClass out;
  GlobalSearch search(model);
  if (search.run(1, std::nullopt).empty()) {
    out.kind = ContextualityKind::StronglyContextual;
    return out;
  }
  const auto& sc = model.scenario();
  std::vector<std::vector<bool>> covered(sc.num_contexts());
  for (std::size_t c = 0; c < sc.num_contexts(); ++c) covered[c].assign(model.sections(c).size(), false);
  auto mark = [&](const Assignment& g) {
    for (std::size_t c = 0; c < sc.num_contexts(); ++c) {
      Assignment local;
      for (std::size_t m : sc.context(c)) local.push_back(g[m]);
      if (auto k = model.find_section(c, local)) covered[c][*k] = true;
    }
  };
  for (std::size_t c = 0; c < sc.num_contexts(); ++c)
    for (std::size_t k = 0; k < model.sections(c).size(); ++k) {
      if (covered[c][k]) continue;
      auto found = search.run(1, model.section(c, k));
      if (found.empty()) {
        out.witnesses.push_back({c, k});
      } else {
        mark(found.front());
      }
    }
  out.kind = out.witnesses.empty() ? ContextualityKind::NonContextual : ContextualityKind::LogicallyContextual;
  return out;
}

}  // namespace ctx
