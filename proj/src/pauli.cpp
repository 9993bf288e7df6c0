#include "ctx/pauli.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "ctx/cliques.hpp"

namespace ctx {

namespace {

int popcount(std::uint32_t v) { return std::popcount(v); }

// i-exponent picked up by sigma(x1,z1) * sigma(x2,z2) on one qubit.
int single_qubit_phase(int x1, int z1, int x2, int z2) {
  if (x1 == 1 && z1 == 0) return z2 * (2 * x2 - 1);  // X
  if (x1 == 1 && z1 == 1) return z2 - x2;            // Y
  if (x1 == 0 && z1 == 1) return x2 * (1 - 2 * z2);  // Z
  return 0;
}

std::uint32_t full_mask(std::size_t n) { return n == 32 ? ~0u : ((1u << n) - 1u); }

}  // namespace

PauliOperator::PauliOperator(std::size_t n, std::uint32_t x, std::uint32_t z, int phase)
    : n_(n), x_(x), z_(z), phase_(((phase % 4) + 4) % 4) {
  if (n > kMaxQubits) throw DomainError("at most 16 qubits are supported");
  if ((x | z) & ~full_mask(n)) throw DomainError("Pauli bit vector wider than the qubit count");
}

PauliOperator PauliOperator::parse(const std::string& text) {
  std::size_t pos = 0;
  int phase = 0;
  if (!text.empty() && (text[0] == '+' || text[0] == '-')) {
    phase = text[0] == '-' ? 2 : 0;
    pos = 1;
  }
  const std::size_t n = text.size() - pos;
  if (n == 0) throw ParseError("pauli", "empty Pauli word '" + text + "'");
  if (n > kMaxQubits) throw ParseError("pauli", "Pauli word longer than 16 qubits: '" + text + "'");
  std::uint32_t x = 0, z = 0;
  for (std::size_t j = 0; j < n; ++j) {
    switch (text[pos + j]) {
      case 'I':
        break;
      case 'X':
        x |= 1u << j;
        break;
      case 'Y':
        x |= 1u << j;
        z |= 1u << j;
        break;
      case 'Z':
        z |= 1u << j;
        break;
      default:
        throw ParseError("pauli", "unexpected character in Pauli word '" + text + "'");
    }
  }
  return {n, x, z, phase};
}

char PauliOperator::letter(std::size_t j) const {
  static constexpr char kLetters[] = {'I', 'Z', 'X', 'Y'};
  return kLetters[((x_ >> j) & 1u) * 2 + ((z_ >> j) & 1u)];
}

int PauliOperator::letter_rank(std::size_t j) const {
  switch (letter(j)) {
    case 'I':
      return 0;
    case 'X':
      return 1;
    case 'Y':
      return 2;
    default:
      return 3;
  }
}

std::string PauliOperator::to_string() const {
  static const char* kPrefix[] = {"+", "+i", "-", "-i"};
  std::string out = kPrefix[phase_];
  for (std::size_t j = 0; j < n_; ++j) out += letter(j);
  return out;
}

std::string PauliOperator::label() const {
  static const char* kPrefix[] = {"", "i", "-", "-i"};
  std::string out = kPrefix[phase_];
  if (is_identity_word()) return out + "I";
  for (std::size_t j = 0; j < n_; ++j)
    if (letter(j) != 'I') out += letter(j) + std::to_string(j + 1);
  return out;
}

PauliOperator multiply(const PauliOperator& p, const PauliOperator& q) {
  if (p.qubits() != q.qubits()) throw DomainError("Pauli operators act on different qubit counts");
  int phase = p.phase() + q.phase();
  for (std::size_t j = 0; j < p.qubits(); ++j)
    phase += single_qubit_phase((p.x() >> j) & 1, (p.z() >> j) & 1, (q.x() >> j) & 1, (q.z() >> j) & 1);
  return {p.qubits(), p.x() ^ q.x(), p.z() ^ q.z(), phase};
}

bool commutes(const PauliOperator& p, const PauliOperator& q) {
  if (p.qubits() != q.qubits()) throw DomainError("Pauli operators act on different qubit counts");
  return popcount((p.x() & q.z()) ^ (p.z() & q.x())) % 2 == 0;
}

std::vector<PauliOperator> close_under_commuting_products(const std::vector<PauliOperator>& gens, std::size_t n) {
  if (!gens.empty()) n = gens.front().qubits();
  std::set<PauliOperator> set(gens.begin(), gens.end());
  for (const auto& g : gens) {
    if (g.qubits() != n) throw DomainError("generators act on different qubit counts");
    if (!g.is_measurement()) throw DomainError("generator " + g.to_string() + " is not a measurement");
  }
  set.insert(PauliOperator::identity(n));
  set.insert(PauliOperator::identity(n).negated());
  std::vector<PauliOperator> frontier(set.begin(), set.end());
  while (!frontier.empty()) {
    std::vector<PauliOperator> all(set.begin(), set.end());
    std::vector<PauliOperator> next;
    for (const auto& a : frontier)
      for (const auto& b : all) {
        if (!commutes(a, b)) continue;
        auto prod = multiply(a, b);
        if (set.insert(prod).second) next.push_back(prod);
      }
    frontier = std::move(next);
  }
  return {set.begin(), set.end()};
}

bool is_closed_under_commuting_products(const std::vector<PauliOperator>& ops) {
  std::set<PauliOperator> set(ops.begin(), ops.end());
  for (const auto& a : ops)
    for (const auto& b : ops)
      if (commutes(a, b) && !set.count(multiply(a, b))) return false;
  return true;
}

std::vector<std::vector<std::size_t>> maximal_commuting_subsets(const std::vector<PauliOperator>& ops) {
  std::vector<std::vector<bool>> adj(ops.size(), std::vector<bool>(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (std::size_t j = 0; j < ops.size(); ++j) adj[i][j] = commutes(ops[i], ops[j]);
  return maximal_cliques(adj);
}

std::vector<std::vector<std::size_t>> maximal_contexts(const std::vector<PauliOperator>& ops) {
  if (!is_closed_under_commuting_products(ops))
    throw PreconditionError("measurement set is not closed under commuting products");
  auto contexts = maximal_commuting_subsets(ops);
  std::map<PauliOperator, std::size_t> index;
  for (std::size_t i = 0; i < ops.size(); ++i) index[ops[i]] = i;
  for (const auto& c : contexts) {
    std::set<std::size_t> members(c.begin(), c.end());
    for (std::size_t a : c)
      for (std::size_t b : c) {
        auto it = index.find(multiply(ops[a], ops[b]));
        if (it == index.end() || !members.count(it->second))
          throw InvariantViolation("maximal commuting subset of a closed set is not product-closed");
      }
  }
  return contexts;
}

// ---------------------------------------------------------------------------
// States

GaussianStateVector::GaussianStateVector(std::size_t n, std::vector<Gaussian> amplitudes)
    : n_(n), amps_(std::move(amplitudes)) {
  if (n > PauliOperator::kMaxQubits) throw DomainError("at most 16 qubits are supported");
  if (amps_.size() != (std::size_t{1} << n))
    throw DomainError("state vector needs 2^n = " + std::to_string(std::size_t{1} << n) + " amplitudes");
}

GaussianStateVector GaussianStateVector::ghz(std::size_t n) {
  if (n == 0) throw DomainError("GHZ state needs at least one qubit");
  std::vector<Gaussian> amps(std::size_t{1} << n);
  amps.front().re = 1;
  amps.back().re = 1;
  return {n, std::move(amps)};
}

GaussianStateVector GaussianStateVector::parse_named(const std::string& name) {
  const std::string prefix = "ghz:";
  if (name.rfind(prefix, 0) != 0) throw ParseError("state", "unknown named state '" + name + "'");
  std::size_t n = 0;
  try {
    std::size_t used = 0;
    n = std::stoul(name.substr(prefix.size()), &used);
    if (used != name.size() - prefix.size()) throw std::invalid_argument(name);
  } catch (const std::exception&) {
    throw ParseError("state", "bad qubit count in '" + name + "'");
  }
  if (n < 1 || n > PauliOperator::kMaxQubits) throw ParseError("state", "qubit count out of range in '" + name + "'");
  return ghz(n);
}

bool GaussianStateVector::is_zero() const {
  return std::all_of(amps_.begin(), amps_.end(), [](const Gaussian& g) { return g.is_zero(); });
}

GaussianStateVector GaussianStateVector::negated() const {
  auto amps = amps_;
  for (auto& a : amps) {
    a.re = -a.re;
    a.im = -a.im;
  }
  return {n_, std::move(amps)};
}

namespace {

// Bit of qubit j (0-based, qubit 1 first) inside a basis index.
std::uint32_t to_index_mask(std::uint32_t mask, std::size_t n) {
  std::uint32_t out = 0;
  for (std::size_t j = 0; j < n; ++j)
    if ((mask >> j) & 1u) out |= 1u << (n - 1 - j);
  return out;
}

Gaussian times_i_power(const Gaussian& g, int k) {
  switch (((k % 4) + 4) % 4) {
    case 0:
      return g;
    case 1:
      return {-g.im, g.re};
    case 2:
      return {-g.re, -g.im};
    default:
      return {g.im, -g.re};
  }
}

}  // namespace

GaussianStateVector apply_pauli(const PauliOperator& p, const GaussianStateVector& v) {
  if (p.qubits() != v.qubits()) throw DomainError("operator and state act on different qubit counts");
  const std::size_t n = p.qubits();
  const std::uint32_t xm = to_index_mask(p.x(), n);
  const std::uint32_t zm = to_index_mask(p.z(), n);
  const int base = p.phase() + popcount(p.x() & p.z());
  std::vector<Gaussian> out(v.amplitudes().size());
  for (std::uint32_t b = 0; b < out.size(); ++b) {
    const auto& a = v.amplitudes()[b];
    if (a.is_zero()) continue;
    out[b ^ xm] = times_i_power(a, base + 2 * (popcount(zm & b) % 2));
  }
  return {n, std::move(out)};
}

bool born_consistent(const std::vector<PauliOperator>& measurements, const std::vector<Outcome>& outcomes,
                     const GaussianStateVector& v) {
  if (measurements.size() != outcomes.size()) throw DomainError("measurement and outcome lists differ in length");
  for (std::size_t a = 0; a < measurements.size(); ++a)
    for (std::size_t b = a + 1; b < measurements.size(); ++b)
      if (!commutes(measurements[a], measurements[b]))
        throw PreconditionError(measurements[a].to_string() + " and " + measurements[b].to_string() +
                                " do not commute");
  GaussianStateVector cur = v;
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    if (!measurements[k].is_measurement())
      throw PreconditionError(measurements[k].to_string() + " is not a measurement");
    auto mv = apply_pauli(measurements[k], cur);
    std::vector<Gaussian> amps = cur.amplitudes();
    const bool minus = (outcomes[k] % 2) != 0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
      const auto& m = mv.amplitudes()[i];
      if (minus) {
        amps[i].re -= m.re;
        amps[i].im -= m.im;
      } else {
        amps[i].re += m.re;
        amps[i].im += m.im;
      }
    }
    cur = GaussianStateVector(v.qubits(), std::move(amps));
    if (cur.is_zero()) return false;
  }
  return !cur.is_zero();
}

std::vector<Assignment> context_splittings(const std::vector<PauliOperator>& context) {
  if (context.empty()) throw PreconditionError("empty context");
  const std::size_t n = context.front().qubits();
  std::map<PauliOperator, std::size_t> index;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (context[i].qubits() != n) throw PreconditionError("context mixes qubit counts");
    if (!context[i].is_measurement()) throw PreconditionError(context[i].to_string() + " is not a measurement");
    index[context[i]] = i;
  }
  const auto id = PauliOperator::identity(n);
  if (!index.count(id) || !index.count(id.negated())) throw PreconditionError("context does not contain ±I");
  for (const auto& a : context)
    for (const auto& b : context) {
      if (!commutes(a, b)) throw PreconditionError(a.to_string() + " and " + b.to_string() + " do not commute");
      if (!index.count(multiply(a, b))) throw PreconditionError("context is not closed under products");
    }

  // Generators: operators whose words are independent over GF(2).
  std::vector<PauliOperator> gens;
  std::vector<std::uint64_t> reduced;  // echelon basis of words
  auto word = [n](const PauliOperator& p) { return std::uint64_t{p.x()} | (std::uint64_t{p.z()} << n); };
  for (const auto& p : context) {
    std::uint64_t w = word(p);
    for (auto r : reduced)
      if ((w ^ r) < w) w ^= r;
    if (w == 0) continue;
    reduced.push_back(w);
    std::sort(reduced.rbegin(), reduced.rend());
    gens.push_back(p);
  }
  const std::size_t k = gens.size();
  if (context.size() != (std::size_t{2} << k))
    throw PreconditionError("context is not a group of the expected order");

  std::vector<Assignment> out;
  for (std::uint64_t values = 0; values < (std::uint64_t{1} << k); ++values) {
    Assignment s(context.size(), -1);
    for (std::uint64_t combo = 0; combo < (std::uint64_t{1} << k); ++combo) {
      PauliOperator prod = id;
      Outcome v = 0;
      for (std::size_t g = 0; g < k; ++g)
        if ((combo >> g) & 1u) {
          prod = multiply(prod, gens[g]);
          v ^= static_cast<Outcome>((values >> g) & 1u);
        }
      s[index.at(prod)] = v;
      s[index.at(prod.negated())] = v ^ 1;
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PauliOperator> determined_submonoid(const std::vector<PauliOperator>& ops, const GaussianStateVector& v) {
  if (v.is_zero()) throw DomainError("the zero vector is not a state");
  const auto minus_v = v.negated();
  std::vector<PauliOperator> out;
  for (const auto& p : ops) {
    auto pv = apply_pauli(p, v);
    if (pv == v || pv == minus_v) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PauliModel build_pauli_model(std::vector<PauliOperator> ops, const std::optional<GaussianStateVector>& state) {
  if (ops.empty()) throw PreconditionError("empty measurement set");
  std::sort(ops.begin(), ops.end());
  ops.erase(std::unique(ops.begin(), ops.end()), ops.end());
  const std::size_t n = ops.front().qubits();
  for (const auto& p : ops) {
    if (p.qubits() != n) throw PreconditionError("measurements act on different qubit counts");
    if (!p.is_measurement()) throw PreconditionError(p.to_string() + " is not a measurement");
  }
  const auto id = PauliOperator::identity(n);
  if (!std::binary_search(ops.begin(), ops.end(), id) || !std::binary_search(ops.begin(), ops.end(), id.negated()))
    throw PreconditionError("measurement set does not contain ±I");
  if (state) {
    if (state->qubits() != n) throw PreconditionError("state and measurements act on different qubit counts");
    if (state->is_zero()) throw PreconditionError("the zero vector is not a state");
  }

  const bool closed = is_closed_under_commuting_products(ops);
  auto contexts = closed ? maximal_contexts(ops) : maximal_commuting_subsets(ops);

  std::vector<std::string> labels;
  for (const auto& p : ops) labels.push_back(p.label());
  std::vector<std::vector<Assignment>> sections;
  for (std::size_t c = 0; c < contexts.size(); ++c) {
    std::vector<PauliOperator> members;
    for (std::size_t i : contexts[c]) members.push_back(ops[i]);
    std::set<Assignment> local;
    if (closed) {
      for (auto& s : context_splittings(members)) local.insert(std::move(s));
    } else {
      auto group = close_under_commuting_products(members, n);
      std::map<PauliOperator, std::size_t> where;
      for (std::size_t i = 0; i < group.size(); ++i) where[group[i]] = i;
      for (const auto& s : context_splittings(group)) {
        Assignment r;
        for (const auto& m : members) r.push_back(s[where.at(m)]);
        local.insert(std::move(r));
      }
    }
    std::vector<Assignment> kept;
    for (const auto& s : local)
      if (!state || born_consistent(members, s, *state)) kept.push_back(s);
    if (kept.empty())
      throw PreconditionError("context " + std::to_string(c) + " has no section consistent with the state");
    sections.push_back(std::move(kept));
  }
  MeasurementScenario scenario(std::move(labels), std::move(contexts), 2);
  return {std::move(ops), EmpiricalModel(std::move(scenario), std::move(sections)), closed, state};
}

MonoidStructure pauli_structure(const PauliModel& pm) {
  if (!pm.closed) throw PreconditionError("monoid structure needs a measurement set closed under commuting products");
  const auto& ops = pm.operators;
  std::map<PauliOperator, std::size_t> index;
  for (std::size_t i = 0; i < ops.size(); ++i) index[ops[i]] = i;
  const std::size_t n = ops.front().qubits();
  const std::size_t id = index.at(PauliOperator::identity(n));
  const std::size_t minus_id = index.at(PauliOperator::identity(n).negated());
  std::vector<ContextMonoid> contexts;
  for (const auto& ctx : pm.model.scenario().contexts()) {
    ContextMonoid cm{ctx, id, {}};
    for (std::size_t a : ctx)
      for (std::size_t b : ctx) cm.table.push_back(index.at(multiply(ops[a], ops[b])));
    contexts.push_back(std::move(cm));
  }
  auto monoid = glue_contexts(ops.size(), contexts, pm.model.scenario().labels());
  return {std::move(monoid), CoefficientAction{FiniteAbelianGroup({2}), {id, minus_id}}};
}

EmpiricalModel build_state_independent_model(const std::vector<PauliOperator>& closed_ops) {
  if (!is_closed_under_commuting_products(closed_ops))
    throw PreconditionError("measurement set is not closed under commuting products");
  return build_pauli_model(closed_ops, std::nullopt).model;
}

EmpiricalModel build_state_dependent_model(const std::vector<PauliOperator>& closed_ops,
                                           const GaussianStateVector& v) {
  if (!is_closed_under_commuting_products(closed_ops))
    throw PreconditionError("measurement set is not closed under commuting products");
  return build_pauli_model(closed_ops, v).model;
}

}  // namespace ctx
