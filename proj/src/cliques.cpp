#include "ctx/cliques.hpp"

#include <algorithm>
#include <boost/dynamic_bitset.hpp>

namespace ctx {

namespace {

using Bits = boost::dynamic_bitset<>;

struct Search {
  const std::vector<Bits>& nbr;
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;

  void expand(Bits p, Bits x) {
    if (p.none() && x.none()) {
      auto clique = current;
      std::sort(clique.begin(), clique.end());
      out.push_back(std::move(clique));
      return;
    }
    // Pivot maximizing |P ∩ N(u)|; lowest index on ties.
    Bits px = p | x;
    std::size_t pivot = px.find_first();
    std::size_t best = 0;
    for (std::size_t u = px.find_first(); u != Bits::npos; u = px.find_next(u)) {
      std::size_t c = (p & nbr[u]).count();
      if (c > best) {
        best = c;
        pivot = u;
      }
    }
    Bits candidates = p - nbr[pivot];
    for (std::size_t v = candidates.find_first(); v != Bits::npos; v = candidates.find_next(v)) {
      current.push_back(v);
      expand(p & nbr[v], x & nbr[v]);
      current.pop_back();
      p.reset(v);
      x.set(v);
    }
  }
};

}  // namespace

std::vector<std::vector<std::size_t>> maximal_cliques(const std::vector<std::vector<bool>>& adjacent) {
  const std::size_t n = adjacent.size();
  std::vector<Bits> nbr(n, Bits(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && adjacent[i][j]) nbr[i].set(j);
  Search search{nbr, {}, {}};
  if (n == 0) return {};
  Bits all(n);
  all.set();
  search.expand(all, Bits(n));
  std::sort(search.out.begin(), search.out.end());
  return std::move(search.out);
}

}  // namespace ctx
