#pragma once

#include <cstddef>
#include <vector>

namespace ctx {

/// Maximal cliques of an undirected graph given by a symmetric adjacency
/// matrix (diagonal ignored). Bron-Kerbosch with Tomita pivoting; each clique
/// is sorted and the list is sorted lexicographically.
std::vector<std::vector<std::size_t>> maximal_cliques(const std::vector<std::vector<bool>>& adjacent);

}  // namespace ctx
