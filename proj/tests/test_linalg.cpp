#include <doctest.h>

#include <random>
#include <set>

#include "ctx/errors.hpp"
#include "ctx/linalg.hpp"
#include "oracles.hpp"

using namespace ctx;
using namespace ctx::linalg;

namespace {

IntMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

oracle::Mat to_oracle(const IntMatrix& m) {
  oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = static_cast<std::int64_t>(m(i, j));
  return out;
}

std::vector<Integer> ints(std::initializer_list<long long> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("hermite form of a fixed matrix") {
  IntMatrix m{{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}};
  auto hf = hermite_normal_form(m);
  CHECK(hf.u * m == hf.h);
  CHECK(abs(determinant(hf.u)) == 1);
  CHECK(hf.h == IntMatrix{{2, 4, 4}, {0, 6, 0}, {0, 0, 12}});
  CHECK(hf.pivot_cols == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("hermite form properties on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t r = 1 + rng() % 5, c = 1 + rng() % 5;
    auto m = random_matrix(rng, r, c, -5, 5);
    auto hf = hermite_normal_form(m);
    REQUIRE(hf.u * m == hf.h);
    REQUIRE(abs(determinant(hf.u)) == 1);
    std::size_t row = 0;
    for (std::size_t k = 0; k < hf.pivot_cols.size(); ++k, ++row) {
      std::size_t pc = hf.pivot_cols[k];
      REQUIRE(hf.h(row, pc) > 0);
      for (std::size_t j = 0; j < pc; ++j) REQUIRE(hf.h(row, j) == 0);
      for (std::size_t i = row + 1; i < r; ++i) REQUIRE(hf.h(i, pc) == 0);
      for (std::size_t i = 0; i < row; ++i) {
        REQUIRE(hf.h(i, pc) >= 0);
        REQUIRE(hf.h(i, pc) < hf.h(row, pc));
      }
    }
    for (std::size_t i = row; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) REQUIRE(hf.h(i, j) == 0);
  }
}

TEST_CASE("determinant") {
  CHECK(determinant(IntMatrix{{1, 2}, {3, 4}}) == -2);
  CHECK(determinant(IntMatrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 5}}) == -5);
  CHECK(determinant(IntMatrix{{1, 2}, {2, 4}}) == 0);
}

TEST_CASE("2x = 1 has a rational but no integer solution") {
  IntMatrix a{{2}};
  auto b = ints({1});
  auto sol = solve_integer(a, b);
  CHECK_FALSE(sol.feasible);
  CHECK_FALSE(sol.certificate.rational);
  CHECK(verify_integer_certificate(a, b, sol.certificate));
}

TEST_CASE("inconsistent system yields a rational certificate") {
  IntMatrix a{{1, 1}, {2, 2}};
  auto b = ints({1, 3});
  auto sol = solve_integer(a, b);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.certificate.rational);
  CHECK(verify_integer_certificate(a, b, sol.certificate));
}

TEST_CASE("integer feasibility agrees with bounded search") {
  std::mt19937_64 rng(23);
  int feasible = 0, integral_refuted = 0, rational_refuted = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::size_t r = 1 + rng() % 3, c = 1 + rng() % 3;
    auto a = random_matrix(rng, r, c, -3, 3);
    std::vector<Integer> b(r);
    if (trial % 2 == 0) {
      // Consistent by construction.
      auto x0 = random_matrix(rng, c, 1, -2, 2);
      auto ax = a * x0;
      for (std::size_t i = 0; i < r; ++i) b[i] = ax(i, 0);
    } else {
      for (auto& v : b) v = static_cast<int>(rng() % 9) - 4;
    }
    auto sol = solve_integer(a, b);
    oracle::Vec ob(r);
    for (std::size_t i = 0; i < r; ++i) ob[i] = static_cast<std::int64_t>(b[i]);
    if (sol.feasible) {
      ++feasible;
      REQUIRE(verify_integer_solution(a, b, sol.x));
    } else {
      REQUIRE(verify_integer_certificate(a, b, sol.certificate));
      REQUIRE_FALSE(oracle::bounded_integer_search(to_oracle(a), ob, 6).has_value());
      REQUIRE(sol.certificate.rational == !oracle::rationally_feasible(to_oracle(a), ob));
      (sol.certificate.rational ? rational_refuted : integral_refuted)++;
    }
  }
  CHECK(feasible > 0);
  CHECK(integral_refuted > 0);
  CHECK(rational_refuted > 0);
}

TEST_CASE("lattice system kernel basis and copies") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t r = 1 + rng() % 4, c = 2 + rng() % 4;
    auto a = random_matrix(rng, r, c, -4, 4);
    LatticeSystem sys(c);
    for (std::size_t i = 0; i < r; ++i) {
      SparseRow row;
      for (std::size_t j = 0; j < c; ++j)
        if (a(i, j) != 0) row.add(j, a(i, j));
      sys.add_row(row);
    }
    auto hf = hermite_normal_form(a);
    REQUIRE(sys.rank() == hf.pivot_cols.size());
    auto kernel = sys.kernel_basis();
    REQUIRE(kernel.size() == c - sys.rank());
    for (const auto& k : kernel) {
      auto ak = a * std::span<const Integer>(k);
      for (const auto& v : ak) REQUIRE(v == 0);
    }
    // Extending a copy leaves the original untouched.
    LatticeSystem copy = sys;
    SparseRow extra;
    extra.add(0, 1);
    copy.add_row(extra);
    REQUIRE(sys.num_rows() == r);
    REQUIRE(copy.num_rows() == r + 1);
    std::vector<Integer> zero(r, 0);
    REQUIRE(sys.solve(zero).feasible);
  }
}

TEST_CASE("sparse rows merge duplicates and drop zeros") {
  SparseRow row;
  row.add(3, 2);
  row.add(1, 1);
  row.add(3, -2);
  row.add(1, 4);
  row.normalize();
  CHECK(row.cols == std::vector<std::size_t>{1});
  CHECK(row.vals == ints({5}));
}

TEST_CASE("solve_mod agrees with exhaustive search") {
  std::mt19937_64 rng(99);
  const std::int64_t moduli[] = {2, 3, 4, 5, 6, 8, 9, 12};
  int refuted = 0;
  for (int trial = 0; trial < 600; ++trial) {
    std::int64_t d = moduli[rng() % std::size(moduli)];
    std::size_t r = 1 + rng() % 4, c = 1 + rng() % 3;
    ModMatrix a(r, c, d);
    oracle::Mat oa(r, oracle::Vec(c));
    oracle::Vec b(r);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        oa[i][j] = static_cast<std::int64_t>(rng() % d);
        a.set(i, j, oa[i][j]);
      }
      b[i] = static_cast<std::int64_t>(rng() % d);
    }
    auto sol = solve_mod(a, b);
    auto brute = oracle::brute_force_solve_mod(oa, b, d, c);
    REQUIRE(sol.feasible == brute.has_value());
    if (sol.feasible) {
      REQUIRE(verify_mod_solution(a, b, sol.x));
    } else {
      ++refuted;
      REQUIRE(verify_mod_certificate(a, b, sol.certificate));
    }
  }
  CHECK(refuted > 0);
}

TEST_CASE("kernel_mod generates the full kernel") {
  std::mt19937_64 rng(7);
  const std::int64_t moduli[] = {2, 3, 4, 6};
  for (int trial = 0; trial < 200; ++trial) {
    std::int64_t d = moduli[rng() % std::size(moduli)];
    std::size_t r = 1 + rng() % 3, c = 1 + rng() % 3;
    ModMatrix a(r, c, d);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) a.set(i, j, static_cast<std::int64_t>(rng() % d));
    auto gens = kernel_mod(a);
    std::set<oracle::Vec> brute, generated;
    oracle::Vec x(c, 0);
    std::vector<std::int64_t> zero_rhs(r, 0);
    while (true) {
      if (verify_mod_solution(a, zero_rhs, x)) brute.insert(x);
      std::size_t k = 0;
      while (k < c && ++x[k] == d) x[k++] = 0;
      if (k == c) break;
    }
    generated.insert(oracle::Vec(c, 0));
    bool grew = true;
    while (grew) {
      grew = false;
      for (auto v : std::vector<oracle::Vec>(generated.begin(), generated.end()))
        for (const auto& g : gens) {
          oracle::Vec w(c);
          for (std::size_t j = 0; j < c; ++j) w[j] = (v[j] + g[j]) % d;
          grew |= generated.insert(w).second;
        }
    }
    REQUIRE(generated == brute);
  }
}

TEST_CASE("affine annihilator cuts out the affine hull") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 150; ++trial) {
    const std::int64_t d = (trial % 3 == 0) ? 3 : 2;
    const std::size_t n = 1 + rng() % 4;
    std::vector<std::vector<std::int64_t>> pts;
    std::size_t count = 1 + rng() % 4;
    for (std::size_t k = 0; k < count; ++k) {
      std::vector<std::int64_t> p(n);
      for (auto& v : p) v = static_cast<std::int64_t>(rng() % d);
      pts.push_back(p);
    }
    auto rels = affine_annihilator(pts, d);
    // Affine hull by closure under x + (p_i - p_0).
    std::set<oracle::Vec> hull{pts[0]};
    bool grew = true;
    while (grew) {
      grew = false;
      for (auto v : std::vector<oracle::Vec>(hull.begin(), hull.end()))
        for (const auto& p : pts) {
          oracle::Vec w(n);
          for (std::size_t j = 0; j < n; ++j) w[j] = ((v[j] + p[j] - pts[0][j]) % d + d) % d;
          grew |= hull.insert(w).second;
        }
    }
    oracle::Vec x(n, 0);
    while (true) {
      bool sat = true;
      for (const auto& rel : rels) {
        std::int64_t acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc += rel.coefficients[j] * x[j];
        if (((acc - rel.constant) % d + d) % d != 0) sat = false;
      }
      REQUIRE(sat == (hull.count(x) == 1));
      std::size_t k = 0;
      while (k < n && ++x[k] == d) x[k++] = 0;
      if (k == n) break;
    }
  }
}

TEST_CASE("affine annihilator of the full space is empty") {
  std::vector<std::vector<std::int64_t>> pts{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  CHECK(affine_annihilator(pts, 2).empty());
}

TEST_CASE("factorize and inverses") {
  CHECK(factorize(12) == std::vector<std::pair<std::int64_t, int>>{{2, 2}, {3, 1}});
  CHECK(factorize(97) == std::vector<std::pair<std::int64_t, int>>{{97, 1}});
  CHECK(mod_inverse(3, 7) == 5);
  CHECK_THROWS_AS(mod_inverse(2, 4), DomainError);
  CHECK_THROWS_AS(ModMatrix(1, 1, 1), DomainError);
}

TEST_CASE("prepared modular system agrees with exhaustive search") {
  std::mt19937_64 rng(41);
  const std::int64_t moduli[] = {2, 3, 5, 4, 6};
  for (int trial = 0; trial < 300; ++trial) {
    std::int64_t d = moduli[rng() % std::size(moduli)];
    std::size_t r = 1 + rng() % 6, c = 1 + rng() % 4;
    ModMatrix a(r, c, d);
    oracle::Mat oa(r, oracle::Vec(c));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        oa[i][j] = static_cast<std::int64_t>(rng() % d);
        a.set(i, j, oa[i][j]);
      }
    ModLinearSystem sys(a);
    for (int k = 0; k < 4; ++k) {
      oracle::Vec b(r);
      for (auto& v : b) v = static_cast<std::int64_t>(rng() % d);
      auto sol = sys.solve(b);
      REQUIRE(sol.feasible == oracle::brute_force_solve_mod(oa, b, d, c).has_value());
      if (sol.feasible) {
        REQUIRE(verify_mod_solution(a, b, sol.x));
      } else {
        REQUIRE(verify_mod_certificate(a, b, sol.certificate));
      }
    }
  }
}
