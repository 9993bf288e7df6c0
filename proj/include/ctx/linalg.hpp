#pragma once

// Exact integer and modular linear algebra.
//
// Everything that decides an obstruction goes through this header:
// integer feasibility (Cech obstruction), linear systems over Z_d
// (coboundary test for the group obstruction, AvN theories) and affine
// relations of finite point sets (theory extraction).

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "ctx/integer.hpp"

namespace ctx::linalg {

class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  IntMatrix(std::initializer_list<std::initializer_list<long long>> rows);

  static IntMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Integer& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Integer& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Integer> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Integer> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  IntMatrix transposed() const;
  IntMatrix operator*(const IntMatrix& other) const;
  std::vector<Integer> operator*(std::span<const Integer> v) const;
  bool operator==(const IntMatrix& other) const = default;

  bool is_zero() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Integer> data_;
};

/// Row-style Hermite normal form: `u * m == h`, `u` unimodular, `h` in
/// row echelon form with positive pivots and entries above each pivot
/// reduced into [0, pivot).
struct HermiteForm {
  IntMatrix h;
  IntMatrix u;
  std::vector<std::size_t> pivot_cols;
};

HermiteForm hermite_normal_form(const IntMatrix& m);

/// Exact determinant by fraction-free (Bareiss) elimination.
Integer determinant(const IntMatrix& m);

/// A constraint row stored sparsely; columns strictly increasing after
/// `normalize()`.
struct SparseRow {
  std::vector<std::size_t> cols;
  std::vector<Integer> vals;

  void add(std::size_t col, const Integer& val) {
    cols.push_back(col);
    vals.push_back(val);
  }
  /// Sorts by column, merges duplicates and drops zeros.
  void normalize();
  Integer dot(std::span<const Integer> x) const;
};

/// Refutation of `A x = b` over the integers: the rational vector
/// y = numerators / denominator (sparse over constraint rows) satisfies
/// y^T A in Z^n and y^T b not in Z. When `rational` is set, y^T A = 0 and
/// the system has no rational solution either.
struct IntegerCertificate {
  std::vector<std::pair<std::size_t, Integer>> numerators;
  Integer denominator = 1;
  bool rational = false;
};

struct IntegerSolution {
  bool feasible = false;
  std::vector<Integer> x;
  IntegerCertificate certificate;
};

/// Incremental integer linear system.
///
/// Rows are absorbed one at a time by unimodular column operations on a
/// basis of Z^n. After k rows the basis splits into pivot vectors u_t (one
/// per independent row, with a_t . u_t = g_t > 0 and a_t . u_s = 0 for
/// s > t) and a basis of the integer kernel of the rows seen so far. This
/// is the column Hermite (echelon) form of A, computed without ever
/// materializing A densely. Copies share all frozen data, so a system can be
/// prepared once and then extended with problem-specific rows cheaply.
class LatticeSystem {
 public:
  explicit LatticeSystem(std::size_t unknowns);

  std::size_t unknowns() const { return n_; }
  std::size_t num_rows() const { return rows_.size(); }
  std::size_t rank() const { return pivots_.size(); }

  void add_row(SparseRow row);
  const SparseRow& row(std::size_t i) const { return rows_[i]->row; }

  IntegerSolution solve(std::span<const Integer> rhs) const;

  /// Z-basis of {x in Z^n : A x = 0}.
  std::vector<std::vector<Integer>> kernel_basis() const;

  bool verify_solution(std::span<const Integer> rhs, std::span<const Integer> x) const;
  bool verify_certificate(std::span<const Integer> rhs, const IntegerCertificate& cert) const;

 private:
  using Column = std::shared_ptr<const std::vector<Integer>>;
  using SparseResidues = std::vector<std::pair<std::size_t, std::uint64_t>>;
  struct StoredRow {
    SparseRow row;
    std::vector<std::uint64_t> screen;  // vals modulo the screening prime
  };
  struct Pivot {
    std::size_t row;
    Column vec;
    Integer diag;
    std::vector<std::pair<std::size_t, Integer>> lower;  // nonzero a_row . u_s, s ascending
    // Residues modulo the screening prime.
    SparseResidues vec_screen;
    SparseResidues lower_screen;
    std::uint64_t diag_screen_inv = 0;  // 0 when the prime divides diag
  };

  IntegerCertificate integrality_certificate(std::size_t t) const;
  IntegerCertificate rational_certificate(std::size_t row, std::span<const Integer> rhs) const;
  bool rationally_consistent(std::span<const Integer> rhs) const;

  std::size_t n_;
  std::vector<std::shared_ptr<const StoredRow>> rows_;
  std::vector<Column> kernel_;
  std::vector<std::shared_ptr<const Pivot>> pivots_;
};

/// Decides A x = b over Z for a dense system; see LatticeSystem.
IntegerSolution solve_integer(const IntMatrix& a, std::span<const Integer> b);

bool verify_integer_solution(const IntMatrix& a, std::span<const Integer> b,
                             std::span<const Integer> x);
bool verify_integer_certificate(const IntMatrix& a, std::span<const Integer> b,
                                const IntegerCertificate& cert);

// ---------------------------------------------------------------------------
// Arithmetic over Z_d.

/// Dense matrix over Z_d with entries kept in [0, d). Moduli are limited to
/// d < 2^31 so that every product of residues is exact in 64 bits.
class ModMatrix {
 public:
  ModMatrix(std::size_t rows, std::size_t cols, std::int64_t modulus);
  ModMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows, std::int64_t modulus);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::int64_t modulus() const { return modulus_; }

  std::int64_t operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, std::int64_t v);

  ModMatrix transposed() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::int64_t modulus_;
  std::vector<std::int64_t> data_;
};

/// Solution of A x = b over Z_d, or a functional y with y^T A = 0 and
/// y^T b != 0 (mod d).
struct ModSolution {
  bool feasible = false;
  std::vector<std::int64_t> x;
  std::vector<std::int64_t> certificate;
};

/// Prime d: Gaussian elimination over GF(d). Composite d: split by the
/// Chinese remainder theorem; prime-power factors p^k (k > 1) are solved as
/// the integer system [A | p^k I] and reduced.
ModSolution solve_mod(const ModMatrix& a, std::span<const std::int64_t> b);

/// A x = b over Z_d for a fixed A and many right-hand sides. For prime d,
/// A is reduced once to an independent row subset in reduced echelon form;
/// each solve then costs one substitution plus a check of the remaining
/// rows. Composite moduli defer to solve_mod.
class ModLinearSystem {
 public:
  explicit ModLinearSystem(ModMatrix a);

  const ModMatrix& matrix() const { return a_; }
  std::size_t rank() const { return pivot_cols_.size(); }
  ModSolution solve(std::span<const std::int64_t> b) const;

 private:
  ModMatrix a_;
  bool prime_ = false;
  std::vector<std::size_t> basis_rows_;
  std::vector<std::size_t> pivot_cols_;
  std::vector<std::vector<std::int64_t>> combos_;  // combos_[k] . b_basis = x[pivot_cols_[k]]
};

bool verify_mod_solution(const ModMatrix& a, std::span<const std::int64_t> b,
                         std::span<const std::int64_t> x);
bool verify_mod_certificate(const ModMatrix& a, std::span<const std::int64_t> b,
                            std::span<const std::int64_t> y);

/// Generating set of {x : A x = 0 (mod d)}, deterministic order, no zero
/// vectors.
std::vector<std::vector<std::int64_t>> kernel_mod(const ModMatrix& a);

/// r . s = a (mod d) for every row s.
struct AffineRelation {
  std::vector<std::int64_t> coefficients;
  std::int64_t constant = 0;
};

/// Generating set of the affine relations satisfied by every point in
/// `points` (each of the same length) over Z_d. Trivial relations are not
/// listed.
std::vector<AffineRelation> affine_annihilator(std::span<const std::vector<std::int64_t>> points,
                                               std::int64_t modulus);

/// Prime-power factorization of n >= 2, ascending primes.
std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t n);

std::int64_t mod_inverse(std::int64_t a, std::int64_t modulus);

}  // namespace ctx::linalg
