#include "ctx/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "ctx/errors.hpp"

namespace ctx::linalg {

namespace {

// Floor division for a positive divisor.
Integer floor_div(const Integer& a, const Integer& b) {
  Integer q = a / b;
  if ((a % b) != 0 && a < 0) q -= 1;
  return q;
}

void axpy(std::vector<Integer>& y, const Integer& q, const std::vector<Integer>& x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!x[i].is_zero()) y[i] -= q * x[i];
  }
}

Integer dot_dense(const SparseRow& row, const std::vector<Integer>& x) {
  Integer acc = 0;
  for (std::size_t k = 0; k < row.cols.size(); ++k) {
    const Integer& xv = x[row.cols[k]];
    if (!xv.is_zero()) acc += row.vals[k] * xv;
  }
  return acc;
}

// Prime used for the cheap rational-consistency screen.
constexpr std::uint64_t kScreenPrime = 2305843009213693951ULL;  // 2^61 - 1

std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % kScreenPrime);
}

std::uint64_t to_screen(const Integer& v) {
  Integer r = mod_floor(v, Integer(kScreenPrime));
  return static_cast<std::uint64_t>(r);
}

std::uint64_t powmod61(std::uint64_t a, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e) {
    if (e & 1) r = mulmod61(r, a);
    a = mulmod61(a, a);
    e >>= 1;
  }
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// IntMatrix

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long long>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DomainError("IntMatrix: ragged initializer");
    for (long long v : r) data_.emplace_back(v);
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::transposed() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

IntMatrix IntMatrix::operator*(const IntMatrix& other) const {
  if (cols_ != other.rows_) throw DomainError("IntMatrix: dimension mismatch in product");
  IntMatrix out(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const Integer& a = (*this)(i, k);
      if (a.is_zero()) continue;
      for (std::size_t j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
    }
  return out;
}

std::vector<Integer> IntMatrix::operator*(std::span<const Integer> v) const {
  if (v.size() != cols_) throw DomainError("IntMatrix: dimension mismatch in product");
  std::vector<Integer> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) out[i] += (*this)(i, k) * v[k];
  return out;
}

bool IntMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Integer& v) { return v.is_zero(); });
}

// ---------------------------------------------------------------------------
// Hermite normal form

HermiteForm hermite_normal_form(const IntMatrix& m) {
  HermiteForm out{m, IntMatrix::identity(m.rows()), {}};
  IntMatrix& h = out.h;
  IntMatrix& u = out.u;
  const std::size_t rows = h.rows();

  auto row_sub = [&](std::size_t dst, std::size_t src, const Integer& q) {
    if (q.is_zero()) return;
    for (std::size_t c = 0; c < h.cols(); ++c) h(dst, c) -= q * h(src, c);
    for (std::size_t c = 0; c < u.cols(); ++c) u(dst, c) -= q * u(src, c);
  };
  auto row_swap = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < h.cols(); ++c) std::swap(h(a, c), h(b, c));
    for (std::size_t c = 0; c < u.cols(); ++c) std::swap(u(a, c), u(b, c));
  };
  auto row_negate = [&](std::size_t a) {
    for (std::size_t c = 0; c < h.cols(); ++c) h(a, c) = -h(a, c);
    for (std::size_t c = 0; c < u.cols(); ++c) u(a, c) = -u(a, c);
  };

  std::size_t r = 0;
  for (std::size_t c = 0; c < h.cols() && r < rows; ++c) {
    while (true) {
      std::size_t best = rows;
      for (std::size_t i = r; i < rows; ++i) {
        if (h(i, c).is_zero()) continue;
        if (best == rows || abs(h(i, c)) < abs(h(best, c))) best = i;
      }
      if (best == rows) break;
      row_swap(r, best);
      bool cleared = true;
      for (std::size_t i = r + 1; i < rows; ++i) {
        if (h(i, c).is_zero()) continue;
        row_sub(i, r, h(i, c) / h(r, c));
        if (!h(i, c).is_zero()) cleared = false;
      }
      if (cleared) break;
    }
    if (h(r, c).is_zero()) continue;
    if (h(r, c) < 0) row_negate(r);
    for (std::size_t i = 0; i < r; ++i) row_sub(i, r, floor_div(h(i, c), h(r, c)));
    out.pivot_cols.push_back(c);
    ++r;
  }
  return out;
}

Integer determinant(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw DomainError("determinant: matrix is not square");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  IntMatrix a = m;
  Integer sign = 1;
  Integer prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k).is_zero()) {
      std::size_t swap_row = n;
      for (std::size_t i = k + 1; i < n; ++i)
        if (!a(i, k).is_zero()) {
          swap_row = i;
          break;
        }
      if (swap_row == n) return 0;
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(swap_row, c));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

// ---------------------------------------------------------------------------
// SparseRow

void SparseRow::normalize() {
  std::vector<std::size_t> order(cols.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
  std::vector<std::size_t> nc;
  std::vector<Integer> nv;
  for (std::size_t k : order) {
    if (!nc.empty() && nc.back() == cols[k]) {
      nv.back() += vals[k];
    } else {
      nc.push_back(cols[k]);
      nv.push_back(vals[k]);
    }
  }
  cols.clear();
  vals.clear();
  for (std::size_t k = 0; k < nc.size(); ++k) {
    if (nv[k].is_zero()) continue;
    cols.push_back(nc[k]);
    vals.push_back(std::move(nv[k]));
  }
}

Integer SparseRow::dot(std::span<const Integer> x) const {
  Integer acc = 0;
  for (std::size_t k = 0; k < cols.size(); ++k) acc += vals[k] * x[cols[k]];
  return acc;
}

// ---------------------------------------------------------------------------
// LatticeSystem

LatticeSystem::LatticeSystem(std::size_t unknowns) : n_(unknowns) {
  kernel_.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    auto e = std::make_shared<std::vector<Integer>>(n_);
    (*e)[i] = 1;
    kernel_.push_back(std::move(e));
  }
}

void LatticeSystem::add_row(SparseRow row) {
  row.normalize();
  for (std::size_t c : row.cols)
    if (c >= n_) throw DomainError("LatticeSystem: column index out of range");
  auto stored = std::make_shared<StoredRow>();
  stored->screen.reserve(row.vals.size());
  for (const auto& v : row.vals) stored->screen.push_back(to_screen(v));
  stored->row = std::move(row);
  const SparseRow& r = stored->row;
  const std::size_t row_index = rows_.size();
  rows_.push_back(stored);

  std::vector<Integer> values(kernel_.size());
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < kernel_.size(); ++j) {
    values[j] = dot_dense(r, *kernel_[j]);
    if (!values[j].is_zero()) active.push_back(j);
  }
  if (active.empty()) return;

  // Euclid on the values: unimodular combinations of kernel vectors until a
  // single vector carries gcd(values).
  while (active.size() > 1) {
    std::size_t p = active.front();
    for (std::size_t j : active)
      if (abs(values[j]) < abs(values[p])) p = j;
    std::vector<std::size_t> next{p};
    for (std::size_t j : active) {
      if (j == p) continue;
      Integer q = values[j] / values[p];
      auto updated = std::make_shared<std::vector<Integer>>(*kernel_[j]);
      axpy(*updated, q, *kernel_[p]);
      kernel_[j] = std::move(updated);
      values[j] -= q * values[p];
      if (!values[j].is_zero()) next.push_back(j);
    }
    active = std::move(next);
  }

  const std::size_t p = active.front();
  auto pivot = std::make_shared<Pivot>();
  pivot->row = row_index;
  if (values[p] < 0) {
    auto negated = std::make_shared<std::vector<Integer>>(*kernel_[p]);
    for (auto& v : *negated) v = -v;
    pivot->vec = std::move(negated);
    pivot->diag = -values[p];
  } else {
    pivot->vec = kernel_[p];
    pivot->diag = values[p];
  }
  for (std::size_t s = 0; s < pivots_.size(); ++s) {
    Integer v = dot_dense(r, *pivots_[s]->vec);
    if (v.is_zero()) continue;
    pivot->lower_screen.emplace_back(s, to_screen(v));
    pivot->lower.emplace_back(s, std::move(v));
  }
  const auto& vec = *pivot->vec;
  for (std::size_t i = 0; i < vec.size(); ++i)
    if (!vec[i].is_zero()) pivot->vec_screen.emplace_back(i, to_screen(vec[i]));
  const std::uint64_t d = to_screen(pivot->diag);
  pivot->diag_screen_inv = d == 0 ? 0 : powmod61(d, kScreenPrime - 2);
  pivots_.push_back(std::move(pivot));
  kernel_.erase(kernel_.begin() + static_cast<std::ptrdiff_t>(p));
}

std::vector<std::vector<Integer>> LatticeSystem::kernel_basis() const {
  std::vector<std::vector<Integer>> out;
  out.reserve(kernel_.size());
  for (const auto& k : kernel_) out.push_back(*k);
  return out;
}

IntegerSolution LatticeSystem::solve(std::span<const Integer> rhs) const {
  if (rhs.size() != rows_.size()) throw DomainError("LatticeSystem::solve: rhs size mismatch");
  IntegerSolution out;
  const std::size_t r = pivots_.size();
  std::vector<Integer> coeff(r);
  for (std::size_t t = 0; t < r; ++t) {
    const Pivot& pv = *pivots_[t];
    Integer val = rhs[pv.row];
    for (const auto& [s, l] : pv.lower)
      if (!coeff[s].is_zero()) val -= l * coeff[s];
    if (!(val % pv.diag).is_zero()) {
      out.feasible = false;
      if (!rationally_consistent(rhs)) {
        // Some row is violated by every rational solution. Find it from a
        // rational solution kept over a common denominator.
        Integer denom = 1;
        std::vector<Integer> num(r);
        for (std::size_t s = 0; s < r; ++s) {
          const Pivot& ps = *pivots_[s];
          Integer v = denom * rhs[ps.row];
          for (const auto& [q, l] : ps.lower)
            if (!num[q].is_zero()) v -= l * num[q];
          if (!(v % ps.diag).is_zero()) {
            Integer g = gcd(v, ps.diag);
            Integer f = ps.diag / g;
            for (std::size_t q = 0; q < s; ++q) num[q] *= f;
            denom *= f;
            v *= f;
          }
          num[s] = v / ps.diag;
        }
        std::vector<Integer> xnum(n_);
        for (std::size_t s = 0; s < r; ++s)
          if (!num[s].is_zero()) {
            const auto& vec = *pivots_[s]->vec;
            for (std::size_t i = 0; i < n_; ++i)
              if (!vec[i].is_zero()) xnum[i] += num[s] * vec[i];
          }
        for (std::size_t i = 0; i < rows_.size(); ++i) {
          if (dot_dense(rows_[i]->row, xnum) != denom * rhs[i]) {
            out.certificate = rational_certificate(i, rhs);
            return out;
          }
        }
      }
      out.certificate = integrality_certificate(t);
      return out;
    }
    coeff[t] = val / pv.diag;
  }

  std::vector<Integer> x(n_);
  for (std::size_t t = 0; t < r; ++t) {
    if (coeff[t].is_zero()) continue;
    const auto& vec = *pivots_[t]->vec;
    for (std::size_t i = 0; i < n_; ++i)
      if (!vec[i].is_zero()) x[i] += coeff[t] * vec[i];
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (dot_dense(rows_[i]->row, x) != rhs[i]) {
      out.feasible = false;
      out.certificate = rational_certificate(i, rhs);
      return out;
    }
  }
  out.feasible = true;
  out.x = std::move(x);
  return out;
}

namespace {

// Fraction-free backward substitution for lambda^T L = w with L the
// lower-triangular pivot matrix (diagonal `diag`, strictly lower part given
// per row). Returns numerators over a common positive denominator.
template <typename Pivots>
std::pair<std::vector<Integer>, Integer> backward_solve(const Pivots& pivots, std::size_t count,
                                                        const std::vector<Integer>& w) {
  std::vector<Integer> lam(count);
  std::vector<Integer> acc(count);
  Integer denom = 1;
  for (std::size_t s = count; s-- > 0;) {
    Integer num = denom * w[s] - acc[s];
    const Integer& diag = pivots[s]->diag;
    if (!(num % diag).is_zero()) {
      Integer g = gcd(num, diag);
      Integer f = diag / g;
      for (std::size_t q = s + 1; q < count; ++q) lam[q] *= f;
      for (std::size_t q = 0; q <= s; ++q) acc[q] *= f;
      denom *= f;
      num *= f;
    }
    lam[s] = num / diag;
    if (!lam[s].is_zero())
      for (const auto& [q, l] : pivots[s]->lower) acc[q] += lam[s] * l;
  }
  return {std::move(lam), std::move(denom)};
}

}  // namespace

IntegerCertificate LatticeSystem::integrality_certificate(std::size_t t) const {
  // y^T L = e_t restricted to pivots 0..t.
  std::vector<Integer> w(t + 1);
  w[t] = 1;
  auto [lam, denom] = backward_solve(pivots_, t + 1, w);
  IntegerCertificate cert;
  for (std::size_t s = 0; s <= t; ++s)
    if (!lam[s].is_zero()) cert.numerators.emplace_back(pivots_[s]->row, lam[s]);
  cert.denominator = denom;
  cert.rational = false;
  return cert;
}

IntegerCertificate LatticeSystem::rational_certificate(std::size_t row, std::span<const Integer> rhs) const {
  const std::size_t r = pivots_.size();
  // w_s = a_row . u_s; lambda^T L = w expresses a_row in the pivot rows.
  std::vector<Integer> w(r);
  for (std::size_t s = 0; s < r; ++s) w[s] = dot_dense(rows_[row]->row, *pivots_[s]->vec);
  auto [lam, denom] = backward_solve(pivots_, r, w);
  // y = e_row - lambda (scaled): y^T A = 0, y^T b = B / denom.
  std::vector<std::pair<std::size_t, Integer>> numerators;
  numerators.emplace_back(row, denom);
  for (std::size_t s = 0; s < r; ++s)
    if (!lam[s].is_zero()) numerators.emplace_back(pivots_[s]->row, -lam[s]);
  Integer b = 0;
  for (const auto& [i, v] : numerators) b += v * rhs[i];
  if (b.is_zero()) throw InvariantViolation("rational certificate: violated row is consistent");
  IntegerCertificate cert;
  if (b < 0) {
    for (auto& [i, v] : numerators) v = -v;
    b = -b;
  }
  cert.numerators = std::move(numerators);
  cert.denominator = 2 * b;
  cert.rational = true;
  return cert;
}

bool LatticeSystem::rationally_consistent(std::span<const Integer> rhs) const {
  // Evaluated modulo a large prime: a violated row mod p certifies rational
  // inconsistency. Passing is only evidence, and callers fall back to an
  // integrality certificate, which is valid either way.
  const std::size_t r = pivots_.size();
  std::vector<std::uint64_t> c(r);
  for (std::size_t t = 0; t < r; ++t) {
    const Pivot& pv = *pivots_[t];
    if (pv.diag_screen_inv == 0) return true;
    std::uint64_t val = to_screen(rhs[pv.row]);
    for (const auto& [s, l] : pv.lower_screen) {
      if (c[s] == 0) continue;
      val = (val + kScreenPrime - mulmod61(l, c[s])) % kScreenPrime;
    }
    c[t] = mulmod61(val, pv.diag_screen_inv);
  }
  std::vector<std::uint64_t> x(n_);
  for (std::size_t t = 0; t < r; ++t) {
    if (c[t] == 0) continue;
    for (const auto& [i, v] : pivots_[t]->vec_screen) x[i] = (x[i] + mulmod61(c[t], v)) % kScreenPrime;
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const StoredRow& row = *rows_[i];
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < row.row.cols.size(); ++k)
      acc = (acc + mulmod61(row.screen[k], x[row.row.cols[k]])) % kScreenPrime;
    if (acc != to_screen(rhs[i])) return false;
  }
  return true;
}

bool LatticeSystem::verify_solution(std::span<const Integer> rhs, std::span<const Integer> x) const {
  if (rhs.size() != rows_.size() || x.size() != n_) return false;
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (rows_[i]->row.dot(x) != rhs[i]) return false;
  return true;
}

bool LatticeSystem::verify_certificate(std::span<const Integer> rhs, const IntegerCertificate& cert) const {
  if (cert.denominator <= 0) return false;
  std::vector<Integer> combo(n_);
  Integer yb = 0;
  for (const auto& [i, v] : cert.numerators) {
    if (i >= rows_.size()) return false;
    const SparseRow& row = rows_[i]->row;
    for (std::size_t k = 0; k < row.cols.size(); ++k) combo[row.cols[k]] += v * row.vals[k];
    yb += v * rhs[i];
  }
  for (const auto& c : combo) {
    if (cert.rational ? !c.is_zero() : !(c % cert.denominator).is_zero()) return false;
  }
  return !(yb % cert.denominator).is_zero();
}

IntegerSolution solve_integer(const IntMatrix& a, std::span<const Integer> b) {
  if (b.size() != a.rows()) throw DomainError("solve_integer: rhs size mismatch");
  LatticeSystem sys(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    SparseRow row;
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (!a(i, j).is_zero()) row.add(j, a(i, j));
    sys.add_row(std::move(row));
  }
  return sys.solve(b);
}

bool verify_integer_solution(const IntMatrix& a, std::span<const Integer> b, std::span<const Integer> x) {
  if (x.size() != a.cols() || b.size() != a.rows()) return false;
  auto ax = a * x;
  return std::equal(ax.begin(), ax.end(), b.begin(), b.end());
}

bool verify_integer_certificate(const IntMatrix& a, std::span<const Integer> b, const IntegerCertificate& cert) {
  if (cert.denominator <= 0 || b.size() != a.rows()) return false;
  std::vector<Integer> combo(a.cols());
  Integer yb = 0;
  for (const auto& [i, v] : cert.numerators) {
    if (i >= a.rows()) return false;
    for (std::size_t j = 0; j < a.cols(); ++j) combo[j] += v * a(i, j);
    yb += v * b[i];
  }
  for (const auto& c : combo)
    if (!(c % cert.denominator).is_zero()) return false;
  return !(yb % cert.denominator).is_zero();
}

// ---------------------------------------------------------------------------
// Z_d

namespace {

constexpr std::int64_t kMaxModulus = std::int64_t{1} << 31;

std::int64_t reduce(std::int64_t v, std::int64_t d) {
  v %= d;
  return v < 0 ? v + d : v;
}

std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t d) { return (a * b) % d; }

// Reduced row echelon form over GF(p), in place. Returns pivot columns,
// considering only the first `limit` columns as pivot candidates.
std::vector<std::size_t> rref_prime(std::vector<std::vector<std::int64_t>>& m, std::size_t limit,
                                    std::int64_t p) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < limit && r < m.size(); ++c) {
    std::size_t sel = m.size();
    for (std::size_t i = r; i < m.size(); ++i)
      if (m[i][c] != 0) {
        sel = i;
        break;
      }
    if (sel == m.size()) continue;
    std::swap(m[r], m[sel]);
    std::int64_t inv = mod_inverse(m[r][c], p);
    for (auto& v : m[r]) v = mulmod(v, inv, p);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c] == 0) continue;
      std::int64_t f = m[i][c];
      auto& row = m[i];
      const auto& prow = m[r];
      for (std::size_t k = c; k < row.size(); ++k)
        if (prow[k] != 0) row[k] = reduce(row[k] - mulmod(f, prow[k], p), p);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

ModSolution solve_prime(const ModMatrix& a, std::span<const std::int64_t> b) {
  const std::int64_t p = a.modulus();
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<std::vector<std::int64_t>> aug(m, std::vector<std::int64_t>(n + 1));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug[i][j] = a(i, j);
    aug[i][n] = reduce(b[i], p);
  }
  auto pivots = rref_prime(aug, n, p);
  ModSolution out;
  for (std::size_t i = pivots.size(); i < m; ++i) {
    if (aug[i][n] != 0) {
      // [A^T; b^T] y = [0; 1] is solvable exactly when A x = b is not.
      ModMatrix dual(n + 1, m, p);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < m; ++k) dual.set(j, k, a(k, j));
      for (std::size_t k = 0; k < m; ++k) dual.set(n, k, b[k]);
      std::vector<std::int64_t> target(n + 1, 0);
      target[n] = 1;
      auto dual_sol = solve_prime(dual, target);
      if (!dual_sol.feasible) throw InvariantViolation("solve_mod: Fredholm alternative failed");
      out.feasible = false;
      out.certificate = std::move(dual_sol.x);
      return out;
    }
  }
  out.feasible = true;
  out.x.assign(n, 0);
  for (std::size_t i = 0; i < pivots.size(); ++i) out.x[pivots[i]] = aug[i][n];
  return out;
}

// Prime power q = p^k with k > 1: integer system [A | q I] (x, z) = b.
ModSolution solve_prime_power(const ModMatrix& a, std::span<const std::int64_t> b, std::int64_t q) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  LatticeSystem sys(n + m);
  std::vector<Integer> rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    SparseRow row;
    for (std::size_t j = 0; j < n; ++j) {
      std::int64_t v = reduce(a(i, j), q);
      if (v) row.add(j, v);
    }
    row.add(n + i, q);
    sys.add_row(std::move(row));
    rhs[i] = reduce(b[i], q);
  }
  auto sol = sys.solve(rhs);
  ModSolution out;
  if (sol.feasible) {
    out.feasible = true;
    out.x.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.x[j] = static_cast<std::int64_t>(mod_floor(sol.x[j], Integer(q)));
    return out;
  }
  // w = q * y is integral because y^T (q I) is; it refutes the system mod q.
  out.feasible = false;
  out.certificate.assign(m, 0);
  for (const auto& [i, v] : sol.certificate.numerators) {
    Integer scaled = Integer(q) * v;
    if (!(scaled % sol.certificate.denominator).is_zero())
      throw InvariantViolation("solve_mod: non-integral scaled certificate");
    out.certificate[i] = static_cast<std::int64_t>(mod_floor(scaled / sol.certificate.denominator, Integer(q)));
  }
  return out;
}

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

}  // namespace

std::int64_t mod_inverse(std::int64_t a, std::int64_t modulus) {
  std::int64_t t = 0, new_t = 1;
  std::int64_t r = modulus, new_r = reduce(a, modulus);
  while (new_r != 0) {
    std::int64_t q = r / new_r;
    std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
    std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
  }
  if (r != 1) throw DomainError("mod_inverse: element is not invertible");
  return reduce(t, modulus);
}

std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t n) {
  if (n < 2) throw DomainError("factorize: n must be at least 2");
  std::vector<std::pair<std::int64_t, int>> out;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

ModMatrix::ModMatrix(std::size_t rows, std::size_t cols, std::int64_t modulus)
    : rows_(rows), cols_(cols), modulus_(modulus), data_(rows * cols, 0) {
  if (modulus < 2 || modulus >= kMaxModulus) throw DomainError("ModMatrix: modulus must lie in [2, 2^31)");
}

ModMatrix::ModMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows, std::int64_t modulus)
    : ModMatrix(rows.size(), rows.size() ? rows.begin()->size() : 0, modulus) {
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DomainError("ModMatrix: ragged initializer");
    std::size_t c = 0;
    for (std::int64_t v : row) set(r, c++, v);
    ++r;
  }
}

void ModMatrix::set(std::size_t r, std::size_t c, std::int64_t v) { data_[r * cols_ + c] = reduce(v, modulus_); }

ModMatrix ModMatrix::transposed() const {
  ModMatrix t(cols_, rows_, modulus_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t.set(c, r, (*this)(r, c));
  return t;
}

ModSolution solve_mod(const ModMatrix& a, std::span<const std::int64_t> b) {
  if (b.size() != a.rows()) throw DomainError("solve_mod: rhs size mismatch");
  const std::int64_t d = a.modulus();
  const auto factors = factorize(d);
  if (factors.size() == 1 && factors[0].second == 1) return solve_prime(a, b);

  std::vector<std::int64_t> x(a.cols(), 0);
  std::int64_t modulus_so_far = 1;
  for (const auto& [p, e] : factors) {
    const std::int64_t q = ipow(p, e);
    ModMatrix local(a.rows(), a.cols(), q);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) local.set(i, j, a(i, j));
    ModSolution part = (e == 1) ? solve_prime(local, b) : solve_prime_power(local, b, q);
    if (!part.feasible) {
      ModSolution out;
      out.feasible = false;
      out.certificate.resize(a.rows());
      const std::int64_t cofactor = d / q;
      for (std::size_t i = 0; i < a.rows(); ++i) out.certificate[i] = reduce(cofactor * part.certificate[i], d);
      return out;
    }
    // CRT: combine x (mod modulus_so_far) with part.x (mod q).
    const std::int64_t inv = mod_inverse(modulus_so_far % q, q);
    for (std::size_t j = 0; j < x.size(); ++j) {
      std::int64_t delta = reduce(part.x[j] - x[j], q);
      std::int64_t k = mulmod(delta, inv, q);
      x[j] = x[j] + modulus_so_far * k;
    }
    modulus_so_far *= q;
  }
  ModSolution out;
  out.feasible = true;
  for (auto& v : x) v = reduce(v, d);
  out.x = std::move(x);
  return out;
}

ModLinearSystem::ModLinearSystem(ModMatrix a) : a_(std::move(a)) {
  const auto factors = factorize(a_.modulus());
  prime_ = factors.size() == 1 && factors[0].second == 1;
  if (!prime_) return;
  const std::int64_t p = a_.modulus();
  const std::size_t n = a_.cols();
  std::vector<std::vector<std::int64_t>> reduced;  // RREF rows, pivot entry 1
  for (std::size_t i = 0; i < a_.rows(); ++i) {
    std::vector<std::int64_t> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = a_(i, j);
    std::vector<std::int64_t> combo(basis_rows_.size() + 1, 0);
    combo.back() = 1;
    for (std::size_t k = 0; k < reduced.size(); ++k) {
      const std::int64_t f = w[pivot_cols_[k]];
      if (f == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (reduced[k][j]) w[j] = reduce(w[j] - mulmod(f, reduced[k][j], p), p);
      for (std::size_t j = 0; j < combos_[k].size(); ++j)
        if (combos_[k][j]) combo[j] = reduce(combo[j] - mulmod(f, combos_[k][j], p), p);
    }
    auto lead = std::find_if(w.begin(), w.end(), [](std::int64_t v) { return v != 0; });
    if (lead == w.end()) continue;
    const auto pc = static_cast<std::size_t>(lead - w.begin());
    const std::int64_t inv = mod_inverse(w[pc], p);
    for (auto& v : w) v = mulmod(v, inv, p);
    for (auto& v : combo) v = mulmod(v, inv, p);
    for (std::size_t k = 0; k < reduced.size(); ++k) {
      combos_[k].push_back(0);
      const std::int64_t f = reduced[k][pc];
      if (f == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (w[j]) reduced[k][j] = reduce(reduced[k][j] - mulmod(f, w[j], p), p);
      for (std::size_t j = 0; j < combo.size(); ++j)
        if (combo[j]) combos_[k][j] = reduce(combos_[k][j] - mulmod(f, combo[j], p), p);
    }
    reduced.push_back(std::move(w));
    combos_.push_back(std::move(combo));
    pivot_cols_.push_back(pc);
    basis_rows_.push_back(i);
  }
}

ModSolution ModLinearSystem::solve(std::span<const std::int64_t> b) const {
  if (b.size() != a_.rows()) throw DomainError("ModLinearSystem::solve: rhs size mismatch");
  if (!prime_) return solve_mod(a_, b);
  const std::int64_t p = a_.modulus();
  const std::size_t r = basis_rows_.size();
  std::vector<std::int64_t> bb(r);
  for (std::size_t k = 0; k < r; ++k) bb[k] = reduce(b[basis_rows_[k]], p);
  ModSolution out;
  out.x.assign(a_.cols(), 0);
  for (std::size_t k = 0; k < r; ++k) {
    std::int64_t acc = 0;
    for (std::size_t j = 0; j < r; ++j)
      if (combos_[k][j]) acc = reduce(acc + mulmod(combos_[k][j], bb[j], p), p);
    out.x[pivot_cols_[k]] = acc;
  }
  for (std::size_t i = 0; i < a_.rows(); ++i) {
    std::int64_t acc = 0;
    for (std::size_t j = 0; j < a_.cols(); ++j)
      if (a_(i, j)) acc = reduce(acc + mulmod(a_(i, j), out.x[j], p), p);
    if (acc == reduce(b[i], p)) continue;
    // Row i is a combination of the basis rows that the basis solution
    // cannot satisfy: y = e_i - lambda refutes the system.
    std::vector<std::int64_t> lambda(r, 0);
    for (std::size_t k = 0; k < r; ++k) {
      const std::int64_t mu = a_(i, pivot_cols_[k]);
      if (!mu) continue;
      for (std::size_t j = 0; j < r; ++j)
        if (combos_[k][j]) lambda[j] = reduce(lambda[j] + mulmod(mu, combos_[k][j], p), p);
    }
    out.feasible = false;
    out.x.clear();
    out.certificate.assign(a_.rows(), 0);
    out.certificate[i] = 1;
    for (std::size_t j = 0; j < r; ++j)
      out.certificate[basis_rows_[j]] = reduce(out.certificate[basis_rows_[j]] - lambda[j], p);
    return out;
  }
  out.feasible = true;
  return out;
}

bool verify_mod_solution(const ModMatrix& a, std::span<const std::int64_t> b, std::span<const std::int64_t> x) {
  const std::int64_t d = a.modulus();
  if (x.size() != a.cols() || b.size() != a.rows()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::int64_t acc = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc = reduce(acc + mulmod(a(i, j), reduce(x[j], d), d), d);
    if (acc != reduce(b[i], d)) return false;
  }
  return true;
}

bool verify_mod_certificate(const ModMatrix& a, std::span<const std::int64_t> b, std::span<const std::int64_t> y) {
  const std::int64_t d = a.modulus();
  if (y.size() != a.rows() || b.size() != a.rows()) return false;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) acc = reduce(acc + mulmod(reduce(y[i], d), a(i, j), d), d);
    if (acc != 0) return false;
  }
  std::int64_t yb = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) yb = reduce(yb + mulmod(reduce(y[i], d), reduce(b[i], d), d), d);
  return yb != 0;
}

std::vector<std::vector<std::int64_t>> kernel_mod(const ModMatrix& a) {
  const std::int64_t d = a.modulus();
  const std::size_t n = a.cols();
  const auto factors = factorize(d);
  std::vector<std::vector<std::int64_t>> out;
  if (factors.size() == 1 && factors[0].second == 1) {
    std::vector<std::vector<std::int64_t>> m(a.rows(), std::vector<std::int64_t>(n));
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = a(i, j);
    auto pivots = rref_prime(m, n, d);
    std::vector<bool> is_pivot(n, false);
    for (auto c : pivots) is_pivot[c] = true;
    for (std::size_t f = 0; f < n; ++f) {
      if (is_pivot[f]) continue;
      std::vector<std::int64_t> v(n, 0);
      v[f] = 1;
      for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = reduce(-m[i][f], d);
      out.push_back(std::move(v));
    }
    return out;
  }
  // Composite modulus: kernel of [A | d I] over Z, projected.
  LatticeSystem sys(n + a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    SparseRow row;
    for (std::size_t j = 0; j < n; ++j)
      if (a(i, j)) row.add(j, a(i, j));
    row.add(n + i, d);
    sys.add_row(std::move(row));
  }
  for (const auto& k : sys.kernel_basis()) {
    std::vector<std::int64_t> v(n);
    bool nonzero = false;
    for (std::size_t j = 0; j < n; ++j) {
      v[j] = static_cast<std::int64_t>(mod_floor(k[j], Integer(d)));
      nonzero = nonzero || v[j] != 0;
    }
    if (nonzero && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
  }
  return out;
}

std::vector<AffineRelation> affine_annihilator(std::span<const std::vector<std::int64_t>> points,
                                               std::int64_t modulus) {
  if (points.empty()) throw DomainError("affine_annihilator: empty point set");
  const std::size_t n = points.front().size();
  for (const auto& p : points)
    if (p.size() != n) throw DomainError("affine_annihilator: points of different length");
  ModMatrix diff(points.size() - 1, n, modulus);
  for (std::size_t i = 1; i < points.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) diff.set(i - 1, j, points[i][j] - points[0][j]);
  std::vector<std::vector<std::int64_t>> kernel;
  if (points.size() == 1) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::int64_t> e(n, 0);
      e[j] = 1;
      kernel.push_back(std::move(e));
    }
  } else {
    kernel = kernel_mod(diff);
  }
  std::vector<AffineRelation> out;
  for (auto& r : kernel) {
    AffineRelation rel;
    std::int64_t c = 0;
    for (std::size_t j = 0; j < n; ++j) c = reduce(c + mulmod(r[j], reduce(points[0][j], modulus), modulus), modulus);
    rel.coefficients = std::move(r);
    rel.constant = c;
    out.push_back(std::move(rel));
  }
  return out;
}

}  // namespace ctx::linalg
