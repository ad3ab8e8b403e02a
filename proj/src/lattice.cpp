#include "nek/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nek/errors.hpp"

namespace nek::lat {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw NumericalError("lattice: 64-bit overflow in multiplication");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw NumericalError("lattice: 64-bit overflow in addition");
  return r;
}

void row_axpy(IntVec& target, const IntVec& src, std::int64_t q) {
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = checked_add(target[i], checked_mul(-q, src[i]));
}

// floor division quotient, so remainders land in [0, |b|)
std::int64_t fdiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

IntMat hermite_normal_form(IntMat rows) {
  if (rows.empty()) return rows;
  const std::size_t d = rows[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < d && r < rows.size(); ++c) {
    // Euclidean elimination in column c on rows r..end.
    for (;;) {
      std::size_t piv = rows.size();
      for (std::size_t i = r; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        if (piv == rows.size() ||
            std::llabs(rows[i][c]) < std::llabs(rows[piv][c]))
          piv = i;
      }
      if (piv == rows.size()) break;  // column clear
      std::swap(rows[r], rows[piv]);
      bool clean = true;
      for (std::size_t i = r + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        std::int64_t q = rows[i][c] / rows[r][c];
        row_axpy(rows[i], rows[r], q);
        if (rows[i][c] != 0) clean = false;
      }
      if (clean) break;
    }
    if (rows[r][c] == 0) continue;
    if (rows[r][c] < 0)
      for (auto& x : rows[r]) x = -x;
    // Reduce entries above the pivot into [0, pivot).
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i][c] == 0) continue;
      std::int64_t q = fdiv(rows[i][c], rows[r][c]);
      row_axpy(rows[i], rows[r], q);
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

void LatticeModule::finalize() {
  s_ = static_cast<int>(basis_.size());
  // Projector B^T (B B^T)^{-1} B via a small dense solve.
  projector_.assign(d_, std::vector<double>(d_, 0.0));
  if (s_ > 0) {
    std::vector<std::vector<double>> g(s_, std::vector<double>(s_, 0.0));
    for (int i = 0; i < s_; ++i)
      for (int j = 0; j < s_; ++j) {
        double sum = 0.0;
        for (int c = 0; c < d_; ++c)
          sum += static_cast<double>(basis_[i][c]) * basis_[j][c];
        g[i][j] = sum;
      }
    // invert g by Gauss-Jordan
    std::vector<std::vector<double>> inv(s_, std::vector<double>(s_, 0.0));
    for (int i = 0; i < s_; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < s_; ++col) {
      int piv = col;
      for (int i = col + 1; i < s_; ++i)
        if (std::fabs(g[i][col]) > std::fabs(g[piv][col])) piv = i;
      if (std::fabs(g[piv][col]) < 1e-12)
        throw NumericalError("lattice projector: singular Gram matrix");
      std::swap(g[piv], g[col]);
      std::swap(inv[piv], inv[col]);
      double den = g[col][col];
      for (int j = 0; j < s_; ++j) {
        g[col][j] /= den;
        inv[col][j] /= den;
      }
      for (int i = 0; i < s_; ++i) {
        if (i == col) continue;
        double f = g[i][col];
        if (f == 0.0) continue;
        for (int j = 0; j < s_; ++j) {
          g[i][j] -= f * g[col][j];
          inv[i][j] -= f * inv[col][j];
        }
      }
    }
    for (int x = 0; x < d_; ++x)
      for (int y = 0; y < d_; ++y) {
        double sum = 0.0;
        for (int i = 0; i < s_; ++i)
          for (int j = 0; j < s_; ++j)
            sum += basis_[i][x] * inv[i][j] * basis_[j][y];
        projector_[x][y] = sum;
      }
  }
  std::ostringstream os;
  os << d_ << ":" << s_;
  for (const auto& row : basis_) {
    os << "|";
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << row[i];
  }
  key_ = os.str();
}

LatticeModule LatticeModule::trivial(int d) {
  LatticeModule m;
  m.d_ = d;
  m.finalize();
  return m;
}

bool LatticeModule::contains(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != d_)
    throw ConfigError("lattice contains: dimension mismatch");
  IntVec rem(k.begin(), k.end());
  for (const auto& row : basis_) {
    int pivot_col = -1;
    for (int c = 0; c < d_; ++c)
      if (row[c] != 0) {
        pivot_col = c;
        break;
      }
    if (pivot_col < 0) continue;
    if (rem[pivot_col] % row[pivot_col] != 0) {
      // partial reduction cannot land in the lattice, but keep reducing to
      // detect the all-zero case exactly
      return false;
    }
    std::int64_t q = rem[pivot_col] / row[pivot_col];
    for (int c = 0; c < d_; ++c)
      rem[c] = checked_add(rem[c], checked_mul(-q, row[c]));
  }
  return std::all_of(rem.begin(), rem.end(),
                     [](std::int64_t x) { return x == 0; });
}

bool LatticeModule::contains_module(const LatticeModule& other) const {
  for (const auto& row : other.basis_) {
    std::vector<int> k(row.begin(), row.end());
    if (!contains(k)) return false;
  }
  return true;
}

std::vector<double> LatticeModule::project(std::span<const double> a) const {
  if (static_cast<int>(a.size()) != d_)
    throw ConfigError("lattice project: dimension mismatch");
  std::vector<double> out(d_, 0.0);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) out[i] += projector_[i][j] * a[j];
  return out;
}

LatticeModule saturate(const std::vector<std::vector<int>>& vectors, int d) {
  if (vectors.empty())
    throw ConfigError("saturate: no input vectors");
  bool any = false;
  IntMat a;
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != d)
      throw ConfigError("saturate: vector dimension mismatch");
    IntVec row(v.begin(), v.end());
    for (auto x : row) any = any || x != 0;
    a.push_back(std::move(row));
  }
  if (!any) throw ConfigError("saturate: all input vectors are zero");

  // Unimodular diagonalization U A V = D, tracking W = V^{-1}.  The first
  // rank(A) rows of W form a basis of the saturation of the row lattice.
  const std::size_t n = a.size();
  IntMat w(d, IntVec(d, 0));
  for (int i = 0; i < d; ++i) w[i][i] = 1;

  auto col_swap = [&](std::size_t p, std::size_t q) {
    for (std::size_t i = 0; i < n; ++i) std::swap(a[i][p], a[i][q]);
    std::swap(w[p], w[q]);
  };
  auto col_negate = [&](std::size_t p) {
    for (std::size_t i = 0; i < n; ++i) a[i][p] = -a[i][p];
    for (auto& x : w[p]) x = -x;
  };
  // col_j -= q * col_r  on A; row_r += q * row_j on W (inverse op).
  auto col_axpy = [&](std::size_t j, std::size_t r, std::int64_t q) {
    for (std::size_t i = 0; i < n; ++i)
      a[i][j] = checked_add(a[i][j], checked_mul(-q, a[i][r]));
    for (int c = 0; c < d; ++c)
      w[r][c] = checked_add(w[r][c], checked_mul(q, w[j][c]));
  };

  std::size_t r = 0;
  const std::size_t dim = static_cast<std::size_t>(d);
  while (r < n && r < dim) {
    // find a nonzero entry in the working submatrix
    std::size_t pi = n, pj = dim;
    for (std::size_t i = r; i < n; ++i)
      for (std::size_t j = r; j < dim; ++j)
        if (a[i][j] != 0 &&
            (pi == n || std::llabs(a[i][j]) < std::llabs(a[pi][pj]))) {
          pi = i;
          pj = j;
        }
    if (pi == n) break;
    std::swap(a[r], a[pi]);
    col_swap(r, pj);
    for (;;) {
      bool touched = false;
      // clear row r to the right via column ops
      for (std::size_t j = r + 1; j < dim; ++j) {
        if (a[r][j] == 0) continue;
        std::int64_t q = a[r][j] / a[r][r];
        if (q != 0) col_axpy(j, r, q);
        if (a[r][j] != 0) {
          col_swap(r, j);
          touched = true;
        }
      }
      // clear column r below via row ops (U side, untracked)
      for (std::size_t i = r + 1; i < n; ++i) {
        if (a[i][r] == 0) continue;
        std::int64_t q = a[i][r] / a[r][r];
        if (q != 0) row_axpy(a[i], a[r], q);
        if (a[i][r] != 0) {
          std::swap(a[r], a[i]);
          touched = true;
        }
      }
      if (!touched) break;
    }
    if (a[r][r] < 0) col_negate(r);
    ++r;
  }

  LatticeModule m;
  m.d_ = d;
  IntMat sat_rows(w.begin(), w.begin() + static_cast<long>(r));
  m.basis_ = hermite_normal_form(std::move(sat_rows));
  m.finalize();
  return m;
}

std::vector<std::vector<int>> enumerate_ball(int d, double bound) {
  if (bound > kEnumerationCap)
    throw BudgetError("enumerate_ball: bound exceeds the desk-scale ceiling");
  std::vector<std::vector<int>> out;
  if (bound < 1.0) return out;
  const int b = static_cast<int>(std::floor(bound));
  std::vector<int> k(d, -b);
  const double b2 = bound * bound;
  for (;;) {
    double n2 = 0.0;
    bool zero = true;
    for (int x : k) {
      n2 += static_cast<double>(x) * x;
      zero = zero && x == 0;
    }
    if (!zero && n2 <= b2) {
      // canonical representative per +-pair: first nonzero positive
      int first = 0;
      for (int x : k)
        if (x != 0) {
          first = x;
          break;
        }
      if (first > 0) out.push_back(k);
    }
    int j = d - 1;
    while (j >= 0 && k[j] == b) {
      k[j] = -b;
      --j;
    }
    if (j < 0) break;
    ++k[j];
  }
  std::sort(out.begin(), out.end());
  return out;
}

GiorgilliResult giorgilli_bound(const std::vector<std::vector<double>>& us,
                                std::span<const double> w, double alpha,
                                double nbound) {
  if (us.empty()) throw ConfigError("giorgilli_bound: no u vectors");
  const std::size_t s = us.size();
  const std::size_t d = us[0].size();
  if (w.size() != d)
    throw ConfigError("giorgilli_bound: w dimension mismatch");
  for (const auto& u : us) {
    if (u.size() != d) throw ConfigError("giorgilli_bound: ragged u vectors");
    double n = 0.0;
    for (double x : u) n += x * x;
    if (std::sqrt(n) > nbound * (1.0 + 1e-12))
      throw ConfigError("giorgilli_bound: ||u_j|| exceeds nbound");
  }
  // Gram determinant -> volume; LU without pivog is fine for SPD-but-check.
  std::vector<std::vector<double>> g(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      double sum = 0.0;
      for (std::size_t c = 0; c < d; ++c) sum += us[i][c] * us[j][c];
      g[i][j] = sum;
    }
  double det = 1.0;
  for (std::size_t c = 0; c < s; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < s; ++i)
      if (std::fabs(g[i][c]) > std::fabs(g[piv][c])) piv = i;
    if (std::fabs(g[piv][c]) < 1e-12)
      throw ConfigError("giorgilli_bound: u vectors are linearly dependent");
    if (piv != c) {
      std::swap(g[piv], g[c]);
      det = -det;
    }
    det *= g[c][c];
    for (std::size_t i = c + 1; i < s; ++i) {
      double f = g[i][c] / g[c][c];
      for (std::size_t j = c; j < s; ++j) g[i][j] -= f * g[c][j];
    }
  }
  if (det <= 0.0)
    throw ConfigError("giorgilli_bound: u vectors are linearly dependent");
  const double vol = std::sqrt(det);

  // w must lie in span(u): check the projection residual.
  // Build the projector via normal equations on the u rows.
  double wn = 0.0;
  for (double x : w) wn += x * x;
  wn = std::sqrt(wn);
  {
    // least squares coefficients c = G^{-1} (U w), residual w - U^T c
    std::vector<double> rhs(s, 0.0);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t c = 0; c < d; ++c) rhs[i] += us[i][c] * w[c];
    // re-Gram (g was destroyed), small sizes so just rebuild and solve
    std::vector<std::vector<double>> gg(s, std::vector<double>(s + 1, 0.0));
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        double sum = 0.0;
        for (std::size_t c = 0; c < d; ++c) sum += us[i][c] * us[j][c];
        gg[i][j] = sum;
      }
      gg[i][s] = rhs[i];
    }
    for (std::size_t c = 0; c < s; ++c) {
      std::size_t piv = c;
      for (std::size_t i = c + 1; i < s; ++i)
        if (std::fabs(gg[i][c]) > std::fabs(gg[piv][c])) piv = i;
      std::swap(gg[piv], gg[c]);
      for (std::size_t i = 0; i < s; ++i) {
        if (i == c) continue;
        double f = gg[i][c] / gg[c][c];
        for (std::size_t j = c; j <= s; ++j) gg[i][j] -= f * gg[c][j];
      }
    }
    std::vector<double> coef(s);
    for (std::size_t i = 0; i < s; ++i) coef[i] = gg[i][s] / gg[i][i];
    double res2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      double fit = 0.0;
      for (std::size_t i = 0; i < s; ++i) fit += coef[i] * us[i][c];
      res2 += (w[c] - fit) * (w[c] - fit);
    }
    if (std::sqrt(res2) > 1e-9 * (1.0 + wn))
      throw ConfigError("giorgilli_bound: w lies outside span(u)");
  }
  for (std::size_t i = 0; i < s; ++i) {
    double ip = 0.0;
    for (std::size_t c = 0; c < d; ++c) ip += us[i][c] * w[c];
    if (std::fabs(ip) > alpha * (1.0 + 1e-12))
      throw ConfigError("giorgilli_bound: |<w,u_j>| exceeds alpha");
  }

  GiorgilliResult out;
  out.w_norm = wn;
  out.bound = static_cast<double>(s) * std::pow(nbound, static_cast<double>(s) - 1.0) *
              alpha / vol;
  out.holds = wn <= out.bound * (1.0 + 1e-12);
  return out;
}

}  // namespace nek::lat
