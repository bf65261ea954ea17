#pragma once

/**
 * @file intmat.hpp
 * Exact dense linear algebra over Z and Q: Smith normal form with both
 * transforms, integer kernels, lattice intersection, rational solves.
 *
 * Row convention throughout the library: module elements are row vectors,
 * relation matrices act by their row span, kernels are left kernels.
 */

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "specpos/errors.hpp"
#include "specpos/numbers.hpp"

namespace specpos {

using IMat = std::vector<std::vector<Int>>;
using RMat = std::vector<std::vector<Rat>>;

inline IMat imat_zero(std::size_t r, std::size_t c) {
    return IMat(r, std::vector<Int>(c, 0));
}

inline IMat imat_identity(std::size_t n) {
    IMat m = imat_zero(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline IMat imat_mul(const IMat& a, const IMat& b) {
    std::size_t r = a.size(), k = b.size(), c = k ? b[0].size() : 0;
    IMat out = imat_zero(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (a[i][j] == 0) continue;
            for (std::size_t l = 0; l < c; ++l) out[i][l] += a[i][j] * b[j][l];
        }
    return out;
}

inline std::vector<Int> ivec_mat(const std::vector<Int>& v, const IMat& m) {
    std::size_t c = m.empty() ? 0 : m[0].size();
    std::vector<Int> out(c, 0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == 0) continue;
        for (std::size_t j = 0; j < c; ++j) out[j] += v[i] * m[i][j];
    }
    return out;
}

/// Smith normal form: U*A*V = D with U, V unimodular and
/// D diagonal, d_1 | d_2 | ..., all d_i >= 0.
struct SnfResult {
    IMat u, v, d;
    std::vector<Int> diag; ///< min(rows,cols) entries of D
};

inline SnfResult smith_normal_form_int(const IMat& a) {
    std::size_t m = a.size(), n = m ? a[0].size() : 0;
    SnfResult res;
    res.u = imat_identity(m);
    res.v = imat_identity(n);
    res.d = a;
    IMat& d = res.d;

    auto swap_rows = [&](std::size_t i, std::size_t j) {
        std::swap(d[i], d[j]);
        std::swap(res.u[i], res.u[j]);
    };
    auto swap_cols = [&](std::size_t i, std::size_t j) {
        for (auto& row : d) std::swap(row[i], row[j]);
        for (auto& row : res.v) std::swap(row[i], row[j]);
    };
    auto add_row = [&](std::size_t dst, std::size_t src, const Int& f) {
        for (std::size_t c = 0; c < n; ++c) d[dst][c] += f * d[src][c];
        for (std::size_t c = 0; c < m; ++c) res.u[dst][c] += f * res.u[src][c];
    };
    auto add_col = [&](std::size_t dst, std::size_t src, const Int& f) {
        for (std::size_t r = 0; r < m; ++r) d[r][dst] += f * d[r][src];
        for (std::size_t r = 0; r < n; ++r) res.v[r][dst] += f * res.v[r][src];
    };
    auto negate_row = [&](std::size_t i) {
        for (auto& x : d[i]) x = -x;
        for (auto& x : res.u[i]) x = -x;
    };

    std::size_t t = 0;
    std::size_t bound = std::min(m, n);
    while (t < bound) {
        // locate a nonzero entry of minimal absolute value in the corner
        std::size_t pr = t, pc = t;
        bool found = false;
        Int best = 0;
        for (std::size_t i = t; i < m; ++i)
            for (std::size_t j = t; j < n; ++j) {
                if (d[i][j] == 0) continue;
                Int v = d[i][j] < 0 ? -d[i][j] : d[i][j];
                if (!found || v < best) { best = v; pr = i; pc = j; found = true; }
            }
        if (!found) break;
        if (pr != t) swap_rows(t, pr);
        if (pc != t) swap_cols(t, pc);

        bool clean = true;
        for (std::size_t i = t + 1; i < m; ++i)
            if (d[i][t] != 0) {
                add_row(i, t, -(d[i][t] / d[t][t]));
                if (d[i][t] != 0) clean = false;
            }
        for (std::size_t j = t + 1; j < n; ++j)
            if (d[t][j] != 0) {
                add_col(j, t, -(d[t][j] / d[t][t]));
                if (d[t][j] != 0) clean = false;
            }
        if (!clean) continue;

        // pivot divides everything below-right, or pull a bad row up
        bool divides = true;
        for (std::size_t i = t + 1; i < m && divides; ++i)
            for (std::size_t j = t + 1; j < n; ++j)
                if (d[i][j] % d[t][t] != 0) {
                    add_row(t, i, 1);
                    divides = false;
                    break;
                }
        if (!divides) continue;
        if (d[t][t] < 0) negate_row(t);
        ++t;
    }
    res.diag.reserve(bound);
    for (std::size_t i = 0; i < bound; ++i) res.diag.push_back(d[i][i]);
    return res;
}

/// Basis of the integer left kernel {x : x*A = 0}. The rows span the full
/// kernel lattice (saturated by construction).
inline IMat int_left_kernel(const IMat& a) {
    std::size_t m = a.size();
    SnfResult s = smith_normal_form_int(a);
    IMat basis;
    for (std::size_t j = 0; j < m; ++j) {
        bool free_coord = j >= s.diag.size() || s.diag[j] == 0;
        if (free_coord) basis.push_back(s.u[j]);
    }
    return basis;
}

/// Solve x*A = b over Z. Returns false when no integral solution exists.
inline bool int_solve_left(const IMat& a, const std::vector<Int>& b, std::vector<Int>& x) {
    std::size_t m = a.size(), n = m ? a[0].size() : 0;
    if (b.size() != n) throw input_error("int_solve_left: dimension mismatch");
    SnfResult s = smith_normal_form_int(a);
    std::vector<Int> bv = ivec_mat(b, s.v); // y * D = b * V
    std::vector<Int> y(m, 0);
    for (std::size_t j = 0; j < n; ++j) {
        Int dj = j < s.diag.size() ? s.diag[j] : Int(0);
        if (dj == 0) {
            if (bv[j] != 0) return false;
        } else {
            if (bv[j] % dj != 0) return false;
            if (j < m) y[j] = bv[j] / dj;
        }
    }
    x = ivec_mat(y, s.u);
    return true;
}

/// Generators for the intersection of two row lattices in Z^n.
inline IMat lattice_intersection(const IMat& g1, const IMat& g2) {
    std::size_t k1 = g1.size(), k2 = g2.size();
    std::size_t n = k1 ? g1[0].size() : (k2 ? g2[0].size() : 0);
    if (k1 == 0 || k2 == 0) return {};
    IMat stacked = g1;
    stacked.insert(stacked.end(), g2.begin(), g2.end());
    IMat ker = int_left_kernel(stacked);
    IMat out;
    for (const auto& row : ker) {
        std::vector<Int> v(n, 0);
        for (std::size_t i = 0; i < k1; ++i)
            for (std::size_t j = 0; j < n; ++j) v[j] += row[i] * g1[i][j];
        bool nonzero = false;
        for (const auto& c : v) if (c != 0) { nonzero = true; break; }
        if (nonzero) out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// rational matrices

inline RMat rmat_zero(std::size_t r, std::size_t c) {
    return RMat(r, std::vector<Rat>(c));
}

inline RMat rmat_identity(std::size_t n) {
    RMat m = rmat_zero(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = Rat(1);
    return m;
}

inline RMat rmat_mul(const RMat& a, const RMat& b) {
    std::size_t r = a.size(), k = b.size(), c = k ? b[0].size() : 0;
    RMat out = rmat_zero(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (a[i][j].is_zero()) continue;
            for (std::size_t l = 0; l < c; ++l) out[i][l] = out[i][l] + a[i][j] * b[j][l];
        }
    return out;
}

inline RMat rmat_from_int(const IMat& a) {
    RMat out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i].reserve(a[i].size());
        for (const auto& x : a[i]) out[i].push_back(Rat(x));
    }
    return out;
}

/// In-place reduced row echelon form; returns pivot columns.
inline RMat rmat_transpose(const RMat& a) {
    std::size_t r = a.size(), c = r ? a[0].size() : 0;
    RMat out(c, std::vector<Rat>(r));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j][i] = a[i][j];
    return out;
}

inline std::vector<std::size_t> rmat_rref(RMat& a) {
    std::size_t m = a.size(), n = m ? a[0].size() : 0;
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        std::size_t sel = row;
        while (sel < m && a[sel][col].is_zero()) ++sel;
        if (sel == m) continue;
        std::swap(a[row], a[sel]);
        Rat inv = Rat(1) / a[row][col];
        for (std::size_t j = col; j < n; ++j) a[row][j] = a[row][j] * inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row || a[i][col].is_zero()) continue;
            Rat f = a[i][col];
            for (std::size_t j = col; j < n; ++j) a[i][j] = a[i][j] - f * a[row][j];
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

inline std::size_t rmat_rank(RMat a) { return rmat_rref(a).size(); }

/// Basis of the rational left kernel {x : x*A = 0}.
inline RMat rmat_left_kernel(const RMat& a) {
    std::size_t m = a.size(), n = m ? a[0].size() : 0;
    // transpose, right kernel of A^T equals left kernel of A
    RMat t = rmat_zero(n, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) t[j][i] = a[i][j];
    RMat r = t;
    std::vector<std::size_t> pivots = rmat_rref(r);
    std::vector<bool> is_pivot(m, false);
    for (auto p : pivots) is_pivot[p] = true;
    RMat basis;
    for (std::size_t col = 0; col < m; ++col) {
        if (is_pivot[col]) continue;
        std::vector<Rat> x(m);
        x[col] = Rat(1);
        for (std::size_t pi = 0; pi < pivots.size(); ++pi)
            x[pivots[pi]] = -r[pi][col];
        basis.push_back(std::move(x));
    }
    return basis;
}

/// Solve x*A = b over Q (one solution). Returns false if inconsistent.
inline bool rmat_solve_left(const RMat& a, const std::vector<Rat>& b, std::vector<Rat>& x) {
    std::size_t m = a.size(), n = m ? a[0].size() : 0;
    if (b.size() != n) throw input_error("rmat_solve_left: dimension mismatch");
    // augmented transpose: solve A^T y = b^T
    RMat aug = rmat_zero(n, m + 1);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) aug[j][i] = a[i][j];
    for (std::size_t j = 0; j < n; ++j) aug[j][m] = b[j];
    std::vector<std::size_t> pivots = rmat_rref(aug);
    for (auto p : pivots)
        if (p == m) return false; // pivot in the rhs column
    x.assign(m, Rat(0));
    for (std::size_t pi = 0; pi < pivots.size(); ++pi) x[pivots[pi]] = aug[pi][m];
    return true;
}

/// Solve x*A = b where the solution entries may have any denominator
/// coprime to the listed primes. Substituting x = y*U against U*A*V = D
/// reduces to divisibility of b*V by the diagonal, checked prime by prime.
inline bool semilocal_solve_left(const IMat& a, const std::vector<Int>& b,
                                 const std::vector<Int>& primes, std::vector<Rat>& x) {
    std::size_t m = a.size(), n = m ? a[0].size() : b.size();
    if (b.size() != n) throw input_error("semilocal_solve_left: dimension mismatch");
    if (m == 0) {
        x.clear();
        return std::all_of(b.begin(), b.end(), [](const Int& e) { return e == 0; });
    }
    SnfResult s = smith_normal_form_int(a);
    std::vector<Int> c = ivec_mat(b, s.v);
    std::vector<Rat> y(m, Rat(0));
    for (std::size_t j = 0; j < n; ++j) {
        Int dj = j < s.diag.size() && j < m ? s.diag[j] : Int(0);
        if (dj == 0) {
            if (c[j] != 0) return false;
        } else {
            Rat q(c[j], dj);
            for (const auto& p : primes)
                if (valuation(q.den, p) != 0) return false;
            y[j] = q;
        }
    }
    x.assign(m, Rat(0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) x[j] = x[j] + y[i] * Rat(s.u[i][j]);
    return true;
}

inline bool rmat_inverse(const RMat& a, RMat& inv) {
    std::size_t n = a.size();
    if (n == 0) { inv = {}; return true; }
    if (a[0].size() != n) throw input_error("rmat_inverse: matrix not square");
    RMat aug = rmat_zero(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = a[i][j];
        aug[i][n + i] = Rat(1);
    }
    std::vector<std::size_t> pivots = rmat_rref(aug);
    if (pivots.size() < n || pivots[n - 1] != n - 1) return false;
    inv = rmat_zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
    return true;
}

/// Basis of the intersection of two row spans over Q.
inline RMat rsubspace_intersect(const RMat& a, const RMat& b) {
    if (a.empty() || b.empty()) return {};
    RMat stacked = a;
    for (const auto& row : b) {
        std::vector<Rat> neg(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) neg[j] = -row[j];
        stacked.push_back(std::move(neg));
    }
    RMat ker = rmat_left_kernel(stacked);
    RMat out;
    for (const auto& k : ker) {
        std::vector<Rat> v(a[0].size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) v[j] = v[j] + k[i] * a[i][j];
        bool nonzero = false;
        for (const auto& e : v)
            if (!e.is_zero()) { nonzero = true; break; }
        if (nonzero) out.push_back(std::move(v));
    }
    rmat_rref(out);
    while (!out.empty()) {
        bool zero = true;
        for (const auto& e : out.back())
            if (!e.is_zero()) { zero = false; break; }
        if (!zero) break;
        out.pop_back();
    }
    return out;
}

/// Reduce a generating set of a row lattice to a Z-basis. With U*G*V = D the
/// lattice is spanned by D*V^{-1}, whose nonzero rows form a basis.
inline IMat lattice_basis(const IMat& gens) {
    if (gens.empty()) return {};
    std::size_t n = gens[0].size();
    SnfResult s = smith_normal_form_int(gens);
    RMat vinv;
    if (!rmat_inverse(rmat_from_int(s.v), vinv))
        throw invariant_violation("lattice basis change is not invertible");
    IMat basis;
    for (std::size_t i = 0; i < s.diag.size(); ++i) {
        if (s.diag[i] == 0) continue;
        std::vector<Int> row(n);
        for (std::size_t j = 0; j < n; ++j) {
            Rat e = Rat(s.diag[i]) * vinv[i][j];
            if (!e.is_integer()) throw invariant_violation("lattice basis entry is not integral");
            row[j] = e.num;
        }
        basis.push_back(std::move(row));
    }
    return basis;
}

} // namespace specpos
