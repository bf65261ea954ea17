#pragma once

/**
 * @file ring.hpp
 * Two commutative ring backends behind one interface.
 *
 * FiniteTable: explicit addition and multiplication tables over at most 256
 * elements (tables are quadratic in the element count, and downstream
 * packing uses 8 bits per coordinate). Every constructor places zero at
 * index 0.
 *
 * SemiLocalInt: fractions a/b with b coprime to a fixed finite set S of
 * rational primes. A PID whose units are exactly the fractions with S-free
 * numerator. An empty S yields the rationals; that handle is internal and
 * only produced by make_rationals().
 */

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "specpos/errors.hpp"
#include "specpos/limits.hpp"
#include "specpos/numbers.hpp"

namespace specpos {

inline constexpr std::size_t finite_table_cap = 256;

enum class RingKind { finite_table, semilocal_int };

struct RingData {
    RingKind kind;
    std::string desc;

    // finite table backend
    std::size_t n = 0;
    std::vector<std::uint16_t> add, mul; // n*n row-major
    std::uint16_t zero = 0, one = 0;
    std::size_t poly_p = 0; // coefficient modulus when built as F_p[x]/(f)

    // semilocal backend; empty set means the rationals
    std::vector<Int> primes;
};

using RingHandle = std::shared_ptr<const RingData>;

inline bool is_finite(const RingHandle& r) { return r->kind == RingKind::finite_table; }

inline bool ring_eq(const RingHandle& a, const RingHandle& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind) return false;
    if (a->kind == RingKind::finite_table)
        return a->n == b->n && a->zero == b->zero && a->one == b->one &&
               a->add == b->add && a->mul == b->mul;
    return a->primes == b->primes;
}

/// One ring element; idx is used by the finite backend, frac by the
/// semilocal one. Operations take the owning ring explicitly.
struct RElem {
    std::uint16_t idx = 0;
    Rat frac;
};

inline bool req(const RingHandle& r, const RElem& a, const RElem& b) {
    return is_finite(r) ? a.idx == b.idx : a.frac == b.frac;
}

inline RElem rzero(const RingHandle& r) {
    return is_finite(r) ? RElem{r->zero, {}} : RElem{0, Rat(0)};
}

inline RElem rone(const RingHandle& r) {
    return is_finite(r) ? RElem{r->one, {}} : RElem{0, Rat(1)};
}

inline bool is_zero(const RingHandle& r, const RElem& a) { return req(r, a, rzero(r)); }
inline bool is_one(const RingHandle& r, const RElem& a) { return req(r, a, rone(r)); }

inline RElem finite_elem(const RingHandle& r, std::size_t idx) {
    if (idx >= r->n) throw input_error("element index out of range for " + r->desc);
    return RElem{static_cast<std::uint16_t>(idx), {}};
}

/// Semilocal element from a fraction; the denominator must avoid S.
inline RElem semilocal_elem(const RingHandle& r, const Rat& q) {
    if (!coprime_to_all(q.den, r->primes))
        throw input_error(q.str() + " is not an element of " + r->desc +
                          " (denominator meets the prime set)");
    return RElem{0, q};
}

inline RElem radd(const RingHandle& r, const RElem& a, const RElem& b) {
    if (is_finite(r)) return RElem{r->add[a.idx * r->n + b.idx], {}};
    return RElem{0, a.frac + b.frac};
}

inline RElem rmul(const RingHandle& r, const RElem& a, const RElem& b) {
    if (is_finite(r)) return RElem{r->mul[a.idx * r->n + b.idx], {}};
    return RElem{0, a.frac * b.frac};
}

inline RElem rneg(const RingHandle& r, const RElem& a) {
    if (!is_finite(r)) return RElem{0, -a.frac};
    for (std::size_t b = 0; b < r->n; ++b)
        if (r->add[a.idx * r->n + b] == r->zero)
            return RElem{static_cast<std::uint16_t>(b), {}};
    throw invariant_violation("no additive inverse in " + r->desc);
}

inline RElem rsub(const RingHandle& r, const RElem& a, const RElem& b) {
    return radd(r, a, rneg(r, b));
}

/// Canonical image of an integer, n times the ring identity.
inline RElem relem_from_int(const RingHandle& r, const Int& value) {
    if (!is_finite(r)) return RElem{0, Rat(value)};
    Int m = value < 0 ? -value : value;
    RElem acc = rzero(r), base = rone(r);
    while (m > 0) {
        if ((m & 1) != 0) acc = radd(r, acc, base);
        base = radd(r, base, base);
        m >>= 1;
    }
    return value < 0 ? rneg(r, acc) : acc;
}

inline bool is_unit(const RingHandle& r, const RElem& a) {
    if (is_finite(r)) {
        for (std::size_t b = 0; b < r->n; ++b)
            if (r->mul[a.idx * r->n + b] == r->one) return true;
        return false;
    }
    return !a.frac.is_zero() && s_part(a.frac.num, r->primes) == 1;
}

inline RElem rinv(const RingHandle& r, const RElem& a) {
    if (is_finite(r)) {
        for (std::size_t b = 0; b < r->n; ++b)
            if (r->mul[a.idx * r->n + b] == r->one)
                return RElem{static_cast<std::uint16_t>(b), {}};
        throw input_error("element is not a unit of " + r->desc);
    }
    if (!is_unit(r, a)) throw input_error(a.frac.str() + " is not a unit of " + r->desc);
    return RElem{0, Rat(1) / a.frac};
}

inline std::string elem_str(const RingHandle& r, const RElem& a) {
    return is_finite(r) ? std::to_string(a.idx) : a.frac.str();
}

// ---------------------------------------------------------------------------
// element vectors and matrices (rows are elements, maps act on the right)

using EVec = std::vector<RElem>;
using EMat = std::vector<EVec>;

inline EVec evec_zero(const RingHandle& r, std::size_t n) { return EVec(n, rzero(r)); }

inline EVec evec_add(const RingHandle& r, const EVec& a, const EVec& b) {
    EVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = radd(r, a[i], b[i]);
    return out;
}

inline EVec evec_scale(const RingHandle& r, const RElem& c, const EVec& v) {
    EVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = rmul(r, c, v[i]);
    return out;
}

inline bool evec_eq(const RingHandle& r, const EVec& a, const EVec& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!req(r, a[i], b[i])) return false;
    return true;
}

inline EVec evec_mat(const RingHandle& r, const EVec& v, const EMat& m) {
    std::size_t cols = m.empty() ? 0 : m[0].size();
    EVec out = evec_zero(r, cols);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j)
            out[j] = radd(r, out[j], rmul(r, v[i], m[i][j]));
    return out;
}

inline EMat emat_mul(const RingHandle& r, const EMat& a, const EMat& b) {
    EMat out;
    out.reserve(a.size());
    for (const auto& row : a) out.push_back(evec_mat(r, row, b));
    return out;
}

inline EMat emat_identity(const RingHandle& r, std::size_t n) {
    EMat m(n, evec_zero(r, n));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = rone(r);
    return m;
}

// ---------------------------------------------------------------------------
// ideals

/// FiniteTable ideals are explicit sorted index sets; SemiLocalInt ideals are
/// principal with a canonical generator: 0, or a positive product of primes
/// of S (every unit factor stripped).
struct Ideal {
    std::vector<std::uint16_t> elems;
    Int gen = 0;
};

inline bool ideal_eq(const Ideal& a, const Ideal& b) {
    return a.elems == b.elems && a.gen == b.gen;
}

inline bool ideal_contains(const RingHandle& r, const Ideal& i, const RElem& a) {
    if (is_finite(r))
        return std::find(i.elems.begin(), i.elems.end(), a.idx) != i.elems.end();
    if (i.gen == 0) return a.frac.is_zero();
    return a.frac.num % i.gen == 0;
}

inline bool ideal_subset(const RingHandle& r, const Ideal& a, const Ideal& b) {
    if (is_finite(r)) {
        for (auto e : a.elems)
            if (std::find(b.elems.begin(), b.elems.end(), e) == b.elems.end()) return false;
        return true;
    }
    if (a.gen == 0) return true;
    if (b.gen == 0) return false;
    return a.gen % b.gen == 0;
}

inline Ideal ideal_generated(const RingHandle& r, const std::vector<RElem>& gens) {
    if (is_finite(r)) {
        std::vector<bool> in(r->n, false);
        in[r->zero] = true;
        std::vector<std::uint16_t> work = {r->zero};
        auto insert = [&](std::uint16_t e) {
            if (!in[e]) { in[e] = true; work.push_back(e); }
        };
        for (const auto& g : gens) insert(g.idx);
        while (!work.empty()) {
            std::uint16_t a = work.back();
            work.pop_back();
            for (std::size_t b = 0; b < r->n; ++b) {
                if (in[b]) insert(r->add[a * r->n + b]);
                insert(r->mul[a * r->n + b]);
            }
        }
        Ideal out;
        for (std::size_t e = 0; e < r->n; ++e)
            if (in[e]) out.elems.push_back(static_cast<std::uint16_t>(e));
        return out;
    }
    Int g = 0;
    for (const auto& e : gens) g = int_gcd(g, e.frac.num);
    Ideal out;
    out.gen = g == 0 ? Int(0) : s_part(g, r->primes);
    return out;
}

/// Throws when the stored data violates the ideal closure laws.
inline void validate_ideal(const RingHandle& r, const Ideal& i) {
    if (is_finite(r)) {
        std::vector<bool> in(r->n, false);
        for (auto e : i.elems) {
            if (e >= r->n) throw input_error("ideal element out of range");
            in[e] = true;
        }
        if (!in[r->zero]) throw input_error("ideal misses zero");
        for (auto a : i.elems) {
            for (auto b : i.elems)
                if (!in[r->add[a * r->n + b]]) throw input_error("ideal not closed under addition");
            for (std::size_t b = 0; b < r->n; ++b)
                if (!in[r->mul[a * r->n + b]]) throw input_error("ideal not closed under ring multiplication");
        }
        return;
    }
    if (i.gen < 0 || (i.gen != 0 && s_part(i.gen, r->primes) != i.gen))
        throw input_error("semilocal ideal generator is not a canonical S-number");
}

inline bool is_prime_ideal(const RingHandle& r, const Ideal& i) {
    validate_ideal(r, i);
    if (is_finite(r)) {
        if (i.elems.size() == r->n) return false;
        std::vector<bool> in(r->n, false);
        for (auto e : i.elems) in[e] = true;
        for (std::size_t a = 0; a < r->n; ++a)
            for (std::size_t b = 0; b < r->n; ++b)
                if (in[r->mul[a * r->n + b]] && !in[a] && !in[b]) return false;
        return true;
    }
    if (i.gen == 0) return true;
    for (const auto& p : r->primes)
        if (i.gen == p) return true;
    return false;
}

inline std::string ideal_str(const RingHandle& r, const Ideal& i) {
    if (is_finite(r)) {
        std::string s = "{";
        for (std::size_t k = 0; k < i.elems.size(); ++k) {
            if (k) s += ",";
            s += std::to_string(i.elems[k]);
        }
        return s + "}";
    }
    return "(" + i.gen.str() + ")";
}

// ---------------------------------------------------------------------------
// constructors

namespace detail {

inline std::shared_ptr<RingData> make_finite(std::size_t n, std::vector<std::uint16_t> add,
                                             std::vector<std::uint16_t> mul, std::uint16_t zero,
                                             std::uint16_t one, std::string desc) {
    if (n > finite_table_cap)
        throw unsupported_error(desc + " has " + std::to_string(n) + " elements, cap is " +
                                std::to_string(finite_table_cap));
    check_carrier(static_cast<std::int64_t>(n), desc.c_str());
    auto data = std::make_shared<RingData>();
    data->kind = RingKind::finite_table;
    data->n = n;
    data->add = std::move(add);
    data->mul = std::move(mul);
    data->zero = zero;
    data->one = one;
    data->desc = std::move(desc);
    return data;
}

} // namespace detail

inline RingHandle construct_zmod(const Int& n) {
    if (n < 2) throw input_error("zmod requires n >= 2");
    if (n > Int(finite_table_cap))
        throw unsupported_error("zmod(" + n.str() + ") exceeds the finite table cap");
    std::size_t m = static_cast<std::size_t>(n);
    std::vector<std::uint16_t> add(m * m), mul(m * m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            add[a * m + b] = static_cast<std::uint16_t>((a + b) % m);
            mul[a * m + b] = static_cast<std::uint16_t>((a * b) % m);
        }
    return detail::make_finite(m, std::move(add), std::move(mul), 0, 1 % m == 0 ? 0 : 1,
                               "Z/" + n.str());
}

/// F_p[x]/(f) with f monic of degree d >= 1; the coefficient tuple
/// (c_0,...,c_{d-1}) sits at index sum c_i * p^i.
inline RingHandle construct_poly_quotient(const Int& p, std::vector<Int> coeffs) {
    if (!is_prime(p)) throw input_error("poly_quotient requires a prime p");
    for (auto& c : coeffs) { c %= p; if (c < 0) c += p; }
    if (coeffs.size() < 2) throw input_error("poly_quotient modulus must have degree >= 1");
    if (coeffs.back() != 1) throw input_error("poly_quotient modulus must be monic mod p");
    std::size_t d = coeffs.size() - 1;
    std::size_t pp = static_cast<std::size_t>(p);

    Int size = 1;
    for (std::size_t i = 0; i < d; ++i) {
        size *= p;
        if (size > Int(finite_table_cap))
            throw unsupported_error("poly_quotient carrier exceeds the finite table cap");
    }
    std::size_t n = static_cast<std::size_t>(size);

    auto decode = [&](std::size_t idx) {
        std::vector<std::size_t> c(d);
        for (std::size_t i = 0; i < d; ++i) { c[i] = idx % pp; idx /= pp; }
        return c;
    };
    auto encode = [&](const std::vector<std::size_t>& c) {
        std::size_t idx = 0;
        for (std::size_t i = d; i-- > 0;) idx = idx * pp + c[i];
        return static_cast<std::uint16_t>(idx);
    };
    // reduction of x^d: x^d = -(c_0 + c_1 x + ... + c_{d-1} x^{d-1})
    std::vector<std::size_t> top(d);
    for (std::size_t i = 0; i < d; ++i)
        top[i] = static_cast<std::size_t>((p - coeffs[i]) % p);

    std::vector<std::uint16_t> add(n * n), mul(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        auto ca = decode(a);
        for (std::size_t b = 0; b < n; ++b) {
            auto cb = decode(b);
            std::vector<std::size_t> s(d);
            for (std::size_t i = 0; i < d; ++i) s[i] = (ca[i] + cb[i]) % pp;
            add[a * n + b] = encode(s);

            std::vector<std::size_t> prod(2 * d - 1, 0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    prod[i + j] = (prod[i + j] + ca[i] * cb[j]) % pp;
            for (std::size_t k = 2 * d - 2; k >= d; --k) {
                std::size_t c = prod[k];
                if (c == 0) continue;
                prod[k] = 0;
                for (std::size_t i = 0; i < d; ++i)
                    prod[k - d + i] = (prod[k - d + i] + c * top[i]) % pp;
            }
            prod.resize(d);
            mul[a * n + b] = encode(prod);
        }
    }
    std::string desc = "F_" + p.str() + "[x]/(";
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (i) desc += ",";
        desc += coeffs[i].str();
    }
    desc += ")";
    auto data = detail::make_finite(n, std::move(add), std::move(mul), 0, 1, desc);
    data->poly_p = pp;
    return data;
}

/// Product of finite rings; the last factor is the least significant
/// mixed-radix digit of the element index.
inline RingHandle construct_product(const std::vector<RingHandle>& factors) {
    if (factors.size() < 2) throw input_error("product requires at least 2 factors");
    for (const auto& f : factors)
        if (!is_finite(f)) throw input_error("product factors must be finite table rings");
    Int size = 1;
    for (const auto& f : factors) {
        size *= Int(f->n);
        if (size > Int(finite_table_cap))
            throw unsupported_error("product carrier exceeds the finite table cap");
    }
    std::size_t n = static_cast<std::size_t>(size);
    std::size_t k = factors.size();

    auto decode = [&](std::size_t idx) {
        std::vector<std::size_t> c(k);
        for (std::size_t i = k; i-- > 0;) { c[i] = idx % factors[i]->n; idx /= factors[i]->n; }
        return c;
    };
    auto encode = [&](const std::vector<std::size_t>& c) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < k; ++i) idx = idx * factors[i]->n + c[i];
        return static_cast<std::uint16_t>(idx);
    };

    std::vector<std::uint16_t> add(n * n), mul(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        auto ca = decode(a);
        for (std::size_t b = 0; b < n; ++b) {
            auto cb = decode(b);
            std::vector<std::size_t> s(k), pr(k);
            for (std::size_t i = 0; i < k; ++i) {
                const auto& f = factors[i];
                s[i] = f->add[ca[i] * f->n + cb[i]];
                pr[i] = f->mul[ca[i] * f->n + cb[i]];
            }
            add[a * n + b] = encode(s);
            mul[a * n + b] = encode(pr);
        }
    }
    std::vector<std::size_t> zeros(k), ones(k);
    for (std::size_t i = 0; i < k; ++i) { zeros[i] = factors[i]->zero; ones[i] = factors[i]->one; }
    std::string desc;
    for (std::size_t i = 0; i < k; ++i) {
        if (i) desc += " x ";
        desc += factors[i]->desc;
    }
    return detail::make_finite(n, std::move(add), std::move(mul), encode(zeros), encode(ones),
                               desc);
}

inline RingHandle construct_semilocal_int(std::vector<Int> primes) {
    if (primes.empty()) throw input_error("semilocal_int requires a nonempty prime set");
    std::sort(primes.begin(), primes.end());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    for (const auto& p : primes)
        if (!is_prime(p)) throw input_error(p.str() + " is not prime");
    auto data = std::make_shared<RingData>();
    data->kind = RingKind::semilocal_int;
    data->primes = std::move(primes);
    std::string desc = "Z_(";
    for (std::size_t i = 0; i < data->primes.size(); ++i) {
        if (i) desc += ",";
        desc += data->primes[i].str();
    }
    data->desc = desc + ")";
    return data;
}

/// The rationals, as the semilocal backend with an empty prime set.
inline RingHandle make_rationals() {
    auto data = std::make_shared<RingData>();
    data->kind = RingKind::semilocal_int;
    data->desc = "Q";
    return data;
}

inline bool is_rationals(const RingHandle& r) {
    return r->kind == RingKind::semilocal_int && r->primes.empty();
}

/// Exhaustive ring-axiom check for finite table rings (all triples).
inline void check_ring_axioms(const RingHandle& r) {
    if (!is_finite(r)) return;
    std::size_t n = r->n;
    auto A = [&](std::size_t a, std::size_t b) { return r->add[a * n + b]; };
    auto M = [&](std::size_t a, std::size_t b) { return r->mul[a * n + b]; };
    for (std::size_t a = 0; a < n; ++a) {
        if (A(a, r->zero) != a) throw invariant_violation("additive identity fails in " + r->desc);
        if (M(a, r->one) != a) throw invariant_violation("multiplicative identity fails in " + r->desc);
        bool has_neg = false;
        for (std::size_t b = 0; b < n && !has_neg; ++b) has_neg = A(a, b) == r->zero;
        if (!has_neg) throw invariant_violation("missing additive inverse in " + r->desc);
        for (std::size_t b = 0; b < n; ++b) {
            if (A(a, b) != A(b, a)) throw invariant_violation("addition not commutative in " + r->desc);
            if (M(a, b) != M(b, a)) throw invariant_violation("multiplication not commutative in " + r->desc);
            for (std::size_t c = 0; c < n; ++c) {
                if (A(A(a, b), c) != A(a, A(b, c)))
                    throw invariant_violation("addition not associative in " + r->desc);
                if (M(M(a, b), c) != M(a, M(b, c)))
                    throw invariant_violation("multiplication not associative in " + r->desc);
                if (M(a, A(b, c)) != A(M(a, b), M(a, c)))
                    throw invariant_violation("distributivity fails in " + r->desc);
            }
        }
    }
}

} // namespace specpos
