#pragma once

/**
 * @file numbers.hpp
 * Arbitrary-precision integers and canonical fractions.
 *
 * Fractions are kept in lowest terms with a positive denominator, so every
 * rational has exactly one representation and re-canonicalization is a no-op.
 */

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "specpos/errors.hpp"

namespace specpos {

using Int = boost::multiprecision::cpp_int;

inline Int int_gcd(Int a, Int b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) { Int t = a % b; a = b; b = t; }
    return a;
}

inline Int int_lcm(const Int& a, const Int& b) {
    if (a == 0 || b == 0) return 0;
    Int g = int_gcd(a, b);
    Int l = (a / g) * b;
    return l < 0 ? -l : l;
}

///// Extended gcd: returns g = gcd(a,b) and x, y with a*x + b*y = g.
inline Int ext_gcd(const Int& a, const Int& b, Int& x, Int& y) {
    if (b == 0) {
        x = a < 0 ? -1 : 1;
        y = 0;
        return a < 0 ? -a : a;
    }
    Int x1, y1;
    Int g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

/// p-adic valuation of n (n != 0).
inline int valuation(Int n, const Int& p) {
    if (n == 0) throw input_error("valuation of zero is undefined");
    if (n < 0) n = -n;
    int v = 0;
    while (n % p == 0) { n /= p; ++v; }
    return v;
}

/// Deterministic Miller-Rabin for |n| < 2^64; larger inputs are rejected
/// (desk-scale primes only).
inline bool is_prime(const Int& n) {
    if (n < 2) return false;
    if (n > Int(UINT64_MAX)) throw input_error("prime candidates above 2^64 are not supported");
    std::uint64_t m = static_cast<std::uint64_t>(n);
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (m == p) return true;
        if (m % p == 0) return false;
    }
    std::uint64_t d = m - 1;
    int r = 0;
    while ((d & 1) == 0) { d >>= 1; ++r; }
    auto mulmod = [](std::uint64_t a, std::uint64_t b, std::uint64_t mod) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % mod);
    };
    auto powmod = [&](std::uint64_t a, std::uint64_t e, std::uint64_t mod) {
        std::uint64_t res = 1;
        a %= mod;
        while (e) {
            if (e & 1) res = mulmod(res, a, mod);
            a = mulmod(a, a, mod);
            e >>= 1;
        }
        return res;
    };
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod(a, d, m);
        if (x == 1 || x == m - 1) continue;
        bool composite = true;
        for (int i = 0; i < r - 1; ++i) {
            x = mulmod(x, x, m);
            if (x == m - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

/// Splits |n| into (part supported on `primes`) * (coprime rest).
/// The first component is the "S-part": the largest divisor all of whose
/// prime factors lie in `primes`.
inline Int s_part(Int n, const std::vector<Int>& primes) {
    if (n == 0) return 0;
    if (n < 0) n = -n;
    Int part = 1;
    for (const Int& p : primes) {
        while (n % p == 0) { n /= p; part *= p; }
    }
    return part;
}

inline bool coprime_to_all(const Int& n, const std::vector<Int>& primes) {
    for (const Int& p : primes)
        if (n % p == 0) return false;
    return true;
}

/// Canonical fraction: lowest terms, positive denominator.
struct Rat {
    Int num{0};
    Int den{1};

    Rat() = default;
    Rat(Int n) : num(std::move(n)), den(1) {}
    Rat(Int n, Int d) : num(std::move(n)), den(std::move(d)) { normalize(); }

    void normalize() {
        if (den == 0) throw input_error("fraction with zero denominator");
        if (num == 0) { den = 1; return; }
        if (den < 0) { num = -num; den = -den; }
        Int g = int_gcd(num, den);
        num /= g;
        den /= g;
    }

    bool is_zero() const { return num == 0; }
    bool is_integer() const { return den == 1; }

    friend Rat operator+(const Rat& a, const Rat& b) { return Rat(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend Rat operator-(const Rat& a, const Rat& b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend Rat operator*(const Rat& a, const Rat& b) { return Rat(a.num * b.num, a.den * b.den); }
    friend Rat operator-(const Rat& a) { Rat r = a; r.num = -r.num; return r; }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num == 0) throw input_error("division by zero fraction");
        return Rat(a.num * b.den, a.den * b.num);
    }
    friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) { return a.num * b.den < b.num * a.den; }

    std::string str() const {
        std::string s = num.str();
        if (den != 1) s += "/" + den.str();
        return s;
    }
};

} // namespace specpos
