#pragma once

/**
 * @file spectrum.hpp
 * Prime spectra as specialization posets, plus the poset topology used by
 * the cover machinery: closed subposets are unions of upsets, open ones are
 * their complements.
 *
 * Order convention: x <= y when prime(x) is contained in prime(y), that is,
 * y lies in the closure of {x}. Generic points are minimal. DOT edges point
 * from generic to special.
 */

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "specpos/errors.hpp"
#include "specpos/ring.hpp"

namespace specpos {

struct Point {
    Ideal prime;
    std::string id;
};

struct SpecPoset {
    RingHandle ring;
    std::vector<Point> points;          // sorted by id
    std::vector<std::vector<bool>> leq; // leq[i][j]: points[i] <= points[j]
};

/// Subposet as a sorted index set into parent.points; open_flag is set by
/// open_complement when the removed part is closed.
struct SubPoset {
    std::vector<std::size_t> members;
    bool open_flag = false;
};

inline std::size_t point_index(const SpecPoset& p, const std::string& id) {
    for (std::size_t i = 0; i < p.points.size(); ++i)
        if (p.points[i].id == id) return i;
    throw input_error("unknown point " + id);
}

inline bool sub_contains(const SubPoset& s, std::size_t i) {
    return std::binary_search(s.members.begin(), s.members.end(), i);
}

inline SubPoset whole_poset(const SpecPoset& p) {
    SubPoset s;
    for (std::size_t i = 0; i < p.points.size(); ++i) s.members.push_back(i);
    return s;
}

/// Every ideal of a finite table ring: breadth-first closure, one added
/// generator at a time, with deduplication.
inline std::vector<Ideal> enumerate_ideals(const RingHandle& r) {
    if (!is_finite(r)) throw input_error("enumerate_ideals needs a finite table ring");
    std::set<std::vector<std::uint16_t>> seen;
    std::vector<Ideal> out, work;
    Ideal zero = ideal_generated(r, {});
    seen.insert(zero.elems);
    out.push_back(zero);
    work.push_back(zero);
    while (!work.empty()) {
        Ideal cur = work.back();
        work.pop_back();
        for (std::size_t e = 0; e < r->n; ++e) {
            if (ideal_contains(r, cur, finite_elem(r, e))) continue;
            std::vector<RElem> gens;
            for (auto x : cur.elems) gens.push_back(finite_elem(r, x));
            gens.push_back(finite_elem(r, e));
            Ideal next = ideal_generated(r, gens);
            if (seen.insert(next.elems).second) {
                out.push_back(next);
                work.push_back(next);
                if (out.size() > static_cast<std::size_t>(max_scan / 1000))
                    throw unsupported_error("ideal lattice of " + r->desc + " is too large");
            }
        }
    }
    return out;
}

inline SpecPoset spectrum(const RingHandle& r) {
    SpecPoset p;
    p.ring = r;
    if (is_finite(r)) {
        for (const auto& i : enumerate_ideals(r))
            if (is_prime_ideal(r, i)) p.points.push_back({i, ideal_str(r, i)});
    } else {
        Ideal zero;
        p.points.push_back({zero, ideal_str(r, zero)});
        for (const auto& q : r->primes) {
            Ideal i;
            i.gen = q;
            p.points.push_back({i, ideal_str(r, i)});
        }
    }
    std::sort(p.points.begin(), p.points.end(),
              [](const Point& a, const Point& b) { return a.id < b.id; });
    std::size_t n = p.points.size();
    p.leq.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            p.leq[i][j] = ideal_subset(r, p.points[i].prime, p.points[j].prime);
    return p;
}

inline SubPoset upset(const SpecPoset& p, std::size_t x) {
    if (x >= p.points.size()) throw input_error("point index out of range");
    SubPoset s;
    for (std::size_t j = 0; j < p.points.size(); ++j)
        if (p.leq[x][j]) s.members.push_back(j);
    return s;
}

inline SubPoset downset(const SpecPoset& p, std::size_t x) {
    if (x >= p.points.size()) throw input_error("point index out of range");
    SubPoset s;
    for (std::size_t j = 0; j < p.points.size(); ++j)
        if (p.leq[j][x]) s.members.push_back(j);
    return s;
}

inline std::vector<std::size_t> minimal_members(const SpecPoset& p, const SubPoset& s) {
    std::vector<std::size_t> out;
    for (auto i : s.members) {
        bool minimal = true;
        for (auto j : s.members)
            if (j != i && p.leq[j][i]) { minimal = false; break; }
        if (minimal) out.push_back(i);
    }
    return out;
}

/// Closed means: equal to the union of the upsets of its minimal members.
/// The empty union is allowed, so the empty subposet is closed.
inline bool is_closed(const SpecPoset& p, const SubPoset& s) {
    std::set<std::size_t> un;
    for (auto m : minimal_members(p, s))
        for (auto j : upset(p, m).members) un.insert(j);
    std::set<std::size_t> have(s.members.begin(), s.members.end());
    return un == have;
}

inline SubPoset vanishing_locus(const SpecPoset& p, const RElem& f) {
    SubPoset s;
    for (std::size_t i = 0; i < p.points.size(); ++i)
        if (ideal_contains(p.ring, p.points[i].prime, f)) s.members.push_back(i);
    return s;
}

inline SubPoset open_complement(const SpecPoset& p, const SubPoset& z) {
    SubPoset s;
    for (std::size_t i = 0; i < p.points.size(); ++i)
        if (!sub_contains(z, i)) s.members.push_back(i);
    s.open_flag = is_closed(p, z);
    return s;
}

inline bool is_open_sub(const SpecPoset& p, const SubPoset& s) {
    SubPoset comp;
    for (std::size_t i = 0; i < p.points.size(); ++i)
        if (!sub_contains(s, i)) comp.members.push_back(i);
    return is_closed(p, comp);
}

inline bool is_open_cover(const SpecPoset& p, const std::vector<SubPoset>& parts) {
    std::set<std::size_t> un;
    for (const auto& part : parts) {
        if (!is_open_sub(p, part)) return false;
        un.insert(part.members.begin(), part.members.end());
    }
    return un.size() == p.points.size();
}

/// Covering relations x < y (nothing strictly between), generic side first.
inline std::vector<std::pair<std::size_t, std::size_t>> hasse_edges(const SpecPoset& p) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t n = p.points.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !p.leq[i][j]) continue;
            bool covering = true;
            for (std::size_t k = 0; k < n && covering; ++k)
                if (k != i && k != j && p.leq[i][k] && p.leq[k][j]) covering = false;
            if (covering) out.emplace_back(i, j);
        }
    return out;
}

} // namespace specpos
