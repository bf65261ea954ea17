#pragma once

/**
 * @file localization.hpp
 * Localization of rings and modules at prime points.
 *
 * On the finite backend the local ring is built from classes of pairs (a,s)
 * with s outside the prime, under (a,s) ~ (a',s') iff t(s'a - sa') = 0 for
 * some t outside the prime, and re-emitted as a first-class finite table
 * ring so all module machinery applies unchanged. Classes are ordered by
 * their least pair, which puts the zero class at index 0.
 *
 * On the PID backend localization is symbolic: at (q) the carrier is the
 * one-prime ring Z_(q), at (0) it is the rationals.
 */

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "specpos/errors.hpp"
#include "specpos/module.hpp"
#include "specpos/spectrum.hpp"

namespace specpos {

struct LocalRingData {
    RingHandle base;
    Point at;
    RingHandle carrier;
    // finite backend tables
    std::vector<std::uint16_t> pair_class; // (a*n + s) -> class, 0xffff when s is in the prime
    std::vector<std::pair<std::uint16_t, std::uint16_t>> class_rep; // least pair per class
    std::vector<std::uint16_t> elem_class; // a -> class of a/1
};

using LocalRing = std::shared_ptr<const LocalRingData>;

/// Raw germ equivalence on the finite backend: exists t outside the prime
/// with t*(s2*a1 - s1*a2) = 0.
inline bool germ_pairs_equivalent(const RingHandle& r, const Ideal& prime, const RElem& a1,
                                  const RElem& s1, const RElem& a2, const RElem& s2) {
    RElem d = rsub(r, rmul(r, s2, a1), rmul(r, s1, a2));
    for (std::size_t t = 0; t < r->n; ++t) {
        RElem te = finite_elem(r, t);
        if (ideal_contains(r, prime, te)) continue;
        if (is_zero(r, rmul(r, te, d))) return true;
    }
    return false;
}

inline LocalRing localize_ring(const RingHandle& base, const Point& at) {
    auto data = std::make_shared<LocalRingData>();
    data->base = base;
    data->at = at;
    if (!is_finite(base)) {
        if (!is_prime_ideal(base, at.prime)) throw input_error("localization point is not prime");
        data->carrier = at.prime.gen == 0 ? make_rationals()
                                          : construct_semilocal_int({at.prime.gen});
        return data;
    }
    if (!is_prime_ideal(base, at.prime)) throw input_error("localization point is not prime");
    std::size_t n = base->n;
    std::vector<bool> in_prime(n, false);
    for (auto e : at.prime.elems) in_prime[e] = true;

    std::vector<std::pair<std::uint16_t, std::uint16_t>> pairs;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t s = 0; s < n; ++s)
            if (!in_prime[s])
                pairs.emplace_back(static_cast<std::uint16_t>(a), static_cast<std::uint16_t>(s));
    if (static_cast<std::int64_t>(pairs.size()) * static_cast<std::int64_t>(pairs.size()) > max_scan)
        throw unsupported_error("localization pair table exceeds the scan budget");

    // union-find over the pair list
    std::vector<std::size_t> parent(pairs.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
        while (parent[i] != i) { parent[i] = parent[parent[i]]; i = parent[i]; }
        return i;
    };
    for (std::size_t i = 0; i < pairs.size(); ++i)
        for (std::size_t j = i + 1; j < pairs.size(); ++j) {
            if (find(i) == find(j)) continue;
            if (germ_pairs_equivalent(base, at.prime, finite_elem(base, pairs[i].first),
                                      finite_elem(base, pairs[i].second),
                                      finite_elem(base, pairs[j].first),
                                      finite_elem(base, pairs[j].second)))
                parent[find(i)] = find(j);
        }

    std::vector<std::pair<std::uint16_t, std::uint16_t>> least(pairs.size(),
                                                              {std::uint16_t(0xffff), 0});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::size_t root = find(i);
        least[root] = std::min(least[root], pairs[i]);
    }
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (find(i) == i) roots.push_back(i);
    std::sort(roots.begin(), roots.end(),
              [&](std::size_t a, std::size_t b) { return least[a] < least[b]; });
    std::vector<std::uint16_t> class_of_root(pairs.size());
    data->class_rep.resize(roots.size());
    for (std::size_t c = 0; c < roots.size(); ++c) {
        class_of_root[roots[c]] = static_cast<std::uint16_t>(c);
        data->class_rep[c] = least[roots[c]];
    }
    data->pair_class.assign(n * n, 0xffff);
    for (std::size_t i = 0; i < pairs.size(); ++i)
        data->pair_class[pairs[i].first * n + pairs[i].second] = class_of_root[find(i)];

    std::size_t cn = roots.size();
    std::vector<std::uint16_t> add(cn * cn), mul(cn * cn);
    for (std::size_t i = 0; i < cn; ++i) {
        auto [a, s] = data->class_rep[i];
        for (std::size_t j = 0; j < cn; ++j) {
            auto [a2, s2] = data->class_rep[j];
            RElem ea = finite_elem(base, a), es = finite_elem(base, s);
            RElem eb = finite_elem(base, a2), et = finite_elem(base, s2);
            RElem num = radd(base, rmul(base, ea, et), rmul(base, eb, es));
            RElem den = rmul(base, es, et);
            add[i * cn + j] = data->pair_class[num.idx * n + den.idx];
            RElem pnum = rmul(base, ea, eb);
            mul[i * cn + j] = data->pair_class[pnum.idx * n + den.idx];
        }
    }
    std::uint16_t one = data->pair_class[base->one * n + base->one];
    data->carrier = detail::make_finite(cn, std::move(add), std::move(mul), 0, one,
                                        base->desc + " at " + at.id);
    data->elem_class.resize(n);
    for (std::size_t a = 0; a < n; ++a)
        data->elem_class[a] = data->pair_class[a * n + base->one];
    return data;
}

/// Germ of a base ring element: the class of a/1.
inline RElem loc_elem(const LocalRing& lr, const RElem& a) {
    if (is_finite(lr->base)) return RElem{lr->elem_class[a.idx], {}};
    return semilocal_elem(lr->carrier, a.frac);
}

/// Class of the fraction a/s; s must lie outside the prime.
inline RElem loc_pair(const LocalRing& lr, const RElem& a, const RElem& s) {
    if (ideal_contains(lr->base, lr->at.prime, s))
        throw input_error("denominator lies in the prime at " + lr->at.id);
    if (is_finite(lr->base)) {
        std::uint16_t c = lr->pair_class[a.idx * lr->base->n + s.idx];
        return RElem{c, {}};
    }
    return semilocal_elem(lr->carrier, a.frac / s.frac);
}

/// The canonical map o: R_from -> R_to along prime(to) contained in
/// prime(from); on germs it keeps the representing fraction.
inline RElem o_map(const LocalRing& from, const LocalRing& to, const RElem& a) {
    if (!ring_eq(from->base, to->base)) throw input_error("o_map across different base rings");
    if (!ideal_subset(to->base, to->at.prime, from->at.prime))
        throw input_error("o_map needs " + to->at.id + " below " + from->at.id);
    if (is_finite(from->base)) {
        auto [num, den] = from->class_rep[a.idx];
        return RElem{to->pair_class[num * to->base->n + den], {}};
    }
    return semilocal_elem(to->carrier, a.frac);
}

struct LocalModuleData {
    Module base;
    LocalRing at;
    Module localized; // same presentation with entries pushed into the carrier
};

using LocalModule = std::shared_ptr<const LocalModuleData>;

inline LocalModule localize_module(const Module& m, const LocalRing& lr) {
    if (!ring_eq(m->ring, lr->base)) throw input_error("module and localization ring differ");
    EMat rel;
    rel.reserve(m->relations.size());
    for (const auto& row : m->relations) {
        EVec out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) out[j] = loc_elem(lr, row[j]);
        rel.push_back(std::move(out));
    }
    auto data = std::make_shared<LocalModuleData>();
    data->base = m;
    data->at = lr;
    data->localized = make_module(lr->carrier, m->gens, std::move(rel));
    return data;
}

/// Germ of a base module element: the class of (m, 1), canonical.
inline EVec germ_of(const LocalModule& lm, const EVec& base_elem) {
    EVec coords(base_elem.size());
    for (std::size_t j = 0; j < base_elem.size(); ++j)
        coords[j] = loc_elem(lm->at, base_elem[j]);
    return canon(lm->localized, coords);
}

/// Germ of m/s for a denominator outside the prime.
inline EVec germ_with_den(const LocalModule& lm, const EVec& num, const RElem& den) {
    RElem u = loc_pair(lm->at, rone(lm->at->base), den);
    EVec coords(num.size());
    for (std::size_t j = 0; j < num.size(); ++j)
        coords[j] = rmul(lm->at->carrier, u, loc_elem(lm->at, num[j]));
    return canon(lm->localized, coords);
}

/// Carry an element of M_from to M_to along the localization map
/// (prime(to) contained in prime(from)); semilinear over o_map.
inline EVec transport(const LocalModule& from, const LocalModule& to, const EVec& v) {
    if (from->base != to->base) throw input_error("transport needs one base module");
    EVec coords(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) coords[j] = o_map(from->at, to->at, v[j]);
    return canon(to->localized, coords);
}

/// Generator images of the localization map M_from -> M_to as a matrix row
/// per generator; together with o_map this determines the full map.
inline EMat localization_matrix(const LocalModule& from, const LocalModule& to) {
    if (from->base != to->base) throw input_error("localization_matrix needs one base module");
    std::size_t g = from->base->gens;
    EMat rows;
    rows.reserve(g);
    for (std::size_t j = 0; j < g; ++j) {
        EVec gen = evec_zero(to->at->carrier, g);
        gen[j] = rone(to->at->carrier);
        rows.push_back(canon(to->localized, gen));
    }
    return rows;
}

} // namespace specpos
