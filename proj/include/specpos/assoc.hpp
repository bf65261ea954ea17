#pragma once

/**
 * @file assoc.hpp
 * Associated primes, support, and the diagonal embedding of a module into
 * the product of its localizations at associated points.
 *
 * A prime p is associated to M when p = Ann(m) for some m; that annihilator
 * form is the primary definition here, witnesses included. The finite
 * backend finds them by scanning elements; the PID backend reads them off
 * the Smith moduli.
 */

#include <algorithm>
#include <vector>

#include "specpos/localization.hpp"
#include "specpos/module.hpp"
#include "specpos/spectrum.hpp"

namespace specpos {

struct AssSet {
    std::vector<std::size_t> points; // ascending indices into the spectrum
    std::vector<EVec> witnesses;     // Ann(witness) = prime, aligned with points
};

inline AssSet associated_primes(const SpecPoset& sp, const Module& m) {
    AssSet out;
    const RingHandle& r = m->ring;
    if (!ring_eq(sp.ring, r)) throw input_error("spectrum and module rings differ");
    if (is_finite(r)) {
        std::vector<std::pair<std::size_t, EVec>> found;
        for (const auto& e : elements(m)) {
            Ideal ann = annihilator(m, e);
            if (!is_prime_ideal(r, ann)) continue;
            std::size_t idx = point_index(sp, ideal_str(r, ann));
            bool seen = false;
            for (const auto& [p, w] : found)
                if (p == idx) { seen = true; break; }
            if (!seen) found.emplace_back(idx, e);
        }
        std::sort(found.begin(), found.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [p, w] : found) {
            out.points.push_back(p);
            out.witnesses.push_back(std::move(w));
        }
    } else {
        const SmithForm& s = m->smith;
        std::vector<std::pair<std::size_t, EVec>> found;
        if (s.free_rank > 0) {
            std::size_t coord = 0;
            while (s.moduli[coord] != 0) ++coord;
            std::vector<Rat> y(m->gens);
            y[coord] = Rat(1);
            std::vector<Rat> back = rvec_imat(y, s.vinv);
            EVec w(m->gens);
            for (std::size_t j = 0; j < m->gens; ++j) w[j] = RElem{0, back[j]};
            found.emplace_back(point_index(sp, "(0)"), std::move(w));
        }
        for (const auto& q : r->primes) {
            std::size_t coord = m->gens;
            for (std::size_t i = 0; i < m->gens; ++i)
                if (s.moduli[i] > 1 && s.moduli[i] % q == 0) { coord = i; break; }
            if (coord == m->gens) continue;
            std::vector<Rat> y(m->gens);
            y[coord] = Rat(s.moduli[coord] / q);
            std::vector<Rat> back = rvec_imat(y, s.vinv);
            EVec w(m->gens);
            for (std::size_t j = 0; j < m->gens; ++j) w[j] = RElem{0, back[j]};
            found.emplace_back(point_index(sp, "(" + q.str() + ")"), std::move(w));
        }
        std::sort(found.begin(), found.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [p, w] : found) {
            out.points.push_back(p);
            out.witnesses.push_back(std::move(w));
        }
    }
    for (std::size_t k = 0; k < out.points.size(); ++k) {
        Ideal ann = annihilator(m, out.witnesses[k]);
        if (!ideal_eq(ann, sp.points[out.points[k]].prime))
            throw invariant_violation("associated-prime witness fails verification");
    }
    return out;
}

/// Points with nonzero localization, by actually localizing.
inline std::vector<std::size_t> support(const SpecPoset& sp, const Module& m) {
    std::vector<std::size_t> out;
    for (std::size_t x = 0; x < sp.points.size(); ++x) {
        auto local = localize_module(m, localize_ring(sp.ring, sp.points[x]));
        if (element_count(local->localized) != std::optional<Int>(Int(1))) out.push_back(x);
    }
    return out;
}

/// Associated points surviving localization at x: members of Ass(M) below x.
inline std::vector<std::size_t> ass_after_localization(const SpecPoset& sp, const Module& m,
                                                       std::size_t x) {
    std::vector<std::size_t> out;
    for (auto y : associated_primes(sp, m).points)
        if (sp.leq[y][x]) out.push_back(y);
    return out;
}

/// The embedding m -> (germ at p)_{p in Ass(M)}; construction verifies
/// injectivity and refuses to hand back a map that is not injective.
struct NuMap {
    Module source;
    AssSet ass;
    std::vector<LocalModule> locals; // aligned with ass.points
};

inline std::vector<EVec> nu_apply(const NuMap& nu, const EVec& elem) {
    std::vector<EVec> out;
    out.reserve(nu.locals.size());
    for (const auto& lm : nu.locals) out.push_back(germ_of(lm, elem));
    return out;
}

inline NuMap nu_map(const SpecPoset& sp, const Module& m) {
    NuMap nu;
    nu.source = m;
    nu.ass = associated_primes(sp, m);
    for (auto p : nu.ass.points)
        nu.locals.push_back(localize_module(m, localize_ring(sp.ring, sp.points[p])));
    const RingHandle& r = m->ring;
    if (is_finite(r)) {
        for (const auto& e : elements(m)) {
            if (elem_is_zero(m, e)) continue;
            bool all_zero = true;
            for (std::size_t k = 0; k < nu.locals.size() && all_zero; ++k)
                if (!evec_eq(nu.locals[k]->at->carrier, germ_of(nu.locals[k], e),
                             mzero(nu.locals[k]->localized)))
                    all_zero = false;
            if (all_zero)
                throw invariant_violation("nu has a nonzero kernel element in " + r->desc);
        }
        return nu;
    }
    // Per Smith coordinate: each invariant factor must be built entirely
    // from primes that are associated, and a free part forces (0) in.
    const SmithForm& s = m->smith;
    std::vector<Int> ass_primes;
    bool has_zero = false;
    for (auto p : nu.ass.points) {
        const Int& g = sp.points[p].prime.gen;
        if (g == 0) has_zero = true;
        else ass_primes.push_back(g);
    }
    if (s.free_rank > 0 && !has_zero)
        throw invariant_violation("free part without (0) among associated points");
    for (const auto& d : s.moduli) {
        if (d == 0 || d == 1) continue;
        Int rem = d;
        for (const auto& q : ass_primes)
            while (rem % q == 0) rem /= q;
        if (rem != 1)
            throw invariant_violation("invariant factor " + d.str() +
                                      " has a prime outside the associated set");
    }
    return nu;
}

} // namespace specpos
