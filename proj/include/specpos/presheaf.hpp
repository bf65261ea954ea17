#pragma once

/**
 * @file presheaf.hpp
 * Presheaves of modules on the specialization poset, the specialization
 * functor S, presheaf morphisms, inverse limits, and the functor T with its
 * natural transformation T G -> G.
 *
 * Restrictions run from special points to generic ones: for x <= y the map
 * goes G(y) -> G(x), semilinear over the carrier map o. A restriction matrix
 * lists generator images; restrict_elem extends it to arbitrary elements.
 *
 * Limits are computed along two routes. Finite backend: depth-first family
 * enumeration along a linear extension (generic points first) with
 * constraint pruning, followed by a presentation over the base ring found by
 * greedy generator selection and a coefficient kernel scan. PID backend: the
 * poset is a star under (0), so the limit splits into per-prime torsion
 * blocks plus the compatible free part, an intersection of per-prime
 * lattices assembled in Smith coordinates.
 */

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "specpos/localization.hpp"
#include "specpos/spectrum.hpp"

namespace specpos {

struct Stalk {
    LocalRing at;
    Module mod; // over at->carrier
};

struct PresheafData {
    SpecPoset poset;
    std::vector<Stalk> stalks;                                 // aligned with poset.points
    std::map<std::pair<std::size_t, std::size_t>, EMat> restr; // key (x,y) with x < y
    bool structural = false;                                   // built by functor_S
    Module source;
    std::vector<LocalModule> source_loc;
};

using Presheaf = std::shared_ptr<const PresheafData>;

namespace detail {

inline const EMat* restr_of(const PresheafData& g, std::size_t x, std::size_t y) {
    auto it = g.restr.find({x, y});
    return it == g.restr.end() ? nullptr : &it->second;
}

/// Apply the restriction G(y) -> G(x), x < y, to an element given by
/// coordinates over the carrier at y.
inline EVec semilinear_apply(const PresheafData& g, std::size_t x, std::size_t y, const EVec& v) {
    const EMat* m = restr_of(g, x, y);
    if (!m) throw invariant_violation("missing restriction matrix");
    const RingHandle& rx = g.stalks[x].at->carrier;
    EVec acc = mzero(g.stalks[x].mod);
    for (std::size_t j = 0; j < v.size(); ++j) {
        RElem c = o_map(g.stalks[y].at, g.stalks[x].at, v[j]);
        acc = evec_add(rx, acc, evec_scale(rx, c, (*m)[j]));
    }
    return canon(g.stalks[x].mod, acc);
}

/// Shape checks, relation preservation, composite closure and the
/// functoriality triangles. Throws input_error on any failure.
inline void validate_presheaf(PresheafData& g) {
    std::size_t n = g.poset.points.size();
    if (g.stalks.size() != n) throw input_error("one stalk per point is required");
    for (std::size_t x = 0; x < n; ++x)
        if (!ring_eq(g.stalks[x].mod->ring, g.stalks[x].at->carrier))
            throw input_error("stalk module at " + g.poset.points[x].id +
                              " is not over its local carrier");
    for (const auto& [key, m] : g.restr) {
        auto [x, y] = key;
        if (x >= n || y >= n || x == y || !g.poset.leq[x][y])
            throw input_error("restriction key violates the specialization order");
        if (m.size() != g.stalks[y].mod->gens)
            throw input_error("restriction matrix row count differs from the source generators");
        for (const auto& row : m)
            if (row.size() != g.stalks[x].mod->gens)
                throw input_error("restriction matrix row length differs from the target generators");
    }
    // canonicalize rows so later comparisons are plain
    for (auto& [key, m] : g.restr)
        for (auto& row : m) row = canon(g.stalks[key.first].mod, row);
    // derive missing composites along x < y < z until stable
    bool grew = true;
    while (grew) {
        grew = false;
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t z = 0; z < n; ++z) {
                if (x == z || !g.poset.leq[x][z] || restr_of(g, x, z)) continue;
                for (std::size_t y = 0; y < n; ++y) {
                    if (y == x || y == z || !g.poset.leq[x][y] || !g.poset.leq[y][z]) continue;
                    if (!restr_of(g, x, y) || !restr_of(g, y, z)) continue;
                    const EMat yz = *restr_of(g, y, z);
                    EMat comp;
                    comp.reserve(yz.size());
                    for (const auto& row : yz) comp.push_back(semilinear_apply(g, x, y, row));
                    g.restr[{x, z}] = std::move(comp);
                    grew = true;
                    break;
                }
            }
    }
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            if (x != y && g.poset.leq[x][y] && !restr_of(g, x, y))
                throw input_error("no restriction matrix for " + g.poset.points[x].id + " < " +
                                  g.poset.points[y].id);
    // relations of the source stalk must die under every restriction
    for (const auto& [key, m] : g.restr) {
        auto [x, y] = key;
        for (const auto& rel : g.stalks[y].mod->relations)
            if (!elem_is_zero(g.stalks[x].mod, semilinear_apply(g, x, y, rel)))
                throw input_error("restriction from " + g.poset.points[y].id + " to " +
                                  g.poset.points[x].id + " does not preserve relations");
    }
    // triangles rho(x,y) o rho(y,z) = rho(x,z)
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (x == y || !g.poset.leq[x][y]) continue;
            for (std::size_t z = 0; z < n; ++z) {
                if (z == y || z == x || !g.poset.leq[y][z]) continue;
                const EMat& yz = *restr_of(g, y, z);
                const EMat& xz = *restr_of(g, x, z);
                for (std::size_t j = 0; j < yz.size(); ++j) {
                    EVec lhs = semilinear_apply(g, x, y, yz[j]);
                    if (!elem_eq(g.stalks[x].mod, lhs, xz[j]))
                        throw input_error("restrictions do not compose for " +
                                          g.poset.points[x].id + " < " + g.poset.points[y].id +
                                          " < " + g.poset.points[z].id);
                }
            }
        }
}

} // namespace detail

/// Restriction G(y) -> G(x) applied to an element; x == y is the identity.
inline EVec restrict_elem(const Presheaf& g, std::size_t x, std::size_t y, const EVec& v) {
    if (x == y) return canon(g->stalks[x].mod, v);
    if (!g->poset.leq[x][y])
        throw input_error("restriction needs " + g->poset.points[x].id + " below " +
                          g->poset.points[y].id);
    return detail::semilinear_apply(*g, x, y, v);
}

/// The specialization presheaf S(M): stalks are localizations, restrictions
/// are the localization maps. Functoriality is re-verified after assembly.
inline Presheaf functor_S(const SpecPoset& sp, const Module& m) {
    if (!ring_eq(sp.ring, m->ring)) throw input_error("module is not over the poset ring");
    auto data = std::make_shared<PresheafData>();
    data->poset = sp;
    data->structural = true;
    data->source = m;
    for (const auto& pt : sp.points) {
        LocalRing lr = localize_ring(sp.ring, pt);
        LocalModule lm = localize_module(m, lr);
        data->stalks.push_back({lr, lm->localized});
        data->source_loc.push_back(lm);
    }
    std::size_t n = sp.points.size();
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            if (x != y && sp.leq[x][y])
                data->restr[{x, y}] = localization_matrix(data->source_loc[y], data->source_loc[x]);
    detail::validate_presheaf(*data);
    return data;
}

/// Explicit presheaf from stalk presentations over the local carriers and
/// restriction matrices for comparable pairs; missing composites are filled
/// in and full functoriality is validated.
inline Presheaf make_explicit_presheaf(const SpecPoset& sp, std::vector<Module> stalk_mods,
                                       std::map<std::pair<std::size_t, std::size_t>, EMat> restr) {
    if (stalk_mods.size() != sp.points.size())
        throw input_error("one stalk module per point is required");
    auto data = std::make_shared<PresheafData>();
    data->poset = sp;
    data->restr = std::move(restr);
    for (std::size_t i = 0; i < sp.points.size(); ++i) {
        LocalRing lr = localize_ring(sp.ring, sp.points[i]);
        data->stalks.push_back({lr, std::move(stalk_mods[i])});
    }
    detail::validate_presheaf(*data);
    return data;
}

// ---------------------------------------------------------------------------
// morphisms

/// One component matrix per poset point, rows indexed by source generators.
struct PresheafMorphism {
    std::vector<EMat> comps;
};

namespace detail {

inline void require_same_poset(const Presheaf& g, const Presheaf& h) {
    if (!ring_eq(g->poset.ring, h->poset.ring) ||
        g->poset.points.size() != h->poset.points.size())
        throw input_error("presheaves live on different posets");
    for (std::size_t i = 0; i < g->poset.points.size(); ++i)
        if (g->poset.points[i].id != h->poset.points[i].id)
            throw input_error("presheaves live on different posets");
}

/// Commuting square at x <= y for components given at both points.
inline bool square_ok(const Presheaf& g, const Presheaf& h, std::size_t x, std::size_t y,
                      const EMat& comp_x, const EMat& comp_y) {
    const RingHandle& rx = g->stalks[x].at->carrier;
    for (std::size_t j = 0; j < g->stalks[y].mod->gens; ++j) {
        EVec gen = mzero(g->stalks[y].mod);
        gen[j] = rone(g->stalks[y].at->carrier);
        EVec lhs = apply_hom(h->stalks[x].mod, rx, restrict_elem(g, x, y, gen), comp_x);
        EVec rhs = restrict_elem(h, x, y, comp_y[j]);
        if (!elem_eq(h->stalks[x].mod, lhs, rhs)) return false;
    }
    return true;
}

} // namespace detail

/// All componentwise checks for a presheaf morphism: shapes, linearity over
/// each carrier, and every commuting square.
inline bool presheaf_morphism_ok(const Presheaf& g, const Presheaf& h,
                                 const std::vector<EMat>& comps) {
    detail::require_same_poset(g, h);
    std::size_t n = g->poset.points.size();
    if (comps.size() != n) return false;
    for (std::size_t x = 0; x < n; ++x) {
        if (comps[x].size() != g->stalks[x].mod->gens) return false;
        for (const auto& row : comps[x])
            if (row.size() != h->stalks[x].mod->gens) return false;
        if (!hom_respects_relations(g->stalks[x].mod, h->stalks[x].mod, comps[x])) return false;
    }
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            if (x != y && g->poset.leq[x][y] &&
                !detail::square_ok(g, h, x, y, comps[x], comps[y]))
                return false;
    return true;
}

/// S on morphisms: localize each generator image. The result is verified to
/// be a presheaf morphism.
inline PresheafMorphism functor_S_on_morphism(const Presheaf& sm, const Presheaf& sn,
                                              const EMat& hom) {
    if (!sm->structural || !sn->structural)
        throw input_error("functor_S_on_morphism needs structural presheaves");
    if (!hom_respects_relations(sm->source, sn->source, hom))
        throw input_error("matrix is not a module map on the sources");
    PresheafMorphism out;
    std::size_t n = sm->poset.points.size();
    for (std::size_t x = 0; x < n; ++x) {
        EMat comp;
        comp.reserve(hom.size());
        for (const auto& row : hom) comp.push_back(germ_of(sn->source_loc[x], row));
        out.comps.push_back(std::move(comp));
    }
    if (!presheaf_morphism_ok(sm, sn, out.comps))
        throw invariant_violation("localized morphism fails the presheaf squares");
    return out;
}

/// Linear extension of the poset indices that visits generic points first.
inline std::vector<std::size_t> generic_first_order(const SpecPoset& sp,
                                                    const std::vector<std::size_t>& members) {
    std::vector<std::size_t> order = members;
    auto below = [&](std::size_t i) {
        std::size_t c = 0;
        for (std::size_t j : members)
            if (j != i && sp.leq[j][i]) ++c;
        return c;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return below(a) < below(b); });
    return order;
}

/// Exhaustive product of stalk hom sets filtered by the commuting squares,
/// pruned along a generic-first linear extension.
inline std::vector<PresheafMorphism> enumerate_presheaf_morphisms(const Presheaf& g,
                                                                  const Presheaf& h) {
    detail::require_same_poset(g, h);
    std::size_t n = g->poset.points.size();
    std::vector<std::vector<EMat>> choices(n);
    Int product = 1;
    for (std::size_t x = 0; x < n; ++x) {
        choices[x] = hom_enumerate(g->stalks[x].mod, h->stalks[x].mod);
        product *= Int(choices[x].size());
    }
    if (product > Int(max_scan))
        throw unsupported_error("presheaf morphism search exceeds the scan budget");
    SubPoset whole = whole_poset(g->poset);
    std::vector<std::size_t> order = generic_first_order(g->poset, whole.members);
    std::vector<PresheafMorphism> out;
    std::vector<EMat> comps(n);
    std::vector<bool> assigned(n, false);
    auto dfs = [&](auto&& self, std::size_t depth) -> void {
        if (depth == n) {
            out.push_back({comps});
            return;
        }
        std::size_t x = order[depth];
        for (const EMat& cand : choices[x]) {
            comps[x] = cand;
            assigned[x] = true;
            bool ok = true;
            for (std::size_t y = 0; ok && y < n; ++y) {
                if (!assigned[y] || y == x) continue;
                if (g->poset.leq[x][y]) ok = detail::square_ok(g, h, x, y, comps[x], comps[y]);
                if (ok && g->poset.leq[y][x])
                    ok = detail::square_ok(g, h, y, x, comps[y], comps[x]);
            }
            if (ok) self(self, depth + 1);
            assigned[x] = false;
        }
    };
    dfs(dfs, 0);
    return out;
}

// ---------------------------------------------------------------------------
// inverse limits

/// A limit element is a compatible family, one stalk value per subposet
/// member. The limit is re-presented as a module over its natural ring: the
/// base ring on the finite backend, the semilocal ring at the surviving
/// primes (or the rationals) on the PID backend.
struct LimitData {
    Presheaf sheaf;
    SubPoset over;
    RingHandle ring;
    Module presented;
    std::vector<std::vector<EVec>> gen_families; // per presented generator
    // finite backend
    std::vector<std::vector<EVec>> families;
    std::map<std::vector<std::uint64_t>, EVec> family_coords;
    // PID backend, general star: the free part is (1/denom) times the row
    // lattice of theta, written in the free Smith coordinates at (0)
    IMat theta;
    Int denom = 1;
};

using LimitModule = std::shared_ptr<const LimitData>;

/// Representability probe: over the PID backend a star limit with two or
/// more special points needs injective free-part restrictions; when one
/// fails, the natural components at (0) and at the other specials are
/// provably not injective. bad_members lists those points.
struct LimitShape {
    bool representable = true;
    std::vector<std::size_t> bad_members; // poset point indices
};

namespace detail {

inline std::vector<std::uint64_t> family_key(const Presheaf& g, const SubPoset& over,
                                             const std::vector<EVec>& fam) {
    std::vector<std::uint64_t> key;
    key.reserve(fam.size());
    for (std::size_t s = 0; s < fam.size(); ++s)
        key.push_back(pack_coords(canon(g->stalks[over.members[s]].mod, fam[s])));
    return key;
}

inline std::vector<EVec> family_zero(const Presheaf& g, const SubPoset& over) {
    std::vector<EVec> fam;
    fam.reserve(over.members.size());
    for (std::size_t m : over.members) fam.push_back(mzero(g->stalks[m].mod));
    return fam;
}

inline std::vector<EVec> family_add(const Presheaf& g, const SubPoset& over,
                                    const std::vector<EVec>& a, const std::vector<EVec>& b) {
    std::vector<EVec> fam(a.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        const Stalk& st = g->stalks[over.members[s]];
        fam[s] = canon(st.mod, evec_add(st.at->carrier, a[s], b[s]));
    }
    return fam;
}

/// Scale a family by an element of the limit ring: through the localization
/// map on the finite backend, by the shared fraction on the PID backend.
inline std::vector<EVec> family_scale(const Presheaf& g, const SubPoset& over, const RElem& c,
                                      const std::vector<EVec>& fam) {
    std::vector<EVec> out(fam.size());
    for (std::size_t s = 0; s < fam.size(); ++s) {
        const Stalk& st = g->stalks[over.members[s]];
        RElem image = is_finite(g->poset.ring) ? loc_elem(st.at, c)
                                               : semilocal_elem(st.at->carrier, c.frac);
        out[s] = canon(st.mod, evec_scale(st.at->carrier, image, fam[s]));
    }
    return out;
}

inline bool family_compatible(const Presheaf& g, const SubPoset& over,
                              const std::vector<EVec>& fam) {
    for (std::size_t s = 0; s < over.members.size(); ++s)
        for (std::size_t t = 0; t < over.members.size(); ++t) {
            std::size_t x = over.members[s], y = over.members[t];
            if (x == y || !g->poset.leq[x][y]) continue;
            if (!elem_eq(g->stalks[x].mod, fam[s], restrict_elem(g, x, y, fam[t]))) return false;
        }
    return true;
}

} // namespace detail

inline LimitShape probe_limit_shape(const Presheaf& g, const SubPoset& over);
inline LimitModule inverse_limit(const Presheaf& g, const SubPoset& over);

/// Rebuild the family of a presented element from the generator families.
inline std::vector<EVec> limit_family(const LimitModule& lim, const EVec& coords) {
    if (coords.size() != lim->presented->gens)
        throw input_error("coordinate length differs from the limit presentation");
    std::vector<EVec> fam = detail::family_zero(lim->sheaf, lim->over);
    for (std::size_t j = 0; j < coords.size(); ++j) {
        auto scaled = detail::family_scale(lim->sheaf, lim->over, coords[j], lim->gen_families[j]);
        fam = detail::family_add(lim->sheaf, lim->over, fam, scaled);
    }
    return fam;
}

/// Presented coordinates of a compatible family.
inline EVec limit_coords(const LimitModule& lim, const std::vector<EVec>& fam);

struct TNatural {
    LimitModule lim;
    std::vector<LocalModule> tg; // T G at each member, aligned with over.members
    std::vector<EMat> natural;   // component T G(x) -> G(x)
};

inline TNatural functor_T(const Presheaf& g, const SubPoset& over);

} // namespace specpos

#include "specpos/presheaf_limit.hpp"
