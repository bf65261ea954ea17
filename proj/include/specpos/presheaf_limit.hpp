#pragma once

/**
 * @file presheaf_limit.hpp
 * Out-of-line half of presheaf.hpp: inverse limits and the functor T.
 * Include presheaf.hpp, not this file.
 */

#include "specpos/presheaf.hpp"

namespace specpos {

namespace detail {

inline LimitModule finite_limit(const Presheaf& g, const SubPoset& over) {
    const RingHandle& base = g->poset.ring;
    std::size_t k = over.members.size();
    std::vector<std::vector<EVec>> choices(k);
    Int product = 1;
    for (std::size_t s = 0; s < k; ++s) {
        choices[s] = elements(g->stalks[over.members[s]].mod);
        product *= Int(choices[s].size());
    }
    if (product > Int(max_scan))
        throw unsupported_error("family enumeration exceeds the scan budget");
    std::vector<std::size_t> order = generic_first_order(g->poset, over.members);
    std::vector<std::size_t> slot_of(g->poset.points.size(), ~std::size_t(0));
    for (std::size_t s = 0; s < k; ++s) slot_of[over.members[s]] = s;

    auto data = std::make_shared<LimitData>();
    data->sheaf = g;
    data->over = over;
    data->ring = base;

    std::vector<EVec> fam(k);
    std::vector<bool> have(k, false);
    auto dfs = [&](auto&& self, std::size_t depth) -> void {
        if (depth == k) {
            data->families.push_back(fam);
            return;
        }
        std::size_t s = slot_of[order[depth]];
        std::size_t x = over.members[s];
        for (const EVec& cand : choices[s]) {
            fam[s] = cand;
            have[s] = true;
            bool ok = true;
            for (std::size_t t = 0; ok && t < k; ++t) {
                if (!have[t] || t == s) continue;
                std::size_t y = over.members[t];
                if (g->poset.leq[x][y])
                    ok = elem_eq(g->stalks[x].mod, fam[s], restrict_elem(g, x, y, fam[t]));
                if (ok && g->poset.leq[y][x])
                    ok = elem_eq(g->stalks[y].mod, fam[t], restrict_elem(g, y, x, fam[s]));
            }
            if (ok) self(self, depth + 1);
            have[s] = false;
        }
    };
    dfs(dfs, 0);

    // present over the base ring: greedy generators under the germ action
    auto key_of = [&](const std::vector<EVec>& f) { return family_key(g, over, f); };
    std::map<std::vector<std::uint64_t>, std::vector<EVec>> span;
    std::vector<std::vector<EVec>> multiples;
    span.emplace(key_of(family_zero(g, over)), family_zero(g, over));
    auto close = [&]() {
        std::vector<std::vector<EVec>> work;
        work.reserve(span.size());
        for (const auto& kv : span) work.push_back(kv.second);
        while (!work.empty()) {
            std::vector<EVec> cur = work.back();
            work.pop_back();
            for (const auto& m : multiples) {
                std::vector<EVec> sum = family_add(g, over, cur, m);
                if (span.emplace(key_of(sum), sum).second) {
                    if (span.size() > static_cast<std::size_t>(max_scan))
                        throw unsupported_error("limit span exceeds the scan budget");
                    work.push_back(std::move(sum));
                }
            }
        }
    };
    for (const auto& f : data->families) {
        if (span.count(key_of(f))) continue;
        data->gen_families.push_back(f);
        if (data->gen_families.size() > finite_gen_cap)
            throw unsupported_error("limit needs more generators than the packing cap");
        for (std::size_t e = 0; e < base->n; ++e)
            multiples.push_back(family_scale(g, over, finite_elem(base, e), f));
        close();
    }
    if (span.size() != data->families.size())
        throw invariant_violation("greedy span failed to exhaust the limit families");

    std::size_t gcount = data->gen_families.size();
    Int tuples = 1;
    for (std::size_t i = 0; i < gcount; ++i) tuples *= Int(base->n);
    if (tuples > Int(max_scan))
        throw unsupported_error("limit relation scan exceeds the scan budget");
    auto combine = [&](const EVec& c) {
        std::vector<EVec> acc = family_zero(g, over);
        for (std::size_t i = 0; i < gcount; ++i)
            acc = family_add(g, over, acc,
                             family_scale(g, over, c[i], data->gen_families[i]));
        return acc;
    };
    EMat rel;
    std::size_t count = static_cast<std::size_t>(tuples);
    for (std::size_t tup = 0; tup < count; ++tup) {
        std::size_t rest = tup;
        EVec c(gcount);
        for (std::size_t i = gcount; i-- > 0;) {
            c[i] = finite_elem(base, rest % base->n);
            rest /= base->n;
        }
        std::vector<EVec> acc = combine(c);
        bool zero = true;
        for (std::size_t s = 0; zero && s < k; ++s)
            zero = elem_is_zero(g->stalks[over.members[s]].mod, acc[s]);
        if (zero) rel.push_back(std::move(c));
    }
    data->presented = make_module(base, gcount, std::move(rel));

    for (const auto& e : elements(data->presented)) {
        auto kk = key_of(combine(e));
        if (!data->family_coords.emplace(kk, e).second)
            throw invariant_violation("limit presentation identifies two distinct families");
    }
    if (data->family_coords.size() != data->families.size())
        throw invariant_violation("limit presentation misses families");
    return data;
}

struct StarView {
    std::size_t zero_slot = 0;
    std::vector<std::size_t> special_slots;
    std::vector<Int> primes; // aligned with special_slots
};

inline StarView star_view(const Presheaf& g, const SubPoset& over) {
    StarView v;
    bool found = false;
    for (std::size_t s = 0; s < over.members.size(); ++s) {
        const Point& pt = g->poset.points[over.members[s]];
        if (pt.prime.gen == 0) {
            v.zero_slot = s;
            found = true;
        } else {
            v.special_slots.push_back(s);
            v.primes.push_back(pt.prime.gen);
        }
    }
    if (!found)
        throw unsupported_error("inverse limit over a subposet without the generic point");
    return v;
}

inline std::vector<std::size_t> free_positions(const SmithForm& s) {
    std::vector<std::size_t> pos;
    for (std::size_t j = 0; j < s.moduli.size(); ++j)
        if (s.moduli[j] == 0) pos.push_back(j);
    return pos;
}

/// Free-part restriction in Smith coordinates: row i is the image of the
/// i-th free basis element of the stalk at the special point, written in the
/// free coordinates of the stalk at (0).
inline RMat free_restriction(const Presheaf& g, std::size_t zero_pt, std::size_t special_pt) {
    const Module& m0 = g->stalks[zero_pt].mod;
    const Module& mp = g->stalks[special_pt].mod;
    const SmithForm& s0 = m0->smith;
    const SmithForm& sp = mp->smith;
    std::vector<std::size_t> pos0 = free_positions(s0);
    std::vector<std::size_t> posp = free_positions(sp);
    RMat b(posp.size(), std::vector<Rat>(pos0.size()));
    for (std::size_t i = 0; i < posp.size(); ++i) {
        EVec fb(mp->gens);
        for (std::size_t j = 0; j < mp->gens; ++j) fb[j] = RElem{0, Rat(sp.vinv[posp[i]][j])};
        EVec img = semilinear_apply(*g, zero_pt, special_pt, fb);
        std::vector<Rat> coords(m0->gens);
        for (std::size_t j = 0; j < m0->gens; ++j) coords[j] = img[j].frac;
        std::vector<Rat> y = rvec_imat(coords, s0.v);
        for (std::size_t c = 0; c < pos0.size(); ++c) b[i][c] = y[pos0[c]];
    }
    return b;
}

inline Int int_pow(const Int& base, int e) {
    Int r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

inline LimitModule semilocal_limit(const Presheaf& g, const SubPoset& over) {
    auto data = std::make_shared<LimitData>();
    data->sheaf = g;
    data->over = over;
    std::size_t k = over.members.size();
    if (k == 1) {
        const Stalk& st = g->stalks[over.members[0]];
        data->ring = st.at->carrier;
        data->presented = st.mod;
        for (std::size_t j = 0; j < st.mod->gens; ++j) {
            EVec gen = mzero(st.mod);
            gen[j] = rone(data->ring);
            data->gen_families.push_back({canon(st.mod, gen)});
        }
        return data;
    }
    StarView star = star_view(g, over);
    std::size_t z = star.zero_slot;
    std::size_t zpt = over.members[z];
    if (star.special_slots.size() == 1) {
        std::size_t s = star.special_slots[0];
        std::size_t pt = over.members[s];
        const Stalk& st = g->stalks[pt];
        data->ring = st.at->carrier;
        data->presented = st.mod;
        const EMat& rho = *restr_of(*g, zpt, pt);
        for (std::size_t j = 0; j < st.mod->gens; ++j) {
            std::vector<EVec> fam = family_zero(g, over);
            EVec gen = mzero(st.mod);
            gen[j] = rone(data->ring);
            fam[s] = canon(st.mod, gen);
            fam[z] = rho[j];
            data->gen_families.push_back(std::move(fam));
        }
        return data;
    }

    // general star: torsion blocks per special point plus the compatible
    // free part, assembled as a lattice in the free coordinates at (0)
    data->ring = construct_semilocal_int(star.primes);
    const Module& m0 = g->stalks[zpt].mod;
    const SmithForm& s0 = m0->smith;
    std::vector<std::size_t> pos0 = free_positions(s0);
    std::size_t r0f = pos0.size();

    std::size_t ns = star.special_slots.size();
    std::vector<RMat> bmats(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        std::size_t pt = over.members[star.special_slots[i]];
        bmats[i] = free_restriction(g, zpt, pt);
        if (rmat_rank(bmats[i]) < bmats[i].size())
            throw unsupported_error("inverse limit is not finitely generated over its limit ring");
    }

    RMat vbasis;
    bool vinit = false;
    for (std::size_t i = 0; i < ns; ++i) {
        if (bmats[i].empty()) {
            vbasis.clear();
            vinit = true;
            break;
        }
        if (!vinit) {
            vbasis = bmats[i];
            rmat_rref(vbasis);
            while (!vbasis.empty()) {
                bool zero = true;
                for (const auto& e : vbasis.back())
                    if (!e.is_zero()) { zero = false; break; }
                if (!zero) break;
                vbasis.pop_back();
            }
            vinit = true;
        } else {
            vbasis = rsubspace_intersect(vbasis, bmats[i]);
        }
    }
    std::size_t t = vbasis.size();

    IMat theta;
    Int denom = 1;
    if (t > 0) {
        for (const auto& row : bmats)
            for (const auto& rrow : row)
                for (const auto& e : rrow) denom = int_lcm(denom, e.den);
        std::vector<IMat> cmats(ns);
        for (std::size_t i = 0; i < ns; ++i) {
            IMat c(bmats[i].size(), std::vector<Int>(r0f));
            for (std::size_t a = 0; a < bmats[i].size(); ++a)
                for (std::size_t b = 0; b < r0f; ++b) {
                    Rat e = bmats[i][a][b] * Rat(denom);
                    if (!e.is_integer())
                        throw invariant_violation("denominator clearing failed");
                    c[a][b] = e.num;
                }
            cmats[i] = std::move(c);
        }
        // integer functionals cutting out the intersection subspace
        RMat comp = t < r0f ? rmat_left_kernel(rmat_transpose(vbasis)) : RMat{};
        IMat pint;
        for (const auto& row : comp) {
            Int scale = 1;
            for (const auto& e : row) scale = int_lcm(scale, e.den);
            std::vector<Int> irow(row.size());
            for (std::size_t j = 0; j < row.size(); ++j) irow[j] = (row[j] * Rat(scale)).num;
            pint.push_back(std::move(irow));
        }
        IMat gsat;
        if (pint.empty()) {
            gsat = imat_identity(r0f);
        } else {
            IMat m(r0f, std::vector<Int>(pint.size()));
            for (std::size_t i = 0; i < pint.size(); ++i)
                for (std::size_t j = 0; j < r0f; ++j) m[j][i] = pint[i][j];
            gsat = int_left_kernel(m);
        }
        IMat theta_gens;
        for (std::size_t i = 0; i < ns; ++i) {
            IMat zker;
            if (pint.empty()) {
                zker = imat_identity(cmats[i].size());
            } else {
                IMat m(r0f, std::vector<Int>(pint.size()));
                for (std::size_t a = 0; a < pint.size(); ++a)
                    for (std::size_t j = 0; j < r0f; ++j) m[j][a] = pint[a][j];
                zker = int_left_kernel(imat_mul(cmats[i], m));
            }
            IMat gamma = imat_mul(zker, cmats[i]);
            IMat tilde;
            for (const auto& row : gamma) {
                std::vector<Int> sol;
                if (!int_solve_left(gsat, row, sol))
                    throw invariant_violation("lattice lies outside its saturation");
                tilde.push_back(std::move(sol));
            }
            SnfResult snf = smith_normal_form_int(tilde);
            Int idx = 1;
            std::size_t nz = 0;
            for (const auto& d : snf.diag)
                if (d != 0) { idx *= d; ++nz; }
            if (nz != t) throw invariant_violation("per-prime lattice has unexpected rank");
            int kv = valuation(idx, star.primes[i]);
            IMat term = gamma;
            Int scale = int_pow(star.primes[i], kv);
            for (const auto& row : gsat) {
                std::vector<Int> srow(row.size());
                for (std::size_t j = 0; j < row.size(); ++j) srow[j] = scale * row[j];
                term.push_back(std::move(srow));
            }
            theta_gens = i == 0 ? term : lattice_intersection(theta_gens, term);
        }
        theta = lattice_basis(theta_gens);
        if (theta.size() != t)
            throw invariant_violation("free part of the limit has unexpected rank");
    }

    // presentation: torsion generators first, then the free ones
    std::vector<std::pair<std::size_t, std::size_t>> tor_index; // (special order, coord)
    std::vector<Int> tor_mod;
    for (std::size_t i = 0; i < ns; ++i) {
        const Module& mp = g->stalks[over.members[star.special_slots[i]]].mod;
        for (std::size_t j = 0; j < mp->gens; ++j)
            if (mp->smith.moduli[j] > 1) {
                tor_index.emplace_back(i, j);
                tor_mod.push_back(mp->smith.moduli[j]);
            }
    }
    std::size_t gcount = tor_index.size() + t;
    EMat rel;
    for (std::size_t a = 0; a < tor_mod.size(); ++a) {
        EVec row(gcount, rzero(data->ring));
        row[a] = RElem{0, Rat(tor_mod[a])};
        rel.push_back(std::move(row));
    }
    data->presented = make_module(data->ring, gcount, std::move(rel));
    data->theta = theta;
    data->denom = denom;

    for (std::size_t a = 0; a < tor_index.size(); ++a) {
        auto [i, coord] = tor_index[a];
        std::size_t slot = star.special_slots[i];
        const Module& mp = g->stalks[over.members[slot]].mod;
        std::vector<EVec> fam = family_zero(g, over);
        EVec v(mp->gens);
        for (std::size_t j = 0; j < mp->gens; ++j) v[j] = RElem{0, Rat(mp->smith.vinv[coord][j])};
        fam[slot] = canon(mp, v);
        if (!elem_is_zero(m0, semilinear_apply(*g, zpt, over.members[slot], fam[slot])))
            throw invariant_violation("torsion germ survives at the generic point");
        data->gen_families.push_back(std::move(fam));
    }
    for (std::size_t w = 0; w < t; ++w) {
        std::vector<Rat> sig(r0f);
        for (std::size_t c = 0; c < r0f; ++c) sig[c] = Rat(theta[w][c]) / Rat(denom);
        std::vector<EVec> fam = family_zero(g, over);
        std::vector<Rat> y0(m0->gens);
        for (std::size_t c = 0; c < r0f; ++c) y0[pos0[c]] = sig[c];
        std::vector<Rat> back0 = rvec_imat(y0, s0.vinv);
        EVec v0(m0->gens);
        for (std::size_t j = 0; j < m0->gens; ++j) v0[j] = RElem{0, back0[j]};
        fam[z] = canon(m0, v0);
        for (std::size_t i = 0; i < ns; ++i) {
            std::size_t slot = star.special_slots[i];
            const Module& mp = g->stalks[over.members[slot]].mod;
            std::vector<std::size_t> posp = free_positions(mp->smith);
            std::vector<Rat> x;
            if (!rmat_solve_left(bmats[i], sig, x))
                throw invariant_violation("free limit vector misses a stalk image");
            std::vector<Rat> yp(mp->gens);
            for (std::size_t c = 0; c < posp.size(); ++c) {
                if (valuation(x[c].den, star.primes[i]) != 0)
                    throw invariant_violation("free limit solution is not local at " +
                                              g->poset.points[over.members[slot]].id);
                yp[posp[c]] = x[c];
            }
            std::vector<Rat> backp = rvec_imat(yp, mp->smith.vinv);
            EVec vp(mp->gens);
            for (std::size_t j = 0; j < mp->gens; ++j) vp[j] = RElem{0, backp[j]};
            fam[slot] = canon(mp, vp);
        }
        data->gen_families.push_back(std::move(fam));
    }
    return data;
}

} // namespace detail

inline LimitShape probe_limit_shape(const Presheaf& g, const SubPoset& over) {
    LimitShape shape;
    if (is_finite(g->poset.ring) || over.members.size() <= 1) return shape;
    detail::StarView star = detail::star_view(g, over);
    if (star.special_slots.size() <= 1) return shape;
    std::size_t zpt = over.members[star.zero_slot];
    std::vector<bool> has_kernel(star.special_slots.size(), false);
    std::size_t kernels = 0;
    for (std::size_t i = 0; i < star.special_slots.size(); ++i) {
        RMat b = detail::free_restriction(g, zpt, over.members[star.special_slots[i]]);
        if (rmat_rank(b) < b.size()) {
            has_kernel[i] = true;
            ++kernels;
        }
    }
    if (kernels == 0) return shape;
    shape.representable = false;
    shape.bad_members.push_back(zpt);
    for (std::size_t i = 0; i < star.special_slots.size(); ++i) {
        std::size_t others = kernels - (has_kernel[i] ? 1 : 0);
        if (others > 0) shape.bad_members.push_back(over.members[star.special_slots[i]]);
    }
    std::sort(shape.bad_members.begin(), shape.bad_members.end());
    return shape;
}

inline LimitModule inverse_limit(const Presheaf& g, const SubPoset& over) {
    if (over.members.empty()) throw input_error("inverse limit over an empty subposet");
    for (std::size_t m : over.members)
        if (m >= g->poset.points.size()) throw input_error("subposet member out of range");
    LimitModule lim = is_finite(g->poset.ring) ? detail::finite_limit(g, over)
                                               : detail::semilocal_limit(g, over);
    for (const auto& fam : lim->gen_families)
        if (!detail::family_compatible(g, over, fam))
            throw invariant_violation("limit generator family is not compatible");
    return lim;
}

inline EVec limit_coords(const LimitModule& lim, const std::vector<EVec>& fam_in) {
    const Presheaf& g = lim->sheaf;
    const SubPoset& over = lim->over;
    if (fam_in.size() != over.members.size())
        throw input_error("family arity differs from the subposet size");
    std::vector<EVec> fam(fam_in.size());
    for (std::size_t s = 0; s < fam.size(); ++s)
        fam[s] = canon(g->stalks[over.members[s]].mod, fam_in[s]);
    if (is_finite(g->poset.ring)) {
        auto it = lim->family_coords.find(detail::family_key(g, over, fam));
        if (it == lim->family_coords.end())
            throw invariant_violation("family is not an element of the computed limit");
        return it->second;
    }
    EVec coords;
    if (over.members.size() == 1) {
        coords = fam[0];
    } else {
        detail::StarView star = detail::star_view(g, over);
        if (star.special_slots.size() == 1) {
            coords = fam[star.special_slots[0]];
        } else {
            const Module& m0 = g->stalks[over.members[star.zero_slot]].mod;
            std::vector<std::size_t> pos0 = detail::free_positions(m0->smith);
            coords.assign(lim->presented->gens, rzero(lim->ring));
            std::size_t idx = 0;
            for (std::size_t i = 0; i < star.special_slots.size(); ++i) {
                std::size_t slot = star.special_slots[i];
                const Module& mp = g->stalks[over.members[slot]].mod;
                std::vector<Rat> cp(mp->gens);
                for (std::size_t j = 0; j < mp->gens; ++j) cp[j] = fam[slot][j].frac;
                std::vector<Rat> y = rvec_imat(cp, mp->smith.v);
                for (std::size_t j = 0; j < mp->gens; ++j)
                    if (mp->smith.moduli[j] > 1) {
                        if (!y[j].is_integer())
                            throw invariant_violation("canonical torsion residue is not integral");
                        coords[idx++] = RElem{0, y[j]};
                    }
            }
            std::size_t t = lim->presented->gens - idx;
            if (t > 0) {
                std::vector<Rat> c0(m0->gens);
                for (std::size_t j = 0; j < m0->gens; ++j)
                    c0[j] = fam[star.zero_slot][j].frac;
                std::vector<Rat> y0 = rvec_imat(c0, m0->smith.v);
                std::vector<Rat> target(pos0.size());
                for (std::size_t c = 0; c < pos0.size(); ++c)
                    target[c] = y0[pos0[c]] * Rat(lim->denom);
                std::vector<Rat> sol;
                if (!rmat_solve_left(rmat_from_int(lim->theta), target, sol))
                    throw invariant_violation("family free part lies outside the limit lattice");
                for (std::size_t w = 0; w < t; ++w) {
                    for (const auto& q : lim->ring->primes)
                        if (valuation(sol[w].den, q) != 0)
                            throw invariant_violation(
                                "family free part lies outside the limit lattice");
                    coords[idx + w] = RElem{0, sol[w]};
                }
            }
        }
    }
    coords = canon(lim->presented, coords);
    std::vector<EVec> rebuilt = limit_family(lim, coords);
    for (std::size_t s = 0; s < fam.size(); ++s)
        if (!elem_eq(g->stalks[over.members[s]].mod, rebuilt[s], fam[s]))
            throw invariant_violation("family is not an element of the computed limit");
    return coords;
}

/// Induced map between limits: push each generator family through the
/// morphism pointwise, then read off coordinates in the target limit. The
/// result is a module hom between the two presentations.
inline EMat limit_morphism(const LimitModule& a, const LimitModule& b,
                           const PresheafMorphism& phi) {
    detail::require_same_poset(a->sheaf, b->sheaf);
    if (a->over.members != b->over.members)
        throw input_error("limits are taken over different subposets");
    if (!presheaf_morphism_ok(a->sheaf, b->sheaf, phi.comps))
        throw input_error("not a presheaf morphism");
    EMat out;
    out.reserve(a->presented->gens);
    for (std::size_t j = 0; j < a->presented->gens; ++j) {
        std::vector<EVec> mapped(a->over.members.size());
        for (std::size_t s = 0; s < a->over.members.size(); ++s) {
            std::size_t x = a->over.members[s];
            mapped[s] = apply_hom(b->sheaf->stalks[x].mod, b->sheaf->stalks[x].at->carrier,
                                  a->gen_families[j][s], phi.comps[x]);
        }
        out.push_back(limit_coords(b, mapped));
    }
    if (!hom_respects_relations(a->presented, b->presented, out))
        throw invariant_violation("induced limit map does not respect relations");
    return out;
}

inline TNatural functor_T(const Presheaf& g, const SubPoset& over) {
    TNatural out;
    out.lim = inverse_limit(g, over);
    bool finite = is_finite(g->poset.ring);
    for (std::size_t s = 0; s < over.members.size(); ++s) {
        std::size_t pt = over.members[s];
        LocalRing lr;
        if (finite) {
            lr = g->stalks[pt].at;
        } else {
            Point lp;
            lp.id = g->poset.points[pt].id;
            lp.prime.gen = g->poset.points[pt].prime.gen;
            lr = localize_ring(out.lim->ring, lp);
        }
        out.tg.push_back(localize_module(out.lim->presented, lr));
        EMat nat;
        nat.reserve(out.lim->presented->gens);
        for (std::size_t j = 0; j < out.lim->presented->gens; ++j)
            nat.push_back(out.lim->gen_families[j][s]);
        const Module& dst = g->stalks[pt].mod;
        for (const auto& rel : out.tg[s]->localized->relations)
            if (!elem_is_zero(dst, apply_hom(dst, dst->ring, rel, nat)))
                throw invariant_violation("natural component is not well defined at " +
                                          g->poset.points[pt].id);
        out.natural.push_back(std::move(nat));
    }
    for (std::size_t s = 0; s < over.members.size(); ++s)
        for (std::size_t u = 0; u < over.members.size(); ++u) {
            std::size_t x = over.members[s], y = over.members[u];
            if (x == y || !g->poset.leq[x][y]) continue;
            for (std::size_t j = 0; j < out.lim->presented->gens; ++j) {
                EVec gen = mzero(out.tg[u]->localized);
                gen[j] = rone(out.tg[u]->localized->ring);
                EVec lhs = apply_hom(g->stalks[x].mod, g->stalks[x].mod->ring,
                                     transport(out.tg[u], out.tg[s], gen), out.natural[s]);
                EVec rhs = restrict_elem(g, x, y, out.natural[u][j]);
                if (!elem_eq(g->stalks[x].mod, lhs, rhs))
                    throw invariant_violation("naturality square fails between " +
                                              g->poset.points[x].id + " and " +
                                              g->poset.points[y].id);
            }
        }
    return out;
}

} // namespace specpos
