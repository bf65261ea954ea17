#pragma once

/**
 * @file module.hpp
 * Finitely generated modules as presentations R^g / rowspan(relations).
 *
 * Elements are coset representatives in canonical form. The finite backend
 * materializes the full relation span and canonicalizes to the least packed
 * representative; the PID backend reduces against Smith-basis residues.
 * Rows are elements; matrices act on the right.
 */

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "specpos/errors.hpp"
#include "specpos/intmat.hpp"
#include "specpos/ring.hpp"

namespace specpos {

inline constexpr std::size_t finite_gen_cap = 8; // packed 8 bits per coordinate

/// Canonical decomposition over the PID backend. moduli has one entry per
/// generator coordinate in the Smith basis: 0 marks a free coordinate, 1 a
/// killed one, otherwise a product of primes of S. v and vinv are the
/// mutually inverse changes of basis.
struct SmithForm {
    std::vector<Int> moduli;
    IMat v, vinv;
    std::vector<Int> invariant_factors; // moduli that are neither 0 nor 1, chain order
    std::size_t free_rank = 0;
};

struct ModuleData {
    RingHandle ring;
    std::size_t gens = 0;
    EMat relations;
    std::vector<std::uint64_t> span; // finite backend: sorted packed relation span
    SmithForm smith;                 // PID backend
};

using Module = std::shared_ptr<const ModuleData>;

inline std::uint64_t pack_coords(const EVec& v) {
    std::uint64_t key = 0;
    for (const auto& e : v) key = (key << 8) | e.idx;
    return key;
}

inline EVec unpack_coords(std::uint64_t key, std::size_t g) {
    EVec v(g);
    for (std::size_t i = g; i-- > 0;) {
        v[i] = RElem{static_cast<std::uint16_t>(key & 0xff), {}};
        key >>= 8;
    }
    return v;
}

inline std::vector<Rat> rvec_imat(const std::vector<Rat>& v, const IMat& m) {
    std::size_t cols = m.empty() ? 0 : m[0].size();
    std::vector<Rat> out(cols);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].is_zero()) continue;
        for (std::size_t j = 0; j < cols; ++j)
            out[j] = out[j] + v[i] * Rat(m[i][j]);
    }
    return out;
}

/// Residue of a/b modulo the S-number d, in [0, d).
inline Int residue_mod(const Rat& q, const Int& d) {
    Int b = q.den % d;
    Int x, y;
    Int g = ext_gcd(b, d, x, y);
    if (g != 1 && g != -1) throw invariant_violation("denominator not invertible modulo " + d.str());
    Int r = (q.num % d) * x % d;
    if (r < 0) r += d;
    return r;
}

namespace detail {

inline std::vector<std::uint64_t> build_span(const RingHandle& r, std::size_t g,
                                             const EMat& relations) {
    std::vector<EVec> multiples;
    for (const auto& row : relations)
        for (std::size_t e = 0; e < r->n; ++e)
            multiples.push_back(evec_scale(r, finite_elem(r, e), row));
    std::vector<std::uint64_t> span = {pack_coords(evec_zero(r, g))};
    std::vector<std::uint64_t> work = span;
    while (!work.empty()) {
        std::uint64_t cur = work.back();
        work.pop_back();
        EVec v = unpack_coords(cur, g);
        for (const auto& m : multiples) {
            std::uint64_t key = pack_coords(evec_add(r, v, m));
            auto it = std::lower_bound(span.begin(), span.end(), key);
            if (it == span.end() || *it != key) {
                span.insert(it, key);
                work.push_back(key);
                check_carrier(static_cast<std::int64_t>(span.size()), "relation span");
            }
        }
    }
    return span;
}

inline SmithForm build_smith(const RingHandle& r, std::size_t g, const EMat& relations) {
    SmithForm s;
    s.moduli.assign(g, 0);
    if (relations.empty()) {
        s.v = imat_identity(g);
        s.vinv = imat_identity(g);
        s.free_rank = g;
        return s;
    }
    IMat b;
    for (const auto& row : relations) {
        Int scale = 1;
        for (const auto& e : row) scale = int_lcm(scale, e.frac.den);
        std::vector<Int> irow(g);
        for (std::size_t j = 0; j < g; ++j) {
            Rat v = row[j].frac * Rat(scale);
            irow[j] = v.num; // v.den == 1 by choice of scale
        }
        b.push_back(std::move(irow));
    }
    SnfResult snf = smith_normal_form_int(b);
    for (std::size_t j = 0; j < snf.diag.size() && j < g; ++j)
        if (snf.diag[j] != 0) s.moduli[j] = s_part(snf.diag[j], r->primes);
    s.v = snf.v;
    RMat vinv_q;
    if (!rmat_inverse(rmat_from_int(snf.v), vinv_q))
        throw invariant_violation("Smith basis change is not invertible");
    s.vinv.assign(g, std::vector<Int>(g));
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j) {
            if (!vinv_q[i][j].is_integer())
                throw invariant_violation("Smith basis inverse is not integral");
            s.vinv[i][j] = vinv_q[i][j].num;
        }
    for (const auto& d : s.moduli) {
        if (d == 0) ++s.free_rank;
        else if (d != 1) s.invariant_factors.push_back(d);
    }
    return s;
}

} // namespace detail

inline Module make_module(const RingHandle& r, std::size_t gens, EMat relations) {
    for (const auto& row : relations)
        if (row.size() != gens) throw input_error("relation row length differs from generator count");
    if (is_finite(r)) {
        if (gens > finite_gen_cap)
            throw unsupported_error("generator count exceeds the packing cap of " +
                                    std::to_string(finite_gen_cap));
        for (const auto& row : relations)
            for (const auto& e : row)
                if (e.idx >= r->n) throw input_error("relation entry out of range");
    }
    auto data = std::make_shared<ModuleData>();
    data->ring = r;
    data->gens = gens;
    data->relations = std::move(relations);
    if (is_finite(r)) data->span = detail::build_span(r, gens, data->relations);
    else data->smith = detail::build_smith(r, gens, data->relations);
    return data;
}

inline Module free_module(const RingHandle& r, std::size_t rank) {
    return make_module(r, rank, {});
}

inline EVec mzero(const Module& m) { return evec_zero(m->ring, m->gens); }

inline EVec canon(const Module& m, const EVec& v) {
    if (v.size() != m->gens) throw input_error("element length differs from generator count");
    const RingHandle& r = m->ring;
    if (is_finite(r)) {
        std::uint64_t best = ~std::uint64_t(0);
        for (std::uint64_t key : m->span) {
            EVec cand = evec_add(r, v, unpack_coords(key, m->gens));
            best = std::min(best, pack_coords(cand));
        }
        return unpack_coords(best, m->gens);
    }
    const SmithForm& s = m->smith;
    std::vector<Rat> coords(m->gens);
    for (std::size_t j = 0; j < m->gens; ++j) coords[j] = v[j].frac;
    std::vector<Rat> y = rvec_imat(coords, s.v);
    for (std::size_t j = 0; j < m->gens; ++j) {
        if (s.moduli[j] == 0) continue;
        if (s.moduli[j] == 1) y[j] = Rat(0);
        else y[j] = Rat(residue_mod(y[j], s.moduli[j]));
    }
    std::vector<Rat> back = rvec_imat(y, s.vinv);
    EVec out(m->gens);
    for (std::size_t j = 0; j < m->gens; ++j) out[j] = RElem{0, back[j]};
    return out;
}

inline bool elem_eq(const Module& m, const EVec& a, const EVec& b) {
    return evec_eq(m->ring, canon(m, a), canon(m, b));
}

inline bool elem_is_zero(const Module& m, const EVec& a) {
    return evec_eq(m->ring, canon(m, a), mzero(m));
}

inline std::optional<Int> element_count(const Module& m) {
    if (is_finite(m->ring)) {
        Int total = 1;
        for (std::size_t i = 0; i < m->gens; ++i) total *= Int(m->ring->n);
        return total / Int(m->span.size());
    }
    const SmithForm& s = m->smith;
    if (s.free_rank > 0) return std::nullopt;
    Int total = 1;
    for (const auto& d : s.moduli)
        if (d != 0) total *= d;
    return total;
}

/// All elements in canonical form, deterministic order. Requires a finite
/// module and respects the scan budget.
inline std::vector<EVec> elements(const Module& m) {
    const RingHandle& r = m->ring;
    if (is_finite(r)) {
        Int tuples = 1;
        for (std::size_t i = 0; i < m->gens; ++i) tuples *= Int(r->n);
        if (tuples * Int(m->span.size()) > Int(max_scan))
            throw unsupported_error("element enumeration exceeds the scan budget");
        std::vector<std::uint64_t> keys;
        std::size_t count = static_cast<std::size_t>(tuples);
        for (std::size_t t = 0; t < count; ++t) {
            std::size_t rest = t;
            EVec v(m->gens);
            for (std::size_t i = m->gens; i-- > 0;) {
                v[i] = RElem{static_cast<std::uint16_t>(rest % r->n), {}};
                rest /= r->n;
            }
            keys.push_back(pack_coords(canon(m, v)));
        }
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        std::vector<EVec> out;
        out.reserve(keys.size());
        for (auto k : keys) out.push_back(unpack_coords(k, m->gens));
        return out;
    }
    const SmithForm& s = m->smith;
    if (s.free_rank > 0) throw unsupported_error("cannot enumerate an infinite module");
    Int total = 1;
    for (const auto& d : s.moduli)
        if (d != 0) total *= d;
    if (total > Int(max_scan)) throw unsupported_error("element enumeration exceeds the scan budget");
    std::vector<EVec> out;
    std::size_t count = static_cast<std::size_t>(total);
    for (std::size_t t = 0; t < count; ++t) {
        std::size_t rest = t;
        std::vector<Rat> y(m->gens);
        for (std::size_t j = m->gens; j-- > 0;) {
            if (s.moduli[j] <= 1) continue;
            std::size_t d = static_cast<std::size_t>(s.moduli[j]);
            y[j] = Rat(Int(rest % d));
            rest /= d;
        }
        std::vector<Rat> back = rvec_imat(y, s.vinv);
        EVec v(m->gens);
        for (std::size_t j = 0; j < m->gens; ++j) v[j] = RElem{0, back[j]};
        out.push_back(std::move(v));
    }
    return out;
}

inline SmithForm smith_normal_form(const Module& m) {
    if (is_finite(m->ring))
        throw unsupported_error("Smith normal form needs the PID backend");
    return m->smith;
}

inline Ideal annihilator(const Module& m, const EVec& elem) {
    const RingHandle& r = m->ring;
    if (is_finite(r)) {
        Ideal out;
        for (std::size_t e = 0; e < r->n; ++e)
            if (elem_is_zero(m, evec_scale(r, finite_elem(r, e), elem)))
                out.elems.push_back(static_cast<std::uint16_t>(e));
        return out;
    }
    const SmithForm& s = m->smith;
    std::vector<Rat> coords(m->gens);
    for (std::size_t j = 0; j < m->gens; ++j) coords[j] = elem[j].frac;
    std::vector<Rat> y = rvec_imat(coords, s.v);
    Int gen = 1;
    for (std::size_t j = 0; j < m->gens; ++j) {
        const Int& d = s.moduli[j];
        if (d == 1) continue;
        if (d == 0) {
            if (!y[j].is_zero()) gen = 0;
            continue;
        }
        Int a = residue_mod(y[j], d);
        gen = int_lcm(gen, d / int_gcd(d, a));
    }
    Ideal out;
    out.gen = gen;
    return out;
}

inline std::vector<EMat> hom_enumerate(const Module& m, const Module& n) {
    if (!ring_eq(m->ring, n->ring)) throw input_error("Hom requires modules over the same ring");
    const RingHandle& r = m->ring;
    if (is_finite(r)) {
        auto targets = elements(n);
        Int total = 1;
        for (std::size_t i = 0; i < m->gens; ++i) {
            total *= Int(targets.size());
            if (total > Int(max_scan)) throw unsupported_error("Hom enumeration exceeds the scan budget");
        }
        std::vector<EMat> out;
        std::size_t count = static_cast<std::size_t>(total);
        for (std::size_t t = 0; t < count; ++t) {
            std::size_t rest = t;
            EMat img(m->gens);
            for (std::size_t i = m->gens; i-- > 0;) {
                img[i] = targets[rest % targets.size()];
                rest /= targets.size();
            }
            bool ok = true;
            for (const auto& rel : m->relations) {
                if (elem_is_zero(n, evec_mat(r, rel, img))) continue;
                ok = false;
                break;
            }
            if (ok) out.push_back(std::move(img));
        }
        return out;
    }
    const SmithForm& sm = m->smith;
    const SmithForm& sn = n->smith;
    struct Slot {
        std::size_t i, j;
        Int step;  // entry = step * choice
        Int count; // number of choices
    };
    std::vector<Slot> slots;
    Int total = 1;
    for (std::size_t i = 0; i < m->gens; ++i) {
        const Int& d = sm.moduli[i];
        if (d == 1) continue;
        for (std::size_t j = 0; j < n->gens; ++j) {
            const Int& e = sn.moduli[j];
            if (e == 1) continue;
            if (d == 0 && e == 0)
                throw unsupported_error("Hom set is infinite; compare structurally instead");
            Int cnt, step;
            if (d == 0) { cnt = e; step = 1; }
            else if (e == 0) continue; // torsion to free is zero
            else { Int g = int_gcd(d, e); cnt = g; step = e / g; }
            if (cnt > 1) {
                slots.push_back({i, j, step, cnt});
                total *= cnt;
                if (total > Int(max_scan))
                    throw unsupported_error("Hom enumeration exceeds the scan budget");
            }
        }
    }
    std::vector<EMat> out;
    std::size_t count = static_cast<std::size_t>(total);
    for (std::size_t t = 0; t < count; ++t) {
        IMat h = imat_zero(m->gens, n->gens);
        std::size_t rest = t;
        for (const auto& sl : slots) {
            Int choice = Int(rest % static_cast<std::size_t>(sl.count));
            rest /= static_cast<std::size_t>(sl.count);
            h[sl.i][sl.j] = sl.step * choice;
        }
        IMat a = imat_mul(imat_mul(sm.v, h), sn.vinv);
        EMat img(m->gens);
        for (std::size_t i = 0; i < m->gens; ++i) {
            EVec row(n->gens);
            for (std::size_t j = 0; j < n->gens; ++j) row[j] = RElem{0, Rat(a[i][j])};
            img[i] = canon(n, row);
        }
        out.push_back(std::move(img));
    }
    return out;
}

/// Apply a generator-image matrix to an element: coordinates times rows.
inline EVec apply_hom(const Module& n, const RingHandle& r, const EVec& elem, const EMat& img) {
    EVec acc = mzero(n);
    for (std::size_t i = 0; i < elem.size(); ++i)
        acc = evec_add(r, acc, evec_scale(r, elem[i], img[i]));
    return canon(n, acc);
}

struct IsoWitness {
    bool iso = false;
    EMat fwd, bwd;
};

inline bool hom_respects_relations(const Module& src, const Module& dst, const EMat& img) {
    for (const auto& rel : src->relations)
        if (!elem_is_zero(dst, evec_mat(src->ring, rel, img))) return false;
    return true;
}

inline IsoWitness module_isomorphic(const Module& m, const Module& n) {
    if (!ring_eq(m->ring, n->ring)) throw input_error("isomorphism test requires one ring");
    const RingHandle& r = m->ring;
    IsoWitness w;
    if (is_finite(r)) {
        if (element_count(m) != element_count(n)) return w;
        auto elems_m = elements(m);
        for (const auto& img : hom_enumerate(m, n)) {
            bool injective = true;
            std::map<std::uint64_t, EVec> preimage;
            for (const auto& e : elems_m) {
                EVec image = apply_hom(n, r, e, img);
                if (!evec_eq(r, e, mzero(m)) && evec_eq(r, image, mzero(n))) {
                    injective = false;
                    break;
                }
                preimage[pack_coords(image)] = e;
            }
            if (!injective) continue;
            EMat bwd(n->gens);
            bool found_all = true;
            for (std::size_t j = 0; j < n->gens && found_all; ++j) {
                EVec gen = mzero(n);
                gen[j] = rone(r);
                auto it = preimage.find(pack_coords(canon(n, gen)));
                if (it == preimage.end()) found_all = false;
                else bwd[j] = it->second;
            }
            if (!found_all || !hom_respects_relations(n, m, bwd)) continue;
            w.iso = true;
            w.fwd = img;
            w.bwd = bwd;
            return w;
        }
        return w;
    }
    const SmithForm& sm = m->smith;
    const SmithForm& sn = n->smith;
    if (sm.invariant_factors != sn.invariant_factors || sm.free_rank != sn.free_rank) return w;
    // pair Smith coordinates with equal moduli, killed coordinates map to zero
    std::vector<std::size_t> src_live, dst_live;
    for (std::size_t i = 0; i < m->gens; ++i)
        if (sm.moduli[i] != 1) src_live.push_back(i);
    for (std::size_t j = 0; j < n->gens; ++j)
        if (sn.moduli[j] != 1) dst_live.push_back(j);
    auto key = [](const Int& d) { return d == 0 ? Int(-1) : d; };
    std::stable_sort(src_live.begin(), src_live.end(), [&](std::size_t a, std::size_t b) {
        return key(sm.moduli[a]) < key(sm.moduli[b]);
    });
    std::stable_sort(dst_live.begin(), dst_live.end(), [&](std::size_t a, std::size_t b) {
        return key(sn.moduli[a]) < key(sn.moduli[b]);
    });
    if (src_live.size() != dst_live.size()) return w;
    IMat h = imat_zero(m->gens, n->gens), hback = imat_zero(n->gens, m->gens);
    for (std::size_t k = 0; k < src_live.size(); ++k) {
        if (key(sm.moduli[src_live[k]]) != key(sn.moduli[dst_live[k]])) return w;
        h[src_live[k]][dst_live[k]] = 1;
        hback[dst_live[k]][src_live[k]] = 1;
    }
    auto to_emat = [&](const IMat& a) {
        EMat out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EVec row(a[i].size());
            for (std::size_t j = 0; j < a[i].size(); ++j) row[j] = RElem{0, Rat(a[i][j])};
            out[i] = row;
        }
        return out;
    };
    w.fwd = to_emat(imat_mul(imat_mul(sm.v, h), sn.vinv));
    w.bwd = to_emat(imat_mul(imat_mul(sn.v, hback), sm.vinv));
    if (!hom_respects_relations(m, n, w.fwd) || !hom_respects_relations(n, m, w.bwd))
        throw invariant_violation("Smith pairing failed to produce module maps");
    for (std::size_t i = 0; i < m->gens; ++i) {
        EVec gen = mzero(m);
        gen[i] = rone(r);
        EVec round = apply_hom(m, r, apply_hom(n, r, gen, w.fwd), w.bwd);
        if (!elem_eq(m, round, gen))
            throw invariant_violation("Smith pairing round trip is not the identity");
    }
    for (std::size_t j = 0; j < n->gens; ++j) {
        EVec gen = mzero(n);
        gen[j] = rone(r);
        EVec round = apply_hom(n, r, apply_hom(m, r, gen, w.bwd), w.fwd);
        if (!elem_eq(n, round, gen))
            throw invariant_violation("Smith pairing round trip is not the identity");
    }
    w.iso = true;
    return w;
}

/// Decide whether one specific generator-image matrix is an isomorphism.
/// Finite backend: trivial kernel plus equal counts. PID backend: equal
/// Smith data plus surjectivity; a surjection between modules with the same
/// invariant data over a noetherian ring is bijective.
inline bool hom_is_bijective(const Module& src, const Module& dst, const EMat& img) {
    if (!ring_eq(src->ring, dst->ring)) throw input_error("bijectivity test requires one ring");
    if (img.size() != src->gens) throw input_error("generator image count differs from source");
    if (!hom_respects_relations(src, dst, img)) return false;
    const RingHandle& r = src->ring;
    if (is_finite(r)) {
        if (element_count(src) != element_count(dst)) return false;
        for (const auto& e : elements(src))
            if (!evec_eq(r, e, mzero(src)) && elem_is_zero(dst, apply_hom(dst, r, e, img)))
                return false;
        return true;
    }
    const SmithForm& a = src->smith;
    const SmithForm& b = dst->smith;
    if (a.invariant_factors != b.invariant_factors || a.free_rank != b.free_rank) return false;
    EMat quot_rel = dst->relations;
    for (const auto& row : img) quot_rel.push_back(row);
    auto count = element_count(make_module(r, dst->gens, std::move(quot_rel)));
    return count && *count == 1;
}

} // namespace specpos
