#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "specpos/equivalence.hpp"

using namespace specpos;

namespace {

Module free_mod(const RingHandle& r, std::size_t rank) {
    return make_module(r, rank, {});
}

Module cyclic_mod(const RingHandle& r, std::size_t d) {
    return make_module(r, 1, {{finite_elem(r, d % r->n)}});
}

RElem q_of(const RingHandle& r, long num, long den = 1) {
    return semilocal_elem(r, Rat(Int(num), Int(den)));
}

Module cyclic_mod_pid(const RingHandle& r, long d) {
    return make_module(r, 1, {{q_of(r, d)}});
}

// diagonal presentation: one generator per listed modulus
Module diag_mod(const RingHandle& r, const std::vector<long>& ds) {
    EMat rel;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EVec row(ds.size(), rzero(r));
        row[i] = is_finite(r) ? finite_elem(r, static_cast<std::size_t>(ds[i]) % r->n)
                              : q_of(r, ds[i]);
        rel.push_back(row);
    }
    return make_module(r, ds.size(), rel);
}

// independent count of {y in n : d*y = 0} by direct enumeration
Int killed_count(const Module& n, std::size_t d) {
    RElem s = finite_elem(n->ring, d % n->ring->n);
    Int c = 0;
    for (const auto& e : elements(n))
        if (elem_is_zero(n, evec_scale(n->ring, s, e))) ++c;
    return c;
}

// hom count over the semilocal backend from the elementary divisor pairing
Int pid_hom_count(const Module& m, const Module& n) {
    const SmithForm& a = m->smith;
    const SmithForm& b = n->smith;
    REQUIRE((a.free_rank == 0 || b.free_rank == 0));
    Int c = 1;
    for (const auto& ai : a.invariant_factors)
        for (const auto& bj : b.invariant_factors) c *= int_gcd(ai, bj);
    for (std::size_t i = 0; i < a.free_rank; ++i)
        for (const auto& bj : b.invariant_factors) c *= bj;
    return c;
}

// expected shape of Hom(m, n) from the same pairing
void expect_hom_shape(const HomModule& h, const Module& m, const Module& n) {
    std::vector<Int> inv;
    for (const auto& ai : m->smith.invariant_factors)
        for (const auto& bj : n->smith.invariant_factors) {
            Int g = int_gcd(ai, bj);
            if (g != 1) inv.push_back(g);
        }
    for (std::size_t i = 0; i < m->smith.free_rank; ++i)
        for (const auto& bj : n->smith.invariant_factors) inv.push_back(bj);
    std::sort(inv.begin(), inv.end());
    std::vector<Int> got = h.h->smith.invariant_factors;
    std::sort(got.begin(), got.end());
    CHECK(got == inv);
    CHECK(h.h->smith.free_rank == m->smith.free_rank * n->smith.free_rank);
}

// re-check a certificate from scratch: open neighborhood of the point,
// denominator invertible there, and the fraction matches the family
void recheck_certificate(const Presheaf& g, const SubPoset& over, const std::vector<EVec>& fam,
                         std::size_t slot, const SectionCertificate& cert) {
    const SpecPoset& sp = g->poset;
    REQUIRE(cert.point == over.members[slot]);
    REQUIRE(cert.u.open_flag);
    REQUIRE(is_open_sub(sp, cert.u));
    REQUIRE(sub_contains(cert.u, cert.point));
    std::set<std::size_t> seen;
    for (auto y : cert.u.members) seen.insert(y);
    for (auto y : cert.z.members) REQUIRE(seen.insert(y).second);
    REQUIRE(seen.size() == over.members.size());
    for (std::size_t s = 0; s < over.members.size(); ++s) {
        std::size_t y = over.members[s];
        if (!sub_contains(cert.u, y)) continue;
        REQUIRE_FALSE(ideal_contains(sp.ring, sp.points[y].prime, cert.f));
        REQUIRE(elem_eq(g->stalks[y].mod,
                        germ_with_den(g->source_loc[y], cert.tau, cert.f), fam[s]));
    }
}

} // namespace

TEST_CASE("ring table isomorphism search") {
    auto z6 = construct_zmod(6);
    auto prod = construct_product({construct_zmod(2), construct_zmod(3)});
    auto iso = find_ring_iso(z6, prod);
    REQUIRE(iso.has_value());
    // the map respects both tables everywhere
    for (std::size_t x = 0; x < 6; ++x)
        for (std::size_t y = 0; y < 6; ++y) {
            CHECK((*iso)[z6->add[x * 6 + y]] == prod->add[(*iso)[x] * 6 + (*iso)[y]]);
            CHECK((*iso)[z6->mul[x * 6 + y]] == prod->mul[(*iso)[x] * 6 + (*iso)[y]]);
        }

    auto z4 = construct_zmod(4);
    auto dual = construct_poly_quotient(2, {0, 0, 1}); // x^2 over F_2
    auto f4 = construct_poly_quotient(2, {1, 1, 1});
    CHECK_FALSE(find_ring_iso(z4, dual).has_value()); // additive groups differ
    CHECK_FALSE(find_ring_iso(z4, f4).has_value());
    CHECK_FALSE(find_ring_iso(z4, construct_zmod(8)).has_value());
    CHECK(find_ring_iso(f4, f4).has_value());
    CHECK_THROWS_AS(find_ring_iso(z4, construct_semilocal_int({2})), input_error);
}

TEST_CASE("a finite module is the limit of its localizations") {
    auto z12 = construct_zmod(12);
    std::vector<Module> fixtures = {free_mod(z12, 1), cyclic_mod(z12, 4), cyclic_mod(z12, 3),
                                    cyclic_mod(z12, 6), diag_mod(z12, {4, 6})};
    for (const auto& m : fixtures) {
        KeyLemmaWitness w = verify_key_lemma(m);
        CHECK(Int(w.lim->families.size()) == *element_count(m));
        // round trip every element through the limit coordinates and back
        for (const auto& e : elements(m)) {
            EVec across = apply_hom(w.lim->presented, z12, e, w.to_limit);
            EVec back = apply_hom(m, z12, across, w.from_limit);
            CHECK(elem_eq(m, back, e));
        }
    }

    // splitting oracle: for the free module the two germs separate elements,
    // which is the splitting of Z/12 into its localizations
    auto m = fixtures[0];
    KeyLemmaWitness w = verify_key_lemma(m);
    std::set<std::pair<std::uint64_t, std::uint64_t>> pairs;
    for (const auto& e : elements(m)) {
        auto g2 = germ_of(w.sheaf->source_loc[0], e);
        auto g3 = germ_of(w.sheaf->source_loc[1], e);
        pairs.insert({pack_coords(g2), pack_coords(g3)});
    }
    CHECK(pairs.size() == 12);

    // the zero module maps to the one-element limit
    KeyLemmaWitness wz = verify_key_lemma(make_module(z12, 0, {}));
    CHECK(wz.lim->families.size() == 1);
}

TEST_CASE("certificates cover the limit families of finite fixtures") {
    auto z12 = construct_zmod(12);
    auto whole_of = [](const SpecPoset& sp) { return whole_poset(sp); };
    for (const auto& m : {cyclic_mod(z12, 6), diag_mod(z12, {4, 6})}) {
        KeyLemmaWitness w = verify_key_lemma(m);
        SubPoset whole = whole_of(w.sheaf->poset);
        REQUIRE(w.certificates.size() == w.lim->families.size());
        for (std::size_t fi = 0; fi < w.lim->families.size(); ++fi) {
            REQUIRE(w.certificates[fi].size() == whole.members.size());
            for (std::size_t s = 0; s < whole.members.size(); ++s)
                recheck_certificate(w.sheaf, whole, w.lim->families[fi], s,
                                    w.certificates[fi][s]);
        }
    }
}

TEST_CASE("pinned fraction descriptions over the cyclic base") {
    auto z12 = construct_zmod(12);
    auto sp = spectrum(z12);
    auto m = free_mod(z12, 1);
    auto g = functor_S(sp, m);
    SubPoset whole = whole_poset(sp);
    std::size_t i2 = point_index(sp, "{0,2,4,6,8,10}");
    std::size_t i3 = point_index(sp, "{0,3,6,9}");
    std::size_t slot2 = i2; // whole-poset slots equal point indices

    auto family_of = [&](std::size_t k) {
        EVec e = mzero(m);
        e[0] = finite_elem(z12, k);
        std::vector<EVec> fam;
        for (auto mem : whole.members) fam.push_back(germ_of(g->source_loc[mem], e));
        return fam;
    };

    // the unit section is 1/1 on the whole spectrum
    auto c1 = reconstruct_section(g, whole, family_of(1), slot2);
    CHECK(c1.tau[0].idx == 1);
    CHECK(c1.f.idx == 1);
    CHECK(c1.u.members.size() == whole.members.size());
    CHECK(c1.z.members.empty());
    recheck_certificate(g, whole, family_of(1), slot2, c1);

    // the image of 6 is 2/1 near the even prime: 6 and 2 share the germ there
    auto c6 = reconstruct_section(g, whole, family_of(6), slot2);
    CHECK(c6.tau[0].idx == 2);
    CHECK(c6.f.idx == 1);
    recheck_certificate(g, whole, family_of(6), slot2, c6);

    // the zero family is 0/1 everywhere
    auto c0 = reconstruct_section(g, whole, family_of(0), slot2);
    CHECK(c0.tau[0].idx == 0);
    CHECK(c0.f.idx == 1);
    CHECK(c0.u.members.size() == whole.members.size());
    recheck_certificate(g, whole, family_of(0), slot2, c0);

    // a family that is not a single germ family: unit germ at one prime,
    // zero at the other; the description excludes the other prime
    std::vector<EVec> mixed(whole.members.size());
    {
        EVec one = mzero(m);
        one[0] = rone(z12);
        mixed[i2] = germ_of(g->source_loc[i2], one);
        mixed[i3] = germ_of(g->source_loc[i3], mzero(m));
    }
    auto cm = reconstruct_section(g, whole, mixed, slot2);
    recheck_certificate(g, whole, mixed, slot2, cm);
    CHECK(sub_contains(cm.u, i2));
    CHECK(cm.z.members == std::vector<std::size_t>{i3});

    // restricted subposet: reconstruction only speaks about its members
    SubPoset part;
    part.members = {i2};
    auto cp = reconstruct_section(g, part, {family_of(1)[i2]}, 0);
    CHECK(cp.u.members == std::vector<std::size_t>{i2});

    // only localized-module presheaves on the finite backend are supported
    auto rs = construct_semilocal_int({2});
    auto gs = functor_S(spectrum(rs), free_mod(rs, 1));
    CHECK_THROWS_AS(reconstruct_section(gs, whole_poset(gs->poset), {}, 0), input_error);
}

TEST_CASE("the canonical map is bijective over the semilocal base") {
    auto r23 = construct_semilocal_int({2, 3});
    auto r2 = construct_semilocal_int({2});

    struct Case {
        Module m;
        std::vector<EVec> samples;
    };
    std::vector<Case> cases;
    {
        auto m = free_mod(r23, 1);
        cases.push_back({m, {EVec{q_of(r23, 5)}, EVec{q_of(r23, 7, 5)}}});
    }
    {
        auto m = make_module(r23, 2, {EVec{q_of(r23, 12), q_of(r23, 0)}});
        cases.push_back({m, {EVec{q_of(r23, 7), q_of(r23, 1, 7)}}});
    }
    {
        auto m = cyclic_mod_pid(r2, 8);
        cases.push_back({m, {EVec{q_of(r2, 5)}}});
    }
    {
        auto m = free_mod(r2, 2);
        cases.push_back({m, {EVec{q_of(r2, 3, 7), q_of(r2, 1)}}});
    }
    {
        cases.push_back({make_module(r23, 0, {}), {}});
    }
    for (const auto& c : cases) {
        KeyLemmaWitness w = verify_key_lemma(c.m);
        const auto& r = c.m->ring;
        CHECK(w.lim->presented->smith.invariant_factors == c.m->smith.invariant_factors);
        CHECK(w.lim->presented->smith.free_rank == c.m->smith.free_rank);
        for (const auto& e : c.samples) {
            EVec across = apply_hom(w.lim->presented, r, canon(c.m, e), w.to_limit);
            EVec back = apply_hom(c.m, r, across, w.from_limit);
            CHECK(elem_eq(c.m, back, e));
        }
    }
}

TEST_CASE("module maps correspond to presheaf morphisms over a finite base") {
    auto z12 = construct_zmod(12);
    // sources have diagonal presentations, so the hom count has the direct
    // oracle: a map is a choice of image killed by each generator modulus
    struct Pair {
        Module m;
        std::vector<std::size_t> ds;
        Module n;
    };
    std::vector<Pair> pairs;
    for (std::size_t nd : {6, 4, 3}) {
        pairs.push_back({free_mod(z12, 1), {0}, cyclic_mod(z12, nd)});
        pairs.push_back({cyclic_mod(z12, 4), {4}, cyclic_mod(z12, nd)});
        pairs.push_back({cyclic_mod(z12, 6), {6}, cyclic_mod(z12, nd)});
    }
    pairs.push_back({diag_mod(z12, {4, 6}), {4, 6}, cyclic_mod(z12, 6)});
    for (const auto& p : pairs) {
        HomBijection hb = verify_fully_faithful(p.m, p.n);
        REQUIRE(hb.finite);
        Int expect = 1;
        for (auto d : p.ds) expect *= killed_count(p.n, d);
        CHECK(hb.module_homs == expect);
        CHECK(hb.presheaf_homs == expect);
    }

    // the pinned count: maps from the free module to the order-6 quotient
    HomBijection six = verify_fully_faithful(free_mod(z12, 1), cyclic_mod(z12, 6));
    CHECK(six.module_homs == 6);
    CHECK(six.presheaf_homs == 6);

    // zero to zero: the single map
    HomBijection zz = verify_fully_faithful(make_module(z12, 0, {}), make_module(z12, 0, {}));
    CHECK(zz.module_homs == 1);
    CHECK(zz.presheaf_homs == 1);

    CHECK_THROWS_AS(verify_fully_faithful(free_mod(z12, 1), free_mod(construct_zmod(8), 1)),
                    input_error);
}

TEST_CASE("module maps correspond to presheaf morphisms over a semilocal base") {
    auto r2 = construct_semilocal_int({2});
    struct Pair {
        Module m, n;
    };
    std::vector<Pair> pairs = {
        {cyclic_mod_pid(r2, 4), cyclic_mod_pid(r2, 2)},
        {cyclic_mod_pid(r2, 2), cyclic_mod_pid(r2, 8)},
        {diag_mod(r2, {4, 2}), cyclic_mod_pid(r2, 4)},
        {free_mod(r2, 1), cyclic_mod_pid(r2, 4)},
        {cyclic_mod_pid(r2, 4), free_mod(r2, 1)},
    };
    for (const auto& p : pairs) {
        HomBijection hb = verify_fully_faithful(p.m, p.n);
        REQUIRE(hb.finite);
        CHECK(hb.module_homs == pid_hom_count(p.m, p.n));
        CHECK(hb.presheaf_homs == hb.module_homs);
    }
}

TEST_CASE("hom modules of free and torsion pairs") {
    auto r2 = construct_semilocal_int({2});
    struct Pair {
        Module m, n;
    };
    std::vector<Pair> pairs = {
        {free_mod(r2, 1), free_mod(r2, 1)},
        {free_mod(r2, 2), free_mod(r2, 3)},
        {cyclic_mod_pid(r2, 4), cyclic_mod_pid(r2, 2)},
        {cyclic_mod_pid(r2, 2), cyclic_mod_pid(r2, 4)},
        {diag_mod(r2, {4, 0}), cyclic_mod_pid(r2, 8)},
        {cyclic_mod_pid(r2, 4), free_mod(r2, 1)},
        {diag_mod(r2, {2, 4}), diag_mod(r2, {4, 8})},
    };
    for (const auto& p : pairs) {
        HomModule h = hom_module(p.m, p.n);
        expect_hom_shape(h, p.m, p.n);
        // when the hom set is finite its size equals the enumerated count
        auto cnt = element_count(h.h);
        if (cnt) CHECK(*cnt == Int(hom_enumerate(p.m, p.n).size()));
    }

    // a mixed-prime base pins the invariant factor directly
    auto r23 = construct_semilocal_int({2, 3});
    HomModule h6 = hom_module(cyclic_mod_pid(r23, 6), cyclic_mod_pid(r23, 12));
    CHECK(h6.h->smith.invariant_factors == std::vector<Int>{6});
    CHECK(h6.h->smith.free_rank == 0);

    CHECK_THROWS_AS(hom_module(free_mod(construct_zmod(4), 1), free_mod(construct_zmod(4), 1)),
                    input_error);
}

TEST_CASE("hom structure of free module pairs is reported instead of counts") {
    auto r2 = construct_semilocal_int({2});
    HomBijection rr = verify_fully_faithful(free_mod(r2, 1), free_mod(r2, 1));
    CHECK_FALSE(rr.finite);
    CHECK(rr.free_rank == 1);
    CHECK(rr.invariant_factors.empty());

    HomBijection mixed = verify_fully_faithful(diag_mod(r2, {2, 0}), free_mod(r2, 1));
    CHECK_FALSE(mixed.finite);
    CHECK(mixed.free_rank == 1);
    CHECK(mixed.invariant_factors.empty());

    HomBijection target = verify_fully_faithful(free_mod(r2, 1), diag_mod(r2, {0, 4}));
    CHECK_FALSE(target.finite);
    CHECK(target.free_rank == 1);
    CHECK(target.invariant_factors == std::vector<Int>{4});
}

TEST_CASE("morphism reconstruction inverts localization") {
    auto z12 = construct_zmod(12);
    auto sp = spectrum(z12);
    auto m = free_mod(z12, 1);
    auto n = cyclic_mod(z12, 6);
    auto sm = functor_S(sp, m);
    auto sn = functor_S(sp, n);
    auto same = [&](const PresheafMorphism& a, const PresheafMorphism& b) {
        for (std::size_t x = 0; x < sp.points.size(); ++x)
            for (std::size_t j = 0; j < a.comps[x].size(); ++j)
                if (!elem_eq(sn->stalks[x].mod, a.comps[x][j], b.comps[x][j])) return false;
        return true;
    };
    auto morphs = enumerate_presheaf_morphisms(sm, sn);
    REQUIRE(morphs.size() == 6);
    KeyLemmaWitness klw = verify_key_lemma(n);
    for (const auto& phi : morphs) {
        EMat psi = reconstruct_morphism(sm, sn, phi, klw);
        CHECK(same(functor_S_on_morphism(sm, sn, psi), phi));
    }

    // componentwise doubling at one prime and identity at the other is
    // multiplication by the element 10 that the residues glue to
    auto se = functor_S(sp, m);
    std::size_t i2 = point_index(sp, "{0,2,4,6,8,10}");
    std::size_t i3 = point_index(sp, "{0,3,6,9}");
    PresheafMorphism crt;
    crt.comps.resize(sp.points.size());
    crt.comps[i2] = EMat{EVec{loc_elem(se->stalks[i2].at, finite_elem(z12, 2))}};
    crt.comps[i3] = EMat{EVec{loc_elem(se->stalks[i3].at, finite_elem(z12, 1))}};
    EMat psi = reconstruct_morphism(se, se, crt); // convenience overload
    CHECK(psi[0][0].idx == 10);

    // the zero morphism pulls back to the zero map
    PresheafMorphism zero;
    zero.comps.resize(sp.points.size());
    zero.comps[i2] = EMat{EVec{rzero(se->stalks[i2].at->carrier)}};
    zero.comps[i3] = EMat{EVec{rzero(se->stalks[i3].at->carrier)}};
    EMat zpsi = reconstruct_morphism(se, se, zero, verify_key_lemma(m));
    CHECK(elem_is_zero(m, zpsi[0]));

    // a torsion stalk pair over the semilocal backend
    auto r2 = construct_semilocal_int({2});
    auto sp2 = spectrum(r2);
    auto m4 = cyclic_mod_pid(r2, 4);
    auto s4 = functor_S(sp2, m4);
    PresheafMorphism three = functor_S_on_morphism(s4, s4, EMat{EVec{q_of(r2, 3)}});
    EMat back = reconstruct_morphism(s4, s4, three);
    CHECK(elem_eq(m4, back[0], canon(m4, EVec{q_of(r2, 3)})));
}

TEST_CASE("localized module presheaves are admissible") {
    auto z12 = construct_zmod(12);
    auto r2 = construct_semilocal_int({2});
    auto r23 = construct_semilocal_int({2, 3});
    struct Case {
        RingHandle r;
        Module m;
    };
    std::vector<Case> cases = {
        {z12, free_mod(z12, 1)},        {z12, cyclic_mod(z12, 6)},
        {z12, diag_mod(z12, {4, 6})},   {r2, diag_mod(r2, {2, 0})},
        {r23, diag_mod(r23, {12, 0})},
    };
    for (const auto& c : cases) {
        auto sp = spectrum(c.r);
        auto g = functor_S(sp, c.m);
        AdmissibilityReport rep = check_admissible(g);
        REQUIRE(rep.verdict == Verdict::admissible);
        REQUIRE(rep.limits.size() == 1);
        CHECK_FALSE(rep.failing_point.has_value());
        CHECK(module_isomorphic(rep.limits[0]->presented, c.m).iso);
        // the witnesses identify every recovered stalk with the given one
        REQUIRE(rep.natural.size() == 1);
        TNatural tn = functor_T(g, rep.covering[0]);
        for (std::size_t s = 0; s < rep.covering[0].members.size(); ++s)
            CHECK(hom_is_bijective(tn.tg[s]->localized,
                                   g->stalks[rep.covering[0].members[s]].mod,
                                   rep.natural[0][s]));
    }

    // a two-element open cover splits the verdict into one limit per part
    auto sp = spectrum(r23);
    auto g = functor_S(sp, free_mod(r23, 1));
    std::size_t p0 = point_index(sp, "(0)");
    std::size_t p2 = point_index(sp, "(2)");
    std::size_t p3 = point_index(sp, "(3)");
    SubPoset u2, u3;
    u2.members = {std::min(p0, p2), std::max(p0, p2)};
    u3.members = {std::min(p0, p3), std::max(p0, p3)};
    AdmissibilityReport rep = check_admissible(g, {u2, u3});
    REQUIRE(rep.verdict == Verdict::admissible);
    REQUIRE(rep.limits.size() == 2);
    CHECK(ring_eq(rep.limits[0]->ring, construct_semilocal_int({2})));
    CHECK(ring_eq(rep.limits[1]->ring, construct_semilocal_int({3})));

    // malformed coverings are input errors, not rejections
    CHECK_THROWS_AS(check_admissible(g, {}), input_error);
    SubPoset closed_part;
    closed_part.members = {p2};
    CHECK_THROWS_AS(check_admissible(g, {closed_part}), input_error);
    SubPoset gen_only;
    gen_only.members = {p0};
    CHECK_THROWS_AS(check_admissible(g, {gen_only}), input_error);
}

TEST_CASE("presheaves that fail recovery are rejected at a named point") {
    auto r2 = construct_semilocal_int({2});
    auto sp2 = spectrum(r2);
    std::size_t p0 = point_index(sp2, "(0)");
    std::size_t p2 = point_index(sp2, "(2)");
    auto c2 = localize_ring(r2, sp2.points[p2])->carrier;
    auto q = localize_ring(r2, sp2.points[p0])->carrier;

    // a torsion skyscraper is admissible and its limit is the witness
    {
        std::vector<Module> stalks(2);
        stalks[p2] = make_module(c2, 1, {EVec{semilocal_elem(c2, Rat(2))}});
        stalks[p0] = make_module(q, 0, {});
        std::map<std::pair<std::size_t, std::size_t>, EMat> restr;
        restr[{p0, p2}] = EMat{EVec{}};
        auto g = make_explicit_presheaf(sp2, std::move(stalks), std::move(restr));
        AdmissibilityReport rep = check_admissible(g);
        REQUIRE(rep.verdict == Verdict::admissible);
        CHECK(module_isomorphic(rep.limits[0]->presented, cyclic_mod_pid(r2, 2)).iso);
    }
    // a rational stalk over a zero special stalk cannot come from a module:
    // the limit recovers nothing at the generic point
    {
        std::vector<Module> stalks(2);
        stalks[p2] = make_module(c2, 0, {});
        stalks[p0] = make_module(q, 1, {});
        std::map<std::pair<std::size_t, std::size_t>, EMat> restr;
        restr[{p0, p2}] = EMat{};
        auto g = make_explicit_presheaf(sp2, std::move(stalks), std::move(restr));
        AdmissibilityReport rep = check_admissible(g);
        REQUIRE(rep.verdict == Verdict::rejected);
        REQUIRE(rep.failing_point.has_value());
        CHECK(sp2.points[*rep.failing_point].id == "(0)");
        CHECK(rep.limits.empty());
    }
    // free stalks glued by zero: the limit is too large to present, and the
    // first failing point is reported in id order
    {
        auto r23 = construct_semilocal_int({2, 3});
        auto sp23 = spectrum(r23);
        std::size_t q0 = point_index(sp23, "(0)");
        std::vector<Module> stalks(3);
        std::map<std::pair<std::size_t, std::size_t>, EMat> restr;
        for (std::size_t i = 0; i < 3; ++i)
            stalks[i] = make_module(localize_ring(r23, sp23.points[i])->carrier, 1, {});
        auto cq = localize_ring(r23, sp23.points[q0])->carrier;
        for (std::size_t i = 0; i < 3; ++i)
            if (i != q0) restr[{q0, i}] = EMat{EVec{rzero(cq)}};
        auto g = make_explicit_presheaf(sp23, std::move(stalks), std::move(restr));
        AdmissibilityReport rep = check_admissible(g);
        REQUIRE(rep.verdict == Verdict::rejected);
        CHECK(sp23.points[*rep.failing_point].id == "(0)");
    }
}

TEST_CASE("structure stalks recover their base ring") {
    // finite bases split into the product of their localizations
    for (auto n : {12, 4, 9}) {
        auto rc = affine_noetherian_check(spectrum(construct_zmod(n)));
        REQUIRE(rc.ok);
    }
    auto f4 = construct_poly_quotient(2, {1, 1, 1});
    auto rcf = affine_noetherian_check(spectrum(f4));
    REQUIRE(rcf.ok);
    CHECK(find_ring_iso(rcf.limit_ring, f4).has_value());

    // semilocal bases: the limit over an open subposet is the localization
    // at the primes the subposet keeps
    auto r23 = construct_semilocal_int({2, 3});
    auto sp = spectrum(r23);
    auto whole = affine_noetherian_check(sp);
    REQUIRE(whole.ok);
    CHECK(ring_eq(whole.limit_ring, r23));

    std::size_t p0 = point_index(sp, "(0)");
    std::size_t p2 = point_index(sp, "(2)");
    SubPoset sub;
    sub.members = {std::min(p0, p2), std::max(p0, p2)};
    auto part = affine_noetherian_check(sp, sub);
    REQUIRE(part.ok);
    CHECK(ring_eq(part.limit_ring, construct_semilocal_int({2})));

    SubPoset gen_only;
    gen_only.members = {p0};
    auto at0 = affine_noetherian_check(sp, gen_only);
    REQUIRE(at0.ok);
    CHECK(is_rationals(at0.limit_ring));

    // failures carry a reason instead of throwing
    SubPoset empty;
    CHECK_FALSE(affine_noetherian_check(sp, empty).ok);
    SubPoset closed_part;
    closed_part.members = {p2};
    auto bad = affine_noetherian_check(sp, closed_part);
    CHECK_FALSE(bad.ok);
    CHECK(bad.detail == "subposet is not open");
}
