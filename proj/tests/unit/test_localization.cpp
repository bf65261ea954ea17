#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "oracles.hpp"
#include "specpos/localization.hpp"

using namespace specpos;

namespace {

Point point_at(const SpecPoset& p, const std::string& id) {
    return p.points[point_index(p, id)];
}

} // namespace

TEST_CASE("localizing Z/12 collapses to the local factors") {
    auto z12 = construct_zmod(12);
    auto sp = spectrum(z12);
    auto at2 = localize_ring(z12, point_at(sp, "{0,2,4,6,8,10}"));
    REQUIRE(at2->carrier->n == 4);
    check_ring_axioms(at2->carrier);
    CHECK(oracles::finite_rings_isomorphic(at2->carrier, construct_zmod(4)));

    auto at3 = localize_ring(z12, point_at(sp, "{0,3,6,9}"));
    REQUIRE(at3->carrier->n == 3);
    CHECK(oracles::finite_rings_isomorphic(at3->carrier, construct_zmod(3)));

    // localized carriers are local: a single prime
    CHECK(spectrum(at2->carrier).points.size() == 1);
    CHECK(spectrum(at3->carrier).points.size() == 1);
}

TEST_CASE("semilocal localizations are symbolic") {
    auto r = construct_semilocal_int({2, 3});
    auto sp = spectrum(r);
    auto at0 = localize_ring(r, point_at(sp, "(0)"));
    CHECK(is_rationals(at0->carrier));
    auto at2 = localize_ring(r, point_at(sp, "(2)"));
    CHECK(at2->carrier->primes == std::vector<Int>{2});
    // unique maximal point
    auto csp = spectrum(at2->carrier);
    std::size_t maximal = 0;
    for (std::size_t i = 0; i < csp.points.size(); ++i) {
        bool top = true;
        for (std::size_t j = 0; j < csp.points.size(); ++j)
            if (j != i && csp.leq[i][j]) top = false;
        if (top) ++maximal;
    }
    CHECK(maximal == 1);
}

TEST_CASE("raw germ equivalence is an equivalence relation") {
    auto z12 = construct_zmod(12);
    auto sp = spectrum(z12);
    Ideal p2 = point_at(sp, "{0,2,4,6,8,10}").prime;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < 12; ++a)
        for (std::size_t s = 0; s < 12; ++s)
            if (!ideal_contains(z12, p2, finite_elem(z12, s))) pairs.emplace_back(a, s);
    auto eq = [&](std::size_t i, std::size_t j) {
        return germ_pairs_equivalent(z12, p2, finite_elem(z12, pairs[i].first),
                                     finite_elem(z12, pairs[i].second),
                                     finite_elem(z12, pairs[j].first),
                                     finite_elem(z12, pairs[j].second));
    };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        REQUIRE(eq(i, i));
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            REQUIRE(eq(i, j) == eq(j, i));
            if (!eq(i, j)) continue;
            for (std::size_t k = 0; k < pairs.size(); ++k)
                if (eq(j, k)) REQUIRE(eq(i, k));
        }
    }
}

TEST_CASE("localizing modules") {
    auto z12 = construct_zmod(12);
    auto sp = spectrum(z12);
    auto at2 = localize_ring(z12, point_at(sp, "{0,2,4,6,8,10}"));
    auto at3 = localize_ring(z12, point_at(sp, "{0,3,6,9}"));

    auto free1 = free_module(z12, 1);
    CHECK(element_count(localize_module(free1, at2)->localized) == Int(4));
    CHECK(element_count(localize_module(free1, at3)->localized) == Int(3));

    auto mod4 = make_module(z12, 1, {{finite_elem(z12, 4)}});
    CHECK(element_count(localize_module(mod4, at2)->localized) == Int(4));
    CHECK(element_count(localize_module(mod4, at3)->localized) == Int(1)); // 4 is a unit at (3)

    CHECK(element_count(localize_module(free_module(z12, 0), at2)->localized) == Int(1));
}

TEST_CASE("germs of module elements") {
    auto z12 = construct_zmod(12);
    auto sp = spectrum(z12);
    auto free1 = free_module(z12, 1);
    auto at2 = localize_module(free1, localize_ring(z12, point_at(sp, "{0,2,4,6,8,10}")));
    auto at3 = localize_module(free1, localize_ring(z12, point_at(sp, "{0,3,6,9}")));

    EVec six = {finite_elem(z12, 6)};
    CHECK(evec_eq(at3->at->carrier, germ_of(at3, six), mzero(at3->localized)));
    EVec g6 = germ_of(at2, six);
    CHECK_FALSE(evec_eq(at2->at->carrier, g6, mzero(at2->localized)));
    // 6 ~ 2 at (2): 3 is a unit there
    CHECK(evec_eq(at2->at->carrier, g6, germ_of(at2, {finite_elem(z12, 2)})));
    // the germ has additive order 2 in a carrier isomorphic to Z/4
    EVec doubled = {radd(at2->at->carrier, g6[0], g6[0])};
    CHECK(evec_eq(at2->at->carrier, canon(at2->localized, doubled), mzero(at2->localized)));
    CHECK(evec_eq(at2->at->carrier, germ_of(at2, {finite_elem(z12, 0)}), mzero(at2->localized)));
}

TEST_CASE("germs with denominators") {
    auto z12 = construct_zmod(12);
    auto sp = spectrum(z12);
    auto free1 = free_module(z12, 1);
    auto at2 = localize_module(free1, localize_ring(z12, point_at(sp, "{0,2,4,6,8,10}")));
    EVec six = {finite_elem(z12, 6)};
    CHECK(evec_eq(at2->at->carrier, germ_with_den(at2, six, finite_elem(z12, 1)),
                  germ_of(at2, six)));
    // 6/3 = 2 at (2)
    CHECK(evec_eq(at2->at->carrier, germ_with_den(at2, six, finite_elem(z12, 3)),
                  germ_of(at2, {finite_elem(z12, 2)})));
    CHECK_THROWS_AS(germ_with_den(at2, six, finite_elem(z12, 2)), input_error);
}

TEST_CASE("transport along the specialization order") {
    auto r = construct_semilocal_int({2, 3});
    auto sp = spectrum(r);
    auto at0r = localize_ring(r, point_at(sp, "(0)"));
    auto at2r = localize_ring(r, point_at(sp, "(2)"));

    auto free1 = free_module(r, 1);
    auto m0 = localize_module(free1, at0r);
    auto m2 = localize_module(free1, at2r);
    EVec three = germ_of(m2, {semilocal_elem(r, Rat(3))});
    EVec moved = transport(m2, m0, three);
    CHECK(moved[0].frac == Rat(3));

    auto mod4 = make_module(r, 1, {{semilocal_elem(r, Rat(4))}});
    auto t2 = localize_module(mod4, at2r);
    auto t0 = localize_module(mod4, at0r);
    CHECK(element_count(t2->localized) == Int(4));
    CHECK(element_count(t0->localized) == Int(1));
    EVec one = germ_of(t2, {semilocal_elem(r, Rat(1))});
    CHECK(evec_eq(t0->at->carrier, transport(t2, t0, one), mzero(t0->localized)));

    // identity at equal points; order violations rejected
    CHECK(evec_eq(t2->at->carrier, transport(t2, t2, one), one));
    CHECK_THROWS_AS(transport(t0, t2, mzero(t0->localized)), input_error);
}

TEST_CASE("localization matrices express the maps on generators") {
    auto r = construct_semilocal_int({2, 3});
    auto sp = spectrum(r);
    auto m = make_module(r, 2,
                         {{semilocal_elem(r, Rat(4)), semilocal_elem(r, Rat(0))},
                          {semilocal_elem(r, Rat(0)), semilocal_elem(r, Rat(6))}});
    auto at2 = localize_module(m, localize_ring(r, point_at(sp, "(2)")));
    auto at0 = localize_module(m, localize_ring(r, point_at(sp, "(0)")));
    EMat rows = localization_matrix(at2, at0);
    REQUIRE(rows.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        EVec gen = mzero(at2->localized);
        gen[j] = rone(at2->at->carrier);
        CHECK(evec_eq(at0->at->carrier, transport(at2, at0, gen), canon(at0->localized, rows[j])));
    }
}

TEST_CASE("functoriality of transport on the corpus chains") {
    auto r = construct_semilocal_int({2, 3});
    auto sp = spectrum(r);
    auto m = make_module(r, 2,
                         {{semilocal_elem(r, Rat(4)), semilocal_elem(r, Rat(0))},
                          {semilocal_elem(r, Rat(0)), semilocal_elem(r, Rat(6))}});
    std::vector<LocalModule> locs;
    for (const auto& pt : sp.points) locs.push_back(localize_module(m, localize_ring(r, pt)));
    for (std::size_t x = 0; x < sp.points.size(); ++x)
        for (std::size_t y = 0; y < sp.points.size(); ++y) {
            if (!sp.leq[x][y]) continue;
            for (std::size_t z = 0; z < sp.points.size(); ++z) {
                if (!sp.leq[y][z]) continue;
                for (std::size_t j = 0; j < m->gens; ++j) {
                    EVec gen = mzero(locs[z]->localized);
                    gen[j] = rone(locs[z]->at->carrier);
                    EVec via = transport(locs[y], locs[x], transport(locs[z], locs[y], gen));
                    EVec direct = transport(locs[z], locs[x], gen);
                    CHECK(evec_eq(locs[x]->at->carrier, via, direct));
                }
            }
        }
}
