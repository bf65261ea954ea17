#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "specpos/equivalence.hpp"
#include "specpos/io.hpp"

using namespace specpos;
using Catch::Matchers::ContainsSubstring;

namespace {

Json J(const std::string& text) { return Json::parse(text); }

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p;
}

} // namespace

TEST_CASE("ring descriptions parse into live handles") {
    auto z12 = parse_ring(J(R"js({"type":"zmod","n":12})js"));
    CHECK(z12->n == 12);
    CHECK(z12->desc == "Z/12");

    auto f4 = parse_ring(J(R"js({"type":"poly_quotient","p":2,"modulus":[1,1,1]})js"));
    CHECK(f4->n == 4);
    CHECK(f4->poly_p == 2);

    auto prod = parse_ring(
        J(R"js({"type":"product","factors":[{"type":"zmod","n":2},{"type":"zmod","n":3}]})js"));
    CHECK(prod->n == 6);
    CHECK(prod->desc == "Z/2 x Z/3");

    auto zl = parse_ring(J(R"js({"type":"semilocal_int","primes":[2,3]})js"));
    CHECK_FALSE(is_finite(zl));
    CHECK(zl->primes == std::vector<Int>{2, 3});

    CHECK_THROWS_WITH(parse_ring(J(R"js({"type":"zmod","n":1})js")),
                      ContainsSubstring("n must be ≥ 2"));
    CHECK_THROWS_AS(parse_ring(J(R"js({"type":"field_of_one"})js")), input_error);
    CHECK_THROWS_AS(parse_ring(J(R"js({"n":5})js")), input_error);
}

TEST_CASE("element literals cover every backend") {
    auto z12 = construct_zmod(12);
    CHECK(parse_elem(z12, J("7")).idx == 7);
    CHECK(parse_elem(z12, J("-1")).idx == 11);
    CHECK(parse_elem(z12, J(R"js("15")js")).idx == 3);
    CHECK_THROWS_WITH(parse_elem(z12, J("[1,1]")), ContainsSubstring("tuple literal"));

    auto f4 = construct_poly_quotient(2, {1, 1, 1});
    CHECK(parse_elem(f4, J("[1,1]")).idx == 3);
    CHECK(parse_elem(f4, J("[0,1]")).idx == 2);
    CHECK_THROWS_WITH(parse_elem(f4, J("[2,0]")), ContainsSubstring("out of range"));

    auto zl2 = construct_semilocal_int({2});
    CHECK(parse_elem(zl2, J(R"js("3/5")js")).frac == Rat(3, 5));
    CHECK(parse_elem(zl2, J("4")).frac == Rat(4, 1));
    CHECK_THROWS_WITH(parse_elem(zl2, J(R"js("1/0")js")), ContainsSubstring("zero denominator"));
    CHECK_THROWS_AS(parse_elem(zl2, J(R"js("1/2")js")), input_error);
}

TEST_CASE("module descriptions parse and validate row shapes") {
    auto z12 = construct_zmod(12);
    auto m = parse_module(z12, J(R"js({"generators":2,"relations":[["4","0"],["0","6"]]})js"));
    CHECK(m->gens == 2);
    CHECK(m->relations.size() == 2);
    CHECK(element_count(m) == 24);

    CHECK_THROWS_WITH(parse_module(z12, J(R"js({"generators":2,"relations":[["4"]]})js")),
                      ContainsSubstring("relation row 1 has 1 entries, expected 2"));
    CHECK_THROWS_WITH(parse_module(z12, J(R"js({"relations":[]})js")),
                      ContainsSubstring("generators"));

    auto zl = construct_semilocal_int({2, 3});
    auto t = parse_module(zl, J(R"js({"generators":1,"relations":[["12"]]})js"));
    CHECK(t->gens == 1);
    CHECK(t->relations[0][0].frac == Rat(12, 1));
}

TEST_CASE("germ literals name a point and a fraction") {
    auto zl = construct_semilocal_int({2, 3});
    auto sp = spectrum(zl);
    auto g = functor_S(sp, make_module(zl, 1, {}));

    auto [x, val] = parse_germ(g, J(R"js({"point":"(2)","num":["6"],"den":"1"})js"));
    CHECK(sp.points[x].id == "(2)");
    EVec six{semilocal_elem(zl, Rat(6, 1))};
    const RingHandle& cx = g->stalks[x].at->carrier;
    CHECK(evec_eq(cx, val, germ_with_den(g->source_loc[x], six, rone(zl))));

    auto [y, dval] = parse_germ(g, J(R"js({"point":"(2)","num":["6"],"den":"3"})js"));
    CHECK(evec_eq(cx, dval, germ_with_den(g->source_loc[y], six, semilocal_elem(zl, Rat(3, 1)))));
    CHECK_FALSE(evec_eq(cx, dval, val));

    auto [z, nval] = parse_germ(g, J(R"js({"point":"(0)","num":["6"]})js"));
    CHECK(sp.points[z].id == "(0)");
    CHECK(evec_eq(g->stalks[z].at->carrier, nval, germ_with_den(g->source_loc[z], six, rone(zl))));

    CHECK_THROWS_WITH(parse_germ(g, J(R"js({"point":"(2)","num":["6"],"den":"2"})js")),
                      ContainsSubstring("not invertible at (2)"));
    CHECK_THROWS_WITH(parse_germ(g, J(R"js({"point":"(2)","num":["6","0"]})js")),
                      ContainsSubstring("one entry per module generator"));
    CHECK_THROWS_AS(parse_germ(g, J(R"js({"num":["6"]})js")), input_error);

    auto expl = parse_presheaf(sp, J(R"js({
        "type":"explicit",
        "stalks":{"(0)":{"generators":1},"(2)":{"generators":1},"(3)":{"generators":1}},
        "restrictions":{"(0)<(2)":[["1"]],"(0)<(3)":[["1"]]}})js"));
    CHECK_THROWS_WITH(parse_germ(expl, J(R"js({"point":"(2)","num":["1"]})js")),
                      ContainsSubstring("localized-module presheaf"));
}

TEST_CASE("presheaf descriptions build stalks and restrictions") {
    auto zl2 = construct_semilocal_int({2});
    auto sp = spectrum(zl2);

    auto s = parse_presheaf(
        sp, J(R"js({"type":"specialization","module":{"generators":1,"relations":[["4"]]}})js"));
    CHECK(s->structural);
    CHECK(s->stalks.size() == 2);

    auto sky = parse_presheaf(sp, J(R"js({
        "type":"explicit",
        "stalks":{"(2)":{"generators":1,"relations":[["2"]]},"(0)":{"generators":0}},
        "restrictions":{"(0)<(2)":[[]]}})js"));
    CHECK_FALSE(sky->structural);
    std::size_t closed = point_index(sp, "(2)");
    std::size_t generic = point_index(sp, "(0)");
    CHECK(sky->stalks[closed].mod->gens == 1);
    CHECK(sky->stalks[generic].mod->gens == 0);

    CHECK_THROWS_WITH(
        parse_presheaf(sp, J(R"js({"type":"explicit","stalks":{"(2)":{"generators":1}}})js")),
        ContainsSubstring("missing stalk for point (0)"));
    CHECK_THROWS_WITH(
        parse_presheaf(sp, J(R"js({
            "type":"explicit",
            "stalks":{"(2)":{"generators":1},"(0)":{"generators":1}},
            "restrictions":{"(0)(2)":[["1"]]}})js")),
        ContainsSubstring("generic<special"));
    CHECK_THROWS_WITH(
        parse_presheaf(sp, J(R"js({
            "type":"explicit",
            "stalks":{"(2)":{"generators":1},"(0)":{"generators":1}},
            "restrictions":{"(0)<(2)":[["1"],["0"]]}})js")),
        ContainsSubstring("has 2 rows, expected 1"));
    CHECK_THROWS_AS(parse_presheaf(sp, J(R"js({"type":"sheafy"})js")), input_error);
}

TEST_CASE("cover descriptions resolve point ids") {
    auto zl = construct_semilocal_int({2, 3});
    auto sp = spectrum(zl);

    auto cov = parse_cover(sp, J(R"js({"cover":[["(0)","(2)"],["(0)","(3)","(3)"]]})js"));
    REQUIRE(cov.size() == 2);
    CHECK(cov[0].members.size() == 2);
    CHECK(cov[1].members.size() == 2);
    CHECK(std::is_sorted(cov[1].members.begin(), cov[1].members.end()));

    CHECK_THROWS_AS(parse_cover(sp, J(R"js({"cover":[["(7)"]]})js")), input_error);
    CHECK_THROWS_AS(parse_cover(sp, J(R"js({"pieces":[]})js")), input_error);
}

TEST_CASE("json files load with path-tagged diagnostics") {
    auto good = write_temp("specpos_io_good.json", R"js({"type":"zmod","n":9})js");
    auto ring = parse_ring(load_json_file(good.string()));
    CHECK(ring->n == 9);
    std::filesystem::remove(good);

    CHECK_THROWS_WITH(load_json_file("/nonexistent/specpos.json"),
                      ContainsSubstring("cannot open /nonexistent/specpos.json"));

    auto bad = write_temp("specpos_io_bad.json", "{\"type\": ");
    CHECK_THROWS_WITH(load_json_file(bad.string()), ContainsSubstring("specpos_io_bad.json"));
    std::filesystem::remove(bad);
}
