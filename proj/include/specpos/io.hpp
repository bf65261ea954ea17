#pragma once

/**
 * @file io.hpp
 * Structured-text input: rings, modules, germs, presheaves, covers and the
 * corpus manifest are all described as JSON documents. Parsing is strict;
 * every rejected document names the field that failed.
 */

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "specpos/equivalence.hpp"

namespace specpos {

using Json = nlohmann::json;

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw input_error(path + ": " + e.what());
    }
    return j;
}

namespace detail {

inline Int json_int(const Json& j, const std::string& what) {
    if (j.is_number_integer()) return Int(j.get<long long>());
    if (j.is_string()) {
        try {
            return Int(j.get<std::string>());
        } catch (const std::exception&) {
        }
    }
    throw input_error(what + " must be an integer");
}

} // namespace detail

/// Ring descriptions:
///   {"type":"zmod","n":12}
///   {"type":"poly_quotient","p":2,"modulus":[1,1,1]}
///   {"type":"product","factors":[<ring>,...]}
///   {"type":"semilocal_int","primes":[2,3]}
inline RingHandle parse_ring(const Json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw input_error("ring description needs a \"type\" field");
    std::string type = j["type"].get<std::string>();
    if (type == "zmod") {
        if (!j.contains("n")) throw input_error("zmod needs \"n\"");
        Int n = detail::json_int(j["n"], "n");
        if (n < 2) throw input_error("n must be ≥ 2");
        return construct_zmod(n);
    }
    if (type == "poly_quotient") {
        if (!j.contains("p") || !j.contains("modulus") || !j["modulus"].is_array())
            throw input_error("poly_quotient needs \"p\" and a \"modulus\" array");
        Int p = detail::json_int(j["p"], "p");
        std::vector<Int> coeffs;
        for (const auto& c : j["modulus"]) coeffs.push_back(detail::json_int(c, "modulus entry"));
        return construct_poly_quotient(p, coeffs);
    }
    if (type == "product") {
        if (!j.contains("factors") || !j["factors"].is_array())
            throw input_error("product needs a \"factors\" array");
        std::vector<RingHandle> factors;
        for (const auto& f : j["factors"]) factors.push_back(parse_ring(f));
        return construct_product(factors);
    }
    if (type == "semilocal_int") {
        if (!j.contains("primes") || !j["primes"].is_array())
            throw input_error("semilocal_int needs a \"primes\" array");
        std::vector<Int> primes;
        for (const auto& p : j["primes"]) primes.push_back(detail::json_int(p, "prime"));
        return construct_semilocal_int(primes);
    }
    throw input_error("unknown ring type \"" + type + "\"");
}

/// Element literals: integer strings for zmod (reduced into the table),
/// "a/b" fractions for semilocal_int, coefficient tuples for poly_quotient,
/// plain element indices for products.
inline RElem parse_elem(const RingHandle& r, const Json& j) {
    if (!is_finite(r)) {
        std::string s;
        if (j.is_string()) s = j.get<std::string>();
        else if (j.is_number_integer()) s = std::to_string(j.get<long long>());
        else throw input_error("semilocal element literal must be a string or integer");
        std::size_t slash = s.find('/');
        try {
            Int num(slash == std::string::npos ? s : s.substr(0, slash));
            Int den(slash == std::string::npos ? "1" : s.substr(slash + 1));
            if (den == 0) throw input_error("zero denominator in \"" + s + "\"");
            return semilocal_elem(r, Rat(num, den));
        } catch (const std::runtime_error& e) {
            throw input_error("bad element literal \"" + s + "\": " + e.what());
        }
    }
    if (j.is_array()) {
        // coefficient tuple, meaningful only for polynomial quotients
        std::vector<Int> parts;
        for (const auto& c : j) parts.push_back(detail::json_int(c, "element entry"));
        if (r->poly_p > 0) {
            Int idx = 0, powp = 1;
            for (const auto& c : parts) {
                if (c < 0 || c >= Int(r->poly_p))
                    throw input_error("coefficient out of range for " + r->desc);
                idx += c * powp;
                powp *= Int(r->poly_p);
            }
            if (idx >= Int(r->n)) throw input_error("tuple too long for " + r->desc);
            return finite_elem(r, static_cast<std::size_t>(idx));
        }
        throw input_error("tuple literal used with " + r->desc);
    }
    Int v = detail::json_int(j, "element");
    Int n(r->n);
    Int residue = ((v % n) + n) % n;
    return finite_elem(r, static_cast<std::size_t>(residue));
}

/// Module descriptions over a fixed ring:
///   {"generators": 2, "relations": [["4","0"],["0","6"]]}
inline Module parse_module(const RingHandle& r, const Json& j) {
    if (!j.is_object() || !j.contains("generators"))
        throw input_error("module description needs \"generators\"");
    Int g = detail::json_int(j["generators"], "generators");
    if (g < 0) throw input_error("generators must be ≥ 0");
    std::size_t gens = static_cast<std::size_t>(g);
    EMat relations;
    if (j.contains("relations")) {
        if (!j["relations"].is_array()) throw input_error("relations must be an array of rows");
        std::size_t row_no = 0;
        for (const auto& row : j["relations"]) {
            ++row_no;
            if (!row.is_array() || row.size() != gens)
                throw input_error("relation row " + std::to_string(row_no) + " has " +
                                  std::to_string(row.size()) + " entries, expected " +
                                  std::to_string(gens));
            EVec out;
            for (const auto& e : row) out.push_back(parse_elem(r, e));
            relations.push_back(std::move(out));
        }
    }
    return make_module(r, gens, std::move(relations));
}

/// Germ literals name a point of a localized-module presheaf and a fraction
/// of base-module coordinates: {"point":"(2)","num":["6"],"den":"1"}.
/// Returns the point index and the germ's value in that stalk.
inline std::pair<std::size_t, EVec> parse_germ(const Presheaf& g, const Json& j) {
    if (!g->structural) throw input_error("germ literals need a localized-module presheaf");
    if (!j.is_object() || !j.contains("point") || !j.contains("num"))
        throw input_error("germ literal needs \"point\" and \"num\"");
    std::size_t x = point_index(g->poset, j["point"].get<std::string>());
    const RingHandle& r = g->poset.ring;
    if (!j["num"].is_array() || j["num"].size() != g->source->gens)
        throw input_error("num must list one entry per module generator");
    EVec num;
    for (const auto& e : j["num"]) num.push_back(parse_elem(r, e));
    RElem den = j.contains("den") ? parse_elem(r, j["den"]) : rone(r);
    if (ideal_contains(r, g->poset.points[x].prime, den))
        throw input_error("denominator is not invertible at " + g->poset.points[x].id);
    return {x, germ_with_den(g->source_loc[x], num, den)};
}

/// Presheaf descriptions:
///   {"type":"specialization","module":<module>}
///   {"type":"explicit","stalks":{"(2)":<module-over-local-ring>,...},
///    "restrictions":{"(0)<(2)":[[...generator images...]]}}
inline Presheaf parse_presheaf(const SpecPoset& sp, const Json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw input_error("presheaf description needs a \"type\" field");
    std::string type = j["type"].get<std::string>();
    if (type == "specialization") {
        if (!j.contains("module")) throw input_error("specialization presheaf needs \"module\"");
        return functor_S(sp, parse_module(sp.ring, j["module"]));
    }
    if (type != "explicit") throw input_error("unknown presheaf type \"" + type + "\"");
    if (!j.contains("stalks") || !j["stalks"].is_object())
        throw input_error("explicit presheaf needs a \"stalks\" object");
    std::vector<Module> stalks(sp.points.size());
    std::vector<LocalRing> at(sp.points.size());
    std::vector<bool> given(sp.points.size(), false);
    for (std::size_t x = 0; x < sp.points.size(); ++x) at[x] = localize_ring(sp.ring, sp.points[x]);
    for (const auto& [id, desc] : j["stalks"].items()) {
        std::size_t x = point_index(sp, id);
        stalks[x] = parse_module(at[x]->carrier, desc);
        given[x] = true;
    }
    for (std::size_t x = 0; x < sp.points.size(); ++x)
        if (!given[x]) throw input_error("missing stalk for point " + sp.points[x].id);
    std::map<std::pair<std::size_t, std::size_t>, EMat> restr;
    if (j.contains("restrictions")) {
        if (!j["restrictions"].is_object())
            throw input_error("restrictions must be an object keyed \"generic<special\"");
        for (const auto& [key, mat] : j["restrictions"].items()) {
            std::size_t lt = key.find('<');
            if (lt == std::string::npos)
                throw input_error("restriction key \"" + key + "\" is not \"generic<special\"");
            std::size_t xg = point_index(sp, key.substr(0, lt));
            std::size_t xs = point_index(sp, key.substr(lt + 1));
            if (!mat.is_array())
                throw input_error("restriction \"" + key + "\" must be a matrix");
            EMat rows;
            for (const auto& row : mat) {
                if (!row.is_array() || row.size() != stalks[xg]->gens)
                    throw input_error("restriction \"" + key + "\" row has " +
                                      std::to_string(row.size()) + " entries, expected " +
                                      std::to_string(stalks[xg]->gens));
                EVec out;
                for (const auto& e : row) out.push_back(parse_elem(at[xg]->carrier, e));
                rows.push_back(std::move(out));
            }
            if (rows.size() != stalks[xs]->gens)
                throw input_error("restriction \"" + key + "\" has " +
                                  std::to_string(rows.size()) + " rows, expected " +
                                  std::to_string(stalks[xs]->gens));
            restr[{xg, xs}] = std::move(rows);
        }
    }
    return make_explicit_presheaf(sp, std::move(stalks), std::move(restr));
}

/// Cover descriptions list point ids per element:
///   {"cover":[["(0)","(2)"],["(0)","(3)"]]}
inline std::vector<SubPoset> parse_cover(const SpecPoset& sp, const Json& j) {
    if (!j.is_object() || !j.contains("cover") || !j["cover"].is_array())
        throw input_error("cover description needs a \"cover\" array");
    std::vector<SubPoset> out;
    for (const auto& part : j["cover"]) {
        if (!part.is_array()) throw input_error("each cover element must list point ids");
        SubPoset s;
        for (const auto& id : part) s.members.push_back(point_index(sp, id.get<std::string>()));
        std::sort(s.members.begin(), s.members.end());
        s.members.erase(std::unique(s.members.begin(), s.members.end()), s.members.end());
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace specpos
