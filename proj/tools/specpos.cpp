// Command-line front end: spectrum reports, associated primes, limits, the
// verification suite, admissibility checks, and the corpus runner. All
// output is deterministic byte for byte; timings go to stderr only.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specpos/specpos.hpp"

namespace {

using namespace specpos;

struct Options {
    std::size_t max_carrier = 4096;
    bool json = false;
};

std::string evec_str(const RingHandle& r, const EVec& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += elem_str(r, v[i]);
    }
    return out + ")";
}

std::string factors_str(const std::vector<Int>& ds) {
    std::string out = "(";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (i) out += ", ";
        out += ds[i].str();
    }
    return out + ")";
}

RingHandle load_ring(const std::string& path, const Options& opt) {
    RingHandle r = parse_ring(load_json_file(path));
    if (is_finite(r) && r->n > opt.max_carrier)
        throw input_error(r->desc + " exceeds --max-carrier " +
                          std::to_string(opt.max_carrier));
    return r;
}

Json module_json(const RingHandle& r, const Module& m) {
    Json j;
    j["generators"] = m->gens;
    Json rel = Json::array();
    for (const auto& row : m->relations) {
        Json jr = Json::array();
        for (const auto& e : row) jr.push_back(elem_str(r, e));
        rel.push_back(jr);
    }
    j["relations"] = rel;
    return j;
}

int cmd_spec(const std::string& ring_path, bool dot, bool stalks, const Options& opt) {
    RingHandle r = load_ring(ring_path, opt);
    SpecPoset sp = spectrum(r);
    auto edges = hasse_edges(sp);
    std::vector<std::string> stalk_desc;
    if (stalks)
        for (const auto& pt : sp.points)
            stalk_desc.push_back(localize_ring(r, pt)->carrier->desc);
    if (opt.json) {
        Json j;
        Json pts = Json::array();
        for (std::size_t i = 0; i < sp.points.size(); ++i) {
            Json p;
            p["id"] = sp.points[i].id;
            if (stalks) p["stalk"] = stalk_desc[i];
            pts.push_back(p);
        }
        Json es = Json::array();
        for (const auto& [a, b] : edges)
            es.push_back(Json::array({sp.points[a].id, sp.points[b].id}));
        j["points"] = pts;
        j["edges"] = es;
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    if (dot) {
        std::cout << "digraph spec {\n";
        for (std::size_t i = 0; i < sp.points.size(); ++i) {
            std::cout << "  \"" << sp.points[i].id << "\"";
            if (stalks) std::cout << " [label=\"" << sp.points[i].id << "\\n" << stalk_desc[i] << "\"]";
            std::cout << ";\n";
        }
        for (const auto& [a, b] : edges)
            std::cout << "  \"" << sp.points[a].id << "\" -> \"" << sp.points[b].id << "\";\n";
        std::cout << "}\n";
        return 0;
    }
    for (std::size_t i = 0; i < sp.points.size(); ++i) {
        std::cout << sp.points[i].id;
        if (stalks) std::cout << " [" << stalk_desc[i] << "]";
        std::cout << "\n";
    }
    for (const auto& [a, b] : edges)
        std::cout << sp.points[a].id << " < " << sp.points[b].id << "\n";
    return 0;
}

int cmd_ass(const std::string& ring_path, const std::string& module_path, const Options& opt) {
    RingHandle r = load_ring(ring_path, opt);
    SpecPoset sp = spectrum(r);
    Module m = parse_module(r, load_json_file(module_path));
    AssSet ass = associated_primes(sp, m);
    if (opt.json) {
        Json j;
        Json arr = Json::array();
        for (std::size_t k = 0; k < ass.points.size(); ++k) {
            Json e;
            e["point"] = sp.points[ass.points[k]].id;
            Json w = Json::array();
            for (const auto& c : ass.witnesses[k]) w.push_back(elem_str(r, c));
            e["witness"] = w;
            arr.push_back(e);
        }
        j["associated"] = arr;
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    for (std::size_t k = 0; k < ass.points.size(); ++k)
        std::cout << sp.points[ass.points[k]].id << " witness "
                  << evec_str(r, ass.witnesses[k]) << "\n";
    return 0;
}

int cmd_limit(const std::string& ring_path, const std::string& presheaf_path,
              const Options& opt) {
    RingHandle r = load_ring(ring_path, opt);
    SpecPoset sp = spectrum(r);
    Presheaf g = parse_presheaf(sp, load_json_file(presheaf_path));
    LimitModule lim = inverse_limit(g, whole_poset(sp));
    const Module& pres = lim->presented;
    if (opt.json) {
        Json j;
        j["ring"] = lim->ring->desc;
        if (is_finite(lim->ring)) {
            j["elements"] = element_count(pres)->str();
            j["presentation"] = module_json(lim->ring, pres);
        } else {
            Json inv = Json::array();
            for (const auto& d : pres->smith.invariant_factors) inv.push_back(d.str());
            j["invariant_factors"] = inv;
            j["free_rank"] = pres->smith.free_rank;
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "ring " << lim->ring->desc << "\n";
    if (is_finite(lim->ring)) {
        std::cout << "elements " << element_count(pres)->str() << "\n";
        std::cout << "generators " << pres->gens << "\n";
        for (const auto& row : pres->relations)
            std::cout << "relation " << evec_str(lim->ring, row) << "\n";
    } else {
        std::cout << "invariant factors " << factors_str(pres->smith.invariant_factors) << "\n";
        std::cout << "free rank " << pres->smith.free_rank << "\n";
    }
    return 0;
}

int cmd_verify_key_lemma(const std::string& ring_path, const std::string& module_path,
                         const Options& opt) {
    RingHandle r = load_ring(ring_path, opt);
    Module m = parse_module(r, load_json_file(module_path));
    KeyLemmaWitness w = verify_key_lemma(m);
    if (opt.json) {
        Json j;
        j["status"] = "PASS";
        j["points"] = w.lim->over.members.size();
        if (is_finite(r)) j["elements"] = element_count(m)->str();
        else {
            Json inv = Json::array();
            for (const auto& d : m->smith.invariant_factors) inv.push_back(d.str());
            j["invariant_factors"] = inv;
            j["free_rank"] = m->smith.free_rank;
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "PASS key lemma: module";
    if (is_finite(r)) std::cout << " with " << element_count(m)->str() << " elements";
    else
        std::cout << " with invariant factors " << factors_str(m->smith.invariant_factors)
                  << " and free rank " << m->smith.free_rank;
    std::cout << " identified with its limit over " << w.lim->over.members.size()
              << " points\n";
    return 0;
}

int cmd_verify_full_faithful(const std::string& ring_path, const std::string& m_path,
                             const std::string& n_path, const Options& opt) {
    RingHandle r = load_ring(ring_path, opt);
    Module m = parse_module(r, load_json_file(m_path));
    Module n = parse_module(r, load_json_file(n_path));
    HomBijection hb = verify_fully_faithful(m, n);
    if (opt.json) {
        Json j;
        j["status"] = "PASS";
        j["finite"] = hb.finite;
        if (hb.finite) {
            j["module_maps"] = hb.module_homs.str();
            j["presheaf_morphisms"] = hb.presheaf_homs.str();
        } else {
            Json inv = Json::array();
            for (const auto& d : hb.invariant_factors) inv.push_back(d.str());
            j["invariant_factors"] = inv;
            j["free_rank"] = hb.free_rank;
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    if (hb.finite) {
        std::cout << "module maps " << hb.module_homs.str() << "\n";
        std::cout << "presheaf morphisms " << hb.presheaf_homs.str() << "\n";
    } else {
        std::cout << "hom module invariant factors " << factors_str(hb.invariant_factors)
                  << " free rank " << hb.free_rank << "\n";
    }
    std::cout << "PASS\n";
    return 0;
}

int cmd_verify_affine(const std::string& ring_path, const Options& opt) {
    RingHandle r = load_ring(ring_path, opt);
    SpecPoset sp = spectrum(r);
    RingedPosetCheck rc = affine_noetherian_check(sp);
    if (!rc.ok) throw invariant_violation("affine noetherian check failed: " + rc.detail);
    if (opt.json) {
        Json j;
        j["status"] = "PASS";
        j["limit_ring"] = rc.limit_ring->desc;
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "PASS affine noetherian: limit ring " << rc.limit_ring->desc << "\n";
    return 0;
}

std::string verdict_str(const SpecPoset& sp, const AdmissibilityReport& rep) {
    switch (rep.verdict) {
        case Verdict::admissible: return "ADMISSIBLE";
        case Verdict::quasi_admissible_only: return "QUASI_ONLY";
        default: break;
    }
    std::string out = "REJECTED";
    if (rep.failing_point) out += " " + sp.points[*rep.failing_point].id;
    return out;
}

int cmd_check_admissible(const std::string& ring_path, const std::string& presheaf_path,
                         const std::string& cover_path, const Options& opt) {
    RingHandle r = load_ring(ring_path, opt);
    SpecPoset sp = spectrum(r);
    Presheaf g = parse_presheaf(sp, load_json_file(presheaf_path));
    AdmissibilityReport rep =
        cover_path.empty()
            ? check_admissible(g)
            : check_admissible(g, parse_cover(sp, load_json_file(cover_path)));
    if (opt.json) {
        Json j;
        j["verdict"] = verdict_str(sp, rep);
        if (rep.failing_point) j["failing_point"] = sp.points[*rep.failing_point].id;
        if (rep.verdict == Verdict::admissible) {
            Json lims = Json::array();
            for (const auto& lim : rep.limits) {
                Json l;
                l["ring"] = lim->ring->desc;
                l["presentation"] = module_json(lim->ring, lim->presented);
                lims.push_back(l);
            }
            j["limits"] = lims;
        }
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << verdict_str(sp, rep) << "\n";
    }
    return rep.verdict == Verdict::admissible ? 0 : 1;
}

int cmd_run_corpus(const std::string& manifest_path, const Options& opt) {
    Json manifest = load_json_file(manifest_path);
    std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    auto resolve = [&](const Json& j, const char* field) {
        if (!j.contains(field) || !j[field].is_string())
            throw input_error(std::string("manifest check needs \"") + field + "\"");
        return (base / j[field].get<std::string>()).string();
    };
    if (!manifest.is_object() || !manifest.contains("checks") || !manifest["checks"].is_array())
        throw input_error("manifest needs a \"checks\" array");
    const Json& checks = manifest["checks"];
    if (checks.empty()) {
        std::cerr << "warning: empty manifest, nothing checked\n";
        std::cout << "passed 0/0\n";
        return 0;
    }
    std::size_t pass = 0, idx = 0;
    bool mismatch = false;
    for (const auto& c : checks) {
        ++idx;
        std::string name = c.contains("name") ? c["name"].get<std::string>()
                                              : "check-" + std::to_string(idx);
        std::string kind = c.contains("kind") ? c["kind"].get<std::string>() : "";
        std::string expect = c.contains("expect") ? c["expect"].get<std::string>() : "PASS";
        auto t0 = std::chrono::steady_clock::now();
        std::string got;
        if (kind == "key-lemma") {
            RingHandle r = load_ring(resolve(c, "ring"), opt);
            Module m = parse_module(r, load_json_file(resolve(c, "module")));
            verify_key_lemma(m);
            got = "PASS";
        } else if (kind == "full-faithful") {
            RingHandle r = load_ring(resolve(c, "ring"), opt);
            Module m = parse_module(r, load_json_file(resolve(c, "module")));
            Module n = parse_module(r, load_json_file(resolve(c, "module2")));
            verify_fully_faithful(m, n);
            got = "PASS";
        } else if (kind == "admissible") {
            RingHandle r = load_ring(resolve(c, "ring"), opt);
            SpecPoset sp = spectrum(r);
            Presheaf g = parse_presheaf(sp, load_json_file(resolve(c, "presheaf")));
            AdmissibilityReport rep =
                c.contains("cover")
                    ? check_admissible(g, parse_cover(sp, load_json_file(resolve(c, "cover"))))
                    : check_admissible(g);
            got = verdict_str(sp, rep);
        } else if (kind == "affine-noetherian") {
            RingHandle r = load_ring(resolve(c, "ring"), opt);
            RingedPosetCheck rc = affine_noetherian_check(spectrum(r));
            got = rc.ok ? "PASS" : "FAIL " + rc.detail;
        } else {
            throw input_error("unknown check kind \"" + kind + "\" in manifest");
        }
        auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        std::cerr << "# " << name << " " << us << "us\n";
        if (got == expect) {
            ++pass;
            std::cout << "PASS " << name << " " << got << "\n";
        } else {
            mismatch = true;
            std::cout << "FAIL " << name << " expected " << expect << " got " << got << "\n";
        }
    }
    std::cout << "passed " << pass << "/" << checks.size() << "\n";
    return mismatch ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification tool for modules over small commutative rings and their stalk presheaves"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--max-carrier", opt.max_carrier, "largest allowed finite carrier")
        ->default_val(4096);
    app.add_flag("--json", opt.json, "machine-readable output");

    std::string ring_path, module_path, module2_path, presheaf_path, cover_path, manifest_path;
    bool dot = false, stalks = false;

    auto* spec_cmd = app.add_subcommand("spec", "print the prime poset of a ring");
    spec_cmd->fallthrough();
    spec_cmd->add_option("ring", ring_path, "ring description file")->required();
    spec_cmd->add_flag("--dot", dot, "emit a DOT digraph");
    spec_cmd->add_flag("--stalks", stalks, "annotate points with their stalk rings");

    auto* ass_cmd = app.add_subcommand("ass", "print the associated points of a module");
    ass_cmd->fallthrough();
    ass_cmd->add_option("ring", ring_path, "ring description file")->required();
    ass_cmd->add_option("module", module_path, "module description file")->required();

    auto* limit_cmd = app.add_subcommand("limit", "compute the limit of a presheaf");
    limit_cmd->fallthrough();
    limit_cmd->add_option("ring", ring_path, "ring description file")->required();
    limit_cmd->add_option("presheaf", presheaf_path, "presheaf description file")->required();

    auto* verify = app.add_subcommand("verify", "run a verification");
    verify->require_subcommand(1);
    verify->fallthrough();
    auto* vkl = verify->add_subcommand("key-lemma", "module vs limit of its localizations");
    vkl->fallthrough();
    vkl->add_option("ring", ring_path, "ring description file")->required();
    vkl->add_option("module", module_path, "module description file")->required();
    auto* vff = verify->add_subcommand("full-faithful", "module maps vs presheaf morphisms");
    vff->fallthrough();
    vff->add_option("ring", ring_path, "ring description file")->required();
    vff->add_option("moduleM", module_path, "source module file")->required();
    vff->add_option("moduleN", module2_path, "target module file")->required();
    auto* van = verify->add_subcommand("affine-noetherian", "structure stalks vs base ring");
    van->fallthrough();
    van->add_option("ring", ring_path, "ring description file")->required();

    auto* check = app.add_subcommand("check", "decide a property");
    check->require_subcommand(1);
    check->fallthrough();
    auto* adm = check->add_subcommand("admissible", "is the presheaf recovered by its limit");
    adm->fallthrough();
    adm->add_option("ring", ring_path, "ring description file")->required();
    adm->add_option("presheaf", presheaf_path, "presheaf description file")->required();
    adm->add_option("--cover", cover_path, "open cover description file");

    auto* corpus = app.add_subcommand("run-corpus", "run a manifest of checks");
    corpus->fallthrough();
    corpus->add_option("manifest", manifest_path, "manifest file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (spec_cmd->parsed()) return cmd_spec(ring_path, dot, stalks, opt);
        if (ass_cmd->parsed()) return cmd_ass(ring_path, module_path, opt);
        if (limit_cmd->parsed()) return cmd_limit(ring_path, presheaf_path, opt);
        if (verify->parsed()) {
            if (vkl->parsed()) return cmd_verify_key_lemma(ring_path, module_path, opt);
            if (vff->parsed())
                return cmd_verify_full_faithful(ring_path, module_path, module2_path, opt);
            if (van->parsed()) return cmd_verify_affine(ring_path, opt);
        }
        if (check->parsed() && adm->parsed())
            return cmd_check_admissible(ring_path, presheaf_path, cover_path, opt);
        if (corpus->parsed()) return cmd_run_corpus(manifest_path, opt);
    } catch (const invariant_violation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const unsupported_error& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
