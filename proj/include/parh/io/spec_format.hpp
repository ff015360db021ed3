#pragma once
// JSON spec format (see docs/spec_format.md). Rationals are "p/q" strings,
// complex numbers are a rational string (real) or a [re, im] pair.

#include "parh/filtered.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace parh::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

[[noreturn]] inline void bad(const std::string& path, const std::string& what) {
    fail("schema-violation", path + ": " + what);
}

inline const json& need(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(path, std::string("missing field '") + key + "'");
    return *it;
}

inline Rational rat(const json& j, const std::string& path) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (!j.is_string()) bad(path, "expected a rational string \"p/q\"");
    try {
        return Rational::parse(j.get<std::string>());
    } catch (const std::exception& e) {
        bad(path, e.what());
    }
}

inline ComplexQ cplx(const json& j, const std::string& path) {
    if (j.is_array()) {
        if (j.size() != 2) bad(path, "complex pair needs exactly [re, im]");
        return {rat(j[0], path + "[0]"), rat(j[1], path + "[1]")};
    }
    return rat(j, path);
}

inline int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) bad(path, "expected an integer");
    return j.get<int>();
}

inline Partition partition(const json& j, const std::string& path) {
    if (!j.is_array()) bad(path, "expected an integer array");
    Partition p;
    for (std::size_t i = 0; i < j.size(); ++i) p.push_back(integer(j[i], path + "[" + std::to_string(i) + "]"));
    return p;
}

template <class F>
auto opt(const json& j, const char* key, F&& f) -> std::optional<decltype(f(j))> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return f(*it);
}

inline json to_json(const Rational& r) { return r.str(); }
inline json to_json(const ComplexQ& c) {
    if (c.im == Rational(0)) return c.re.str();
    return json::array({c.re.str(), c.im.str()});
}

}  // namespace detail

// ------------------------------------------------------------------ parsing

inline FilteredSpec spec_from_json(const json& j, const std::string& root = "spec") {
    using namespace detail;
    FilteredSpec s;
    s.rank = integer(need(j, "rank", root), root + ".rank");
    s.lambda = opt(j, "lambda", [&](const json& x) { return cplx(x, root + ".lambda"); }).value_or(ComplexQ{});
    s.label = opt(j, "label", [](const json& x) { return x.get<std::string>(); }).value_or("");
    const json& comps = need(j, "components", root);
    if (!comps.is_array()) bad(root + ".components", "expected an array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        std::string p = root + ".components[" + std::to_string(i) + "]";
        const json& c = comps[i];
        ComponentData cd;
        cd.weights.component_id = need(c, "id", p).get<std::string>();
        cd.weights.window_anchor =
            opt(c, "window_anchor", [&](const json& x) { return rat(x, p + ".window_anchor"); }).value_or(Rational(0));
        const json& ws = need(c, "weights", p);
        if (!ws.is_array()) bad(p + ".weights", "expected an array");
        for (std::size_t k = 0; k < ws.size(); ++k) {
            std::string q = p + ".weights[" + std::to_string(k) + "]";
            cd.weights.entries.push_back({rat(need(ws[k], "weight", q), q + ".weight"), integer(need(ws[k], "mult", q), q + ".mult")});
        }
        sort_entries(cd.weights);
        if (auto it = c.find("residues"); it != c.end()) {
            if (!it->is_array()) bad(p + ".residues", "expected an array");
            for (std::size_t k = 0; k < it->size(); ++k) {
                std::string q = p + ".residues[" + std::to_string(k) + "]";
                const json& r = (*it)[k];
                ResidueDatum rd;
                rd.weight = rat(need(r, "weight", q), q + ".weight");
                rd.alpha = opt(r, "alpha", [&](const json& x) { return cplx(x, q + ".alpha"); }).value_or(ComplexQ{});
                rd.jordan = partition(need(r, "jordan", q), q + ".jordan");
                rd.character = opt(r, "character", [&](const json& x) { return integer(x, q + ".character"); });
                cd.residues.push_back(rd);
            }
        }
        s.components.push_back(std::move(cd));
    }
    if (auto it = j.find("blocks"); it != j.end()) {
        if (!it->is_array()) bad(root + ".blocks", "expected an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            std::string q = root + ".blocks[" + std::to_string(k) + "]";
            const json& b = (*it)[k];
            ModelBlock mb;
            if (auto ir = b.find("irregular"); ir != b.end()) {
                if (!ir->is_array()) bad(q + ".irregular", "expected an array");
                for (std::size_t m = 0; m < ir->size(); ++m)
                    mb.irregular.push_back(cplx((*ir)[m], q + ".irregular[" + std::to_string(m) + "]"));
            }
            const json& ws = need(b, "weights", q);
            if (!ws.is_array()) bad(q + ".weights", "expected an array");
            for (std::size_t m = 0; m < ws.size(); ++m) mb.weights.push_back(rat(ws[m], q + ".weights[" + std::to_string(m) + "]"));
            mb.alpha = opt(b, "alpha", [&](const json& x) { return cplx(x, q + ".alpha"); }).value_or(ComplexQ{});
            mb.jordan = opt(b, "jordan", [&](const json& x) { return partition(x, q + ".jordan"); }).value_or(Partition{1});
            if (auto ch = b.find("characters"); ch != b.end()) mb.characters = partition(*ch, q + ".characters");
            s.blocks.push_back(std::move(mb));
        }
    }
    // invariants are checked by the library validators; their messages name the invariant
    s = normalized(std::move(s));
    validate(s);
    return s;
}

inline IntersectionData intersection_from_json(const json& j, const std::string& root = "intersection") {
    using namespace detail;
    IntersectionData ix;
    ix.dim_X = integer(need(j, "dim_X", root), root + ".dim_X");
    if (ix.dim_X < 1) bad(root + ".dim_X", "must be >= 1");
    ix.deg_L_lattice = rat(need(j, "deg_L_lattice", root), root + ".deg_L_lattice");
    ix.ch2_lattice = opt(j, "ch2_lattice", [&](const json& x) { return rat(x, root + ".ch2_lattice"); });
    ix.c1sq_lattice = opt(j, "c1sq_lattice", [&](const json& x) { return rat(x, root + ".c1sq_lattice"); });
    const json& comps = need(j, "components", root);
    if (!comps.is_array()) bad(root + ".components", "expected an array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        std::string p = root + ".components[" + std::to_string(i) + "]";
        const json& c = comps[i];
        ComponentPairings cp;
        cp.id = need(c, "id", p).get<std::string>();
        cp.HiL = rat(need(c, "HiL", p), p + ".HiL");
        cp.HiHiL = opt(c, "HiHiL", [&](const json& x) { return rat(x, p + ".HiHiL"); });
        cp.c1H = opt(c, "c1H", [&](const json& x) { return rat(x, p + ".c1H"); });
        if (auto g = c.find("gysin"); g != c.end()) {
            if (!g->is_object()) bad(p + ".gysin", "expected an object weight -> value");
            for (auto& [k, v] : g->items()) cp.gysin[rat(json(k), p + ".gysin key")] = rat(v, p + ".gysin[" + k + "]");
        }
        ix.components.push_back(std::move(cp));
    }
    if (auto cv = j.find("curves"); cv != j.end()) {
        if (!cv->is_array()) bad(root + ".curves", "expected an array");
        for (std::size_t i = 0; i < cv->size(); ++i) {
            std::string p = root + ".curves[" + std::to_string(i) + "]";
            const json& c = (*cv)[i];
            CurveData cd;
            cd.comp_i = need(c, "comp_i", p).get<std::string>();
            cd.comp_j = need(c, "comp_j", p).get<std::string>();
            cd.CL = rat(need(c, "CL", p), p + ".CL");
            if (auto rk = c.find("ranks"); rk != c.end())
                for (std::size_t m = 0; m < rk->size(); ++m) {
                    std::string q = p + ".ranks[" + std::to_string(m) + "]";
                    const json& r = (*rk)[m];
                    cd.ranks.push_back({rat(need(r, "ci", q), q + ".ci"), rat(need(r, "cj", q), q + ".cj"),
                                        integer(need(r, "rank", q), q + ".rank")});
                }
            ix.curves.push_back(std::move(cd));
        }
    }
    if (auto bd = j.find("block_deg_L"); bd != j.end()) {
        if (!bd->is_array()) bad(root + ".block_deg_L", "expected an array of arrays");
        for (std::size_t i = 0; i < bd->size(); ++i) {
            std::vector<Rational> v;
            if (!(*bd)[i].is_array()) bad(root + ".block_deg_L[" + std::to_string(i) + "]", "expected an array");
            for (std::size_t m = 0; m < (*bd)[i].size(); ++m)
                v.push_back(rat((*bd)[i][m], root + ".block_deg_L[" + std::to_string(i) + "][" + std::to_string(m) + "]"));
            ix.block_deg_L.push_back(std::move(v));
        }
    }
    return ix;
}

struct SpecFile {
    FilteredSpec spec;
    std::optional<IntersectionData> intersection;
};

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("io-error", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        // nlohmann reports "line L, column C"
        fail("schema-violation", path + ": " + e.what());
    }
}

inline void check_version(const json& j, const std::string& path) {
    auto it = j.find("schema_version");
    if (it == j.end()) fail("schema-violation", path + ": missing field 'schema_version'");
    if (!it->is_number_integer() || it->get<int>() != kSchemaVersion)
        fail("schema-violation", path + ": schema_version " + it->dump() + " is not supported (expected " +
                                     std::to_string(kSchemaVersion) + ")");
}

inline SpecFile spec_file_from_json(const json& j, const std::string& path = "<input>") {
    if (!j.is_object()) fail("schema-violation", path + ": top level must be an object");
    check_version(j, path);
    SpecFile f;
    f.spec = spec_from_json(detail::need(j, "spec", path));
    if (auto it = j.find("intersection"); it != j.end()) f.intersection = intersection_from_json(*it);
    return f;
}

inline SpecFile parse_spec(const std::string& path) { return spec_file_from_json(load_json(path), path); }

inline IntersectionData parse_intersection(const std::string& path) {
    json j = load_json(path);
    check_version(j, path);
    return intersection_from_json(detail::need(j, "intersection", path));
}

// ---------------------------------------------------------------- writing

inline json to_json(const FilteredSpec& s) {
    using detail::to_json;
    json j;
    j["rank"] = s.rank;
    j["lambda"] = to_json(s.lambda);
    j["label"] = s.label;
    json comps = json::array();
    for (auto& c : s.components) {
        json cj;
        cj["id"] = c.weights.component_id;
        cj["window_anchor"] = to_json(c.weights.window_anchor);
        json ws = json::array();
        for (auto& e : c.weights.entries) ws.push_back({{"weight", to_json(e.weight)}, {"mult", e.mult}});
        cj["weights"] = ws;
        json rs = json::array();
        for (auto& r : c.residues) {
            json rj{{"weight", to_json(r.weight)}, {"alpha", to_json(r.alpha)}, {"jordan", r.jordan}};
            if (r.character) rj["character"] = *r.character;
            rs.push_back(rj);
        }
        cj["residues"] = rs;
        comps.push_back(cj);
    }
    j["components"] = comps;
    if (!s.blocks.empty()) {
        json bs = json::array();
        for (auto& b : s.blocks) {
            json bj;
            json ir = json::array();
            for (auto& a : b.irregular) ir.push_back(to_json(a));
            bj["irregular"] = ir;
            json w = json::array();
            for (auto& x : b.weights) w.push_back(to_json(x));
            bj["weights"] = w;
            bj["alpha"] = to_json(b.alpha);
            bj["jordan"] = b.jordan;
            if (!b.characters.empty()) bj["characters"] = b.characters;
            bs.push_back(bj);
        }
        j["blocks"] = bs;
    }
    return j;
}

inline json to_json(const IntersectionData& ix) {
    using detail::to_json;
    json j;
    j["dim_X"] = ix.dim_X;
    j["deg_L_lattice"] = to_json(ix.deg_L_lattice);
    if (ix.ch2_lattice) j["ch2_lattice"] = to_json(*ix.ch2_lattice);
    if (ix.c1sq_lattice) j["c1sq_lattice"] = to_json(*ix.c1sq_lattice);
    json comps = json::array();
    for (auto& c : ix.components) {
        json cj{{"id", c.id}, {"HiL", to_json(c.HiL)}};
        if (c.HiHiL) cj["HiHiL"] = to_json(*c.HiHiL);
        if (c.c1H) cj["c1H"] = to_json(*c.c1H);
        if (!c.gysin.empty()) {
            json g = json::object();
            for (auto& [k, v] : c.gysin) g[k.str()] = to_json(v);
            cj["gysin"] = g;
        }
        comps.push_back(cj);
    }
    j["components"] = comps;
    if (!ix.curves.empty()) {
        json cv = json::array();
        for (auto& c : ix.curves) {
            json rk = json::array();
            for (auto& r : c.ranks) rk.push_back({{"ci", to_json(r.ci)}, {"cj", to_json(r.cj)}, {"rank", r.rank}});
            cv.push_back({{"comp_i", c.comp_i}, {"comp_j", c.comp_j}, {"CL", to_json(c.CL)}, {"ranks", rk}});
        }
        j["curves"] = cv;
    }
    if (!ix.block_deg_L.empty()) {
        json bd = json::array();
        for (auto& v : ix.block_deg_L) {
            json a = json::array();
            for (auto& x : v) a.push_back(to_json(x));
            bd.push_back(a);
        }
        j["block_deg_L"] = bd;
    }
    return j;
}

inline json spec_file_json(const FilteredSpec& s, const std::optional<IntersectionData>& ix = std::nullopt) {
    json j{{"schema_version", kSchemaVersion}, {"spec", to_json(s)}};
    if (ix) j["intersection"] = to_json(*ix);
    return j;
}

inline std::string serialize_spec(const FilteredSpec& s, const std::optional<IntersectionData>& ix = std::nullopt) {
    return spec_file_json(s, ix).dump(2) + "\n";
}

}  // namespace parh::io
