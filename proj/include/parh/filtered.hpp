#pragma once
// Filtered-bundle combinatorics: specs, parabolic Chern numbers, covering
// functors, candidate-based stability and the Bogomolov-Gieseker report.

#include "parh/error.hpp"
#include "parh/rational.hpp"
#include "parh/weights.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace parh {

struct ComponentData {
    WeightSet weights;
    std::vector<ResidueDatum> residues;  // normalized: every weight covered
    friend bool operator==(const ComponentData&, const ComponentData&) = default;
};

// One elementary summand (a, alpha, f) twisted by the irregular value
// sum_j irregular[j-1] zeta^{-j}. weights[i] is the parabolic weight along
// component i; alpha, irregular and the nilpotent part live on component 0.
struct ModelBlock {
    std::vector<ComplexQ> irregular;
    std::vector<Rational> weights;
    ComplexQ alpha;
    Partition jordan{1};
    std::vector<int> characters;  // Z/e characters per component; empty when ungraded

    int dim() const { return partition_total(jordan); }
    int pole_order() const { return static_cast<int>(irregular.size()); }
    friend bool operator==(const ModelBlock&, const ModelBlock&) = default;
};

struct FilteredSpec {
    int rank = 1;
    ComplexQ lambda;
    std::vector<ComponentData> components;
    std::vector<ModelBlock> blocks;
    std::string label;
    friend bool operator==(const FilteredSpec&, const FilteredSpec&) = default;
};

struct BigradedRank {
    Rational ci, cj;
    int rank = 0;
    friend bool operator==(const BigradedRank&, const BigradedRank&) = default;
};

struct CurveData {
    std::string comp_i, comp_j;
    Rational CL;
    std::vector<BigradedRank> ranks;
    friend bool operator==(const CurveData&, const CurveData&) = default;
};

struct ComponentPairings {
    std::string id;
    Rational HiL;
    std::optional<Rational> HiHiL;
    std::map<Rational, Rational> gysin;  // weight -> gysin_c1GrL; absent weights count 0
    std::optional<Rational> c1H;         // lattice c1 . H_i . L^{n-2}
    friend bool operator==(const ComponentPairings&, const ComponentPairings&) = default;
};

struct IntersectionData {
    int dim_X = 1;
    Rational deg_L_lattice;
    std::optional<Rational> ch2_lattice;
    std::optional<Rational> c1sq_lattice;
    std::vector<ComponentPairings> components;
    std::vector<CurveData> curves;
    // per block, lattice degrees of the basis vectors (Jordan strings in
    // order, each listed top to bottom); needed for sub-object slopes
    std::vector<std::vector<Rational>> block_deg_L;
    friend bool operator==(const IntersectionData&, const IntersectionData&) = default;
};

// ---------------------------------------------------------------- validation

inline void validate(const ModelBlock& b, std::size_t ncomp) {
    if (b.jordan.empty()) fail("schema-mismatch", "block jordan type is empty");
    for (int s : b.jordan)
        if (s < 1) fail("schema-mismatch", "block jordan sizes must be >= 1");
    if (!b.irregular.empty() && b.irregular.back().is_zero())
        fail("schema-mismatch", "leading irregular coefficient must be nonzero");
    if (b.weights.size() != ncomp)
        fail("schema-mismatch", "block carries " + std::to_string(b.weights.size()) + " weights for " +
                                    std::to_string(ncomp) + " components");
    if (!b.characters.empty() && b.characters.size() != ncomp)
        fail("schema-mismatch", "block characters must be given per component");
}

inline void validate(const FilteredSpec& s) {
    if (s.rank < 1) fail("schema-mismatch", "rank must be >= 1");
    for (auto& c : s.components) {
        validate(c.weights, s.rank);
        validate_residues(c.weights, c.residues);
    }
    std::set<std::string> ids;
    for (auto& c : s.components)
        if (!ids.insert(c.weights.component_id).second)
            fail("schema-mismatch", "duplicate component id '" + c.weights.component_id + "'");
    if (!s.blocks.empty()) {
        int total = 0;
        for (auto& b : s.blocks) {
            validate(b, s.components.size());
            total += b.dim();
        }
        if (total != s.rank)
            fail("schema-mismatch", "block dimensions sum to " + std::to_string(total) + ", rank is " +
                                        std::to_string(s.rank));
        for (std::size_t i = 0; i < s.components.size(); ++i) {
            WeightSet w;
            w.window_anchor = s.components[i].weights.window_anchor;
            for (auto& b : s.blocks) add_weight(w, b.weights[i], b.dim());
            if (w.entries != s.components[i].weights.entries)
                fail("schema-mismatch", "block weights disagree with the weight set of component '" +
                                            s.components[i].weights.component_id + "'");
        }
    }
}

inline FilteredSpec normalized(FilteredSpec s) {
    for (auto& c : s.components) {
        sort_entries(c.weights);
        c.residues = normalize_residues(c.weights, c.residues);
    }
    return s;
}

inline const ComponentPairings& pairings_for(const IntersectionData& ix, const std::string& id) {
    for (auto& c : ix.components)
        if (c.id == id) return c;
    fail("schema-mismatch", "intersection data has no component '" + id + "'");
}

inline void check_components_match(const FilteredSpec& s, const IntersectionData& ix) {
    if (ix.components.size() != s.components.size())
        fail("schema-mismatch", "spec has " + std::to_string(s.components.size()) +
                                    " components, intersection data has " + std::to_string(ix.components.size()));
    for (auto& c : s.components) (void)pairings_for(ix, c.weights.component_id);
}

// ------------------------------------------------------------- Chern numbers

// sum_b b * rank Gr_b on one component
inline Rational weighted_rank(const WeightSet& w) {
    Rational t;
    for (auto& e : w.entries) t += e.weight * Rational(e.mult);
    return t;
}

inline Rational parabolic_c1_dot(const FilteredSpec& s, const IntersectionData& ix) {
    check_components_match(s, ix);
    Rational v = ix.deg_L_lattice;
    for (auto& c : s.components) v -= weighted_rank(c.weights) * pairings_for(ix, c.weights.component_id).HiL;
    return v;
}

inline Rational slope(const FilteredSpec& s, const IntersectionData& ix) {
    return parabolic_c1_dot(s, ix) / Rational(s.rank);
}

inline const ComponentData& component_by_id(const FilteredSpec& s, const std::string& id) {
    for (auto& c : s.components)
        if (c.weights.component_id == id) return c;
    fail("schema-mismatch", "spec has no component '" + id + "'");
}

inline void validate_curves(const FilteredSpec& s, const IntersectionData& ix) {
    for (auto& C : ix.curves) {
        if (C.comp_i == C.comp_j) fail("schema-mismatch", "curve must lie on two distinct components");
        auto& wi = component_by_id(s, C.comp_i).weights;
        auto& wj = component_by_id(s, C.comp_j).weights;
        std::map<Rational, int> row, col;
        for (auto& r : C.ranks) {
            if (r.rank < 0) fail("schema-mismatch", "negative bigraded rank");
            if (!wi.mult_of(r.ci) || !wj.mult_of(r.cj))
                fail("schema-mismatch", "bigraded rank at (" + r.ci.str() + "," + r.cj.str() + ") off the weight sets");
            row[r.ci] += r.rank;
            col[r.cj] += r.rank;
        }
        for (auto& e : wi.entries)
            if (row[e.weight] != e.mult)
                fail("schema-mismatch", "bigraded ranks do not sum to rank Gr_" + e.weight.str() + " on " + C.comp_i);
        for (auto& e : wj.entries)
            if (col[e.weight] != e.mult)
                fail("schema-mismatch", "bigraded ranks do not sum to rank Gr_" + e.weight.str() + " on " + C.comp_j);
    }
}

inline Rational parabolic_ch2_dot(const FilteredSpec& s, const IntersectionData& ix) {
    check_components_match(s, ix);
    if (ix.dim_X < 2) fail("dimension-too-low", "ch2 pairing needs dim_X >= 2");
    if (!ix.ch2_lattice) fail("schema-mismatch", "ch2_lattice missing");
    validate_curves(s, ix);
    Rational v = *ix.ch2_lattice;
    const Rational half(1, 2);
    for (auto& c : s.components) {
        auto& p = pairings_for(ix, c.weights.component_id);
        if (!p.HiHiL) fail("schema-mismatch", "HiHiL missing for component '" + p.id + "'");
        for (auto& e : c.weights.entries) {
            auto g = p.gysin.find(e.weight);
            if (g != p.gysin.end()) v -= e.weight * g->second;
            v += half * e.weight * e.weight * Rational(e.mult) * *p.HiHiL;
        }
    }
    // ordered pairs (i,j),(j,i) with prefactor 1/2: each curve counts once
    for (auto& C : ix.curves)
        for (auto& r : C.ranks) v += r.ci * r.cj * Rational(r.rank) * C.CL;
    return v;
}

// int c1(P_*V)^2 L^{n-2}
inline Rational parabolic_c1sq_dot(const FilteredSpec& s, const IntersectionData& ix) {
    check_components_match(s, ix);
    if (ix.dim_X < 2) fail("dimension-too-low", "c1^2 pairing needs dim_X >= 2");
    if (!ix.c1sq_lattice) fail("schema-mismatch", "c1sq_lattice missing");
    Rational v = *ix.c1sq_lattice;
    std::map<std::string, Rational> beta;
    for (auto& c : s.components) {
        auto& p = pairings_for(ix, c.weights.component_id);
        if (!p.c1H || !p.HiHiL)
            fail("schema-mismatch", "c1H / HiHiL missing for component '" + p.id + "'");
        Rational b = weighted_rank(c.weights);
        beta[p.id] = b;
        v -= Rational(2) * b * *p.c1H;
        v += b * b * *p.HiHiL;
    }
    for (auto& C : ix.curves) v += Rational(2) * beta[C.comp_i] * beta[C.comp_j] * C.CL;
    return v;
}

struct BGReport {
    Rational lhs, rhs;
    bool inequality_holds = false;
    bool vanishing_precondition = false;  // mu_L == 0 and ch2 pairing == 0
    Rational c1_dot;
};

inline BGReport bg_report(const FilteredSpec& s, const IntersectionData& ix) {
    BGReport r;
    r.lhs = parabolic_ch2_dot(s, ix);
    r.rhs = parabolic_c1sq_dot(s, ix) / Rational(2 * s.rank);
    r.inequality_holds = r.lhs <= r.rhs;
    r.c1_dot = parabolic_c1_dot(s, ix);
    r.vanishing_precondition = r.c1_dot == Rational(0) && r.lhs == Rational(0);
    return r;
}

// ---------------------------------------------------------- covering functors

namespace detail {

inline int mod_e(const Rational::Int& n, int e) {
    long long v = (n % e).convert_to<long long>();
    return static_cast<int>(v < 0 ? v + e : v);
}

// eb reduced to the window: returns (b', alpha', character)
struct Pulled {
    Rational weight;
    ComplexQ alpha;
    int character;
};

inline Pulled pull_one(const Rational& b, const ComplexQ& alpha, int e, const Rational& anchor,
                       const ComplexQ& lambda) {
    Rational::Int n;
    Rational bp = reduce_to_window(Rational(e) * b, anchor, &n);
    // b' = e b + n is carried by zeta^{-n} phi^* v
    ComplexQ ap = ComplexQ(Rational(e)) * alpha - lambda * ComplexQ(from_int(n));
    return {bp, ap, mod_e(-n, e)};
}

// inverse of pull_one given the character
inline std::pair<Rational, ComplexQ> descend_one(const Rational& bp, const ComplexQ& alpha_p, int chi, int e,
                                                 const Rational& anchor, const ComplexQ& lambda) {
    // n == -chi (mod e) with (b' - n)/e in (anchor-1, anchor]
    Rational::Int n0 = (bp - Rational(e) * anchor).ceil();
    int r = mod_e(Rational::Int(-chi) - n0, e);
    Rational::Int n = n0 + r;
    Rational b = (bp - from_int(n)) / Rational(e);
    ComplexQ a = (alpha_p + lambda * ComplexQ(from_int(n))) / Rational(e);
    return {b, a};
}

inline WeightSet weights_from_residues(const std::string& id, const Rational& anchor,
                                       const std::vector<ResidueDatum>& res) {
    WeightSet w;
    w.component_id = id;
    w.window_anchor = anchor;
    for (auto& r : res) add_weight(w, r.weight, partition_total(r.jordan));
    return w;
}

inline std::vector<ResidueDatum> merge_residues(std::vector<ResidueDatum> res) {
    std::vector<ResidueDatum> out;
    for (auto& r : res) {
        auto it = std::find_if(out.begin(), out.end(), [&](const ResidueDatum& m) {
            return m.weight == r.weight && m.alpha == r.alpha && m.character == r.character;
        });
        if (it == out.end())
            out.push_back(r);
        else
            it->jordan.insert(it->jordan.end(), r.jordan.begin(), r.jordan.end());
    }
    return out;
}

}  // namespace detail

inline FilteredSpec pullback(const FilteredSpec& s, const std::vector<int>& e) {
    if (e.size() != s.components.size()) fail("invalid-argument", "one covering degree per component");
    for (int x : e)
        if (x < 1) fail("invalid-argument", "covering degree must be >= 1");
    if (std::all_of(e.begin(), e.end(), [](int x) { return x == 1; })) return s;
    FilteredSpec out = s;
    for (std::size_t i = 0; i < s.components.size(); ++i) {
        auto& c = s.components[i];
        std::vector<ResidueDatum> res;
        for (auto& r : c.residues) {
            auto p = detail::pull_one(r.weight, r.alpha, e[i], c.weights.window_anchor, s.lambda);
            res.push_back({p.weight, p.alpha, r.jordan, p.character});
        }
        res = detail::merge_residues(std::move(res));
        out.components[i].weights = detail::weights_from_residues(c.weights.component_id, c.weights.window_anchor, res);
        out.components[i].residues = normalize_residues(out.components[i].weights, res);
    }
    for (auto& b : out.blocks) {
        std::vector<int> chars(s.components.size(), 0);
        for (std::size_t i = 0; i < s.components.size(); ++i) {
            auto p = detail::pull_one(b.weights[i], i == 0 ? b.alpha : ComplexQ{}, e[i],
                                      s.components[i].weights.window_anchor, s.lambda);
            b.weights[i] = p.weight;
            chars[i] = p.character;
            if (i == 0) b.alpha = p.alpha;
        }
        std::vector<ComplexQ> irr(b.irregular.size() * static_cast<std::size_t>(e[0]));
        for (std::size_t j = 0; j < b.irregular.size(); ++j) irr[(j + 1) * e[0] - 1] = b.irregular[j];
        b.irregular = std::move(irr);
        b.characters = chars;
    }
    out.label = s.label;
    return out;
}

inline FilteredSpec pullback(const FilteredSpec& s, int e) {
    return pullback(s, std::vector<int>(s.components.size(), e));
}

// Push-forward along zeta -> zeta^e: each graded piece v yields the pieces
// zeta^j v (j = 0..e-1) of weight (b-j)/e and character chi + j.
inline FilteredSpec pushforward_weights(const FilteredSpec& s, int e) {
    if (e < 1) fail("invalid-argument", "covering degree must be >= 1");
    if (e == 1) return s;
    FilteredSpec out;
    out.rank = s.rank * e;
    out.lambda = s.lambda;
    out.label = s.label;
    for (auto& c : s.components) {
        std::vector<ResidueDatum> res;
        for (auto& r : c.residues) {
            int chi = r.character.value_or(0);
            for (int j = 0; j < e; ++j) {
                Rational x = (r.weight - Rational(j)) / Rational(e);
                Rational::Int n;
                Rational b = reduce_to_window(x, c.weights.window_anchor, &n);
                ComplexQ a = (r.alpha + s.lambda * ComplexQ(Rational(j))) / Rational(e) -
                             s.lambda * ComplexQ(from_int(n));
                res.push_back({b, a, r.jordan, (chi + j) % e});
            }
        }
        res = detail::merge_residues(std::move(res));
        ComponentData cd;
        cd.weights = detail::weights_from_residues(c.weights.component_id, c.weights.window_anchor, res);
        cd.residues = normalize_residues(cd.weights, res);
        out.components.push_back(std::move(cd));
    }
    return out;  // block structure does not survive push-forward
}

// Character-0 part of a graded spec (weights unchanged).
inline FilteredSpec invariant_part(const FilteredSpec& s) {
    FilteredSpec out;
    out.lambda = s.lambda;
    out.label = s.label;
    out.rank = -1;
    for (auto& c : s.components) {
        std::vector<ResidueDatum> res;
        for (auto& r : c.residues) {
            if (!r.character) fail("not-equivariant", "residue datum without a character");
            if (*r.character == 0) res.push_back({r.weight, r.alpha, r.jordan, std::nullopt});
        }
        if (res.empty()) fail("not-equivariant", "no invariant part on component '" + c.weights.component_id + "'");
        ComponentData cd;
        cd.weights = detail::weights_from_residues(c.weights.component_id, c.weights.window_anchor, res);
        cd.residues = normalize_residues(cd.weights, detail::merge_residues(res));
        if (out.rank >= 0 && cd.weights.rank() != out.rank)
            fail("not-equivariant", "invariant parts have different ranks on different components");
        out.rank = cd.weights.rank();
        out.components.push_back(std::move(cd));
    }
    return out;
}

// Invariant part of the push-forward of a Z/e-graded spec on the cover.
inline FilteredSpec descent(const FilteredSpec& s, const std::vector<int>& e) {
    if (e.size() != s.components.size()) fail("invalid-argument", "one covering degree per component");
    if (std::all_of(e.begin(), e.end(), [](int x) { return x == 1; })) {
        bool graded = false;
        for (auto& c : s.components)
            for (auto& r : c.residues) graded |= r.character.has_value();
        if (!graded) return s;
    }
    FilteredSpec out = s;
    for (std::size_t i = 0; i < s.components.size(); ++i) {
        auto& c = s.components[i];
        std::vector<ResidueDatum> res;
        for (auto& r : c.residues) {
            if (!r.character) fail("not-equivariant", "component '" + c.weights.component_id + "' lacks a grading");
            if (*r.character < 0 || *r.character >= e[i])
                fail("not-equivariant", "character out of range for Z/" + std::to_string(e[i]));
            auto [b, a] = detail::descend_one(r.weight, r.alpha, *r.character, e[i], c.weights.window_anchor, s.lambda);
            res.push_back({b, a, r.jordan, std::nullopt});
        }
        res = detail::merge_residues(std::move(res));
        out.components[i].weights = detail::weights_from_residues(c.weights.component_id, c.weights.window_anchor, res);
        out.components[i].residues = normalize_residues(out.components[i].weights, res);
    }
    for (auto& b : out.blocks) {
        if (b.characters.size() != s.components.size())
            fail("not-equivariant", "block without per-component characters");
        for (std::size_t i = 0; i < s.components.size(); ++i) {
            auto [w, a] = detail::descend_one(b.weights[i], i == 0 ? b.alpha : ComplexQ{}, b.characters[i], e[i],
                                              s.components[i].weights.window_anchor, s.lambda);
            b.weights[i] = w;
            if (i == 0) b.alpha = a;
        }
        std::vector<ComplexQ> irr;
        for (std::size_t j = 0; j < b.irregular.size(); ++j) {
            if ((j + 1) % static_cast<std::size_t>(e[0]) == 0)
                irr.push_back(b.irregular[j]);
            else if (!b.irregular[j].is_zero())
                fail("not-equivariant", "irregular value is not a function of zeta^e");
        }
        b.irregular = std::move(irr);
        b.characters.clear();
    }
    return out;
}

inline FilteredSpec descent(const FilteredSpec& s, int e) {
    return descent(s, std::vector<int>(s.components.size(), e));
}

// Direct sum of two specs over the same components.
inline FilteredSpec direct_sum(const FilteredSpec& a, const FilteredSpec& b) {
    if (a.components.size() != b.components.size()) fail("schema-mismatch", "component counts differ");
    FilteredSpec s = a;
    s.rank = a.rank + b.rank;
    for (std::size_t i = 0; i < a.components.size(); ++i) {
        auto& ca = s.components[i];
        auto& cb = b.components[i];
        if (ca.weights.component_id != cb.weights.component_id || ca.weights.window_anchor != cb.weights.window_anchor)
            fail("schema-mismatch", "components differ");
        for (auto& e : cb.weights.entries) add_weight(ca.weights, e.weight, e.mult);
        auto res = ca.residues;
        res.insert(res.end(), cb.residues.begin(), cb.residues.end());
        ca.residues = normalize_residues(ca.weights, detail::merge_residues(res));
    }
    s.blocks.insert(s.blocks.end(), b.blocks.begin(), b.blocks.end());
    return s;
}

inline IntersectionData direct_sum(const IntersectionData& a, const IntersectionData& b) {
    IntersectionData x = a;
    x.deg_L_lattice = a.deg_L_lattice + b.deg_L_lattice;
    if (a.ch2_lattice && b.ch2_lattice) x.ch2_lattice = *a.ch2_lattice + *b.ch2_lattice;
    for (std::size_t i = 0; i < x.components.size(); ++i) {
        auto& bi = pairings_for(b, x.components[i].id);
        for (auto& [w, g] : bi.gysin) x.components[i].gysin[w] += g;
        if (x.components[i].c1H && bi.c1H) *x.components[i].c1H += *bi.c1H;
    }
    // curves: block-diagonal bigraded ranks
    for (auto& C : x.curves)
        for (auto& D : b.curves)
            if (C.comp_i == D.comp_i && C.comp_j == D.comp_j) {
                for (auto& r : D.ranks) {
                    auto it = std::find_if(C.ranks.begin(), C.ranks.end(),
                                           [&](const BigradedRank& q) { return q.ci == r.ci && q.cj == r.cj; });
                    if (it == C.ranks.end())
                        C.ranks.push_back(r);
                    else
                        it->rank += r.rank;
                }
            }
    x.c1sq_lattice.reset();  // not additive
    x.block_deg_L.insert(x.block_deg_L.end(), b.block_deg_L.begin(), b.block_deg_L.end());
    return x;
}

// ----------------------------------------------------------------- stability

// block index -> sub-partition (bottom t_j vectors of the j-th Jordan string)
using SubSelector = std::map<int, Partition>;

enum class Verdict { stable, semistable_not_stable, unstable, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::semistable_not_stable: return "semistable-not-stable";
        case Verdict::unstable: return "unstable";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct CandidateRow {
    SubSelector selector;
    int rank = 0;
    Rational c1;
    Rational slope;
    int cmp = 0;  // sign of slope - ambient slope
};

struct StabilityReport {
    Verdict verdict = Verdict::inconclusive;
    Rational ambient_slope;
    bool exhaustive = false;
    std::optional<std::size_t> witness;
    std::vector<CandidateRow> rows;
};

inline std::vector<Rational> block_vector_degrees(const IntersectionData& ix, const FilteredSpec& s, std::size_t b) {
    int d = s.blocks[b].dim();
    if (ix.block_deg_L.empty()) {
        if (ix.deg_L_lattice != Rational(0))
            fail("schema-mismatch", "sub-object slopes need block_deg_L when deg_L_lattice != 0");
        return std::vector<Rational>(static_cast<std::size_t>(d));
    }
    if (ix.block_deg_L.size() != s.blocks.size()) fail("schema-mismatch", "block_deg_L needs one entry per block");
    auto& v = ix.block_deg_L[b];
    if (static_cast<int>(v.size()) != d)
        fail("schema-mismatch", "block_deg_L[" + std::to_string(b) + "] needs " + std::to_string(d) + " entries");
    return v;
}

inline void validate_selector(const FilteredSpec& s, const SubSelector& sel) {
    int total = 0;
    for (auto& [b, t] : sel) {
        if (b < 0 || b >= static_cast<int>(s.blocks.size()))
            fail("invalid-candidate", "block index " + std::to_string(b) + " out of range");
        auto& J = s.blocks[static_cast<std::size_t>(b)].jordan;
        if (t.size() != J.size())
            fail("invalid-candidate", "sub-partition for block " + std::to_string(b) + " must align with its jordan type");
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (t[j] < 0 || t[j] > J[j]) fail("invalid-candidate", "sub-partition entry exceeds its Jordan string");
            total += t[j];
        }
    }
    if (total == 0) fail("invalid-candidate", "candidate selects the zero sub-object");
    if (total == s.rank) fail("invalid-candidate", "candidate is not proper");
}

// Sub-object of a block-decomposed spec with the induced filtration
// P_a V' = P_a V cap V' and its lattice data.
inline std::pair<FilteredSpec, IntersectionData> induced_subspec(const FilteredSpec& s, const IntersectionData& ix,
                                                                 const SubSelector& sel) {
    validate_selector(s, sel);
    FilteredSpec sub;
    sub.lambda = s.lambda;
    sub.label = s.label + "[sub]";
    IntersectionData six = ix;
    six.deg_L_lattice = Rational(0);
    six.block_deg_L.clear();
    six.ch2_lattice.reset();
    six.c1sq_lattice.reset();
    six.curves.clear();
    for (auto& c : six.components) {
        c.gysin.clear();
        c.c1H.reset();
    }
    int rank = 0;
    for (auto& [bi, t] : sel) {
        auto& B = s.blocks[static_cast<std::size_t>(bi)];
        auto degs = block_vector_degrees(ix, s, static_cast<std::size_t>(bi));
        ModelBlock nb = B;
        nb.jordan.clear();
        std::vector<Rational> nd;
        std::size_t off = 0;
        for (std::size_t j = 0; j < t.size(); ++j) {
            int sj = B.jordan[j];
            for (int p = sj - t[j]; p < sj; ++p) nd.push_back(degs[off + static_cast<std::size_t>(p)]);
            if (t[j] > 0) nb.jordan.push_back(t[j]);
            off += static_cast<std::size_t>(sj);
        }
        if (nb.jordan.empty()) continue;
        for (auto& d : nd) six.deg_L_lattice += d;
        six.block_deg_L.push_back(nd);
        rank += nb.dim();
        sub.blocks.push_back(std::move(nb));
    }
    sub.rank = rank;
    for (std::size_t i = 0; i < s.components.size(); ++i) {
        ComponentData cd;
        cd.weights.component_id = s.components[i].weights.component_id;
        cd.weights.window_anchor = s.components[i].weights.window_anchor;
        std::vector<ResidueDatum> res;
        for (auto& b : sub.blocks) {
            add_weight(cd.weights, b.weights[i], b.dim());
            if (i == 0) res.push_back({b.weights[0], b.alpha, b.jordan, std::nullopt});
        }
        cd.residues = normalize_residues(cd.weights, detail::merge_residues(res));
        sub.components.push_back(std::move(cd));
    }
    return {sub, six};
}

// Every block-generated candidate (product of sub-partitions), zero and full removed.
inline std::vector<SubSelector> enumerate_candidates(const FilteredSpec& s, std::size_t cap = 100000) {
    std::vector<SubSelector> out;
    std::vector<std::pair<int, std::size_t>> slots;  // (block, string)
    for (std::size_t b = 0; b < s.blocks.size(); ++b)
        for (std::size_t j = 0; j < s.blocks[b].jordan.size(); ++j) slots.push_back({static_cast<int>(b), j});
    std::vector<int> t(slots.size(), 0);
    while (true) {
        int total = 0;
        for (int x : t) total += x;
        if (total > 0 && total < s.rank) {
            SubSelector sel;
            for (std::size_t k = 0; k < slots.size(); ++k) {
                auto [b, j] = slots[k];
                auto& v = sel[b];
                v.resize(s.blocks[static_cast<std::size_t>(b)].jordan.size(), 0);
                v[j] = t[k];
            }
            for (auto it = sel.begin(); it != sel.end();) {
                bool zero = std::all_of(it->second.begin(), it->second.end(), [](int x) { return x == 0; });
                it = zero ? sel.erase(it) : std::next(it);
            }
            out.push_back(std::move(sel));
            if (out.size() > cap) fail("enumeration-too-large", "more than " + std::to_string(cap) + " candidates");
        }
        std::size_t k = 0;
        while (k < slots.size()) {
            auto [b, j] = slots[k];
            if (t[k] < s.blocks[static_cast<std::size_t>(b)].jordan[j]) {
                ++t[k];
                break;
            }
            t[k] = 0;
            ++k;
        }
        if (k == slots.size()) break;
    }
    return out;
}

inline StabilityReport stability_check(const FilteredSpec& s, const IntersectionData& ix,
                                       const std::vector<SubSelector>& candidates) {
    StabilityReport rep;
    rep.ambient_slope = slope(s, ix);
    if (s.rank == 1) {
        rep.verdict = Verdict::stable;
        rep.exhaustive = true;
        return rep;
    }
    if (candidates.empty()) fail("no-candidates", "empty candidate list");
    for (auto& sel : candidates) {
        auto [sub, six] = induced_subspec(s, ix, sel);
        CandidateRow row;
        row.selector = sel;
        row.rank = sub.rank;
        row.c1 = parabolic_c1_dot(sub, six);
        row.slope = row.c1 / Rational(sub.rank);
        row.cmp = row.slope < rep.ambient_slope ? -1 : (row.slope == rep.ambient_slope ? 0 : 1);
        rep.rows.push_back(std::move(row));
    }
    auto all = enumerate_candidates(s);
    std::set<SubSelector> given(candidates.begin(), candidates.end());
    rep.exhaustive = std::all_of(all.begin(), all.end(), [&](const SubSelector& x) { return given.count(x) > 0; });
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
        if (rep.rows[i].cmp > 0) {
            rep.verdict = Verdict::unstable;
            rep.witness = i;
            return rep;
        }
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
        if (rep.rows[i].cmp == 0 && !rep.witness) rep.witness = i;
    if (!rep.exhaustive)
        rep.verdict = Verdict::inconclusive;
    else
        rep.verdict = rep.witness ? Verdict::semistable_not_stable : Verdict::stable;
    return rep;
}

}  // namespace parh
