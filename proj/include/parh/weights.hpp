#pragma once
// Parabolic weight sets and the combinatorics around them: 1/e-extended
// lattices, gaps, generic points, sl2 weight filtrations and the two
// epsilon-perturbation schemes.

#include "parh/error.hpp"
#include "parh/rational.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace parh {

using Partition = std::vector<int>;

struct WeightEntry {
    Rational weight;
    int mult = 1;
    friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

struct WeightSet {
    std::string component_id;
    std::vector<WeightEntry> entries;  // kept sorted by weight
    Rational window_anchor{0};

    int rank() const {
        int r = 0;
        for (auto& e : entries) r += e.mult;
        return r;
    }
    std::optional<int> mult_of(const Rational& b) const {
        for (auto& e : entries)
            if (e.weight == b) return e.mult;
        return std::nullopt;
    }
    friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

struct ResidueDatum {
    Rational weight;
    ComplexQ alpha;
    Partition jordan;
    // character of the Z/e action on this piece; present only on graded specs
    std::optional<int> character;
    friend bool operator==(const ResidueDatum&, const ResidueDatum&) = default;
};

inline int partition_total(const Partition& p) {
    int s = 0;
    for (int x : p) s += x;
    return s;
}

// x reduced into (a-1, a] by an integer shift; the shift n (x' = x + n) is
// returned through *shift when requested.
inline Rational reduce_to_window(const Rational& x, const Rational& a, Rational::Int* shift = nullptr) {
    Rational::Int n = (a - x).floor();
    if (shift) *shift = n;
    return x + from_int(n);
}

inline bool in_window(const Rational& x, const Rational& a) {
    return x > a - Rational(1) && x <= a;
}

inline void sort_entries(WeightSet& w) {
    std::sort(w.entries.begin(), w.entries.end(),
              [](const WeightEntry& x, const WeightEntry& y) { return x.weight < y.weight; });
}

// Adds mult to weight b, merging equal weights.
inline void add_weight(WeightSet& w, const Rational& b, int mult) {
    for (auto& e : w.entries)
        if (e.weight == b) {
            e.mult += mult;
            return;
        }
    w.entries.push_back({b, mult});
    sort_entries(w);
}

inline void validate(const WeightSet& w, std::optional<int> rank = std::nullopt) {
    if (w.entries.empty()) fail("schema-mismatch", "component '" + w.component_id + "' has no weights");
    std::set<std::string> seen;
    for (auto& e : w.entries) {
        if (e.mult < 1)
            fail("schema-mismatch", "multiplicity must be >= 1 (weight " + e.weight.str() + ")");
        if (!in_window(e.weight, w.window_anchor))
            fail("schema-mismatch", "weight " + e.weight.str() + " outside window (" +
                                        (w.window_anchor - Rational(1)).str() + ", " + w.window_anchor.str() + "]");
        if (!seen.insert(e.weight.str()).second)
            fail("schema-mismatch", "weights must be pairwise distinct (" + e.weight.str() + ")");
    }
    if (rank && w.rank() != *rank)
        fail("schema-mismatch", "multiplicities of component '" + w.component_id + "' sum to " +
                                    std::to_string(w.rank()) + ", expected rank " + std::to_string(*rank));
}

inline void validate_residues(const WeightSet& w, const std::vector<ResidueDatum>& res) {
    std::map<std::string, int> total;
    for (auto& r : res) {
        if (r.jordan.empty()) fail("schema-mismatch", "empty jordan type at weight " + r.weight.str());
        for (int s : r.jordan)
            if (s < 1) fail("schema-mismatch", "jordan block sizes must be >= 1");
        if (!w.mult_of(r.weight))
            fail("schema-mismatch", "residue datum at weight " + r.weight.str() + " which is not in the weight set");
        total[r.weight.str()] += partition_total(r.jordan);
    }
    for (auto& e : w.entries) {
        auto it = total.find(e.weight.str());
        if (it == total.end()) continue;  // filled with defaults by normalize_residues
        if (it->second != e.mult)
            fail("schema-mismatch", "jordan type sizes at weight " + e.weight.str() + " sum to " +
                                        std::to_string(it->second) + ", multiplicity is " + std::to_string(e.mult));
    }
}

// Weights without residue data get alpha = 0 and a zero nilpotent part.
inline std::vector<ResidueDatum> normalize_residues(const WeightSet& w, std::vector<ResidueDatum> res) {
    for (auto& e : w.entries) {
        bool has = std::any_of(res.begin(), res.end(), [&](const ResidueDatum& r) { return r.weight == e.weight; });
        if (!has) res.push_back({e.weight, ComplexQ{}, Partition(static_cast<std::size_t>(e.mult), 1), std::nullopt});
    }
    std::vector<ResidueDatum> merged;
    for (auto& r : res) {
        auto it = std::find_if(merged.begin(), merged.end(), [&](const ResidueDatum& m) {
            return m.weight == r.weight && m.alpha == r.alpha && m.character == r.character;
        });
        if (it == merged.end())
            merged.push_back(r);
        else
            it->jordan.insert(it->jordan.end(), r.jordan.begin(), r.jordan.end());
    }
    res = std::move(merged);
    for (auto& r : res) std::sort(r.jordan.begin(), r.jordan.end(), std::greater<>());
    std::stable_sort(res.begin(), res.end(), [](const ResidueDatum& x, const ResidueDatum& y) {
        if (x.weight != y.weight) return x.weight < y.weight;
        if (x.character != y.character) return x.character < y.character;
        if (x.alpha.re != y.alpha.re) return x.alpha.re < y.alpha.re;
        if (x.alpha.im != y.alpha.im) return x.alpha.im < y.alpha.im;
        return x.jordan > y.jordan;
    });
    return res;
}

// {c + m/e} reduced into the window, sorted ascending.
inline std::vector<Rational> tilde_par(const WeightSet& w, int e) {
    if (e < 1) fail("invalid-argument", "e must be >= 1");
    std::vector<Rational> out;
    for (auto& en : w.entries)
        for (int m = 0; m < e; ++m) out.push_back(reduce_to_window(en.weight + Rational(m, e), w.window_anchor));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Cyclic minimum distance of the extended set. Works coset by coset so it
// stays cheap for large e (the perturbation bound uses e = rank!).
inline Rational gap(const WeightSet& w, long long e) {
    if (e < 1) fail("invalid-argument", "e must be >= 1");
    const Rational period(1, e);
    std::vector<Rational> cls;  // weights reduced into [0, 1/e)
    for (auto& en : w.entries) {
        Rational x = en.weight * Rational(e);
        x = (x - from_int(x.floor())) / Rational(e);
        cls.push_back(x);
    }
    std::sort(cls.begin(), cls.end());
    cls.erase(std::unique(cls.begin(), cls.end()), cls.end());
    if (cls.size() == 1) {
        if (e == 1) fail("degenerate-gap", "extended weight set has a single element");
        return period;
    }
    Rational best = period;
    for (std::size_t i = 0; i + 1 < cls.size(); ++i) best = std::min(best, cls[i + 1] - cls[i]);
    best = std::min(best, cls.front() + period - cls.back());
    return best;
}

// Midpoint of the largest gap of the extended set, scanning gaps upward from
// the smallest point with the wrap-around gap last; the first maximal gap wins.
inline Rational pick_generic_weight(const WeightSet& w, int e, int rank) {
    if (rank < 1) fail("invalid-argument", "rank must be >= 1");
    auto pts = tilde_par(w, e);
    Rational best_len(-1), best_mid;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Rational lo = pts[i];
        Rational hi = i + 1 < pts.size() ? pts[i + 1] : pts.front() + Rational(1);
        Rational len = hi - lo;
        if (len > best_len) {
            best_len = len;
            best_mid = (lo + hi) / Rational(2);
        }
    }
    return reduce_to_window(best_mid, w.window_anchor);
}

// Cyclic distance from a to the nearest point of tilde_par(w, e).
inline Rational generic_margin(const WeightSet& w, int e, const Rational& a) {
    Rational best(2);
    for (auto& p : tilde_par(w, e)) {
        Rational d = abs(a - p);
        d = d - from_int(d.floor());
        best = std::min(best, std::min(d, Rational(1) - d));
    }
    return best;
}

// level k -> dim Gr^W_k for the sl2 strings of the Jordan blocks
inline std::map<int, int> weight_filtration(const Partition& jordan) {
    std::map<int, int> out;
    for (int s : jordan) {
        if (s < 1) fail("invalid-argument", "partition entries must be >= 1");
        for (int k = -(s - 1); k <= s - 1; k += 2) out[k] += 1;
    }
    return out;
}

using PsiMap = std::map<Rational, Rational>;

inline Rational factorial_rational(int n) {
    Rational f(1);
    for (int i = 2; i <= n; ++i) f *= Rational(i);
    return f;
}

struct PerturbResult {
    WeightSet weights;
    std::vector<ResidueDatum> residues;  // nilpotent parts are zero afterwards
};

inline const Rational& psi_at(const PsiMap& psi, const Rational& b) {
    auto it = psi.find(b);
    if (it == psi.end()) fail("invalid-psi", "psi undefined at weight " + b.str());
    return it->second;
}

// Checks |psi(b)-b| < 2 eps and equal offsets on classes with e(b1-b2) in Z.
inline void validate_psi(const WeightSet& w, const Rational& eps, const PsiMap& psi, const Rational& e) {
    for (auto& x : w.entries) {
        Rational off = psi_at(psi, x.weight) - x.weight;
        if (!(abs(off) < Rational(2) * eps))
            fail("invalid-psi", "|psi(b)-b| >= 2 eps at b = " + x.weight.str());
        for (auto& y : w.entries) {
            if ((e * (x.weight - y.weight)).is_integer() && psi_at(psi, y.weight) - y.weight != off)
                fail("invalid-psi", "psi offsets differ on the class of " + x.weight.str() + " and " + y.weight.str());
        }
    }
}

// The perturbed weight multiset phi(k,b) = psi(b) + eps k, without range or
// window checks. Output weights may lie outside the window.
inline std::vector<std::pair<Rational, ResidueDatum>> perturbed_pieces(const WeightSet& w,
                                                                       const std::vector<ResidueDatum>& residues,
                                                                       const Rational& eps, const PsiMap& psi) {
    auto res = normalize_residues(w, residues);
    std::vector<std::pair<Rational, ResidueDatum>> out;
    for (auto& r : res) {
        const Rational& pb = psi_at(psi, r.weight);
        for (auto [k, dim] : weight_filtration(r.jordan)) {
            Rational nb = pb + eps * Rational(k);
            out.push_back({nb, ResidueDatum{nb, r.alpha, Partition(static_cast<std::size_t>(dim), 1), r.character}});
        }
    }
    return out;
}

inline PerturbResult perturb_weights(const WeightSet& w, const std::vector<ResidueDatum>& residues,
                                     const Rational& eps, const PsiMap& psi, std::optional<Rational> e_opt = {}) {
    if (!(eps > Rational(0))) fail("invalid-argument", "eps must be positive");
    const int rank = w.rank();
    Rational e = e_opt ? *e_opt : factorial_rational(rank);
    if (!e.is_integer() || e < Rational(1)) fail("invalid-argument", "e must be a positive integer");
    validate_psi(w, eps, psi, e);
    Rational g(1);  // a single-point extended set counts as gap 1
    try {
        g = gap(w, e.to_ll());
    } catch (const Error& err) {
        if (err.kind() != "degenerate-gap") throw;
    }
    if (!(Rational(10) * e * e * eps < g))
        fail("perturbation-out-of-range", "10 e^2 eps = " + (Rational(10) * e * e * eps).str() +
                                              " is not below gap " + g.str());
    PerturbResult out;
    out.weights.component_id = w.component_id;
    out.weights.window_anchor = w.window_anchor;
    for (auto& [nb, rd] : perturbed_pieces(w, residues, eps, psi)) {
        if (!in_window(nb, w.window_anchor))
            fail("window-violation", "perturbed weight " + nb.str() + " leaves the window");
        add_weight(out.weights, nb, partition_total(rd.jordan));
        out.residues.push_back(rd);
    }
    out.residues = normalize_residues(out.weights, out.residues);
    return out;
}

// b(eps) = max{d in eps Z : d < b}; psi(b) = b(eps) + mean offset.
inline Rational lattice_below(const Rational& b, const Rational& eps) {
    Rational q = b / eps;
    Rational::Int n = q.ceil() - 1;
    return from_int(n) * eps;
}

inline PsiMap degree_preserving_psi(const WeightSet& w, const Rational& eps) {
    if (!(eps > Rational(0))) fail("invalid-argument", "eps must be positive");
    Rational total;
    for (auto& e : w.entries) total += (e.weight - lattice_below(e.weight, eps)) * Rational(e.mult);
    Rational c = total / Rational(w.rank());
    PsiMap psi;
    for (auto& e : w.entries) psi[e.weight] = lattice_below(e.weight, eps) + c;
    return psi;
}

inline PsiMap identity_psi(const WeightSet& w) {
    PsiMap psi;
    for (auto& e : w.entries) psi[e.weight] = e.weight;
    return psi;
}

}  // namespace parh
