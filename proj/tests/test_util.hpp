#pragma once
// Random generators and small brute-force oracles shared by the test binaries.

#include "parh/filtered.hpp"
#include "parh/weights.hpp"

#include <random>
#include <set>

namespace parh::testing {

inline Rational Q(const char* s) { return Rational::parse(s); }

// random rational p/q with q <= maxden inside (lo, hi]
inline Rational random_in_window(std::mt19937_64& rng, const Rational& anchor, int maxden) {
    std::uniform_int_distribution<int> dq(1, maxden);
    int q = dq(rng);
    std::uniform_int_distribution<int> dp(0, q - 1);
    return anchor - Rational(dp(rng), q);
}

inline WeightSet random_weight_set(std::mt19937_64& rng, int maxden, int max_distinct = 4, int max_mult = 3,
                                   const std::string& id = "H0", Rational anchor = Rational(0)) {
    std::uniform_int_distribution<int> dn(1, max_distinct), dm(1, max_mult);
    WeightSet w;
    w.component_id = id;
    w.window_anchor = anchor;
    int n = dn(rng);
    std::set<Rational> used;
    for (int i = 0; i < n; ++i) {
        Rational b = random_in_window(rng, anchor, maxden);
        if (!used.insert(b).second) continue;
        w.entries.push_back({b, dm(rng)});
    }
    sort_entries(w);
    return w;
}

inline Partition random_partition(std::mt19937_64& rng, int total) {
    Partition p;
    while (total > 0) {
        std::uniform_int_distribution<int> d(1, total);
        int s = d(rng);
        p.push_back(s);
        total -= s;
    }
    std::sort(p.begin(), p.end(), std::greater<>());
    return p;
}

inline ComplexQ random_complexq(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dn(-6, 6), dd(1, 6);
    return {Rational(dn(rng), dd(rng)), Rational(dn(rng), dd(rng))};
}

// Random spec over ncomp components of one rank; residues split the
// multiplicities into random (alpha, jordan) pieces.
inline FilteredSpec random_spec(std::mt19937_64& rng, int ncomp, int maxden = 12) {
    std::uniform_int_distribution<int> dr(1, 5);
    FilteredSpec s;
    s.rank = dr(rng);
    s.lambda = random_complexq(rng);
    s.label = "random";
    for (int i = 0; i < ncomp; ++i) {
        ComponentData c;
        c.weights.component_id = "H" + std::to_string(i);
        c.weights.window_anchor = Rational(0);
        // split rank into random weights
        int left = s.rank;
        std::set<Rational> used;
        while (left > 0) {
            Rational b = random_in_window(rng, Rational(0), maxden);
            if (!used.insert(b).second) continue;
            std::uniform_int_distribution<int> dm(1, left);
            int m = dm(rng);
            c.weights.entries.push_back({b, m});
            left -= m;
            // residue pieces
            int mleft = m;
            while (mleft > 0) {
                std::uniform_int_distribution<int> dk(1, mleft);
                int k = dk(rng);
                c.residues.push_back({b, random_complexq(rng), random_partition(rng, k), std::nullopt});
                mleft -= k;
            }
        }
        sort_entries(c.weights);
        c.residues = normalize_residues(c.weights, c.residues);
        s.components.push_back(std::move(c));
    }
    return s;
}

// Single-component spec generated from random model blocks.
inline FilteredSpec random_block_spec(std::mt19937_64& rng, int nblocks, int maxden = 12) {
    FilteredSpec s;
    s.lambda = random_complexq(rng);
    s.label = "blocks";
    std::uniform_int_distribution<int> dd(1, 3), dm(0, 2);
    s.rank = 0;
    for (int b = 0; b < nblocks; ++b) {
        ModelBlock B;
        B.weights = {random_in_window(rng, Rational(0), maxden)};
        B.alpha = random_complexq(rng);
        B.jordan = random_partition(rng, dd(rng));
        int m = dm(rng);
        for (int j = 0; j < m; ++j) B.irregular.push_back(random_complexq(rng));
        if (!B.irregular.empty() && B.irregular.back().is_zero()) B.irregular.back() = ComplexQ(Rational(1));
        s.rank += B.dim();
        s.blocks.push_back(B);
    }
    ComponentData c;
    c.weights.component_id = "H0";
    std::vector<ResidueDatum> res;
    for (auto& B : s.blocks) {
        add_weight(c.weights, B.weights[0], B.dim());
        res.push_back({B.weights[0], B.alpha, B.jordan, std::nullopt});
    }
    c.residues = normalize_residues(c.weights, res);
    s.components.push_back(c);
    return s;
}

}  // namespace parh::testing
