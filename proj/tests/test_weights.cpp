#include "parh/weights.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace parh;
using parh::testing::Q;

namespace {

WeightSet ws(std::initializer_list<std::pair<const char*, int>> xs) {
    WeightSet w;
    w.component_id = "H";
    for (auto& [b, m] : xs) w.entries.push_back({Q(b), m});
    sort_entries(w);
    return w;
}

// brute-force extended set: shifts m/e for m in a generous range, reduced by
// explicit subtraction/addition of integers
std::set<Rational> extended_oracle(const WeightSet& w, int e) {
    std::set<Rational> out;
    for (auto& en : w.entries)
        for (int m = -3 * e; m <= 3 * e; ++m) {
            Rational x = en.weight + Rational(m, e);
            while (x > w.window_anchor) x -= Rational(1);
            while (!(x > w.window_anchor - Rational(1))) x += Rational(1);
            out.insert(x);
        }
    return out;
}

Rational gap_oracle(const std::set<Rational>& pts) {
    Rational best(5);
    for (auto& a : pts)
        for (auto& b : pts) {
            if (a == b) continue;
            Rational d = abs(a - b);
            best = std::min(best, std::min(d, Rational(1) - d));
        }
    return best;
}

}  // namespace

TEST(TildePar, Examples) {
    EXPECT_EQ(tilde_par(ws({{"-1/2", 1}, {"0", 1}}), 2), (std::vector<Rational>{Q("-1/2"), Q("0")}));
    EXPECT_EQ(tilde_par(ws({{"-3/10", 1}, {"0", 1}}), 1), (std::vector<Rational>{Q("-3/10"), Q("0")}));
    EXPECT_EQ(tilde_par(ws({{"0", 1}}), 3), (std::vector<Rational>{Q("-2/3"), Q("-1/3"), Q("0")}));
}

TEST(TildePar, MatchesBruteForceAndShiftInvariant) {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 300; ++it) {
        auto w = parh::testing::random_weight_set(rng, 24);
        int e = 1 + it % 4;
        auto got = tilde_par(w, e);
        auto want = extended_oracle(w, e);
        EXPECT_EQ(std::set<Rational>(got.begin(), got.end()), want);
        // shifting one weight by 1/e (reduced) leaves the set unchanged
        Rational nb = reduce_to_window(w.entries[0].weight + Rational(1, e), w.window_anchor);
        if (nb != w.entries[0].weight && w.mult_of(nb)) continue;
        WeightSet w2 = w;
        w2.entries[0].weight = nb;
        sort_entries(w2);
        EXPECT_EQ(got, tilde_par(w2, e));
    }
}

TEST(Gap, Examples) {
    EXPECT_EQ(gap(ws({{"-1/2", 1}, {"0", 1}}), 2), Q("1/2"));
    EXPECT_EQ(gap(ws({{"-3/10", 1}, {"0", 1}}), 1), Q("3/10"));
    EXPECT_EQ(gap(ws({{"0", 1}}), 3), Q("1/3"));
    for (int e = 2; e <= 7; ++e) EXPECT_EQ(gap(ws({{"0", 1}}), e), Rational(1, e));
}

TEST(Gap, DegenerateSingleton) {
    try {
        gap(ws({{"-1/3", 2}}), 1);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), "degenerate-gap");
    }
}

TEST(Gap, MatchesPairwiseOracle) {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 300; ++it) {
        auto w = parh::testing::random_weight_set(rng, 24);
        int e = 1 + it % 5;
        auto pts = extended_oracle(w, e);
        if (pts.size() < 2) continue;
        EXPECT_EQ(gap(w, e), gap_oracle(pts));
        EXPECT_LE(gap(w, e), Rational(1, e));
    }
}

TEST(PickGenericWeight, Examples) {
    EXPECT_EQ(pick_generic_weight(ws({{"-1/2", 1}, {"0", 1}}), 2, 2), Q("-1/4"));
    EXPECT_EQ(pick_generic_weight(ws({{"0", 1}}), 1, 1), Q("-1/2"));
    EXPECT_EQ(pick_generic_weight(ws({{"-3/10", 1}, {"0", 1}}), 1, 2), Q("-13/20"));
}

TEST(PickGenericWeight, MarginOnRandomSets) {
    std::mt19937_64 rng(1234);
    for (int it = 0; it < 1000; ++it) {
        auto w = parh::testing::random_weight_set(rng, 24);
        int rank = w.rank();
        int e = 1 + it % 4;
        Rational a = pick_generic_weight(w, e, rank);
        EXPECT_TRUE(in_window(a, w.window_anchor));
        // oracle margin from the brute-force extended set
        Rational m(5);
        for (auto& p : extended_oracle(w, e)) {
            Rational d = abs(a - p);
            m = std::min(m, std::min(d, Rational(1) - d));
        }
        EXPECT_GT(m, Rational(1) / Rational(4 * e * rank));
        EXPECT_EQ(m, generic_margin(w, e, a));
    }
}

TEST(WeightFiltration, Examples) {
    EXPECT_EQ(weight_filtration({2}), (std::map<int, int>{{-1, 1}, {1, 1}}));
    EXPECT_EQ(weight_filtration({1}), (std::map<int, int>{{0, 1}}));
    EXPECT_EQ(weight_filtration({3, 1}), (std::map<int, int>{{-2, 1}, {0, 2}, {2, 1}}));
}

TEST(WeightFiltration, SymmetricAndComplete) {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 200; ++it) {
        auto p = parh::testing::random_partition(rng, 1 + it % 9);
        auto f = weight_filtration(p);
        int tot = 0;
        for (auto [k, d] : f) {
            tot += d;
            EXPECT_EQ(f[-k], d);
        }
        EXPECT_EQ(tot, partition_total(p));
    }
}

TEST(PerturbWeights, Examples) {
    {
        auto w = ws({{"-1/2", 2}});
        auto r = perturb_weights(w, {{Q("-1/2"), {}, {2}, std::nullopt}}, Q("1/100"), identity_psi(w));
        EXPECT_EQ(r.weights.entries, (std::vector<WeightEntry>{{Q("-51/100"), 1}, {Q("-49/100"), 1}}));
        for (auto& rd : r.residues) EXPECT_EQ(rd.jordan, Partition{1});
    }
    {
        auto w = ws({{"0", 1}});
        auto r = perturb_weights(w, {}, Q("1/100"), identity_psi(w));
        EXPECT_EQ(r.weights.entries, (std::vector<WeightEntry>{{Q("0"), 1}}));
    }
    {
        auto w = ws({{"-1/2", 1}, {"0", 1}});
        PsiMap psi{{Q("-1/2"), Q("-99/200")}, {Q("0"), Q("1/200")}};
        try {
            perturb_weights(w, {}, Q("1/100"), psi);
            FAIL();
        } catch (const Error& err) {
            EXPECT_EQ(err.kind(), "window-violation");
        }
    }
}

TEST(PerturbWeights, RejectsLargeEpsAndBadPsi) {
    auto w = ws({{"-1/2", 2}});
    try {
        perturb_weights(w, {{Q("-1/2"), {}, {2}, std::nullopt}}, Q("1/50"), identity_psi(w));
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), "perturbation-out-of-range");
    }
    auto w2 = ws({{"-1/2", 1}, {"0", 1}});
    PsiMap bad{{Q("-1/2"), Q("-1/2")}, {Q("0"), Q("-1/1000")}};  // offsets differ on one 1/2-class
    try {
        perturb_weights(w2, {}, Q("1/100"), bad);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), "invalid-psi");
    }
    PsiMap far{{Q("-1/2"), Q("-1/2") - Q("3/100")}, {Q("0"), Q("-3/100")}};
    try {
        perturb_weights(w2, {}, Q("1/100"), far);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), "invalid-psi");
    }
}

TEST(PerturbWeights, RankPreserved) {
    std::mt19937_64 rng(99);
    int checked = 0;
    for (int it = 0; it < 400; ++it) {
        auto w = parh::testing::random_weight_set(rng, 8, 2, 2);
        std::vector<ResidueDatum> res;
        for (auto& e : w.entries) res.push_back({e.weight, {}, parh::testing::random_partition(rng, e.mult), {}});
        Rational eps(1, 100000);
        try {
            auto r = perturb_weights(w, res, eps, identity_psi(w));
            EXPECT_EQ(r.weights.rank(), w.rank());
            ++checked;
        } catch (const Error& err) {
            EXPECT_TRUE(err.kind() == "perturbation-out-of-range" || err.kind() == "window-violation") << err.kind();
        }
    }
    EXPECT_GT(checked, 50);
}

TEST(DegreePreservingPsi, Examples) {
    auto w1 = ws({{"-1/2", 1}});
    EXPECT_EQ(degree_preserving_psi(w1, Q("3/10")).at(Q("-1/2")), Q("-1/2"));
    auto w2 = ws({{"-1/2", 1}, {"-1/10", 1}});
    auto p2 = degree_preserving_psi(w2, Q("3/10"));
    EXPECT_EQ(p2.at(Q("-1/2")), Q("-9/20"));
    EXPECT_EQ(p2.at(Q("-1/10")), Q("-3/20"));
    auto w3 = ws({{"0", 2}});
    EXPECT_EQ(degree_preserving_psi(w3, Q("1/10")).at(Q("0")), Q("0"));
    EXPECT_EQ(lattice_below(Q("0"), Q("1/10")), Q("-1/10"));
}

TEST(DegreePreservingPsi, ExactSumAndCloseness) {
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 500; ++it) {
        auto w = parh::testing::random_weight_set(rng, 24);
        Rational eps = it % 2 ? Q("1/10") : Q("1/30");
        auto psi = degree_preserving_psi(w, eps);
        Rational before, after;
        for (auto& e : w.entries) {
            before += e.weight * Rational(e.mult);
            after += psi.at(e.weight) * Rational(e.mult);
            EXPECT_LT(abs(psi.at(e.weight) - e.weight), Rational(2) * eps);
            // oracle for b(eps): the largest multiple of eps strictly below b
            Rational be = lattice_below(e.weight, eps);
            EXPECT_LT(be, e.weight);
            EXPECT_GE(be + eps, e.weight);
            EXPECT_TRUE((be / eps).is_integer());
        }
        EXPECT_EQ(before, after);
    }
}

TEST(Rational, ParseAndPrint) {
    EXPECT_EQ(Q("-3/6").str(), "-1/2");
    EXPECT_EQ(Q(" 4/2 ").str(), "2");
    EXPECT_EQ(Q("+7").str(), "7");
    EXPECT_THROW(Q("1/0"), std::invalid_argument);
    EXPECT_THROW(Q("abc"), std::invalid_argument);
    EXPECT_THROW(Q("1/-2"), std::invalid_argument);
    EXPECT_EQ(Q("-7/2").floor(), -4);
    EXPECT_EQ(Q("-7/2").ceil(), -3);
    EXPECT_EQ(Q("7/2").floor(), 3);
}
