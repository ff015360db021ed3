#include "parh/filtered.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace parh;
using parh::testing::Q;

namespace {

FilteredSpec one_component(int rank, std::initializer_list<std::pair<const char*, int>> ws) {
    FilteredSpec s;
    s.rank = rank;
    ComponentData c;
    c.weights.component_id = "H";
    for (auto& [b, m] : ws) c.weights.entries.push_back({Q(b), m});
    sort_entries(c.weights);
    c.residues = normalize_residues(c.weights, {});
    s.components.push_back(c);
    validate(s);
    return s;
}

IntersectionData ix_one(const char* degL, const char* HiL) {
    IntersectionData ix;
    ix.dim_X = 2;
    ix.deg_L_lattice = Q(degL);
    ix.components.push_back({"H", Q(HiL), Q("0"), {}, Q("0")});
    return ix;
}

template <class F>
std::string error_kind(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return "";
}

}  // namespace

TEST(ParabolicC1, Examples) {
    auto s = one_component(2, {{"-1/2", 1}, {"0", 1}});
    EXPECT_EQ(parabolic_c1_dot(s, ix_one("1", "1")), Q("3/2"));
    EXPECT_EQ(slope(s, ix_one("1", "1")), Q("3/4"));
    auto z = one_component(3, {{"0", 3}});
    EXPECT_EQ(parabolic_c1_dot(z, ix_one("5/7", "3")), Q("5/7"));
    auto r1 = one_component(1, {{"-1/2", 1}});
    EXPECT_EQ(parabolic_c1_dot(r1, ix_one("0", "2")), Q("1"));
    EXPECT_EQ(slope(r1, ix_one("0", "2")), Q("1"));
}

TEST(ParabolicC1, SchemaMismatch) {
    auto s = one_component(1, {{"0", 1}});
    IntersectionData ix = ix_one("0", "1");
    ix.components[0].id = "other";
    EXPECT_EQ(error_kind([&] { parabolic_c1_dot(s, ix); }), "schema-mismatch");
}

TEST(ParabolicC1, AdditiveAndSlopeHomogeneous) {
    std::mt19937_64 rng(3);
    for (int it = 0; it < 100; ++it) {
        auto a = parh::testing::random_spec(rng, 1);
        auto b = parh::testing::random_spec(rng, 1);
        IntersectionData ia = ix_one("0", "1"), ib = ix_one("0", "1");
        ia.components[0].id = ib.components[0].id = "H0";
        ia.deg_L_lattice = Rational(it % 7 - 3, 2);
        ib.deg_L_lattice = Rational(it % 5 - 1, 3);
        auto sum = direct_sum(a, b);
        auto isum = direct_sum(ia, ib);
        EXPECT_EQ(parabolic_c1_dot(sum, isum), parabolic_c1_dot(a, ia) + parabolic_c1_dot(b, ib));
        auto aa = direct_sum(a, a);
        EXPECT_EQ(slope(aa, direct_sum(ia, ia)), slope(a, ia));
    }
}

TEST(ParabolicCh2, Examples) {
    auto s = one_component(1, {{"-1/2", 1}});
    IntersectionData ix = ix_one("0", "1");
    ix.ch2_lattice = Q("0");
    ix.components[0].HiHiL = Q("1");
    EXPECT_EQ(parabolic_ch2_dot(s, ix), Q("1/8"));

    auto z = one_component(2, {{"0", 2}});
    ix.ch2_lattice = Q("3/5");
    EXPECT_EQ(parabolic_ch2_dot(z, ix), Q("3/5"));

    // two components meeting along C
    FilteredSpec t;
    t.rank = 1;
    for (const char* id : {"H1", "H2"}) {
        ComponentData c;
        c.weights.component_id = id;
        c.weights.entries = {{Q("-1/2"), 1}};
        c.residues = normalize_residues(c.weights, {});
        t.components.push_back(c);
    }
    IntersectionData it2;
    it2.dim_X = 2;
    it2.ch2_lattice = Q("0");
    it2.components = {{"H1", Q("0"), Q("0"), {}, {}}, {"H2", Q("0"), Q("0"), {}, {}}};
    it2.curves = {{"H1", "H2", Q("1"), {{Q("-1/2"), Q("-1/2"), 1}}}};
    EXPECT_EQ(parabolic_ch2_dot(t, it2), Q("1/4"));
}

TEST(ParabolicCh2, DimensionTooLowAndBadBigrading) {
    auto s = one_component(1, {{"0", 1}});
    IntersectionData ix = ix_one("0", "1");
    ix.dim_X = 1;
    ix.ch2_lattice = Q("0");
    EXPECT_EQ(error_kind([&] { parabolic_ch2_dot(s, ix); }), "dimension-too-low");
    FilteredSpec t;
    t.rank = 2;
    for (const char* id : {"H1", "H2"}) {
        ComponentData c;
        c.weights.component_id = id;
        c.weights.entries = {{Q("-1/2"), 1}, {Q("0"), 1}};
        c.residues = normalize_residues(c.weights, {});
        t.components.push_back(c);
    }
    IntersectionData it2;
    it2.dim_X = 2;
    it2.ch2_lattice = Q("0");
    it2.components = {{"H1", Q("0"), Q("0"), {}, {}}, {"H2", Q("0"), Q("0"), {}, {}}};
    it2.curves = {{"H1", "H2", Q("1"), {{Q("-1/2"), Q("-1/2"), 2}}}};
    EXPECT_EQ(error_kind([&] { parabolic_ch2_dot(t, it2); }), "schema-mismatch");
}

TEST(Pullback, Examples) {
    auto s = one_component(2, {{"-1/2", 1}, {"0", 1}});
    auto p = pullback(s, 2);
    EXPECT_EQ(p.components[0].weights.entries, (std::vector<WeightEntry>{{Q("0"), 2}}));
    EXPECT_EQ(pullback(s, 1), s);

    auto r = one_component(1, {{"0", 1}});
    r.components[0].residues[0].alpha = Q("1/2");
    auto pr = pullback(r, 2);
    EXPECT_EQ(pr.components[0].residues[0].alpha, ComplexQ(Q("1")));
}

// Oracle: monomials zeta^k v (k in Z) with z-weight (b-k)/e; those landing in
// the window form an O_z-basis of the push-forward.
std::multiset<Rational> monomial_oracle(const Rational& b, int e, const Rational& anchor) {
    std::multiset<Rational> out;
    for (int k = -4 * e; k <= 4 * e; ++k) {
        Rational x = (b - Rational(k)) / Rational(e);
        if (in_window(x, anchor)) out.insert(x);
    }
    return out;
}

TEST(Pushforward, ExamplesAndMonomialOracle) {
    auto s = one_component(1, {{"0", 1}});
    auto p = pushforward_weights(s, 2);
    EXPECT_EQ(p.rank, 2);
    EXPECT_EQ(p.components[0].weights.entries, (std::vector<WeightEntry>{{Q("-1/2"), 1}, {Q("0"), 1}}));
    EXPECT_EQ(pushforward_weights(s, 1), s);
    auto h = one_component(1, {{"-1/2", 1}});
    auto ph = pushforward_weights(h, 2);
    EXPECT_EQ(ph.components[0].weights.entries, (std::vector<WeightEntry>{{Q("-3/4"), 1}, {Q("-1/4"), 1}}));

    for (int den = 1; den <= 12; ++den)
        for (int num = 0; num < den; ++num)
            for (int e = 1; e <= 4; ++e) {
                Rational b = -Rational(num, den);
                auto sp = one_component(1, {{b.str().c_str(), 1}});
                auto pf = pushforward_weights(sp, e);
                std::multiset<Rational> got;
                Rational sum;
                for (auto& en : pf.components[0].weights.entries)
                    for (int m = 0; m < en.mult; ++m) {
                        got.insert(en.weight);
                        sum += en.weight;
                    }
                EXPECT_EQ(got, monomial_oracle(b, e, Rational(0)));
                // weight sum differs from the cover's by the lattice correction (e-1)/2
                EXPECT_EQ(sum, b - Rational(e - 1, 2));
            }
}

TEST(Descent, RoundTripRandom) {
    std::mt19937_64 rng(77);
    for (int it = 0; it < 200; ++it) {
        FilteredSpec s = it % 3 == 0 ? parh::testing::random_block_spec(rng, 1 + it % 3)
                                     : parh::testing::random_spec(rng, 1 + it % 2);
        validate(s);
        for (int e = 1; e <= 4; ++e) {
            auto p = pullback(s, e);
            validate(p);
            EXPECT_EQ(descent(p, e), s) << "e=" << e;
        }
    }
}

TEST(Descent, InvariantPartOfPushforward) {
    auto s = one_component(1, {{"0", 1}});
    auto graded = s;
    graded.components[0].residues[0].character = 0;
    EXPECT_EQ(descent(graded, 2), s);
    EXPECT_EQ(invariant_part(pushforward_weights(graded, 2)), s);
    EXPECT_EQ(descent(s, 1), s);
    std::mt19937_64 rng(8);
    for (int it = 0; it < 100; ++it) {
        auto x = parh::testing::random_spec(rng, 1);
        for (int e = 2; e <= 4; ++e) {
            auto pb = pullback(x, e);
            EXPECT_EQ(descent(pb, e), invariant_part(pushforward_weights(pb, e)));
        }
    }
}

TEST(Descent, NotEquivariant) {
    auto s = one_component(2, {{"-1/2", 1}, {"0", 1}});
    EXPECT_EQ(error_kind([&] { descent(s, 2); }), "not-equivariant");
}

namespace {

// A (+) B from rank-1 blocks with lattice degrees dA, dB on one component.
std::pair<FilteredSpec, IntersectionData> two_blocks(const char* wa, const char* wb, const char* dA, const char* dB) {
    FilteredSpec s;
    s.rank = 2;
    for (const char* w : {wa, wb}) {
        ModelBlock B;
        B.weights = {Q(w)};
        s.blocks.push_back(B);
    }
    ComponentData c;
    c.weights.component_id = "H";
    for (auto& B : s.blocks) add_weight(c.weights, B.weights[0], 1);
    c.residues = normalize_residues(c.weights, {});
    s.components.push_back(c);
    validate(s);
    IntersectionData ix = ix_one("0", "1");
    ix.deg_L_lattice = Q(dA) + Q(dB);
    ix.block_deg_L = {{Q(dA)}, {Q(dB)}};
    return {s, ix};
}

}  // namespace

TEST(Stability, Examples) {
    {
        auto [s, ix] = two_blocks("0", "0", "1", "1");
        auto r = stability_check(s, ix, {{{0, {1}}}, {{1, {1}}}});
        EXPECT_EQ(r.verdict, Verdict::semistable_not_stable);
        ASSERT_TRUE(r.witness);
        EXPECT_EQ(*r.witness, 0u);
    }
    {
        auto s = one_component(1, {{"-1/3", 1}});
        auto r = stability_check(s, ix_one("0", "1"), {});
        EXPECT_EQ(r.verdict, Verdict::stable);
    }
    {
        auto [s, ix] = two_blocks("0", "0", "2", "0");
        auto r = stability_check(s, ix, {{{0, {1}}}});
        EXPECT_EQ(r.verdict, Verdict::unstable);
        EXPECT_EQ(*r.witness, 0u);
        EXPECT_EQ(r.rows[0].slope, Q("2"));
        EXPECT_EQ(r.ambient_slope, Q("1"));
    }
    {
        auto [s, ix] = two_blocks("-1/2", "0", "0", "1");
        // slopes: A: 0 + 1/2 = 1/2, B: 1, ambient 3/4 -> B destabilises
        auto r = stability_check(s, ix, {{{0, {1}}}});
        EXPECT_EQ(r.verdict, Verdict::inconclusive);
        EXPECT_FALSE(r.exhaustive);
        auto full = stability_check(s, ix, enumerate_candidates(s));
        EXPECT_EQ(full.verdict, Verdict::unstable);
    }
}

TEST(Stability, NilpotentBlockSubobjects) {
    // one block with a size-2 Jordan string: the only invariant line is the
    // bottom of the string
    FilteredSpec s;
    s.rank = 2;
    ModelBlock B;
    B.weights = {Q("0")};
    B.jordan = {2};
    s.blocks.push_back(B);
    ComponentData c;
    c.weights.component_id = "H";
    c.weights.entries = {{Q("0"), 2}};
    c.residues = normalize_residues(c.weights, {{Q("0"), {}, {2}, std::nullopt}});
    s.components.push_back(c);
    validate(s);
    IntersectionData ix = ix_one("1", "1");
    ix.block_deg_L = {{Q("1"), Q("0")}};  // top vector degree 1, bottom 0
    auto cands = enumerate_candidates(s);
    ASSERT_EQ(cands.size(), 1u);
    auto r = stability_check(s, ix, cands);
    EXPECT_EQ(r.verdict, Verdict::stable);
    EXPECT_EQ(r.rows[0].slope, Q("0"));
    EXPECT_EQ(error_kind([&] { stability_check(s, ix, {}); }), "no-candidates");
}

TEST(Stability, InducedSubspecSlopeConsistency) {
    std::mt19937_64 rng(21);
    for (int it = 0; it < 60; ++it) {
        auto s = parh::testing::random_block_spec(rng, 2 + it % 2);
        IntersectionData ix = ix_one("0", "1");
        ix.components[0].id = "H0";
        for (auto& B : s.blocks) {
            std::vector<Rational> d;
            for (int k = 0; k < B.dim(); ++k) d.push_back(Rational((it + k) % 5 - 2, 3));
            for (auto& x : d) ix.deg_L_lattice += x;
            ix.block_deg_L.push_back(d);
        }
        auto cands = enumerate_candidates(s);
        auto r = stability_check(s, ix, cands);
        EXPECT_TRUE(r.exhaustive);
        for (auto& row : r.rows) {
            auto [sub, six] = induced_subspec(s, ix, row.selector);
            validate(sub);
            EXPECT_EQ(slope(sub, six), row.slope);
        }
    }
}

TEST(BG, Examples) {
    auto s = one_component(2, {{"0", 2}});
    IntersectionData ix = ix_one("0", "1");
    ix.ch2_lattice = Q("1");
    ix.c1sq_lattice = Q("0");
    auto r = bg_report(s, ix);
    EXPECT_EQ(r.lhs, Q("1"));
    EXPECT_EQ(r.rhs, Q("0"));
    EXPECT_FALSE(r.inequality_holds);

    auto l = one_component(1, {{"0", 1}});
    IntersectionData il = ix_one("2", "1");
    il.c1sq_lattice = Q("3");
    il.ch2_lattice = Q("3/2");
    auto rl = bg_report(l, il);
    EXPECT_EQ(rl.lhs, rl.rhs);
    EXPECT_TRUE(rl.inequality_holds);

    IntersectionData missing = ix_one("0", "1");
    missing.ch2_lattice = Q("0");
    EXPECT_EQ(error_kind([&] { bg_report(s, missing); }), "schema-mismatch");
}

TEST(BG, VanishingPrecondition) {
    auto s = one_component(2, {{"0", 2}});
    IntersectionData ix = ix_one("0", "1");
    ix.ch2_lattice = Q("0");
    ix.c1sq_lattice = Q("0");
    EXPECT_TRUE(bg_report(s, ix).vanishing_precondition);
}
