#include "parh/lambda_ops.hpp"
#include "parh/models.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace parh;
using std::numbers::pi;

namespace {

// rank-1 metric e^{phi} with phi = a cos(2 pi u) + b sin(2 pi v) on the unit torus;
// Delta phi = -4 pi^2 phi
MetricField line_metric(const GridDomain& g, double a, double b) {
    return make_field(g, 1, [&](int i) {
        Mat m(1, 1);
        m(0, 0) = std::exp(a * std::cos(2 * pi * g.coord(i, 0)) + b * std::sin(2 * pi * g.coord(i, 1)));
        return m;
    });
}

double phi_at(const GridDomain& g, int i, double a, double b) {
    return a * std::cos(2 * pi * g.coord(i, 0)) + b * std::sin(2 * pi * g.coord(i, 1));
}

MetricField identity_metric(const GridDomain& g, int r) {
    return make_field(g, r, [&](int) { return eye(r); });
}

}  // namespace

TEST(LambdaOps, TrivialDataHasZeroCurvature) {
    auto g = make_torus(1, 1, 16);
    for (cd lam : {cd(0, 0), cd(1, 0), cd(0.3, -0.7)}) {
        auto D = zero_connection(g, 2, lam);
        auto G = g_tensor(D, identity_metric(g, 2), g);
        for (int i = 0; i < g.nodes; ++i) {
            EXPECT_LT(G.G11[0].at(i).norm(), 1e-14);
            EXPECT_LT(G.LG.at(i).norm(), 1e-14);
        }
    }
}

TEST(LambdaOps, RankOneCurvatureMatchesLaplacian) {
    // oracle: sqrt(-1) Lambda G = -(1+|lambda|^2) Delta log h / 2 for a flat line
    for (cd lam : {cd(0, 0), cd(1, 0), cd(0.5, 0.5)}) {
        double c = 1 + std::norm(lam), prev = 0;
        for (int n : {32, 64}) {
            auto g = make_torus(1, 1, n);
            auto h = line_metric(g, 0.3, 0.2);
            auto LG = lambda_g(zero_connection(g, 1, lam), h, g);
            double err = 0, scale = 0;
            for (int i = 0; i < g.nodes; ++i) {
                double want = c * 2 * pi * pi * phi_at(g, i, 0.3, 0.2);
                err = std::max(err, std::abs(LG.entry(i, 0, 0) - want));
                scale = std::max(scale, std::abs(want));
            }
            EXPECT_LT(err, 0.01 * scale) << "n=" << n;
            if (prev > 0) { EXPECT_GT(prev / err, 3.5); }
            prev = err;
        }
    }
}

TEST(LambdaOps, ConstantGaugeCovariance) {
    // h -> g^dag h g, A -> g^{-1} A g transforms sqrt(-1) Lambda G by conjugation
    auto g = make_torus(1, 1, 32);
    Mat gg(2, 2);
    gg << cd(1, 0.2), cd(0.3, 0), cd(-0.1, 0.4), cd(0.9, 0);
    Mat gi = gg.inverse();
    auto D = zero_connection(g, 2, cd(0.7, 0.1));
    auto h = make_field(g, 2, [&](int i) {
        double s = 0.3 * std::sin(2 * pi * g.coord(i, 0)), t = 0.2 * std::cos(2 * pi * g.coord(i, 1));
        Mat m(2, 2);
        m << std::exp(s), cd(0.1 * t, 0.05), cd(0.1 * t, -0.05), std::exp(-s + t);
        return m;
    });
    for (int i = 0; i < g.nodes; ++i) {
        D.A01[0].set(i, Mat::Constant(2, 2, cd(0.1 * std::cos(2 * pi * g.coord(i, 1)), 0)));
        D.A10[0].set(i, Mat::Constant(2, 2, cd(0, 0.2 * std::sin(2 * pi * g.coord(i, 0)))));
    }
    auto D2 = D;
    auto h2 = h;
    for (int i = 0; i < g.nodes; ++i) {
        D2.A01[0].set(i, gi * D.A01[0].at(i) * gg);
        D2.A10[0].set(i, gi * D.A10[0].at(i) * gg);
        h2.set(i, gg.adjoint() * h.at(i) * gg);
    }
    auto L1 = lambda_g(D, h, g), L2 = lambda_g(D2, h2, g);
    for (int i = 0; i < g.nodes; ++i) EXPECT_LT((L2.at(i) - gi * L1.at(i) * gg).norm(), 1e-10);
}

TEST(LambdaOps, ModelIsHarmonic) {
    auto g = make_annulus(0.2, 0.8, 64);
    auto m = rank2_model_metric(0.1, g);
    auto r = hitchin_residual(m.higgs, m.h, g);
    EXPECT_LT(r.sup, 2e-3);
    // flatness of the derived lambda-connection is a second difference of derived data: check its rate
    double prev = 0;
    for (int n : {32, 64, 128}) {
        auto gn = make_annulus(0.2, 0.8, n);
        auto mn = rank2_model_metric(0.1, gn);
        auto lf = lambda_flat_from_higgs(mn.higgs, mn.h, gn, cd(1, 0));
        EXPECT_FALSE(lf.pluriharmonic_warning);
        if (prev > 0) { EXPECT_GT(prev / lf.flatness.sup(), 2.5); }
        prev = lf.flatness.sup();
    }
    auto g2 = make_annulus(0.1, 0.5, 64);
    auto m2 = rank2_model_metric(0, g2);
    auto lf = lambda_flat_from_higgs(m2.higgs, m2.h, g2, cd(1, 0));
    auto p = pluriharmonic_test(lf.D, m2.h, g2, default_tol(g2));
    EXPECT_TRUE(p.is_pluriharmonic);
}

TEST(LambdaOps, NonHarmonicMetricIsDetected) {
    auto g = make_annulus(0.2, 0.8, 64);
    auto m = rank2_model_metric(0, g);
    auto h = m.h;
    for (int i = 0; i < g.nodes; ++i) h.set(i, h.at(i) * 2.0 + eye(2) * 0.5);
    EXPECT_GT(hitchin_residual(m.higgs, h, g).sup, 0.1);
    auto lf = lambda_flat_from_higgs(m.higgs, h, g, cd(1, 0));
    EXPECT_TRUE(lf.pluriharmonic_warning);
}

TEST(LambdaOps, ShortcutRejectedAtLambdaZero) {
    auto g = make_torus(1, 1, 16);
    auto D = zero_connection(g, 1, 0);
    try {
        pluriharmonic_test(D, identity_metric(g, 1), g, 1e-3);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "shortcut-invalid-at-lambda-zero");
    }
    EXPECT_NO_THROW(pluriharmonic_test(D, identity_metric(g, 1), g, 1e-3, false));
}

TEST(LambdaOps, BadMetricRejected) {
    auto g = make_torus(1, 1, 16);
    auto h = identity_metric(g, 2);
    Mat bad(2, 2);
    bad << 1, 0, 0, -1;
    h.set(5, bad);
    try {
        g_tensor(zero_connection(g, 2, 1), h, g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "bad-metric");
    }
}

TEST(LambdaOps, SurfaceProductLine) {
    // phi(u1) + psi(v2) on a flat 2-torus: Lambda picks up both Laplacians; G20 = G02 = 0
    auto g = make_torus(1, 1, 16, 2);
    auto h = make_field(g, 1, [&](int i) {
        Mat m(1, 1);
        m(0, 0) = std::exp(0.2 * std::cos(2 * pi * g.coord(i, 0)) + 0.1 * std::sin(2 * pi * g.coord(i, 3)));
        return m;
    });
    auto G = g_tensor(zero_connection(g, 1, cd(1, 0)), h, g);
    double err = 0, off = 0, scale = 0;
    for (int i = 0; i < g.nodes; ++i) {
        double want = 2 * 2 * pi * pi * (0.2 * std::cos(2 * pi * g.coord(i, 0)) + 0.1 * std::sin(2 * pi * g.coord(i, 3)));
        err = std::max(err, std::abs(G.LG.entry(i, 0, 0) - want));
        scale = std::max(scale, std::abs(want));
        off = std::max({off, G.G20.at(i).norm(), G.G02.at(i).norm(), G.G11[1].at(i).norm()});
    }
    EXPECT_LT(err, 0.03 * scale);
    EXPECT_LT(off, 1e-12);
}

TEST(LambdaOps, SurfaceModelSquareIdentities) {
    auto g = make_annulus(0.4, 0.6, 12, 2);
    auto m = sym_power_model(2, 0, g);
    auto lf = lambda_flat_from_higgs(m.higgs, m.h, g, cd(1, 0), 1.0);
    auto n = g_norms(g_tensor(lf.D, m.h, g), m.h, g);
    // same lambda-connection, wrong metric
    auto h = m.h;
    for (int i = 0; i < g.nodes; ++i) h.set(i, h.at(i) * 2.0 + eye(2) * 0.5);
    auto nb = g_norms(g_tensor(lf.D, h, g), h, g);
    EXPECT_LT(n.g11.sup, 0.05 * nb.g11.sup);
    EXPECT_LT(n.g20.sup + n.g02.sup, 1e-2);
    auto sq = operator_square_identities(lf.D, m.h, g);
    EXPECT_LT(sq.first, 1e-2 * std::max(1.0, sq.del_sq));
    EXPECT_LT(sq.second, 1e-2 * std::max(1.0, sq.del_sq));
}

TEST(LambdaOps, KobayashiLubkeRatio) {
    auto g = make_torus(1, 1, 8, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    auto rnd = [&] {
        Mat m(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m(i, j) = cd(N(rng), N(rng));
        return m;
    };
    for (int s = 0; s < 5; ++s) {
        std::vector<MatrixField> C(4, MatrixField(2, g.nodes));
        for (int i = 0; i < g.nodes; ++i) {
            Mat a = hermitize(rnd()), b = rnd();
            a -= eye(2) * (a.trace() / 2.0);
            b -= eye(2) * (b.trace() / 2.0);
            C[0].set(i, a);
            C[3].set(i, -a);
            C[1].set(i, b);
            C[2].set(i, b.adjoint());
        }
        auto rep = kobayashi_lubke_pointwise(C, identity_metric(g, 2), g);
        EXPECT_NEAR(rep.mean_ratio, 0.5, 1e-12);
        EXPECT_LT(rep.rel_std, 1e-12);
    }
    std::vector<MatrixField> C(4, MatrixField(2, g.nodes));
    for (int i = 0; i < g.nodes; ++i) C[0].set(i, eye(2));
    EXPECT_THROW(kobayashi_lubke_pointwise(C, identity_metric(g, 2), g), Error);
    auto g1 = make_torus(1, 1, 8);
    EXPECT_THROW(kobayashi_lubke_pointwise(C, identity_metric(g1, 2), g1), Error);
}

TEST(LambdaOps, RankOneLambdaConnectionFromHiggs) {
    // h = |z|^{-2a}, theta = alpha dz/z: the dw-coefficient is lambda (-a) + alpha
    // (up to the O(h^2) error of differencing the exponential)
    auto g = make_annulus(0.2, 0.8, 64);
    double a = 0.3;
    cd alpha(0.5, -0.25), lam(0.7, 0.2);
    auto higgs = zero_connection(g, 1, 0);
    auto h = make_field(g, 1, [&](int i) {
        Mat m(1, 1);
        m(0, 0) = std::exp(-2 * a * g.coord(i, 0));
        return m;
    });
    for (int i = 0; i < g.nodes; ++i) higgs.A10[0].entry(i, 0, 0) = alpha;
    auto lf = lambda_flat_from_higgs(higgs, h, g, lam);
    for (int i = 0; i < g.nodes; ++i) {
        EXPECT_LT(std::abs(lf.D.A10[0].entry(i, 0, 0) - (lam * (-a) + alpha)), 3e-5);
        EXPECT_LT(std::abs(lf.D.A01[0].entry(i, 0, 0) - lam * std::conj(alpha)), 1e-12);
    }
}

TEST(LambdaOps, ReconstructionAndSelfAdjointness) {
    auto g = make_torus(1, 1, 16);
    cd lam(0.6, -0.3);
    auto D = zero_connection(g, 2, lam);
    auto h = make_field(g, 2, [&](int i) {
        double s = 0.3 * std::sin(2 * pi * g.coord(i, 0));
        Mat m(2, 2);
        m << std::exp(s), cd(0.1, 0.1 * s), cd(0.1, -0.1 * s), 1.5;
        return m;
    });
    for (int i = 0; i < g.nodes; ++i) {
        Mat x(2, 2), y(2, 2);
        double c = std::cos(2 * pi * g.coord(i, 1));
        x << c, cd(0, 0.5), 0.25, -c;
        y << 0.5, c, cd(0.2, c), 1;
        D.A01[0].set(i, x);
        D.A10[0].set(i, y);
    }
    auto ob = decompose_operators(D, h, g);
    for (int i = 0; i < g.nodes; ++i) {
        // D = dbar_h + theta + lambda (del_h + theta^dag): coefficient form
        EXPECT_LT((ob.dbar[0].at(i) + ob.theta_dag[0].at(i) * lam - D.A01[0].at(i)).norm(), 1e-12);
        EXPECT_LT((ob.theta[0].at(i) + ob.del[0].at(i) * lam - D.A10[0].at(i)).norm(), 1e-12);
        Mat H = h.at(i), X = ob.LG.at(i);
        EXPECT_LT((X - h_adjoint(X, H, H.inverse())).norm(), 1e-10 * std::max(1.0, X.norm()));
    }
}
