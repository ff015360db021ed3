#pragma once
// lambda-connection calculus on grids: operators attached to (D^lambda, h),
// the curvature-like tensor G(h) = [D^lambda, D^{lambda*}_h], Hitchin
// residuals, pluri-harmonicity and the pointwise Kobayashi-Lubke ratio.
//
// Conventions: h(u,v) = v^* H u.  d'' = dbar + sum_k A_k dwbar_k and
// d' = lambda d + sum_k B_k dw_k, with A_k = A01[k], B_k = A10[k].
// G is evaluated from node-wise jets of H and of the coefficients, inserted
// into the exact product-rule expansion, which keeps sqrt(-1) Lambda G
// h-self-adjoint up to rounding.

#include "parh/grid.hpp"

#include <array>
#include <cmath>
#include <optional>

namespace parh {

using MetricField = MatrixField;

struct ConnectionField {
    cd lambda{0, 0};
    int rank = 0;
    std::vector<MatrixField> A01;  // per complex dimension: dwbar_k coefficient
    std::vector<MatrixField> A10;  // dw_k coefficient
};

inline ConnectionField zero_connection(const GridDomain& g, int rank, cd lambda = 0) {
    ConnectionField D;
    D.lambda = lambda;
    D.rank = rank;
    for (int k = 0; k < g.dim; ++k) {
        D.A01.emplace_back(rank, g.nodes);
        D.A10.emplace_back(rank, g.nodes);
    }
    return D;
}

inline void check_connection(const ConnectionField& D, const GridDomain& g) {
    if (D.rank < 1 || D.rank > kMaxRank) fail("invalid-field", "rank out of range");
    if ((int)D.A01.size() != g.dim || (int)D.A10.size() != g.dim)
        fail("invalid-field", "connection has wrong number of coefficient fields");
    for (int k = 0; k < g.dim; ++k)
        if (D.A01[k].rank != D.rank || D.A10[k].rank != D.rank || D.A01[k].nodes() != g.nodes ||
            D.A10[k].nodes() != g.nodes)
            fail("invalid-field", "connection coefficient field does not match grid/rank");
}

inline double min_eig_field(const MetricField& h) {
    double m = 1e300;
    for (int i = 0; i < h.nodes(); ++i) m = std::min(m, min_eig(h.at(i)));
    return m;
}

inline void check_metric(const MetricField& h, const GridDomain& g, int rank) {
    if (h.rank != rank || h.nodes() != g.nodes) fail("invalid-field", "metric does not match grid/rank");
    for (int i = 0; i < g.nodes; ++i) {
        Mat H = h.at(i);
        double scale = std::max(1.0, H.norm());
        if (!H.allFinite() || (H - H.adjoint()).norm() > 1e-9 * scale || !(min_eig(H) > 0))
            fail("bad-metric", "metric is not Hermitian positive-definite at node " + std::to_string(i));
    }
}

// ---------------------------------------------------------------------------
// node-wise jets

struct NodeJet {
    int dim = 1;
    Mat H, Hi;
    Mat Hw[2], Hwb[2];
    Mat Hwwb[2][2];  // d_{w_k} d_{wbar_l} H
    Mat Hww[2][2];   // d_{w_k} d_{w_l} H
    Mat A[2], B[2];
    Mat Aw[2][2], Awb[2][2], Bw[2][2], Bwb[2][2];  // X[k][l] = d_{w_l} X_k (or wbar)
};

// first and second Wirtinger jets of a matrix-valued node function: compact
// second difference on the diagonal, products of centred differences across
template <class F>
void metric_jet(const GridDomain& g, F&& fH, int node, Mat* Hw, Mat (*Hwwb)[2], Mat (*Hww)[2]) {
    const cd I(0, 1);
    for (int k = 0; k < g.dim; ++k) {
        int uk = 2 * k, vk = 2 * k + 1;
        Hw[k] = dw(g, fH, node, k);
        Mat huu = d2(g, fH, node, uk), hvv = d2(g, fH, node, vk), huv = d11(g, fH, node, uk, vk);
        Hwwb[k][k] = (huu + hvv) * 0.25;
        Hww[k][k] = (huu - hvv - huv * (2.0 * I)) * 0.25;
    }
    if (g.dim == 2) {
        Mat uu = d11(g, fH, node, 0, 2), uv = d11(g, fH, node, 0, 3), vu = d11(g, fH, node, 1, 2),
            vv = d11(g, fH, node, 1, 3);
        Hwwb[0][1] = (uu + uv * I - vu * I + vv) * 0.25;
        Hwwb[1][0] = Hwwb[0][1].adjoint();
        Hww[0][1] = (uu - uv * I - vu * I - vv) * 0.25;
        Hww[1][0] = Hww[0][1];
    }
}

template <class FA, class FB>
void connection_jet(const GridDomain& g, FA&& fA, FB&& fB, int node, NodeJet& J) {
    for (int k = 0; k < g.dim; ++k) {
        auto a = [&](int m) { return fA(m, k); };
        auto b = [&](int m) { return fB(m, k); };
        J.A[k] = a(node);
        J.B[k] = b(node);
        for (int l = 0; l < g.dim; ++l) {
            J.Aw[k][l] = dw(g, a, node, l);
            J.Awb[k][l] = dwbar(g, a, node, l);
            J.Bw[k][l] = dw(g, b, node, l);
            J.Bwb[k][l] = dwbar(g, b, node, l);
        }
    }
}

inline NodeJet node_jet(const ConnectionField& D, const MetricField& h, const GridDomain& g, int node) {
    NodeJet J;
    J.dim = g.dim;
    auto fH = [&](int m) { return hermitize(h.at(m)); };
    J.H = fH(node);
    J.Hi = J.H.inverse();
    metric_jet(g, fH, node, J.Hw, J.Hwwb, J.Hww);
    for (int k = 0; k < g.dim; ++k) {
        J.Hwb[k] = J.Hw[k].adjoint();
        J.Hwwb[k][k] = hermitize(J.Hwwb[k][k]);
    }
    connection_jet(
        g, [&](int m, int k) { return D.A01[k].at(m); }, [&](int m, int k) { return D.A10[k].at(m); }, node, J);
    return J;
}

// Determinant line (det h, tr D). Its jets are taken on log det h, so the
// trace of G is a conservative discretisation of the line-bundle curvature:
// with det h fixed the trace part is fixed exactly, not only up to O(Delta^2).
struct DetLine {
    std::vector<double> logdet;
    std::vector<std::vector<cd>> ta, tb;  // [k][node]
};

inline DetLine det_line(const ConnectionField& D, const MetricField& h, const GridDomain& g) {
    DetLine L;
    L.logdet.resize(g.nodes);
    L.ta.assign(g.dim, std::vector<cd>(g.nodes));
    L.tb.assign(g.dim, std::vector<cd>(g.nodes));
    for (int i = 0; i < g.nodes; ++i) {
        L.logdet[i] = std::log(std::abs(hermitize(h.at(i)).determinant().real()));
        for (int k = 0; k < g.dim; ++k) {
            L.ta[k][i] = D.A01[k].at(i).trace();
            L.tb[k][i] = D.A10[k].at(i).trace();
        }
    }
    return L;
}

inline NodeJet line_jet(const DetLine& L, const GridDomain& g, int node) {
    NodeJet J;
    J.dim = g.dim;
    auto s = [](cd x) -> Mat { return Mat::Constant(1, 1, x); };
    auto fphi = [&](int m) { return s(L.logdet[m]); };
    Mat pw[2], pwwb[2][2], pww[2][2];
    metric_jet(g, fphi, node, pw, pwwb, pww);
    // metric e^{phi - phi(node)}: H = 1, H_w = phi_w, H_{w wbar} = phi_{w wbar} + phi_w phi_wbar
    J.H = J.Hi = s(1);
    for (int k = 0; k < g.dim; ++k) {
        J.Hw[k] = pw[k];
        J.Hwb[k] = pw[k].adjoint();
    }
    for (int k = 0; k < g.dim; ++k)
        for (int l = 0; l < g.dim; ++l) {
            J.Hwwb[k][l] = pwwb[k][l] + pw[k] * pw[l].adjoint();
            J.Hww[k][l] = pww[k][l] + pw[k] * pw[l];
        }
    for (int k = 0; k < g.dim; ++k) J.Hwwb[k][k] = hermitize(J.Hwwb[k][k]);
    connection_jet(
        g, [&](int m, int k) { return s(L.ta[k][m]); }, [&](int m, int k) { return s(L.tb[k][m]); }, node, J);
    return J;
}

struct NodeOps {
    Mat P[2], Q[2];                        // D* = sum dw_k (d_k + P_k) - dwbar_k (lambdabar dbar_k + Q_k)
    Mat dbar[2], del[2], theta[2], thdag[2];
    Mat C[2][2];                           // G^{1,1} coefficient on dw_k ^ dwbar_l
    Mat G20, G02;                          // coefficients on dw1^dw2, dwbar1^dwbar2
    Mat LG;                                // sqrt(-1) Lambda G
};

inline NodeOps node_ops(const NodeJet& J, cd lambda, const std::vector<double>& kappa_at, bool full = true) {
    NodeOps o;
    const int d = J.dim, r = (int)J.H.rows();
    const cd lb = std::conj(lambda);
    const double c = 1.0 / (1.0 + std::norm(lambda));
    const Mat &H = J.H, &Hi = J.Hi;
    Mat As[2], Bs[2];
    for (int k = 0; k < d; ++k) {
        As[k] = J.A[k].adjoint();
        Bs[k] = J.B[k].adjoint();
        o.P[k] = Hi * (J.Hw[k] - As[k] * H);
        o.Q[k] = Hi * (J.Hwb[k] * lb - Bs[k] * H);
        o.dbar[k] = (J.A[k] + o.Q[k] * lambda) * c;
        o.del[k] = (J.B[k] * lb + o.P[k]) * c;
        o.thdag[k] = (J.A[k] * lb - o.Q[k]) * c;
        o.theta[k] = (J.B[k] - o.P[k] * lambda) * c;
    }
    auto comm = [](const Mat& x, const Mat& y) -> Mat { return x * y - y * x; };
    o.LG = Mat::Zero(r, r);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            if (!full && k != l) continue;
            // d_{wbar_l} P_k and d_{w_k} Q_l
            Mat dbP = -Hi * J.Hwb[l] * Hi * J.Hw[k] + Hi * J.Hwwb[k][l] -
                      (-Hi * J.Hwb[l] * Hi * As[k] * H + Hi * J.Aw[k][l].adjoint() * H + Hi * As[k] * J.Hwb[l]);
            Mat dQ = (-Hi * J.Hw[k] * Hi * J.Hwb[l] + Hi * J.Hwwb[k][l]) * lb -
                     (-Hi * J.Hw[k] * Hi * Bs[l] * H + Hi * J.Bwb[l][k].adjoint() * H + Hi * Bs[l] * J.Hw[k]);
            o.C[k][l] = -(dbP - J.Aw[l][k] + comm(J.A[l], o.P[k])) +
                        (-(dQ * lambda) + J.Bwb[k][l] * lb - comm(J.B[k], o.Q[l]));
        }
    for (int k = 0; k < d; ++k) o.LG += o.C[k][k] * (2.0 / kappa_at[k]);
    o.G20 = Mat::Zero(r, r);
    o.G02 = Mat::Zero(r, r);
    if (d == 2 && full) {
        Mat cc[2][2], dd[2][2];
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) {
                if (k == l) continue;
                Mat dP = -Hi * J.Hw[k] * Hi * J.Hw[l] + Hi * J.Hww[k][l] -
                         (-Hi * J.Hw[k] * Hi * As[l] * H + Hi * J.Awb[l][k].adjoint() * H + Hi * As[l] * J.Hw[k]);
                cc[k][l] = dP * lambda - J.Bw[k][l] + comm(J.B[k], o.P[l]);
                Mat dbQ = (-Hi * J.Hwb[k] * Hi * J.Hwb[l] + Hi * J.Hww[k][l].adjoint()) * lb -
                          (-Hi * J.Hwb[k] * Hi * Bs[l] * H + Hi * J.Bw[l][k].adjoint() * H + Hi * Bs[l] * J.Hwb[k]);
                dd[k][l] = -dbQ + J.Awb[k][l] * lb - comm(J.A[k], o.Q[l]);
            }
        o.G20 = cc[0][1] - cc[1][0];
        o.G02 = dd[0][1] - dd[1][0];
    }
    return o;
}

// replace the trace part of every curvature coefficient by the determinant-line value
inline void apply_det_line(NodeOps& o, const NodeOps& line, int r, int d, bool full) {
    auto fix = [&](Mat& X, const Mat& x) {
        if (X.size() == 0) return;
        cd t = (x(0, 0) - X.trace()) / double(r);
        X += eye(r) * t;
    };
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            if (full || k == l) fix(o.C[k][l], line.C[k][l]);
    fix(o.LG, line.LG);
    if (d == 2 && full) {
        fix(o.G20, line.G20);
        fix(o.G02, line.G02);
    }
}

inline NodeOps node_ops_at(const ConnectionField& D, const MetricField& h, const DetLine& L, const GridDomain& g,
                           int node, bool full = true);

inline std::vector<double> kappa_at(const GridDomain& g, int node) {
    std::vector<double> k(g.dim);
    for (int i = 0; i < g.dim; ++i) k[i] = g.kappa[i][node];
    return k;
}

// ---------------------------------------------------------------------------
// fields of operators

struct OperatorBundle {
    cd lambda;
    std::vector<MatrixField> dbar, del, theta, theta_dag, dstar_P, dstar_Q;
    std::vector<MatrixField> G11;  // index k*dim + l
    MatrixField G20, G02, LG;
};

inline NodeOps node_ops_at(const ConnectionField& D, const MetricField& h, const DetLine& L, const GridDomain& g,
                           int node, bool full) {
    auto k = kappa_at(g, node);
    NodeOps o = node_ops(node_jet(D, h, g, node), D.lambda, k, full);
    apply_det_line(o, node_ops(line_jet(L, g, node), D.lambda, k, full), D.rank, g.dim, full);
    return o;
}

inline OperatorBundle decompose_operators(const ConnectionField& D, const MetricField& h, const GridDomain& g) {
    check_connection(D, g);
    check_metric(h, g, D.rank);
    OperatorBundle ob;
    ob.lambda = D.lambda;
    int r = D.rank, d = g.dim;
    auto mk = [&](int n) { return std::vector<MatrixField>(n, MatrixField(r, g.nodes)); };
    ob.dbar = mk(d), ob.del = mk(d), ob.theta = mk(d), ob.theta_dag = mk(d), ob.dstar_P = mk(d), ob.dstar_Q = mk(d);
    ob.G11 = mk(d * d);
    ob.G20 = ob.G02 = ob.LG = MatrixField(r, g.nodes);
    DetLine L = det_line(D, h, g);
    parallel_for(g.nodes, [&](int i) {
        NodeOps o = node_ops_at(D, h, L, g, i);
        for (int k = 0; k < d; ++k) {
            ob.dbar[k].set(i, o.dbar[k]);
            ob.del[k].set(i, o.del[k]);
            ob.theta[k].set(i, o.theta[k]);
            ob.theta_dag[k].set(i, o.thdag[k]);
            ob.dstar_P[k].set(i, o.P[k]);
            ob.dstar_Q[k].set(i, o.Q[k]);
            for (int l = 0; l < d; ++l) ob.G11[k * d + l].set(i, o.C[k][l]);
        }
        ob.G20.set(i, o.G20);
        ob.G02.set(i, o.G02);
        ob.LG.set(i, o.LG);
    });
    return ob;
}

struct GTensor {
    int dim = 1;
    std::vector<MatrixField> G11;  // k*dim + l
    MatrixField G20, G02, LG;
};

inline GTensor g_tensor(const ConnectionField& D, const MetricField& h, const GridDomain& g) {
    auto ob = decompose_operators(D, h, g);
    return {g.dim, std::move(ob.G11), std::move(ob.G20), std::move(ob.G02), std::move(ob.LG)};
}

// sqrt(-1) Lambda G only (the flow and the solvers need nothing else)
inline MatrixField lambda_g(const ConnectionField& D, const MetricField& h, const GridDomain& g) {
    MatrixField out(D.rank, g.nodes);
    DetLine L = det_line(D, h, g);
    parallel_for(g.nodes, [&](int i) { out.set(i, node_ops_at(D, h, L, g, i, false).LG); });
    return out;
}

// pointwise form norms, with |dw_k|^2 = 2/kappa_k
inline double norm11_at(const GTensor& G, const MetricField& h, const GridDomain& g, int i) {
    Mat H = h.at(i), Hi = H.inverse();
    double s = 0;
    for (int k = 0; k < g.dim; ++k)
        for (int l = 0; l < g.dim; ++l)
            s += h_norm2(G.G11[k * g.dim + l].at(i), H, Hi) * (2 / g.kappa[k][i]) * (2 / g.kappa[l][i]);
    return std::sqrt(s);
}
inline double norm2form_at(const MatrixField& F, const MetricField& h, const GridDomain& g, int i) {
    if (g.dim < 2) return 0;
    Mat H = h.at(i), Hi = H.inverse();
    return h_norm(F.at(i), H, Hi) * 2 / std::sqrt(g.kappa[0][i] * g.kappa[1][i]);
}

struct FieldNorms {
    double sup = 0, l2 = 0;
};

template <class F>
FieldNorms field_norms(const GridDomain& g, F&& pointwise) {
    std::vector<double> v(g.nodes);
    parallel_for(g.nodes, [&](int i) { v[i] = pointwise(i); });
    FieldNorms n;
    double s = 0;
    for (int i = 0; i < g.nodes; ++i) {
        if (g.interior(i)) n.sup = std::max(n.sup, v[i]);
        s += v[i] * v[i] * g.dvol(i);
    }
    n.l2 = std::sqrt(s);
    return n;
}

struct GNorms {
    FieldNorms g11, g20, g02;
};

inline GNorms g_norms(const GTensor& G, const MetricField& h, const GridDomain& g) {
    GNorms n;
    n.g11 = field_norms(g, [&](int i) { return norm11_at(G, h, g, i); });
    n.g20 = field_norms(g, [&](int i) { return norm2form_at(G.G20, h, g, i); });
    n.g02 = field_norms(g, [&](int i) { return norm2form_at(G.G02, h, g, i); });
    return n;
}

// default tolerance 10 * Delta^2 * scale
inline double default_tol(const GridDomain& g, double scale = 1.0) {
    double d = g.max_step();
    return 10 * d * d * scale;
}

// ---------------------------------------------------------------------------

struct PluriharmonicReport {
    bool is_pluriharmonic = false;
    bool shortcut_used = false;
    double norm11 = 0, norm20 = 0, norm02 = 0;
};

inline PluriharmonicReport pluriharmonic_test(const ConnectionField& D, const MetricField& h, const GridDomain& g,
                                              double tol, bool shortcut = true) {
    if (shortcut && D.lambda == cd(0, 0))
        fail("shortcut-invalid-at-lambda-zero", "the (1,1)-only criterion needs lambda != 0");
    auto G = g_tensor(D, h, g);
    auto n = g_norms(G, h, g);
    PluriharmonicReport r;
    r.norm11 = n.g11.sup;
    r.norm20 = n.g20.sup;
    r.norm02 = n.g02.sup;
    r.shortcut_used = shortcut;
    r.is_pluriharmonic = shortcut ? r.norm11 < tol : (r.norm11 < tol && r.norm20 < tol && r.norm02 < tol);
    return r;
}

// R(h) + [theta, theta^dagger] for Higgs data (lambda = 0). The field is
// sqrt(-1) Lambda of the residual (an endomorphism); norms are form norms.
struct HitchinResidual {
    MatrixField field;
    double sup = 0, l2 = 0;
};

inline HitchinResidual hitchin_residual(const ConnectionField& higgs, const MetricField& h, const GridDomain& g) {
    if (higgs.lambda != cd(0, 0)) fail("invalid-field", "Hitchin residual expects lambda = 0 data");
    auto G = g_tensor(higgs, h, g);
    auto n = field_norms(g, [&](int i) { return norm11_at(G, h, g, i); });
    return {std::move(G.LG), n.sup, n.l2};
}

// ---------------------------------------------------------------------------
// flatness of D^lambda

struct FlatnessReport {
    double sup11 = 0, sup20 = 0, sup02 = 0;
    double sup() const { return std::max({sup11, sup20, sup02}); }
};

inline FlatnessReport flatness_residual(const ConnectionField& D, const GridDomain& g) {
    check_connection(D, g);
    const cd lam = D.lambda;
    const int d = g.dim;
    std::vector<std::array<double, 3>> v(g.nodes);
    parallel_for(g.nodes, [&](int i) {
        auto at = [&](const MatrixField& f) { return [&f](int m) { return f.at(m); }; };
        double s11 = 0, s20 = 0, s02 = 0;
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) {
                Mat Bk = D.A10[k].at(i), Al = D.A01[l].at(i);
                Mat x = dw(g, at(D.A01[l]), i, k) * lam - dwbar(g, at(D.A10[k]), i, l) + Bk * Al - Al * Bk;
                s11 += x.squaredNorm() * (2 / g.kappa[k][i]) * (2 / g.kappa[l][i]);
            }
        if (d == 2) {
            double f = 2 / std::sqrt(g.kappa[0][i] * g.kappa[1][i]);
            Mat B1 = D.A10[0].at(i), B2 = D.A10[1].at(i), A1 = D.A01[0].at(i), A2 = D.A01[1].at(i);
            Mat x20 = (dw(g, at(D.A10[1]), i, 0) - dw(g, at(D.A10[0]), i, 1)) * lam + B1 * B2 - B2 * B1;
            Mat x02 = dwbar(g, at(D.A01[1]), i, 0) - dwbar(g, at(D.A01[0]), i, 1) + A1 * A2 - A2 * A1;
            s20 = x20.norm() * f;
            s02 = x02.norm() * f;
        }
        v[i] = {std::sqrt(s11), s20, s02};
    });
    FlatnessReport r;
    for (int i = 0; i < g.nodes; ++i)
        if (g.interior(i)) {
            r.sup11 = std::max(r.sup11, v[i][0]);
            r.sup20 = std::max(r.sup20, v[i][1]);
            r.sup02 = std::max(r.sup02, v[i][2]);
        }
    return r;
}

// D^lambda_h = dbar_E + lambda theta^dagger_h + lambda d_{E,h} + theta
struct LambdaFlatResult {
    ConnectionField D;
    FlatnessReport flatness;
    double hitchin_sup = 0;
    bool pluriharmonic_warning = false;
};

inline LambdaFlatResult lambda_flat_from_higgs(const ConnectionField& higgs, const MetricField& h, const GridDomain& g,
                                               cd lambda, std::optional<double> tol = std::nullopt) {
    if (higgs.lambda != cd(0, 0)) fail("invalid-field", "expected Higgs data (lambda = 0)");
    check_connection(higgs, g);
    check_metric(h, g, higgs.rank);
    LambdaFlatResult res;
    res.D = zero_connection(g, higgs.rank, lambda);
    const int d = g.dim;
    parallel_for(g.nodes, [&](int i) {
        NodeJet J = node_jet(higgs, h, g, i);
        for (int k = 0; k < d; ++k) {
            Mat P = J.Hi * (J.Hw[k] - J.A[k].adjoint() * J.H);
            Mat thdag = J.Hi * J.B[k].adjoint() * J.H;
            res.D.A01[k].set(i, J.A[k] + thdag * lambda);
            res.D.A10[k].set(i, J.B[k] + P * lambda);
        }
    });
    res.flatness = flatness_residual(res.D, g);
    auto hr = hitchin_residual(higgs, h, g);
    res.hitchin_sup = hr.sup;
    res.pluriharmonic_warning = hr.sup >= tol.value_or(default_tol(g));
    return res;
}

// ---------------------------------------------------------------------------
// squares of the derived operators (complex dimension 2):
//   lambdabar^{-1} d_{E,h}^2 + lambda^{-1} theta^2  and
//   lambda^{-1} dbar_{E,h}^2 + lambdabar^{-1} (theta^dagger)^2

struct SquareIdentityReport {
    double first = 0, second = 0;     // sup of the two combinations
    double del_sq = 0, theta_sq = 0;  // sup of the individual pieces (for scale)
};

inline SquareIdentityReport operator_square_identities(const ConnectionField& D, const MetricField& h,
                                                       const GridDomain& g) {
    if (D.lambda == cd(0, 0)) fail("invalid-field", "square identities need lambda != 0");
    SquareIdentityReport rep;
    if (g.dim < 2) return rep;
    auto ob = decompose_operators(D, h, g);
    const cd lam = D.lambda, lb = std::conj(lam);
    std::vector<std::array<double, 4>> v(g.nodes);
    parallel_for(g.nodes, [&](int i) {
        auto at = [](const MatrixField& f) { return [&f](int m) { return f.at(m); }; };
        Mat p1 = ob.del[0].at(i), p2 = ob.del[1].at(i);
        Mat q1 = ob.dbar[0].at(i), q2 = ob.dbar[1].at(i);
        Mat t1 = ob.theta[0].at(i), t2 = ob.theta[1].at(i);
        Mat s1 = ob.theta_dag[0].at(i), s2 = ob.theta_dag[1].at(i);
        Mat del2 = dw(g, at(ob.del[1]), i, 0) - dw(g, at(ob.del[0]), i, 1) + p1 * p2 - p2 * p1;
        Mat dbar2 = dwbar(g, at(ob.dbar[1]), i, 0) - dwbar(g, at(ob.dbar[0]), i, 1) + q1 * q2 - q2 * q1;
        Mat th2 = t1 * t2 - t2 * t1, sd2 = s1 * s2 - s2 * s1;
        Mat H = h.at(i), Hi = H.inverse();
        double f = 2 / std::sqrt(g.kappa[0][i] * g.kappa[1][i]);
        v[i] = {h_norm(del2 / lb + th2 / lam, H, Hi) * f, h_norm(dbar2 / lam + sd2 / lb, H, Hi) * f,
                h_norm(del2, H, Hi) * f, h_norm(th2, H, Hi) * f};
    });
    for (int i = 0; i < g.nodes; ++i) {
        if (!g.interior(i)) continue;
        rep.first = std::max(rep.first, v[i][0]);
        rep.second = std::max(rep.second, v[i][1]);
        rep.del_sq = std::max(rep.del_sq, v[i][2]);
        rep.theta_sq = std::max(rep.theta_sq, v[i][3]);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Kobayashi-Lubke pointwise densities on a complex surface chart.
// With G = sum C_kl dw_k ^ dwbar_l:
//   Tr(G^G) / dvol = -8 Tr(C11 C22 - C12 C21) / (kappa1 kappa2)
//   |G|^2 omega^2 / dvol = 2 sum |C_kl|_h^2 (2/kappa_k)(2/kappa_l)

struct KLReport {
    std::vector<double> lhs, rhs, ratio;
    double mean_ratio = 0, rel_std = 0;
};

inline void primitive_project(std::vector<MatrixField>& C, const GridDomain& g) {
    for (int i = 0; i < g.nodes; ++i) {
        Mat tr = C[0].at(i) / g.kappa[0][i] + C[3].at(i) / g.kappa[1][i];
        for (int k = 0; k < 2; ++k) C[3 * k].set(i, C[3 * k].at(i) - tr * (g.kappa[k][i] / 2));
    }
}

inline KLReport kobayashi_lubke_pointwise(std::vector<MatrixField> C, const MetricField& h, const GridDomain& g,
                                          bool project = false, double tol = 1e-10) {
    if (g.dim != 2) fail("dimension-too-low", "Kobayashi-Lubke check needs a complex surface grid");
    if (C.size() != 4) fail("invalid-field", "expected four (1,1) components");
    if (project) primitive_project(C, g);
    KLReport r;
    r.lhs.resize(g.nodes);
    r.rhs.resize(g.nodes);
    r.ratio.resize(g.nodes);
    for (int i = 0; i < g.nodes; ++i) {
        Mat H = h.at(i), Hi = H.inverse();
        Mat c11 = C[0].at(i), c12 = C[1].at(i), c21 = C[2].at(i), c22 = C[3].at(i);
        double k1 = g.kappa[0][i], k2 = g.kappa[1][i];
        double scale = h_norm(c11, H, Hi) / k1 + h_norm(c22, H, Hi) / k2 + 1e-300;
        if (h_norm(c11 / k1 + c22 / k2, H, Hi) > tol * std::max(1.0, scale))
            fail("not-primitive", "Lambda G is not zero at node " + std::to_string(i));
        r.lhs[i] = -8 * (c11 * c22 - c12 * c21).trace().real() / (k1 * k2);
        double n2 = h_norm2(c11, H, Hi) * 4 / (k1 * k1) + h_norm2(c22, H, Hi) * 4 / (k2 * k2) +
                    (h_norm2(c12, H, Hi) + h_norm2(c21, H, Hi)) * 4 / (k1 * k2);
        r.rhs[i] = 2 * n2;
        r.ratio[i] = r.rhs[i] > 0 ? r.lhs[i] / r.rhs[i] : 0.0;
    }
    double s = 0, s2 = 0;
    int cnt = 0;
    for (int i = 0; i < g.nodes; ++i)
        if (r.rhs[i] > 0) {
            s += r.ratio[i];
            ++cnt;
        }
    if (cnt) {
        r.mean_ratio = s / cnt;
        for (int i = 0; i < g.nodes; ++i)
            if (r.rhs[i] > 0) s2 += (r.ratio[i] - r.mean_ratio) * (r.ratio[i] - r.mean_ratio);
        r.rel_std = std::sqrt(s2 / cnt) / std::abs(r.mean_ratio);
    }
    return r;
}

}  // namespace parh
