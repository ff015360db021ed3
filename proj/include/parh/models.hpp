#pragma once
// Explicit model objects: L_eps, the rank-2 model harmonic metric and its
// symmetric powers, model filtered lambda-flat bundles built from blocks, the
// eps-families of metrics attached to blocks and their curvature sweep.

#include "parh/filtered.hpp"
#include "parh/lambda_ops.hpp"
#include "parh/weights.hpp"

#include <cmath>
#include <limits>

namespace parh {

// L_eps as a function of u = log|z| < 0:  (e^{-eps u} - e^{eps u}) / eps
inline double l_eps_u(double u, double eps) {
    if (!(u < 0) || !std::isfinite(u)) fail("out-of-domain", "L_eps needs 0 < |z| < 1");
    if (!(eps >= 0) || !std::isfinite(eps)) fail("out-of-domain", "L_eps needs eps >= 0");
    if (eps < 1e-8) {
        double x = eps * u, x2 = x * x;
        return -2 * u * (1 + x2 / 6 + x2 * x2 / 120 + x2 * x2 * x2 / 5040);
    }
    return -2 * std::sinh(eps * u) / eps;
}

inline double l_eps(double z_abs, double eps) {
    if (!(z_abs > 0 && z_abs < 1)) fail("out-of-domain", "L_eps needs 0 < |z| < 1");
    return l_eps_u(std::log(z_abs), eps);
}

// size-s nilpotent in the unitary sl2 normalisation: e_j -> n_j e_{j+1}
inline Mat sl2_lowering(int s) {
    Mat N = Mat::Zero(s, s);
    for (int j = 0; j + 1 < s; ++j) N(j + 1, j) = std::sqrt(double((j + 1) * (s - 1 - j)));
    return N;
}

struct ModelHarmonicBundle {
    int rank = 0;
    ConnectionField higgs;  // lambda = 0; dw-coefficient is the Higgs field in log coordinates
    MetricField h;
    FilteredSpec spec;
};

namespace detail {

// total log-coordinate: u for curves, u1 + u2 for the pull-back along z1 z2
inline double total_u(const GridDomain& g, int node) {
    double u = 0;
    for (int k = 0; k < g.dim; ++k) u += g.coord(node, 2 * k);
    return u;
}

inline void require_unit_annulus(const GridDomain& g) {
    if (g.kind != ChartKind::annulus) fail("out-of-domain", "model metrics live on an annulus chart");
    if (!(g.r_max < 1)) fail("out-of-domain", "annulus must lie inside the unit disc");
}

inline FilteredSpec nilpotent_spec(int rank) {
    FilteredSpec s;
    s.rank = rank;
    s.label = "sym-power-model";
    ModelBlock b;
    b.weights = {Rational(0)};
    b.jordan = {rank};
    s.blocks = {b};
    ComponentData c;
    c.weights.component_id = "D";
    c.weights.entries = {{Rational(0), rank}};
    c.residues = normalize_residues(c.weights, {{Rational(0), ComplexQ(), {rank}, std::nullopt}});
    s.components = {c};
    return s;
}

}  // namespace detail

// Sym^{l-1} of the rank-2 model: H = diag(L_eps^{l-1-2j}), Theta = sl2 lowering
// (times dz/z). On a 2-dimensional annulus grid the model is pulled back along
// zeta = z1 z2.
inline ModelHarmonicBundle sym_power_model(int l, double eps, const GridDomain& g) {
    if (l < 1 || l > kMaxRank) fail("invalid-field", "symmetric power rank out of range");
    detail::require_unit_annulus(g);
    ModelHarmonicBundle m;
    m.rank = l;
    m.higgs = zero_connection(g, l, 0);
    Mat N = sl2_lowering(l);
    m.h = MatrixField(l, g.nodes);
    for (int i = 0; i < g.nodes; ++i) {
        double L = l_eps_u(detail::total_u(g, i), eps);
        Mat H = Mat::Zero(l, l);
        for (int j = 0; j < l; ++j) H(j, j) = std::pow(L, l - 1 - 2 * j);
        m.h.set(i, H);
        for (int k = 0; k < g.dim; ++k) m.higgs.A10[k].set(i, N);
    }
    m.spec = detail::nilpotent_spec(l);
    return m;
}

inline ModelHarmonicBundle rank2_model_metric(double eps, const GridDomain& g) {
    auto m = sym_power_model(2, eps, g);
    m.spec.label = "rank2-model";
    return m;
}

// ---------------------------------------------------------------------------
// blocks

namespace detail {

inline void check_blocks(const std::vector<ModelBlock>& blocks) {
    if (blocks.empty()) fail("inconsistent-dims", "no blocks");
    int r = 0;
    for (auto& b : blocks) {
        validate(b, 1);
        r += b.dim();
    }
    if (r > kMaxRank) fail("inconsistent-dims", "total rank exceeds " + std::to_string(kMaxRank));
}

// dw-coefficient of a block: (d a / dw + alpha) I + f
inline Mat block_coefficient(const ModelBlock& b, cd w) {
    cd s = b.alpha.to_complex();
    for (int j = 1; j <= b.pole_order(); ++j) s += -double(j) * b.irregular[j - 1].to_complex() * std::exp(-double(j) * w);
    int d = b.dim();
    Mat M = Mat::Identity(d, d) * s;
    int off = 0;
    for (int len : b.jordan) {
        M.block(off, off, len, len) += sl2_lowering(len);
        off += len;
    }
    return M;
}

inline WeightSet block_weight_set(const std::vector<ModelBlock>& blocks) {
    WeightSet w;
    w.component_id = "D";
    for (auto& b : blocks) add_weight(w, b.weights[0], b.dim());
    return w;
}

}  // namespace detail

inline int total_rank(const std::vector<ModelBlock>& blocks) {
    int r = 0;
    for (auto& b : blocks) r += b.dim();
    return r;
}

struct ModelBundle {
    FilteredSpec spec;
    ConnectionField D;
    int e = 1;  // covering degree; residues carry Z/e characters when e > 1
};

// D^lambda(v) = d(a) v + (alpha v + f(v)) dzeta/zeta, block by block, on the
// covering chart (zeta-annulus, w = log zeta).
inline ModelBundle build_model_bundle(const std::vector<ModelBlock>& blocks, const ComplexQ& lambda, int e,
                                      const GridDomain& g) {
    detail::check_blocks(blocks);
    if (e < 1) fail("inconsistent-dims", "covering degree must be >= 1");
    if (g.kind != ChartKind::annulus || g.dim != 1) fail("invalid-grid", "model bundles live on a 1-dim annulus");
    for (auto& b : blocks)
        for (int j = 1; j <= b.pole_order(); ++j)
            if (j % e != 0 && !b.irregular[j - 1].is_zero())
                fail("not-equivariant", "irregular value is not invariant under zeta -> mu zeta");
    int r = total_rank(blocks);
    ModelBundle out;
    out.e = e;
    out.D = zero_connection(g, r, lambda.to_complex());
    parallel_for(g.nodes, [&](int i) {
        Mat M = Mat::Zero(r, r);
        int off = 0;
        for (auto& b : blocks) {
            M.block(off, off, b.dim(), b.dim()) = detail::block_coefficient(b, g.w(i, 0));
            off += b.dim();
        }
        out.D.A10[0].set(i, M);
    });
    FilteredSpec& s = out.spec;
    s.rank = r;
    s.lambda = lambda;
    s.label = "model";
    s.blocks = blocks;
    ComponentData c;
    c.weights = detail::block_weight_set(blocks);
    std::vector<ResidueDatum> res;
    for (auto& b : s.blocks) {
        std::optional<int> chi;
        if (e > 1) {
            if (b.characters.empty()) b.characters = {0};
            chi = ((b.characters[0] % e) + e) % e;
        }
        res.push_back({b.weights[0], b.alpha, b.jordan, chi});
    }
    c.residues = normalize_residues(c.weights, res);
    s.components = {c};
    validate(s);
    return out;
}

// Higgs field of the blocks (lambda = 0 data of the same shape)
inline ConnectionField model_higgs(const std::vector<ModelBlock>& blocks, const GridDomain& g) {
    detail::check_blocks(blocks);
    int r = total_rank(blocks);
    auto D = zero_connection(g, r, 0);
    parallel_for(g.nodes, [&](int i) {
        for (int k = 0; k < g.dim; ++k) {
            Mat M = Mat::Zero(r, r);
            int off = 0;
            cd w = 0;
            for (int q = 0; q < g.dim; ++q) w += g.w(i, q);
            for (auto& b : blocks) {
                M.block(off, off, b.dim(), b.dim()) = detail::block_coefficient(b, w);
                off += b.dim();
            }
            D.A10[k].set(i, M);
        }
    });
    return D;
}

// eta: min(1, gap of the block weights), a single weight counting as gap 1
inline Rational model_family_eta(const std::vector<ModelBlock>& blocks) {
    Rational g(1);
    try {
        g = gap(detail::block_weight_set(blocks), 1);
    } catch (const Error& err) {
        if (err.kind() != "degenerate-gap") throw;
    }
    return g < Rational(1) ? g : Rational(1);
}

inline int max_block_rank(const std::vector<ModelBlock>& blocks) {
    int m = 0;
    for (auto& b : blocks) m = std::max(m, b.dim());
    return m;
}

// Perturbed weight a(eps) of each block (degree-preserving psi).
inline std::vector<Rational> family_block_weights(const std::vector<ModelBlock>& blocks, const Rational& eps) {
    auto w = detail::block_weight_set(blocks);
    PsiMap psi = eps > Rational(0) ? degree_preserving_psi(w, eps) : identity_psi(w);
    std::vector<Rational> out;
    for (auto& b : blocks) out.push_back(psi.at(b.weights[0]));
    return out;
}

// Expected growth exponents of the frame vectors: a(eps) + eps k with k the
// W-level (top of a Jordan string first).
inline std::vector<Rational> family_expected_weights(const std::vector<ModelBlock>& blocks, const Rational& eps) {
    auto a = family_block_weights(blocks, eps);
    std::vector<Rational> out;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int s : blocks[b].jordan)
            for (int j = 0; j < s; ++j) out.push_back(a[b] + eps * Rational(s - 1 - 2 * j));
    return out;
}

// h^(eps) = direct sum over blocks of |z|^{-2 a(eps)} diag(L_{2eps}^{s-1-2j})
inline MetricField model_family_metric(const std::vector<ModelBlock>& blocks, const Rational& eps,
                                       const GridDomain& g) {
    detail::check_blocks(blocks);
    detail::require_unit_annulus(g);
    if (eps < Rational(0)) fail("epsilon-too-large", "eps must be non-negative");
    Rational eta = model_family_eta(blocks);
    if (Rational(10 * max_block_rank(blocks)) * eps > eta)
        fail("epsilon-too-large", "need 10 * block rank * eps <= eta = " + eta.str());
    auto a = family_block_weights(blocks, eps);
    int r = total_rank(blocks);
    double e2 = 2 * eps.to_double();
    MetricField h(r, g.nodes);
    parallel_for(g.nodes, [&](int i) {
        double u = detail::total_u(g, i);
        double L = l_eps_u(u, e2);
        Mat H = Mat::Zero(r, r);
        int off = 0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            double base = std::exp(-2 * a[b].to_double() * u);
            for (int s : blocks[b].jordan) {
                for (int j = 0; j < s; ++j) H(off + j, off + j) = base * std::pow(L, s - 1 - 2 * j);
                off += s;
            }
        }
        h.set(i, H);
    });
    return h;
}

// Growth exponents b_j with |v_j|_h ~ |z|^{-b_j}: least-squares slope of
// log|v_j| against log|z| over the inner half of the annulus.
inline std::vector<double> estimate_weights(const MetricField& h, const GridDomain& g) {
    if (g.kind != ChartKind::annulus || g.dim != 1) fail("invalid-grid", "weight estimation needs a 1-dim annulus");
    int nu = g.n(0), nv = g.n(1), rows = nu / 2;
    std::vector<double> out;
    for (int j = 0; j < h.rank; ++j) {
        double su = 0, sf = 0, suu = 0, suf = 0;
        for (int iu = 0; iu < rows; ++iu) {
            double f = 0;
            for (int iv = 0; iv < nv; ++iv) f += 0.5 * std::log(h.entry(iu * nv + iv, j, j).real());
            f /= nv;
            double u = g.axes[0].lo + g.axes[0].step * iu;
            su += u, sf += f, suu += u * u, suf += u * f;
        }
        double slope = (rows * suf - su * sf) / (rows * suu - su * su);
        out.push_back(-slope);
    }
    return out;
}

// ---------------------------------------------------------------------------
// curvature sweep over eps for a perturbed model Higgs field

struct CurvatureRow {
    Rational eps;
    double sup_G = 0;
};

struct CurvatureTable {
    std::vector<CurvatureRow> rows;
    double ratio = 0;  // max / min of sup_G over eps
    bool grows_with_eps = false;
};

// perturbation: dw-coefficient added to the model Higgs field.  Decay
// hypotheses: entries between different blocks <= C |z|^{10 m}, entries inside
// a block <= C |z|^{4 eta}.  Norms use kappa_eps = eta^2 |z|^{2 eta} + eps^2 |z|^{2 eps}.
inline CurvatureTable curvature_bound_check(const std::vector<ModelBlock>& blocks, const MatrixField& perturbation,
                                            const std::vector<Rational>& eps_list, const GridDomain& g,
                                            double C = 1.0) {
    detail::check_blocks(blocks);
    detail::require_unit_annulus(g);
    if (g.dim != 1) fail("invalid-grid", "curvature sweep runs on a 1-dim annulus");
    if (eps_list.empty()) fail("invalid-parameter", "empty eps list");
    int r = total_rank(blocks);
    if (perturbation.rank != r || perturbation.nodes() != g.nodes)
        fail("invalid-field", "perturbation does not match the blocks");
    int m = 0;
    for (auto& b : blocks) m = std::max(m, b.pole_order());
    double eta = model_family_eta(blocks).to_double();
    std::vector<int> owner;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int k = 0; k < blocks[b].dim(); ++k) owner.push_back((int)b);
    for (int i = 0; i < g.nodes; ++i) {
        double z = std::exp(g.coord(i, 0));
        for (int p = 0; p < r; ++p)
            for (int q = 0; q < r; ++q) {
                double bound = owner[p] != owner[q] ? C * std::pow(z, 10 * m) : C * std::pow(z, 4 * eta);
                if (std::abs(perturbation.entry(i, p, q)) > bound * (1 + 1e-9) + 1e-300)
                    fail("hypothesis-violated", "perturbation entry (" + std::to_string(p) + "," +
                                                    std::to_string(q) + ") exceeds its decay bound");
            }
    }
    auto D = model_higgs(blocks, g);
    for (int i = 0; i < g.nodes; ++i) D.A10[0].set(i, D.A10[0].at(i) + perturbation.at(i));
    CurvatureTable t;
    for (auto& eps : eps_list) {
        auto h = model_family_metric(blocks, eps, g);
        auto G = g_tensor(D, h, g);
        double e = eps.to_double(), sup = 0;
        for (int i = 0; i < g.nodes; ++i) {
            if (!g.interior(i)) continue;
            double z = std::exp(g.coord(i, 0));
            double kap = eta * eta * std::pow(z, 2 * eta) + e * e * std::pow(z, 2 * e);
            Mat H = h.at(i), Hi = H.inverse();
            sup = std::max(sup, 2 * h_norm(G.G11[0].at(i), H, Hi) / kap);
        }
        t.rows.push_back({eps, sup});
    }
    double mx = 0, mn = std::numeric_limits<double>::infinity();
    for (auto& row : t.rows) mx = std::max(mx, row.sup_G), mn = std::min(mn, row.sup_G);
    t.ratio = mn > 0 ? mx / mn : (mx > 0 ? std::numeric_limits<double>::infinity() : 1.0);
    t.grows_with_eps = t.ratio >= 3;
    return t;
}

}  // namespace parh
