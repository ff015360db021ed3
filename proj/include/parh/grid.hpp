#pragma once
// Grids in logarithmic / flat charts, node-wise matrix fields, stencils.
//
// Every chart uses a coordinate w_k = u_k + i v_k per complex dimension:
// annulus factors use w = log z (u = log|z| non-periodic, v = arg z periodic),
// torus factors use the flat coordinate. The Kahler form is
// omega = (i/2) sum_k kappa_k dw_k ^ dw_k-bar, so for the flat z-metric on an
// annulus kappa = |z|^2 = e^{2u}.

#include "parh/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

namespace parh {

using cd = std::complex<double>;
constexpr int kMaxRank = 8;
using Mat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxRank, kMaxRank>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxRank, 1>;

enum class ChartKind { torus, annulus };

struct Axis {
    int n = 0;
    double lo = 0, step = 0;
    bool periodic = true;
};

struct GridDomain {
    ChartKind kind = ChartKind::torus;
    int dim = 1;              // complex dimension (1 or 2)
    std::vector<Axis> axes;   // 2*dim real axes: u_1, v_1, u_2, v_2
    std::vector<int> stride;  // row-major: last axis fastest
    int nodes = 0;
    // kappa[k][node]: Kahler weight of the k-th complex factor
    std::vector<std::vector<double>> kappa;
    double r_min = 0, r_max = 0;      // annulus radii (all factors)
    double period_x = 0, period_y = 0;  // torus periods (all factors)

    int n(int a) const { return axes[a].n; }
    int index(int node, int a) const { return (node / stride[a]) % axes[a].n; }
    double coord(int node, int a) const { return axes[a].lo + axes[a].step * index(node, a); }
    int shift(int node, int a, int off) const {
        int i = index(node, a), m = axes[a].n, j = i + off;
        if (axes[a].periodic) j = ((j % m) + m) % m;
        return node + (j - i) * stride[a];
    }
    bool interior(int node) const {
        for (int a = 0; a < (int)axes.size(); ++a)
            if (!axes[a].periodic) {
                int i = index(node, a);
                if (i == 0 || i == axes[a].n - 1) return false;
            }
        return true;
    }
    // quadrature weight for du dv (trapezoid in non-periodic directions)
    double cell(int node) const {
        double w = 1;
        for (int a = 0; a < (int)axes.size(); ++a) {
            double s = axes[a].step;
            if (!axes[a].periodic) {
                int i = index(node, a);
                if (i == 0 || i == axes[a].n - 1) s *= 0.5;
            }
            w *= s;
        }
        return w;
    }
    double kappa_prod(int node) const {
        double p = 1;
        for (auto& k : kappa) p *= k[node];
        return p;
    }
    double dvol(int node) const { return cell(node) * kappa_prod(node); }
    // complex coordinate w_k at a node
    cd w(int node, int k) const { return {coord(node, 2 * k), coord(node, 2 * k + 1)}; }
    double min_step() const {
        double s = 1e300;
        for (auto& a : axes) s = std::min(s, a.step);
        return s;
    }
    double max_step() const {
        double s = 0;
        for (auto& a : axes) s = std::max(s, a.step);
        return s;
    }
    double volume() const {
        double v = 0;
        for (int i = 0; i < nodes; ++i) v += dvol(i);
        return v;
    }
};

namespace detail {
inline void finish_grid(GridDomain& g) {
    int na = (int)g.axes.size();
    g.stride.assign(na, 1);
    for (int a = na - 2; a >= 0; --a) g.stride[a] = g.stride[a + 1] * g.axes[a + 1].n;
    g.nodes = g.stride[0] * g.axes[0].n;
}
}  // namespace detail

inline GridDomain make_annulus(double r_min, double r_max, int res, int dim = 1) {
    if (!(r_min > 0) || !(r_max > r_min)) fail("out-of-domain", "annulus needs 0 < r_min < r_max");
    if (res < 8) fail("invalid-grid", "resolution must be at least 8 per axis");
    if (dim < 1 || dim > 2) fail("invalid-grid", "complex dimension must be 1 or 2");
    GridDomain g;
    g.kind = ChartKind::annulus;
    g.dim = dim;
    g.r_min = r_min;
    g.r_max = r_max;
    double lu = std::log(r_min), hu = std::log(r_max);
    for (int k = 0; k < dim; ++k) {
        g.axes.push_back({res, lu, (hu - lu) / (res - 1), false});
        g.axes.push_back({res, 0.0, 2 * std::numbers::pi / res, true});
    }
    detail::finish_grid(g);
    g.kappa.assign(dim, std::vector<double>(g.nodes));
    for (int k = 0; k < dim; ++k)
        for (int i = 0; i < g.nodes; ++i) g.kappa[k][i] = std::exp(2 * g.coord(i, 2 * k));
    return g;
}

inline GridDomain make_torus(double px, double py, int res, int dim = 1) {
    if (!(px > 0) || !(py > 0)) fail("invalid-grid", "torus periods must be positive");
    if (res < 8) fail("invalid-grid", "resolution must be at least 8 per axis");
    if (dim < 1 || dim > 2) fail("invalid-grid", "complex dimension must be 1 or 2");
    GridDomain g;
    g.kind = ChartKind::torus;
    g.dim = dim;
    g.period_x = px;
    g.period_y = py;
    for (int k = 0; k < dim; ++k) {
        g.axes.push_back({res, 0.0, px / res, true});
        g.axes.push_back({res, 0.0, py / res, true});
    }
    detail::finish_grid(g);
    g.kappa.assign(dim, std::vector<double>(g.nodes, 1.0));
    return g;
}

// ---------------------------------------------------------------------------
// threads

inline int thread_cap() {
    int hw = (int)std::max(1u, std::thread::hardware_concurrency());
    if (const char* s = std::getenv("PARH_THREADS")) {
        int v = std::atoi(s);
        if (v >= 1) return std::min(v, hw);
    }
    return hw;
}

// Each index is handled by exactly one thread; callers write only to slot i,
// so results do not depend on the thread count.
template <class F>
void parallel_for(int n, F&& f) {
    int t = std::min(thread_cap(), std::max(1, n / 256));
    if (t <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    int chunk = (n + t - 1) / t;
    for (int k = 0; k < t; ++k)
        pool.emplace_back([&, k] {
            int lo = k * chunk, hi = std::min(n, lo + chunk);
            for (int i = lo; i < hi; ++i) f(i);
        });
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// matrix fields: node-major, row-major r x r blocks

struct MatrixField {
    int rank = 0;
    std::vector<cd> data;

    MatrixField() = default;
    MatrixField(int r, int nodes) : rank(r), data((size_t)r * r * nodes) {}
    int nodes() const { return rank ? (int)(data.size() / ((size_t)rank * rank)) : 0; }
    Mat at(int node) const {
        Mat m(rank, rank);
        const cd* p = &data[(size_t)node * rank * rank];
        for (int i = 0; i < rank; ++i)
            for (int j = 0; j < rank; ++j) m(i, j) = p[i * rank + j];
        return m;
    }
    void set(int node, const Mat& m) {
        cd* p = &data[(size_t)node * rank * rank];
        for (int i = 0; i < rank; ++i)
            for (int j = 0; j < rank; ++j) p[i * rank + j] = m(i, j);
    }
    cd& entry(int node, int i, int j) { return data[(size_t)node * rank * rank + i * rank + j]; }
    cd entry(int node, int i, int j) const { return data[(size_t)node * rank * rank + i * rank + j]; }
};

inline Mat zero_mat(int r) { return Mat::Zero(r, r); }
inline Mat eye(int r) { return Mat::Identity(r, r); }

template <class F>
MatrixField make_field(const GridDomain& g, int rank, F&& f) {
    MatrixField m(rank, g.nodes);
    parallel_for(g.nodes, [&](int i) { m.set(i, f(i)); });
    return m;
}

// ---------------------------------------------------------------------------
// stencils; f maps a node index to a value (Mat or scalar)

template <class F>
auto d1(const GridDomain& g, F&& f, int node, int a) -> decltype(f(node)) {
    const Axis& ax = g.axes[a];
    double h = ax.step;
    if (ax.periodic) return (f(g.shift(node, a, 1)) - f(g.shift(node, a, -1))) * (0.5 / h);
    int i = g.index(node, a);
    // ends: quadratic extrapolation of the centred differences from rows 1..3, so
    // the edge error continues the interior error profile and a derived field
    // differentiated once more stays O(h^2) next to the edge
    if (i == 0 || i == ax.n - 1) {
        int s = i == 0 ? 1 : -1;
        auto at = [&](int j) { return f(g.shift(node, a, s * j)); };
        return (at(0) * -3.0 + at(1) * 3.0 + at(2) * 2.0 - at(3) * 3.0 + at(4)) * (s * 0.5 / h);
    }
    return (f(g.shift(node, a, 1)) - f(g.shift(node, a, -1))) * (0.5 / h);
}

template <class F>
auto d2(const GridDomain& g, F&& f, int node, int a) -> decltype(f(node)) {
    const Axis& ax = g.axes[a];
    double h2 = ax.step * ax.step;
    int i = g.index(node, a);
    if (!ax.periodic && (i == 0 || i == ax.n - 1)) {
        int s = i == 0 ? 1 : -1;
        auto at = [&](int j) { return f(g.shift(node, a, s * j)); };
        return (at(0) * 3.0 - at(1) * 9.0 + at(2) * 10.0 - at(3) * 5.0 + at(4)) * (1.0 / h2);
    }
    return (f(g.shift(node, a, 1)) + f(g.shift(node, a, -1)) - f(node) * 2.0) * (1.0 / h2);
}

// product of first differences along two distinct axes
template <class F>
auto d11(const GridDomain& g, F&& f, int node, int a, int b) -> decltype(f(node)) {
    return d1(g, [&](int m) { return d1(g, f, m, b); }, node, a);
}

// Wirtinger derivatives: d/dw = (d_u - i d_v)/2, d/dwbar = (d_u + i d_v)/2
template <class F>
auto dw(const GridDomain& g, F&& f, int node, int k) -> decltype(f(node)) {
    const cd half(0.5, 0), ihalf(0, 0.5);
    return d1(g, f, node, 2 * k) * half - d1(g, f, node, 2 * k + 1) * ihalf;
}
template <class F>
auto dwbar(const GridDomain& g, F&& f, int node, int k) -> decltype(f(node)) {
    const cd half(0.5, 0), ihalf(0, 0.5);
    return d1(g, f, node, 2 * k) * half + d1(g, f, node, 2 * k + 1) * ihalf;
}

// ---------------------------------------------------------------------------
// Hermitian linear algebra

inline Mat hermitize(const Mat& m) { return (m + m.adjoint()) * 0.5; }

struct HermDecomp {
    RVec evals;
    Mat evecs;
};
inline HermDecomp herm_eig(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(m));
    return {es.eigenvalues(), es.eigenvectors()};
}
template <class Fn>
Mat herm_apply(const Mat& m, Fn&& fn) {
    auto d = herm_eig(m);
    Mat D = Mat::Zero(m.rows(), m.cols());
    for (int i = 0; i < (int)m.rows(); ++i) D(i, i) = fn(d.evals(i));
    return d.evecs * D * d.evecs.adjoint();
}
inline Mat herm_sqrt(const Mat& m) { return herm_apply(m, [](double x) { return std::sqrt(x); }); }
inline Mat herm_isqrt(const Mat& m) { return herm_apply(m, [](double x) { return 1 / std::sqrt(x); }); }
inline Mat herm_exp(const Mat& m) { return herm_apply(m, [](double x) { return std::exp(x); }); }
inline Mat herm_log(const Mat& m) { return herm_apply(m, [](double x) { return std::log(x); }); }
inline double min_eig(const Mat& m) { return herm_eig(m).evals.minCoeff(); }

// adjoint with respect to h(u,v) = v^* H u
inline Mat h_adjoint(const Mat& X, const Mat& H, const Mat& Hinv) { return Hinv * X.adjoint() * H; }

// pointwise norm |X|_h: Frobenius norm of H^{1/2} X H^{-1/2}
inline double h_norm2(const Mat& X, const Mat& H, const Mat& Hinv) {
    // Tr(X X^{dagger_h}) = Tr(X Hinv X^* H)
    return std::max(0.0, (X * Hinv * X.adjoint() * H).trace().real());
}
inline double h_norm(const Mat& X, const Mat& H, const Mat& Hinv) { return std::sqrt(h_norm2(X, H, Hinv)); }

inline double frob(const Mat& X) { return X.norm(); }

}  // namespace parh
