#pragma once
// Hermitian-Einstein machinery on grid charts: the Kahler family omega_eps,
// HE constants, a spectral Poisson solver, the rank-one solve, the
// (preconditioned) heat flow with Donaldson-functional tracking, and the
// Chern-Weil comparison for sub-bundles.

#include "parh/lambda_ops.hpp"
#include "parh/rational.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

namespace parh {

// ---------------------------------------------------------------------------
// omega_eps: conformal factor 1 + C eps^{N+4} |z|^{2 eps - 2} on the annulus

struct KahlerEps {
    GridDomain g;  // copy of the base grid carrying the modified kappa
    double eps = 0;
    int N = 11;
    double C = 1;
    std::vector<double> factor;
};

inline KahlerEps kahler_eps(const GridDomain& base, double eps, int N, double C) {
    if (N <= 10) fail("invalid-parameter", "N must exceed 10");
    if (!(C > 0)) fail("invalid-parameter", "C must be positive");
    if (!(eps >= 0 && eps < 0.1)) fail("invalid-parameter", "eps must lie in [0, 1/10)");
    KahlerEps k{base, eps, N, C, std::vector<double>(base.nodes, 1.0)};
    if (base.kind == ChartKind::annulus && eps > 0) {
        double coef = C * std::pow(eps, N + 4);
        for (int i = 0; i < base.nodes; ++i) {
            double f = 1;
            for (int q = 0; q < base.dim; ++q) {
                double u = base.coord(i, 2 * q);
                double fq = 1 + coef * std::exp((2 * eps - 2) * u);
                k.g.kappa[q][i] *= fq;
                f *= fq;
            }
            k.factor[i] = f;
        }
    }
    for (double f : k.factor)
        if (!(f > 0) || !std::isfinite(f)) fail("invalid-parameter", "conformal factor is not positive");
    return k;
}

inline double he_constant(const Rational& deg_par, double vol, cd lambda, int n) {
    if (!(vol > 0)) fail("invalid-parameter", "volume must be positive");
    return 2 * std::numbers::pi * n * (1 + std::norm(lambda)) * deg_par.to_double() / vol;
}

// ---------------------------------------------------------------------------
// Poisson solver for the compact five-point Laplacian in (u, v) on a 1-dim
// chart. Torus: fully periodic, the constant mode is dropped. Annulus:
// periodic in v, homogeneous Dirichlet on the first and last u-rows.

class PoissonSolver {
public:
    explicit PoissonSolver(const GridDomain& g) : g_(g) {
        if (g.dim != 1) fail("invalid-grid", "Poisson solver handles complex dimension 1");
        nu_ = g.n(0);
        nv_ = g.n(1);
        buf_ = fftw_alloc_complex((size_t)nu_ * nv_);
        std::lock_guard<std::mutex> lk(plan_mutex());
        auto* b = buf_;
        if (g.kind == ChartKind::torus) {
            fwd_ = fftw_plan_dft_2d(nu_, nv_, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_2d(nu_, nv_, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
        } else {
            int n[1] = {nv_};
            fwd_ = fftw_plan_many_dft(1, n, nu_, b, nullptr, 1, nv_, b, nullptr, 1, nv_, FFTW_FORWARD, FFTW_ESTIMATE);
            bwd_ = fftw_plan_many_dft(1, n, nu_, b, nullptr, 1, nv_, b, nullptr, 1, nv_, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
    }
    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;
    ~PoissonSolver() {
        std::lock_guard<std::mutex> lk(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    // returns z with Lap_d z = f
    std::vector<cd> solve(const std::vector<cd>& f) const {
        const int N = nu_ * nv_;
        auto* b = reinterpret_cast<cd*>(buf_);
        std::copy(f.begin(), f.end(), b);
        fftw_execute(fwd_);
        double hu = g_.axes[0].step, hv = g_.axes[1].step;
        auto sym_v = [&](int m) {
            double s = std::sin(std::numbers::pi * m / nv_);
            return -4 * s * s / (hv * hv);
        };
        if (g_.kind == ChartKind::torus) {
            for (int i = 0; i < nu_; ++i) {
                double s = std::sin(std::numbers::pi * i / nu_);
                double su = -4 * s * s / (hu * hu);
                for (int m = 0; m < nv_; ++m) {
                    double sym = su + sym_v(m);
                    cd& x = b[i * nv_ + m];
                    x = std::abs(sym) < 1e-12 ? cd(0) : x / sym;
                }
            }
        } else {
            // per v-mode: tridiagonal in u over rows 1..nu-2, zero at both ends
            int n = nu_ - 2;
            std::vector<cd> c(n), d(n);
            for (int m = 0; m < nv_; ++m) {
                double diag = -2 / (hu * hu) + sym_v(m), off = 1 / (hu * hu);
                // Thomas algorithm
                for (int k = 0; k < n; ++k) {
                    cd rhs = b[(k + 1) * nv_ + m];
                    if (k == 0) {
                        c[k] = off / diag;
                        d[k] = rhs / diag;
                    } else {
                        cd den = diag - off * c[k - 1];
                        c[k] = off / den;
                        d[k] = (rhs - off * d[k - 1]) / den;
                    }
                }
                for (int k = n - 1; k >= 0; --k)
                    if (k < n - 1) d[k] -= c[k] * d[k + 1];
                b[m] = 0;
                b[(nu_ - 1) * nv_ + m] = 0;
                for (int k = 0; k < n; ++k) b[(k + 1) * nv_ + m] = d[k];
            }
        }
        fftw_execute(bwd_);
        double scale = g_.kind == ChartKind::torus ? 1.0 / N : 1.0 / nv_;
        std::vector<cd> z(N);
        for (int i = 0; i < N; ++i) z[i] = b[i] * scale;
        return z;
    }

private:
    static std::mutex& plan_mutex() {
        static std::mutex m;
        return m;
    }
    const GridDomain& g_;
    int nu_ = 0, nv_ = 0;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

// ---------------------------------------------------------------------------
// HE residual S = sqrt(-1) Lambda G(h) - A id, made exactly h-self-adjoint

inline MatrixField he_residual_field(const ConnectionField& D, const MetricField& h, const GridDomain& g, double A) {
    MatrixField S = lambda_g(D, h, g);
    parallel_for(g.nodes, [&](int i) {
        Mat H = h.at(i), Hi = H.inverse();
        Mat X = S.at(i) - eye(D.rank) * A;
        S.set(i, (X + h_adjoint(X, H, Hi)) * 0.5);
    });
    return S;
}

inline double sup_h_norm(const MatrixField& S, const MetricField& h, const GridDomain& g) {
    return field_norms(g, [&](int i) {
               Mat H = h.at(i);
               return h_norm(S.at(i), H, H.inverse());
           })
        .sup;
}

// ---------------------------------------------------------------------------
// rank one

struct Rank1Result {
    MetricField h;
    int iterations = 0;
    double residual = 0;
    bool converged = false;
};

// Solves sqrt(-1) Lambda G(h0 e^phi) = A for rank-one data. The correction
// inverts the exact symbol of the discrete Laplacian, so the returned metric
// satisfies the same discrete operator the residual measures.
inline Rank1Result rank1_solve(const GridDomain& g, double A, const MetricField& h0,
                               std::optional<ConnectionField> Dopt = std::nullopt, double tol = 1e-10,
                               int max_iter = 200) {
    if (h0.rank != 1) fail("invalid-field", "rank1_solve needs a rank-one metric");
    if (g.dim != 1) fail("invalid-grid", "rank1_solve handles complex dimension 1");
    ConnectionField D = Dopt ? *Dopt : zero_connection(g, 1, 0);
    check_connection(D, g);
    check_metric(h0, g, 1);
    const double c = 1 + std::norm(D.lambda);
    Rank1Result r;
    r.h = h0;
    auto S = he_residual_field(D, r.h, g, A);
    if (g.kind == ChartKind::torus) {
        // compatibility in conservative form: the rank-one curvature is
        // -(c/2) Lap log h / kappa, whose periodic discrete integral vanishes
        double mean = 0, vol = 0;
        auto lg = [&](int m) { return std::log(h0.entry(m, 0, 0).real()); };
        for (int i = 0; i < g.nodes; ++i) {
            double lap = d2(g, lg, i, 0) + d2(g, lg, i, 1);
            mean += (-c * lap / (2 * g.kappa[0][i]) - A) * g.dvol(i);
            vol += g.dvol(i);
        }
        mean /= vol;
        if (std::abs(mean) > 1e-6 * std::max(1.0, std::abs(A)))
            fail("degree-mismatch", "A is incompatible with the degree on the torus (mean residual " +
                                        std::to_string(mean) + ")");
    }
    PoissonSolver ps(g);
    std::vector<cd> rhs(g.nodes);
    for (r.iterations = 0;; ++r.iterations) {
        r.residual = sup_h_norm(S, r.h, g);
        if (r.residual < tol) {
            r.converged = true;
            break;
        }
        if (r.iterations >= max_iter) break;
        for (int i = 0; i < g.nodes; ++i) rhs[i] = 2 * g.kappa[0][i] * S.entry(i, 0, 0).real() / c;
        auto dphi = ps.solve(rhs);
        for (int i = 0; i < g.nodes; ++i) {
            if (!g.interior(i)) continue;
            r.h.entry(i, 0, 0) = r.h.entry(i, 0, 0).real() * std::exp(dphi[i].real());
        }
        S = he_residual_field(D, r.h, g, A);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Donaldson functional along h_t = H0^{1/2} exp(t Y) H0^{1/2}
//   M = (1+|lambda|^2)^{-1} int_0^1 int Tr(u (sqrt(-1) Lambda G(h_t) - A)) dvol dt,
// u = H0^{-1/2} Y H0^{1/2}; 8-point Gauss-Legendre in t.

inline double donaldson_path(const MetricField& h0, const MatrixField& Y, const ConnectionField& D,
                             const GridDomain& g, double A = 0) {
    const int r = h0.rank;
    std::vector<Mat> sq(g.nodes), isq(g.nodes);
    parallel_for(g.nodes, [&](int i) {
        Mat H = h0.at(i);
        sq[i] = herm_sqrt(H);
        isq[i] = herm_isqrt(H);
    });
    auto f = [&](double t) {
        MetricField ht(r, g.nodes);
        parallel_for(g.nodes, [&](int i) { ht.set(i, hermitize(sq[i] * herm_exp(Y.at(i) * t) * sq[i])); });
        MatrixField S = lambda_g(D, ht, g);
        double s = 0;
        for (int i = 0; i < g.nodes; ++i) {
            Mat X = S.at(i) - eye(r) * A;
            s += (Y.at(i) * sq[i] * X * isq[i]).trace().real() * g.dvol(i);
        }
        return s;
    };
    double M = boost::math::quadrature::gauss<double, 8>::integrate(f, 0.0, 1.0);
    return M / (1 + std::norm(D.lambda));
}

inline double donaldson_functional(const MetricField& h0, const MetricField& h1, const ConnectionField& D,
                                   const GridDomain& g, double A = 0) {
    check_metric(h0, g, D.rank);
    check_metric(h1, g, D.rank);
    MatrixField Y(h0.rank, g.nodes);
    parallel_for(g.nodes, [&](int i) {
        Mat is = herm_isqrt(h0.at(i));
        Y.set(i, herm_log(hermitize(is * h1.at(i) * is)));
    });
    return donaldson_path(h0, Y, D, g, A);
}

// direction form: u must be h0-self-adjoint
inline double donaldson_functional_dir(const MetricField& h0, const MatrixField& u, const ConnectionField& D,
                                       const GridDomain& g, double A = 0) {
    check_metric(h0, g, D.rank);
    MatrixField Y(h0.rank, g.nodes);
    for (int i = 0; i < g.nodes; ++i) {
        Mat H = h0.at(i), U = u.at(i);
        double scale = std::max(1.0, (H * U).norm());
        if ((H * U - U.adjoint() * H).norm() > 1e-10 * scale)
            fail("invalid-direction", "u is not h0-self-adjoint at node " + std::to_string(i));
        Y.set(i, hermitize(herm_sqrt(H) * U * herm_isqrt(H)));
    }
    return donaldson_path(h0, Y, D, g, A);
}

// ---------------------------------------------------------------------------
// smooth start h0 = H^{1/2} e^{U} H^{1/2}: U Hermitian, a few random low
// Fourier modes, trace-free for rank >= 2, vanishing on Dirichlet rows,
// scaled so that max |U| (spectral) = amplitude.

inline MetricField perturbed_start(const MetricField& h, const GridDomain& g, double amplitude, std::uint64_t seed) {
    const int r = h.rank;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    struct Mode {
        int a, b;  // wave numbers along the first two axes
        Mat c;
    };
    std::vector<Mode> modes;
    for (int k = 0; k < 4; ++k) {
        Mode m{int(rng() % 3), int(rng() % 3), Mat(r, r)};
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) m.c(i, j) = cd(U(rng), U(rng));
        m.c = hermitize(m.c);
        if (r >= 2) m.c -= eye(r) * (m.c.trace() / double(r));
        modes.push_back(m);
    }
    std::vector<Mat> field(g.nodes);
    double mx = 0;
    for (int i = 0; i < g.nodes; ++i) {
        double s0 = g.axes[0].n > 1 ? double(g.index(i, 0)) / (g.axes[0].periodic ? g.axes[0].n : g.axes[0].n - 1) : 0;
        double s1 = double(g.index(i, 1)) / g.axes[1].n;
        double env = g.axes[0].periodic ? 1.0 : std::sin(std::numbers::pi * s0);
        Mat X = Mat::Zero(r, r);
        for (auto& m : modes) {
            double ph = std::numbers::pi * ((g.axes[0].periodic ? 2 : 1) * m.a * s0 + 2 * m.b * s1);
            X += m.c * (env * std::cos(ph));
        }
        if (!g.interior(i)) X.setZero();
        field[i] = X;
        mx = std::max(mx, herm_eig(X).evals.cwiseAbs().maxCoeff());
    }
    MetricField out(r, g.nodes);
    for (int i = 0; i < g.nodes; ++i) {
        Mat sq = herm_sqrt(h.at(i));
        out.set(i, hermitize(sq * herm_exp(field[i] * (mx > 0 ? amplitude / mx : 0.0)) * sq));
    }
    return out;
}

// ---------------------------------------------------------------------------
// heat flow

struct FlowParams {
    int max_steps = 500;
    double tol = 1e-6;
    bool preconditioned = true;  // Sobolev-preconditioned step (see README)
    double dt0 = 0;              // 0: automatic
    double dt_max = 0;           // 0: automatic
};

struct FlowSample {
    int step = 0;
    double t = 0, residual = 0, donaldson = 0, dt = 0, min_eig = 0;
};

struct FlowResult {
    std::vector<FlowSample> trajectory;
    MetricField h;
    bool converged = false;
    std::string status;  // converged | not-converged | flow-blowup
    int rejected = 0;
    // smallest measured c in  M_{n+1} - M_n <= -dt c residual^2  over steps
    // taken while residual >= 2 tol
    double descent_c = 0;
};

inline FlowResult heat_flow(const ConnectionField& D, const MetricField& h0, const GridDomain& g, double A,
                            const FlowParams& p = {}) {
    check_connection(D, g);
    check_metric(h0, g, D.rank);
    if (!(p.tol > 0)) fail("invalid-parameter", "tolerance must be positive");
    if (p.preconditioned && g.dim != 1) fail("invalid-grid", "preconditioned flow handles complex dimension 1");
    const int r = D.rank;
    const double c = 1 + std::norm(D.lambda);
    std::optional<PoissonSolver> ps;
    if (p.preconditioned) ps.emplace(g);
    double kmin = 1e300;
    for (auto& kk : g.kappa)
        for (double x : kk) kmin = std::min(kmin, x);
    double h2 = g.min_step() * g.min_step();
    double dt = p.dt0 > 0 ? p.dt0 : (p.preconditioned ? 1.0 : 0.2 * h2 * kmin / c);
    double dt_max = p.dt_max > 0 ? p.dt_max : (p.preconditioned ? 1.0 : 2 * dt);

    FlowResult res;
    res.h = h0;
    auto S = he_residual_field(D, res.h, g, A);
    double resid = sup_h_norm(S, res.h, g), M = 0, t = 0;
    res.trajectory.push_back({0, 0, resid, 0, 0, min_eig_field(res.h)});
    res.descent_c = std::numeric_limits<double>::infinity();
    int step = 0;
    while (resid >= p.tol && step < p.max_steps) {
        // Y = H^{1/2} S H^{-1/2}, trace-free for rank >= 2, zero on Dirichlet rows
        MatrixField Y(r, g.nodes);
        parallel_for(g.nodes, [&](int i) {
            if (!g.interior(i)) return;
            Mat H = res.h.at(i);
            Mat y = hermitize(herm_sqrt(H) * S.at(i) * herm_isqrt(H));
            if (r >= 2) y -= eye(r) * (y.trace() / double(r));
            Y.set(i, y);
        });
        MatrixField Z = Y;
        if (ps) {
            std::vector<cd> f(g.nodes);
            for (int a = 0; a < r; ++a)
                for (int b = a; b < r; ++b) {
                    for (int i = 0; i < g.nodes; ++i) f[i] = -2 * g.kappa[0][i] * Y.entry(i, a, b) / c;
                    auto z = ps->solve(f);
                    for (int i = 0; i < g.nodes; ++i) {
                        cd v = g.interior(i) ? z[i] : cd(0);
                        if (a == b) v = v.real();
                        Z.entry(i, a, b) = v;
                        Z.entry(i, b, a) = std::conj(v);
                    }
                }
        }
        double slope = 0;
        for (int i = 0; i < g.nodes; ++i) slope -= (Z.at(i) * Y.at(i)).trace().real() * g.dvol(i);
        slope /= c;
        bool accepted = false;
        while (!accepted) {
            MetricField hn(r, g.nodes);
            std::vector<double> me(g.nodes);
            parallel_for(g.nodes, [&](int i) {
                Mat H = res.h.at(i);
                if (!g.interior(i)) {
                    hn.set(i, H);
                    me[i] = min_eig(H);
                    return;
                }
                Mat sq = herm_sqrt(H);
                Mat Hn = hermitize(sq * herm_exp(Z.at(i) * (-dt)) * sq);
                hn.set(i, Hn);
                me[i] = Hn.allFinite() ? min_eig(Hn) : -1;
            });
            double mine = *std::min_element(me.begin(), me.end());
            if (!(mine > 0)) {
                res.status = "flow-blowup";
                return res;
            }
            auto Sn = he_residual_field(D, hn, g, A);
            double rn = sup_h_norm(Sn, hn, g);
            if (!std::isfinite(rn)) {
                res.status = "flow-blowup";
                return res;
            }
            MatrixField Yn(r, g.nodes);
            for (int i = 0; i < g.nodes; ++i) Yn.set(i, Z.at(i) * (-dt));
            double dM = donaldson_path(res.h, Yn, D, g, A);
            // sufficient decrease of M along the step (Armijo), against the
            // first-order prediction -dt <Z, Y> / (1+|lambda|^2)
            if (dM <= 1e-4 * dt * slope) {
                if (resid >= 2 * p.tol) res.descent_c = std::min(res.descent_c, -dM / (dt * resid * resid));
                M += dM;
                t += dt;
                ++step;
                res.h = std::move(hn);
                S = std::move(Sn);
                resid = rn;
                res.trajectory.push_back({step, t, resid, M, dt, mine});
                dt = std::min(dt * 1.2, dt_max);
                accepted = true;
            } else {
                ++res.rejected;
                dt *= 0.5;
                if (dt < 1e-14) {
                    res.status = "not-converged";
                    return res;
                }
            }
        }
    }
    res.converged = resid < p.tol;
    res.status = res.converged ? "converged" : "not-converged";
    if (!std::isfinite(res.descent_c)) res.descent_c = 0;
    return res;
}

// ---------------------------------------------------------------------------
// Chern-Weil comparison for a D-invariant sub-bundle given by a projection

struct ChernWeilReport {
    double lhs_curvature_integral = 0;  // (1/pi) c int Tr(G11 pi) - (1/pi) c int |D pi|^2
    double rhs_formula_value = 0;       // (1/pi) int Tr R(h')_11
    double gap = 0;
    int subrank = 0;
};

inline ChernWeilReport chern_weil_degree(const ConnectionField& D, const MetricField& h, const MatrixField& proj,
                                         const GridDomain& g, double tol = 1e-8) {
    check_connection(D, g);
    check_metric(h, g, D.rank);
    if (g.dim != 1) fail("invalid-grid", "Chern-Weil comparison handles complex dimension 1");
    const int r = D.rank;
    if (proj.rank != r || proj.nodes() != g.nodes) fail("invalid-field", "projection does not match");
    for (int i = 0; i < g.nodes; ++i) {
        Mat p = proj.at(i), H = h.at(i), Hi = H.inverse();
        if ((p * p - p).norm() > tol || (p - h_adjoint(p, H, Hi)).norm() > tol)
            fail("bad-projector", "projection is not an h-orthogonal idempotent at node " + std::to_string(i));
    }
    const cd lam = D.lambda;
    const double c = 1 / (1 + std::norm(lam));
    auto fp = [&](int m) { return proj.at(m); };
    std::vector<double> dpi2(g.nodes), inv(g.nodes);
    parallel_for(g.nodes, [&](int i) {
        Mat p = proj.at(i), A = D.A01[0].at(i), B = D.A10[0].at(i), H = h.at(i), Hi = H.inverse();
        Mat c01 = dwbar(g, fp, i, 0) + A * p - p * A;
        Mat c10 = dw(g, fp, i, 0) * lam + B * p - p * B;
        Mat q = eye(r) - p;
        inv[i] = std::max((q * c01 * p).norm(), (q * c10 * p).norm());
        dpi2[i] = h_norm2(c01, H, Hi) + h_norm2(c10, H, Hi);
    });
    double inv_tol = std::max(tol, default_tol(g));
    for (int i = 0; i < g.nodes; ++i)
        if (inv[i] > inv_tol * std::max(1.0, D.A10[0].at(i).norm() + D.A01[0].at(i).norm()))
            fail("bad-projector", "image of the projection is not invariant at node " + std::to_string(i));

    // frame Phi = pi M of the sub-bundle
    Mat p0 = proj.at(0);
    int rs = (int)std::lround(p0.trace().real());
    if (rs < 1 || rs > r) fail("bad-projector", "projection has no admissible rank");
    Eigen::ColPivHouseholderQR<Mat> qr(p0);
    Mat Qm = qr.householderQ();
    Mat Mcols = Qm.leftCols(rs);
    MatrixField Phi(r, g.nodes);  // stored r x r, only the first rs columns used
    std::vector<Mat> phi(g.nodes);
    for (int i = 0; i < g.nodes; ++i) phi[i] = proj.at(i) * Mcols;
    auto fphi = [&](int m) -> Mat { return phi[m]; };
    MetricField hs(rs, g.nodes);
    ConnectionField Ds = zero_connection(g, rs, 0);
    for (int i = 0; i < g.nodes; ++i) {
        Mat H = h.at(i), F = phi[i];
        Mat Hs = hermitize(F.adjoint() * H * F);
        Mat Fplus = Hs.inverse() * F.adjoint() * H;
        hs.set(i, Hs);
        Ds.A01[0].set(i, Fplus * (dwbar(g, fphi, i, 0) + D.A01[0].at(i) * F));
    }
    auto G = g_tensor(D, h, g);
    auto Gs = g_tensor(Ds, hs, g);
    ChernWeilReport rep;
    rep.subrank = rs;
    double l = 0, q = 0, rr = 0;
    for (int i = 0; i < g.nodes; ++i) {
        double w = g.cell(i);
        l += (G.G11[0].at(i) * proj.at(i)).trace().real() * w;
        q += dpi2[i] * w;
        rr += Gs.G11[0].at(i).trace().real() * w;
    }
    rep.lhs_curvature_integral = (c * l - c * q) / std::numbers::pi;
    rep.rhs_formula_value = rr / std::numbers::pi;
    rep.gap = std::abs(rep.lhs_curvature_integral - rep.rhs_formula_value);
    return rep;
}

}  // namespace parh
