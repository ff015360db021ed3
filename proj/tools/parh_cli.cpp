// parh_cli: batch front-end. One command per process, one JSON report on
// stdout: {command, inputs_digest, result | error, diagnostics}.
// Exit codes: 0 success, 2 validation/usage error, 3 non-convergence.

#include "parh/he_solver.hpp"
#include "parh/io/dump.hpp"
#include "parh/io/report.hpp"
#include "parh/io/spec_format.hpp"
#include "parh/models.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>

using namespace parh;
using json = nlohmann::json;

namespace {

struct RunConfig {
    std::string command;
    std::string spec_path, intersection_path, grid = "annulus:0.2,0.8", out_dir, psi = "degree-preserving";
    std::string lambda = "0";
    std::vector<std::string> eps;
    std::vector<int> res;
    std::optional<double> tol;
    bool dump_csv = false;
    int max_steps = 500;
    int e = 2;
    int samples = 100;
    std::uint64_t seed = 1;
    double amplitude = 0.2;
};

struct NotConverged {
    std::string kind;
    json result;
};

// "0.1" -> 1/10, "1/3" -> 1/3, "-2" -> -2 (exact)
Rational rational_arg(const std::string& s) {
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational::parse(s);
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    long long den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') fail("invalid-argument", "malformed number '" + s + "'");
        den *= 10;
    }
    if (digits.empty() || digits == "-") fail("invalid-argument", "malformed number '" + s + "'");
    return Rational::parse(digits) / Rational(den);
}

cd complex_arg(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) return {rational_arg(s).to_double(), 0};
    return {rational_arg(s.substr(0, comma)).to_double(), rational_arg(s.substr(comma + 1)).to_double()};
}

struct GridArg {
    ChartKind kind;
    double a, b;
};

GridArg grid_arg(const std::string& s) {
    auto colon = s.find(':');
    std::string kind = s.substr(0, colon);
    double a = kind == "torus" ? 1 : 0.2, b = kind == "torus" ? 1 : 0.8;
    if (colon != std::string::npos) {
        std::string rest = s.substr(colon + 1);
        auto comma = rest.find(',');
        if (comma == std::string::npos) fail("invalid-argument", "grid needs two numbers: kind:a,b");
        a = rational_arg(rest.substr(0, comma)).to_double();
        b = rational_arg(rest.substr(comma + 1)).to_double();
    }
    if (kind == "annulus") return {ChartKind::annulus, a, b};
    if (kind == "torus") return {ChartKind::torus, a, b};
    fail("invalid-argument", "grid kind must be annulus or torus, got '" + kind + "'");
}

GridDomain make_grid(const GridArg& ga, int res) {
    return ga.kind == ChartKind::annulus ? make_annulus(ga.a, ga.b, res) : make_torus(ga.a, ga.b, res);
}

void check_config(const RunConfig& c) {
    for (int r : c.res)
        if (r < 16 || r > 512 || (r & (r - 1)))
            fail("invalid-argument", "resolution must be a power of two in [16, 512], got " + std::to_string(r));
    if (c.tol && !(*c.tol > 0)) fail("invalid-argument", "tolerance must be positive");
    if (c.max_steps < 0) fail("invalid-argument", "max-steps must be non-negative");
}

std::vector<int> res_or(const RunConfig& c, std::vector<int> d) { return c.res.empty() ? d : c.res; }

io::SpecFile need_spec(const RunConfig& c) {
    if (c.spec_path.empty()) fail("invalid-argument", "command '" + c.command + "' needs --spec");
    auto f = io::parse_spec(c.spec_path);
    if (!c.intersection_path.empty()) f.intersection = io::parse_intersection(c.intersection_path);
    return f;
}

IntersectionData need_ix(const io::SpecFile& f) {
    if (!f.intersection) fail("schema-mismatch", "command needs intersection data (--intersection or inline)");
    return *f.intersection;
}

json rat(const Rational& r) { return r.str(); }

json selector_json(const SubSelector& s) {
    json j = json::object();
    for (auto& [b, p] : s) j[std::to_string(b)] = p;
    return j;
}

void write_artifacts(const RunConfig& c, const MatrixField& f, const std::string& stem, json& diag) {
    if (c.out_dir.empty()) return;
    std::filesystem::create_directories(c.out_dir);
    auto base = (std::filesystem::path(c.out_dir) / stem).string();
    io::write_field_binary(f, base + ".bin");
    diag["files"].push_back(stem + ".bin");
    if (c.dump_csv) {
        io::write_field_csv(f, base + ".csv");
        diag["files"].push_back(stem + ".csv");
    }
}

// ------------------------------------------------------------------ commands

json cmd_slope(const RunConfig& c, json&) {
    auto f = need_spec(c);
    auto ix = need_ix(f);
    Rational deg = parabolic_c1_dot(f.spec, ix), mu = slope(f.spec, ix);
    return {{"rank", f.spec.rank},
            {"parabolic_c1_dot", rat(deg)},
            {"slope", rat(mu)},
            {"slope_float", mu.to_double()},
            {"units", {{"parabolic_c1_dot", "exact rational, int c1 . c1(L)^{n-1}"}, {"slope", "exact rational, c1_dot / rank"}}}};
}

json cmd_ch2(const RunConfig& c, json&) {
    auto f = need_spec(c);
    auto ix = need_ix(f);
    Rational v = parabolic_ch2_dot(f.spec, ix);
    return {{"parabolic_ch2_dot", rat(v)}, {"parabolic_ch2_dot_float", v.to_double()},
            {"units", {{"parabolic_ch2_dot", "exact rational, int ch2 . c1(L)^{n-2}"}}}};
}

json cmd_stability(const RunConfig& c, json& diag) {
    auto f = need_spec(c);
    auto ix = need_ix(f);
    auto cands = f.spec.rank > 1 ? enumerate_candidates(f.spec) : std::vector<SubSelector>{};
    auto rep = stability_check(f.spec, ix, cands);
    json rows = json::array();
    for (auto& r : rep.rows)
        rows.push_back({{"selector", selector_json(r.selector)}, {"rank", r.rank}, {"c1", rat(r.c1)}, {"slope", rat(r.slope)}, {"cmp", r.cmp}});
    json res{{"verdict", to_string(rep.verdict)}, {"ambient_slope", rat(rep.ambient_slope)}, {"exhaustive", rep.exhaustive}, {"candidates", rows}};
    res["witness"] = rep.witness ? selector_json(rep.rows[*rep.witness].selector) : json(nullptr);
    diag["candidate_count"] = rows.size();
    return res;
}

json cmd_bg(const RunConfig& c, json&) {
    auto f = need_spec(c);
    auto ix = need_ix(f);
    auto r = bg_report(f.spec, ix);
    return {{"lhs", rat(r.lhs)},
            {"rhs", rat(r.rhs)},
            {"equality", r.lhs == r.rhs},
            {"inequality_holds", r.inequality_holds},
            {"vanishing_precondition", r.vanishing_precondition},
            {"c1_dot", rat(r.c1_dot)},
            {"units", {{"lhs", "exact rational, ch2 . L^{n-2}"}, {"rhs", "exact rational, c1^2 . L^{n-2} / (2 rank)"}}}};
}

json cmd_perturb(const RunConfig& c, json&) {
    auto f = need_spec(c);
    if (c.eps.empty()) fail("invalid-argument", "perturb needs --eps");
    json rows = json::array();
    for (auto& es : c.eps) {
        Rational eps = rational_arg(es);
        FilteredSpec p = f.spec;
        p.blocks.clear();
        json comps = json::array();
        for (auto& comp : p.components) {
            PsiMap psi = c.psi == "identity" ? identity_psi(comp.weights) : degree_preserving_psi(comp.weights, eps);
            auto pr = perturb_weights(comp.weights, comp.residues, eps, psi);
            json ws = json::array();
            for (auto& e : pr.weights.entries) ws.push_back({{"weight", rat(e.weight)}, {"mult", e.mult}});
            comps.push_back({{"id", comp.weights.component_id}, {"weights", ws}});
            comp.weights = pr.weights;
            comp.residues = pr.residues;
        }
        json row{{"eps", rat(eps)}, {"psi", c.psi}, {"components", comps}};
        if (f.intersection) {
            Rational before = parabolic_c1_dot(f.spec, *f.intersection), after = parabolic_c1_dot(p, *f.intersection);
            row["c1_before"] = rat(before);
            row["c1_after"] = rat(after);
            row["drift"] = rat(after - before);
        }
        rows.push_back(row);
    }
    return {{"perturbations", rows}};
}

json cmd_pullback(const RunConfig& c, json&) {
    auto f = need_spec(c);
    return {{"e", c.e}, {"spec", io::to_json(pullback(f.spec, c.e))}};
}

json cmd_descent(const RunConfig& c, json&) {
    auto f = need_spec(c);
    return {{"e", c.e}, {"spec", io::to_json(descent(f.spec, c.e))}};
}

std::vector<ModelBlock> rank2_blocks() {
    ModelBlock b;
    b.weights = {Rational(0)};
    b.jordan = {2};
    return {b};
}

json cmd_model_metric(const RunConfig& c, json& diag) {
    auto ga = grid_arg(c.grid);
    int n = res_or(c, {64})[0];
    auto g = make_grid(ga, n);
    Rational eps = c.eps.empty() ? Rational(0) : rational_arg(c.eps[0]);
    std::vector<ModelBlock> blocks = rank2_blocks();
    if (!c.spec_path.empty()) {
        auto f = need_spec(c);
        if (f.spec.blocks.empty()) fail("schema-mismatch", "model-metric needs a spec with blocks");
        blocks = f.spec.blocks;
    }
    auto h = model_family_metric(blocks, eps, g);
    auto est = estimate_weights(h, g);
    auto exp = family_expected_weights(blocks, eps);
    json ew = json::array(), xw = json::array();
    for (double x : est) ew.push_back(x);
    for (auto& x : exp) xw.push_back(rat(x));
    write_artifacts(c, h, "metric", diag);
    return {{"rank", h.rank},
            {"eps", rat(eps)},
            {"eta", rat(model_family_eta(blocks))},
            {"min_eig", min_eig_field(h)},
            {"estimated_weights", ew},
            {"expected_weights", xw},
            {"units", {{"estimated_weights", "growth exponent b with |v| ~ |z|^{-b}, least squares over the inner half of the annulus; log factors from nilpotent blocks bias it"}}}};
}

json cmd_verify_hitchin(const RunConfig& c, json&) {
    auto ga = grid_arg(c.grid);
    std::vector<double> epss;
    for (auto& s : c.eps) epss.push_back(rational_arg(s).to_double());
    if (epss.empty()) epss = {0};
    json rows = json::array();
    for (double eps : epss) {
        double prev = 0;
        for (int n : res_or(c, {64, 128})) {
            auto g = make_grid(ga, n);
            auto m = rank2_model_metric(eps, g);
            auto r = hitchin_residual(m.higgs, m.h, g);
            json row{{"eps", eps}, {"res", n}, {"sup", r.sup}, {"l2", r.l2}};
            row["ratio_to_previous"] = prev > 0 ? json(prev / r.sup) : json(nullptr);
            prev = r.sup;
            rows.push_back(row);
        }
    }
    return {{"rows", rows}, {"units", {{"sup", "max over interior nodes of |R(h)+[theta,theta^dag]|_h (coefficient of dw^dwbar)"}, {"l2", "L2 over dvol"}}}};
}

json cmd_verify_pluriharmonic(const RunConfig& c, json&) {
    std::string grid = c.grid == "annulus:0.2,0.8" ? "annulus:0.1,0.5" : c.grid;
    auto ga = grid_arg(grid);
    cd lam = complex_arg(c.lambda == "0" ? "1" : c.lambda);
    json rows = json::array();
    bool ok = true;
    for (int n : res_or(c, {32, 64, 128})) {
        auto g = make_grid(ga, n);
        auto m = rank2_model_metric(0, g);
        auto lf = lambda_flat_from_higgs(m.higgs, m.h, g, lam);
        auto G = g_tensor(lf.D, m.h, g);
        auto N = g_norms(G, m.h, g);
        double d2 = g.max_step() * g.max_step();
        bool premise = N.g11.sup < 10 * d2, concl = N.g20.sup + N.g02.sup < 50 * d2;
        ok = ok && (!premise || concl);
        rows.push_back({{"res", n}, {"g11_sup", N.g11.sup}, {"g20_plus_g02_sup", N.g20.sup + N.g02.sup}, {"premise_bound", 10 * d2},
                        {"conclusion_bound", 50 * d2}, {"premise", premise}, {"conclusion", concl}});
    }
    return {{"grid", grid}, {"lambda", {lam.real(), lam.imag()}}, {"rows", rows}, {"implication_holds", ok},
            {"units", {{"g11_sup", "max over interior nodes of |G^{1,1}|_{h,omega}"}}}};
}

json cmd_verify_kl(const RunConfig& c, json&) {
    auto g = make_torus(1, 1, 8, 2);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> N01;
    std::vector<double> ratios;
    for (int s = 0; s < c.samples; ++s) {
        // one trace-free sample with C_lk = C_kl^dag (a real (1,1) form), constant over the grid
        Mat C[2][2];
        auto rnd = [&] {
            Mat m(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) m(i, j) = cd(N01(rng), N01(rng));
            return m;
        };
        for (int k = 0; k < 2; ++k) {
            Mat a = hermitize(rnd());
            C[k][k] = a - eye(2) * (a.trace() / 2.0);
        }
        C[0][1] = rnd();
        C[0][1] -= eye(2) * (C[0][1].trace() / 2.0);
        C[1][0] = C[0][1].adjoint();
        std::vector<MatrixField> F(4, MatrixField(2, g.nodes));
        for (int i = 0; i < g.nodes; ++i)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) F[k * 2 + l].set(i, C[k][l]);
        MetricField h(2, g.nodes);
        for (int i = 0; i < g.nodes; ++i) h.set(i, eye(2));
        auto rep = kobayashi_lubke_pointwise(F, h, g, true);
        ratios.push_back(rep.mean_ratio);
    }
    double mean = 0, var = 0;
    for (double r : ratios) mean += r;
    mean /= ratios.size();
    for (double r : ratios) var += (r - mean) * (r - mean);
    double rel_std = std::sqrt(var / ratios.size()) / std::abs(mean);
    return {{"samples", c.samples}, {"mean_ratio", mean}, {"rel_std", rel_std}, {"positive", mean > 0},
            {"units", {{"mean_ratio", "lhs/rhs with lhs = -Tr(G^2)/omega^2 density, rhs = |G|^2_omega density"}}}};
}

json cmd_solve_he(const RunConfig& c, json& diag) {
    auto f = need_spec(c);
    cd lam = f.spec.lambda.to_complex();
    FlowParams p;
    p.max_steps = c.max_steps;
    p.tol = c.tol.value_or(1e-6);
    FlowResult fr;
    json res;
    if (f.spec.blocks.empty()) {
        if (f.spec.rank != 1) fail("schema-mismatch", "solve-he without blocks handles rank-one specs");
        std::string grid = c.grid == "annulus:0.2,0.8" ? "torus:1,1" : c.grid;
        auto ga = grid_arg(grid);
        auto g = make_grid(ga, res_or(c, {64})[0]);
        // the chart carries the trivial line, so the degree entering A is zero
        double A = he_constant(Rational(0), g.volume(), lam, 1);
        MetricField one(1, g.nodes);
        for (int i = 0; i < g.nodes; ++i) one.entry(i, 0, 0) = 1;
        auto h0 = perturbed_start(one, g, c.amplitude, c.seed);
        auto D = zero_connection(g, 1, lam);
        fr = heat_flow(D, h0, g, A, p);
        res["grid"] = grid;
        res["A"] = A;
        write_artifacts(c, fr.h, "metric", diag);
    } else {
        auto ga = grid_arg(c.grid);
        if (ga.kind != ChartKind::annulus) fail("invalid-grid", "block models live on an annulus");
        auto g = make_grid(ga, res_or(c, {64})[0]);
        auto mb = build_model_bundle(f.spec.blocks, f.spec.lambda, 1, g);
        auto hm = model_family_metric(f.spec.blocks, Rational(0), g);
        auto h0 = perturbed_start(hm, g, c.amplitude, c.seed);
        fr = heat_flow(mb.D, h0, g, 0, p);
        double dist = 0;
        for (int i = 0; i < g.nodes; ++i) dist = std::max(dist, (fr.h.at(i) - hm.at(i)).norm() / hm.at(i).norm());
        res["grid"] = c.grid;
        res["A"] = 0.0;
        res["relative_sup_distance_to_model"] = dist;
        res["donaldson_final_direct"] = donaldson_functional(h0, fr.h, mb.D, g);
        write_artifacts(c, fr.h, "metric", diag);
    }
    res["converged"] = fr.converged;
    res["status"] = fr.status;
    res["steps"] = fr.trajectory.back().step;
    res["residual"] = fr.trajectory.back().residual;
    res["donaldson"] = fr.trajectory.back().donaldson;
    res["rejected_steps"] = fr.rejected;
    res["descent_constant"] = fr.descent_c;
    res["units"] = {{"residual", "sup over interior nodes of |sqrt(-1) Lambda G(h) - A id|_h"},
                    {"donaldson", "(1+|lambda|^2)^{-1} int_0^1 int Tr(u (sqrt(-1) Lambda G - A)) dvol dt"}};
    if (!c.out_dir.empty()) {
        std::filesystem::create_directories(c.out_dir);
        std::ofstream os(std::filesystem::path(c.out_dir) / "trajectory.csv");
        os << "step,t,residual,donaldson,dt,min_eig\n";
        char buf[256];
        for (auto& s : fr.trajectory) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.step, s.t, s.residual, s.donaldson, s.dt, s.min_eig);
            os << buf;
        }
        diag["files"].push_back("trajectory.csv");
    }
    if (!fr.converged) throw NotConverged{fr.status, res};
    return res;
}

json cmd_chern_weil(const RunConfig& c, json&) {
    auto ga = grid_arg(c.grid);
    json rows = json::array();
    double prev = 0;
    for (int n : res_or(c, {64, 128})) {
        auto g = make_grid(ga, n);
        auto m = rank2_model_metric(0, g);
        MatrixField pi(2, g.nodes);
        Mat P = Mat::Zero(2, 2);
        P(1, 1) = 1;
        for (int i = 0; i < g.nodes; ++i) pi.set(i, P);
        auto r = chern_weil_degree(m.higgs, m.h, pi, g);
        json row{{"res", n}, {"lhs_curvature_integral", r.lhs_curvature_integral}, {"rhs_formula_value", r.rhs_formula_value}, {"gap", r.gap}};
        row["gap_ratio_to_previous"] = prev > 0 ? json(prev / r.gap) : json(nullptr);
        prev = r.gap;
        rows.push_back(row);
    }
    return {{"projection", "onto span(v2)"}, {"rows", rows},
            {"units", {{"lhs_curvature_integral", "(1/pi)(1+|lambda|^2)^{-1} [int Tr(G pi) - int |D pi|^2] du dv"},
                       {"rhs_formula_value", "(1/pi) int Tr R(h') du dv"}}}};
}

std::string digest(const RunConfig& c, int argc, char** argv) {
    std::string s = "parh-cli/1\n";
    for (int i = 1; i < argc; ++i) s += std::string(argv[i]) + "\n";
    for (const std::string& p : {c.spec_path, c.intersection_path}) {
        if (p.empty()) continue;
        std::ifstream in(p, std::ios::binary);
        s += "file\n" + std::string(std::istreambuf_iterator<char>(in), {});
    }
    return io::sha256_hex(s);
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"parabolic Higgs / lambda-connection toolkit"};
    app.add_option("command", cfg.command,
                   "slope | ch2 | stability | bg-check | perturb | pullback | descent | model-metric | verify-hitchin | "
                   "verify-pluriharmonic | verify-kl | solve-he | chern-weil")
        ->required();
    app.add_option("--spec", cfg.spec_path, "spec file (JSON, schema_version 1)");
    app.add_option("--intersection", cfg.intersection_path, "intersection data file");
    app.add_option("--grid", cfg.grid, "annulus:rmin,rmax or torus:px,py");
    app.add_option("--eps", cfg.eps, "epsilon values (exact decimals or p/q)")->delimiter(',');
    app.add_option("--res", cfg.res, "resolutions per axis (powers of two in [16, 512])")->delimiter(',');
    app.add_option("--tol", cfg.tol, "tolerance");
    app.add_option("--out", cfg.out_dir, "output directory for dumps and trajectories");
    app.add_flag("--dump-csv", cfg.dump_csv, "also write field dumps as CSV");
    app.add_option("--max-steps", cfg.max_steps, "flow step limit");
    app.add_option("--lambda", cfg.lambda, "lambda as re or re,im");
    app.add_option("--e", cfg.e, "covering degree");
    app.add_option("--samples", cfg.samples, "sample count");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--amplitude", cfg.amplitude, "sup-norm of the start perturbation");
    app.add_option("--psi", cfg.psi, "identity | degree-preserving");

    json report;
    auto emit = [&](int code) {
        std::cout << io::to_text(report);
        return code;
    };
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report = {{"command", cfg.command}, {"error", {{"kind", "usage"}, {"message", e.what()}}}};
        return emit(2);
    }
    report["command"] = cfg.command;
    report["inputs_digest"] = digest(cfg, argc, argv);
    json diag = json::object();
    diag["threads"] = thread_cap();
    diag["files"] = json::array();
    using Fn = json (*)(const RunConfig&, json&);
    const std::map<std::string, Fn> cmds = {
        {"slope", cmd_slope},         {"ch2", cmd_ch2},
        {"stability", cmd_stability}, {"bg-check", cmd_bg},
        {"perturb", cmd_perturb},     {"pullback", cmd_pullback},
        {"descent", cmd_descent},     {"model-metric", cmd_model_metric},
        {"verify-hitchin", cmd_verify_hitchin}, {"verify-pluriharmonic", cmd_verify_pluriharmonic},
        {"verify-kl", cmd_verify_kl}, {"solve-he", cmd_solve_he},
        {"chern-weil", cmd_chern_weil}};
    try {
        auto it = cmds.find(cfg.command);
        if (it == cmds.end()) fail("usage", "unknown command '" + cfg.command + "'");
        check_config(cfg);
        report["result"] = it->second(cfg, diag);
        report["diagnostics"] = diag;
        return emit(0);
    } catch (const NotConverged& nc) {
        report["result"] = nc.result;
        report["error"] = {{"kind", nc.kind}, {"message", "flow stopped before reaching the tolerance"}};
        report["diagnostics"] = diag;
        return emit(3);
    } catch (const Error& e) {
        report["error"] = {{"kind", e.kind()}, {"message", e.what()}};
        report["diagnostics"] = diag;
        return emit(2);
    } catch (const std::exception& e) {
        report["error"] = {{"kind", "invalid-argument"}, {"message", e.what()}};
        report["diagnostics"] = diag;
        return emit(2);
    }
}
