#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "foliage/averaging.hpp"
#include "foliage/json_io.hpp"
#include "foliage/operator.hpp"
#include "foliage/pseudogroup.hpp"
#include "foliage/scenarios.hpp"

namespace foliage::cli {

// ===================================================================
// Batch verifier: one command per invocation, JSON report on stdout,
// human-readable summary on stderr. Exit codes: 0 pass, 1 check
// failure, 2 input error.
// ===================================================================

struct Context {
    std::ostream* out = &std::cout;
    std::ostream* err = &std::cerr;
    bool no_timestamp = false;
    std::string out_path;
    std::string csv_path;
    unsigned seed = 42;
};

namespace detail {

inline std::string iso_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

inline Vector parse_point(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            vals.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ParseError("malformed point component '" + item + "'");
        }
    }
    if (vals.empty()) throw ParseError("point must have at least one coordinate");
    return to_vector(vals);
}

inline void write_csv(const std::string& path, const std::string& contents) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write CSV file '" + path + "'");
    f << contents;
}

}  // namespace detail

/// Emit the report: JSON to stdout (and --out when given), a short human
/// summary to stderr. Returns the exit code it was handed.
inline int finish(Context& ctx, json report, const std::vector<std::string>& summary, int code) {
    report["pass"] = (code == 0);
    if (!ctx.no_timestamp) report["timestamp"] = detail::iso_timestamp();
    const std::string dumped = report.dump(2);
    (*ctx.out) << dumped << "\n";
    if (!ctx.out_path.empty()) {
        std::ofstream f(ctx.out_path);
        if (!f) throw Error("cannot write report to '" + ctx.out_path + "'");
        f << dumped << "\n";
    }
    for (const auto& line : summary) (*ctx.err) << line << "\n";
    return code;
}

// --- describe-operator ------------------------------------------------------

inline int cmd_describe_operator(Context& ctx, const std::string& path, int grid, int sphere,
                                 double tol_) {
    const BasicOperator p = operator_from_json(load_json_file(path));
    const Box region = Box::cube(p.q(), 1.0);
    const auto ell = check_transverse_ellipticity(p, region, grid, sphere, tol_);
    const auto tri = one_part_verdict(p, region, std::min(grid, 9));
    const bool constant = has_constant_coefficients(p, region);

    json r;
    r["command"] = "describe-operator";
    r["input"] = path;
    r["q"] = p.q();
    r["m"] = p.m();
    r["verdicts"]["elliptic"] = ell.elliptic;
    r["verdicts"]["min_abs_symbol"] = ell.min_abs_symbol;
    if (!ell.elliptic) {
        r["verdicts"]["witness_z"] = to_std(ell.witness_z);
        r["verdicts"]["witness_xi"] = to_std(ell.witness_xi);
    }
    r["verdicts"]["constant_coeffs"] = constant;
    const char* tri_names[] = {"diagonal", "lower", "upper", "no"};
    r["verdicts"]["triangular_1part"] = is_triangular(tri);
    r["verdicts"]["triangular_kind"] = tri_names[static_cast<int>(tri)];
    if (p.m() == 2 && p.is_real()) {
        const auto [definite, eig] = ellipticity_by_eigenvalues(p, to_vector(region.center()));
        r["verdicts"]["elliptic_by_eigenvalues"] = definite;
        r["verdicts"]["min_abs_eigenvalue"] = eig;
    }
    std::vector<std::string> summary = {
        "operator: q=" + std::to_string(p.q()) + " m=" + std::to_string(p.m()),
        std::string("  elliptic (sampled): ") + (ell.elliptic ? "yes" : "NO"),
        std::string("  constant coefficients: ") + (constant ? "yes" : "no"),
        std::string("  triangular 1-part: ") + tri_names[static_cast<int>(tri)]};
    return finish(ctx, r, summary, 0);
}

// --- check-commute -----------------------------------------------------------

inline int cmd_check_commute(Context& ctx, const std::string& op_path, const std::string& pg_path,
                             int grid, double tol_) {
    const BasicOperator p = operator_from_json(load_json_file(op_path));
    const PseudogroupSpec h = pseudogroup_from_json(load_json_file(pg_path));
    if (h.q != p.q()) throw ParseError("operator and pseudogroup have different codimension");
    json rows = json::array();
    double worst = 0.0;
    for (size_t i = 0; i < h.gens.size(); ++i) {
        const double res = commuting_residual(p, h.gens[i].map, grid);
        worst = std::max(worst, res);
        rows.push_back({{"generator", i + 1}, {"residual", res}});
    }
    json r;
    r["command"] = "check-commute";
    r["tolerance"] = tol_;
    r["generators"] = rows;
    r["worst_residual"] = worst;
    const bool ok = worst < tol_;
    return finish(ctx, r,
                  {"commuting residual: worst " + std::to_string(worst) +
                   (ok ? " (pass)" : " (FAIL)")},
                  ok ? 0 : 1);
}

// --- jacobian-bounds ------------------------------------------------------------

inline int cmd_jacobian_bounds(Context& ctx, const std::string& pg_path, int max_len, int grid) {
    const PseudogroupSpec h = pseudogroup_from_json(load_json_file(pg_path));
    const auto b = jacobian_bounds(h, max_len, grid);
    json r;
    r["command"] = "jacobian-bounds";
    r["max_len"] = max_len;
    r["lambda_hat"] = b.lambda_hat;
    r["mu_hat"] = b.mu_hat;
    r["words_sampled"] = b.words_sampled;
    return finish(ctx, r,
                  {"empirical bounds: lambda_hat=" + std::to_string(b.lambda_hat) +
                   " mu_hat=" + std::to_string(b.mu_hat)},
                  0);
}

// --- orbit ------------------------------------------------------------------------

inline int cmd_orbit(Context& ctx, const std::string& pg_path, std::string chart,
                     const std::string& start_csv, int max_len, int probe_n) {
    const PseudogroupSpec h = pseudogroup_from_json(load_json_file(pg_path));
    if (chart.empty()) chart = h.charts.at(0).id;
    const Vector start = detail::parse_point(start_csv);
    if (start.size() != h.q) throw ParseError("start point dimension does not match q");
    const auto pts = orbit(h, {chart, start}, max_len);
    const double gap = coverage_gap(pts, chart, h.chart(chart).box, probe_n);
    json r;
    r["command"] = "orbit";
    r["chart"] = chart;
    r["max_len"] = max_len;
    r["orbit_size"] = pts.size();
    r["coverage_gap"] = gap;
    if (!ctx.csv_path.empty()) {
        std::string csv = "chart";
        for (int k = 1; k <= h.q; ++k) csv += ",y" + std::to_string(k);
        csv += "\n";
        for (const auto& cp : pts) {
            csv += cp.chart;
            for (int k = 0; k < h.q; ++k) csv += "," + std::to_string(cp.p(k));
            csv += "\n";
        }
        detail::write_csv(ctx.csv_path, csv);
        r["csv"] = ctx.csv_path;
    }
    return finish(ctx, r,
                  {"orbit: " + std::to_string(pts.size()) + " points, coverage gap " +
                   std::to_string(gap)},
                  0);
}

// --- counterexample-1 ----------------------------------------------------------------

inline int cmd_counterexample1(Context& ctx, int n_max) {
    json rows = json::array();
    std::string csv = "n,norm,eig\n";
    bool ok = true;
    double prev = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        const auto d = torus_counterexample(n);
        const double svd_norm = opnorm(d.a);
        const bool agree = std::abs(svd_norm - d.norm) <= 1e-10;
        const bool monotone = n == 0 || d.norm > prev;
        ok = ok && agree && monotone;
        prev = d.norm;
        rows.push_back({{"n", n}, {"norm", d.norm}, {"eig", d.eig}, {"svd_norm", svd_norm}});
        csv += std::to_string(n) + "," + std::to_string(d.norm) + "," + std::to_string(d.eig) + "\n";
    }
    json r;
    r["command"] = "counterexample-1";
    r["n_max"] = n_max;
    r["table"] = rows;
    r["closed_form_matches_svd"] = ok;
    if (!ctx.csv_path.empty()) {
        detail::write_csv(ctx.csv_path, csv);
        r["csv"] = ctx.csv_path;
    }
    return finish(ctx, r,
                  {"holonomy norms ||A_n|| for n <= " + std::to_string(n_max) +
                   (ok ? " match the closed form (pass)" : " DISAGREE with the closed form")},
                  ok ? 0 : 1);
}

// --- verify-coordinate-rule -------------------------------------------------------------

inline int cmd_verify_coordinate_rule(Context& ctx, int samples, int probes, double tol_) {
    std::mt19937 rng(ctx.seed);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    const std::array<Expression, 2> a = {lit(0.0) - coord(1), coord(0)};  // the rotation 1-part
    const Box dom = Box::cube(2, 0.35);

    // identity check on random nonlinear changes
    double worst = 0.0;
    int done = 0;
    while (done < samples) {
        Matrix l(2, 2);
        l << 1.0 + 0.3 * u(rng), 0.5 * u(rng), 0.5 * u(rng), 1.0 + 0.3 * u(rng);
        if (std::abs(l.determinant()) < 0.3) continue;
        const LocalMap phi = make_quadratic_change(0.6 * u(rng), 0.6 * u(rng), l, dom);
        Vector z(2);
        z << 0.25 * u(rng), 0.25 * u(rng);
        worst = std::max(worst, verify_coordinate_change_rule(a, phi, z));
        ++done;
    }
    const bool rule_ok = worst < tol_;

    // triangularization probe: no linear-quadratic candidate with a
    // nonsingular Jacobian at the origin makes the transformed 1-part
    // triangular there.
    int triangularizing = 0;
    double min_offdiag = std::numeric_limits<double>::infinity();
    const Vector origin = Vector::Zero(2);
    for (int i = 0; i < probes; ++i) {
        Matrix l(2, 2);
        l << u(rng), u(rng), u(rng), u(rng);
        if (std::abs(l.determinant()) < 0.2) continue;
        std::vector<Expression> fwd = {
            simplify(lit(l(0, 0)) * coord(0) + lit(l(0, 1)) * coord(1) +
                     lit(u(rng)) * pow(coord(0), 2) + lit(u(rng)) * coord(0) * coord(1) +
                     lit(u(rng)) * pow(coord(1), 2)),
            simplify(lit(l(1, 0)) * coord(0) + lit(l(1, 1)) * coord(1) +
                     lit(u(rng)) * pow(coord(0), 2) + lit(u(rng)) * coord(0) * coord(1) +
                     lit(u(rng)) * pow(coord(1), 2))};
        const Matrix b = one_part_after_change(a, fwd, origin);
        const double off = std::min(std::abs(b(0, 1)), std::abs(b(1, 0)));
        min_offdiag = std::min(min_offdiag, off);
        if (off <= tol::triangular) ++triangularizing;
    }
    const bool probe_ok = triangularizing == 0;

    json r;
    r["command"] = "verify-coordinate-rule";
    r["samples"] = samples;
    r["worst_identity_residual"] = worst;
    r["tolerance"] = tol_;
    r["probe_candidates"] = probes;
    r["triangularizing_candidates"] = triangularizing;
    r["min_offdiagonal"] = min_offdiag;
    const bool ok = rule_ok && probe_ok;
    return finish(ctx, r,
                  {"coordinate-change identity: worst residual " + std::to_string(worst) +
                       (rule_ok ? " (pass)" : " (FAIL)"),
                   "triangularizing candidates with nonsingular Jacobian: " +
                       std::to_string(triangularizing) + (probe_ok ? " (pass)" : " (FAIL)")},
                  ok ? 0 : 1);
}

// --- build-metric ---------------------------------------------------------------------------

inline json closure_to_json(const ClosureClass& c) {
    json j;
    switch (c.kind) {
        case ClosureClass::Kind::Finite:
            j["kind"] = "finite";
            j["size"] = c.elements.size();
            break;
        case ClosureClass::Kind::Torus: {
            j["kind"] = "torus";
            json blocks = json::array();
            for (const auto& b : c.blocks) blocks.push_back({b.axis0, b.axis1});
            j["blocks"] = blocks;
            break;
        }
        case ClosureClass::Kind::Unknown:
            j["kind"] = "unknown";
            break;
    }
    return j;
}

inline int cmd_build_metric(Context& ctx, const std::string& scenario_name,
                            const std::string& scenario_file, const std::string& base_diag,
                            int germ_len, int probe_n, int sample_n, double tol_) {
    const Scenario s = scenario_file.empty() ? get_scenario(scenario_name)
                                             : scenario_from_json(load_json_file(scenario_file));
    json r;
    r["command"] = "build-metric";
    r["scenario"] = s.name;
    AverageMethodOptions opt;
    opt.germ_max_len = germ_len;
    opt.probe_n = probe_n;
    opt.sample_n = sample_n;
    opt.seed = ctx.seed;
    if (!base_diag.empty()) {
        const Vector d = detail::parse_point(base_diag);
        if (d.size() != s.q) throw ParseError("--base needs q diagonal entries");
        opt.base = Matrix::Zero(s.q, s.q);
        for (int k = 0; k < s.q; ++k) {
            if (d(k) <= 0.0) throw ParseError("--base entries must be positive");
            opt.base(k, k) = d(k);
        }
    }
    r["base"] = matrix_to_json(opt.base.size() == 0
                                   ? Matrix(Matrix::Identity(s.q, s.q))
                                   : opt.base);
    try {
        const AverageMethodReport rep = run_average_method(s, opt);
        r["germ_generators"] = rep.germ.gens.size();
        r["closure"] = closure_to_json(rep.closure);
        r["g_z"] = matrix_to_json(rep.g_z);
        r["overlap_residual"] = rep.overlap_residual;
        r["invariance_residual"] = rep.invariance_residual;
        r["min_eigenvalue"] = rep.min_eigenvalue;
        json fields;
        for (const auto& [chart, f] : rep.glued) fields[chart] = metric_to_json(f);
        r["metric"] = fields;
        const bool ok = rep.invariance_residual < tol_ && rep.overlap_residual < tol_ &&
                        rep.min_eigenvalue > 0.0;
        return finish(ctx, r,
                      {"closure: " + r["closure"].dump(),
                       "overlap residual " + std::to_string(rep.overlap_residual) +
                           ", invariance residual " + std::to_string(rep.invariance_residual),
                       std::string("average method: ") + (ok ? "pass" : "FAIL")},
                      ok ? 0 : 1);
    } catch (const UnknownClosure& e) {
        r["error"] = e.what();
        return finish(ctx, r, {std::string("pipeline aborted: ") + e.what()}, 1);
    } catch (const OutOfReach& e) {
        r["error"] = e.what();
        return finish(ctx, r, {std::string("pipeline aborted: ") + e.what()}, 1);
    } catch (const CoverageGap& e) {
        r["error"] = e.what();
        json pts = json::array();
        for (const auto& p : e.uncovered) pts.push_back(p);
        r["uncovered"] = pts;
        return finish(ctx, r, {std::string("pipeline aborted: ") + e.what()}, 1);
    }
}

// --- verify-invariance -----------------------------------------------------------------------

inline int cmd_verify_invariance(Context& ctx, const std::string& metric_path,
                                 const std::string& pg_path, int sample_n, double tol_) {
    const MetricField f = metric_from_json(load_json_file(metric_path));
    const PseudogroupSpec h = pseudogroup_from_json(load_json_file(pg_path));
    std::map<std::string, MetricField> fields;
    fields.emplace(f.chart, f);
    for (const auto& c : h.charts)
        if (!fields.count(c.id)) {
            MetricField copy = f;
            copy.chart = c.id;
            fields.emplace(c.id, std::move(copy));
        }
    const double res = verify_invariance(fields, h, sample_n, ctx.seed);
    json r;
    r["command"] = "verify-invariance";
    r["residual"] = res;
    r["tolerance"] = tol_;
    const bool ok = res < tol_;
    return finish(ctx, r,
                  {"invariance residual " + std::to_string(res) + (ok ? " (pass)" : " (FAIL)")},
                  ok ? 0 : 1);
}

// --- scenario list / export ---------------------------------------------------------------------

inline int cmd_scenario_list(Context& ctx) {
    json r;
    r["command"] = "scenario-list";
    json names = json::array();
    std::vector<std::string> summary;
    for (const auto& n : scenario_names()) {
        const Scenario s = get_scenario(n);
        names.push_back({{"name", n}, {"q", s.q}, {"description", s.description}});
        summary.push_back(n + "  (q=" + std::to_string(s.q) + ")  " + s.description);
    }
    r["scenarios"] = names;
    return finish(ctx, r, summary, 0);
}

inline int cmd_scenario_export(Context& ctx, const std::string& name, const std::string& dir) {
    const Scenario s = get_scenario(name);
    std::filesystem::create_directories(dir);
    const auto path = [&](const std::string& f) { return (std::filesystem::path(dir) / f).string(); };
    save_json_file(path("scenario.json"), scenario_to_json(s));
    save_json_file(path("pseudogroup.json"), pseudogroup_to_json(s.pseudogroup));
    // one operator file when all charts share the operator, else one per chart
    bool shared = true;
    const json first = operator_to_json(s.operators.begin()->second);
    for (const auto& [chart, op] : s.operators)
        if (operator_to_json(op) != first) shared = false;
    if (shared) {
        save_json_file(path("operator.json"), first);
    } else {
        for (const auto& [chart, op] : s.operators)
            save_json_file(path("operator." + chart + ".json"), operator_to_json(op));
    }
    json r;
    r["command"] = "scenario-export";
    r["scenario"] = name;
    r["directory"] = dir;
    return finish(ctx, r, {"exported scenario '" + name + "' to " + dir}, 0);
}

// --- entry point ------------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    Context ctx;
    ctx.out = &out;
    ctx.err = &err;
    if (const char* s = std::getenv("FOLIAGE_SEED")) {
        try {
            ctx.seed = static_cast<unsigned>(std::stoul(s));
        } catch (const std::exception&) {
            err << "warning: ignoring malformed FOLIAGE_SEED\n";
        }
    }

    CLI::App app{"foliage: checks for basic operators over foliated charts and the average-method "
                 "construction of invariant transverse metrics"};
    app.require_subcommand(1);
    app.fallthrough();
    int grid = 17, max_len = 20;
    double tolerance = 1e-8;
    app.add_option("--grid", grid, "grid points per axis")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--tol", tolerance, "residual tolerance")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--max-len", max_len, "maximum word length")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--out", ctx.out_path, "write the JSON report to this path");
    app.add_option("--emit-csv", ctx.csv_path, "dump tabular data (orbit points, norm tables)");
    app.add_flag("--no-timestamp", ctx.no_timestamp, "suppress the timestamp field");

    // describe-operator
    auto* sub_desc = app.add_subcommand("describe-operator", "operator verdicts from a JSON file");
    std::string op_path;
    int sphere = 32;
    sub_desc->add_option("operator", op_path, "operator JSON file")->required();
    sub_desc->add_option("--sphere", sphere, "covector sphere samples")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    // check-commute
    auto* sub_comm = app.add_subcommand("check-commute", "commuting residuals of all generators");
    std::string comm_op, comm_pg;
    sub_comm->add_option("--operator", comm_op, "operator JSON")->required();
    sub_comm->add_option("--pseudogroup", comm_pg, "pseudogroup JSON")->required();

    // jacobian-bounds
    auto* sub_jac = app.add_subcommand("jacobian-bounds", "empirical tangent-map bounds");
    std::string jac_pg;
    int jac_grid = 5, jac_len = 4;
    sub_jac->add_option("--pseudogroup", jac_pg, "pseudogroup JSON")->required();
    sub_jac->add_option("--grid", jac_grid, "grid points per axis")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub_jac->add_option("--max-len", jac_len, "maximum word length")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    // orbit
    auto* sub_orb = app.add_subcommand("orbit", "orbit enumeration and coverage gap");
    std::string orb_pg, orb_chart, orb_start = "0";
    int orb_probe = 33;
    sub_orb->add_option("--pseudogroup", orb_pg, "pseudogroup JSON")->required();
    sub_orb->add_option("--chart", orb_chart, "start chart (default: first chart)");
    sub_orb->add_option("--start", orb_start, "start point, comma-separated")->capture_default_str();
    sub_orb->add_option("--probe", orb_probe, "probe grid per axis")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    // counterexample-1
    auto* sub_ce1 = app.add_subcommand("counterexample-1", "torus holonomy norm table");
    int n_max = 100;
    sub_ce1->add_option("--n-max", n_max, "largest loop index")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);

    // verify-coordinate-rule
    auto* sub_rule = app.add_subcommand("verify-coordinate-rule",
                                        "1-part transformation identity and triangularization probe");
    int rule_samples = 20, rule_probes = 1000;
    double rule_tol = 1e-5;
    sub_rule->add_option("--samples", rule_samples, "random nonlinear changes")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub_rule->add_option("--probes", rule_probes, "triangularization candidates")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub_rule->add_option("--tol", rule_tol, "identity tolerance (finite-difference Hessians)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    // build-metric
    auto* sub_build = app.add_subcommand("build-metric", "run the average method end to end");
    std::string build_scenario, build_file, build_base;
    int germ_len = 3, probe_n = 9, sample_n = 64;
    sub_build->add_option("--scenario", build_scenario, "bundled scenario name");
    sub_build->add_option("--scenario-file", build_file, "exported scenario JSON");
    sub_build->add_option("--base", build_base,
                          "diagonal entries of the base inner product (default identity)");
    sub_build->add_option("--germ-len", germ_len, "germ word length")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub_build->add_option("--probe", probe_n, "gluing probe grid per axis")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub_build->add_option("--samples", sample_n, "invariance samples per generator")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    // verify-invariance
    auto* sub_inv = app.add_subcommand("verify-invariance", "pullback residual of a metric file");
    std::string inv_metric, inv_pg;
    int inv_samples = 64;
    sub_inv->add_option("--metric", inv_metric, "metric JSON")->required();
    sub_inv->add_option("--pseudogroup", inv_pg, "pseudogroup JSON")->required();
    sub_inv->add_option("--samples", inv_samples, "samples per generator")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    // scenario
    auto* sub_scn = app.add_subcommand("scenario", "bundled scenario catalogue");
    auto* sub_list = sub_scn->add_subcommand("list", "list bundled scenarios");
    auto* sub_exp = sub_scn->add_subcommand("export", "export a scenario as JSON files");
    std::string exp_name, exp_dir = ".";
    sub_exp->add_option("name", exp_name, "scenario name")->required();
    sub_exp->add_option("--out-dir", exp_dir, "output directory")->capture_default_str();
    sub_scn->require_subcommand(1);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);  // prints help for the subcommand in play
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "argument error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*sub_desc) return cmd_describe_operator(ctx, op_path, grid, sphere, tolerance);
        if (*sub_comm) return cmd_check_commute(ctx, comm_op, comm_pg, grid, tolerance);
        if (*sub_jac) return cmd_jacobian_bounds(ctx, jac_pg, jac_len, jac_grid);
        if (*sub_orb) return cmd_orbit(ctx, orb_pg, orb_chart, orb_start, max_len, orb_probe);
        if (*sub_ce1) return cmd_counterexample1(ctx, n_max);
        if (*sub_rule) return cmd_verify_coordinate_rule(ctx, rule_samples, rule_probes, rule_tol);
        if (*sub_build) {
            if (build_scenario.empty() == build_file.empty())
                throw ParseError("build-metric needs exactly one of --scenario / --scenario-file");
            return cmd_build_metric(ctx, build_scenario, build_file, build_base, germ_len, probe_n,
                                    sample_n, tolerance);
        }
        if (*sub_inv) return cmd_verify_invariance(ctx, inv_metric, inv_pg, inv_samples, tolerance);
        if (*sub_scn) {
            if (*sub_list) return cmd_scenario_list(ctx);
            if (*sub_exp) return cmd_scenario_export(ctx, exp_name, exp_dir);
        }
        err << "no command selected\n";
        return 2;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const CheckFailed& e) {
        err << "check failed: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace foliage::cli
