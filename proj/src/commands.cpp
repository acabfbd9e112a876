#include "hestonvi/commands.hpp"

#include "hestonvi/acceptance.hpp"
#include "hestonvi/cir_oracle.hpp"
#include "hestonvi/errors.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

namespace hestonvi {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Csv
{
public:
    Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : os_(path)
    {
        if (!os_)
            throw ConfigError("cannot write '" + path.string() + "'");
        row(header);
    }
    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
            os_ << (i ? "," : "") << cells[i];
        os_ << '\n';
    }

private:
    std::ofstream os_;
};

std::string quoted(const std::string& s)
{
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"')
            q += '"';
        q += ch;
    }
    return q + "\"";
}

std::filesystem::path out_dir(const RunConfig& cfg, const CommandOptions& opt)
{
    const std::filesystem::path dir = opt.out_dir.value_or(cfg.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot write '" + path.string() + "'");
    os << j.dump(2) << '\n';
}

RunConfig effective(RunConfig cfg, const CommandOptions& opt)
{
    if (opt.tol) {
        if (!(*opt.tol > 0.0))
            throw ConfigError("--tol must be positive");
        cfg.penalty.newton_tol = *opt.tol;
        cfg.penalty.outer_tol = *opt.tol;
    }
    return cfg;
}

json params_json(const HestonParams& p)
{
    return {{"sigma", p.sigma}, {"rho", p.rho}, {"kappa", p.kappa}, {"theta", p.theta}, {"r", p.r}, {"q", p.q}};
}

json constants_json(const DerivedConstants& c)
{
    return {{"beta", c.beta},     {"mu", c.mu},         {"a1", c.a1},           {"b1", c.b1},   {"nu0", c.nu0},
            {"C1", c.C1},         {"C2", c.C2},         {"C3", c.C3},           {"C4", c.C4},   {"C5", c.C5},
            {"C6", c.C6},         {"C7", c.C7},         {"gamma0", c.gamma0},   {"gamma", c.gamma},
            {"lambda0", c.lambda0}, {"nu1", c.nu1}};
}

json coeffs_json(const EnvelopeCoeffs& e)
{
    return {{"c0", e.c0}, {"c2", e.c2}, {"c3", e.c3}, {"c4", e.c4}, {"C0", e.C0}, {"C2", e.C2}, {"C3", e.C3},
            {"C4", e.C4}, {"k", e.k},   {"K", e.K},   {"l", e.l},   {"L", e.L},   {"d0", e.d0}, {"d2", e.d2},
            {"d3", e.d3}, {"d4", e.d4}, {"D0", e.D0}, {"D2", e.D2}, {"D3", e.D3}, {"D4", e.D4}};
}

// The discretized problem of a config at one resolution.
struct Built
{
    HestonParams p;
    DerivedConstants c;
    GridPtr grid;
    DiscreteForm form;
    double lambda = 0.0;
    GridFunction f, g;
    std::optional<GridFunction> psi;
    std::optional<Field> exact;
    std::optional<EnvelopePair> pair;
};

Built build(const RunConfig& cfg, int nx, int ny)
{
    Built b;
    b.p = validate(cfg.params);
    b.c = derive_constants(b.p);
    const Domain dom = truncate_domain(cfg.domain, b.c).domain;
    b.grid = build_grid(dom, nx, ny, cfg.grid.grading, b.c, cfg.grid.quad_points);
    b.form = assemble(b.grid, b.p, {cfg.grid.upwind});
    b.lambda = cfg.problem.lambda.value_or(b.c.lambda0);
    if (b.lambda < b.c.lambda0)
        throw ConfigError("problem.lambda " + format_number(b.lambda) + " is below lambda0 " +
                          format_number(b.c.lambda0));
    const bool vi = cfg.problem.kind == "vi";

    if (cfg.solution) {
        if (vi)
            throw ConfigError("data.solution applies to equation problems only");
        if (cfg.f || cfg.g)
            throw ConfigError("data.solution fixes f and g; drop data.f and data.g");
        const Field u = make_field(*cfg.solution, b.p, dom);
        Field f = image_A(u, b.p);
        if (cfg.problem.coercive)
            f = f + b.lambda * (Field::affine(1.0, 1.0) * u);
        b.exact = u;
        b.f = interpolate(b.grid, f);
        b.g = interpolate(b.grid, u);
    } else {
        if (!cfg.f)
            throw ConfigError("data.f is required unless data.solution is given");
        b.f = interpolate(b.grid, make_field(*cfg.f, b.p, dom));
        b.g = cfg.g ? interpolate(b.grid, make_field(*cfg.g, b.p, dom)) : GridFunction(b.grid, 0.0);
    }
    if (vi) {
        if (!cfg.psi)
            throw ConfigError("problem.kind = vi needs data.psi");
        b.psi = interpolate(b.grid, make_field(*cfg.psi, b.p, dom));
    }
    if (cfg.envelopes)
        b.pair = derive_envelopes(*cfg.envelopes, b.p, b.c, {cfg.require_integrability});
    if (!cfg.problem.coercive && vi && !b.pair)
        throw ConfigError("the non-coercive VI needs an envelopes block");
    return b;
}

SolveReport run_solver(const RunConfig& cfg, const Built& b)
{
    const bool vi = cfg.problem.kind == "vi";
    const EnvelopePair* pair = b.pair ? &*b.pair : nullptr;
    if (!vi && cfg.problem.coercive)
        return solve_coercive(b.form, b.lambda, b.f, b.g);
    if (!vi) {
        SolveReport rep =
            solve_noncoercive_equation(b.form, b.f, b.g, b.lambda, cfg.penalty.outer_tol, cfg.penalty.max_outer);
        if (pair)
            rep.envelope_violation = diagnostics(rep.solution, b.form, 0.0, b.f, nullptr, pair).envelope_violation;
        return rep;
    }
    if (cfg.problem.coercive)
        return solve_vi_coercive(b.form, cfg.penalty, b.f, *b.psi, b.g);
    return solve_vi_noncoercive(b.form, cfg.penalty, b.f, *b.psi, b.g, *pair);
}

json report_json(const SolveReport& r)
{
    json levels = json::array();
    for (auto [y, t] : r.trace_levels)
        levels.push_back({{"y", y}, {"level", num(t)}});
    json eps = json::array();
    for (const auto& e : r.eps_history)
        eps.push_back({{"eps", e.eps},
                       {"penalty_norm", e.penalty_norm},
                       {"v_increment", e.v_increment},
                       {"newton_iterations", e.newton_iterations}});
    return {{"iterations", r.iterations},
            {"linear_residual", num(r.linear_residual)},
            {"complementarity_residual", num(r.complementarity_residual)},
            {"penalty_norm", num(r.penalty_norm)},
            {"envelope_violation", num(r.envelope_violation)},
            {"monotone_violation", num(r.monotone_violation)},
            {"outer_iterations", r.outer_increments.size()},
            {"eps_history", eps},
            {"trace_levels", levels},
            {"norm_H2", num(r.norm_H2)},
            {"norm_1py_f", num(r.norm_1py_f)},
            {"norm_V", num(r.norm_V)}};
}

void write_solution(const std::filesystem::path& path, const Built& b, const GridFunction& u)
{
    std::vector<std::string> header{"x", "y", "u"};
    if (b.psi)
        header.push_back("psi");
    if (b.exact)
        header.push_back("exact");
    Csv csv(path, header);
    const WeightedGrid& G = *b.grid;
    for (int j = 0; j < G.ny; ++j)
        for (int i = 0; i < G.nx; ++i) {
            const int k = G.index(i, j);
            std::vector<std::string> row{format_number(G.x[i]), format_number(G.y[j]), format_number(u.values(k))};
            if (b.psi)
                row.push_back(format_number(b.psi->values(k)));
            if (b.exact)
                row.push_back(format_number((*b.exact)(G.x[i], G.y[j])));
            csv.row(row);
        }
}

json error_norms(const Built& b, const GridFunction& u)
{
    const Eigen::VectorXd e = u.values - interpolate(b.grid, *b.exact).values;
    return {{"L2w", b.form.norm_H(e)}, {"V", b.form.norm_V(e)}, {"max", e.cwiseAbs().maxCoeff()}};
}

} // namespace

std::string format_number(double v)
{
    if (!std::isfinite(v))
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

int cmd_check_constants(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream&)
{
    const HestonParams p = validate(cfg.params);
    const DerivedConstants c = derive_constants(p);
    json j{{"params", params_json(p)}, {"constants", constants_json(c)}, {"seed", opt.seed}};
    try {
        const CoordinateChange ch = normalize_b1(p);
        j["coordinate_change"] = {{"identity", ch.is_identity()},
                                  {"a", ch.a},
                                  {"m", ch.m},
                                  {"x_scale", ch.x_scale},
                                  {"f_scale", ch.f_scale},
                                  {"transformed", params_json(ch.transformed)},
                                  {"b1_residual", ch.b1_residual},
                                  {"normalized", ch.normalized}};
    } catch (const NormalizationError& e) {
        j["coordinate_change"] = {{"error", e.what()}};
    }
    write_json(out_dir(cfg, opt) / "constants.json", j);
    out << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_envelopes(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream&)
{
    if (!cfg.envelopes)
        throw ConfigError("envelopes: the config has no envelopes block");
    const HestonParams p = validate(cfg.params);
    const DerivedConstants c = derive_constants(p);
    const EnvelopePair pair = derive_envelopes(*cfg.envelopes, p, c, {cfg.require_integrability});
    json j{{"coefficients", coeffs_json(pair.coeffs)}, {"seed", opt.seed}};

    const Domain dom = truncate_domain(cfg.domain, c).domain;
    const GridPtr grid = build_grid(dom, cfg.grid.nx, cfg.grid.ny, cfg.grid.grading, c, cfg.grid.quad_points);
    const Field g = cfg.g ? make_field(*cfg.g, p, dom) : Field::constant(0.0);
    bool ok = true;
    if (cfg.f) {
        const Field psi = cfg.psi ? make_field(*cfg.psi, p, dom) : pair.m;
        const auto rep = check_admissible_envelopes(pair, make_field(*cfg.f, p, dom), g, psi, grid, p);
        json checks = json::object();
        for (const auto& v : rep.checks)
            checks[v.name] = v.worst;
        j["admissibility"] = {{"checks", checks},
                              {"l2_integrable", rep.l2_integrable},
                              {"lq_integrable", rep.lq_integrable},
                              {"q", rep.q},
                              {"l2_norm_M", num(rep.l2_norm_M)},
                              {"lq_norm_M", num(rep.lq_norm_M)},
                              {"passed", rep.passed()}};
        ok = rep.passed();
    }
    try {
        const auto br = check_barrier(barrier_from_recipe(pair, p, c), pair, g, grid, p);
        j["barrier"] = {{"min_A_phi_minus_A_g", br.min_A_phi_minus_A_g},
                        {"min_A_m_phi_minus_2A_g", br.min_A_m_phi_minus_2A_g},
                        {"min_phi_minus_g_gamma1", br.min_phi_minus_g_gamma1},
                        {"ratio_estimate", num(br.ratio_estimate)},
                        {"passed", br.passed()}};
        ok = ok && br.passed();
    } catch (const BarrierError& e) {
        j["barrier"] = {{"error", e.what()}, {"passed", false}};
        ok = false;
    }
    write_json(out_dir(cfg, opt) / "envelopes.json", j);
    out << j.dump(2) << '\n';
    return ok ? kExitOk : kExitFailure;
}

int cmd_solve(const RunConfig& cfg_in, const CommandOptions& opt, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = effective(cfg_in, opt);
    const auto dir = out_dir(cfg, opt);
    const Built b = build(cfg, cfg.grid.nx, cfg.grid.ny);
    json j{{"config", to_json(cfg)}, {"seed", opt.seed}, {"lambda", b.lambda}};
    try {
        const SolveReport rep = run_solver(cfg, b);
        j["report"] = report_json(rep);
        if (b.exact)
            j["errors"] = error_norms(b, rep.solution);
        const bool within = rep.complementarity_residual <= cfg.complementarity_bound;
        j["complementarity_bound"] = cfg.complementarity_bound;
        j["converged"] = within;
        write_solution(dir / "solution.csv", b, rep.solution);
        Csv trace(dir / "trace.csv", {"y", "level"});
        for (auto [y, t] : rep.trace_levels)
            trace.row({format_number(y), format_number(t)});
        write_json(dir / "report.json", j);
        out << "complementarity residual " << format_number(rep.complementarity_residual) << ", iterations "
            << rep.iterations << '\n';
        if (!within) {
            err << "error: complementarity residual exceeds the configured bound "
                << format_number(cfg.complementarity_bound) << '\n';
            return kExitNonconvergence;
        }
        return kExitOk;
    } catch (const NonconvergenceError& e) {
        j["converged"] = false;
        j["error"] = e.what();
        j["last_residual"] = num(e.last_residual());
        j["eps"] = e.eps();
        write_json(dir / "report.json", j);
        err << "error: " << e.what() << '\n';
        return kExitNonconvergence;
    }
}

int cmd_sweep_eps(const RunConfig& cfg_in, const CommandOptions& opt, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = effective(cfg_in, opt);
    if (cfg.problem.kind != "vi" || !cfg.problem.coercive)
        throw ConfigError("sweep-eps needs a coercive vi problem");
    const auto& eps = cfg.penalty.eps_sequence;
    if (eps.size() < 3)
        throw ConfigError("sweep-eps needs at least 3 eps values for a slope fit");
    if (eps.size() == 3)
        err << "warning: slope fit from 3 points leaves 1 degree of freedom\n";
    if (cfg.sweep_oracle == "final" && !cfg.penalty.finalize_active_set)
        throw ConfigError("sweep.oracle = final needs penalty.finalize_active_set");
    const auto dir = out_dir(cfg, opt);
    const Built b = build(cfg, cfg.grid.nx, cfg.grid.ny);
    json j{{"config", to_json(cfg)}, {"seed", opt.seed}};
    try {
        const SolveReport vi = solve_vi_coercive(b.form, cfg.penalty, b.f, *b.psi, b.g);
        const GridFunction oracle =
            cfg.sweep_oracle == "psor" ? lcp_psor(b.form, b.lambda, b.f, *b.psi, b.g, 1.6, 1e-10) : vi.solution;
        Csv csv(dir / "sweep.csv", {"eps", "penalty_norm", "v_distance"});
        std::vector<double> es, pn, vd;
        for (const auto& rec : vi.eps_history) {
            es.push_back(rec.eps);
            pn.push_back(rec.penalty_norm);
            vd.push_back(b.form.norm_V(rec.solution.values - oracle.values));
            csv.row({format_number(es.back()), format_number(pn.back()), format_number(vd.back())});
        }
        // An inactive obstacle gives identically zero columns: nothing to fit.
        auto fit = [&](const std::vector<double>& v, double threshold, const char* name) {
            const bool trivial = *std::max_element(v.begin(), v.end()) <= 0.0;
            const double s = trivial ? std::numeric_limits<double>::quiet_NaN() : loglog_slope(es, v);
            const bool pass = trivial || s >= threshold;
            j[name] = {{"slope", num(s)}, {"threshold", threshold}, {"trivial", trivial}, {"passed", pass}};
            out << name << " slope " << (trivial ? "trivial" : format_number(s)) << (pass ? " pass" : " FAIL")
                << '\n';
            return pass;
        };
        const bool ok = fit(pn, 0.9, "penalty_norm") & fit(vd, 0.45, "v_distance");
        j["oracle"] = cfg.sweep_oracle;
        j["converged"] = true;
        write_json(dir / "sweep.json", j);
        return ok ? kExitOk : kExitFailure;
    } catch (const NonconvergenceError& e) {
        j["converged"] = false;
        j["error"] = e.what();
        j["last_residual"] = num(e.last_residual());
        j["eps"] = e.eps();
        write_json(dir / "sweep.json", j);
        err << "error: " << e.what() << '\n';
        return kExitNonconvergence;
    }
}

int cmd_refine_study(const RunConfig& cfg_in, const CommandOptions& opt, std::ostream& out, std::ostream& err)
{
    const RunConfig cfg = effective(cfg_in, opt);
    if (!cfg.solution)
        throw ConfigError("refine-study needs data.solution");
    if (cfg.problem.kind != "equation")
        throw ConfigError("refine-study runs equation problems only");
    const bool cir = cfg.solution->family == "cir";
    const auto dir = out_dir(cfg, opt);

    std::vector<std::string> header{"n", "h", "l2w_error", "order"};
    if (cir)
        header.push_back("cir_rel_error");
    Csv csv(dir / "refine.csv", header);
    json rows = json::array();
    std::vector<double> hs, errs;
    bool exact = true;
    try {
        for (int n : cfg.refine_sizes) {
            const Built b = build(cfg, n, n);
            const SolveReport rep = run_solver(cfg, b);
            const GridFunction ex = interpolate(b.grid, *b.exact);
            const double e = b.form.norm_H(rep.solution.values - ex.values);
            const double h = (b.grid->x.back() - b.grid->x.front()) / (n - 1);
            const bool at_tol = e <= 1e-10 * (1.0 + b.form.norm_H(ex.values));
            exact = exact && at_tol;
            std::string order = "";
            json jorder = nullptr;
            if (at_tol) {
                order = "exact";
                jorder = "exact";
            } else if (!hs.empty() && errs.back() > 0.0) {
                const double o = std::log(errs.back() / e) / std::log(hs.back() / h);
                order = format_number(o);
                jorder = num(o);
            }
            hs.push_back(h);
            errs.push_back(e);
            std::vector<std::string> row{std::to_string(n), format_number(h), format_number(e), order};
            json jr{{"n", n}, {"h", h}, {"l2w_error", e}, {"order", jorder}};
            if (cir) {
                // Relative gap to the Kummer M-branch along the column nearest x = 0.
                const WeightedGrid& G = *b.grid;
                int ic = 0;
                for (int i = 1; i < G.nx; ++i)
                    if (std::abs(G.x[i]) < std::abs(G.x[ic]))
                        ic = i;
                double gap = 0.0;
                for (int j = 0; j < G.ny; ++j) {
                    const double ref = (*b.exact)(G.x[ic], G.y[j]);
                    gap = std::max(gap, std::abs(rep.solution.at(ic, j) / ref - 1.0));
                }
                row.push_back(format_number(gap));
                jr["cir_rel_error"] = gap;
            }
            csv.row(row);
            rows.push_back(jr);
        }
    } catch (const NonconvergenceError& e) {
        write_json(dir / "refine.json", {{"rows", rows}, {"converged", false}, {"error", e.what()}});
        err << "error: " << e.what() << '\n';
        return kExitNonconvergence;
    }
    const double fitted = exact ? std::numeric_limits<double>::quiet_NaN() : loglog_slope(hs, errs);
    const bool ok = exact || fitted >= 1.5;
    json j{{"config", to_json(cfg)}, {"seed", opt.seed},        {"rows", rows},
           {"exact", exact},         {"fitted_order", num(fitted)}, {"order_at_least_1_5", ok}};
    write_json(dir / "refine.json", j);
    out << (exact ? std::string("errors at solver tolerance") : "fitted order " + format_number(fitted)) << '\n';
    return ok ? kExitOk : kExitFailure;
}

int cmd_cir(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream&)
{
    const HestonParams p = validate(cfg.params);
    const DerivedConstants c = derive_constants(p);
    const auto dir = out_dir(cfg, opt);
    const double Y = (cfg.domain.y_max > 0.0 && std::isfinite(cfg.domain.y_max)) ? cfg.domain.y_max : 1.0;

    Csv branches(dir / "cir_branches.csv", {"y", "m_branch", "u_branch", "m_trace", "u_trace", "accuracy_warning"});
    for (double y : cfg.cir_levels) {
        const CirBranches br = cir_homogeneous(p, y);
        branches.row({format_number(y), format_number(br.m_branch), format_number(br.u_branch),
                      format_number(cir_trace_level(p, CirBranch::M, y)),
                      format_number(cir_trace_level(p, CirBranch::U, y)), br.accuracy_warning ? "1" : "0"});
    }

    const BoundaryClassification cls = classify_boundary(p, Y);
    Csv table(dir / "cir_classification.csv", {"branch", "norm", "cutoff", "squared_norm"});
    const std::pair<const char*, const NormGrowth*> growths[] = {
        {"U,H1", &cls.u_h1}, {"U,H2", &cls.u_h2}, {"M,H1", &cls.m_h1}, {"M,H2", &cls.m_h2}};
    json finite = json::object();
    for (const auto& [name, g] : growths) {
        const std::string s(name);
        for (std::size_t k = 0; k < g->cutoffs.size(); ++k)
            table.row({s.substr(0, 1), s.substr(2), format_number(g->cutoffs[k]), format_number(g->norms[k])});
        finite[s.substr(0, 1) + "_" + s.substr(2)] = g->finite;
    }

    json j{{"beta", c.beta}, {"mu", c.mu}, {"a", p.r / p.kappa}, {"y_max", Y}, {"finite", finite}, {"seed", opt.seed}};
    if (c.beta > 0.0 && c.beta < 1.0)
        j["u_trace_limit"] = cir_trace_constant(p);
    if (p.r > 0.0)
        j["solve_1d_max_rel_error"] = solve_cir_1d(p, Y).max_rel_error;
    write_json(dir / "cir.json", j);
    out << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_suite(const CommandOptions& opt, std::ostream& out, std::ostream&)
{
    const std::filesystem::path dir = opt.out_dir.value_or("out");
    std::filesystem::create_directories(dir);
    Csv csv(dir / "acceptance.csv", {"id", "name", "passed", "detail"});
    int failed = 0;
    for (int id = 1; id <= kCriterionCount; ++id) {
        const CriterionResult r = run_criterion(id, opt.seed);
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.1f", r.seconds);
        out << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << ": " << r.detail << " (" << secs
            << " s)" << std::endl;
        csv.row({std::to_string(r.id), quoted(r.name), r.passed ? "1" : "0", quoted(r.detail)});
        failed += !r.passed;
    }
    out << (kCriterionCount - failed) << "/" << kCriterionCount << " criteria passed\n";
    return failed == 0 ? kExitOk : kExitFailure;
}

} // namespace hestonvi
