#include "hestonvi/config.hpp"

#include "hestonvi/cir_oracle.hpp"
#include "hestonvi/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace hestonvi {

using nlohmann::json;

namespace {

const std::map<std::string, std::set<std::string>> kFamilies{
    {"constant", {"value"}},
    {"affine", {"d0", "d2"}},
    {"exponential", {"d0", "d2", "d3", "d4", "l", "k"}},
    {"source", {"c0", "c2", "c3", "c4", "l", "k"}},
    {"put", {"strike", "scale", "shift"}},
    {"cir", {}},
};

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed)
{
    if (!j.is_object())
        throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
}

double number(const json& j, const std::string& where)
{
    if (!j.is_number())
        throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

template <class T>
void read(const json& j, const std::string& key, const std::string& where, T& out)
{
    if (!j.contains(key))
        return;
    const json& v = j.at(key);
    const std::string at = where + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean())
            throw ConfigError(at + ": expected true or false");
        out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer())
            throw ConfigError(at + ": expected an integer");
        out = v.get<int>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string())
            throw ConfigError(at + ": expected a string");
        out = v.get<std::string>();
    } else {
        out = number(v, at);
    }
}

DataSpec parse_data(const json& j, const std::string& where)
{
    if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
        throw ConfigError(where + ": expected an object with a string 'family'");
    DataSpec spec;
    spec.family = j.at("family").get<std::string>();
    const auto fam = kFamilies.find(spec.family);
    if (fam == kFamilies.end())
        throw ConfigError(where + ": unknown family '" + spec.family + "'");
    std::set<std::string> allowed = fam->second;
    allowed.insert("family");
    check_keys(j, where, allowed);
    for (const auto& key : fam->second)
        if (j.contains(key))
            spec.values[key] = number(j.at(key), where + "." + key);
    return spec;
}

template <class T>
std::vector<T> read_list(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty())
        throw ConfigError(where + ": expected a non-empty array");
    std::vector<T> out;
    for (const auto& v : j) {
        if constexpr (std::is_same_v<T, int>) {
            if (!v.is_number_integer())
                throw ConfigError(where + ": expected integers");
            out.push_back(v.get<int>());
        } else {
            out.push_back(number(v, where));
        }
    }
    return out;
}

} // namespace

double DataSpec::get(const std::string& key) const
{
    const auto it = values.find(key);
    if (it != values.end())
        return it->second;
    return (key == "strike" || key == "scale") ? 1.0 : 0.0;
}

RunConfig parse_config(const json& j)
{
    check_keys(j, "config",
               {"params", "domain", "grid", "problem", "data", "envelopes", "penalty", "refine", "cir", "sweep",
                "output"});
    RunConfig cfg;

    if (!j.contains("params"))
        throw ConfigError("config: missing 'params'");
    const json& p = j.at("params");
    check_keys(p, "params", {"sigma", "rho", "kappa", "theta", "r", "q"});
    for (const char* key : {"sigma", "rho", "kappa", "theta", "r"})
        if (!p.contains(key))
            throw ConfigError(std::string("params: missing '") + key + "'");
    read(p, "sigma", "params", cfg.params.sigma);
    read(p, "rho", "params", cfg.params.rho);
    read(p, "kappa", "params", cfg.params.kappa);
    read(p, "theta", "params", cfg.params.theta);
    read(p, "r", "params", cfg.params.r);
    read(p, "q", "params", cfg.params.q);

    if (j.contains("domain")) {
        const json& d = j.at("domain");
        check_keys(d, "domain", {"x_lo", "x_hi", "y_max"});
        read(d, "x_lo", "domain", cfg.domain.x_lo);
        read(d, "x_hi", "domain", cfg.domain.x_hi);
        read(d, "y_max", "domain", cfg.domain.y_max);
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, "grid", {"nx", "ny", "grading", "upwind", "quad_points"});
        read(g, "nx", "grid", cfg.grid.nx);
        read(g, "ny", "grid", cfg.grid.ny);
        read(g, "grading", "grid", cfg.grid.grading);
        read(g, "upwind", "grid", cfg.grid.upwind);
        read(g, "quad_points", "grid", cfg.grid.quad_points);
    }
    if (cfg.grid.nx < 3 || cfg.grid.ny < 3)
        throw ConfigError("grid: nx and ny must be at least 3");
    if (!(cfg.grid.grading >= 1.0))
        throw ConfigError("grid: grading must be at least 1");

    if (j.contains("problem")) {
        const json& pr = j.at("problem");
        check_keys(pr, "problem", {"kind", "coercive", "lambda"});
        read(pr, "kind", "problem", cfg.problem.kind);
        read(pr, "coercive", "problem", cfg.problem.coercive);
        if (pr.contains("lambda"))
            cfg.problem.lambda = number(pr.at("lambda"), "problem.lambda");
    }
    if (cfg.problem.kind != "equation" && cfg.problem.kind != "vi")
        throw ConfigError("problem.kind must be 'equation' or 'vi'");

    if (j.contains("data")) {
        const json& d = j.at("data");
        check_keys(d, "data", {"f", "psi", "g", "solution"});
        if (d.contains("f"))
            cfg.f = parse_data(d.at("f"), "data.f");
        if (d.contains("psi"))
            cfg.psi = parse_data(d.at("psi"), "data.psi");
        if (d.contains("g"))
            cfg.g = parse_data(d.at("g"), "data.g");
        if (d.contains("solution"))
            cfg.solution = parse_data(d.at("solution"), "data.solution");
    }

    if (j.contains("envelopes")) {
        const json& e = j.at("envelopes");
        check_keys(e, "envelopes",
                   {"c0", "c2", "c3", "c4", "C0", "C2", "C3", "C4", "k", "K", "l", "L", "require_integrability"});
        EnvelopeCoeffs c;
        read(e, "c0", "envelopes", c.c0);
        read(e, "c2", "envelopes", c.c2);
        read(e, "c3", "envelopes", c.c3);
        read(e, "c4", "envelopes", c.c4);
        read(e, "C0", "envelopes", c.C0);
        read(e, "C2", "envelopes", c.C2);
        read(e, "C3", "envelopes", c.C3);
        read(e, "C4", "envelopes", c.C4);
        read(e, "k", "envelopes", c.k);
        read(e, "K", "envelopes", c.K);
        read(e, "l", "envelopes", c.l);
        read(e, "L", "envelopes", c.L);
        read(e, "require_integrability", "envelopes", cfg.require_integrability);
        cfg.envelopes = c;
    }

    if (j.contains("penalty")) {
        const json& pe = j.at("penalty");
        check_keys(pe, "penalty",
                   {"eps", "newton_tol", "newton_max_iter", "finalize_active_set", "outer_tol", "max_outer",
                    "pdas_max_iter", "complementarity_bound"});
        if (pe.contains("eps"))
            cfg.penalty.eps_sequence = read_list<double>(pe.at("eps"), "penalty.eps");
        read(pe, "newton_tol", "penalty", cfg.penalty.newton_tol);
        read(pe, "newton_max_iter", "penalty", cfg.penalty.newton_max_iter);
        read(pe, "finalize_active_set", "penalty", cfg.penalty.finalize_active_set);
        read(pe, "outer_tol", "penalty", cfg.penalty.outer_tol);
        read(pe, "max_outer", "penalty", cfg.penalty.max_outer);
        read(pe, "pdas_max_iter", "penalty", cfg.penalty.pdas_max_iter);
        read(pe, "complementarity_bound", "penalty", cfg.complementarity_bound);
    }
    cfg.penalty.lambda = cfg.problem.lambda;

    if (j.contains("refine")) {
        const json& r = j.at("refine");
        check_keys(r, "refine", {"sizes"});
        if (r.contains("sizes"))
            cfg.refine_sizes = read_list<int>(r.at("sizes"), "refine.sizes");
        for (int n : cfg.refine_sizes)
            if (n < 3)
                throw ConfigError("refine.sizes: sizes must be at least 3");
    }
    if (j.contains("cir")) {
        const json& c = j.at("cir");
        check_keys(c, "cir", {"levels"});
        if (c.contains("levels"))
            cfg.cir_levels = read_list<double>(c.at("levels"), "cir.levels");
        for (double y : cfg.cir_levels)
            if (!(y > 0.0))
                throw ConfigError("cir.levels: levels must be positive");
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        check_keys(s, "sweep", {"oracle"});
        read(s, "oracle", "sweep", cfg.sweep_oracle);
        if (cfg.sweep_oracle != "final" && cfg.sweep_oracle != "psor")
            throw ConfigError("sweep.oracle must be 'final' or 'psor'");
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        check_keys(o, "output", {"dir"});
        read(o, "dir", "output", cfg.out_dir);
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const DataSpec& spec)
{
    json j{{"family", spec.family}};
    for (const auto& [k, v] : spec.values)
        j[k] = v;
    return j;
}

json to_json(const RunConfig& cfg)
{
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["params"] = {{"sigma", cfg.params.sigma}, {"rho", cfg.params.rho}, {"kappa", cfg.params.kappa},
                   {"theta", cfg.params.theta}, {"r", cfg.params.r},         {"q", cfg.params.q}};
    j["domain"] = {{"x_lo", finite_or_null(cfg.domain.x_lo)},
                   {"x_hi", finite_or_null(cfg.domain.x_hi)},
                   {"y_max", cfg.domain.y_max}};
    j["grid"] = {{"nx", cfg.grid.nx},
                 {"ny", cfg.grid.ny},
                 {"grading", cfg.grid.grading},
                 {"upwind", cfg.grid.upwind},
                 {"quad_points", cfg.grid.quad_points}};
    j["problem"] = {{"kind", cfg.problem.kind}, {"coercive", cfg.problem.coercive}};
    if (cfg.problem.lambda)
        j["problem"]["lambda"] = *cfg.problem.lambda;
    json data = json::object();
    if (cfg.f)
        data["f"] = to_json(*cfg.f);
    if (cfg.psi)
        data["psi"] = to_json(*cfg.psi);
    if (cfg.g)
        data["g"] = to_json(*cfg.g);
    if (cfg.solution)
        data["solution"] = to_json(*cfg.solution);
    j["data"] = data;
    if (cfg.envelopes) {
        const auto& e = *cfg.envelopes;
        j["envelopes"] = {{"c0", e.c0}, {"c2", e.c2}, {"c3", e.c3}, {"c4", e.c4}, {"C0", e.C0},
                          {"C2", e.C2}, {"C3", e.C3}, {"C4", e.C4}, {"k", e.k},   {"K", e.K},
                          {"l", e.l},   {"L", e.L},   {"require_integrability", cfg.require_integrability}};
    }
    j["penalty"] = {{"eps", cfg.penalty.eps_sequence},
                    {"newton_tol", cfg.penalty.newton_tol},
                    {"newton_max_iter", cfg.penalty.newton_max_iter},
                    {"finalize_active_set", cfg.penalty.finalize_active_set},
                    {"outer_tol", cfg.penalty.outer_tol},
                    {"max_outer", cfg.penalty.max_outer},
                    {"pdas_max_iter", cfg.penalty.pdas_max_iter},
                    {"complementarity_bound", cfg.complementarity_bound}};
    j["refine"] = {{"sizes", cfg.refine_sizes}};
    j["cir"] = {{"levels", cfg.cir_levels}};
    j["sweep"] = {{"oracle", cfg.sweep_oracle}};
    j["output"] = {{"dir", cfg.out_dir}};
    return j;
}

Field make_field(const DataSpec& s, const HestonParams& params, const Domain& domain)
{
    const std::string& fam = s.family;
    if (fam == "constant")
        return Field::constant(s.get("value"));
    if (fam == "affine")
        return Field::affine(s.get("d0"), s.get("d2"));
    if (fam == "exponential")
        return Field::affine(s.get("d0"), s.get("d2")) + Field::exp_x(s.get("d3"), s.get("l"))
               + Field::exp_y(s.get("d4"), s.get("k"));
    if (fam == "source") {
        const Field one_py = Field::affine(1.0, 1.0);
        return Field::affine(s.get("c0"), s.get("c2"))
               + one_py * (Field::exp_x(s.get("c3"), s.get("l")) + Field::exp_y(s.get("c4"), s.get("k")));
    }
    if (fam == "put")
        return s.get("scale") * Field::put_payoff(s.get("strike")) + Field::constant(s.get("shift"));
    if (fam == "cir") {
        const DerivedConstants c = derive_constants(validate(params));
        if (!(domain.y_max > 0.0 && std::isfinite(domain.y_max)))
            throw ConfigError("the cir family needs a finite domain.y_max");
        const double a = params.r / params.kappa, b = c.beta, mu = c.mu;
        const double norm = kummer_m(a, b, mu * domain.y_max);
        return Field([a, b, mu, norm](double, double y) {
            const double z = mu * std::max(y, 0.0);
            Jet2 j;
            j.v = kummer_m(a, b, z) / norm;
            j.y = mu * (a / b) * kummer_m(a + 1.0, b + 1.0, z) / norm;
            j.yy = mu * mu * a * (a + 1.0) / (b * (b + 1.0)) * kummer_m(a + 2.0, b + 2.0, z) / norm;
            return j;
        });
    }
    throw ConfigError("unknown family '" + fam + "'");
}

} // namespace hestonvi
