#include "hestonvi/cir_oracle.hpp"
#include "hestonvi/commands.hpp"
#include "hestonvi/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hestonvi;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_json()
{
    return json::parse(R"({
      "params": {"sigma": 0.4, "rho": -0.5, "kappa": 1.5, "theta": 0.1, "r": 0.05, "q": 0.0},
      "domain": {"x_lo": -2.0, "x_hi": 2.0, "y_max": 1.5},
      "grid": {"nx": 9, "ny": 9},
      "data": {"f": {"family": "constant", "value": 1.0}}
    })");
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("hestonvi_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parsing and validation")
{
    const RunConfig cfg = parse_config(base_json());
    CHECK(cfg.params.kappa == 1.5);
    CHECK(cfg.grid.nx == 9);
    CHECK(cfg.problem.kind == "equation");
    CHECK(cfg.f->family == "constant");
    CHECK_FALSE(cfg.psi.has_value());

    auto bad = [](auto edit) {
        json j = base_json();
        edit(j);
        return j;
    };
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["extra"] = 1; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["grid"]["nx"] = 2; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["grid"]["nx"] = 4.5; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["params"].erase("rho"); })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["data"]["f"] = {{"family", "spline"}}; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["data"]["f"]["d0"] = 1.0; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["problem"] = {{"kind", "pde"}}; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["refine"] = {{"sizes", json::array()}}; })), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);

    // Round trip through the echoed form.
    json j = base_json();
    j["envelopes"] = {{"c0", -1.0}, {"C0", 1.0}};
    j["problem"] = {{"kind", "vi"}, {"lambda", 0.5}};
    j["data"]["psi"] = {{"family", "put"}, {"strike", 1.1}};
    const RunConfig a = parse_config(j);
    const RunConfig b = parse_config(to_json(a));
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(*b.problem.lambda == 0.5);
    CHECK(*b.penalty.lambda == 0.5);
}

TEST_CASE("builtin data families")
{
    const HestonParams p = validate({1.0, 0.0, 1.0, 0.25, 0.6, 0.0});
    const Domain dom{-1.0, 1.0, 2.0};
    const DataSpec put{"put", {}};
    CHECK(put.get("strike") == 1.0);
    CHECK(make_field(put, p, dom)(-1.0, 0.3) == doctest::Approx(1.0 - std::exp(-1.0)));
    CHECK(make_field(DataSpec{"put", {{"scale", 2.0}, {"shift", -0.5}}}, p, dom)(1.0, 0.0) == -0.5);

    const DataSpec ex{"exponential", {{"d0", 2.0}, {"d2", 1.0}, {"d3", 1.0}, {"l", 0.1}, {"d4", 1.0}, {"k", 0.2}}};
    CHECK(make_field(ex, p, dom)(0.5, 0.7) == doctest::Approx(2.7 + std::exp(0.05) + std::exp(0.14)));
    const DataSpec src{"source", {{"c0", 1.0}, {"c3", 2.0}, {"l", 0.5}}};
    CHECK(make_field(src, p, dom)(0.4, 1.0) == doctest::Approx(1.0 + 2.0 * 2.0 * std::exp(0.2)));

    const Field cir = make_field(DataSpec{"cir", {}}, p, dom);
    CHECK(cir(0.0, 2.0) == doctest::Approx(1.0));
    const double h = 1e-5, y = 0.8;
    CHECK(cir.jet(0.0, y).y == doctest::Approx((cir(0.0, y + h) - cir(0.0, y - h)) / (2 * h)).epsilon(1e-7));
    // x-independent solution of the CIR equation: A u vanishes.
    CHECK(std::abs(apply_A(cir, 0.3, y, p)) < 1e-12);
}

TEST_CASE("number formatting")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.5) == "2.5");
    CHECK(format_number(-3.0) == "-3");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("check-constants report")
{
    const fs::path dir = scratch("constants");
    CommandOptions opt;
    opt.out_dir = dir.string();
    std::ostringstream out, err;
    CHECK(cmd_check_constants(parse_config(base_json()), opt, out, err) == kExitOk);
    const json j = json::parse(slurp(dir / "constants.json"));
    for (const char* key : {"beta", "mu", "gamma0", "lambda0", "nu1"})
        CHECK(j["constants"].contains(key));
    CHECK(j["coordinate_change"].contains("b1_residual"));

    json bad = base_json();
    bad["params"]["sigma"] = 0.0;
    CHECK_THROWS_AS(cmd_check_constants(parse_config(bad), opt, out, err), CoefficientError);
}

TEST_CASE("solve writes deterministic outputs")
{
    json j = base_json();
    // u = 2.5 solves A_lambda u = 2.5 (r + lambda0 (1 + y)), lambda0 = C2 = 0.06 here.
    const double lam = derive_constants(validate(parse_config(j).params)).lambda0;
    j["data"]["f"] = {{"family", "affine"}, {"d0", 2.5 * (0.05 + lam)}, {"d2", 2.5 * lam}};
    j["data"]["g"] = {{"family", "constant"}, {"value", 2.5}};
    const RunConfig cfg = parse_config(j);
    const fs::path d1 = scratch("solve1"), d2 = scratch("solve2");
    std::ostringstream out, err;
    CommandOptions opt;
    opt.out_dir = d1.string();
    CHECK(cmd_solve(cfg, opt, out, err) == kExitOk);
    opt.out_dir = d2.string();
    CHECK(cmd_solve(cfg, opt, out, err) == kExitOk);
    for (const char* f : {"solution.csv", "report.json", "trace.csv"})
        CHECK(slurp(d1 / f) == slurp(d2 / f));

    std::istringstream csv(slurp(d1 / "solution.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "x,y,u");
    int rows = 0;
    while (std::getline(csv, line)) {
        const double u = std::stod(line.substr(line.rfind(',') + 1));
        CHECK(std::abs(u - 2.5) < 1e-10);
        ++rows;
    }
    CHECK(rows == 81);
    CHECK(json::parse(slurp(d1 / "report.json"))["converged"] == true);
}

TEST_CASE("solve reports nonconvergence with exit 2")
{
    json j = base_json();
    j["problem"] = {{"kind", "vi"}};
    j["data"]["f"] = {{"family", "constant"}, {"value", 0.0}};
    j["data"]["psi"] = {{"family", "put"}};
    j["data"]["g"] = {{"family", "put"}};
    j["penalty"] = {{"newton_max_iter", 1}, {"eps", {1e-6}}};
    const fs::path dir = scratch("nonconv");
    CommandOptions opt;
    opt.out_dir = dir.string();
    std::ostringstream out, err;
    CHECK(cmd_solve(parse_config(j), opt, out, err) == kExitNonconvergence);
    const json rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep["converged"] == false);
    CHECK(rep.contains("error"));
}

TEST_CASE("sweep-eps thresholds and fit warnings")
{
    json j = base_json();
    j["grid"] = {{"nx", 17}, {"ny", 17}};
    j["problem"] = {{"kind", "vi"}};
    j["data"]["f"] = {{"family", "constant"}, {"value", 0.0}};
    j["data"]["psi"] = {{"family", "constant"}, {"value", -1.0}};
    j["penalty"] = {{"eps", {1e-2, 1e-3, 1e-4}}};
    const fs::path dir = scratch("sweep");
    CommandOptions opt;
    opt.out_dir = dir.string();
    std::ostringstream out, err;
    CHECK(cmd_sweep_eps(parse_config(j), opt, out, err) == kExitOk);
    CHECK(err.str().find("warning") != std::string::npos);
    const json s = json::parse(slurp(dir / "sweep.json"));
    CHECK(s["penalty_norm"]["trivial"] == true);

    j["penalty"] = {{"eps", {1e-2, 1e-3}}};
    CHECK_THROWS_AS(cmd_sweep_eps(parse_config(j), opt, out, err), ConfigError);

    // Active put obstacle: four points, no warning, rates within thresholds.
    j["grid"] = {{"nx", 25}, {"ny", 25}, {"upwind", true}};
    j["data"]["psi"] = {{"family", "put"}};
    j["data"]["g"] = {{"family", "put"}};
    j["penalty"] = {{"eps", {1e-2, 1e-3, 1e-4, 1e-5}}};
    j["sweep"] = {{"oracle", "psor"}};
    std::ostringstream err2;
    CHECK(cmd_sweep_eps(parse_config(j), opt, out, err2) == kExitOk);
    CHECK(err2.str().empty());
    const json a = json::parse(slurp(dir / "sweep.json"));
    CHECK(a["penalty_norm"]["slope"].get<double>() >= 0.9);
    CHECK(a["v_distance"]["slope"].get<double>() >= 0.45);
}

TEST_CASE("refine-study orders")
{
    json j = base_json();
    j["data"] = {{"solution", {{"family", "constant"}, {"value", 1.5}}}};
    j["refine"] = {{"sizes", {9, 17, 33}}};
    const fs::path dir = scratch("refine");
    CommandOptions opt;
    opt.out_dir = dir.string();
    std::ostringstream out, err;
    CHECK(cmd_refine_study(parse_config(j), opt, out, err) == kExitOk);
    CHECK(slurp(dir / "refine.csv").find(",exact") != std::string::npos);

    j["data"] = {{"solution", {{"family", "exponential"}, {"d0", 2.0}, {"d2", 1.0}, {"d3", 1.0}, {"l", 0.1},
                               {"d4", 1.0}, {"k", 0.2}}}};
    CHECK(cmd_refine_study(parse_config(j), opt, out, err) == kExitOk);
    CHECK(json::parse(slurp(dir / "refine.json"))["fitted_order"].get<double>() >= 1.5);

    j["data"]["f"] = {{"family", "constant"}, {"value", 1.0}};
    CHECK_THROWS_AS(cmd_refine_study(parse_config(j), opt, out, err), ConfigError);
}

TEST_CASE("cir command tables")
{
    json j = base_json();
    j["params"] = {{"sigma", 1.0}, {"rho", 0.0}, {"kappa", 1.0}, {"theta", 0.25}, {"r", 0.6}};
    j["cir"] = {{"levels", {1e-6, 0.5}}};
    const fs::path dir = scratch("cir");
    CommandOptions opt;
    opt.out_dir = dir.string();
    std::ostringstream out, err;
    CHECK(cmd_cir(parse_config(j), opt, out, err) == kExitOk);
    const json c = json::parse(slurp(dir / "cir.json"));
    CHECK(c["finite"]["U_H1"] == true);
    CHECK(c["finite"]["U_H2"] == false);
    CHECK(c["u_trace_limit"].get<double>() < 0.0);
    std::istringstream csv(slurp(dir / "cir_branches.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(csv, line))
        ++rows;
    CHECK(rows == 3);
}
