#include "hestonvi/commands.hpp"
#include "hestonvi/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace hestonvi;

int main(int argc, char** argv)
{
    CLI::App app{"Heston obstacle and equation solver"};
    app.require_subcommand(1);

    std::string config_path;
    CommandOptions opt;
    std::string out_dir;
    double tol = 0.0;

    struct Sub
    {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"check-constants", "print derived constants and the coordinate change as JSON"},
        {"envelopes", "derive envelope coefficients and check admissibility and the barrier"},
        {"solve", "solve the configured problem; write solution.csv, report.json, trace.csv"},
        {"sweep-eps", "penalty-parameter sweep with fitted rates"},
        {"refine-study", "manufactured-solution convergence table"},
        {"cir", "Kummer branch values, traces and boundary classification"},
        {"suite", "run the acceptance battery"},
    };
    for (const auto& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        if (std::string(s.name) != "suite")
            sc->add_option("-c,--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
        sc->add_option("--out", out_dir, "output directory");
        sc->add_option("--tol", tol, "solver tolerance override")->check(CLI::PositiveNumber);
        sc->add_option("--seed", opt.seed, "seed recorded in reports and used by the suite");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (chosen->count("--out"))
        opt.out_dir = out_dir;
    if (chosen->count("--tol"))
        opt.tol = tol;

    try {
        if (name == "suite")
            return cmd_suite(opt, std::cout, std::cerr);
        const RunConfig cfg = load_config(config_path);
        if (name == "check-constants")
            return cmd_check_constants(cfg, opt, std::cout, std::cerr);
        if (name == "envelopes")
            return cmd_envelopes(cfg, opt, std::cout, std::cerr);
        if (name == "solve")
            return cmd_solve(cfg, opt, std::cout, std::cerr);
        if (name == "sweep-eps")
            return cmd_sweep_eps(cfg, opt, std::cout, std::cerr);
        if (name == "refine-study")
            return cmd_refine_study(cfg, opt, std::cout, std::cerr);
        return cmd_cir(cfg, opt, std::cout, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const CoefficientError& e) {
        std::cerr << "CoefficientError: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SideConditionError& e) {
        std::cerr << "SideConditionError: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParamError& e) {
        std::cerr << "ParamError: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NonconvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNonconvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
