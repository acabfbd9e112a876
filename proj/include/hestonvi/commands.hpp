#pragma once

#include "hestonvi/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace hestonvi {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,        ///< a check or threshold did not pass
    kExitNonconvergence = 2,
    kExitUsage = 64,
    kExitConfig = 65,
};

/// Command-line overrides shared by every subcommand.
struct CommandOptions
{
    std::optional<std::string> out_dir; ///< replaces output.dir
    std::optional<double> tol;          ///< replaces penalty.newton_tol and penalty.outer_tol
    unsigned seed = 0;                  ///< recorded in reports; offsets the suite's random batteries
};

/// Each command writes its files under the output directory, prints a short
/// summary to `out` and warnings to `err`, and returns an ExitCode.
/// Library exceptions other than NonconvergenceError propagate.
int cmd_check_constants(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_envelopes(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sweep_eps(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_refine_study(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_cir(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_suite(const CommandOptions& opt, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal form, C locale.
std::string format_number(double v);

} // namespace hestonvi
