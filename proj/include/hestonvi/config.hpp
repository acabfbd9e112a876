#pragma once

#include "hestonvi/envelopes.hpp"
#include "hestonvi/solvers.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hestonvi {

/// A builtin data family and its numeric parameters.
///
///   constant     value                      c
///   affine       d0 d2                      d0 + d2 y
///   exponential  d0 d2 d3 d4 l k            d0 + d2 y + d3 e^{l x} + d4 e^{k y}
///   source       c0 c2 c3 c4 l k            c0 + c2 y + (1+y)(c3 e^{l x} + c4 e^{k y})
///   put          strike scale shift         scale (strike - e^x)^+ + shift
///   cir          (none)                     M(r/kappa, beta, mu y) / M(r/kappa, beta, mu y_max)
///
/// Missing parameters default to zero, except strike and scale (one).
struct DataSpec
{
    std::string family;
    std::map<std::string, double> values;

    double get(const std::string& key) const;
};

struct GridSpec
{
    int nx = 33;
    int ny = 33;
    double grading = 1.0;
    bool upwind = false;
    int quad_points = 8;
};

struct ProblemSpec
{
    std::string kind = "equation"; ///< "equation" or "vi"
    bool coercive = true;          ///< false selects the monotone iterations
    std::optional<double> lambda;  ///< shift, defaults to lambda0
};

/// Everything a subcommand needs. See the README for the JSON schema.
struct RunConfig
{
    HestonParams params;
    Domain domain;
    GridSpec grid;
    ProblemSpec problem;
    std::optional<DataSpec> f, psi, g, solution;
    std::optional<EnvelopeCoeffs> envelopes;
    bool require_integrability = true;
    PenaltyConfig penalty;
    double complementarity_bound = 1e-8;
    std::vector<int> refine_sizes{17, 33, 65};
    std::vector<double> cir_levels{1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0};
    std::string sweep_oracle = "final"; ///< "final" or "psor"
    std::string out_dir = "out";
};

/// Throws ConfigError on unknown keys, wrong types, unknown families or
/// out-of-range grid sizes. Coefficients are not validated here.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const DataSpec& spec);

/// The field of a builtin family. `cir` takes its shape from the parameters
/// and its derivatives from the contiguous relations of M.
Field make_field(const DataSpec& spec, const HestonParams& params, const Domain& domain);

} // namespace hestonvi
