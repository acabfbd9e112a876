#pragma once

#include "hestonvi/envelopes.hpp"
#include "hestonvi/operator_assembly.hpp"
#include "hestonvi/weighted_space.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace hestonvi {

/// One step of an epsilon continuation.
struct EpsRecord
{
    double eps = 0.0;
    double penalty_norm = 0.0; ///< ||(psi - u_eps)^+|| in the discrete weighted L2 norm
    double v_increment = 0.0;  ///< ||u_eps - u_prev||_V, zero for the first step
    int newton_iterations = 0;
    GridFunction solution;
};

struct SolveReport
{
    GridFunction solution;
    int iterations = 0;
    double linear_residual = 0.0;
    double complementarity_residual = 0.0;
    double penalty_norm = 0.0;
    double envelope_violation = 0.0;
    std::vector<std::pair<double, double>> trace_levels;

    // Monotone-iteration ledger: worst signed step against the expected
    // direction (<= 0 means the ledger holds) and per-step increments.
    double monotone_violation = 0.0;
    std::vector<double> outer_increments;
    std::vector<EpsRecord> eps_history;

    // Raw quantities of the H2 a priori estimate.
    double norm_H2 = 0.0;
    double norm_1py_f = 0.0;
    double norm_V = 0.0;
};

struct PenaltyConfig
{
    std::vector<double> eps_sequence{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    double newton_tol = 1e-11;
    int newton_max_iter = 60;
    std::optional<double> lambda; ///< defaults to lambda0
    /// After the continuation, solve the discrete complementarity problem
    /// exactly by a primal-dual active-set iteration started from the last
    /// penalized iterate.
    bool finalize_active_set = true;
    double outer_tol = 1e-8;
    int max_outer = 2000;
    int pdas_max_iter = 200;

    /// Throws PreconditionError on a non-decreasing sequence or lambda < lambda0.
    void validate(const DerivedConstants& c) const;
    double shift(const DerivedConstants& c) const { return lambda.value_or(c.lambda0); }
};

/// Nodal penalty load -(1/eps) W (psi - u)^+ with W the lumped weighted mass.
Eigen::VectorXd penalty_load(const DiscreteForm& form, const GridFunction& u, const GridFunction& psi, double eps);

SolveReport solve_coercive(const DiscreteForm& form, double lambda, const GridFunction& f, const GridFunction& g);

/// Semismooth Newton for  K u - (1/eps) W (psi - u)^+ = M f  with W the
/// lumped weighted mass. `start` warm-starts the iteration.
SolveReport solve_penalized(const DiscreteForm& form, const PenaltyConfig& config, const GridFunction& f,
                            const GridFunction& psi, const GridFunction& g, double eps,
                            const GridFunction* start = nullptr);

SolveReport solve_vi_coercive(const DiscreteForm& form, const PenaltyConfig& config, const GridFunction& f,
                              const GridFunction& psi, const GridFunction& g, const GridFunction* start = nullptr);

/// Increasing iteration K_lambda u_n = M f + S u_{n-1} with S the (1+y) shift.
SolveReport solve_noncoercive_equation(const DiscreteForm& form, const GridFunction& f, const GridFunction& g,
                                       double lambda, double tol = 1e-8, int max_outer = 2000,
                                       const GridFunction* start = nullptr);

/// Decreasing iteration from u_0 = M, each step a coercive VI solve.
SolveReport solve_vi_noncoercive(const DiscreteForm& form, const PenaltyConfig& config, const GridFunction& f,
                                 const GridFunction& psi, const GridFunction& g, const EnvelopePair& pair);

/// Projected SOR on min{K u - M f, u - psi} = 0 with u = g on Gamma_1.
/// `tol` bounds the max-norm of the mass-scaled projected residual.
GridFunction lcp_psor(const DiscreteForm& form, double lambda, const GridFunction& f, const GridFunction& psi,
                      const GridFunction& g, double omega = 1.5, double tol = 1e-10, int max_sweeps = 200000);

struct ComparisonCase
{
    GridFunction f1, f2;
    std::optional<GridFunction> psi1, psi2; ///< both set for the VI variant
    GridFunction g1, g2;
};

struct ComparisonReport
{
    std::vector<double> worst; ///< min over nodes of u2 - u1 per case
    double overall = 0.0;
};

ComparisonReport comparison_suite(const DiscreteForm& form, double lambda, const std::vector<ComparisonCase>& cases,
                                  const PenaltyConfig& config = {});

/// Fills the diagnostic fields of a report for u against the system
/// K_lambda u = M f (lambda = 0 gives the unshifted operator).
SolveReport diagnostics(const GridFunction& u, const DiscreteForm& form, double lambda, const GridFunction& f,
                        const GridFunction* psi = nullptr, const EnvelopePair* pair = nullptr);

/// Grid rows nearest to y_max 2^{-k}, k = 1, 2, ..., with y > 0 and no repeats.
std::vector<double> trace_rows(const WeightedGrid& grid);

/// Least-squares slope of log(values) against log(abscissae), skipping
/// non-positive entries.
double loglog_slope(const std::vector<double>& abscissae, const std::vector<double>& values);

} // namespace hestonvi
