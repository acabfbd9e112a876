#include "hestonvi/solvers.hpp"

#include "hestonvi/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace hestonvi {

namespace {

using Vec = Eigen::VectorXd;
using Trip = Eigen::Triplet<double>;

// Splits a system matrix into interior-interior and interior-boundary blocks.
struct DirichletSystem
{
    int n = 0;
    std::vector<int> interior;
    std::vector<int> local; // global -> interior slot or -1
    SpMat K_II;
    SpMat K_IB; // interior rows, all columns, boundary columns only

    DirichletSystem(const SpMat& K, const std::vector<char>& mask)
    {
        n = static_cast<int>(K.rows());
        local.assign(n, -1);
        for (int k = 0; k < n; ++k)
            if (!mask[k]) {
                local[k] = static_cast<int>(interior.size());
                interior.push_back(k);
            }
        const int ni = static_cast<int>(interior.size());
        std::vector<Trip> tii, tib;
        for (int col = 0; col < K.outerSize(); ++col)
            for (SpMat::InnerIterator it(K, col); it; ++it) {
                const int li = local[it.row()];
                if (li < 0)
                    continue;
                const int lj = local[col];
                if (lj >= 0)
                    tii.emplace_back(li, lj, it.value());
                else
                    tib.emplace_back(li, col, it.value());
            }
        // Keep every diagonal slot so added penalty terms never change the pattern.
        for (int i = 0; i < ni; ++i)
            tii.emplace_back(i, i, 0.0);
        K_II.resize(ni, ni);
        K_II.setFromTriplets(tii.begin(), tii.end());
        K_II.makeCompressed();
        K_IB.resize(ni, n);
        K_IB.setFromTriplets(tib.begin(), tib.end());
    }

    int size() const { return static_cast<int>(interior.size()); }

    Vec restrict_to(const Vec& v) const
    {
        Vec out(size());
        for (int i = 0; i < size(); ++i)
            out(i) = v(interior[i]);
        return out;
    }

    // b_I - K_IB g
    Vec rhs(const Vec& b_full, const Vec& g) const
    {
        Vec gb = g;
        for (int k : interior)
            gb(k) = 0.0;
        return restrict_to(b_full) - K_IB * gb;
    }

    Vec expand(const Vec& uI, const Vec& g) const
    {
        Vec u = g;
        for (int i = 0; i < size(); ++i)
            u(interior[i]) = uI(i);
        return u;
    }
};

// Sparse direct solve with an iterative fallback.
class LinearSolver
{
public:
    void factorize(const SpMat& A)
    {
        A_ = &A;
        if (!analyzed_ || A.nonZeros() != nnz_) {
            lu_.analyzePattern(A);
            analyzed_ = true;
            nnz_ = A.nonZeros();
        }
        lu_.factorize(A);
        direct_ok_ = lu_.info() == Eigen::Success;
        if (!direct_ok_) {
            it_ = std::make_unique<Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>>>();
            it_->setTolerance(1e-12);
            it_->setMaxIterations(20000);
            it_->compute(A);
        }
    }

    void reset() { analyzed_ = false; }

    Vec solve(const Vec& b, double* rel_residual = nullptr) const
    {
        Vec x;
        if (direct_ok_) {
            x = lu_.solve(b);
        } else {
            x = it_->solve(b);
            if (it_->info() != Eigen::Success)
                throw LinearSolveError("iterative fallback stagnated, estimated error "
                                       + std::to_string(it_->error()));
        }
        const double bn = b.norm();
        const double res = (bn > 0.0) ? (*A_ * x - b).norm() / bn : (*A_ * x - b).norm();
        if (!std::isfinite(res) || res > 1e-8)
            throw LinearSolveError("linear solve residual " + std::to_string(res));
        if (rel_residual)
            *rel_residual = res;
        return x;
    }

private:
    const SpMat* A_ = nullptr;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
    std::unique_ptr<Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>>> it_;
    bool analyzed_ = false;
    bool direct_ok_ = false;
    Eigen::Index nnz_ = 0;
};

void check_lambda(const DiscreteForm& form, double lambda)
{
    if (lambda < form.consts.lambda0 * (1.0 - 1e-12))
        throw PreconditionError("lambda " + std::to_string(lambda) + " is below lambda0 "
                                + std::to_string(form.consts.lambda0));
}

void check_same_grid(const DiscreteForm& form, const GridFunction& u, const char* name)
{
    if (u.values.size() != form.grid->size())
        throw PreconditionError(std::string(name) + " does not live on the form's grid");
}

void check_obstacle_boundary(const DiscreteForm& form, const GridFunction& psi, const GridFunction& g)
{
    for (int k = 0; k < form.grid->size(); ++k)
        if (form.dirichlet_mask[k] && psi.values(k) > g.values(k) + 1e-12 * (1.0 + std::abs(g.values(k))))
            throw PreconditionError("obstacle exceeds the boundary data on Gamma_1");
}

Vec lumped_mass(const DiscreteForm& form)
{
    return form.matrix_mass * Vec::Ones(form.grid->size());
}

// Everything a penalized or complementarity solve needs for one (K, f, g).
struct Problem
{
    const DiscreteForm& form;
    SpMat K;
    DirichletSystem sys;
    Vec b;     // eliminated right-hand side
    Vec w;     // lumped weights on interior nodes
    Vec g;

    // `load` is the full consistent load vector, M f for a nodal source f.
    Problem(const DiscreteForm& fm, double lambda, const Vec& load, const Vec& gv)
        : form(fm), K(fm.coercive(lambda)), sys(K, fm.dirichlet_mask), g(gv)
    {
        b = sys.rhs(load, gv);
        w = sys.restrict_to(lumped_mass(fm));
    }
};

Vec penalty_residual(const Problem& P, const Vec& uI, const Vec& psiI, double eps)
{
    return P.sys.K_II * uI - P.b - (P.w.array() * (psiI - uI).array().max(0.0)).matrix() / eps;
}

// Semismooth Newton on the interior unknowns.
Vec newton_penalized(const Problem& P, const Vec& psiI, double eps, Vec uI, const PenaltyConfig& cfg, int& iters,
                     double& lin_res)
{
    const int ni = P.sys.size();
    LinearSolver solver;
    SpMat J;
    auto scale = [&](const Vec& u) { return P.b.norm() + (P.sys.K_II * u).norm() + 1e-300; };
    Vec F = penalty_residual(P, uI, psiI, eps);
    double fn = F.norm();
    for (iters = 0; iters < cfg.newton_max_iter; ++iters) {
        if (fn <= cfg.newton_tol * scale(uI))
            return uI;
        J = P.sys.K_II;
        std::vector<char> active(ni, 0);
        for (int i = 0; i < ni; ++i)
            if (psiI(i) > uI(i)) {
                active[i] = 1;
                J.coeffRef(i, i) += P.w(i) / eps;
            }
        solver.factorize(J);
        const Vec du = solver.solve(-F, &lin_res);
        double t = 1.0;
        Vec trial = uI + du;
        Vec Ft = penalty_residual(P, trial, psiI, eps);
        while (Ft.norm() > (1.0 - 1e-4 * t) * fn && t > 1e-6) {
            t *= 0.5;
            trial = uI + t * du;
            Ft = penalty_residual(P, trial, psiI, eps);
        }
        uI = trial;
        F = Ft;
        fn = F.norm();
        // A full step that keeps the active set solves the piecewise-linear system exactly.
        if (t == 1.0) {
            bool same = true;
            for (int i = 0; i < ni && same; ++i)
                same = active[i] == (psiI(i) > uI(i) ? 1 : 0);
            if (same) {
                ++iters;
                return uI;
            }
        }
    }
    if (fn <= cfg.newton_tol * scale(uI))
        return uI;
    throw NonconvergenceError("semismooth Newton did not converge at eps " + std::to_string(eps), fn / scale(uI),
                              eps);
}

// Primal-dual active-set iteration for min{K u - b, u - psi} = 0.
Vec active_set_lcp(const Problem& P, const Vec& psiI, Vec uI, int max_iter, int& iters, double& lin_res)
{
    const int ni = P.sys.size();
    std::vector<char> active(ni, 0), prev(ni, 2);
    for (iters = 0; iters < max_iter; ++iters) {
        const Vec mult = P.sys.K_II * uI - P.b;
        for (int i = 0; i < ni; ++i)
            active[i] = (mult(i) - P.w(i) * (uI(i) - psiI(i)) > 0.0) ? 1 : 0;
        if (iters > 0 && active == prev)
            return uI;
        prev = active;
        std::vector<Trip> t;
        t.reserve(P.sys.K_II.nonZeros());
        for (int col = 0; col < P.sys.K_II.outerSize(); ++col)
            for (SpMat::InnerIterator it(P.sys.K_II, col); it; ++it)
                if (!active[it.row()])
                    t.emplace_back(it.row(), col, it.value());
        Vec rhs = P.b;
        for (int i = 0; i < ni; ++i)
            if (active[i]) {
                t.emplace_back(i, i, 1.0);
                rhs(i) = psiI(i);
            }
        SpMat Amat(ni, ni);
        Amat.setFromTriplets(t.begin(), t.end());
        Amat.makeCompressed();
        LinearSolver solver;
        solver.factorize(Amat);
        uI = solver.solve(rhs, &lin_res);
    }
    throw NonconvergenceError("active-set iteration did not settle", 0.0);
}

double max_signed(const Vec& d) { return d.size() ? d.maxCoeff() : 0.0; }

} // namespace

void PenaltyConfig::validate(const DerivedConstants& c) const
{
    if (eps_sequence.empty())
        throw PreconditionError("eps_sequence is empty");
    for (std::size_t i = 0; i < eps_sequence.size(); ++i) {
        if (!(eps_sequence[i] > 0.0))
            throw PreconditionError("eps values must be positive");
        if (i > 0 && !(eps_sequence[i] < eps_sequence[i - 1]))
            throw PreconditionError("eps_sequence must be strictly decreasing");
    }
    if (shift(c) < c.lambda0 * (1.0 - 1e-12))
        throw PreconditionError("lambda must be at least lambda0");
}

std::vector<double> trace_rows(const WeightedGrid& grid)
{
    std::vector<double> rows;
    const double ymax = grid.y.back();
    for (int k = 1; k < 64; ++k) {
        const double target = ymax * std::ldexp(1.0, -k);
        int best = 1;
        for (int j = 1; j < grid.ny; ++j)
            if (std::abs(grid.y[j] - target) < std::abs(grid.y[best] - target))
                best = j;
        if (!rows.empty() && grid.y[best] >= rows.back())
            break;
        rows.push_back(grid.y[best]);
        if (best == 1)
            break;
    }
    return rows;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            continue;
        const double a = std::log(xs[i]), b = std::log(ys[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
        ++n;
    }
    if (n < 2)
        return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SolveReport diagnostics(const GridFunction& u, const DiscreteForm& form, double lambda, const GridFunction& f,
                        const GridFunction* psi, const EnvelopePair* pair)
{
    const WeightedGrid& G = *form.grid;
    SolveReport rep;
    rep.solution = u;
    const Vec w = lumped_mass(form);
    const Vec res = form.coercive(lambda) * u.values - form.matrix_mass * f.values;
    double comp = 0.0;
    for (int k = 0; k < G.size(); ++k) {
        if (form.dirichlet_mask[k])
            continue;
        double v = res(k) / w(k);
        if (psi)
            v = std::min(v, u.values(k) - psi->values(k));
        comp = std::max(comp, std::abs(v));
    }
    rep.complementarity_residual = comp;
    if (psi)
        rep.penalty_norm = form.norm_H((psi->values - u.values).cwiseMax(0.0));
    if (pair) {
        double viol = 0.0;
        for (int j = 0; j < G.ny; ++j)
            for (int i = 0; i < G.nx; ++i) {
                const double uv = u.at(i, j), x = G.x[i], y = G.y[j];
                viol = std::max({viol, pair->m(x, y) - uv, uv - pair->M(x, y)});
            }
        rep.envelope_violation = viol;
    }
    for (double yl : trace_rows(G))
        rep.trace_levels.emplace_back(yl, trace_neumann(u, form.params, yl));
    rep.norm_H2 = norm_H2w(u);
    Vec f1py(G.size());
    for (int k = 0; k < G.size(); ++k)
        f1py(k) = (1.0 + G.y[k / G.nx]) * f.values(k);
    rep.norm_1py_f = form.norm_H(f1py);
    rep.norm_V = form.norm_V(u.values);
    return rep;
}

Eigen::VectorXd penalty_load(const DiscreteForm& form, const GridFunction& u, const GridFunction& psi, double eps)
{
    return -(lumped_mass(form).array() * (psi.values - u.values).array().max(0.0)).matrix() / eps;
}

SolveReport solve_coercive(const DiscreteForm& form, double lambda, const GridFunction& f, const GridFunction& g)
{
    check_lambda(form, lambda);
    check_same_grid(form, f, "f");
    check_same_grid(form, g, "g");
    Problem P(form, lambda, form.matrix_mass * f.values, g.values);
    LinearSolver solver;
    solver.factorize(P.sys.K_II);
    double lin = 0.0;
    const Vec uI = solver.solve(P.b, &lin);
    SolveReport rep = diagnostics(GridFunction(form.grid, P.sys.expand(uI, g.values)), form, lambda, f);
    rep.linear_residual = lin;
    rep.iterations = 1;
    return rep;
}

SolveReport solve_penalized(const DiscreteForm& form, const PenaltyConfig& config, const GridFunction& f,
                            const GridFunction& psi, const GridFunction& g, double eps, const GridFunction* start)
{
    const double lambda = config.shift(form.consts);
    check_lambda(form, lambda);
    check_same_grid(form, f, "f");
    check_same_grid(form, psi, "psi");
    check_same_grid(form, g, "g");
    if (!(eps > 0.0))
        throw PreconditionError("eps must be positive");
    check_obstacle_boundary(form, psi, g);
    Problem P(form, lambda, form.matrix_mass * f.values, g.values);
    const Vec psiI = P.sys.restrict_to(psi.values);
    Vec u0 = start ? P.sys.restrict_to(start->values) : Vec::Zero(P.sys.size());
    int it = 0;
    double lin = 0.0;
    const Vec uI = newton_penalized(P, psiI, eps, u0, config, it, lin);
    SolveReport rep = diagnostics(GridFunction(form.grid, P.sys.expand(uI, g.values)), form, lambda, f, &psi);
    rep.iterations = it;
    rep.linear_residual = lin;
    return rep;
}

namespace {

struct ViResult
{
    Vec u;
    int iterations = 0;
    double linear_residual = 0.0;
    std::vector<EpsRecord> history;
};

ViResult vi_from_load(const DiscreteForm& form, const PenaltyConfig& config, double lambda, const Vec& load,
                      const GridFunction& psi, const GridFunction& g, const GridFunction* start)
{
    Problem P(form, lambda, load, g.values);
    const Vec psiI = P.sys.restrict_to(psi.values);
    Vec uI = start ? P.sys.restrict_to(start->values) : Vec::Zero(P.sys.size());

    std::vector<EpsRecord> history;
    int total = 0;
    double lin = 0.0;
    Vec prev;
    for (double eps : config.eps_sequence) {
        int it = 0;
        try {
            uI = newton_penalized(P, psiI, eps, uI, config, it, lin);
        } catch (const NonconvergenceError& e) {
            throw NonconvergenceError(e.what(), e.last_residual(), eps);
        }
        total += it;
        EpsRecord rec;
        rec.eps = eps;
        rec.newton_iterations = it;
        rec.solution = GridFunction(form.grid, P.sys.expand(uI, g.values));
        rec.penalty_norm = form.norm_H((psi.values - rec.solution.values).cwiseMax(0.0));
        rec.v_increment = prev.size() ? form.norm_V(rec.solution.values - prev) : 0.0;
        prev = rec.solution.values;
        history.push_back(std::move(rec));
    }
    if (config.finalize_active_set) {
        int it = 0;
        uI = active_set_lcp(P, psiI, uI, config.pdas_max_iter, it, lin);
        total += it;
    }
    return {P.sys.expand(uI, g.values), total, lin, std::move(history)};
}

} // namespace

SolveReport solve_vi_coercive(const DiscreteForm& form, const PenaltyConfig& config, const GridFunction& f,
                              const GridFunction& psi, const GridFunction& g, const GridFunction* start)
{
    config.validate(form.consts);
    const double lambda = config.shift(form.consts);
    check_same_grid(form, f, "f");
    check_same_grid(form, psi, "psi");
    check_same_grid(form, g, "g");
    check_obstacle_boundary(form, psi, g);
    ViResult r = vi_from_load(form, config, lambda, form.matrix_mass * f.values, psi, g, start);
    SolveReport rep = diagnostics(GridFunction(form.grid, r.u), form, lambda, f, &psi);
    rep.iterations = r.iterations;
    rep.linear_residual = r.linear_residual;
    rep.eps_history = std::move(r.history);
    return rep;
}

SolveReport solve_noncoercive_equation(const DiscreteForm& form, const GridFunction& f, const GridFunction& g,
                                       double lambda, double tol, int max_outer, const GridFunction* start)
{
    if (!(form.params.r > 0.0))
        throw PreconditionError("the increasing iteration needs r > 0");
    check_lambda(form, lambda);
    check_same_grid(form, f, "f");
    check_same_grid(form, g, "g");
    const SpMat K = form.coercive(lambda);
    const SpMat S = K - form.matrix_a;
    DirichletSystem sys(K, form.dirichlet_mask);
    LinearSolver solver;
    solver.factorize(sys.K_II);
    const Vec Mf = form.matrix_mass * f.values;

    Vec u = start ? start->values : Vec::Zero(form.grid->size());
    SolveReport rep;
    double lin = 0.0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int n = 1; n <= max_outer; ++n) {
        const Vec rhs = sys.rhs(Mf + S * u, g.values);
        const Vec next = sys.expand(solver.solve(rhs, &lin), g.values);
        const Vec step = next - u;
        worst = std::max(worst, max_signed(-step));
        const double inc = form.norm_H(step);
        rep.outer_increments.push_back(inc);
        u = next;
        if (inc <= tol * (1.0 + form.norm_H(u))) {
            SolveReport d = diagnostics(GridFunction(form.grid, u), form, 0.0, f);
            d.iterations = n;
            d.linear_residual = lin;
            d.monotone_violation = worst;
            d.outer_increments = std::move(rep.outer_increments);
            return d;
        }
    }
    throw NonconvergenceError("increasing iteration did not converge", rep.outer_increments.back());
}

SolveReport solve_vi_noncoercive(const DiscreteForm& form, const PenaltyConfig& config, const GridFunction& f,
                                 const GridFunction& psi, const GridFunction& g, const EnvelopePair& pair)
{
    if (!(form.params.r > 0.0))
        throw PreconditionError("the decreasing iteration needs r > 0");
    config.validate(form.consts);
    check_same_grid(form, f, "f");
    check_same_grid(form, psi, "psi");
    check_same_grid(form, g, "g");
    const WeightedGrid& G = *form.grid;
    const double lambda = config.shift(form.consts);

    // Admissibility of (m, M) for the nodal data.
    GridFunction Mvals(form.grid);
    for (int j = 0; j < G.ny; ++j)
        for (int i = 0; i < G.nx; ++i) {
            const int k = G.index(i, j);
            const double x = G.x[i], y = G.y[j];
            const double m = pair.m(x, y), M = pair.M(x, y);
            Mvals.values(k) = M;
            const double fv = f.values(k);
            const double slack = 1e-12 * (1.0 + std::abs(fv));
            auto fail = [&](const char* what) {
                throw EnvelopeError(std::string("envelopes not admissible: ") + what + " fails at ("
                                    + std::to_string(x) + ", " + std::to_string(y) + ")");
            };
            if (m > M)
                fail("m <= M");
            if (apply_A(pair.m, x, y, form.params) > fv + slack)
                fail("A m <= f");
            if (fv > apply_A(pair.M, x, y, form.params) + slack)
                fail("f <= A M");
            if (psi.values(k) > M)
                fail("psi <= M");
            if (G.is_dirichlet(i, j) && (m > g.values(k) || g.values(k) > M))
                fail("m <= g <= M on Gamma_1");
        }

    const SpMat S = form.coercive(lambda) - form.matrix_a;
    Vec u = Mvals.values;
    SolveReport rep;
    double worst = -std::numeric_limits<double>::infinity();
    GridFunction warm(form.grid, u);
    check_obstacle_boundary(form, psi, g);
    const Vec Mf = form.matrix_mass * f.values;
    for (int n = 1; n <= config.max_outer; ++n) {
        ViResult step = vi_from_load(form, config, lambda, Mf + S * u, psi, g, &warm);
        const Vec d = step.u - u;
        worst = std::max(worst, max_signed(d));
        const double inc = form.norm_H(d);
        rep.outer_increments.push_back(inc);
        u = step.u;
        warm = GridFunction(form.grid, u);
        if (inc <= config.outer_tol * (1.0 + form.norm_H(u))) {
            SolveReport out = diagnostics(warm, form, 0.0, f, &psi, &pair);
            out.iterations = n;
            out.linear_residual = step.linear_residual;
            out.monotone_violation = worst;
            out.outer_increments = std::move(rep.outer_increments);
            return out;
        }
    }
    throw NonconvergenceError("decreasing iteration did not converge", rep.outer_increments.back());
}

GridFunction lcp_psor(const DiscreteForm& form, double lambda, const GridFunction& f, const GridFunction& psi,
                      const GridFunction& g, double omega, double tol, int max_sweeps)
{
    if (!(omega > 0.0 && omega < 2.0))
        throw PreconditionError("omega must lie in (0, 2)");
    check_lambda(form, lambda);
    check_obstacle_boundary(form, psi, g);
    Problem P(form, lambda, form.matrix_mass * f.values, g.values);
    const Eigen::SparseMatrix<double, Eigen::RowMajor> K = P.sys.K_II;
    const Vec psiI = P.sys.restrict_to(psi.values);
    const int ni = P.sys.size();
    Vec diag(ni);
    for (int i = 0; i < ni; ++i) {
        diag(i) = K.coeff(i, i);
        if (!(diag(i) > 0.0))
            throw PreconditionError("projected relaxation needs a positive diagonal");
    }
    Vec u = psiI.cwiseMax(0.0);
    double res = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        res = 0.0;
        for (int i = 0; i < ni; ++i) {
            double Ku = 0.0;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(K, i); it; ++it)
                Ku += it.value() * u(it.col());
            const double r = Ku - P.b(i);
            res = std::max(res, std::abs(std::min(r / P.w(i), u(i) - psiI(i))));
            u(i) = std::max(psiI(i), u(i) - omega * r / diag(i));
        }
        if (res <= tol)
            return GridFunction(form.grid, P.sys.expand(u, g.values));
    }
    throw NonconvergenceError("projected relaxation did not converge", res);
}

ComparisonReport comparison_suite(const DiscreteForm& form, double lambda, const std::vector<ComparisonCase>& cases,
                                  const PenaltyConfig& config)
{
    ComparisonReport rep;
    rep.overall = std::numeric_limits<double>::infinity();
    PenaltyConfig cfg = config;
    cfg.lambda = lambda;
    for (const auto& c : cases) {
        GridFunction u1, u2;
        if (c.psi1 && c.psi2) {
            u1 = solve_vi_coercive(form, cfg, c.f1, *c.psi1, c.g1).solution;
            u2 = solve_vi_coercive(form, cfg, c.f2, *c.psi2, c.g2).solution;
        } else {
            u1 = solve_coercive(form, lambda, c.f1, c.g1).solution;
            u2 = solve_coercive(form, lambda, c.f2, c.g2).solution;
        }
        const double w = (u2.values - u1.values).minCoeff();
        rep.worst.push_back(w);
        rep.overall = std::min(rep.overall, w);
    }
    if (cases.empty())
        rep.overall = 0.0;
    return rep;
}

} // namespace hestonvi
