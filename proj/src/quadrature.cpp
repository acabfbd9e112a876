#include "hestonvi/quadrature.hpp"

#include "hestonvi/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace hestonvi {

QuadRule gauss_jacobi(int n, double alpha, double beta)
{
    if (n < 1 || !(alpha > -1.0) || !(beta > -1.0))
        throw PreconditionError("gauss_jacobi: need n >= 1 and alpha, beta > -1");

    const double ab = alpha + beta;
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
    diag(0) = (beta - alpha) / (ab + 2.0);
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        diag(k) = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
        const double den = s * s * (s + 1.0) * (s - 1.0);
        sub(k - 1) = std::sqrt(num / den);
    }

    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0)
                                + std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    if (n == 1) {
        rule.nodes[0] = diag(0);
        rule.weights[0] = mu0;
        return rule;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        rule.weights[k] = mu0 * v0 * v0;
    }
    return rule;
}

QuadRule gauss_legendre(int n, double lo, double hi)
{
    QuadRule rule = gauss_jacobi(n, 0.0, 0.0);
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = c + h * rule.nodes[k];
        rule.weights[k] *= h;
    }
    return rule;
}

QuadRule gauss_power(int n, double p, double h)
{
    QuadRule rule = gauss_jacobi(n, 0.0, p);
    const double scale = std::pow(0.5 * h, p + 1.0);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = 0.5 * h * (1.0 + rule.nodes[k]);
        rule.weights[k] *= scale;
    }
    return rule;
}

} // namespace hestonvi
