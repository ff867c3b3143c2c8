#ifndef WGRES_QUADRATURE_HPP
#define WGRES_QUADRATURE_HPP

#include <complex>
#include <functional>
#include <vector>

namespace wgres {

struct GaussRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule of order n (nodes by Newton iteration, machine precision).
const GaussRule& gauss_legendre(int n);

/// Integrate f over [a, b] with a fixed n-point Gauss-Legendre rule.
template <typename F>
auto gauss_integrate(F&& f, double a, double b, int n) {
    const GaussRule& rule = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto acc = f(mid + half * rule.nodes[0]) * (half * rule.weights[0]);
    for (std::size_t i = 1; i < rule.nodes.size(); ++i)
        acc += f(mid + half * rule.nodes[i]) * (half * rule.weights[i]);
    return acc;
}

/// Adaptive Gauss-Kronrod 15(7) integration of a complex-valued integrand.
/// Bisects until the local error estimate meets abs_tol scaled per panel.
/// Throws AccuracyError if max_depth subdivisions do not suffice.
std::complex<double> adaptive_gk(const std::function<std::complex<double>(double)>& f,
                                 double a, double b, double abs_tol, int max_depth = 48);

double adaptive_gk_real(const std::function<double(double)>& f,
                        double a, double b, double abs_tol, int max_depth = 48);

} // namespace wgres

#endif
