#ifndef WGRES_BSOP_HPP
#define WGRES_BSOP_HPP

#include "wgres/measure.hpp"
#include "wgres/specfun.hpp"

#include <Eigen/Dense>

#include <string>

namespace wgres {

enum class DiagonalRule { area_cell, curve_log };

/// Nystrom discretization of the free Birman-Schwinger operator
/// chi_Omega R(z) chi_Omega over the measure nodes.  kernel(i,j) holds the
/// regularized kernel value (2pi)^{-1} K0(k_z |x_i - x_j|); the operator
/// matrix is kernel * diag(weights).  The mu-weighted inner product is
/// (u, v) = sum_i conj(u_i) v_i w_i.
struct BSOperator {
    cplx z;
    Eigen::MatrixXcd kernel;
    Eigen::VectorXd weights;
    std::string measure_ref; // descriptor of the underlying measure
    DiagonalRule regularization = DiagonalRule::area_cell;

    Eigen::MatrixXcd matrix() const { return kernel * weights.asDiagonal(); }

    cplx quadratic_form(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
        Eigen::VectorXcd wv = weights.asDiagonal() * v;
        Eigen::VectorXcd wu = weights.asDiagonal() * u;
        return wu.conjugate().dot(kernel * wv); // conjugates u
    }
};

BSOperator free_bs_matrix(const KatoMeasure& measure, cplx z);

/// Trap bound state found through the Birman-Schwinger crossing beta*lambda = 1.
/// w is normalized by (w, chi R(E)^2 chi w)_mu = 1, which makes the
/// reconstructed eigenfunction omega_n unit-norm in L^2(R^2).
struct TrapState {
    int index = 1;
    double energy = 0.0;
    Eigen::VectorXd w;
    double residual = 0.0;          // ||beta BS(E) w - w|| / ||w||
    double crossing_defect = 0.0;   // |beta lambda(E) - 1| at the accepted E
};

struct TrapSolveOptions {
    double energy_floor = 0.0; // 0 = auto
    double energy_ceiling = 0.0;
    int scan_points = 6;
    int max_states = 8;
};

std::vector<TrapState> trap_eigenvalues(const KatoMeasure& measure, double beta, double tol,
                                        const TrapSolveOptions& opts = {});

/// omega_n(x) = (2pi)^{-1} sum_j K0(k_E |x - x_j|) w_j weight_j.
cplx trap_eigenfunction(const TrapState& state, const KatoMeasure& measure, double x1, double x2);

/// Values of omega_n at all measure nodes (diagonal entries regularized).
Eigen::VectorXcd trap_eigenfunction_at_nodes(const TrapState& state, const KatoMeasure& measure);

/// A_n(z) = (I - beta BS(z))^{-1} - beta^{-1} (E_n - z)^{-1} P_n with
/// P_n = (w_n, .)_mu w_n; analytic through z = E_n by Lemma-style deflation.
Eigen::MatrixXcd deflated_inverse(const KatoMeasure& measure, double beta,
                                  const TrapState& state, cplx z);

/// Top-k eigenpairs of the symmetrized Nystrom matrix at real energy,
/// ascending-in-lambda not guaranteed; returned descending.
struct BSSpectrum {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // eigenvectors of kernel*diag(w) (not symmetrized)
};

BSSpectrum bs_top_spectrum(const KatoMeasure& measure, double energy, int k);

} // namespace wgres

#endif
