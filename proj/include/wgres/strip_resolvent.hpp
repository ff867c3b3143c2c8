#ifndef WGRES_STRIP_RESOLVENT_HPP
#define WGRES_STRIP_RESOLVENT_HPP

#include "wgres/bsop.hpp"
#include "wgres/measure.hpp"
#include "wgres/transverse.hpp"

#include <Eigen/Dense>

#include <vector>

namespace wgres {

/// Sheet assignment for the continuation of the strip resolvent through the
/// spectral segment (E_j, E_{j+1}): modes n <= j live on the second sheet,
/// modes n > j stay on the first.
struct SheetConfig {
    int segment_index = 0; // j = number of open modes; 0 = first sheet everywhere

    Sheet sheet_of(int mode_index) const {
        return mode_index <= segment_index ? Sheet::second : Sheet::first;
    }
};

/// Discrete (guided-mode) part of the strip resolvent kernel,
/// (i/2) sum_n e^{i tau_n |x1-y1|}/tau_n phi_n(x2) phi_n(y2),
/// with tau_n on the per-mode sheet.
cplx rd_kernel(const std::vector<TransverseMode>& modes, cplx z, const SheetConfig& sheet,
               double x1, double x2, double y1, double y2);

/// Continuum-minus-free correction kernel (rc - free), evaluated for two
/// points on the same exterior side of the strip via the reflection-coefficient
/// contour integral; continuous across x = y (the log singularities of rc and
/// the free kernel cancel in closed form).
cplx rc_correction(const TransverseProfile& profile, cplx z, double delta_x1,
                   double xi_sum, StripSide side, double tol);

/// Continuum part R^c of the strip resolvent on exterior points:
/// free 2D kernel plus the reflection correction.
cplx rc_kernel(const TransverseProfile& profile, cplx z, double x1, double x2, double y1,
               double y2, double tol);

/// G_{alpha,beta}(z) = beta [chi R_{alpha,0}(z) chi - chi R(z) chi] on the
/// measure nodes: kernel entries beta*(rd + rc_correction), operator matrix
/// kernel * diag(weights).
struct GOperator {
    cplx z;
    SheetConfig sheet;
    Eigen::MatrixXcd kernel;
    Eigen::VectorXd weights;

    Eigen::MatrixXcd matrix() const { return kernel * weights.asDiagonal(); }

    cplx quadratic_form(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
        Eigen::VectorXcd wv = weights.asDiagonal() * v;
        Eigen::VectorXcd wu = weights.asDiagonal() * u;
        return wu.conjugate().dot(kernel * wv);
    }

    // Hermitian split at real z: G = G_R + i G_I with both parts real symmetric.
    Eigen::MatrixXd real_part_kernel() const { return kernel.real(); }
    Eigen::MatrixXd imag_part_kernel() const { return kernel.imag(); }
};

GOperator g_matrix(const KatoMeasure& measure, const TransverseProfile& profile,
                   const std::vector<TransverseMode>& modes, double beta, cplx z,
                   const SheetConfig& sheet, double tol);

/// Independent cross-check route: (2pi)^{-1} int e^{i p1 (x1-y1)}
/// transverse_green(z - p1^2; x2, y2) dp1 by adaptive quadrature with an
/// integration-by-parts tail.  First sheet only.
cplx fourier_route_kernel(const TransverseProfile& profile, cplx z, double x1, double x2,
                          double y1, double y2, double tol);

/// ||chi_Omega R(z) chi_Sigma||_HS^2 with the strip truncated at |y1| <= half_width
/// and a certified bound on the dropped tail.
struct HSNorm {
    double value = 0.0;
    double tail_bound = 0.0;
};

HSNorm hs_embedding_norm_sq(const KatoMeasure& measure, double strip_width, cplx z,
                            double half_width);

} // namespace wgres

#endif
