#ifndef WGRES_TRANSVERSE_HPP
#define WGRES_TRANSVERSE_HPP

#include "wgres/specfun.hpp"

#include <complex>
#include <vector>

namespace wgres {

/// Piecewise-constant well profile alpha(x2) on [0, d]; zero outside.
struct ProfileSegment {
    double x0 = 0.0;
    double x1 = 0.0;
    double depth = 0.0; // alpha_i; the potential is -alpha_i on the segment
};

struct TransverseProfile {
    double d = 0.0;
    std::vector<ProfileSegment> segments;

    static TransverseProfile constant(double depth, double width);
    void validate() const; // throws ConfigError
    double max_depth() const;
    double integral_depth() const;
};

/// Bound state of h_alpha = -d^2/dx2^2 - alpha(x2) chi_[0,d].
/// Outside the strip: phi(x2) = amplitude_left * e^{kappa x2} for x2 <= 0 and
/// edge_right * e^{-kappa (x2 - d)} for x2 >= d.  Sign fixed by
/// amplitude_left > 0.
struct TransverseMode {
    int index = 1;
    double energy = 0.0;
    double kappa = 0.0;
    double amplitude_left = 0.0;
    double edge_right = 0.0;
    struct SegmentData {
        double x0, x1;
        double k2;   // energy + depth on the segment
        double phi;  // value at x0
        double dphi; // derivative at x0
    };
    std::vector<SegmentData> table;
};

/// All negative eigenvalues to absolute accuracy tol, ascending, L2-normalized.
/// Empty (no throw) when the profile cannot bind.
std::vector<TransverseMode> solve_modes(const TransverseProfile& profile, double tol = 1e-12);

double eval_mode(const TransverseMode& mode, double x2);

/// Number of eigenvalues strictly below energy (Sturm oscillation count of the
/// left-decaying shooting solution).
int oscillation_count(const TransverseProfile& profile, double energy);

/// Scattering channel data at longitudinal-free energy p^2 (p > 0): the two
/// delta-normalized real standing waves with a common phase shift gamma on
/// both sides, psi ~ amp * cos(p xi + gamma) in the outward coordinate xi.
struct ScatteringChannel {
    double lambda;    // right/left amplitude ratio; channel 0: lambda > 0
    double gamma;     // common phase
    double amp_left;  // = sqrt(2/pi) / sqrt(1 + lambda^2)
    double amp_right; // = lambda * amp_left
};

ScatteringChannel scattering_channel(const TransverseProfile& profile, double p2, int channel);

/// Generalized eigenfunction psi(x2, p2) of channel 0 or 1 (free case: the
/// pi^{-1/2} cosine/sine standing waves about the strip midline).
double generalized_eigenfunction(const TransverseProfile& profile, double p2, int channel,
                                 double x2);

enum class StripSide { below, above };

/// Reflection coefficient of the transverse well for a wave incident from
/// the given exterior side, continued to complex longitudinal momentum p
/// (poles exactly at p = i kappa_n).
cplx reflection_coefficient(const TransverseProfile& profile, cplx p, StripSide side);

/// Kernel of (h_alpha - zeta)^{-1}, built from exponential solutions matched
/// at the segment boundaries.  Throws at spectral points (vanishing Wronskian).
cplx transverse_green(const TransverseProfile& profile, cplx zeta, double x2, double y2);

} // namespace wgres

#endif
