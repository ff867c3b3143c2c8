#ifndef WGRES_SPECFUN_HPP
#define WGRES_SPECFUN_HPP

#include <complex>

namespace wgres {

using cplx = std::complex<double>;

/// Riemann-sheet selector for the per-mode longitudinal momenta tau_n(z).
enum class Sheet { first, second };

struct SheetFlag {
    int mode_index = 0;
    Sheet sheet = Sheet::first;
};

/// Macdonald function K0(w) for Re w > 0, relative error <= 1e-12 over
/// |w| in [1e-8, 500].  Power series (double-double accumulation) below
/// |w| = 17, asymptotic expansion above.
///
/// Throws BranchError on the negative real axis, DomainError-style
/// BranchError for Re w < 0, and a singularity error at w = 0.
cplx k0_complex(cplx w);

/// K1(w) under the same contract as k0_complex.
cplx k1_complex(cplx w);

/// Modified Bessel functions of the first kind (no cancellation for
/// Re w > 0; plain series below |w| = 30, asymptotic expansion above).
cplx i0_complex(cplx w);
cplx i1_complex(cplx w);

/// Square root with the first-sheet convention Im(result) >= 0;
/// real z >= 0 returns the nonnegative root (limit from above the cut).
cplx sqrt_upper(cplx z);

/// tau_n(z) = sqrt(z - E_n) on the requested sheet.  First sheet maps the
/// cut plane to Im tau > 0.  The second sheet is the continuation through
/// [E_n, oo) into the lower half-plane, where Im tau < 0; it is defined
/// for Im z <= 0 only.
cplx tau_mode(cplx z, double mode_energy, Sheet sheet);

namespace specfun_detail {
// Exposed for tests: the two evaluation branches and the crossover radius.
cplx k0_series(cplx w);
cplx k0_asymptotic(cplx w);
cplx k1_series(cplx w);
cplx k1_asymptotic(cplx w);
inline constexpr double k_crossover = 17.0;
}

} // namespace wgres

#endif
