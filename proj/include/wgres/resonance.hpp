#ifndef WGRES_RESONANCE_HPP
#define WGRES_RESONANCE_HPP

#include "wgres/bsop.hpp"
#include "wgres/measure.hpp"
#include "wgres/strip_resolvent.hpp"
#include "wgres/transverse.hpp"

#include <optional>
#include <vector>

namespace wgres {

/// Everything the pole machinery needs about one trap state embedded in the
/// strip continuum.  Built once per geometry; the measure can be translated
/// rigidly in rho without recomputing the trap data.
struct ResonanceSystem {
    TransverseProfile profile;
    std::vector<TransverseMode> modes;
    KatoMeasure measure;
    double beta = 0.0;
    TrapState state;
    int open_channels = 0;    // j with E_j < trap energy < E_{j+1}
    double neighborhood = 0.0; // S_n radius
    double rc_tol = 1e-11;
};

/// Assembles the system for trap state `n` (1-based) of the given trap.
/// Throws RegimeError when no channel is open and ThresholdError when the
/// trap energy sits within 1e-8 of a transverse threshold.
ResonanceSystem make_resonance_system(const TransverseProfile& profile,
                                      const KatoMeasure& measure, double beta, int n,
                                      double trap_tol = 1e-11,
                                      double neighborhood_override = 0.0,
                                      const TrapSolveOptions& trap_opts = {});

/// Same system with the trap translated rigidly; the trap spectrum and the
/// Birman-Schwinger vector are translation invariant, so no re-solve happens.
/// Used by rho sweeps.
ResonanceSystem with_translated_measure(const ResonanceSystem& sys, double dx1, double dx2);

/// eta~(z) = z - E_n + beta^{-1} (w, G(z) [I - A_n(z) G(z)]^{-1} w)_mu,
/// with the inverse by Neumann summation for small ||A_n G|| and by a direct
/// solve otherwise.  Throws RegimeError when ||A_n G|| >= 1.
cplx eta_tilde(const ResonanceSystem& sys, cplx z);

/// Both evaluation routes, for the dual-method consistency check.
cplx eta_tilde_neumann(const ResonanceSystem& sys, cplx z);
cplx eta_tilde_direct(const ResonanceSystem& sys, cplx z);

struct ResonancePole {
    int trap_index = 1;
    int channel_segment = 0; // j
    double rho = 0.0;
    cplx z;
    double gamma_leading = 0.0; // Gamma_n (negative for beta > 0)
    double gamma = 0.0;         // 2 |Im z|
    double newton_residual = 0.0;
    int iterations = 0;
};

struct PoleOptions {
    double tol = 1e-12;
    int max_iterations = 50;
    std::optional<cplx> start; // multistart support
    double regime_threshold = 0.5;
};

ResonancePole find_pole(const ResonanceSystem& sys, const PoleOptions& opts = {});

/// Fermi golden rule width, overlap form (generalized-eigenfunction integrals
/// at p1 = +-sqrt(E_n - E_k)).  Negative for an attractive trap.
double golden_rule_width(const ResonanceSystem& sys);

/// Per-open-channel contributions of the overlap form; sums to the total.
std::vector<double> golden_rule_channels(const ResonanceSystem& sys);

/// Same width through the cosine double integral over Omega x Omega.
double golden_rule_cos_form(const ResonanceSystem& sys);

/// Third route: -beta^{-1} Im (w, G(E_n) w)_mu through the strip resolvent.
double golden_rule_gi_route(const ResonanceSystem& sys);

/// Sokhotski-Plemelj check: the regularized integral over R of
/// e^{i p delta} / (p^2 - (b + i eps)) and its eps -> 0 closed form.
cplx sokhotski_integral(double b, double delta, double eps);
cplx sokhotski_closed_form(double b, double delta);

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least-squares line through (rho, ln value); values must be positive.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& samples);

} // namespace wgres

#endif
