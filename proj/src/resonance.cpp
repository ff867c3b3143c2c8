#include "wgres/resonance.hpp"
#include "wgres/errors.hpp"
#include "wgres/quadrature.hpp"

#include <cmath>

namespace wgres {

namespace {

const cplx iu(0.0, 1.0);

struct EtaParts {
    Eigen::MatrixXcd g;      // operator matrix of G(z)
    Eigen::MatrixXcd a;      // A_n(z)
    Eigen::VectorXcd w;      // trap vector
    Eigen::VectorXd weights; // mu weights
    double ag_norm = 0.0;    // operator-norm estimate of A_n G
};

// 2-norm estimate of the composition a*g by power iteration with matvecs
// (never forms the product matrix).
double composite_norm_estimate(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& g) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(g.cols());
    v /= v.norm();
    double s2 = 0.0;
    for (int it = 0; it < 10; ++it) {
        Eigen::VectorXcd mv = a * (g * v);
        Eigen::VectorXcd av = g.adjoint() * (a.adjoint() * mv);
        s2 = av.norm();
        if (s2 == 0.0) return 0.0;
        v = av / s2;
    }
    return std::sqrt(s2);
}

EtaParts eta_parts(const ResonanceSystem& sys, cplx z) {
    SheetConfig sheet{sys.open_channels};
    GOperator g = g_matrix(sys.measure, sys.profile, sys.modes, sys.beta, z, sheet, sys.rc_tol);
    EtaParts parts;
    parts.g = g.matrix();
    parts.a = deflated_inverse(sys.measure, sys.beta, sys.state, z);
    parts.w = sys.state.w.cast<cplx>();
    parts.weights = g.weights;
    parts.ag_norm = composite_norm_estimate(parts.a, parts.g);
    return parts;
}

cplx eta_from_parts(const ResonanceSystem& sys, cplx z, const EtaParts& parts, bool neumann) {
    const auto& w = parts.w;
    Eigen::VectorXcd rhs;
    if (neumann) {
        // [I - A G]^{-1} w by Neumann summation
        rhs = w;
        Eigen::VectorXcd term = w;
        for (int k = 1; k <= 200; ++k) {
            term = parts.a * (parts.g * term);
            rhs += term;
            if (term.norm() < 1e-14 * rhs.norm()) break;
            if (k == 200) throw AccuracyError("eta_tilde: Neumann series did not converge");
        }
    } else {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(w.size(), w.size()) - parts.a * parts.g;
        rhs = m.partialPivLu().solve(w);
    }
    Eigen::VectorXcd gw = parts.g * rhs;
    cplx form = (parts.weights.asDiagonal() * w).dot(gw); // conjugates the left factor
    return z - sys.state.energy + form / sys.beta;
}

double threshold_of(const std::vector<TransverseMode>& modes, int k) {
    return modes[static_cast<std::size_t>(k) - 1].energy;
}

} // namespace

ResonanceSystem make_resonance_system(const TransverseProfile& profile,
                                      const KatoMeasure& measure, double beta, int n,
                                      double trap_tol, double neighborhood_override,
                                      const TrapSolveOptions& trap_opts) {
    profile.validate();
    ResonanceSystem sys;
    sys.profile = profile;
    sys.modes = solve_modes(profile);
    if (sys.modes.empty()) throw ConfigError("resonance system: strip binds no transverse mode");
    sys.measure = measure;
    sys.beta = beta;

    auto states = trap_eigenvalues(measure, beta, trap_tol, trap_opts);
    if (n < 1 || n > static_cast<int>(states.size()))
        throw ConfigError("resonance system: no trap state with the requested index");
    sys.state = states[static_cast<std::size_t>(n) - 1];

    double e = sys.state.energy;
    int open = 0;
    for (const auto& m : sys.modes) {
        if (std::abs(e - m.energy) < 1e-8)
            throw ThresholdError("resonance system: trap energy at a transverse threshold");
        if (m.energy < e) ++open;
    }
    sys.open_channels = open; // zero is allowed: the golden-rule sum is then empty

    // S_n radius: quarter of the smallest spectral gap around E_n
    double gap = std::abs(e); // distance to the essential threshold at 0
    for (const auto& m : sys.modes) gap = std::min(gap, std::abs(e - m.energy));
    for (const auto& st : states)
        if (st.index != sys.state.index) gap = std::min(gap, std::abs(e - st.energy));
    sys.neighborhood = neighborhood_override > 0.0 ? neighborhood_override : 0.25 * gap;
    return sys;
}

ResonanceSystem with_translated_measure(const ResonanceSystem& sys, double dx1, double dx2) {
    ResonanceSystem out = sys;
    out.measure = translated(sys.measure, dx1, dx2);
    distance_to_strip(out.measure, out.profile.d); // still disjoint
    return out;
}

cplx eta_tilde(const ResonanceSystem& sys, cplx z) {
    EtaParts parts = eta_parts(sys, z);
    if (parts.ag_norm >= 1.0)
        throw RegimeError("eta_tilde: ||A_n G|| >= 1, trap too close to the strip");
    return eta_from_parts(sys, z, parts, parts.ag_norm <= 0.1);
}

cplx eta_tilde_neumann(const ResonanceSystem& sys, cplx z) {
    EtaParts parts = eta_parts(sys, z);
    if (parts.ag_norm >= 1.0) throw RegimeError("eta_tilde: ||A_n G|| >= 1");
    return eta_from_parts(sys, z, parts, true);
}

cplx eta_tilde_direct(const ResonanceSystem& sys, cplx z) {
    EtaParts parts = eta_parts(sys, z);
    if (parts.ag_norm >= 1.0) throw RegimeError("eta_tilde: ||A_n G|| >= 1");
    return eta_from_parts(sys, z, parts, false);
}

ResonancePole find_pole(const ResonanceSystem& sys, const PoleOptions& opts) {
    const double e_n = sys.state.energy;
    if (sys.open_channels == 0)
        throw RegimeError("find_pole: no open channel (trap energy below the lowest "
                          "transverse threshold)");

    SheetConfig sheet{sys.open_channels};
    GOperator g0 = g_matrix(sys.measure, sys.profile, sys.modes, sys.beta, cplx(e_n, 0.0),
                            sheet, sys.rc_tol);
    Eigen::VectorXcd w = sys.state.w.cast<cplx>();
    cplx leading = g0.quadratic_form(w, w) / sys.beta;

    // regime gate, probed just off the trap energy where the deflated
    // inverse is well conditioned
    {
        double off = std::max(std::abs(leading), 1e-6 * std::max(1.0, std::abs(e_n)));
        EtaParts probe = eta_parts(sys, cplx(e_n, -off));
        if (!(probe.ag_norm < opts.regime_threshold))
            throw RegimeError("find_pole: ||A_n G|| above the regime threshold; rho too small");
    }

    cplx z = opts.start.value_or(cplx(e_n, 0.0) - leading);
    if (z.imag() > 0.0) z = cplx(z.real(), -z.imag());

    cplx eta = eta_tilde(sys, z);
    cplx deriv(1.0, 0.0);
    bool have_secant = false;
    cplx z_prev, eta_prev;
    int iterations = 0;
    for (; iterations < opts.max_iterations && std::abs(eta) > opts.tol; ++iterations) {
        if (!have_secant) {
            double h = 1e-7 * std::max(1.0, std::abs(e_n));
            cplx ep = eta_tilde(sys, z + h);
            cplx em = eta_tilde(sys, z - h);
            deriv = (ep - em) / (2.0 * h);
        } else {
            deriv = (eta - eta_prev) / (z - z_prev);
        }
        if (!(std::abs(deriv) > 1e-8))
            throw SolverError("find_pole: vanishing derivative of the spectral function");
        cplx step = eta / deriv;
        cplx z_new = z - step;
        cplx eta_new;
        int halvings = 0;
        for (;; ++halvings) {
            eta_new = eta_tilde(sys, z_new);
            if (std::abs(eta_new) <= std::abs(eta) || halvings >= 6) break;
            step *= 0.5;
            z_new = z - step;
        }
        z_prev = z;
        eta_prev = eta;
        z = z_new;
        eta = eta_new;
        have_secant = true;
        if (std::abs(z - e_n) > sys.neighborhood)
            throw RegimeError("find_pole: iterate escaped the neighborhood S_n");
    }
    if (std::abs(eta) > opts.tol)
        throw SolverError("find_pole: Newton did not reach the residual tolerance");
    if (z.imag() > 1e-12 * std::max(1.0, std::abs(e_n)))
        throw SolverError("find_pole: converged pole in the upper half-plane");

    ResonancePole pole;
    pole.trap_index = sys.state.index;
    pole.channel_segment = sys.open_channels;
    pole.rho = distance_to_strip(sys.measure, sys.profile.d);
    pole.z = z;
    pole.gamma_leading = golden_rule_width(sys);
    pole.gamma = 2.0 * std::abs(z.imag());
    pole.newton_residual = std::abs(eta);
    pole.iterations = iterations;
    return pole;
}

std::vector<double> golden_rule_channels(const ResonanceSystem& sys) {
    const double e_n = sys.state.energy;
    std::vector<double> channels;
    if (sys.open_channels == 0) return channels;
    Eigen::VectorXcd omega = trap_eigenfunction_at_nodes(sys.state, sys.measure);
    for (int k = 1; k <= sys.open_channels; ++k) {
        double b = e_n - threshold_of(sys.modes, k);
        if (b <= 0.0) throw ThresholdError("golden_rule_width: closed channel in open sum");
        double p1 = std::sqrt(b);
        const auto& mode = sys.modes[static_cast<std::size_t>(k) - 1];
        cplx ip(0.0, 0.0), im(0.0, 0.0);
        for (std::size_t i = 0; i < sys.measure.nodes.size(); ++i) {
            const auto& nd = sys.measure.nodes[i];
            cplx base = std::conj(omega[static_cast<int>(i)]) * eval_mode(mode, nd.x2) *
                        nd.w / std::sqrt(2.0 * M_PI);
            ip += base * std::exp(iu * p1 * nd.x1);
            im += base * std::exp(-iu * p1 * nd.x1);
        }
        channels.push_back(-sys.beta * sys.beta * M_PI / (2.0 * p1) *
                           (std::norm(ip) + std::norm(im)));
    }
    return channels;
}

double golden_rule_width(const ResonanceSystem& sys) {
    double total = 0.0;
    for (double c : golden_rule_channels(sys)) total += c;
    return total;
}

double golden_rule_cos_form(const ResonanceSystem& sys) {
    const double e_n = sys.state.energy;
    Eigen::VectorXcd omega = trap_eigenfunction_at_nodes(sys.state, sys.measure);
    const auto& nodes = sys.measure.nodes;
    double total = 0.0;
    for (int k = 1; k <= sys.open_channels; ++k) {
        double b = e_n - threshold_of(sys.modes, k);
        double p1 = std::sqrt(b);
        const auto& mode = sys.modes[static_cast<std::size_t>(k) - 1];
        std::vector<double> phi(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) phi[i] = eval_mode(mode, nodes[i].x2);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                acc += std::cos(p1 * std::abs(nodes[i].x1 - nodes[j].x1)) * phi[i] * phi[j] *
                       (omega[static_cast<int>(i)].real() * omega[static_cast<int>(j)].real() +
                        omega[static_cast<int>(i)].imag() * omega[static_cast<int>(j)].imag()) *
                       nodes[i].w * nodes[j].w;
            }
        }
        total += acc / (2.0 * p1);
    }
    return -sys.beta * sys.beta * total;
}

double golden_rule_gi_route(const ResonanceSystem& sys) {
    SheetConfig sheet{sys.open_channels};
    GOperator g = g_matrix(sys.measure, sys.profile, sys.modes, sys.beta,
                           cplx(sys.state.energy, 0.0), sheet, sys.rc_tol);
    Eigen::VectorXcd w = sys.state.w.cast<cplx>();
    return -g.quadratic_form(w, w).imag() / sys.beta;
}

cplx sokhotski_integral(double b, double delta, double eps) {
    if (eps <= 0.0) throw ConfigError("sokhotski_integral: eps must be positive");
    cplx c(b, eps);
    double dx = std::abs(delta);
    double p_peak = b > 0.0 ? std::sqrt(b) : 0.0;
    double p_cut = std::max({4.0 * p_peak + 20.0, 600.0});

    // even fold: int_R e^{ip dx}/(p^2-c) dp = 2 int_0^oo cos(p dx)/(p^2-c) dp
    cplx acc = 2.0 * adaptive_gk(
                         [&](double p) -> cplx { return std::cos(p * dx) / (p * p - c); },
                         0.0, p_cut, 1e-11, 60);
    if (dx > 1e-12) {
        // two integration-by-parts terms for the oscillatory tail
        auto g = [&](double p) -> cplx { return 1.0 / (p * p - c); };
        cplx gp = (g(p_cut + 1e-3) - g(p_cut - 1e-3)) / 2e-3;
        acc += 2.0 * (-std::sin(p_cut * dx) / dx * g(p_cut) -
                      std::cos(p_cut * dx) / (dx * dx) * gp);
    } else {
        // closed tail: 2 int_P^oo dp/(p^2-c) = -(1/sqrt(c)) log((P-sqrt c)/(P+sqrt c))
        cplx sc = std::sqrt(c);
        if (sc.imag() < 0.0) sc = -sc;
        acc += -(1.0 / sc) * std::log((p_cut - sc) / (p_cut + sc));
    }
    return acc;
}

cplx sokhotski_closed_form(double b, double delta) {
    double dx = std::abs(delta);
    if (b > 0.0) {
        double rb = std::sqrt(b);
        return iu * M_PI / rb * std::exp(iu * rb * dx);
    }
    double q = std::sqrt(-b);
    return cplx(M_PI * std::exp(-q * dx) / q, 0.0);
}

DecayFit fit_decay(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 4) throw ConfigError("fit_decay: need at least 4 samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(samples.size());
    for (const auto& [rho, value] : samples) {
        if (!(value > 0.0)) throw ConfigError("fit_decay: values must be positive");
        double y = std::log(value);
        sx += rho;
        sy += y;
        sxx += rho * rho;
        sxy += rho * y;
    }
    DecayFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    double mean = sy / n;
    for (const auto& [rho, value] : samples) {
        double y = std::log(value);
        double pred = fit.slope * rho + fit.intercept;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - mean) * (y - mean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

} // namespace wgres
