#include "wgres/transverse.hpp"
#include "wgres/errors.hpp"
#include "wgres/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace wgres {

namespace {

// cos(kL) and sin(kL)/k as entire functions of k^2 (series near k^2 L^2 = 0).
template <typename T>
void cos_sinc(T k2, double L, T& c, T& s) {
    T u = k2 * (L * L);
    if (std::abs(u) < 1e-4) {
        c = 1.0 - u / 2.0 * (1.0 - u / 12.0 * (1.0 - u / 30.0));
        s = L * (1.0 - u / 6.0 * (1.0 - u / 20.0 * (1.0 - u / 42.0)));
        return;
    }
    T k = std::sqrt(T(k2));
    c = std::cos(k * L);
    s = std::sin(k * L) / k;
}

void cos_sinc_real(double k2, double L, double& c, double& s) {
    double u = k2 * L * L;
    if (std::abs(u) < 1e-4) {
        c = 1.0 - u / 2.0 * (1.0 - u / 12.0 * (1.0 - u / 30.0));
        s = L * (1.0 - u / 6.0 * (1.0 - u / 20.0 * (1.0 - u / 42.0)));
        return;
    }
    if (k2 > 0.0) {
        double k = std::sqrt(k2);
        c = std::cos(k * L);
        s = std::sin(k * L) / k;
    } else {
        double q = std::sqrt(-k2);
        c = std::cosh(q * L);
        s = std::sinh(q * L) / q;
    }
}

// Transfer over one segment in the (phi, phi') basis: [[c, s],[k2*(-s), c]]
// acting as phi -> c phi + s phi', phi' -> -k2 s phi + c phi'.
struct State {
    double phi, dphi;
};

State propagate(const State& u, double k2, double L) {
    double c, s;
    cos_sinc_real(k2, L, c, s);
    return {c * u.phi + s * u.dphi, -k2 * s * u.phi + c * u.dphi};
}

// Zeros of the shooting solution within one segment, half-open (x0, x1].
int count_segment_zeros(const State& u0, double k2, double L, const State& u1) {
    if (k2 > 0.0) {
        double k = std::sqrt(k2);
        double chi = std::atan2(u0.phi, u0.dphi / k);
        double upper = (k * L + chi) / M_PI;
        double lower = chi / M_PI;
        return static_cast<int>(std::floor(upper)) - static_cast<int>(std::floor(lower));
    }
    return (u0.phi != 0.0 && u1.phi != 0.0 && std::signbit(u0.phi) != std::signbit(u1.phi)) ? 1 : 0;
}

struct Shot {
    State at_d;
    double growing; // coefficient D of e^{+kappa(x-d)} on the right
    int nodes;      // zeros of the solution over the whole line
};

Shot shoot(const TransverseProfile& profile, double energy) {
    double kappa = std::sqrt(-energy);
    State u{1.0, kappa};
    int nodes = 0;
    for (const auto& seg : profile.segments) {
        double k2 = energy + seg.depth;
        State next = propagate(u, k2, seg.x1 - seg.x0);
        nodes += count_segment_zeros(u, k2, seg.x1 - seg.x0, next);
        u = next;
    }
    double growing = 0.5 * (u.phi + u.dphi / kappa);
    // at most one more zero on the exponential tail x > d
    if (u.phi != 0.0 && growing != 0.0 && std::signbit(u.phi) != std::signbit(growing)) ++nodes;
    return {u, growing, nodes};
}

double segment_norm_contribution(const TransverseMode::SegmentData& sd) {
    double L = sd.x1 - sd.x0;
    double oscillations = std::sqrt(std::abs(sd.k2)) * L;
    int npts = 16 + static_cast<int>(4.0 * oscillations);
    State u{sd.phi, sd.dphi};
    auto f = [&](double t) {
        State v = propagate(u, sd.k2, t);
        return v.phi * v.phi;
    };
    return gauss_integrate(f, 0.0, L, npts);
}

} // namespace

TransverseProfile TransverseProfile::constant(double depth, double width) {
    TransverseProfile p;
    p.d = width;
    p.segments.push_back({0.0, width, depth});
    return p;
}

void TransverseProfile::validate() const {
    if (d <= 0.0) throw ConfigError("profile: width d must be positive");
    if (segments.empty()) throw ConfigError("profile: no segments");
    double x = 0.0;
    for (const auto& s : segments) {
        if (std::abs(s.x0 - x) > 1e-12 * std::max(1.0, d))
            throw ConfigError("profile: segments must partition [0, d] contiguously");
        if (s.x1 <= s.x0) throw ConfigError("profile: empty segment");
        x = s.x1;
    }
    if (std::abs(x - d) > 1e-12 * std::max(1.0, d))
        throw ConfigError("profile: segments must end at d");
}

double TransverseProfile::max_depth() const {
    double m = 0.0;
    for (const auto& s : segments) m = std::max(m, s.depth);
    return m;
}

double TransverseProfile::integral_depth() const {
    double acc = 0.0;
    for (const auto& s : segments) acc += s.depth * (s.x1 - s.x0);
    return acc;
}

int oscillation_count(const TransverseProfile& profile, double energy) {
    if (energy >= 0.0) throw ConfigError("oscillation_count: energy must be negative");
    return shoot(profile, energy).nodes;
}

std::vector<TransverseMode> solve_modes(const TransverseProfile& profile, double tol) {
    profile.validate();
    if (tol <= 0.0) throw ConfigError("solve_modes: tol must be positive");
    std::vector<TransverseMode> modes;
    double depth = profile.max_depth();
    if (depth <= 0.0) return modes; // purely repulsive or flat profile binds nothing

    const double floor_energy = -depth * (1.0 + 1e-12) - 1e-12;
    const double ceil_energy = -std::max(depth, 1.0) * 1e-11;
    int total = shoot(profile, ceil_energy).nodes;
    if (total == 0) return modes;

    // Isolate each eigenvalue by bisection on the oscillation count, then
    // polish on the growing-tail coefficient.
    std::vector<double> energies(total);
    for (int n = 1; n <= total; ++n) {
        double lo = floor_energy, hi = ceil_energy;
        while (hi - lo > std::max(tol, 1e-14 * depth)) {
            double mid = 0.5 * (lo + hi);
            (shoot(profile, mid).nodes >= n ? hi : lo) = mid;
        }
        // secant refinement on D(E) inside the isolating bracket
        double a = lo, b = hi;
        double fa = shoot(profile, a).growing, fb = shoot(profile, b).growing;
        for (int it = 0; it < 60 && std::abs(b - a) > tol * 1e-3; ++it) {
            if (fa == fb) break;
            double c = b - fb * (b - a) / (fb - fa);
            if (!(c > lo && c < hi)) break;
            double fc = shoot(profile, c).growing;
            a = b; fa = fb;
            b = c; fb = fc;
        }
        energies[n - 1] = b;
    }

    for (int n = 1; n < total; ++n)
        if (energies[n] - energies[n - 1] < 1e-9)
            throw MultiplicityError("solve_modes: near-degenerate transverse eigenvalues");

    for (int n = 1; n <= total; ++n) {
        TransverseMode m;
        m.index = n;
        m.energy = energies[n - 1];
        m.kappa = std::sqrt(-m.energy);
        State u{1.0, m.kappa};
        for (const auto& seg : profile.segments) {
            double k2 = m.energy + seg.depth;
            m.table.push_back({seg.x0, seg.x1, k2, u.phi, u.dphi});
            u = propagate(u, k2, seg.x1 - seg.x0);
        }
        // norm^2 = left tail + segments + right tail, with the right tail
        // forced onto the decaying branch
        double norm2 = 1.0 / (2.0 * m.kappa) + u.phi * u.phi / (2.0 * m.kappa);
        for (const auto& sd : m.table) norm2 += segment_norm_contribution(sd);
        double scale = 1.0 / std::sqrt(norm2);
        m.amplitude_left = scale;
        m.edge_right = u.phi * scale;
        for (auto& sd : m.table) {
            sd.phi *= scale;
            sd.dphi *= scale;
        }
        modes.push_back(std::move(m));
    }
    return modes;
}

double eval_mode(const TransverseMode& mode, double x2) {
    if (x2 <= 0.0) return mode.amplitude_left * std::exp(mode.kappa * x2);
    const double d = mode.table.back().x1;
    if (x2 >= d) return mode.edge_right * std::exp(-mode.kappa * (x2 - d));
    for (const auto& sd : mode.table) {
        if (x2 <= sd.x1 + 1e-14) {
            State u = propagate({sd.phi, sd.dphi}, sd.k2, x2 - sd.x0);
            return u.phi;
        }
    }
    return 0.0; // unreachable for valid tables
}

namespace {

// Transfer matrix over [0,d] in the (phi, phi') basis at k^2 = p^2 + alpha_i.
template <typename T>
std::array<T, 4> full_transfer(const TransverseProfile& profile, T p2) {
    std::array<T, 4> m{T(1.0), T(0.0), T(0.0), T(1.0)};
    for (const auto& seg : profile.segments) {
        T c, s;
        cos_sinc(T(p2 + seg.depth), seg.x1 - seg.x0, c, s);
        T k2 = p2 + seg.depth;
        // segment matrix [[c, s],[-k2 s, c]] times m
        std::array<T, 4> r;
        r[0] = c * m[0] + s * m[2];
        r[1] = c * m[1] + s * m[3];
        r[2] = -k2 * s * m[0] + c * m[2];
        r[3] = -k2 * s * m[1] + c * m[3];
        m = r;
    }
    return m;
}

} // namespace

ScatteringChannel scattering_channel(const TransverseProfile& profile, double p2, int channel) {
    if (p2 <= 0.0) throw ThresholdError("scattering_channel: p2 must be positive");
    if (channel != 0 && channel != 1) throw ConfigError("scattering_channel: channel is 0 or 1");
    auto m = full_transfer(profile, p2 * p2);
    // reduced basis (phi, phi'/p): N = J M~ with M~ = [[m00, p m01],[m10/p, m11]]
    double n00 = m[0], n01 = p2 * m[1];
    double n10 = -m[2] / p2, n11 = -m[3];
    double tr = n00 + n11;
    double disc = std::sqrt(tr * tr + 4.0);
    double lambda = (channel == 0) ? 0.5 * (tr + disc) : 0.5 * (tr - disc);
    // eigenvector of N for lambda; take the better-conditioned expression
    double v0, v1;
    if (std::abs(lambda - n00) > std::abs(lambda - n11)) {
        v0 = n01;
        v1 = lambda - n00;
    } else {
        v0 = lambda - n11;
        v1 = n10;
    }
    double gamma = std::atan2(v1, v0);
    double amp_left = std::sqrt(2.0 / M_PI) / std::sqrt(1.0 + lambda * lambda);
    return {lambda, gamma, amp_left, lambda * amp_left};
}

double generalized_eigenfunction(const TransverseProfile& profile, double p2, int channel,
                                 double x2) {
    ScatteringChannel ch = scattering_channel(profile, p2, channel);
    if (x2 <= 0.0) return ch.amp_left * std::cos(ch.gamma - p2 * x2);
    const double d = profile.d;
    if (x2 >= d) return ch.amp_right * std::cos(p2 * (x2 - d) + ch.gamma);
    State u{ch.amp_left * std::cos(ch.gamma), ch.amp_left * p2 * std::sin(ch.gamma)};
    for (const auto& seg : profile.segments) {
        double k2 = p2 * p2 + seg.depth;
        if (x2 <= seg.x1 + 1e-14) return propagate(u, k2, x2 - seg.x0).phi;
        u = propagate(u, k2, seg.x1 - seg.x0);
    }
    return u.phi;
}

cplx reflection_coefficient(const TransverseProfile& profile, cplx p, StripSide side) {
    auto m = full_transfer(profile, p * p);
    const cplx i(0.0, 1.0);
    cplx denom = m[2] - i * p * m[0] - i * p * m[3] - p * p * m[1];
    cplx numer = (side == StripSide::below) ? m[2] - i * p * m[0] + i * p * m[3] + p * p * m[1]
                                            : m[2] + i * p * m[0] - i * p * m[3] + p * p * m[1];
    return -numer / denom;
}

namespace {

// Stable pieces for the impedance (Riccati) evaluation of the Green
// function.  Segments are written in the exponential basis e^{+-q x} with
// q = sqrt(-k^2), Re q >= 0, and everything is expressed through
// E = e^{-2qL}, so no exponential ever grows.
struct SegmentStep {
    cplx k2;
    double length;
};

cplx exp_rate(cplx k2) {
    cplx q = std::sqrt(-k2);
    if (q.real() < 0.0 || (q.real() == 0.0 && q.imag() < 0.0)) q = -q;
    return q;
}

// tanh(qL)/q, stable for small and large |qL|
cplx tanh_over_q(cplx q, double len) {
    cplx ql = q * len;
    if (std::abs(ql) < 1e-6) return len * (1.0 - ql * ql / 3.0);
    cplx e = std::exp(-2.0 * ql);
    return (1.0 - e) / ((1.0 + e) * q);
}

// log(u(x0+L)/u(x0)) for the solution with log-derivative m at x0:
// log(cosh(qL) + m sinh(qL)/q)
cplx growth_log(cplx q, double len, cplx m) {
    cplx ql = q * len;
    if (std::abs(ql) < 1e-6)
        return std::log(1.0 + m * len + ql * ql * (0.5 + m * len / 6.0));
    cplx e = std::exp(-2.0 * ql);
    return ql + std::log(0.5 * (1.0 + e) + m * (1.0 - e) / (2.0 * q));
}

// u'' = q^2 u: m -> (q^2 tanh(qL)/q + m) / (1 + tanh(qL)/q m)
cplx riccati_step(cplx q, double len, cplx m) {
    cplx t = tanh_over_q(q, len);
    return (q * q * t + m) / (1.0 + t * m);
}

} // namespace

cplx transverse_green(const TransverseProfile& profile, cplx zeta, double x2, double y2) {
    cplx s = sqrt_upper(zeta);
    const double lo = std::min(x2, y2), hi = std::max(x2, y2);
    const double d = profile.d;
    const cplx iu(0.0, 1.0);

    // segment chain covering [min(lo,0), max(hi,d)] with the free wavenumber
    // outside the strip
    auto steps_between = [&](double a, double b) {
        std::vector<SegmentStep> steps;
        if (a < 0.0) steps.push_back({zeta, std::min(b, 0.0) - a});
        for (const auto& seg : profile.segments) {
            double s0 = std::max(a, seg.x0), s1 = std::min(b, seg.x1);
            if (s1 > s0) steps.push_back({zeta + seg.depth, s1 - s0});
        }
        if (b > d) steps.push_back({zeta, b - std::max(a, d)});
        return steps;
    };

    // left impedance m_-(x) = u_-'/u_- with u_- decaying as x -> -infinity
    auto impedance_minus = [&](double x) {
        cplx m = -iu * s; // exact below the strip
        for (const auto& st : steps_between(0.0, std::max(x, 0.0)))
            m = riccati_step(exp_rate(st.k2), st.length, m);
        return m;
    };
    // right impedance from above: flip the axis, so the chain applies in
    // descending order
    auto impedance_plus = [&](double x) {
        cplx m = iu * s;
        auto steps = steps_between(std::min(x, d), d);
        for (auto it = steps.rbegin(); it != steps.rend(); ++it)
            m = -riccati_step(exp_rate(it->k2), it->length, -m);
        return m;
    };

    cplx m_minus_hi = impedance_minus(hi);
    cplx m_plus_hi = impedance_plus(hi);
    cplx denom = m_plus_hi - m_minus_hi;
    if (std::abs(denom) < 1e-13 * std::max(std::abs(m_plus_hi) + std::abs(m_minus_hi), 1.0))
        throw SolverError("transverse_green: zeta at (or too near) an eigenvalue");

    // log of u_-(hi)/u_-(lo) accumulated stably across the chain
    cplx ratio_log(0.0, 0.0);
    cplx m = impedance_minus(lo);
    for (const auto& st : steps_between(lo, hi)) {
        cplx q = exp_rate(st.k2);
        ratio_log += growth_log(q, st.length, m);
        m = riccati_step(q, st.length, m);
    }
    return -std::exp(-ratio_log) / denom;
}

} // namespace wgres
