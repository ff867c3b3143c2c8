// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.  Tolerances are pinned here, not configurable.

#include "wgres/errors.hpp"
#include "wgres/measure.hpp"
#include "wgres/quadrature.hpp"
#include "wgres/resonance.hpp"
#include "wgres/strip_resolvent.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace wgres;

namespace {

struct Criterion {
    std::string label;
    std::function<void(std::string&)> body; // throws or appends failure text
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

// ---- shared oracles -------------------------------------------------------

std::vector<double> finite_well_oracle(double alpha, double d) {
    double a = 0.5 * d;
    double kmax = std::sqrt(alpha);
    auto kappa = [&](double k) { return std::sqrt(alpha - k * k); };
    auto feven = [&](double k) { return k * std::tan(k * a) - kappa(k); };
    auto fodd = [&](double k) { return -k / std::tan(k * a) - kappa(k); };
    std::vector<double> energies;
    auto scan = [&](auto f) {
        const int steps = 40000;
        double prev_k = 1e-9, prev_f = f(prev_k);
        for (int i = 1; i <= steps; ++i) {
            double k = 1e-9 + (kmax * (1.0 - 1e-12) - 1e-9) * i / steps;
            double fk = f(k);
            if (std::isfinite(prev_f) && std::isfinite(fk) && prev_f < 0.0 && fk >= 0.0) {
                double x0 = prev_k, x1 = k;
                for (int it = 0; it < 200; ++it) {
                    double mid = 0.5 * (x0 + x1);
                    (f(mid) < 0.0 ? x0 : x1) = mid;
                }
                double k_root = 0.5 * (x0 + x1);
                energies.push_back(k_root * k_root - alpha);
            }
            prev_k = k;
            prev_f = fk;
        }
    };
    scan(feven);
    scan(fodd);
    std::sort(energies.begin(), energies.end());
    return energies;
}

double disk_ground_oracle(double beta, double a) {
    auto f = [&](double e) {
        double k = std::sqrt(beta + e), q = std::sqrt(-e);
        return k * std::cyl_bessel_j(1.0, k * a) * std::cyl_bessel_k(0.0, q * a) -
               q * std::cyl_bessel_k(1.0, q * a) * std::cyl_bessel_j(0.0, k * a);
    };
    double lo = -beta + 1e-9, hi = -1e-9;
    const int steps = 20000;
    double prev = f(lo), e_prev = lo;
    for (int i = 1; i <= steps; ++i) {
        double e = lo + (hi - lo) * i / steps;
        double fe = f(e);
        if (prev * fe <= 0.0) {
            double x0 = e_prev, x1 = e;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (x0 + x1);
                (f(x0) * f(mid) <= 0.0 ? x1 : x0) = mid;
            }
            return 0.5 * (x0 + x1);
        }
        prev = fe;
        e_prev = e;
    }
    throw SolverError("disk oracle: no root found");
}

void expect(bool ok, const std::string& what, std::string& failures) {
    if (!ok) failures += (failures.empty() ? "" : "; ") + what;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// shared resonance fixture: alpha = 5, d = 2 strip with a disk trap of
// radius 1 and beta = 4.5 sitting rho below the strip; exactly one channel
// is open at the trap energy
ResonanceSystem sweep_system(double rho, int order) {
    auto profile = TransverseProfile::constant(5.0, 2.0);
    auto trap = disk_measure(0.0, -(rho + 1.0), 1.0, order);
    return make_resonance_system(profile, trap, 4.5, 1);
}

struct SweepData {
    std::vector<double> rhos;
    std::vector<ResonancePole> poles;
    std::vector<double> gammas;
    double trap_energy = 0.0;
    double open_threshold = 0.0; // E_1
    double neighborhood = 0.0;
};

const SweepData& shared_sweep() {
    static const SweepData data = [] {
        SweepData d;
        const double rho0 = 1.25;
        const int points = 6;
        auto base = sweep_system(rho0, 12);
        d.trap_energy = base.state.energy;
        d.open_threshold = base.modes[0].energy;
        d.neighborhood = base.neighborhood;
        for (int i = 0; i < points; ++i) {
            double rho = rho0 * std::pow(2.0, static_cast<double>(i) / (points - 1));
            auto sys = with_translated_measure(base, 0.0, -(rho - rho0));
            PoleOptions opts;
            opts.tol = 1e-12;
            d.rhos.push_back(rho);
            d.poles.push_back(find_pole(sys, opts));
            d.gammas.push_back(golden_rule_width(sys));
        }
        return d;
    }();
    return data;
}

// ---- criteria -------------------------------------------------------------

void criterion_transverse_oracle(std::string& failures) {
    double t0 = now_seconds();
    for (double alpha : {1.0, 5.0, 20.0}) {
        auto modes = solve_modes(TransverseProfile::constant(alpha, 2.0), 1e-12);
        auto oracle = finite_well_oracle(alpha, 2.0);
        expect(modes.size() == oracle.size(),
               "mode count alpha=" + num(alpha) + " got " + num(modes.size()), failures);
        for (std::size_t i = 0; i < std::min(modes.size(), oracle.size()); ++i) {
            double err = std::abs(modes[i].energy - oracle[i]);
            expect(err <= 1e-10,
                   "alpha=" + num(alpha) + " mode " + num(i + 1) + " |dE|=" + num(err),
                   failures);
        }
    }
    double dt = now_seconds() - t0;
    expect(dt < 1.0, "runtime " + num(dt) + " s >= 1 s", failures);
}

void criterion_trap_oracle(std::string& failures) {
    double t0 = now_seconds();
    const double beta = 3.0;
    double oracle = disk_ground_oracle(beta, 1.0);

    auto m24 = disk_measure(0.0, -5.0, 1.0, 24);
    auto s24 = trap_eigenvalues(m24, beta, 1e-10);
    expect(s24.size() == 1, "order 24: expected a single state", failures);
    double err24 = std::abs(s24[0].energy - oracle) / std::abs(oracle);
    expect(err24 <= 1e-4, "order 24 relative error " + num(err24) + " > 1e-4", failures);

    auto m48 = disk_measure(0.0, -5.0, 1.0, 48);
    TrapSolveOptions opts;
    opts.energy_floor = s24[0].energy - 0.05;
    opts.energy_ceiling = s24[0].energy + 0.05;
    opts.scan_points = 4;
    opts.max_states = 2;
    auto s48 = trap_eigenvalues(m48, beta, 1e-9, opts);
    expect(s48.size() == 1, "order 48: expected a single state", failures);
    double err48 = std::abs(s48[0].energy - oracle) / std::abs(oracle);
    expect(err48 * 4.0 <= err24,
           "doubling gain " + num(err24 / err48) + "x < 4x", failures);
    double dt = now_seconds() - t0;
    expect(dt < 30.0, "runtime " + num(dt) + " s >= 30 s", failures);
}

void criterion_dual_route(std::string& failures) {
    auto profile = TransverseProfile::constant(5.0, 2.0);
    auto modes = solve_modes(profile);
    SheetConfig first{0};
    // 5 x 5 probe pairs across the disk-trap footprint below the strip
    std::vector<std::pair<double, double>> xs, ys;
    for (int i = 0; i < 5; ++i) {
        xs.push_back({-0.8 + 0.4 * i, -2.5 + 0.35 * (i % 3)});
        ys.push_back({-0.7 + 0.37 * i, -3.1 + 0.22 * (i % 4)});
    }
    double worst = 0.0;
    for (double zr : {-6.0, -5.0, -4.3}) {
        cplx z{zr, 0.0};
        for (const auto& x : xs) {
            for (const auto& y : ys) {
                cplx via_modes =
                    rd_kernel(modes, z, first, x.first, x.second, y.first, y.second) +
                    rc_kernel(profile, z, x.first, x.second, y.first, y.second, 1e-10);
                cplx via_fourier = fourier_route_kernel(profile, z, x.first, x.second,
                                                        y.first, y.second, 1e-8);
                worst = std::max(worst, std::abs(via_modes - via_fourier));
            }
        }
    }
    expect(worst <= 1e-6, "max |dual-route difference| = " + num(worst), failures);
}

void criterion_golden_rule(std::string& failures) {
    double t0 = now_seconds();
    auto sys = sweep_system(1.5, 16);
    expect(sys.open_channels == 1, "expected one open channel", failures);
    double overlap = golden_rule_width(sys);
    double cosine = golden_rule_cos_form(sys);
    double gi = golden_rule_gi_route(sys);
    auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
    };
    expect(rel(overlap, cosine) <= 1e-6, "overlap-cosine " + num(rel(overlap, cosine)),
           failures);
    expect(rel(overlap, gi) <= 1e-6, "overlap-GI " + num(rel(overlap, gi)), failures);
    expect(rel(cosine, gi) <= 1e-6, "cosine-GI " + num(rel(cosine, gi)), failures);
    expect(overlap < 0.0, "Gamma must be negative for beta > 0", failures);
    double dt = now_seconds() - t0;
    expect(dt < 60.0, "runtime " + num(dt) + " s >= 60 s", failures);
}

void criterion_width_asymptotics(std::string& failures) {
    const auto& d = shared_sweep();
    std::vector<std::pair<double, double>> samples;
    for (std::size_t i = 0; i < d.rhos.size(); ++i)
        samples.push_back({d.rhos[i], std::abs(d.gammas[i])});
    DecayFit fit = fit_decay(samples);
    double target = -2.0 * std::sqrt(std::abs(d.open_threshold));
    expect(std::abs(fit.slope - target) <= 0.1 * std::abs(target),
           "Gamma slope " + num(fit.slope) + " vs target " + num(target), failures);
}

void criterion_pole_asymptotics(std::string& failures) {
    const auto& d = shared_sweep();
    std::vector<std::pair<double, double>> samples;
    for (std::size_t i = 0; i < d.rhos.size(); ++i) {
        expect(d.poles[i].z.imag() <= 0.0,
               "Im z > 0 at rho = " + num(d.rhos[i]), failures);
        samples.push_back({d.rhos[i], std::abs(d.poles[i].z.real() - d.trap_energy)});
    }
    DecayFit fit = fit_decay(samples);
    double target = std::sqrt(2.0 * std::abs(d.trap_energy));
    expect(-fit.slope >= 0.9 * target,
           "shift decay rate " + num(-fit.slope) + " < 0.9 * " + num(target), failures);
}

void criterion_pole_quality(std::string& failures) {
    const auto& d = shared_sweep();
    for (std::size_t i = 0; i < d.poles.size(); ++i)
        expect(d.poles[i].newton_residual <= 1e-10,
               "residual " + num(d.poles[i].newton_residual) + " at rho " + num(d.rhos[i]),
               failures);

    auto sys = sweep_system(1.5, 12);
    PoleOptions base;
    base.tol = 1e-12;
    ResonancePole ref = find_pole(sys, base);
    for (int k = 0; k < 5; ++k) {
        double angle = 2.0 * M_PI * k / 5.0;
        PoleOptions opts;
        opts.tol = 1e-12;
        opts.start = cplx(sys.state.energy, 0.0) +
                     0.35 * sys.neighborhood *
                         cplx(std::cos(angle), -std::abs(std::sin(angle)));
        ResonancePole p = find_pole(sys, opts);
        expect(std::abs(p.z - ref.z) <= 1e-8,
               "multistart " + num(k) + " drift " + num(std::abs(p.z - ref.z)), failures);
    }
}

void criterion_sokhotski(std::string& failures) {
    const double b = 1.0, delta = 1.0;
    cplx closed = sokhotski_closed_form(b, delta);
    std::vector<double> errs;
    for (double eps : {1e-2, 1e-3, 1e-4})
        errs.push_back(std::abs(sokhotski_integral(b, delta, eps) - closed));
    expect(errs[1] <= 0.3 * errs[0], "eps step 1 ratio " + num(errs[1] / errs[0]), failures);
    expect(errs[2] <= 0.3 * errs[1], "eps step 2 ratio " + num(errs[2] / errs[1]), failures);

    cplx closed_channel = sokhotski_closed_form(-2.25, 0.7);
    cplx numeric = sokhotski_integral(-2.25, 0.7, 1e-10);
    expect(std::abs(numeric - closed_channel) <= 1e-8,
           "closed channel error " + num(std::abs(numeric - closed_channel)), failures);
}

void criterion_hs_norm(std::string& failures) {
    cplx z{-1.0, 0.0};
    double t_z = sqrt_upper(z).imag();
    std::vector<std::pair<double, double>> samples;
    for (double rho : {1.0, 1.5, 2.0, 2.5, 3.0}) {
        auto trap = disk_measure(0.0, -(rho + 1.0), 1.0, 8);
        HSNorm hs = hs_embedding_norm_sq(trap, 2.0, z, 30.0);
        expect(hs.tail_bound <= 1e-8 * hs.value,
               "uncertified tail at rho " + num(rho), failures);
        samples.push_back({rho, hs.value});
    }
    DecayFit fit = fit_decay(samples);
    double bound = -std::sqrt(2.0) * t_z * 0.95;
    expect(fit.slope <= bound,
           "HS^2 slope " + num(fit.slope) + " above " + num(bound), failures);
}

void criterion_leading_term_dominance(std::string& failures) {
    const auto& d = shared_sweep();
    double prev = 1e300;
    for (std::size_t i = 0; i < d.rhos.size(); ++i) {
        double ratio =
            std::abs(d.poles[i].z.imag() - d.gammas[i]) / std::abs(d.gammas[i]);
        expect(ratio < prev,
               "ratio not decreasing at rho " + num(d.rhos[i]) + " (" + num(ratio) + ")",
               failures);
        prev = ratio;
    }
}

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"1. transverse oracle (alpha in {1,5,20}, |dE| <= 1e-10, < 1 s)",
         criterion_transverse_oracle},
        {"2. trap oracle (disk beta=3, rel 1e-4 at order 24, 4x under doubling, < 30 s)",
         criterion_trap_oracle},
        {"3. dual-route resolvent (<= 1e-6 on 5x5 probes at 3 energies)",
         criterion_dual_route},
        {"4. triple-route golden rule (pairwise <= 1e-6, < 1 min)", criterion_golden_rule},
        {"5. width asymptotics (slope within 10% of -2 sqrt|E_1|)",
         criterion_width_asymptotics},
        {"6. pole asymptotics (rate >= 0.9 sqrt(2|E_n|), Im z <= 0)",
         criterion_pole_asymptotics},
        {"7. pole quality and uniqueness (residual <= 1e-10, multistart 1e-8)",
         criterion_pole_quality},
        {"8. Sokhotski-Plemelj (linear eps convergence, closed channel 1e-8)",
         criterion_sokhotski},
        {"9. HS-norm bound (certified tail, slope <= -0.95 sqrt(2) T_z)",
         criterion_hs_norm},
        {"10. leading-term dominance (|Im z - Gamma|/|Gamma| decreasing)",
         criterion_leading_term_dominance},
    };

    int failed = 0;
    for (auto& c : criteria) {
        std::string failures;
        double t0 = now_seconds();
        try {
            c.body(failures);
        } catch (const std::exception& e) {
            failures += std::string(failures.empty() ? "" : "; ") + "exception: " + e.what();
        }
        double dt = now_seconds() - t0;
        if (failures.empty()) {
            std::printf("[PASS] %s  (%.1f s)\n", c.label.c_str(), dt);
        } else {
            std::printf("[FAIL] %s  (%.1f s): %s\n", c.label.c_str(), dt, failures.c_str());
            ++failed;
        }
        std::fflush(stdout);
    }
    if (failed) std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    else std::printf("all %zu criteria passed\n", criteria.size());
    return failed == 0 ? 0 : 1;
}
