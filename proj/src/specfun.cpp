#include "wgres/specfun.hpp"
#include "wgres/errors.hpp"
#include "wgres/detail/ddouble.hpp"

#include <cmath>
#include <vector>

namespace wgres {

using namespace detail;

namespace {

void check_argument(const cplx& w) {
    if (w == cplx(0.0, 0.0)) throw BranchError("K0/K1: singular at w = 0");
    if (w.imag() == 0.0 && w.real() < 0.0)
        throw BranchError("K0/K1: argument on the negative real branch cut");
    if (w.real() <= 0.0)
        throw BranchError("K0/K1: Re w <= 0 not supported (no continuation past the cut)");
}

// ln(w/2) + gamma in double-double, split as 0.5*log(|w|^2/4) + i*arg(w).
ddcplx log_half_plus_gamma(const cplx& w) {
    dd mag2 = add(two_prod(w.real(), w.real()), two_prod(w.imag(), w.imag()));
    mag2 = mul(mag2, 0.25);
    dd re = add(mul(detail::log(mag2), 0.5), dd_euler_gamma);
    dd im = detail::atan2(w.imag(), w.real());
    return {re, im};
}

ddcplx quarter_square(const cplx& w) {
    // w^2/4 exactly from the double components
    dd re = mul(sub(two_prod(w.real(), w.real()), two_prod(w.imag(), w.imag())), 0.25);
    dd im = mul(mul(two_prod(w.real(), w.imag()), 2.0), 0.25);
    return {re, im};
}

cplx to_cplx(const ddcplx& a) { return {a.re.to_double(), a.im.to_double()}; }

// Asymptotic tail sum for K_nu: 1 + sum_k u_k with
// u_k = u_{k-1} * (4 nu^2 - (2k-1)^2) / (8 k w), truncated at the smallest
// term.  Valid once the smallest term is below the target accuracy, which
// holds for |w| >= 17 at 1e-13.
cplx asymptotic_sum(const cplx& w, double four_nu_sq) {
    cplx term(1.0, 0.0);
    cplx sum = term;
    double prev = 1.0;
    for (int k = 1; k <= 48; ++k) {
        double odd = 2.0 * k - 1.0;
        term *= (four_nu_sq - odd * odd) / (8.0 * k) / w;
        double mag = std::abs(term);
        if (mag >= prev) break; // divergent tail reached
        sum += term;
        if (mag < 1e-17) break;
        prev = mag;
    }
    return sum;
}

} // namespace

namespace {

constexpr int series_cap = 220;

struct SeriesTables {
    std::vector<dd> inv_k_sq;      // 1/(k k)
    std::vector<dd> inv_k_kp1;     // 1/(k (k+1))
    std::vector<dd> harmonic;      // H_k
    std::vector<dd> harmonic_pair; // H_k + H_{k+1}
    SeriesTables() {
        inv_k_sq.resize(series_cap + 1);
        inv_k_kp1.resize(series_cap + 1);
        harmonic.resize(series_cap + 1);
        harmonic_pair.resize(series_cap + 1);
        dd h(0.0), h2(1.0);
        harmonic[0] = h;
        harmonic_pair[0] = add(h, h2);
        for (int k = 1; k <= series_cap; ++k) {
            inv_k_sq[k] = div(dd(1.0), dd(static_cast<double>(k) * k));
            inv_k_kp1[k] = div(dd(1.0), dd(static_cast<double>(k) * (k + 1.0)));
            h = add(h, div(dd(1.0), dd(static_cast<double>(k))));
            h2 = add(h2, div(dd(1.0), dd(k + 1.0)));
            harmonic[k] = h;
            harmonic_pair[k] = add(h, h2);
        }
    }
};

const SeriesTables& tables() {
    static const SeriesTables t;
    return t;
}

// Real-axis fast paths (same series, double-double real arithmetic).
double k0_series_real(double w) {
    const SeriesTables& tb = tables();
    dd q = mul(two_prod(w, w), 0.25); // w^2/4, and log(w/2) = log(q)/2
    dd lg = add(mul(detail::log(q), 0.5), dd_euler_gamma);
    dd term(1.0);
    dd i0 = term;
    dd hsum(0.0);
    for (int k = 1; k <= series_cap; ++k) {
        term = mul(mul(term, q), tb.inv_k_sq[k]);
        i0 = add(i0, term);
        hsum = add(hsum, mul(term, tb.harmonic[k]));
        if (std::abs(term.hi) < 1e-40 * std::abs(i0.hi) && k > 4) break;
    }
    return sub(hsum, mul(lg, i0)).to_double();
}

double k1_series_real(double w) {
    const SeriesTables& tb = tables();
    dd q = mul(two_prod(w, w), 0.25);
    dd lg = add(mul(detail::log(q), 0.5), dd_euler_gamma);
    dd term(1.0);
    dd i1_sum = term;
    dd psum = term;
    for (int k = 1; k <= series_cap; ++k) {
        term = mul(mul(term, q), tb.inv_k_kp1[k]);
        i1_sum = add(i1_sum, term);
        psum = add(psum, mul(term, tb.harmonic_pair[k]));
        if (std::abs(term.hi) < 1e-40 * std::abs(i1_sum.hi) && k > 4) break;
    }
    dd res = mul(mul(lg, i1_sum), mul(dd(w), 0.5));
    res = add(res, div(dd(1.0), dd(w)));
    res = sub(res, mul(mul(psum, dd(w)), 0.25));
    return res.to_double();
}

} // namespace

namespace specfun_detail {

cplx k0_series(cplx w) {
    if (w.imag() == 0.0) return {k0_series_real(w.real()), 0.0};
    const SeriesTables& tb = tables();
    ddcplx q = quarter_square(w);          // w^2/4
    ddcplx lg = log_half_plus_gamma(w);    // ln(w/2) + gamma
    ddcplx term(1.0, 0.0);                 // (w^2/4)^k / (k!)^2
    ddcplx bessel_i0 = term;
    ddcplx hsum(0.0, 0.0);                 // sum H_k * term
    for (int k = 1; k <= series_cap; ++k) {
        term = mul(mul(term, q), tb.inv_k_sq[k]);
        bessel_i0 = add(bessel_i0, term);
        hsum = add(hsum, mul(term, tb.harmonic[k]));
        double mag = std::abs(term.re.hi) + std::abs(term.im.hi);
        double ref = std::abs(bessel_i0.re.hi) + std::abs(bessel_i0.im.hi);
        if (mag < 1e-40 * ref && k > 4) break;
    }
    ddcplx k0 = sub(hsum, mul(lg, bessel_i0));
    return to_cplx(k0);
}

cplx k1_series(cplx w) {
    if (w.imag() == 0.0) return {k1_series_real(w.real()), 0.0};
    // K1(w) = ln(w/2) I1(w) + 1/w - (w/4) sum_k [psi(k+1)+psi(k+2)] t_k with
    // t_k = (w^2/4)^k / (k! (k+1)!) and psi(1) = -gamma.  Folding the gamma
    // parts of psi into the log factor leaves
    //   K1 = (ln(w/2)+gamma) I1 + 1/w - (w/4) sum_k (H_k + H_{k+1}) t_k.
    const SeriesTables& tb = tables();
    ddcplx q = quarter_square(w);
    ddcplx lg = log_half_plus_gamma(w);
    ddcplx wdd(w.real(), w.imag());

    ddcplx term(1.0, 0.0); // t_k
    ddcplx i1_sum = term;  // sum t_k   (I1 = (w/2) * i1_sum)
    ddcplx psum = term;    // sum (H_k + H_{k+1}) t_k, k=0 term = 1
    for (int k = 1; k <= series_cap; ++k) {
        term = mul(mul(term, q), tb.inv_k_kp1[k]);
        i1_sum = add(i1_sum, term);
        psum = add(psum, mul(term, tb.harmonic_pair[k]));
        double mag = std::abs(term.re.hi) + std::abs(term.im.hi);
        double ref = std::abs(i1_sum.re.hi) + std::abs(i1_sum.im.hi);
        if (mag < 1e-40 * ref && k > 4) break;
    }
    ddcplx i1 = mul(i1_sum, mul(wdd, dd(0.5)));
    ddcplx res = mul(lg, i1);
    dd mag2 = add(two_prod(w.real(), w.real()), two_prod(w.imag(), w.imag()));
    ddcplx inv_w{div(dd(w.real()), mag2), div(dd(-w.imag()), mag2)};
    res = add(res, inv_w);
    res = sub(res, mul(psum, mul(wdd, dd(0.25))));
    return to_cplx(res);
}

cplx k0_asymptotic(cplx w) {
    cplx pref = std::sqrt(dd_pi_2.to_double() / w) * std::exp(-w);
    return pref * asymptotic_sum(w, 0.0);
}

cplx k1_asymptotic(cplx w) {
    cplx pref = std::sqrt(dd_pi_2.to_double() / w) * std::exp(-w);
    return pref * asymptotic_sum(w, 4.0);
}

} // namespace specfun_detail

cplx k0_complex(cplx w) {
    check_argument(w);
    if (std::abs(w) < specfun_detail::k_crossover) return specfun_detail::k0_series(w);
    return specfun_detail::k0_asymptotic(w);
}

cplx i0_complex(cplx w) {
    check_argument(w);
    if (std::abs(w) < 30.0) {
        cplx q = w * w / 4.0;
        cplx term(1.0, 0.0), sum(1.0, 0.0);
        for (int k = 1; k <= 90; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        return sum;
    }
    cplx pref = std::exp(w) / std::sqrt(2.0 * M_PI * w);
    cplx term(1.0, 0.0), sum(1.0, 0.0);
    for (int k = 1; k <= 30; ++k) {
        double odd = 2.0 * k - 1.0;
        term *= odd * odd / (8.0 * k) / w;
        sum += term;
        if (std::abs(term) < 1e-16) break;
    }
    return pref * sum;
}

cplx i1_complex(cplx w) {
    check_argument(w);
    if (std::abs(w) < 30.0) {
        cplx q = w * w / 4.0;
        cplx term(1.0, 0.0), sum(1.0, 0.0);
        for (int k = 1; k <= 90; ++k) {
            term *= q / (static_cast<double>(k) * (k + 1.0));
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        return 0.5 * w * sum;
    }
    cplx pref = std::exp(w) / std::sqrt(2.0 * M_PI * w);
    cplx term(1.0, 0.0), sum(1.0, 0.0);
    for (int k = 1; k <= 30; ++k) {
        double odd = 2.0 * k - 1.0;
        term *= (odd * odd - 4.0) / (8.0 * k) / w;
        sum += term;
        if (std::abs(term) < 1e-16) break;
    }
    return pref * sum;
}

cplx k1_complex(cplx w) {
    check_argument(w);
    if (std::abs(w) < specfun_detail::k_crossover) return specfun_detail::k1_series(w);
    return specfun_detail::k1_asymptotic(w);
}

cplx sqrt_upper(cplx z) {
    cplx s = std::sqrt(z);
    if (s.imag() < 0.0 || (s.imag() == 0.0 && s.real() < 0.0)) s = -s;
    return s;
}

cplx tau_mode(cplx z, double mode_energy, Sheet sheet) {
    cplx shifted = z - mode_energy;
    if (sheet == Sheet::first) return sqrt_upper(shifted);
    if (z.imag() > 0.0)
        throw BranchError("tau_mode: second sheet defined for Im z <= 0 only");
    // Continuation of the from-above boundary values through [E_n, oo):
    // the principal square root, whose imaginary part is negative in the
    // lower half-plane and which matches +sqrt(z - E_n) on the cut.
    cplx s = std::sqrt(shifted);
    if (z.imag() == 0.0 && shifted.real() < 0.0) {
        // below the branch point on the real axis both sheets coincide
        return sqrt_upper(shifted);
    }
    if (s.imag() > 0.0 && z.imag() < 0.0) s = -s;
    return s;
}

} // namespace wgres
