#ifndef WGRES_DETAIL_DDOUBLE_HPP
#define WGRES_DETAIL_DDOUBLE_HPP

// Minimal double-double arithmetic (~31 significant digits), used internally
// by the Macdonald-function power series where the small-argument expansion
// suffers catastrophic cancellation well before the asymptotic series takes
// over.  Algorithms are the classic Dekker/Knuth error-free transformations;
// only the operations the series actually needs are provided.

#include <cmath>

namespace wgres::detail {

struct dd {
    double hi = 0.0;
    double lo = 0.0;

    constexpr dd() = default;
    constexpr dd(double h) : hi(h), lo(0.0) {}
    constexpr dd(double h, double l) : hi(h), lo(l) {}

    double to_double() const { return hi + lo; }
};

inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline dd add(const dd& a, const dd& b) {
    dd s = two_sum(a.hi, b.hi);
    dd t = two_sum(a.lo, b.lo);
    double lo = s.lo + t.hi;
    dd r = quick_two_sum(s.hi, lo);
    lo = r.lo + t.lo;
    return quick_two_sum(r.hi, lo);
}

inline dd sub(const dd& a, const dd& b) { return add(a, dd(-b.hi, -b.lo)); }
inline dd neg(const dd& a) { return {-a.hi, -a.lo}; }

inline dd mul(const dd& a, const dd& b) {
    dd p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline dd mul(const dd& a, double b) {
    dd p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

inline dd div(const dd& a, const dd& b) {
    double q1 = a.hi / b.hi;
    dd r = sub(a, mul(b, q1));
    double q2 = r.hi / b.hi;
    r = sub(r, mul(b, q2));
    double q3 = r.hi / b.hi;
    dd q = quick_two_sum(q1, q2);
    return add(q, dd(q3));
}

inline dd sqrt(const dd& a) {
    if (a.hi == 0.0) return dd(0.0);
    double x = std::sqrt(a.hi);
    // one Newton step on x -> (x + a/x)/2 evaluated as x + (a - x^2)/(2x)
    dd r = sub(a, two_prod(x, x));
    return add(dd(x), dd(r.to_double() / (2.0 * x)));
}

inline constexpr dd dd_euler_gamma{0.5772156649015329, -4.942915152430645e-18};
inline constexpr dd dd_ln2{0.6931471805599453, 2.3190468138462996e-17};
inline constexpr dd dd_pi{3.141592653589793, 1.2246467991473532e-16};
inline constexpr dd dd_pi_2{1.5707963267948966, 6.123233995736766e-17};

// reciprocals of the odd integers, shared by the log/atan series
inline const dd* inv_odd_table() {
    static const auto table = [] {
        static dd t[40];
        for (int k = 0; k < 40; ++k) t[k] = div(dd(1.0), dd(2.0 * k + 1.0));
        return t;
    }();
    return table;
}

// log of a positive double-double via atanh series after scaling into
// [1/sqrt(2), sqrt(2)): log a = 2 atanh((a-m)/(a+m)) + e*ln2 with m = 2^e.
inline dd log(const dd& a) {
    const dd* inv_odd = inv_odd_table();
    int e = 0;
    std::frexp(a.hi, &e); // a.hi = f * 2^e, f in [0.5, 1)
    double m = std::ldexp(1.0, e);
    if (a.hi / m < 0.70710678118654752) m *= 0.5, --e;
    dd u = div(sub(a, dd(m)), add(a, dd(m)));
    dd u2 = mul(u, u);
    dd term = u;
    dd sum = u;
    for (int k = 1; k < 40; ++k) {
        term = mul(term, u2);
        dd c = mul(term, inv_odd[k]);
        sum = add(sum, c);
        if (std::abs(c.hi) < 1e-36 * std::abs(sum.hi)) break;
    }
    return add(mul(sum, 2.0), mul(dd_ln2, static_cast<double>(e)));
}

// atan for |t| <= 1 via three half-angle reductions + Taylor series.
inline dd atan_small(dd t) {
    const dd* inv_odd = inv_odd_table();
    for (int i = 0; i < 3; ++i) {
        dd s = sqrt(add(dd(1.0), mul(t, t)));
        t = div(t, add(dd(1.0), s));
    }
    dd t2 = mul(t, t);
    dd term = t;
    dd sum = t;
    double sign = -1.0;
    for (int k = 1; k < 40; ++k) {
        term = mul(term, t2);
        dd c = mul(mul(term, inv_odd[k]), sign);
        sum = add(sum, c);
        sign = -sign;
        if (std::abs(c.hi) < 1e-36 * std::abs(sum.hi)) break;
    }
    return mul(sum, 8.0);
}

inline dd atan2(double y, double x) {
    if (y == 0.0) return x >= 0.0 ? dd(0.0) : dd_pi;
    if (x == 0.0) return y > 0.0 ? dd_pi_2 : neg(dd_pi_2);
    dd t = div(dd(y), dd(x));
    dd a;
    if (std::abs(y) <= std::abs(x)) {
        a = atan_small(t);
        if (x < 0.0) a = add(a, y > 0.0 ? dd_pi : neg(dd_pi));
    } else {
        a = sub(y > 0.0 ? dd_pi_2 : neg(dd_pi_2), atan_small(div(dd(1.0), t)));
    }
    return a;
}

// Complex double-double, only what the K0/K1 series needs.
struct ddcplx {
    dd re, im;

    ddcplx() = default;
    ddcplx(dd r, dd i) : re(r), im(i) {}
    explicit ddcplx(double r, double i = 0.0) : re(r), im(i) {}
};

inline ddcplx add(const ddcplx& a, const ddcplx& b) { return {add(a.re, b.re), add(a.im, b.im)}; }
inline ddcplx sub(const ddcplx& a, const ddcplx& b) { return {sub(a.re, b.re), sub(a.im, b.im)}; }
inline ddcplx mul(const ddcplx& a, const ddcplx& b) {
    return {sub(mul(a.re, b.re), mul(a.im, b.im)),
            add(mul(a.re, b.im), mul(a.im, b.re))};
}
inline ddcplx mul(const ddcplx& a, const dd& b) { return {mul(a.re, b), mul(a.im, b)}; }
inline ddcplx div(const ddcplx& a, const dd& b) { return {div(a.re, b), div(a.im, b)}; }

} // namespace wgres::detail

#endif
