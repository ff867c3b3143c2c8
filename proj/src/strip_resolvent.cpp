#include "wgres/strip_resolvent.hpp"
#include "wgres/errors.hpp"
#include "wgres/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace wgres {

namespace {

const double inv_2pi = 1.0 / (2.0 * M_PI);
const cplx iu(0.0, 1.0);

void check_sheet(const SheetConfig& sheet, cplx z) {
    if (sheet.segment_index > 0 && z.imag() > 0.0)
        throw ConfigError("sheet config: second-sheet continuation requires Im z <= 0");
}

// Contour nodes for the reflection integral: two rays s e^{i(pi-theta)} and
// s e^{i theta} with theta = pi/4.  The integrand decays like
// e^{-s sin(theta) xi_sum}, the tau branch points hug the imaginary axis for
// z near the negative reals, and the bound-state poles of r(p) at p = i kappa
// sit between the rays, so the rotation is singularity-free.
struct ContourGrid {
    std::vector<cplx> p;       // contour points
    std::vector<cplx> dp;      // contour weights (direction * quadrature weight)
    double s_max = 0.0;
};

ContourGrid build_contour(double decay_rate, double scale, double tol, int order) {
    // truncate where e^{-s sin(theta) decay_rate} is below tol
    const double sin_theta = std::sin(M_PI / 4.0);
    double s_max = std::max(4.0, -std::log(std::max(tol, 1e-300) * 0.01) /
                                     (sin_theta * decay_rate));
    // graded panels, finer near the origin where tau and r(p) vary
    std::vector<double> breaks{0.0};
    double step = 0.25 * std::max(scale, 0.2);
    for (double s = step; s < s_max; s *= 1.9) breaks.push_back(s);
    breaks.push_back(s_max);

    ContourGrid grid;
    grid.s_max = s_max;
    const GaussRule& rule = gauss_legendre(order);
    const cplx dir_right = std::polar(1.0, M_PI / 4.0);
    const cplx dir_left = std::polar(1.0, 3.0 * M_PI / 4.0);
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        double mid = 0.5 * (breaks[b] + breaks[b + 1]);
        double half = 0.5 * (breaks[b + 1] - breaks[b]);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            double s = mid + half * rule.nodes[q];
            double w = half * rule.weights[q];
            // incoming ray (from infinity at angle pi - theta) traversed
            // toward 0 plus outgoing ray at angle theta
            grid.p.push_back(s * dir_left);
            grid.dp.push_back(-w * dir_left);
            grid.p.push_back(s * dir_right);
            grid.dp.push_back(w * dir_right);
        }
    }
    return grid;
}

cplx contour_integrand(const TransverseProfile& profile, cplx z, StripSide side, cplx p,
                       double delta_x1, double xi_sum) {
    cplx tau = sqrt_upper(z - p * p);
    cplx r = reflection_coefficient(profile, p, side);
    return r * std::exp(iu * p * xi_sum) * std::exp(iu * tau * delta_x1) / tau;
}

cplx rc_correction_on_grid(const TransverseProfile& profile, cplx z, double delta_x1,
                           double xi_sum, StripSide side, const ContourGrid& grid) {
    cplx acc(0.0, 0.0);
    for (std::size_t q = 0; q < grid.p.size(); ++q)
        acc += contour_integrand(profile, z, side, grid.p[q], delta_x1, xi_sum) * grid.dp[q];
    return acc * (iu / (4.0 * M_PI));
}

} // namespace

cplx rd_kernel(const std::vector<TransverseMode>& modes, cplx z, const SheetConfig& sheet,
               double x1, double x2, double y1, double y2) {
    cplx acc(0.0, 0.0);
    double dx = std::abs(x1 - y1);
    for (const auto& m : modes) {
        cplx tau = tau_mode(z, m.energy, sheet.sheet_of(m.index));
        if (std::abs(tau) < 1e-12 * std::max(1.0, std::abs(z)))
            throw ThresholdError("rd_kernel: z at a transverse threshold");
        acc += cplx(0.0, 0.5) * std::exp(iu * tau * dx) / tau * eval_mode(m, x2) *
               eval_mode(m, y2);
    }
    return acc;
}

cplx rc_correction(const TransverseProfile& profile, cplx z, double delta_x1, double xi_sum,
                   StripSide side, double tol) {
    if (xi_sum <= 0.0)
        throw GeometryError("rc_correction: points must lie outside the strip");
    double scale = std::sqrt(std::abs(z)) + 1.0;
    cplx coarse =
        rc_correction_on_grid(profile, z, delta_x1, xi_sum, side, build_contour(xi_sum, scale, tol, 16));
    cplx refined =
        rc_correction_on_grid(profile, z, delta_x1, xi_sum, side, build_contour(xi_sum, scale, tol, 24));
    if (std::abs(refined - coarse) > 10.0 * tol * std::max(1.0, std::abs(refined)))
        throw AccuracyError("rc_correction: contour quadrature did not converge");
    return refined;
}

cplx rc_kernel(const TransverseProfile& profile, cplx z, double x1, double x2, double y1,
               double y2, double tol) {
    const double d = profile.d;
    StripSide side;
    double xi_x, xi_y;
    if (x2 < 0.0 && y2 < 0.0) {
        side = StripSide::below;
        xi_x = -x2;
        xi_y = -y2;
    } else if (x2 > d && y2 > d) {
        side = StripSide::above;
        xi_x = x2 - d;
        xi_y = y2 - d;
    } else {
        throw GeometryError("rc_kernel: both points must lie on one exterior side");
    }
    double r = std::hypot(x1 - y1, x2 - y2);
    if (r == 0.0) throw GeometryError("rc_kernel: coincident points");
    cplx kz = -iu * sqrt_upper(z);
    cplx free_kernel = inv_2pi * k0_complex(kz * r);
    return free_kernel + rc_correction(profile, z, std::abs(x1 - y1), xi_x + xi_y, side, tol);
}

GOperator g_matrix(const KatoMeasure& measure, const TransverseProfile& profile,
                   const std::vector<TransverseMode>& modes, double beta, cplx z,
                   const SheetConfig& sheet, double tol) {
    check_sheet(sheet, z);
    StripSide side = measure_side(measure, profile.d);
    const int n = static_cast<int>(measure.nodes.size());

    GOperator g;
    g.z = z;
    g.sheet = sheet;
    g.weights.resize(n);
    for (int i = 0; i < n; ++i) g.weights[i] = measure.nodes[i].w;
    g.kernel = Eigen::MatrixXcd::Zero(n, n);

    // outward depth coordinates
    Eigen::VectorXd xi(n), x1(n);
    for (int i = 0; i < n; ++i) {
        const auto& nd = measure.nodes[i];
        xi[i] = side == StripSide::below ? -nd.x2 : nd.x2 - profile.d;
        x1[i] = nd.x1;
        if (xi[i] <= 0.0) throw GeometryError("g_matrix: node inside the strip");
    }

    // guided-mode part
    for (const auto& m : modes) {
        cplx tau = tau_mode(z, m.energy, sheet.sheet_of(m.index));
        if (std::abs(tau) < 1e-12 * std::max(1.0, std::abs(z)))
            throw ThresholdError("g_matrix: z at a transverse threshold");
        Eigen::VectorXcd phi(n);
        for (int i = 0; i < n; ++i) {
            double outward = side == StripSide::below ? -xi[i] : profile.d + xi[i];
            phi[i] = eval_mode(m, outward);
        }
        cplx pref = cplx(0.0, 0.5) / tau;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                g.kernel(i, j) += pref * std::exp(iu * tau * std::abs(x1[i] - x1[j])) *
                                  phi[i] * phi[j];
    }

    // reflection correction, accumulated per contour point through the
    // rank-one split e^{i tau |x1_i - x1_j|} = e^{i tau x1_i} e^{-i tau x1_j}
    // on the x1-sorted ordering
    double xi_min = 2.0 * xi.minCoeff();
    double scale = std::sqrt(std::abs(z)) + 1.0;
    ContourGrid grid = build_contour(xi_min, scale, tol, 16);

    // validate the shared grid on the hardest entry (smallest depth) before
    // spending n^2 work on it
    {
        int i_min = 0;
        for (int i = 1; i < n; ++i)
            if (xi[i] < xi[i_min]) i_min = i;
        cplx probe_coarse = rc_correction_on_grid(profile, z, 0.0, 2.0 * xi[i_min], side, grid);
        ContourGrid fine = build_contour(xi_min, scale, tol, 24);
        cplx probe_fine = rc_correction_on_grid(profile, z, 0.0, 2.0 * xi[i_min], side, fine);
        if (std::abs(probe_fine - probe_coarse) >
            50.0 * tol * std::max(1.0, std::abs(probe_fine)))
            throw AccuracyError("g_matrix: contour grid did not converge on the probe entry");
    }

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return x1[a] < x1[b]; });

    Eigen::MatrixXcd corr = Eigen::MatrixXcd::Zero(n, n);
    const std::size_t nq = grid.p.size();
    unsigned nthreads = std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
    if (n < 96) nthreads = 1;
    std::vector<Eigen::MatrixXcd> partial(nthreads, Eigen::MatrixXcd::Zero(n, n));
    auto worker = [&](unsigned tid) {
        Eigen::VectorXcd u(n), v(n);
        for (std::size_t q = tid; q < nq; q += nthreads) {
            cplx p = grid.p[q];
            cplx tau = sqrt_upper(z - p * p);
            cplx r = reflection_coefficient(profile, p, side);
            cplx pref = (iu / (4.0 * M_PI)) * r / tau * grid.dp[q];
            for (int a = 0; a < n; ++a) {
                int i = idx[a];
                // sorted ascending in x1: row factor carries e^{+i tau x1},
                // column factor e^{-i tau x1}
                u[a] = pref * std::exp(iu * (p * xi[i] + tau * x1[i]));
                v[a] = std::exp(iu * (p * xi[i] - tau * x1[i]));
            }
            // lower triangle (x1_i >= x1_j) of the sorted ordering
            for (int a = 0; a < n; ++a)
                for (int b = 0; b <= a; ++b) partial[tid](idx[a], idx[b]) += u[a] * v[b];
        }
    };
    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    for (auto& part : partial) corr += part;
    // mirror to the upper triangle (the kernel is symmetric in x <-> y)
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if ((x1[a] < x1[b]) || (x1[a] == x1[b] && a < b)) corr(a, b) = corr(b, a);

    g.kernel += corr;
    g.kernel *= beta;
    return g;
}

cplx fourier_route_kernel(const TransverseProfile& profile, cplx z, double x1, double x2,
                          double y1, double y2, double tol) {
    if (z.imag() == 0.0 && z.real() >= 0.0)
        throw BranchError("fourier_route_kernel: z on [0, oo)");
    if (z.imag() == 0.0 && oscillation_count(profile, z.real()) > 0)
        throw BranchError("fourier_route_kernel: real z must lie below the lowest "
                          "transverse threshold (first sheet only)");
    double dx = std::abs(x1 - y1);
    auto g_t = [&](double p1) { return transverse_green(profile, z - p1 * p1, x2, y2); };

    // the integrand envelope decays like e^{-p |x2-y2|}/(2p); push the cut
    // until that is negligible, then clean up the oscillatory remainder by
    // integration by parts
    double dy = std::abs(x2 - y2);
    double p_cut = 60.0;
    if (dy > 1e-9) p_cut = std::max(p_cut, std::min(45.0 / dy, 4000.0));
    cplx acc = adaptive_gk(
        [&](double p1) -> cplx { return std::cos(p1 * dx) * g_t(p1); }, 0.0, p_cut,
        0.05 * tol);
    // tail by two integrations by parts: int_P cos(p dx) g dp
    //   ~ -sin(P dx)/dx g(P) - cos(P dx)/dx^2 g'(P) + O(g''/dx^3)
    if (dx > 1e-12) {
        double h = 1e-3;
        cplx gp = (g_t(p_cut + h) - g_t(p_cut - h)) / (2.0 * h);
        acc += -std::sin(p_cut * dx) / dx * g_t(p_cut) - std::cos(p_cut * dx) / (dx * dx) * gp;
    } else if (dy > 1e-9) {
        // no oscillation, exponentially small tail already below tolerance
    } else {
        acc += adaptive_gk([&](double p1) -> cplx { return g_t(p1); }, p_cut, 8.0 * p_cut,
                           0.05 * tol);
    }
    return acc / M_PI;
}

HSNorm hs_embedding_norm_sq(const KatoMeasure& measure, double strip_width, cplx z,
                            double half_width) {
    cplx kz = -iu * sqrt_upper(z);
    double t_z = sqrt_upper(z).imag();
    double sqrt_abs_z = std::sqrt(std::abs(z));
    distance_to_strip(measure, strip_width); // validates disjointness

    HSNorm out;
    const GaussRule& rule_y2 = gauss_legendre(12);
    for (const auto& nd : measure.nodes) {
        auto inner_y1 = [&](double y1) {
            double acc = 0.0;
            for (std::size_t q = 0; q < rule_y2.nodes.size(); ++q) {
                double y2 = 0.5 * strip_width * (rule_y2.nodes[q] + 1.0);
                double r = std::hypot(nd.x1 - y1, nd.x2 - y2);
                acc += std::norm(k0_complex(kz * r)) * 0.5 * strip_width * rule_y2.weights[q];
            }
            return acc;
        };
        double val = adaptive_gk_real(inner_y1, nd.x1 - half_width, nd.x1 + half_width, 1e-12);
        out.value += nd.w * val;

        // dropped tail: |K0(w)|^2 <= C0^2 pi/(2|w|) e^{-2 Re w} for |w| >= 1
        // with C0 = 1.3, and |x - y| >= |y1 - x1| on the strip, so
        // int_{|y1-x1|>L} <= 2 d C0^2 (pi/2) e^{-2 T L} / (sqrt|z| 2 T L).
        const double c0_sq = 1.69;
        double tail = 2.0 * strip_width * c0_sq * (M_PI / 2.0) *
                      std::exp(-2.0 * t_z * half_width) /
                      (sqrt_abs_z * 2.0 * t_z * half_width);
        out.tail_bound += nd.w * tail;
    }
    out.value *= inv_2pi * inv_2pi;
    out.tail_bound *= inv_2pi * inv_2pi;
    return out;
}

} // namespace wgres
