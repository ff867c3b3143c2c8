#include "wgres/bsop.hpp"
#include "wgres/errors.hpp"
#include "wgres/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace wgres {

namespace {

const double inv_2pi = 1.0 / (2.0 * M_PI);

const double euler_gamma_const = 0.5772156649015329;

// signed int_0^p int_0^q ln sqrt(u^2+v^2) dv du
double log_box(double p, double q) {
    double ap = std::abs(p), aq = std::abs(q);
    if (ap == 0.0 || aq == 0.0) return 0.0;
    double val = ap * aq * std::log(ap * ap + aq * aq) - 3.0 * ap * aq +
                 ap * ap * std::atan(aq / ap) + aq * aq * std::atan(ap / aq);
    double sgn = (p < 0.0 ? -1.0 : 1.0) * (q < 0.0 ? -1.0 : 1.0);
    return 0.5 * sgn * val;
}

// int_piece ln|x - y(s)| ds for a straight piece from a to b, closed form
// through the foot-of-perpendicular decomposition; valid for x on the line.
double log_line_integral(double ax, double ay, double bx, double by, double x1, double x2) {
    double ux = bx - ax, uy = by - ay;
    double len = std::hypot(ux, uy);
    ux /= len;
    uy /= len;
    double t0 = (x1 - ax) * ux + (x2 - ay) * uy;
    double h = std::abs(-(x1 - ax) * uy + (x2 - ay) * ux);
    auto primitive = [&](double t) {
        if (h < 1e-14) return t == 0.0 ? 0.0 : t * std::log(std::abs(t)) - t;
        return 0.5 * t * std::log(t * t + h * h) - t + h * std::atan(t / h);
    };
    return primitive(len - t0) - primitive(-t0);
}

// smooth remainder S(r) = K0(k r) + ln(k r / 2) + gamma, with S(0) = 0
cplx k0_smooth_part(cplx k, double r) {
    if (r < 1e-14) return {0.0, 0.0};
    return k0_complex(k * r) + std::log(k * r / 2.0) + euler_gamma_const;
}

// int over the whole support of K0(k |x - y|) dy, in closed or semi-closed
// form; this drives the singularity-subtracted Nystrom rule for area traps.
cplx support_integral(const KatoMeasure& measure, cplx k, double x1, double x2) {
    if (measure.geom == GeomKind::disk) {
        // radial solution of (-Lap + k^2) U = 2 pi chi_disk:
        // inside, U = (2 pi / k^2)(1 - k a K1(k a) I0(k r))
        double cx = measure.geom_params[0], cx2 = measure.geom_params[1];
        double a = measure.geom_params[2];
        double r = std::hypot(x1 - cx, x2 - cx2);
        cplx ka = k * a;
        if (r < a) {
            return 2.0 * M_PI / (k * k) *
                   (1.0 - ka * k1_complex(ka) * i0_complex(k * r));
        }
        return 2.0 * M_PI / (k * k) * ka * i1_complex(ka) * k0_complex(k * r);
    }
    if (measure.geom == GeomKind::rectangle) {
        double x1_lo = measure.geom_params[0], x1_hi = measure.geom_params[1];
        double x2_lo = measure.geom_params[2], x2_hi = measure.geom_params[3];
        // smooth/log split: K0(ks) = S(s) - ln(k s / 2) - gamma
        const GaussRule& rule = gauss_legendre(20);
        cplx smooth(0.0, 0.0);
        double c1 = 0.5 * (x1_lo + x1_hi), h1 = 0.5 * (x1_hi - x1_lo);
        double c2 = 0.5 * (x2_lo + x2_hi), h2 = 0.5 * (x2_hi - x2_lo);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                double y1 = c1 + h1 * rule.nodes[i];
                double y2 = c2 + h2 * rule.nodes[j];
                double s = std::hypot(x1 - y1, x2 - y2);
                cplx val = s == 0.0
                               ? cplx(0.0, 0.0)
                               : k0_complex(k * s) + std::log(k * s / 2.0) + euler_gamma_const;
                smooth += val * h1 * h2 * rule.weights[i] * rule.weights[j];
            }
        }
        double area = (x1_hi - x1_lo) * (x2_hi - x2_lo);
        double log_geo = log_box(x1_hi - x1, x2_hi - x2) - log_box(x1_lo - x1, x2_hi - x2) -
                         log_box(x1_hi - x1, x2_lo - x2) + log_box(x1_lo - x1, x2_lo - x2);
        return smooth - area * (std::log(k / 2.0) + euler_gamma_const) - log_geo;
    }
    if (measure.geom == GeomKind::polyline) {
        cplx acc(0.0, 0.0);
        for (std::size_t p = 0; p + 1 < measure.geom_points.size(); ++p) {
            double ax = measure.geom_points[p][0], ay = measure.geom_points[p][1];
            double bx = measure.geom_points[p + 1][0], by = measure.geom_points[p + 1][1];
            double len = std::hypot(bx - ax, by - ay);
            int panels = 1 + static_cast<int>(std::abs(k) * len / 3.0);
            const GaussRule& rule = gauss_legendre(16);
            cplx smooth(0.0, 0.0);
            for (int q = 0; q < panels; ++q) {
                double s0 = len * q / panels, s1 = len * (q + 1) / panels;
                double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
                for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                    double s = mid + half * rule.nodes[i];
                    double yx = ax + s / len * (bx - ax);
                    double yy = ay + s / len * (by - ay);
                    smooth += k0_smooth_part(k, std::hypot(x1 - yx, x2 - yy)) * half *
                              rule.weights[i];
                }
            }
            acc += smooth - len * (std::log(k / 2.0) + euler_gamma_const) -
                   log_line_integral(ax, ay, bx, by, x1, x2);
        }
        return acc;
    }
    if (measure.geom == GeomKind::circle) {
        // distances from a point on or near the circle: r(t) with the log
        // part closed by int_0^{2pi} ln(2 sin(t/2)) dt = 0 when x sits on
        // the circle; for general x integrate ln r numerically as well
        double cx = measure.geom_params[0], cx2 = measure.geom_params[1];
        double radius = measure.geom_params[2];
        double rho_x = std::hypot(x1 - cx, x2 - cx2);
        bool on_circle = std::abs(rho_x - radius) < 1e-12 * radius;
        double phase = std::atan2(x2 - cx2, x1 - cx);
        int npts = std::max<int>(256, 4 * static_cast<int>(measure.nodes.size()));
        cplx smooth(0.0, 0.0);
        double log_num = 0.0;
        for (int i = 0; i < npts; ++i) {
            double t = 2.0 * M_PI * (i + 0.5) / npts;
            double yx = cx + radius * std::cos(phase + t);
            double yy = cx2 + radius * std::sin(phase + t);
            double r = std::hypot(x1 - yx, x2 - yy);
            smooth += k0_smooth_part(k, r) * (2.0 * M_PI * radius / npts);
            if (!on_circle && r > 0.0) log_num += std::log(r) * 2.0 * M_PI * radius / npts;
        }
        double log_part = on_circle ? 2.0 * M_PI * radius * std::log(radius) : log_num;
        return smooth - 2.0 * M_PI * radius * (std::log(k / 2.0) + euler_gamma_const) -
               log_part;
    }
    return {0.0, 0.0}; // no closed form known for this geometry
}

cplx diagonal_kernel_area(cplx k, double w) {
    // fallback for custom geometries: equal-area disk cell,
    // (2pi)^{-1} 2pi int_0^R K0(kr) r dr / w = (1/k^2 - (R/k) K1(kR)) / w
    double radius = std::sqrt(w / M_PI);
    cplx val = 1.0 / (k * k) - (radius / k) * k1_complex(k * radius);
    return val / w;
}

cplx diagonal_kernel_curve(cplx k, double w) {
    // (1/w) * (2pi)^{-1} * 2 int_0^{w/2} K0(k u) du with the smooth/log split
    // K0(ku) = S(u) - ln(ku/2) - gamma, S(0) = 0.
    double half = 0.5 * w;
    const double euler_gamma = 0.5772156649015329;
    cplx lnk = std::log(k * half / 2.0);
    cplx smooth = gauss_integrate(
        [&](double u) -> cplx {
            if (u == 0.0) return {0.0, 0.0};
            return k0_complex(k * u) + std::log(k * u / 2.0) + euler_gamma;
        },
        0.0, half, 32);
    cplx total = smooth - half * (lnk - 1.0 + euler_gamma);
    return 2.0 * inv_2pi * total / w;
}

Eigen::MatrixXd symmetrized(const BSOperator& op) {
    Eigen::VectorXd sq = op.weights.array().sqrt();
    Eigen::MatrixXd kern = op.kernel.real();
    return sq.asDiagonal() * kern * sq.asDiagonal();
}

struct TopSpectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors_sym; // eigenvectors of the symmetrized matrix
    Eigen::MatrixXd basis;       // full iteration block, reusable as warm start
};

TopSpectrum top_spectrum_sym(const Eigen::MatrixXd& sym, int k, const Eigen::MatrixXd* warm) {
    int n = static_cast<int>(sym.rows());
    k = std::min(k, n);
    TopSpectrum out;
    if (n <= 600) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
        out.values.resize(k);
        out.vectors_sym.resize(n, k);
        for (int i = 0; i < k; ++i) {
            out.values[i] = es.eigenvalues()[n - 1 - i];
            out.vectors_sym.col(i) = es.eigenvectors().col(n - 1 - i);
        }
        return out;
    }
    // orthogonal (block power) iteration for the dominant block; a warm
    // start from a nearby energy cuts the iteration count drastically, and a
    // wide block keeps the convergence ratio away from 1
    int block = std::min(n, std::max(2 * k, k + 6));
    Eigen::MatrixXd x;
    if (warm && warm->rows() == n && warm->cols() >= block) {
        x = warm->leftCols(block);
    } else {
        x.resize(n, block);
        for (int j = 0; j < block; ++j)
            for (int i = 0; i < n; ++i) x(i, j) = std::sin(0.7 * (i + 1) * (j + 1) + 0.3 * j);
    }
    {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
        x = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    }
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(block);
    Eigen::MatrixXd y = sym * x;
    for (int iter = 0; iter < 400; ++iter) {
        Eigen::HouseholderQR<Eigen::MatrixXd> q2(y);
        x = q2.householderQ() * Eigen::MatrixXd::Identity(n, block);
        y = sym * x; // single multiply per iteration, reused for the Ritz form
        Eigen::MatrixXd small = x.transpose() * y;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
        Eigen::VectorXd ritz = es.eigenvalues().reverse();
        // a degenerate multiplet straddling the block boundary keeps the
        // tail of the basis rotating forever, so accept progressively
        // looser stagnation thresholds for the leading Ritz values
        double accept = 1e-13 * std::pow(10.0, iter / 100) * std::abs(ritz[0]);
        if (iter > 2 && (ritz.head(k) - prev.head(k)).cwiseAbs().maxCoeff() < accept) {
            out.values = ritz.head(k);
            Eigen::MatrixXd vec = x * es.eigenvectors();
            out.vectors_sym.resize(n, k);
            for (int i = 0; i < k; ++i) out.vectors_sym.col(i) = vec.col(block - 1 - i);
            out.basis = x;
            return out;
        }
        prev = ritz;
    }
    throw SolverError("bs spectrum: orthogonal iteration did not converge");
}

} // namespace

BSOperator free_bs_matrix(const KatoMeasure& measure, cplx z) {
    if (z.real() >= 0.0 && z.imag() == 0.0)
        throw BranchError("free_bs_matrix: z on the essential spectrum [0, oo)");
    const auto& nodes = measure.nodes;
    const int n = static_cast<int>(nodes.size());
    BSOperator op;
    op.z = z;
    op.measure_ref = measure.descriptor;
    op.regularization =
        measure.kind == MeasureKind::area ? DiagonalRule::area_cell : DiagonalRule::curve_log;
    op.weights.resize(n);
    for (int i = 0; i < n; ++i) op.weights[i] = nodes[i].w;
    op.kernel.resize(n, n);

    cplx k = -cplx(0.0, 1.0) * sqrt_upper(z);
    const bool hermitian = (z.imag() == 0.0);

    const bool subtractive = measure.geom != GeomKind::custom;

    if (measure.geom == GeomKind::disk && n > 64) {
        // ring-major node layout with n = order * (2 order + 1): distances
        // depend only on the ring pair and the angular offset, collapsing
        // n^2 kernel evaluations to ~n^{3/2}
        const int order_guess =
            static_cast<int>(std::round((-1.0 + std::sqrt(1.0 + 8.0 * n)) / 4.0));
        const int ntheta = 2 * order_guess + 1;
        int nrings = order_guess;
        bool ring_layout = (nrings > 0 && nrings * ntheta == n);
        std::vector<double> ring_r(ring_layout ? nrings : 0);
        if (ring_layout) {
            double cx = measure.geom_params[0], cx2 = measure.geom_params[1];
            for (int a = 0; a < nrings && ring_layout; ++a) {
                ring_r[a] = std::hypot(nodes[a * ntheta].x1 - cx, nodes[a * ntheta].x2 - cx2);
                for (int j = 1; j < ntheta; ++j) {
                    double rj = std::hypot(nodes[a * ntheta + j].x1 - cx,
                                           nodes[a * ntheta + j].x2 - cx2);
                    if (std::abs(rj - ring_r[a]) > 1e-12 * (1.0 + ring_r[a])) {
                        ring_layout = false;
                        break;
                    }
                }
            }
        }
        if (ring_layout) {
            std::vector<cplx> table(static_cast<std::size_t>(nrings) * nrings *
                                    (ntheta / 2 + 1));
            auto tab = [&](int a, int b, int dt) -> cplx& {
                return table[(static_cast<std::size_t>(a) * nrings + b) * (ntheta / 2 + 1) +
                             dt];
            };
            std::atomic<int> next_a{0};
            auto fill_table = [&]() {
                for (int a = next_a.fetch_add(1); a < nrings; a = next_a.fetch_add(1)) {
                    for (int b = a; b < nrings; ++b) {
                        for (int dt = 0; dt <= ntheta / 2; ++dt) {
                            double c = std::cos(2.0 * M_PI * dt / ntheta);
                            double r2 = ring_r[a] * ring_r[a] + ring_r[b] * ring_r[b] -
                                        2.0 * ring_r[a] * ring_r[b] * c;
                            if (a == b && dt == 0) {
                                tab(a, b, dt) = cplx(0.0, 0.0); // diagonal pass fills it
                                continue;
                            }
                            cplx v = inv_2pi * k0_complex(k * std::sqrt(std::max(r2, 0.0)));
                            tab(a, b, dt) = v;
                            tab(b, a, dt) = v;
                        }
                    }
                }
            };
            unsigned nthreads = std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
            std::vector<std::thread> pool;
            for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(fill_table);
            fill_table();
            for (auto& th : pool) th.join();
            for (int i = 0; i < n; ++i) {
                int a = i / ntheta, ti = i % ntheta;
                for (int j = 0; j < n; ++j) {
                    int b = j / ntheta, tj = j % ntheta;
                    int dt = std::abs(ti - tj);
                    dt = std::min(dt, ntheta - dt);
                    op.kernel(i, j) = tab(a, b, dt);
                }
            }
            // diagonal handled by the subtractive pass below
            for (int i = 0; i < n; ++i) {
                cplx row_sum(0.0, 0.0);
                for (int j = 0; j < n; ++j)
                    if (j != i) row_sum += op.kernel(i, j) * nodes[j].w;
                cplx exact = inv_2pi * support_integral(measure, k, nodes[i].x1, nodes[i].x2);
                op.kernel(i, i) = (exact - row_sum) / nodes[i].w;
            }
            return op;
        }
    }

    std::atomic<int> next_row{0};
    std::atomic<bool> coincident{false};
    auto worker = [&]() {
        for (int i = next_row.fetch_add(1); i < n; i = next_row.fetch_add(1)) {
            for (int j = hermitian ? i : 0; j < n; ++j) {
                if (i == j) {
                    op.kernel(i, i) = cplx(0.0, 0.0); // filled in the second pass
                    continue;
                }
                double r = std::hypot(nodes[i].x1 - nodes[j].x1, nodes[i].x2 - nodes[j].x2);
                if (r == 0.0) {
                    coincident = true;
                    return;
                }
                op.kernel(i, j) = inv_2pi * k0_complex(k * r);
                if (hermitian) op.kernel(j, i) = op.kernel(i, j);
            }
        }
    };
    unsigned nthreads = std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
    if (n < 128) nthreads = 1;
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (coincident) throw GeometryError("free_bs_matrix: coincident quadrature nodes");

    // Diagonal pass.  For the known geometries the row is closed by the
    // singularity-subtracted rule: the semi-analytic support integral of the
    // kernel minus the plain-quadrature off-diagonal row sum, so constants
    // are integrated exactly and the log singularity never meets point
    // sampling.  Custom node sets fall back to local cell rules.
    for (int i = 0; i < n; ++i) {
        if (subtractive) {
            cplx row_sum(0.0, 0.0);
            for (int j = 0; j < n; ++j)
                if (j != i) row_sum += op.kernel(i, j) * nodes[j].w;
            cplx exact = inv_2pi * support_integral(measure, k, nodes[i].x1, nodes[i].x2);
            op.kernel(i, i) = (exact - row_sum) / nodes[i].w;
        } else if (measure.kind == MeasureKind::curve) {
            op.kernel(i, i) = diagonal_kernel_curve(k, nodes[i].w);
        } else {
            op.kernel(i, i) = diagonal_kernel_area(k, nodes[i].w);
        }
    }
    return op;
}

namespace {

BSSpectrum bs_top_spectrum_warm(const KatoMeasure& measure, double energy, int k,
                                Eigen::MatrixXd* warm_cache) {
    BSOperator op = free_bs_matrix(measure, cplx(energy, 0.0));
    Eigen::MatrixXd sym = symmetrized(op);
    TopSpectrum ts = top_spectrum_sym(sym, k, warm_cache);
    if (warm_cache && ts.basis.size() > 0) *warm_cache = ts.basis;
    BSSpectrum out;
    out.values = ts.values;
    Eigen::VectorXd inv_sq = op.weights.array().sqrt().inverse();
    out.vectors = inv_sq.asDiagonal() * ts.vectors_sym;
    return out;
}

} // namespace

BSSpectrum bs_top_spectrum(const KatoMeasure& measure, double energy, int k) {
    return bs_top_spectrum_warm(measure, energy, k, nullptr);
}

namespace {

cplx weighted_form(const BSOperator& op, const Eigen::VectorXd& w) {
    Eigen::VectorXcd wc = w.cast<cplx>();
    return op.quadratic_form(wc, wc);
}

Eigen::VectorXd weights_of(const KatoMeasure& measure) {
    Eigen::VectorXd w(measure.nodes.size());
    for (std::size_t i = 0; i < measure.nodes.size(); ++i) w[i] = measure.nodes[i].w;
    return w;
}

// d/dE (w, BS(E) w)_mu by a complex step; equals (w, chi R(E)^2 chi w)_mu,
// the squared L^2 norm of the reconstructed eigenfunction.
double quad_form_derivative(const KatoMeasure& measure, double energy,
                            const Eigen::VectorXd& w) {
    double h = 1e-8 * std::max(1.0, std::abs(energy));
    BSOperator op = free_bs_matrix(measure, cplx(energy, h));
    return weighted_form(op, w).imag() / h;
}

} // namespace

std::vector<TrapState> trap_eigenvalues(const KatoMeasure& measure, double beta, double tol,
                                        const TrapSolveOptions& opts) {
    if (beta <= 0.0) throw ConfigError("trap_eigenvalues: beta must be positive (attractive trap)");
    if (tol <= 0.0) throw ConfigError("trap_eigenvalues: tol must be positive");

    double ceiling = opts.energy_ceiling != 0.0 ? opts.energy_ceiling : -1e-6 * std::max(1.0, beta);
    double floor_e = opts.energy_floor != 0.0
                         ? opts.energy_floor
                         : -(beta + 0.5 * beta * beta) - 1.0;
    const int kmax = opts.max_states;

    Eigen::MatrixXd warm;
    int k_work = kmax;
    auto top = [&](double e) { return bs_top_spectrum_warm(measure, e, k_work, &warm); };

    // push the floor down until no crossing remains below it
    BSSpectrum lo_spec = top(floor_e);
    while (beta * lo_spec.values[0] >= 1.0) {
        floor_e *= 2.0;
        lo_spec = top(floor_e);
        if (floor_e < -1e12) throw SolverError("trap_eigenvalues: runaway energy floor");
    }
    BSSpectrum hi_spec = top(ceiling);
    int count = 0;
    for (int i = 0; i < hi_spec.values.size(); ++i)
        if (beta * hi_spec.values[i] > 1.0) ++count;
    if (count == 0) return {};
    if (count >= kmax)
        throw SolverError("trap_eigenvalues: more states than max_states; raise the limit");
    k_work = count + 2; // track one spare branch above the crossings
    warm.resize(0, 0);

    // Scan grid once; the sorted eigenvalue branches are each monotone
    // increasing in E (min-max over the positive-definite kernel family),
    // so index-m branches bracket every crossing of beta*lambda = 1.
    std::vector<double> grid;
    int npts = std::max(4, opts.scan_points);
    for (int i = 0; i <= npts; ++i)
        grid.push_back(floor_e + (ceiling - floor_e) * i / static_cast<double>(npts));
    std::vector<Eigen::VectorXd> grid_values;
    grid_values.reserve(grid.size());
    grid_values.push_back(lo_spec.values);
    for (std::size_t g = 1; g < grid.size(); ++g) grid_values.push_back(top(grid[g]).values);

    std::vector<TrapState> states;
    for (int branch = 0; branch < count; ++branch) {
        double e_lo = floor_e, e_hi = ceiling;
        for (std::size_t g = 1; g < grid.size(); ++g) {
            if (beta * grid_values[g - 1][branch] - 1.0 < 0.0 &&
                beta * grid_values[g][branch] - 1.0 >= 0.0) {
                e_lo = grid[g - 1];
                e_hi = grid[g];
                break;
            }
        }
        // bisection + secant on f(E) = beta lambda_branch(E) - 1
        double a = e_lo, b = e_hi;
        double fa = beta * top(a).values[branch] - 1.0;
        double fb = beta * top(b).values[branch] - 1.0;
        double e_root = b, f_root = fb;
        for (int it = 0; it < 40 && std::abs(f_root) > 0.01 * tol; ++it) {
            double c;
            if (fa != fb) {
                c = b - fb * (b - a) / (fb - fa);
                if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
            } else {
                c = 0.5 * (a + b);
            }
            double fc = beta * top(c).values[branch] - 1.0;
            if (std::abs(fc) < std::abs(f_root)) {
                e_root = c;
                f_root = fc;
            }
            if ((fa < 0.0) == (fc < 0.0)) {
                a = c;
                fa = fc;
            } else {
                b = c;
                fb = fc;
            }
        }
        // Newton polish with the Hellmann-Feynman slope; drives the crossing
        // defect to machine precision, which the pole deflation needs (the
        // residual pole scales like residue * deltaE / |z - E_n|^2).
        BSSpectrum s = top(e_root);
        f_root = beta * s.values[branch] - 1.0;
        for (int it = 0; it < 6 && std::abs(f_root) > 1e-15; ++it) {
            Eigen::VectorXd v = s.vectors.col(branch);
            Eigen::VectorXd dv = weights_of(measure).asDiagonal() * v;
            double slope = quad_form_derivative(measure, e_root, v) / v.dot(dv);
            if (!(slope > 0.0)) break;
            e_root -= f_root / (beta * slope);
            s = top(e_root);
            f_root = beta * s.values[branch] - 1.0;
        }
        if (std::abs(f_root) > tol)
            throw SolverError("trap_eigenvalues: crossing refinement stalled");

        TrapState st;
        st.energy = e_root;
        st.crossing_defect = std::abs(f_root);
        st.w = s.vectors.col(branch);
        states.push_back(std::move(st));
    }

    std::sort(states.begin(), states.end(),
              [](const TrapState& a, const TrapState& b) { return a.energy < b.energy; });
    for (std::size_t i = 0; i + 1 < states.size(); ++i)
        if (states[i + 1].energy - states[i].energy < std::max(tol, 1e-9))
            throw MultiplicityError("trap_eigenvalues: near-degenerate crossing (simplicity "
                                    "hypothesis violated)");

    for (std::size_t i = 0; i < states.size(); ++i) {
        TrapState& st = states[i];
        st.index = static_cast<int>(i) + 1;
        double nrm2 = quad_form_derivative(measure, st.energy, st.w);
        if (!(nrm2 > 0.0)) throw SolverError("trap_eigenvalues: nonpositive norm from deflation");
        st.w /= std::sqrt(nrm2);
        BSOperator op = free_bs_matrix(measure, cplx(st.energy, 0.0));
        Eigen::VectorXd bw = beta * (op.kernel.real() * (op.weights.asDiagonal() * st.w));
        st.residual = (bw - st.w).norm() / st.w.norm();
    }
    return states;
}

cplx trap_eigenfunction(const TrapState& state, const KatoMeasure& measure, double x1,
                        double x2) {
    cplx k = std::sqrt(cplx(-state.energy, 0.0)); // k_E real positive for E < 0
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < measure.nodes.size(); ++j) {
        const auto& nd = measure.nodes[j];
        double r = std::hypot(x1 - nd.x1, x2 - nd.x2);
        cplx kv;
        if (r == 0.0) {
            kv = measure.kind == MeasureKind::curve ? diagonal_kernel_curve(k, nd.w)
                                                    : diagonal_kernel_area(k, nd.w);
        } else {
            kv = inv_2pi * k0_complex(k * r);
        }
        acc += kv * state.w[static_cast<int>(j)] * nd.w;
    }
    return acc;
}

Eigen::VectorXcd trap_eigenfunction_at_nodes(const TrapState& state, const KatoMeasure& measure) {
    BSOperator op = free_bs_matrix(measure, cplx(state.energy, 0.0));
    return op.kernel * (op.weights.asDiagonal() * state.w.cast<cplx>());
}

Eigen::MatrixXcd deflated_inverse(const KatoMeasure& measure, double beta, const TrapState& state,
                                  cplx z) {
    double dist = std::abs(z - cplx(state.energy, 0.0));
    if (dist < 1e-9)
        throw SolverError("deflated_inverse: z too close to the trap eigenvalue (cancellation)");
    BSOperator op = free_bs_matrix(measure, z);
    const int n = static_cast<int>(op.weights.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n) - beta * op.matrix();
    Eigen::MatrixXcd inv = m.partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
    // rank-one pole term beta^{-1} (E_n - z)^{-1} (w, .)_mu w
    Eigen::VectorXcd w = state.w.cast<cplx>();
    Eigen::RowVectorXcd wt = (op.weights.asDiagonal() * state.w).transpose().cast<cplx>();
    cplx pole = 1.0 / beta / (cplx(state.energy, 0.0) - z);
    return inv - pole * (w * wt);
}

} // namespace wgres
