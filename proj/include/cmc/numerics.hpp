#pragma once

// Small numerical utilities shared across the toolkit: finite-difference
// weights on arbitrary stencils, quintic Hermite interpolation, least-squares
// line fits, and a bracketed root solver.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmc {

// Finite-difference weights (Fornberg's algorithm): weights w such that
// f^(m)(x0) ~= sum_i w[i] f(x[i]) for an arbitrary stencil x.
inline std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    if (n < m) throw std::invalid_argument("fd_weights: stencil too small for order " + std::to_string(m));
    std::vector<std::vector<double>> c(x.size(), std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) w[i] = c[i][m];
    return w;
}

// Quintic Hermite interpolation on [0,h] from (f, f', f'') at both ends.
// Returns the value; eval_d additionally fills the first derivative.
struct QuinticHermite {
    double f0, d0, dd0, f1, d1, dd1, h;

    double value(double t) const {  // t in [0,1]
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        const double h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        const double h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        const double h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        const double h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        const double h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        const double h21 = 0.5 * t3 - t4 + 0.5 * t5;
        return f0 * h00 + h * d0 * h10 + h * h * dd0 * h20 + f1 * h01 + h * d1 * h11 + h * h * dd1 * h21;
    }

    double derivative(double t) const {
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
        const double g00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        const double g10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        const double g20 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
        const double g01 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
        const double g11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        const double g21 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
        return (f0 * g00 + h * d0 * g10 + h * h * dd0 * g20 + f1 * g01 + h * d1 * g11 + h * h * dd1 * g21) / h;
    }
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two matched samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

// Bracketed root solve by bisection refined with secant steps (regula falsi
// would do as well; robustness matters more than iteration count here).
inline double find_root(const std::function<double(double)>& f, double lo, double hi,
                        double tol = 1e-14, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("find_root: endpoints do not bracket a root");
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) { lo = mid; flo = fm; }
        else { hi = mid; fhi = fm; }
    }
    return 0.5 * (lo + hi);
}

}  // namespace cmc
