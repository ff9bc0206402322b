#pragma once

// Discrete surface patches: a rectangular (s, theta) grid of points in R^3,
// theta-periodic, with finite-difference first/second fundamental forms and
// mean curvature. This is the generic, model-agnostic pipeline; it serves as
// the independent cross-check for the analytic evaluators elsewhere.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cmc/delaunay.hpp"
#include "cmc/numerics.hpp"

namespace cmc {

// Scalar samples on an ns x ntheta grid (theta-periodic, row-major in s).
struct ScalarField {
    int ns = 0, ntheta = 0;
    std::vector<double> v;

    ScalarField() = default;
    ScalarField(int ns_, int ntheta_) : ns(ns_), ntheta(ntheta_), v(static_cast<std::size_t>(ns_) * ntheta_, 0.0) {}
    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * ntheta + j]; }
    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * ntheta + j]; }
    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
};

struct Patch {
    int ns = 0, ntheta = 0;
    double s0 = 0.0, ds = 0.0, dtheta = 0.0;  // theta_j = j * dtheta, dtheta = 2 pi / ntheta
    std::vector<Eigen::Vector3d> pos;         // row-major in s

    Eigen::Vector3d& at(int i, int j) { return pos[static_cast<std::size_t>(i) * ntheta + j]; }
    const Eigen::Vector3d& at(int i, int j) const { return pos[static_cast<std::size_t>(i) * ntheta + j]; }
    double s_at(int i) const { return s0 + i * ds; }
    double theta_at(int j) const { return j * dtheta; }
};

// Samples any immersion f(s, theta) on a uniform grid.
inline Patch make_patch(const std::function<Eigen::Vector3d(double, double)>& f,
                        double s0, double s1, int ns, int ntheta) {
    if (ns < 5 || ntheta < 8 || !(s1 > s0))
        throw std::invalid_argument("make_patch: need ns >= 5, ntheta >= 8, s1 > s0");
    Patch p;
    p.ns = ns;
    p.ntheta = ntheta;
    p.s0 = s0;
    p.ds = (s1 - s0) / (ns - 1);
    p.dtheta = 2.0 * std::numbers::pi / ntheta;
    p.pos.resize(static_cast<std::size_t>(ns) * ntheta);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ntheta; ++j)
            p.at(i, j) = f(p.s_at(i), p.theta_at(j));
    return p;
}

inline Patch make_delaunay_patch(const DelaunaySurface& surf, double s0, double s1, int ns, int ntheta) {
    return make_patch([&](double s, double th) { return surface_point(surf, s, th); }, s0, s1, ns, ntheta);
}

namespace detail {

// Second-order finite differences in s (centered inside, one-sided at the
// two boundary rows) and centered/periodic in theta.
struct PatchDerivatives {
    std::vector<Eigen::Vector3d> Xs, Xt, Xss, Xst, Xtt;
};

inline PatchDerivatives patch_derivatives(const Patch& p) {
    PatchDerivatives d;
    const std::size_t n = p.pos.size();
    d.Xs.resize(n); d.Xt.resize(n); d.Xss.resize(n); d.Xst.resize(n); d.Xtt.resize(n);
    const double hs = p.ds, ht = p.dtheta;
    auto wrap = [&](int j) { return (j % p.ntheta + p.ntheta) % p.ntheta; };
    for (int i = 0; i < p.ns; ++i) {
        for (int j = 0; j < p.ntheta; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * p.ntheta + j;
            const int jm = wrap(j - 1), jp = wrap(j + 1);
            d.Xt[idx] = (p.at(i, jp) - p.at(i, jm)) / (2.0 * ht);
            d.Xtt[idx] = (p.at(i, jp) - 2.0 * p.at(i, j) + p.at(i, jm)) / (ht * ht);
            if (i == 0 || i == p.ns - 1) {
                // Third-order one-sided stencils so the boundary rows do not
                // dominate the interior second-order truncation error.
                const int sgn = (i == 0) ? 1 : -1;
                static constexpr double w1[4] = {-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0};
                static constexpr double w2[5] = {35.0 / 12.0, -26.0 / 3.0, 9.5, -14.0 / 3.0, 11.0 / 12.0};
                d.Xs[idx].setZero(); d.Xss[idx].setZero(); d.Xst[idx].setZero();
                for (int q = 0; q < 4; ++q) {
                    d.Xs[idx] += (sgn * w1[q] / hs) * p.at(i + sgn * q, j);
                    d.Xst[idx] += (sgn * w1[q] / (2.0 * hs * ht)) *
                                  (p.at(i + sgn * q, jp) - p.at(i + sgn * q, jm));
                }
                for (int q = 0; q < 5; ++q)
                    d.Xss[idx] += (w2[q] / (hs * hs)) * p.at(i + sgn * q, j);
            } else {
                d.Xs[idx] = (p.at(i + 1, j) - p.at(i - 1, j)) / (2.0 * hs);
                d.Xss[idx] = (p.at(i + 1, j) - 2.0 * p.at(i, j) + p.at(i - 1, j)) / (hs * hs);
                d.Xst[idx] = (p.at(i + 1, jp) - p.at(i + 1, jm) - p.at(i - 1, jp) + p.at(i - 1, jm)) / (4.0 * hs * ht);
            }
        }
    }
    return d;
}

}  // namespace detail

struct FundamentalForms {
    ScalarField E, F, G, e, f, g;
    std::vector<Eigen::Vector3d> normal;
};

inline FundamentalForms fundamental_forms(const Patch& p) {
    const auto d = detail::patch_derivatives(p);
    FundamentalForms ff;
    ff.E = ScalarField(p.ns, p.ntheta); ff.F = ScalarField(p.ns, p.ntheta); ff.G = ScalarField(p.ns, p.ntheta);
    ff.e = ScalarField(p.ns, p.ntheta); ff.f = ScalarField(p.ns, p.ntheta); ff.g = ScalarField(p.ns, p.ntheta);
    ff.normal.resize(p.pos.size());
    for (std::size_t idx = 0; idx < p.pos.size(); ++idx) {
        const Eigen::Vector3d C = d.Xs[idx].cross(d.Xt[idx]);
        const double W = C.norm();
        if (W <= 0.0) throw std::runtime_error("fundamental_forms: degenerate tangent plane");
        ff.normal[idx] = C / W;
        ff.E.v[idx] = d.Xs[idx].squaredNorm();
        ff.F.v[idx] = d.Xs[idx].dot(d.Xt[idx]);
        ff.G.v[idx] = d.Xt[idx].squaredNorm();
        ff.e.v[idx] = d.Xss[idx].dot(ff.normal[idx]);
        ff.f.v[idx] = d.Xst[idx].dot(ff.normal[idx]);
        ff.g.v[idx] = d.Xtt[idx].dot(ff.normal[idx]);
    }
    return ff;
}

// Discrete mean curvature H = (eG - 2fF + gE) / (2 (EG - F^2)), oriented by
// the X_s x X_theta normal. Throws if the metric degenerates anywhere.
inline ScalarField mean_curvature(const Patch& p) {
    const auto ff = fundamental_forms(p);
    ScalarField H(p.ns, p.ntheta);
    for (std::size_t idx = 0; idx < p.pos.size(); ++idx) {
        const double det = ff.E.v[idx] * ff.G.v[idx] - ff.F.v[idx] * ff.F.v[idx];
        if (det <= 0.0) throw std::runtime_error("mean_curvature: degenerate first fundamental form");
        H.v[idx] = (ff.e.v[idx] * ff.G.v[idx] - 2.0 * ff.f.v[idx] * ff.F.v[idx] + ff.g.v[idx] * ff.E.v[idx]) /
                   (2.0 * det);
    }
    return H;
}

// Normal graph: displaces each grid point by w along the discrete unit
// normal of the base patch.
inline Patch normal_graph(const Patch& base, const ScalarField& w) {
    if (w.ns != base.ns || w.ntheta != base.ntheta)
        throw std::invalid_argument("normal_graph: field/patch grid mismatch");
    const auto ff = fundamental_forms(base);
    Patch p = base;
    for (std::size_t idx = 0; idx < p.pos.size(); ++idx)
        p.pos[idx] += w.v[idx] * ff.normal[idx];
    return p;
}

}  // namespace cmc
