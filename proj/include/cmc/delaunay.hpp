#pragma once

// Delaunay surfaces of revolution with constant mean curvature H = 1 in the
// isothermal cylindrical parameterization
//
//   X_tau(s, theta) = (1/2) * (tau e^{sigma} cos theta,
//                              tau e^{sigma} sin theta,
//                              kappa),
//
// where the profile function sigma solves the first-order equation
//
//   (sigma')^2 + tau^2 cosh^2 sigma = 1   (unduloids, 0 < tau < 1)
//   (sigma')^2 + tau^2 sinh^2 sigma = 1   (nodoids, tau < 0)
//
// and the axial component satisfies kappa' = tau^2 e^{sigma} cosh sigma
// (resp. sinh sigma). tau = 1 is the unit-diameter cylinder: sigma = 0,
// kappa(s) = s. Both ODE branches share the second-order form
// sigma'' = -(tau^2/2) sinh(2 sigma), which is what we integrate (it avoids
// the square-root sign ambiguity at the turning points).

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "cmc/numerics.hpp"

namespace cmc {

struct DelaunayParameter {
    double tau;

    explicit DelaunayParameter(double t) : tau(t) {
        if (!std::isfinite(t) || t == 0.0 || t > 1.0)
            throw std::invalid_argument("DelaunayParameter: tau must lie in (-inf, 0) U (0, 1], got " +
                                        std::to_string(t));
    }
    bool unduloid() const { return tau > 0.0 && tau < 1.0; }
    bool cylinder() const { return tau == 1.0; }
    bool nodoid() const { return tau < 0.0; }
};

// Maximal |sigma| along the profile: the turning point of the conserved
// energy. arccosh(1/tau) for unduloids, arcsinh(1/|tau|) for nodoids,
// zero for the cylinder.
inline double turning_point(double tau) {
    DelaunayParameter p(tau);
    if (p.cylinder()) return 0.0;
    return p.nodoid() ? std::asinh(1.0 / std::abs(tau)) : std::acosh(1.0 / tau);
}

namespace detail {

// Quadrature forms of the periods with the endpoint singularity substituted
// away (sigma = -+ sigma_* maps to x = -+ pi/2).
template <class F>
double gk_integrate(const F& f, double a, double b, double tol) {
    double error = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol, &error);
    return v;
}

}  // namespace detail

// Half-period s_tau of sigma in the isothermal coordinate: sigma has period
// 2 s_tau, cosh sigma has period s_tau. Rejects the cylinder (tau = 1), whose
// profile is constant and carries no period.
inline double half_period(double tau, double tol = 1e-14) {
    DelaunayParameter p(tau);
    if (p.cylinder()) throw std::invalid_argument("half_period: undefined for the cylinder tau = 1");
    if (p.unduloid()) {
        const double a = tau * tau, b = 1.0 - tau * tau;
        return detail::gk_integrate([&](double x) {
            const double sx = std::sin(x);
            return 1.0 / std::sqrt(a + b * sx * sx);
        }, -std::numbers::pi / 2, std::numbers::pi / 2, tol);
    }
    const double a = tau * tau;
    return detail::gk_integrate([&](double x) {
        const double sx = std::sin(x);
        return 1.0 / std::sqrt(a + sx * sx);
    }, -std::numbers::pi / 2, std::numbers::pi / 2, tol);
}

// Physical (axial) period T_tau: the surface is invariant under translation
// by 2 T_tau along its axis, and kappa(s + 2 s_tau) = kappa(s) + 4 T_tau.
// The substituted integrand is regular at tau = 1, where it is identically 1
// and T = pi/2 (the cylinder limit).
inline double physical_period(double tau, double tol = 1e-14) {
    DelaunayParameter p(tau);
    if (p.unduloid() || p.cylinder()) {
        const double b = 1.0 - tau * tau;
        return 0.5 * detail::gk_integrate([&](double x) {
            const double cx = std::cos(x);
            return std::sqrt(1.0 - b * cx * cx);
        }, -std::numbers::pi / 2, std::numbers::pi / 2, tol);
    }
    const double a = tau * tau;
    return 0.5 * detail::gk_integrate([&](double x) {
        const double sx = std::sin(x);
        return sx * sx / std::sqrt(a + sx * sx);
    }, -std::numbers::pi / 2, std::numbers::pi / 2, tol);
}

// Central difference of T_tau in tau. The stencil must stay inside a single
// branch of the family (no crossing tau = 0, no leaving tau <= 1); at tau = 1
// a one-sided backward difference is used.
inline double period_derivative(double tau, double h = 1e-6, double tol = 1e-14) {
    DelaunayParameter p(tau);
    if (h <= 0.0) throw std::invalid_argument("period_derivative: h must be positive");
    if (p.cylinder())
        return (3.0 * physical_period(1.0 - 1e-9, tol) - 4.0 * physical_period(1.0 - h - 1e-9, tol) +
                physical_period(1.0 - 2.0 * h - 1e-9, tol)) / (2.0 * h);
    const double lo = tau - h, hi = tau + h;
    if ((lo > 0.0) != (tau > 0.0) || (hi > 0.0) != (tau > 0.0) || hi > 1.0)
        throw std::invalid_argument("period_derivative: stencil [tau-h, tau+h] leaves the branch of tau");
    return (physical_period(hi, tol) - physical_period(lo, tol)) / (2.0 * h);
}

// Full jet of the profile at a point: sigma and its first three derivatives,
// the axial component kappa and its derivative, the normal coefficient
// c = tau cosh sigma (unduloid/cylinder) or tau sinh sigma (nodoid) with its
// derivatives, and the conformal radius rho = tau e^{sigma} / 2. With these,
//   X_s = (rho sigma' cos, rho sigma' sin, rho c),   |X_s|^2 = rho^2,
//   N   = (-c cos theta, -c sin theta, sigma'),      |N| = 1,
// and the mean curvature with respect to N is identically +1.
struct ProfileJet {
    double sigma, dsigma, ddsigma, dddsigma;
    double kappa, dkappa;
    double c, dc, ddc;
    double rho;
};

class DelaunayProfile {
public:
    // Integrates the profile ODE from the turning point sigma(0) = -sigma_*,
    // sigma'(0) = 0, kappa(0) = 0 over n_periods full periods with a uniform
    // dense-output grid of nodes_per_period nodes per period 2 s_tau.
    static DelaunayProfile solve(double tau, int n_periods = 4, int nodes_per_period = 512,
                                 double tol = 1e-12) {
        DelaunayParameter p(tau);
        if (n_periods < 1 || nodes_per_period < 16)
            throw std::invalid_argument("DelaunayProfile::solve: degenerate grid request");
        DelaunayProfile prof;
        prof.tau_ = tau;
        prof.tol_ = tol;
        prof.nodes_per_period_ = nodes_per_period;
        prof.n_periods_ = n_periods;
        if (p.cylinder()) {
            prof.s_half_ = std::numbers::pi;  // limiting value as tau -> 1
            prof.T_ = std::numbers::pi / 2;
            return prof;
        }
        prof.s_half_ = half_period(tau, tol);
        const double period = 2.0 * prof.s_half_;
        const double ds = period / nodes_per_period;
        const int n_nodes = n_periods * nodes_per_period + 1;

        using state = std::array<double, 3>;  // sigma, sigma', kappa
        auto rhs = [tau](const state& y, state& dy, double) {
            dy[0] = y[1];
            dy[1] = -0.5 * tau * tau * std::sinh(2.0 * y[0]);
            dy[2] = tau * tau * std::exp(y[0]) * (tau > 0 ? std::cosh(y[0]) : std::sinh(y[0]));
        };
        state y{-turning_point(tau), 0.0, 0.0};
        prof.ds_ = ds;
        prof.sig_.reserve(n_nodes);
        prof.dsig_.reserve(n_nodes);
        prof.kap_.reserve(n_nodes);
        namespace ode = boost::numeric::odeint;
        auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_fehlberg78<state>());
        ode::integrate_const(stepper, rhs, y, 0.0, (n_nodes - 1 + 0.5) * ds, ds,
                             [&](const state& yy, double) {
                                 if (static_cast<int>(prof.sig_.size()) < n_nodes) {
                                     prof.sig_.push_back(yy[0]);
                                     prof.dsig_.push_back(yy[1]);
                                     prof.kap_.push_back(yy[2]);
                                 }
                             });
        if (static_cast<int>(prof.sig_.size()) != n_nodes)
            throw std::runtime_error("DelaunayProfile::solve: dense output truncated");
        // T from the integrated route; the quadrature route is available via
        // physical_period() and the two are cross-checked in check_periods().
        prof.T_ = 0.25 * prof.kap_[nodes_per_period];
        return prof;
    }

    double tau() const { return tau_; }
    bool cylinder() const { return tau_ == 1.0; }
    double sigma_star() const { return cylinder() ? 0.0 : turning_point(tau_); }
    double s_half() const { return s_half_; }   // s_tau
    double T() const { return T_; }             // T_tau
    double window() const { return cylinder() ? n_periods_ * 2.0 * s_half_ : ds_ * (sig_.size() - 1); }
    int nodes_per_period() const { return nodes_per_period_; }
    double grid_step() const { return ds_; }

    // Profile jet at arbitrary s (periodic extension; kappa gains 4 T_tau per
    // period). Quintic Hermite interpolation between dense-output nodes keeps
    // the reconstruction error near the integrator tolerance.
    ProfileJet jet(double s) const {
        ProfileJet j{};
        if (cylinder()) {
            j.sigma = 0.0; j.dsigma = 0.0; j.ddsigma = 0.0; j.dddsigma = 0.0;
            j.kappa = s; j.dkappa = 1.0;
            j.c = 1.0; j.dc = 0.0; j.ddc = 0.0;
            j.rho = 0.5;
            return j;
        }
        const double period = 2.0 * s_half_;
        double q = std::floor(s / period);
        double r = s - q * period;
        if (r >= period) { r -= period; q += 1.0; }  // guard roundoff at the seam
        const double pos = r / ds_;
        int i = static_cast<int>(pos);
        i = std::clamp(i, 0, static_cast<int>(sig_.size()) - 2);
        const double t = (r - i * ds_) / ds_;

        const auto second = [this](double sg) { return -0.5 * tau_ * tau_ * std::sinh(2.0 * sg); };
        const auto third = [this](double sg, double dsg) { return -tau_ * tau_ * std::cosh(2.0 * sg) * dsg; };
        const auto kap1 = [this](double sg) {
            return tau_ * tau_ * std::exp(sg) * (tau_ > 0 ? std::cosh(sg) : std::sinh(sg));
        };
        const auto kap2 = [this](double sg, double dsg) { return tau_ * tau_ * dsg * std::exp(2.0 * sg); };

        const double s0 = sig_[i], s1 = sig_[i + 1];
        const double d0 = dsig_[i], d1 = dsig_[i + 1];
        QuinticHermite hs{s0, d0, second(s0), s1, d1, second(s1), ds_};
        QuinticHermite hd{d0, second(s0), third(s0, d0), d1, second(s1), third(s1, d1), ds_};
        QuinticHermite hk{kap_[i], kap1(s0), kap2(s0, d0), kap_[i + 1], kap1(s1), kap2(s1, d1), ds_};

        j.sigma = hs.value(t);
        j.dsigma = hd.value(t);
        j.ddsigma = second(j.sigma);
        j.dddsigma = third(j.sigma, j.dsigma);
        j.kappa = hk.value(t) + q * 4.0 * T_;
        j.dkappa = kap1(j.sigma);
        if (tau_ > 0) {
            j.c = tau_ * std::cosh(j.sigma);
            j.dc = tau_ * j.dsigma * std::sinh(j.sigma);
            j.ddc = tau_ * (j.ddsigma * std::sinh(j.sigma) + j.dsigma * j.dsigma * std::cosh(j.sigma));
        } else {
            j.c = tau_ * std::sinh(j.sigma);
            j.dc = tau_ * j.dsigma * std::cosh(j.sigma);
            j.ddc = tau_ * (j.ddsigma * std::cosh(j.sigma) + j.dsigma * j.dsigma * std::sinh(j.sigma));
        }
        j.rho = 0.5 * tau_ * std::exp(j.sigma);
        return j;
    }

    double sigma(double s) const { return jet(s).sigma; }
    double dsigma(double s) const { return jet(s).dsigma; }
    double kappa(double s) const { return jet(s).kappa; }

    // Max over grid nodes of the conserved-energy defect
    // |(sigma')^2 + tau^2 cosh^2 sigma - 1| (sinh^2 on the nodoid branch).
    double energy_residual() const {
        if (cylinder()) return 0.0;
        double worst = 0.0;
        for (std::size_t i = 0; i < sig_.size(); ++i) {
            const double hyp = tau_ > 0 ? std::cosh(sig_[i]) : std::sinh(sig_[i]);
            worst = std::max(worst, std::abs(dsig_[i] * dsig_[i] + tau_ * tau_ * hyp * hyp - 1.0));
        }
        return worst;
    }

    // Relative agreement of the two period routes: kappa(2 s_tau) = 4 T_tau
    // with T_tau from quadrature.
    double period_defect() const {
        if (cylinder()) return 0.0;
        const double Tq = physical_period(tau_, tol_);
        return std::abs(kap_[nodes_per_period_] / 4.0 - Tq) / Tq;
    }

    const std::vector<double>& sigma_nodes() const { return sig_; }
    const std::vector<double>& dsigma_nodes() const { return dsig_; }
    const std::vector<double>& kappa_nodes() const { return kap_; }

private:
    double tau_ = 0.0, tol_ = 1e-12, s_half_ = 0.0, T_ = 0.0, ds_ = 0.0;
    int nodes_per_period_ = 0, n_periods_ = 0;
    std::vector<double> sig_, dsig_, kap_;
};

// A positioned copy of a Delaunay surface: canonical profile plus a rigid
// placement (unit axis direction and a point on the axis). The canonical
// surface has axis e3 through the origin.
struct DelaunaySurface {
    std::shared_ptr<const DelaunayProfile> profile;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();

    Eigen::Quaterniond rotation() const {
        return Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), axis.normalized());
    }
};

inline Eigen::Vector3d surface_point(const DelaunaySurface& surf, double s, double theta) {
    if (!surf.profile) throw std::invalid_argument("surface_point: surface has no profile");
    const ProfileJet j = surf.profile->jet(s);
    const Eigen::Vector3d canonical(j.rho * std::cos(theta), j.rho * std::sin(theta), 0.5 * j.kappa);
    return surf.origin + surf.rotation() * canonical;
}

inline Eigen::Vector3d surface_normal(const DelaunaySurface& surf, double s, double theta) {
    if (!surf.profile) throw std::invalid_argument("surface_normal: surface has no profile");
    const ProfileJet j = surf.profile->jet(s);
    const Eigen::Vector3d canonical(-j.c * std::cos(theta), -j.c * std::sin(theta), j.dsigma);
    return surf.rotation() * canonical;
}

}  // namespace cmc
