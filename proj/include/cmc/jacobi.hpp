#pragma once

// The Jacobi (linearized mean curvature) operator of a Delaunay surface in
// isothermal coordinates,
//
//   L_tau = (4 / (tau^2 e^{2 sigma})) (d_ss + d_tt + tau^2 cosh(2 sigma)),
//
// together with its geometric kernel elements (translation, rotation and
// parameter-variation fields), the Floquet analysis of the angular-mode
// reductions u'' + (tau^2 cosh(2 sigma) - j^2) u = 0, and quantitative
// linearization checks against the nonlinear mean curvature.
//
// Normalizations: L equals twice the derivative of H under a unit normal
// variation, H(graph of eps*w) = 1 + (eps/2) L w + O(eps^2); the
// parameter-variation field Phi^D is fixed by the Wronskian condition
// W(Phi^D, Phi^{T,axis})(0) = 1, i.e. Phi^D(0) = 1/sigma''(0), Phi^D'(0) = 0.

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "cmc/delaunay.hpp"
#include "cmc/graph_deviation.hpp"
#include "cmc/numerics.hpp"
#include "cmc/patch.hpp"

namespace cmc {

// A rectangular isothermal grid on a fixed Delaunay profile; the domain for
// scalar fields fed to the operator.
struct DelaunayGrid {
    std::shared_ptr<const DelaunayProfile> profile;
    double s0 = 0.0, s1 = 0.0;
    int ns = 0, ntheta = 0;

    double ds() const { return (s1 - s0) / (ns - 1); }
    double dtheta() const { return 2.0 * std::numbers::pi / ntheta; }
    double s_at(int i) const { return s0 + i * ds(); }
    double theta_at(int j) const { return j * dtheta(); }

    void validate() const {
        if (!profile) throw std::invalid_argument("DelaunayGrid: missing profile");
        if (ns < 8 || ntheta < 8 || !(s1 > s0))
            throw std::invalid_argument("DelaunayGrid: need ns >= 8, ntheta >= 8, s1 > s0");
    }

    template <class F>
    ScalarField sample(const F& f) const {
        validate();
        ScalarField u(ns, ntheta);
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ntheta; ++j)
                u.at(i, j) = f(s_at(i), theta_at(j));
        return u;
    }
};

namespace detail {

// Circulant spectral second-derivative stencil for a periodic grid of size n
// with spacing 2 pi / n.
inline std::vector<double> spectral_d2_stencil(int n) {
    std::vector<double> d(n, 0.0);
    for (int m = 0; m < n; ++m) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            const int f = (k <= n / 2) ? k : k - n;
            if (2 * k == n) { acc += -double(f) * f * std::cos(std::numbers::pi * m); continue; }
            acc += -double(f) * f * std::cos(2.0 * std::numbers::pi * k * m / n);
        }
        d[m] = acc / n;
    }
    return d;
}

}  // namespace detail

// Applies L_tau to grid samples: spectral differentiation in theta, 4th-order
// finite differences in s (one-sided stencils of the same order at the two
// boundary rows).
inline ScalarField jacobi_apply(const DelaunayGrid& grid, const ScalarField& u) {
    grid.validate();
    if (u.ns != grid.ns || u.ntheta != grid.ntheta)
        throw std::invalid_argument("jacobi_apply: field/grid shape mismatch");
    const int ns = grid.ns, nt = grid.ntheta;
    const double hs = grid.ds();
    const auto d2t = detail::spectral_d2_stencil(nt);

    // s-stencils: centered 5-point inside, shifted 6-point at the margins.
    std::vector<std::vector<double>> edge(4);
    for (int r = 0; r < 2; ++r) {
        std::vector<double> xs(6);
        for (int k = 0; k < 6; ++k) xs[k] = (k - r) * hs;
        edge[r] = fd_weights(0.0, xs, 2);
        for (int k = 0; k < 6; ++k) xs[k] = (r - k) * hs;
        edge[2 + r] = fd_weights(0.0, xs, 2);
    }
    const double c0 = -30.0 / (12.0 * hs * hs), c1 = 16.0 / (12.0 * hs * hs), c2 = -1.0 / (12.0 * hs * hs);

    ScalarField out(ns, nt);
    for (int i = 0; i < ns; ++i) {
        const ProfileJet pj = grid.profile->jet(grid.s_at(i));
        const double tau = grid.profile->tau();
        const double pref = 4.0 / (tau * tau * std::exp(2.0 * pj.sigma));
        const double pot = tau * tau * std::cosh(2.0 * pj.sigma);
        for (int j = 0; j < nt; ++j) {
            double uss;
            if (i >= 2 && i <= ns - 3) {
                uss = c0 * u.at(i, j) + c1 * (u.at(i + 1, j) + u.at(i - 1, j)) +
                      c2 * (u.at(i + 2, j) + u.at(i - 2, j));
            } else if (i < 2) {
                uss = 0.0;
                for (int k = 0; k < 6; ++k) uss += edge[i][k] * u.at(k, j);
            } else {
                const int r = ns - 1 - i;
                uss = 0.0;
                for (int k = 0; k < 6; ++k) uss += edge[2 + r][k] * u.at(ns - 1 - k, j);
            }
            double utt = 0.0;
            for (int m = 0; m < nt; ++m) utt += d2t[m] * u.at(i, (j + m) % nt);
            out.at(i, j) = pref * (uss + utt + pot * u.at(i, j));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Geometric Jacobi fields
// ---------------------------------------------------------------------------

namespace detail {

inline void require_unit(const Eigen::Vector3d& e, const char* who) {
    if (std::abs(e.norm() - 1.0) > 1e-12)
        throw std::invalid_argument(std::string(who) + ": direction must be a unit vector");
}

// Deterministic right-handed orthonormal frame (e, e1, e2).
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> frame_of(const Eigen::Vector3d& e) {
    Eigen::Vector3d seed = std::abs(e.x()) <= std::abs(e.y()) && std::abs(e.x()) <= std::abs(e.z())
                               ? Eigen::Vector3d::UnitX()
                               : (std::abs(e.y()) <= std::abs(e.z()) ? Eigen::Vector3d::UnitY()
                                                                     : Eigen::Vector3d::UnitZ());
    const Eigen::Vector3d e1 = (seed - seed.dot(e) * e).normalized();
    return {e1, e.cross(e1)};
}

}  // namespace detail

// Translation field Phi^{T,e} = e . N on the canonical surface.
inline double translation_field(const DelaunayProfile& prof, const Eigen::Vector3d& e, double s, double theta) {
    detail::require_unit(e, "translation_field");
    const ProfileJet j = prof.jet(s);
    return -j.c * (e.x() * std::cos(theta) + e.y() * std::sin(theta)) + e.z() * j.dsigma;
}

// Rotation field Phi^{R,e} = (x . e') e'' . N - (x . e'') e' . N for the
// infinitesimal rotation about e, with (e, e', e'') a direct orthonormal
// frame. Rotations about the surface axis e3 act trivially (zero field).
inline double rotation_field(const DelaunayProfile& prof, const Eigen::Vector3d& e, double s, double theta) {
    detail::require_unit(e, "rotation_field");
    const ProfileJet j = prof.jet(s);
    const auto [e1, e2] = detail::frame_of(e);
    const Eigen::Vector3d x(j.rho * std::cos(theta), j.rho * std::sin(theta), 0.5 * j.kappa);
    const Eigen::Vector3d n(-j.c * std::cos(theta), -j.c * std::sin(theta), j.dsigma);
    return x.dot(e1) * e2.dot(n) - x.dot(e2) * e1.dot(n);
}

// ---------------------------------------------------------------------------
// Parameter-variation field Phi^D (angular mode 0)
// ---------------------------------------------------------------------------

// Dense solution of u'' + tau^2 cosh(2 sigma) u = 0 with the Wronskian
// normalization against Phi^{T,e3} = sigma': u(0) = 1/sigma''(0), u'(0) = 0.
// Satisfies the shift identity u(s + 2 s_tau) = u(s) + p_tau sigma'(s).
class DVariationField {
public:
    static DVariationField solve(const DelaunayProfile& prof, double tol = 1e-12) {
        if (prof.cylinder())
            throw std::invalid_argument("DVariationField: undefined for the cylinder tau = 1");
        DVariationField f;
        f.tau_ = prof.tau();
        f.s_half_ = prof.s_half();
        const double tau = prof.tau();
        const double sig0 = -turning_point(tau);
        const double dd0 = -0.5 * tau * tau * std::sinh(2.0 * sig0);
        if (dd0 == 0.0) throw std::runtime_error("DVariationField: vanishing sigma''(0)");

        using state = std::array<double, 4>;  // sigma, sigma', u, u'
        auto rhs = [tau](const state& y, state& dy, double) {
            dy[0] = y[1];
            dy[1] = -0.5 * tau * tau * std::sinh(2.0 * y[0]);
            dy[2] = y[3];
            dy[3] = -tau * tau * std::cosh(2.0 * y[0]) * y[2];
        };
        const int npp = prof.nodes_per_period();
        const int n_nodes = static_cast<int>(std::lround(prof.window() / prof.grid_step())) + 1;
        f.ds_ = prof.grid_step();
        state y{sig0, 0.0, 1.0 / dd0, 0.0};
        namespace ode = boost::numeric::odeint;
        auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_fehlberg78<state>());
        ode::integrate_const(stepper, rhs, y, 0.0, (n_nodes - 0.5) * f.ds_, f.ds_,
                             [&](const state& yy, double) {
                                 if (static_cast<int>(f.u_.size()) < n_nodes) {
                                     f.sig_.push_back(yy[0]);
                                     f.u_.push_back(yy[2]);
                                     f.du_.push_back(yy[3]);
                                     f.dsig_.push_back(yy[1]);
                                 }
                             });
        if (static_cast<int>(f.u_.size()) != n_nodes)
            throw std::runtime_error("DVariationField: dense output truncated");

        // p_tau from the shift identity by least squares over one period.
        double num = 0.0, den = 0.0;
        for (int i = 0; i + npp < n_nodes; ++i) {
            const double diff = f.u_[i + npp] - f.u_[i];
            num += diff * f.dsig_[i];
            den += f.dsig_[i] * f.dsig_[i];
        }
        if (den == 0.0) throw std::runtime_error("DVariationField: degenerate shift fit");
        f.p_ = num / den;
        return f;
    }

    double p() const { return p_; }            // p_tau in the shift identity
    double window() const { return ds_ * (u_.size() - 1); }

    // Value and derivative; valid on [0, window], extended by the shift
    // identity outside (u(s + 2k s_tau) = u(s) + k p sigma'(s)).
    double value(double s) const { return eval(s, false); }
    double derivative(double s) const { return eval(s, true); }

    // Periodic part B(s) = Phi^D(s) - (p / (2 s_tau)) s sigma'(s).
    double periodic_part(double s, const DelaunayProfile& prof) const {
        return value(s) - p_ / (2.0 * s_half_) * s * prof.jet(s).dsigma;
    }

private:
    double eval(double s, bool deriv) const {
        const double period = 2.0 * s_half_;
        const double L = window();
        double shift = 0.0;
        double r = s;
        // Reduce into the stored window using the shift identity.
        double k = 0.0;
        if (r < 0.0 || r > L) {
            k = std::floor(r / period);
            r -= k * period;
        }
        const int i = std::clamp(static_cast<int>(r / ds_), 0, static_cast<int>(u_.size()) - 2);
        const double t = (r - i * ds_) / ds_;
        const auto pot = [this](double sg) { return tau_ * tau_ * std::cosh(2.0 * sg); };
        const auto potp = [this](double sg, double dsg) { return 2.0 * tau_ * tau_ * std::sinh(2.0 * sg) * dsg; };
        const double q0 = pot(sig_[i]), q1 = pot(sig_[i + 1]);
        const double u0 = u_[i], u1 = u_[i + 1], v0 = du_[i], v1 = du_[i + 1];
        QuinticHermite hu{u0, v0, -q0 * u0, u1, v1, -q1 * u1, ds_};
        QuinticHermite hv{v0, -q0 * u0, -q0 * v0 - potp(sig_[i], dsig_[i]) * u0,
                          v1, -q1 * u1, -q1 * v1 - potp(sig_[i + 1], dsig_[i + 1]) * u1, ds_};
        double val = deriv ? hv.value(t) : hu.value(t);
        if (k != 0.0) {
            // sigma' at r equals sigma' at s (periodic); reuse the stored grid.
            QuinticHermite hd{dsig_[i], -0.5 * tau_ * tau_ * std::sinh(2.0 * sig_[i]),
                              -tau_ * tau_ * std::cosh(2.0 * sig_[i]) * dsig_[i],
                              dsig_[i + 1], -0.5 * tau_ * tau_ * std::sinh(2.0 * sig_[i + 1]),
                              -tau_ * tau_ * std::cosh(2.0 * sig_[i + 1]) * dsig_[i + 1], ds_};
            val += k * p_ * (deriv ? hd.derivative(t) : hd.value(t));
        }
        return val;
    }

    double tau_ = 0.0, s_half_ = 0.0, ds_ = 0.0, p_ = 0.0;
    std::vector<double> sig_, dsig_, u_, du_;
};

// Route (b) for the parameter variation: the normal projection of the
// pointwise difference of neighboring family members,
// w_h(s) = (X_{tau+h}(s, th) - X_tau(s, th)) . N_tau(s, th) / h,
// which converges to a combination of Phi^D and Phi^{T,e3} as h -> 0.
inline std::vector<double> variation_field_fd(const DelaunayProfile& prof, const DelaunayProfile& prof_h,
                                              double h, const std::vector<double>& s_samples) {
    if (prof.cylinder() || prof_h.cylinder())
        throw std::invalid_argument("variation_field_fd: cylinder branch has no parameter variation");
    if ((prof.tau() > 0) != (prof_h.tau() > 0))
        throw std::invalid_argument("variation_field_fd: profiles on different branches");
    std::vector<double> w;
    w.reserve(s_samples.size());
    for (double s : s_samples) {
        const ProfileJet a = prof.jet(s);
        const ProfileJet b = prof_h.jet(s);
        // radial difference dotted with radial normal component (-c), axial
        // difference with sigma'.
        const double dr = b.rho - a.rho;
        const double dz = 0.5 * (b.kappa - a.kappa);
        w.push_back((dr * (-a.c) + dz * a.dsigma) / h);
    }
    return w;
}

// A sampled Jacobi field with its provenance.
struct JacobiField {
    enum class Kind { Translation, Rotation, DelaunayVariation };
    Kind kind = Kind::Translation;
    Eigen::Vector3d e = Eigen::Vector3d::UnitZ();  // direction, where applicable
    ScalarField values;
    double normalization = 1.0;
};

inline JacobiField sample_translation_field(const DelaunayGrid& grid, const Eigen::Vector3d& e) {
    JacobiField f;
    f.kind = JacobiField::Kind::Translation;
    f.e = e;
    f.values = grid.sample([&](double s, double th) { return translation_field(*grid.profile, e, s, th); });
    return f;
}

inline JacobiField sample_rotation_field(const DelaunayGrid& grid, const Eigen::Vector3d& e) {
    JacobiField f;
    f.kind = JacobiField::Kind::Rotation;
    f.e = e;
    f.values = grid.sample([&](double s, double th) { return rotation_field(*grid.profile, e, s, th); });
    return f;
}

struct VariationResult {
    JacobiField field;          // route (a): the ODE solution sampled on the grid
    double p_tau = 0.0;         // shift coefficient
    double shift_residual = 0.0;     // sup-defect of the shift identity after extraction
    double route_defect = 0.0;       // relative disagreement of routes (a) and (b), O(h)
};

// Phi^D computed by the mode-0 Jacobi ODE (route a) and cross-validated
// against the normal projection of the finite-difference family variation
// (route b); the two agree up to a Phi^{T,e3} component within O(h) after a
// least-squares normalization match.
inline VariationResult delaunay_variation_field(const DelaunayGrid& grid, double h, double tol = 1e-12) {
    grid.validate();
    const DelaunayProfile& prof = *grid.profile;
    if (prof.cylinder()) throw std::invalid_argument("delaunay_variation_field: tau = 1 excluded");
    const double tau = prof.tau();
    if ((tau + h > 0) != (tau > 0) || tau + h > 1.0)
        throw std::invalid_argument("delaunay_variation_field: tau + h leaves the branch");

    const DVariationField phiD = DVariationField::solve(prof, tol);
    VariationResult res;
    res.field.kind = JacobiField::Kind::DelaunayVariation;
    res.field.values = grid.sample([&](double s, double) { return phiD.value(s); });
    res.p_tau = phiD.p();

    // Shift-identity residual over one period, relative to the field scale.
    const double period = 2.0 * prof.s_half();
    double defect = 0.0, scale = 0.0;
    for (int i = 0; i <= 256; ++i) {
        const double s = i * period / 256.0;
        const double lhs = phiD.value(s + period);
        const double rhs = phiD.value(s) + phiD.p() * prof.jet(s).dsigma;
        defect = std::max(defect, std::abs(lhs - rhs));
        scale = std::max(scale, std::abs(lhs));
    }
    res.shift_residual = defect / scale;

    // Route (b): fit w_fd ~ cD * Phi^D + cT * Phi^T over two periods.
    const DelaunayProfile prof_h = DelaunayProfile::solve(tau + h, 4, prof.nodes_per_period(), tol);
    std::vector<double> s_samples;
    for (int i = 0; i <= 512; ++i) s_samples.push_back(i * 2.0 * period / 512.0);
    const std::vector<double> wfd = variation_field_fd(prof, prof_h, h, s_samples);
    Eigen::MatrixXd A(s_samples.size(), 2);
    Eigen::VectorXd b(s_samples.size());
    for (std::size_t i = 0; i < s_samples.size(); ++i) {
        A(i, 0) = phiD.value(s_samples[i]);
        A(i, 1) = prof.jet(s_samples[i]).dsigma;
        b(i) = wfd[i];
    }
    const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
    res.route_defect = (A * coef - b).norm() / b.norm();
    res.field.normalization = coef(0);
    return res;
}

// ---------------------------------------------------------------------------
// Floquet analysis of the angular-mode reductions
// ---------------------------------------------------------------------------

struct FloquetData {
    double tau = 0.0;
    int j = 0;
    Eigen::Matrix2d M = Eigen::Matrix2d::Identity();  // monodromy over one half-period s_tau
    double trace = 2.0;
    double det_defect = 0.0;   // |det M - 1|, a Wronskian quality measure
    double gamma = 0.0;        // indicial root gamma_{tau, j} >= 0
    bool hyperbolic = false;   // |trace| > 2
};

// Monodromy of u'' + (tau^2 cosh(2 sigma) - j^2) u = 0 over [0, s_tau],
// integrated jointly with the profile.
inline FloquetData monodromy(double tau, int j, double tol = 1e-13) {
    DelaunayParameter p(tau);
    if (p.cylinder()) throw std::invalid_argument("monodromy: undefined for the cylinder tau = 1");
    if (j < 0) throw std::invalid_argument("monodromy: angular mode j must be >= 0");
    const double s_tau = half_period(tau, std::min(tol, 1e-14));
    // Extended precision keeps the Wronskian defect below roundoff growth of
    // the (exponentially large) hyperbolic monodromy entries.
    using real = long double;
    using state = std::array<real, 6>;  // sigma, sigma', u1, u1', u2, u2'
    const real ltau = static_cast<real>(tau);
    auto rhs = [ltau, j](const state& y, state& dy, real) {
        const real q = ltau * ltau * std::cosh(2.0L * y[0]) - static_cast<real>(j) * j;
        dy[0] = y[1];
        dy[1] = -0.5L * ltau * ltau * std::sinh(2.0L * y[0]);
        dy[2] = y[3];
        dy[3] = -q * y[2];
        dy[4] = y[5];
        dy[5] = -q * y[4];
    };
    state y{static_cast<real>(-turning_point(tau)), 0.0L, 1.0L, 0.0L, 0.0L, 1.0L};
    namespace ode = boost::numeric::odeint;
    using stepper_t = ode::runge_kutta_fehlberg78<state, real>;
    auto stepper = ode::make_controlled(static_cast<real>(tol), static_cast<real>(tol), stepper_t());
    ode::integrate_adaptive(stepper, rhs, y, static_cast<real>(0), static_cast<real>(s_tau),
                            static_cast<real>(s_tau / 1024.0));

    FloquetData fd;
    fd.tau = tau;
    fd.j = j;
    fd.M << static_cast<double>(y[2]), static_cast<double>(y[4]), static_cast<double>(y[3]),
        static_cast<double>(y[5]);
    fd.trace = fd.M.trace();
    fd.det_defect = static_cast<double>(std::abs(y[2] * y[5] - y[3] * y[4] - 1.0L));
    fd.hyperbolic = std::abs(fd.trace) > 2.0;
    fd.gamma = fd.hyperbolic ? std::acosh(0.5 * std::abs(fd.trace)) / s_tau : 0.0;
    return fd;
}

inline double indicial_root(double tau, int j, double tol = 1e-13) { return monodromy(tau, j, tol).gamma; }

// Exponentially decaying Floquet (Bloch) solution for a hyperbolic mode:
// w(s + s_tau) = lambda w(s) with |lambda| = e^{-gamma s_tau} < 1. Being an
// exact solution of the mode ODE, c(s) cos(j theta) * w(s) is annihilated by
// L_tau pointwise; these are the model end-correction profiles.
class BlochMode {
public:
    static BlochMode solve(double tau, int j, double tol = 1e-13, int nodes = 2048) {
        const FloquetData fd = monodromy(tau, j, tol);
        if (!fd.hyperbolic)
            throw std::invalid_argument("BlochMode: mode j is not hyperbolic for this tau");
        BlochMode b;
        b.tau_ = tau;
        b.j_ = j;
        b.s_half_ = half_period(tau, std::min(tol, 1e-14));
        b.gamma_ = fd.gamma;
        const double tr = fd.trace;
        const double lam = 0.5 * (tr - (tr > 0 ? 1.0 : -1.0) * std::sqrt(tr * tr - 4.0));
        b.lambda_ = lam;
        // Eigenvector of M for lambda: pick the better-conditioned expression.
        Eigen::Vector2d v1(fd.M(0, 1), lam - fd.M(0, 0));
        Eigen::Vector2d v2(lam - fd.M(1, 1), fd.M(1, 0));
        Eigen::Vector2d v = (v1.norm() >= v2.norm()) ? v1 : v2;

        using state = std::array<double, 4>;  // sigma, sigma', u, u'
        auto rhs = [tau, j](const state& y, state& dy, double) {
            const double q = tau * tau * std::cosh(2.0 * y[0]) - double(j) * j;
            dy[0] = y[1];
            dy[1] = -0.5 * tau * tau * std::sinh(2.0 * y[0]);
            dy[2] = y[3];
            dy[3] = -q * y[2];
        };
        state y{-turning_point(tau), 0.0, v(0), v(1)};
        b.ds_ = b.s_half_ / nodes;
        namespace ode = boost::numeric::odeint;
        auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_fehlberg78<state>());
        ode::integrate_const(stepper, rhs, y, 0.0, (nodes + 0.5) * b.ds_, b.ds_,
                             [&](const state& yy, double) {
                                 if (static_cast<int>(b.u_.size()) <= nodes) {
                                     b.sig_.push_back(yy[0]);
                                     b.dsig_.push_back(yy[1]);
                                     b.u_.push_back(yy[2]);
                                     b.du_.push_back(yy[3]);
                                 }
                             });
        if (static_cast<int>(b.u_.size()) != nodes + 1)
            throw std::runtime_error("BlochMode: dense output truncated");
        double sup = 0.0;
        for (double x : b.u_) sup = std::max(sup, std::abs(x));
        for (auto& x : b.u_) x /= sup;
        for (auto& x : b.du_) x /= sup;
        return b;
    }

    double gamma() const { return gamma_; }
    double lambda() const { return lambda_; }
    double s_half() const { return s_half_; }
    int mode() const { return j_; }

    double value(double s) const { return eval(s, 0); }
    double derivative(double s) const { return eval(s, 1); }
    // Second derivative straight from the ODE.
    double second_derivative(double s) const {
        const double q = potential(s);
        return -q * eval(s, 0);
    }

private:
    double potential(double s) const {
        // cosh(2 sigma) has period s_tau; use the stored sigma samples.
        double r = s - std::floor(s / s_half_) * s_half_;
        const int i = std::clamp(static_cast<int>(r / ds_), 0, static_cast<int>(sig_.size()) - 2);
        const double t = (r - i * ds_) / ds_;
        const auto dd = [this](double sg) { return -0.5 * tau_ * tau_ * std::sinh(2.0 * sg); };
        QuinticHermite hs{sig_[i], dsig_[i], dd(sig_[i]), sig_[i + 1], dsig_[i + 1], dd(sig_[i + 1]), ds_};
        return tau_ * tau_ * std::cosh(2.0 * hs.value(t)) - double(j_) * j_;
    }

    double eval(double s, int deriv) const {
        const double q = std::floor(s / s_half_);
        double r = s - q * s_half_;
        if (r >= s_half_) r = s_half_ * (1.0 - 1e-16);
        const double factor = std::pow(lambda_, q);
        const int i = std::clamp(static_cast<int>(r / ds_), 0, static_cast<int>(u_.size()) - 2);
        const double t = (r - i * ds_) / ds_;
        const auto pot = [this](int idx) {
            return tau_ * tau_ * std::cosh(2.0 * sig_[idx]) - double(j_) * j_;
        };
        const double q0 = pot(i), q1 = pot(i + 1);
        QuinticHermite h{u_[i], du_[i], -q0 * u_[i], u_[i + 1], du_[i + 1], -q1 * u_[i + 1], ds_};
        QuinticHermite hd{du_[i], -q0 * u_[i],
                          -q0 * du_[i] - 2.0 * tau_ * tau_ * std::sinh(2.0 * sig_[i]) * dsig_[i] * u_[i],
                          du_[i + 1], -q1 * u_[i + 1],
                          -q1 * du_[i + 1] - 2.0 * tau_ * tau_ * std::sinh(2.0 * sig_[i + 1]) * dsig_[i + 1] * u_[i + 1],
                          ds_};
        return factor * (deriv ? hd.value(t) : h.value(t));
    }

    double tau_ = 0.0, s_half_ = 0.0, gamma_ = 0.0, lambda_ = 0.0, ds_ = 0.0;
    int j_ = 0;
    std::vector<double> sig_, dsig_, u_, du_;
};

// ---------------------------------------------------------------------------
// Linearization checks
// ---------------------------------------------------------------------------

struct LinearizationReport {
    std::vector<double> eps;
    std::vector<double> defect;      // sup | 2 H(eps w) - 2 - eps L w |
    double richardson_order = 0.0;   // fitted order of the defect in eps
};

// Compares the nonlinear deviation of the graph of eps*w (analytic
// cancellation-free evaluator) with the linear prediction (eps/2) L w on a
// grid, over a ladder of epsilons, and fits the observed order.
template <class WJet>
LinearizationReport linearization_check(const DelaunayGrid& grid, const WJet& wjet,
                                        const std::vector<double>& eps_ladder) {
    grid.validate();
    if (eps_ladder.size() < 2) throw std::invalid_argument("linearization_check: need >= 2 epsilons");
    ScalarField w = grid.sample([&](double s, double th) { return wjet(s, th).w; });
    const ScalarField Lw = jacobi_apply(grid, w);
    LinearizationReport rep;
    for (double eps : eps_ladder) {
        double sup = 0.0;
        for (int i = 2; i < grid.ns - 2; ++i) {
            for (int j = 0; j < grid.ntheta; ++j) {
                GraphJet gj = wjet(grid.s_at(i), grid.theta_at(j));
                gj.w *= eps; gj.ws *= eps; gj.wt *= eps; gj.wss *= eps; gj.wst *= eps; gj.wtt *= eps;
                const double dev = graph_mean_curvature_deviation(*grid.profile, grid.s_at(i), grid.theta_at(j), gj);
                sup = std::max(sup, std::abs(2.0 * dev - eps * Lw.at(i, j)));
            }
        }
        rep.eps.push_back(eps);
        rep.defect.push_back(sup);
    }
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < rep.eps.size(); ++k) {
        lx.push_back(std::log(rep.eps[k]));
        ly.push_back(std::log(std::max(rep.defect[k], 1e-300)));
    }
    const auto [lo, hi] = std::minmax_element(lx.begin(), lx.end());
    rep.richardson_order = (*hi > *lo) ? fit_line(lx, ly).slope : 0.0;
    return rep;
}

// Quadratic-remainder measurement: sup |Q(eps w)| with
// Q(v) = H(graph v) - 1 - (1/2) L v, evaluated analytically in the nonlinear
// part and spectrally/FD in the linear part.
template <class WJet>
double nonlinear_remainder(const DelaunayGrid& grid, const WJet& wjet, double eps) {
    const auto rep = linearization_check(grid, wjet, std::vector<double>{eps, eps});
    return rep.defect.front();
}

}  // namespace cmc
