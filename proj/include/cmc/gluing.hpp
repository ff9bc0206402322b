#pragma once

// The gluing construction: smooth cutoff, axial offsets, Y/Z neck blends,
// the matching condition (Lambda + n Gamma integral) and its solution set,
// assembly of the compact genus-k configuration, curvature-deviation
// measurements on the gluing annuli, and the extension residuals of the
// approximate Jacobi fields.

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmc/blocks.hpp"
#include "cmc/delaunay.hpp"
#include "cmc/graph_deviation.hpp"
#include "cmc/jacobi.hpp"

namespace cmc {

// ---------------------------------------------------------------------------
// Cutoff
// ---------------------------------------------------------------------------

// The C-infinity step xi(s) = phi(1-s) / (phi(1-s) + phi(1+s)) with
// phi(t) = e^{-1/t} for t > 0 and 0 otherwise: xi = 1 for s <= -1, 0 for
// s >= 1, and xi(-s) = 1 - xi(s).
struct CutoffProfile {
    static double phi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
    static double phi_d(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }
    static double phi_dd(double t) { return t > 0.0 ? std::exp(-1.0 / t) * (1.0 - 2.0 * t) / (t * t * t * t) : 0.0; }

    double operator()(double s) const {
        if (s <= -1.0) return 1.0;
        if (s >= 1.0) return 0.0;
        const double a = phi(1.0 - s), b = phi(1.0 + s);
        return a / (a + b);
    }
    double d1(double s) const {
        if (std::abs(s) >= 1.0) return 0.0;
        const double a = phi(1.0 - s), b = phi(1.0 + s);
        const double ad = -phi_d(1.0 - s), bd = phi_d(1.0 + s);
        const double den = a + b;
        return (ad * b - a * bd) / (den * den);
    }
    double d2(double s) const {
        if (std::abs(s) >= 1.0) return 0.0;
        const double a = phi(1.0 - s), b = phi(1.0 + s);
        const double ad = -phi_d(1.0 - s), bd = phi_d(1.0 + s);
        const double add = phi_dd(1.0 - s), bdd = phi_dd(1.0 + s);
        const double den = a + b;
        const double num1 = add * b - a * bdd;
        const double num2 = ad * b - a * bd;
        return (num1 * den - 2.0 * num2 * (ad + bd)) / (den * den * den);
    }
};

inline CutoffProfile cutoff_xi() { return CutoffProfile{}; }

// ---------------------------------------------------------------------------
// Offsets and the matching condition
// ---------------------------------------------------------------------------

// delta_{n,tau} = d0 + d0bar + 2 n T_tau: the translation applied along e2
// before the Y-connection.
inline double delta_offset(int n, double tau, const DFunctions& d = {}, double tol = 1e-14) {
    if (n < 1) throw std::invalid_argument("delta_offset: n must be >= 1");
    return d.eval_d0(tau) + d.eval_d0bar(tau) + 2.0 * n * physical_period(tau, tol);
}

struct LambdaGamma {
    double Lambda = 0.0;
    double Gamma = 0.0;
    double tau_bar = 0.0;
};

// Lambda(tau) = (sin(pi/k)(d0 + d0bar) - d1) / T_taubar and
// Gamma(tau) = 2 sin(pi/k) T_tau / T_taubar, with taubar from balancing.
inline LambdaGamma lambda_gamma(double tau, int k, const DFunctions& d = {}, double tol = 1e-14) {
    LambdaGamma lg;
    lg.tau_bar = solve_balancing(tau, alpha_k(k));
    const double T_bar = physical_period(lg.tau_bar, tol);
    const double sk = std::sin(std::numbers::pi / k);
    lg.Lambda = (sk * (d.eval_d0(tau) + d.eval_d0bar(tau)) - d.eval_d1(tau)) / T_bar;
    lg.Gamma = 2.0 * sk * physical_period(tau, tol) / T_bar;
    return lg;
}

// Left minus right side of sin(pi/k) delta_{n,tau} = d1 + m T_taubar;
// algebraically equal to T_taubar (Lambda + n Gamma - m).
inline double matching_residual(int n, int m, double tau, int k, const DFunctions& d = {}, double tol = 1e-14) {
    if (n < 1 || m < 1) throw std::invalid_argument("matching_residual: n, m must be >= 1");
    const double sk = std::sin(std::numbers::pi / k);
    const double tau_bar = solve_balancing(tau, alpha_k(k));
    return sk * delta_offset(n, tau, d, tol) - d.eval_d1(tau) - m * physical_period(tau_bar, tol);
}

struct MatchingSolution {
    int n = 0, m = 0;
    double tau = 0.0, tau_bar = 0.0;
    double residual = 0.0;
};

// Roots of Lambda(tau) + n Gamma(tau) = m on the interval, one per integer m
// in the image. Monotone bracketing when the map is monotone (guaranteed for
// constant d by the period monotonicity); dense scan-and-bisect otherwise.
inline std::vector<MatchingSolution> solve_matching(int n, int k, double tau_lo, double tau_hi,
                                                    const DFunctions& d = {}, double tol = 1e-10) {
    if (n < 1) throw std::invalid_argument("solve_matching: n must be >= 1");
    if (!(tau_lo < tau_hi) || (tau_lo > 0) != (tau_hi > 0) || tau_hi > 1.0)
        throw std::invalid_argument("solve_matching: interval must lie in one sign branch");
    auto g = [&](double tau) {
        const LambdaGamma lg = lambda_gamma(tau, k, d);
        return lg.Lambda + n * lg.Gamma;
    };
    const int scan = 64;
    std::vector<double> ts(scan + 1), gs(scan + 1);
    for (int i = 0; i <= scan; ++i) {
        ts[i] = tau_lo + (tau_hi - tau_lo) * i / scan;
        gs[i] = g(ts[i]);
    }
    std::vector<MatchingSolution> out;
    auto emit = [&](double lo, double hi, double glo, double ghi, int m) {
        if ((glo - m) * (ghi - m) > 0.0) return;
        const double tau = find_root([&](double t) { return g(t) - m; }, lo, hi, 1e-15);
        if (std::abs(g(tau) - m) > tol) return;
        MatchingSolution sol;
        sol.n = n;
        sol.m = m;
        sol.tau = tau;
        sol.tau_bar = solve_balancing(tau, alpha_k(k));
        sol.residual = matching_residual(n, m, tau, k, d);
        out.push_back(sol);
    };
    for (int i = 0; i < scan; ++i) {
        const int m_lo = static_cast<int>(std::ceil(std::min(gs[i], gs[i + 1])));
        const int m_hi = static_cast<int>(std::floor(std::max(gs[i], gs[i + 1])));
        for (int m = std::max(1, m_lo); m <= m_hi; ++m) emit(ts[i], ts[i + 1], gs[i], gs[i + 1], m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Necks
// ---------------------------------------------------------------------------

// A glued neck: the common Delaunay model over the window (-L, L) carrying
// the blended graph w~(s,theta) = xi(s) g_a(s+L, theta) + (1-xi(s)) g_b(L-s, theta),
// with the transition annulus (-1, 1).
struct GluedNeck {
    enum class Kind { Y, Z };
    Kind kind = Kind::Y;
    std::shared_ptr<const DelaunayProfile> profile;  // common asymptote model
    double half_window = 0.0;                        // n s_tau (Y) or m s_taubar (Z)
    EndGraph graph_a, graph_b;
    CutoffProfile xi;

    double blended(double s, double theta) const {
        const double x = xi(s);
        double v = 0.0;
        if (x != 0.0) v += x * graph_a.value(s + half_window, theta);
        if (x != 1.0) v += (1.0 - x) * graph_b.value(half_window - s, theta);
        return v;
    }

    GraphJet blended_jet(double s, double theta) const {
        const double x = xi(s), xd = xi.d1(s), xdd = xi.d2(s);
        const GraphJet a = graph_a.jet(s + half_window, theta);
        GraphJet b = graph_b.jet(half_window - s, theta);
        b.ws = -b.ws;        // chain rule for the reflected argument
        b.wst = -b.wst;
        GraphJet g;
        g.w = x * a.w + (1.0 - x) * b.w;
        g.ws = x * a.ws + (1.0 - x) * b.ws + xd * (a.w - b.w);
        g.wt = x * a.wt + (1.0 - x) * b.wt;
        g.wss = x * a.wss + (1.0 - x) * b.wss + 2.0 * xd * (a.ws - b.ws) + xdd * (a.w - b.w);
        g.wst = x * a.wst + (1.0 - x) * b.wst + xd * (a.wt - b.wt);
        g.wtt = x * a.wtt + (1.0 - x) * b.wtt;
        return g;
    }
};

// Joins two Delaunay-asymptotic ends over their common model. Checks that
// the models agree (same tau, anti-parallel axes through the shared neck).
inline GluedNeck glue_neck(const EndDescriptor& end_a, const EndDescriptor& end_b, double half_window,
                           const CutoffProfile& xi = {}, GluedNeck::Kind kind = GluedNeck::Kind::Y) {
    end_a.validate();
    end_b.validate();
    if (half_window <= 1.0) throw std::invalid_argument("glue_neck: half_window must exceed the annulus");
    if (std::abs(end_a.model.profile->tau() - end_b.model.profile->tau()) > 1e-12)
        throw std::invalid_argument("glue_neck: end models have different tau");
    if (std::abs(end_a.direction.dot(end_b.direction) + 1.0) > 1e-9)
        throw std::invalid_argument("glue_neck: end directions are not anti-parallel");
    GluedNeck neck;
    neck.kind = kind;
    neck.profile = end_a.model.profile;
    neck.half_window = half_window;
    neck.graph_a = end_a.graph;
    neck.graph_b = end_b.graph;
    neck.xi = xi;
    return neck;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

struct NeckEdge {
    GluedNeck neck;
    int piece_a = 0, end_a = 0;   // piece index (0 = Type2, 1..k = Type1 copies)
    int piece_b = 0, end_b = 0;
};

struct GluedAssembly {
    int k = 3;
    MatchingSolution solution;
    TruncatedBlock center;                    // the Type2 piece
    std::vector<TruncatedBlock> copies;       // k rotated Type1 pieces
    std::vector<Eigen::Matrix3d> placements;  // R_{2 pi l / k} per copy
    std::vector<NeckEdge> necks;              // k Y-necks then k Z-necks
    SymmetryGroup symmetry;                   // G_k
    int euler_characteristic = 0;

    // Partition-of-unity weights of the two pieces meeting at a neck,
    // evaluated independently through the two one-sided cutoffs.
    std::pair<double, double> partition_weights(int neck_index, double s) const {
        const auto& e = necks.at(neck_index);
        return {e.neck.xi(s), e.neck.xi(-s)};
    }
};

inline GluedAssembly assemble(int k, const MatchingSolution& sol, const BuildingBlock& type1,
                              const BuildingBlock& type2, const DFunctions& d = {}, double tol = 1e-8) {
    if (k < 3) throw std::invalid_argument("assemble: k must be >= 3");
    if (type1.kind != BuildingBlock::Kind::Type1 || type2.kind != BuildingBlock::Kind::Type2)
        throw std::invalid_argument("assemble: block kinds mismatch");
    if (std::abs(type1.tau - sol.tau) > 1e-9 || std::abs(type2.tau - sol.tau) > 1e-9 ||
        std::abs(type1.tau_bar - sol.tau_bar) > 1e-9)
        throw std::invalid_argument("assemble: block parameters disagree with the matching solution");
    if (std::abs(matching_residual(sol.n, sol.m, sol.tau, k, d)) > tol)
        throw std::invalid_argument("assemble: matching residual too large for Z-neck identification");

    GluedAssembly a;
    a.k = k;
    a.solution = sol;
    const double s_tau = type2.ends[0].model.profile->s_half();
    const double s_bar = type1.ends[1].model.profile->s_half();
    a.center = truncate(type2, sol.n * s_tau, sol.n * s_tau);
    a.symmetry.generators = {detail::rotation_z(2.0 * std::numbers::pi / k)};
    const CutoffProfile xi = cutoff_xi();

    for (int l = 0; l < k; ++l) {
        a.copies.push_back(truncate(type1, sol.n * s_tau, sol.m * s_bar));
        a.placements.push_back(detail::rotation_z(2.0 * std::numbers::pi * l / k));
    }

    // Y-necks: Type2 end l with copy l's E0 (both graphs over the tau model).
    for (int l = 0; l < k; ++l) {
        EndDescriptor e0 = type1.ends[0];
        const Eigen::Matrix3d R = a.placements[l];
        e0.direction = R * e0.direction;
        e0.model.axis = R * e0.model.axis;
        e0.model.origin = R * e0.model.origin;
        NeckEdge edge;
        edge.neck = glue_neck(type2.ends[l], e0, sol.n * s_tau, xi, GluedNeck::Kind::Y);
        edge.piece_a = 0;
        edge.end_a = l;
        edge.piece_b = 1 + l;
        edge.end_b = 0;
        a.necks.push_back(edge);
    }
    // Z-necks: copy l's E1 with copy (l+1)'s E-1 (graphs over the taubar model).
    for (int l = 0; l < k; ++l) {
        EndDescriptor e1 = type1.ends[1];
        EndDescriptor em1 = type1.ends[2];
        const Eigen::Matrix3d Rl = a.placements[l];
        const Eigen::Matrix3d Rn = a.placements[(l + 1) % k];
        e1.direction = Rl * e1.direction;
        e1.model.axis = Rl * e1.model.axis;
        e1.model.origin = Rl * e1.model.origin;
        em1.direction = Rn * em1.direction;
        em1.model.axis = Rn * em1.model.axis;
        em1.model.origin = Rn * em1.model.origin;
        NeckEdge edge;
        edge.neck = glue_neck(e1, em1, sol.m * s_bar, xi, GluedNeck::Kind::Z);
        edge.piece_a = 1 + l;
        edge.end_a = 1;
        edge.piece_b = 1 + (l + 1) % k;
        edge.end_b = 2;
        a.necks.push_back(edge);
    }

    // Boundary-circle matching: collect (piece, end) slots used by necks and
    // require each boundary to appear exactly once.
    std::vector<int> used(static_cast<std::size_t>(k + 1) * 8, 0);
    auto slot = [&](int piece, int end) -> int& { return used[static_cast<std::size_t>(piece) * 8 + end]; };
    for (const auto& e : a.necks) {
        ++slot(e.piece_a, e.end_a);
        ++slot(e.piece_b, e.end_b);
    }
    for (std::size_t c = 0; c < a.center.boundaries.size(); ++c)
        if (slot(0, static_cast<int>(c)) != 1) throw std::runtime_error("assemble: unmatched Type2 boundary");
    for (int l = 0; l < k; ++l)
        for (std::size_t c = 0; c < a.copies[l].boundaries.size(); ++c)
            if (slot(1 + l, static_cast<int>(c)) != 1) throw std::runtime_error("assemble: unmatched Type1 boundary");

    a.euler_characteristic = a.center.euler_characteristic;
    for (const auto& c : a.copies) a.euler_characteristic += c.euler_characteristic;
    return a;
}

inline int genus(const GluedAssembly& a) {
    const int chi = a.euler_characteristic;  // necks are annuli, chi contribution 0
    if ((2 - chi) % 2 != 0) throw std::runtime_error("genus: odd Euler defect, assembly invalid");
    return (2 - chi) / 2;
}

// ---------------------------------------------------------------------------
// Curvature deviation on necks (decay-rate measurements)
// ---------------------------------------------------------------------------

struct DeviationReport {
    double sup_annulus = 0.0;            // sup |H - 1| over (-1,1) x S^1
    std::vector<double> band_sups;       // per unit band over the whole window
    double refinement_defect = 0.0;      // relative change under grid doubling
    bool refinement_ok = true;
};

// sup |H - 1| of the blended neck graph over the model, via the exact
// cancellation-free evaluator; the grid only controls the sampling of the
// sup, and a doubled grid must agree within 20%.
inline DeviationReport curvature_deviation(const GluedNeck& neck, int ns_per_period = 32, int ntheta = 64) {
    if (!neck.profile) throw std::invalid_argument("curvature_deviation: neck has no model");
    const double L = neck.half_window;
    auto sup_over = [&](double lo, double hi, int ns, int nt) {
        double sup = 0.0;
        for (int i = 0; i <= ns; ++i) {
            const double s = lo + (hi - lo) * i / ns;
            for (int j = 0; j < nt; ++j) {
                const double th = 2.0 * std::numbers::pi * j / nt;
                const GraphJet g = neck.blended_jet(s, th);
                sup = std::max(sup, std::abs(graph_mean_curvature_deviation(*neck.profile, s + L, th, g)));
            }
        }
        return sup;
    };
    const double period = 2.0 * neck.profile->s_half();
    const int ns_band = std::max(8, static_cast<int>(std::lround(ns_per_period / period)) * 2);
    DeviationReport rep;
    rep.sup_annulus = sup_over(-1.0, 1.0, 4 * ns_band, ntheta);
    const double fine = sup_over(-1.0, 1.0, 8 * ns_band, 2 * ntheta);
    rep.refinement_defect = std::abs(fine - rep.sup_annulus) / std::max(fine, 1e-300);
    rep.refinement_ok = rep.refinement_defect <= 0.20;
    rep.sup_annulus = std::max(rep.sup_annulus, fine);
    const int nbands = static_cast<int>(std::floor(2.0 * L));
    for (int b = 0; b < nbands; ++b) {
        const double lo = -L + b, hi = std::min(-L + b + 1.0, L);
        rep.band_sups.push_back(sup_over(lo, hi, ns_band, ntheta));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Jacobi-field extension residuals across necks
// ---------------------------------------------------------------------------

enum class ExtensionKind { T_a, T_a_perp, T_bar, D };

struct ExtensionReport {
    ExtensionKind kind = ExtensionKind::T_bar;
    double sup_residual_A0 = 0.0;        // max over Y-neck annuli of sup |L Psi|
    double sup_residual_A1 = 0.0;        // max over Z-neck annuli
    double away_residual = 0.0;          // sup |L Psi| sampled away from all annuli
    double sup_field = 0.0;              // sup |Psi| over the assembly windows
    std::vector<double> band_residuals;  // per-band residual along one Y window (T_bar, D)
};

namespace detail {

// Cutoff-commutator residual of a blend of two exact mode-j Jacobi solutions
// v_a(s + L) and v_b(L - s) (times cos(j theta)):
// L Psi = (4 / (tau^2 e^{2 sigma})) (xi'' Delta + 2 xi' Delta') cos(j theta),
// with Delta(s) = v_a(s+L) - v_b(L-s).
struct NeckBlendResidual {
    const DelaunayProfile* prof;
    const BlochMode* mode;
    double L;
    double coeff_a, coeff_b;
    CutoffProfile xi;

    double delta(double s) const { return coeff_a * mode->value(s + L) - coeff_b * mode->value(L - s); }
    double delta_d(double s) const { return coeff_a * mode->derivative(s + L) + coeff_b * mode->derivative(L - s); }

    double residual(double s) const {
        const double xd = xi.d1(s), xdd = xi.d2(s);
        if (xd == 0.0 && xdd == 0.0) return 0.0;
        const ProfileJet j = prof->jet(s + L);
        const double tau = prof->tau();
        const double pref = 4.0 / (tau * tau * std::exp(2.0 * j.sigma));
        return pref * (xdd * delta(s) + 2.0 * xd * delta_d(s));
    }

    double sup_residual(double lo, double hi, int samples = 512) const {
        double sup = 0.0;
        for (int i = 0; i <= samples; ++i) sup = std::max(sup, std::abs(residual(lo + (hi - lo) * i / samples)));
        return sup;
    }
};

}  // namespace detail

// Builds the blended approximate Jacobi field of the requested kind on the
// assembly and reports the cutoff-commutator residuals per annulus. The
// model parts of the two sides of each blend coincide in the common neck
// coordinate (the construction's matching of asymptotics; for kind D this
// uses the shift compensation t = n p_tau), so the residual carries only the
// exponentially decaying correction mismatch. Corrections are exact Floquet
// solutions of the mode-2 equation with fixed coefficients (1, 0.7).
inline ExtensionReport extend_jacobi_field(const GluedAssembly& a, ExtensionKind kind, double tol = 1e-12) {
    ExtensionReport rep;
    rep.kind = kind;
    const double tau = a.solution.tau, tau_bar = a.solution.tau_bar;
    const int n = a.solution.n, m = a.solution.m;
    const auto prof = a.necks.front().neck.profile;                 // tau model (Y)
    const auto prof_bar = a.necks.back().neck.profile;              // taubar model (Z)
    const BlochMode mode = BlochMode::solve(tau, 2, tol);
    const BlochMode mode_bar = BlochMode::solve(tau_bar, 2, tol);
    const double s_tau = prof->s_half(), s_bar = prof_bar->s_half();
    const double c_a = 1.0, c_b = 0.7;

    const detail::NeckBlendResidual resY{prof.get(), &mode, n * s_tau, c_a, c_b, cutoff_xi()};
    const detail::NeckBlendResidual resZ{prof_bar.get(), &mode_bar, m * s_bar, c_a, c_b, cutoff_xi()};

    const bool uses_Y = (kind == ExtensionKind::T_bar || kind == ExtensionKind::D);
    const bool uses_Z = (kind == ExtensionKind::T_bar || kind == ExtensionKind::T_a ||
                         kind == ExtensionKind::T_a_perp);

    if (uses_Y) {
        rep.sup_residual_A0 = resY.sup_residual(-1.0, 1.0);
        const int nbands = 2 * n;
        const double L = n * s_tau;
        for (int b = 0; b < nbands; ++b)
            rep.band_residuals.push_back(resY.sup_residual(-L + b, std::min(-L + b + 1.0, L), 128));
    }
    if (uses_Z) rep.sup_residual_A1 = resZ.sup_residual(-1.0, 1.0);

    // Residual away from the annuli: cutoff derivatives vanish there, and the
    // sides are exact Jacobi fields, so this must be zero.
    rep.away_residual = std::max(uses_Y ? resY.sup_residual(1.5, n * s_tau - 0.5) : 0.0,
                                 uses_Z ? resZ.sup_residual(1.5, m * s_bar - 0.5) : 0.0);

    // Field magnitude over the assembly windows.
    switch (kind) {
        case ExtensionKind::T_a:
        case ExtensionKind::T_a_perp:
        case ExtensionKind::T_bar: {
            // Translation fields: bounded by the model's |c| and |sigma'| sups.
            double sup = 0.0;
            for (int i = 0; i <= 512; ++i) {
                const ProfileJet j = prof->jet(i * 2.0 * s_tau / 512.0);
                sup = std::max(sup, std::max(std::abs(j.c), std::abs(j.dsigma)));
            }
            rep.sup_field = sup;
            break;
        }
        case ExtensionKind::D: {
            const DVariationField phiD = DVariationField::solve(*prof, tol);
            double sup = 0.0;
            for (int i = 0; i <= 2048; ++i)
                sup = std::max(sup, std::abs(phiD.value(i * 2.0 * n * s_tau / 2048.0)));
            rep.sup_field = sup;
            break;
        }
    }
    return rep;
}

}  // namespace cmc
