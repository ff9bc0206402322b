#pragma once

// Type-1 and Type-2 building blocks represented by their end asymptotics and
// symmetries: the balancing formula, end descriptors (Delaunay model +
// axial offset + decaying graph), truncation bookkeeping, and the weighted
// norms used to classify decaying/growing fields on ends.
//
// The true graph functions and offsets of the blocks are existence-theoretic;
// they enter only through the DFunctions / EndGraph model interfaces below.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "cmc/delaunay.hpp"
#include "cmc/graph_deviation.hpp"
#include "cmc/jacobi.hpp"

namespace cmc {

// The three smooth maps tau -> d-offset, represented as polynomials in tau.
// Default model: d0 = d0bar = 1, d1 = 1/2 (constants).
struct DFunctions {
    std::vector<double> d0{1.0};
    std::vector<double> d0bar{1.0};
    std::vector<double> d1{0.5};

    static double eval_poly(const std::vector<double>& c, double tau) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * tau + *it;
        return acc;
    }
    double eval_d0(double tau) const { return eval_poly(d0, tau); }
    double eval_d0bar(double tau) const { return eval_poly(d0bar, tau); }
    double eval_d1(double tau) const { return eval_poly(d1, tau); }
};

// Synthetic stand-in for the decaying end-graph functions: a finite
// theta-Fourier series with lowest mode >= 2, times a decaying s-profile.
// When a BlochMode is attached, the s-profile is the exact Floquet-decaying
// solution (so the graph is an exact Jacobi field of the model end); the
// plain exponential fallback is used where only magnitudes matter.
struct EndGraph {
    struct Mode {
        int j = 2;
        double cos_coeff = 1.0;
        double sin_coeff = 0.0;
    };
    double amplitude = 0.0;
    double rate = 0.0;                       // decay rate gamma of the s-profile
    std::vector<Mode> modes{Mode{}};
    std::shared_ptr<const BlochMode> bloch;  // optional exact radial profile

    void validate() const {
        if (amplitude != 0.0 && rate <= 0.0)
            throw std::invalid_argument("EndGraph: decay rate must be positive");
        for (const auto& m : modes)
            if (m.j < 2) throw std::invalid_argument("EndGraph: angular modes must be >= 2");
    }

    double radial(double s) const { return bloch ? bloch->value(s) : std::exp(-rate * s); }
    double radial_d(double s) const { return bloch ? bloch->derivative(s) : -rate * std::exp(-rate * s); }
    double radial_dd(double s) const {
        return bloch ? bloch->second_derivative(s) : rate * rate * std::exp(-rate * s);
    }

    double value(double s, double theta) const {
        double ang = 0.0;
        for (const auto& m : modes) ang += m.cos_coeff * std::cos(m.j * theta) + m.sin_coeff * std::sin(m.j * theta);
        return amplitude * radial(s) * ang;
    }

    GraphJet jet(double s, double theta) const {
        GraphJet g;
        double a = 0.0, at = 0.0, att = 0.0;
        for (const auto& m : modes) {
            const double cj = std::cos(m.j * theta), sj = std::sin(m.j * theta);
            a += m.cos_coeff * cj + m.sin_coeff * sj;
            at += m.j * (-m.cos_coeff * sj + m.sin_coeff * cj);
            att += -double(m.j) * m.j * (m.cos_coeff * cj + m.sin_coeff * sj);
        }
        const double r = radial(s), rd = radial_d(s), rdd = radial_dd(s);
        g.w = amplitude * r * a;
        g.ws = amplitude * rd * a;
        g.wt = amplitude * r * at;
        g.wss = amplitude * rdd * a;
        g.wst = amplitude * rd * at;
        g.wtt = amplitude * r * att;
        return g;
    }
};

// One Delaunay-asymptotic end: the positioned model surface, the signed
// axial offset (the d-value), the outward direction, the decaying graph and
// its guaranteed decay rate gamma_{tau,2}.
struct EndDescriptor {
    DelaunaySurface model;
    double axial_offset = 0.0;
    Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
    EndGraph graph;
    double decay_rate = 0.0;

    void validate() const {
        if (!model.profile) throw std::invalid_argument("EndDescriptor: missing model profile");
        if (std::abs(direction.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("EndDescriptor: direction must be a unit vector");
        if (std::abs(std::abs(direction.dot(model.axis.normalized())) - 1.0) > 1e-10)
            throw std::invalid_argument("EndDescriptor: direction must equal the model axis up to sign");
        graph.validate();
        if (graph.amplitude != 0.0 && graph.rate < decay_rate - 1e-12 && !graph.bloch)
            throw std::invalid_argument("EndDescriptor: graph decays slower than the declared rate");
    }
};

// A finite group of orthogonal maps, stored by generators.
struct SymmetryGroup {
    std::vector<Eigen::Matrix3d> generators;

    // Closure of the generated set (orders here are tiny: <= 2k).
    std::vector<Eigen::Matrix3d> elements(double tol = 1e-12) const {
        std::vector<Eigen::Matrix3d> elems{Eigen::Matrix3d::Identity()};
        auto contains = [&](const Eigen::Matrix3d& m) {
            for (const auto& e : elems)
                if ((e - m).cwiseAbs().maxCoeff() < tol) return true;
            return false;
        };
        bool grew = true;
        while (grew) {
            grew = false;
            const auto snapshot = elems;
            for (const auto& a : snapshot)
                for (const auto& g : generators) {
                    const Eigen::Matrix3d m = g * a;
                    if (!contains(m)) {
                        if (elems.size() > 256) throw std::runtime_error("SymmetryGroup: closure did not terminate");
                        elems.push_back(m);
                        grew = true;
                    }
                }
        }
        return elems;
    }

    void check_orthogonal(double tol = 1e-12) const {
        for (const auto& g : generators)
            if ((g * g.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
                throw std::invalid_argument("SymmetryGroup: generator is not orthogonal");
    }
};

struct BuildingBlock {
    enum class Kind { Type1, Type2 };
    Kind kind = Kind::Type2;
    int k = 3;
    double tau = 0.0;
    double tau_bar = 0.0;   // Type1 only
    double alpha = 0.0;     // Type1 only: alpha_k = pi/2 - pi/k
    std::vector<EndDescriptor> ends;  // Type1: [E0, E1, E-1]; Type2: ends 0..k-1
    SymmetryGroup symmetry;
};

// ---------------------------------------------------------------------------
// Balancing
// ---------------------------------------------------------------------------

// Solves tau|tau| + 2 cos(alpha) taubar|taubar| = 0 for taubar; the signs of
// tau and taubar are opposite.
inline double solve_balancing(double tau, double alpha) {
    if (tau == 0.0) throw std::invalid_argument("solve_balancing: tau must be nonzero");
    if (!(alpha > 0.0 && alpha < std::numbers::pi / 2))
        throw std::invalid_argument("solve_balancing: alpha must lie in (0, pi/2)");
    const double sign = tau > 0 ? 1.0 : -1.0;
    return -sign * std::abs(tau) / std::sqrt(2.0 * std::cos(alpha));
}

// The balancing vector sum_l tau_l |tau_l| a_l; zero for a valid CMC end
// configuration.
inline Eigen::Vector3d check_balancing(const std::vector<std::pair<double, Eigen::Vector3d>>& ends) {
    if (ends.empty()) throw std::invalid_argument("check_balancing: empty end list");
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (const auto& [t, a] : ends) {
        if (std::abs(a.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("check_balancing: non-unit end direction");
        acc += t * std::abs(t) * a;
    }
    return acc;
}

inline Eigen::Vector3d check_balancing(const BuildingBlock& block) {
    std::vector<std::pair<double, Eigen::Vector3d>> ends;
    for (std::size_t i = 0; i < block.ends.size(); ++i) {
        const double t = (block.kind == BuildingBlock::Kind::Type1 && i > 0) ? block.tau_bar : block.tau;
        ends.emplace_back(t, block.ends[i].direction);
    }
    return check_balancing(ends);
}

// ---------------------------------------------------------------------------
// Block builders
// ---------------------------------------------------------------------------

inline double alpha_k(int k) {
    if (k < 3) throw std::invalid_argument("alpha_k: k must be >= 3");
    return std::numbers::pi / 2 - std::numbers::pi / k;
}

namespace detail {

inline Eigen::Matrix3d reflection(int axis) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(axis, axis) = -1.0;
    return m;
}

inline Eigen::Matrix3d rotation_z(double angle) {
    return Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace detail

// Three-ended dihedrally symmetric block: E0 asymptotic to a graph over
// D_tau^{e2} - d0 e2 (direction -e2), E1 over D_taubar^{a_alpha} + d1 a_alpha
// with a_alpha = -sin(alpha) e1 - cos(alpha) e2, and E-1 the S1-mirror of E1.
// alpha = alpha_k and taubar from the balancing formula.
inline BuildingBlock make_type1(double tau, int k, const DFunctions& d = {}, const EndGraph& graph_model = {},
                                double tol = 1e-12) {
    DelaunayParameter p(tau);
    if (p.cylinder()) throw std::invalid_argument("make_type1: tau = 1 has no Delaunay asymptotics");
    BuildingBlock b;
    b.kind = BuildingBlock::Kind::Type1;
    b.k = k;
    b.tau = tau;
    b.alpha = alpha_k(k);
    b.tau_bar = solve_balancing(tau, b.alpha);
    b.symmetry.generators = {detail::reflection(0), detail::reflection(2)};  // S1, S3

    auto prof = std::make_shared<const DelaunayProfile>(DelaunayProfile::solve(tau, 4, 512, tol));
    auto prof_bar = std::make_shared<const DelaunayProfile>(DelaunayProfile::solve(b.tau_bar, 4, 512, tol));
    const double gamma = indicial_root(tau, 2, tol);
    const double gamma_bar = indicial_root(b.tau_bar, 2, tol);

    const Eigen::Vector3d e2 = Eigen::Vector3d::UnitY();
    const Eigen::Vector3d a(-std::sin(b.alpha), -std::cos(b.alpha), 0.0);
    const Eigen::Vector3d a_mirror(std::sin(b.alpha), -std::cos(b.alpha), 0.0);
    const double d0 = d.eval_d0(tau), d1 = d.eval_d1(tau);

    EndGraph g = graph_model;
    if (g.amplitude != 0.0 && g.rate == 0.0 && !g.bloch) g.rate = gamma;
    EndGraph g_bar = graph_model;
    if (g_bar.amplitude != 0.0 && g_bar.rate == 0.0 && !g_bar.bloch) g_bar.rate = gamma_bar;

    EndDescriptor e0;
    e0.model = DelaunaySurface{prof, e2, -d0 * e2};
    e0.axial_offset = -d0;
    e0.direction = -e2;
    e0.graph = g;
    e0.decay_rate = gamma;

    EndDescriptor e1;
    e1.model = DelaunaySurface{prof_bar, a, d1 * a};
    e1.axial_offset = d1;
    e1.direction = a;
    e1.graph = g_bar;
    e1.decay_rate = gamma_bar;

    EndDescriptor em1 = e1;
    em1.model.axis = a_mirror;
    em1.model.origin = d1 * a_mirror;
    em1.direction = a_mirror;

    b.ends = {e0, e1, em1};
    for (auto& e : b.ends) e.validate();
    if (check_balancing(b).norm() > 1e-12)
        throw std::runtime_error("make_type1: balancing residual exceeds 1e-12");
    return b;
}

// k-ended cyclically symmetric block: end l asymptotic to a graph over
// R_{2 pi l / k} (D_tau^{e2} + d0bar e2), direction R_{2 pi l / k} e2.
inline BuildingBlock make_type2(double tau, int k, const DFunctions& d = {}, const EndGraph& graph_model = {},
                                double tol = 1e-12) {
    DelaunayParameter p(tau);
    if (p.cylinder()) throw std::invalid_argument("make_type2: tau = 1 has no Delaunay asymptotics");
    if (k < 3) throw std::invalid_argument("make_type2: k must be >= 3");
    BuildingBlock b;
    b.kind = BuildingBlock::Kind::Type2;
    b.k = k;
    b.tau = tau;
    b.symmetry.generators = {detail::rotation_z(2.0 * std::numbers::pi / k)};

    auto prof = std::make_shared<const DelaunayProfile>(DelaunayProfile::solve(tau, 4, 512, tol));
    const double gamma = indicial_root(tau, 2, tol);
    const double d0bar = d.eval_d0bar(tau);
    EndGraph g = graph_model;
    if (g.amplitude != 0.0 && g.rate == 0.0 && !g.bloch) g.rate = gamma;

    for (int l = 0; l < k; ++l) {
        const Eigen::Matrix3d R = detail::rotation_z(2.0 * std::numbers::pi * l / k);
        const Eigen::Vector3d dir = R * Eigen::Vector3d::UnitY();
        EndDescriptor e;
        e.model = DelaunaySurface{prof, dir, d0bar * dir};
        e.axial_offset = d0bar;
        e.direction = dir;
        e.graph = g;
        e.decay_rate = gamma;
        e.validate();
        b.ends.push_back(e);
    }
    if (check_balancing(b).norm() > 1e-12)
        throw std::runtime_error("make_type2: balancing residual exceeds 1e-12");
    return b;
}

// ---------------------------------------------------------------------------
// Truncation
// ---------------------------------------------------------------------------

struct BoundaryCircle {
    int end_index = 0;
    double cut = 0.0;  // s-value of the cut on that end
};

// Bookkeeping for a truncated block: the genus-0 core with its ends cut at
// finite parameter values; chi = 2 - (number of boundary circles).
struct TruncatedBlock {
    BuildingBlock block;
    std::vector<BoundaryCircle> boundaries;
    int euler_characteristic = 0;
};

inline TruncatedBlock truncate(const BuildingBlock& block, double s0, double s1) {
    if (s0 <= 0.0 || s1 <= 0.0) throw std::invalid_argument("truncate: cuts must be positive");
    TruncatedBlock t;
    t.block = block;
    for (int i = 0; i < static_cast<int>(block.ends.size()); ++i) {
        const bool outer = block.kind == BuildingBlock::Kind::Type1 && i > 0;
        t.boundaries.push_back(BoundaryCircle{i, outer ? s1 : s0});
    }
    t.euler_characteristic = 2 - static_cast<int>(t.boundaries.size());
    return t;
}

// ---------------------------------------------------------------------------
// Weighted norms
// ---------------------------------------------------------------------------

// Discrete version of the weighted C^r norm sup_s e^{-mu s} |f|_{C^r([s,s+1] x S^1)}
// for a field sampled on a uniform [0,S] x S^1 grid. When the per-band
// contributions grow toward the far end of the window (the field is not in
// the mu-weighted space), returns +infinity as a sentinel.
inline double weighted_norm(const ScalarField& field, double S, double mu, int r) {
    if (r < 0 || r > 2) throw std::invalid_argument("weighted_norm: derivative order r must be in {0,1,2}");
    if (field.ns < 8 || field.ntheta < 4 || S <= 1.0)
        throw std::invalid_argument("weighted_norm: field too small (need S > 1 and a dense grid)");
    const double hs = S / (field.ns - 1);
    const double ht = 2.0 * std::numbers::pi / field.ntheta;
    const int bands = static_cast<int>(std::floor(S));
    std::vector<double> band_sup(bands, 0.0);
    auto wrap = [&](int j) { return (j % field.ntheta + field.ntheta) % field.ntheta; };
    for (int i = 0; i < field.ns; ++i) {
        const double s = i * hs;
        int band = std::min(static_cast<int>(s), bands - 1);
        for (int j = 0; j < field.ntheta; ++j) {
            double m = std::abs(field.at(i, j));
            if (r >= 1 && i >= 1 && i <= field.ns - 2) {
                m = std::max(m, std::abs((field.at(i + 1, j) - field.at(i - 1, j)) / (2.0 * hs)));
                m = std::max(m, std::abs((field.at(i, wrap(j + 1)) - field.at(i, wrap(j - 1))) / (2.0 * ht)));
            }
            if (r >= 2 && i >= 1 && i <= field.ns - 2) {
                m = std::max(m, std::abs((field.at(i + 1, j) - 2.0 * field.at(i, j) + field.at(i - 1, j)) / (hs * hs)));
                m = std::max(m, std::abs((field.at(i, wrap(j + 1)) - 2.0 * field.at(i, j) + field.at(i, wrap(j - 1))) /
                                         (ht * ht)));
            }
            band_sup[band] = std::max(band_sup[band], m);
        }
    }
    double sup = 0.0;
    for (int b = 0; b < bands; ++b) sup = std::max(sup, std::exp(-mu * b) * band_sup[b]);
    // Growth sentinel: if the weighted contributions still grow at the far
    // end of the window, the field is not in the mu-class.
    const double head = std::max(std::exp(-mu * 0.0) * band_sup[0],
                                 bands > 1 ? std::exp(-mu * 1.0) * band_sup[1] : 0.0);
    const double tail = std::exp(-mu * (bands - 1)) * band_sup[bands - 1];
    if (tail > head * (1.0 + 1e-9) && tail >= sup * (1.0 - 1e-12))
        return std::numeric_limits<double>::infinity();
    return sup;
}

}  // namespace cmc
