#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <numbers>

#include "cmc/delaunay.hpp"
#include "cmc/patch.hpp"

using namespace cmc;
using Catch::Matchers::WithinAbs;

namespace {

// Unit sphere, oriented so the discrete normal points inward (H = +1).
Patch sphere_patch(int ns, int ntheta) {
    return make_patch(
        [](double s, double th) {
            return Eigen::Vector3d(std::sin(s) * std::cos(th), -std::sin(s) * std::sin(th), std::cos(s));
        },
        0.4, std::numbers::pi - 0.4, ns, ntheta);
}

double sup_H_minus(const Patch& p, double target) {
    const ScalarField H = mean_curvature(p);
    double sup = 0.0;
    for (double v : H.v) sup = std::max(sup, std::abs(v - target));
    return sup;
}

}  // namespace

TEST_CASE("sphere mean curvature") {
    CHECK(sup_H_minus(sphere_patch(256, 256), 1.0) < 1e-4);
    // Second-order convergence.
    const double e1 = sup_H_minus(sphere_patch(64, 64), 1.0);
    const double e2 = sup_H_minus(sphere_patch(128, 128), 1.0);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("cylinder patch mean curvature") {
    auto prof = std::make_shared<const DelaunayProfile>(DelaunayProfile::solve(1.0));
    DelaunaySurface surf{prof};
    const Patch p = make_delaunay_patch(surf, 0.0, 4.0, 65, 128);
    CHECK(sup_H_minus(p, 1.0) < 2e-3);
}

TEST_CASE("delaunay patches are CMC and isothermal discretely") {
    for (double tau : {0.5, -0.5}) {
        auto prof = std::make_shared<const DelaunayProfile>(DelaunayProfile::solve(tau));
        DelaunaySurface surf{prof};
        const double period = 2.0 * prof->s_half();
        const Patch p = make_delaunay_patch(surf, 0.0, period, 1025, 1024);
        INFO("tau = " << tau);
        CHECK(sup_H_minus(p, 1.0) < 1e-4);

        const auto ff = fundamental_forms(p);
        double iso = 0.0;
        for (std::size_t i = 0; i < ff.E.v.size(); ++i) {
            iso = std::max(iso, std::abs(ff.E.v[i] - ff.G.v[i]) / ff.E.v[i]);
            iso = std::max(iso, std::abs(ff.F.v[i]) / ff.E.v[i]);
        }
        CHECK(iso < 1e-4);

        // Second-order convergence of the curvature error.
        const double e1 = sup_H_minus(make_delaunay_patch(surf, 0.0, period, 257, 256), 1.0);
        const double e2 = sup_H_minus(make_delaunay_patch(surf, 0.0, period, 513, 512), 1.0);
        CHECK(e1 / e2 > 3.5);
        CHECK(e1 / e2 < 4.5);
    }
}

TEST_CASE("normal graph basics") {
    auto prof = std::make_shared<const DelaunayProfile>(DelaunayProfile::solve(0.5));
    DelaunaySurface surf{prof};
    const Patch base = make_delaunay_patch(surf, 0.0, 8.0, 129, 64);

    // Zero graph: identical positions bitwise.
    ScalarField zero(base.ns, base.ntheta);
    const Patch same = normal_graph(base, zero);
    bool identical = true;
    for (std::size_t i = 0; i < base.pos.size(); ++i) identical &= (base.pos[i] == same.pos[i]);
    CHECK(identical);

    // Concentric sphere: w = c shifts radius along the inward normal.
    const Patch sph = sphere_patch(128, 128);
    ScalarField c(sph.ns, sph.ntheta);
    for (auto& v : c.v) v = -0.5;  // inward normal, so w = -0.5 gives radius 1.5
    const Patch big = normal_graph(sph, c);
    CHECK(sup_H_minus(big, 1.0 / 1.5) < 2e-3);

    // Small decaying graph remains immersed.
    ScalarField w(base.ns, base.ntheta);
    for (int i = 0; i < base.ns; ++i)
        for (int j = 0; j < base.ntheta; ++j)
            w.at(i, j) = 1e-3 * std::exp(-base.s_at(i)) * std::cos(2.0 * base.theta_at(j));
    CHECK_NOTHROW(mean_curvature(normal_graph(base, w)));
}

TEST_CASE("degenerate patches are rejected") {
    // A patch collapsed to a line has degenerate tangents.
    CHECK_THROWS(mean_curvature(make_patch(
        [](double s, double) { return Eigen::Vector3d(s, 0.0, 0.0); }, 0.0, 1.0, 16, 16)));
}
