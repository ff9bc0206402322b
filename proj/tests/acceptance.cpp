// Acceptance suite: one pass/fail line per numbered criterion, nonzero exit
// if any fails. Each check exercises the library through its public API only.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cmc/blocks.hpp"
#include "cmc/delaunay.hpp"
#include "cmc/gluing.hpp"
#include "cmc/graph_deviation.hpp"
#include "cmc/jacobi.hpp"
#include "cmc/patch.hpp"

using namespace cmc;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

const std::vector<double> kTauGrid{-1.0, -0.5, -0.2, 0.2, 0.5, 0.9};

std::shared_ptr<const DelaunayProfile> profile(double tau) {
    static std::map<double, std::shared_ptr<const DelaunayProfile>> cache;
    auto it = cache.find(tau);
    if (it == cache.end())
        it = cache.emplace(tau, std::make_shared<const DelaunayProfile>(DelaunayProfile::solve(tau))).first;
    return it->second;
}

// --- 1: first-integral residual of the profile ODE --------------------------
void criterion_1() {
    double worst = 0.0;
    for (double tau : kTauGrid) worst = std::max(worst, profile(tau)->energy_residual());
    report(1, worst <= 1e-8, "profile energy identity on the tau grid", fmt("max residual %.2e", worst));
}

// --- 2: period by two independent routes ------------------------------------
void criterion_2() {
    double worst = 0.0;
    for (double tau : kTauGrid) worst = std::max(worst, profile(tau)->period_defect());
    const double t1 = std::abs(physical_period(1.0) - 0.5 * std::numbers::pi);
    report(2, worst <= 1e-6 && t1 <= 1e-8, "period: axial dual route and cylinder limit",
           fmt("max rel defect %.2e, |T(1) - pi/2| %.2e", worst, t1));
}

// --- 3: monotonicity of the physical period ---------------------------------
void criterion_3() {
    const double h = 1e-5;
    int checked = 0;
    bool ok = true;
    for (int branch = 0; branch < 2; ++branch) {
        for (int i = 0; i < 21; ++i) {
            const double t = 0.05 + 0.9 * i / 20.0;
            const double tau = branch ? -t : t;
            const double d = (physical_period(tau + h) - physical_period(tau - h)) / (2.0 * h);
            ok = ok && d > 0.0;
            ++checked;
        }
    }
    report(3, ok && checked >= 40, "dT/dtau > 0 on both branches", fmt("%d central-difference samples", checked));
}

// --- 4: discrete CMC validation ----------------------------------------------
void criterion_4() {
    bool ok = true;
    std::string detail;
    for (double tau : {0.5, -0.5}) {
        DelaunaySurface surf{profile(tau)};
        const double period = 2.0 * surf.profile->s_half();
        auto sup = [&](int ns, int nt) {
            const ScalarField H = mean_curvature(make_delaunay_patch(surf, 0.0, period, ns, nt));
            double m = 0.0;
            for (double v : H.v) m = std::max(m, std::abs(v - 1.0));
            return m;
        };
        const double e_half = sup(513, 512);
        const double e_def = sup(1025, 1024);
        const double ratio = e_half / e_def;
        ok = ok && e_def <= 1e-4 && ratio >= 3.5 && ratio <= 4.5;
        detail += fmt("tau=%+.1f: sup %.2e ratio %.2f  ", tau, e_def, ratio);
    }
    report(4, ok, "sup|H-1| at default grid with second-order doubling", detail);
}

// --- 5: geometric Jacobi fields are in the kernel ----------------------------
void criterion_5() {
    const Eigen::Vector3d dirs[3] = {Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitX(),
                                     Eigen::Vector3d::UnitY()};
    double worst = 0.0;
    for (double tau : {0.5, -0.5}) {
        const auto prof = profile(tau);
        const double sh = prof->s_half();
        DelaunayGrid grid{prof, -2.0 * sh, 2.0 * sh, 4097, 64};
        auto resid = [&](const ScalarField& f) {
            double m = 0.0;
            for (double v : jacobi_apply(grid, f).v) m = std::max(m, std::abs(v));
            return m;
        };
        for (const auto& e : dirs) {
            worst = std::max(worst, resid(sample_translation_field(grid, e).values));
            if (e.z() < 0.5) worst = std::max(worst, resid(sample_rotation_field(grid, e).values));
        }
    }
    report(5, worst <= 1e-5, "translation and rotation fields annihilated", fmt("max residual %.2e", worst));
}

// --- 6: indicial roots -------------------------------------------------------
void criterion_6() {
    const std::vector<double> taus{-0.8, -0.5, -0.2, 0.2, 0.5, 0.9};
    bool ok = true;
    double worst_det = 0.0, worst_low = 0.0, min_g2 = 1e300;
    for (double tau : taus) {
        for (int j : {0, 1, 2}) {
            const FloquetData fd = monodromy(tau, j);
            worst_det = std::max(worst_det, fd.det_defect);
            if (j < 2)
                worst_low = std::max(worst_low, fd.gamma);
            else
                min_g2 = std::min(min_g2, fd.gamma);
        }
    }
    ok = worst_low <= 1e-6 && min_g2 > 0.0 && worst_det <= 1e-8;
    report(6, ok, "gamma_0, gamma_1 vanish, gamma_2 > 0, unit Wronskian",
           fmt("max gamma_{0,1} %.2e, min gamma_2 %.3f, max |det-1| %.2e", worst_low, min_g2, worst_det));
}

// --- 7: shift identity of the parameter variation ----------------------------
void criterion_7() {
    bool ok = true;
    std::string detail;
    for (double tau : {0.5, -0.5}) {
        const auto prof = profile(tau);
        DelaunayGrid grid{prof, 0.0, 4.0 * prof->s_half(), 257, 16};
        const VariationResult r = delaunay_variation_field(grid, 1e-5);
        ok = ok && r.shift_residual <= 1e-6 && std::abs(r.p_tau) > 1e-6;
        detail += fmt("tau=%+.1f: residual %.2e p %.4f  ", tau, r.shift_residual, r.p_tau);
    }
    report(7, ok, "variation field shift identity with p_tau extracted", detail);
}

namespace jets {

// Random low-mode trigonometric graph jets for the linearization checks.
struct RandomJet {
    double a, b;
    int j1, j2;

    GraphJet operator()(double s, double th) const {
        GraphJet g;
        const double c1 = std::cos(j1 * th), s1 = std::sin(j1 * th);
        const double c2 = std::cos(j2 * th), s2 = std::sin(j2 * th);
        const double u = std::sin(s), du = std::cos(s);
        const double v = std::cos(0.5 * s), dv = -0.5 * std::sin(0.5 * s);
        g.w = a * u * c1 + b * v * s2;
        g.ws = a * du * c1 + b * dv * s2;
        g.wt = -a * j1 * u * s1 + b * j2 * v * c2;
        g.wss = -a * u * c1 - 0.25 * b * v * s2;
        g.wst = -a * j1 * du * s1 + b * j2 * dv * c2;
        g.wtt = -a * j1 * j1 * u * c1 - b * j2 * j2 * v * s2;
        return g;
    }
};

RandomJet random_jet(std::mt19937& rng) {
    std::uniform_real_distribution<double> amp(0.3, 1.0);
    std::uniform_int_distribution<int> mode(2, 4);
    return RandomJet{amp(rng), amp(rng), mode(rng), mode(rng)};
}

}  // namespace jets

// --- 8: linearization and quadratic remainder --------------------------------
void criterion_8() {
    const auto prof = profile(0.5);
    DelaunayGrid grid{prof, -prof->s_half(), prof->s_half(), 257, 64};
    std::mt19937 rng(20240817);
    bool ok = true;
    double worst_lo = 1e300, worst_hi = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto w = jets::random_jet(rng);
        const auto rep = linearization_check(grid, w, {1e-3, 5e-4});
        const double ratio = rep.defect[0] / rep.defect[1];
        worst_lo = std::min(worst_lo, ratio);
        worst_hi = std::max(worst_hi, ratio);
        ok = ok && ratio >= 3.5 && ratio <= 4.5;
    }
    // Quadratic bound on differences of the remainder for random pairs.
    double min_expo = 1e300;
    for (int trial = 0; trial < 20; ++trial) {
        const auto w1 = jets::random_jet(rng);
        const auto w2 = jets::random_jet(rng);
        auto qdiff = [&](double eps) {
            double sup = 0.0;
            const ScalarField f1 = grid.sample([&](double s, double th) { return w1(s, th).w; });
            const ScalarField f2 = grid.sample([&](double s, double th) { return w2(s, th).w; });
            const ScalarField L1 = jacobi_apply(grid, f1), L2 = jacobi_apply(grid, f2);
            for (int i = 2; i < grid.ns - 2; ++i) {
                for (int j = 0; j < grid.ntheta; ++j) {
                    const double s = grid.s_at(i), th = grid.theta_at(j);
                    auto q = [&](const jets::RandomJet& w, const ScalarField& L) {
                        GraphJet gj = w(s, th);
                        gj.w *= eps; gj.ws *= eps; gj.wt *= eps;
                        gj.wss *= eps; gj.wst *= eps; gj.wtt *= eps;
                        return graph_mean_curvature_deviation(*prof, s, th, gj) - 0.5 * eps * L.at(i, j);
                    };
                    sup = std::max(sup, std::abs(q(w1, L1) - q(w2, L2)));
                }
            }
            return sup;
        };
        const double expo = std::log2(qdiff(1e-3) / qdiff(5e-4));
        min_expo = std::min(min_expo, expo);
    }
    ok = ok && min_expo >= 1.9;
    report(8, ok, "linearization defect is quadratic in the graph size",
           fmt("ratios in [%.2f, %.2f], min pair exponent %.3f", worst_lo, worst_hi, min_expo));
}

// --- 9: decay of the neck curvature deviation --------------------------------
void criterion_9() {
    const auto t0 = std::chrono::steady_clock::now();
    const double tau = 0.5;
    const auto prof = profile(tau);
    const double s_tau = prof->s_half();
    const double gamma = indicial_root(tau, 2);
    auto bloch = std::make_shared<const BlochMode>(BlochMode::solve(tau, 2));

    auto end_with = [&](const Eigen::Vector3d& dir, double amp) {
        EndDescriptor e;
        e.model = DelaunaySurface{prof, dir, Eigen::Vector3d::Zero()};
        e.direction = dir;
        e.graph.amplitude = amp;
        e.graph.rate = gamma;
        e.graph.bloch = bloch;
        e.decay_rate = gamma;
        return e;
    };
    std::vector<double> ns, logs;
    for (int n = 4; n <= 12; ++n) {
        const GluedNeck neck = glue_neck(end_with(Eigen::Vector3d::UnitY(), 1.0),
                                         end_with(-Eigen::Vector3d::UnitY(), 0.7), n * s_tau);
        const DeviationReport rep = curvature_deviation(neck);
        ns.push_back(n);
        logs.push_back(std::log(rep.sup_annulus));
    }
    const LineFit fit = fit_line(ns, logs);
    const double target = -gamma * s_tau;
    const double rel = std::abs(fit.slope - target) / std::abs(target);
    const double secs =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count() / 1e3;
    const bool ok = rel <= 0.10 && fit.r_squared >= 0.98 && secs < 120.0;
    report(9, ok, "neck deviation decays at the mode-2 rate",
           fmt("slope %.4f vs %.4f (rel %.3f), R^2 %.5f, %.1f s", fit.slope, target, rel, fit.r_squared, secs));
}

// --- 10: extension residual decay and variation growth -----------------------
void criterion_10() {
    const double tau = 0.5;
    const auto prof = profile(tau);
    const double s_tau = prof->s_half();
    const double gamma = indicial_root(tau, 2);
    const BlochMode mode = BlochMode::solve(tau, 2);

    std::vector<double> ns, logs;
    for (int n = 4; n <= 12; ++n) {
        const detail::NeckBlendResidual res{prof.get(), &mode, n * s_tau, 1.0, 0.7, cutoff_xi()};
        ns.push_back(n);
        logs.push_back(std::log(res.sup_residual(-1.0, 1.0)));
    }
    const LineFit fit = fit_line(ns, logs);
    const double target = -gamma * s_tau;
    const double rel = std::abs(fit.slope - target) / std::abs(target);

    // The extended parameter-variation field grows linearly with the window.
    const DVariationField phiD = DVariationField::solve(*prof);
    std::vector<double> ln, ls;
    for (int n = 4; n <= 12; ++n) {
        double sup = 0.0;
        for (int i = 0; i <= 2048; ++i) sup = std::max(sup, std::abs(phiD.value(i * 2.0 * n * s_tau / 2048.0)));
        ln.push_back(std::log(double(n)));
        ls.push_back(std::log(sup));
    }
    const LineFit growth = fit_line(ln, ls);
    const bool ok = rel <= 0.15 && growth.slope >= 0.8 && growth.slope <= 1.2;
    report(10, ok, "field-extension residual decay and variation growth",
           fmt("residual slope %.4f vs %.4f (rel %.3f), growth exponent %.3f", fit.slope, target, rel,
               growth.slope));
}

// --- 11: matching solutions for every large n --------------------------------
void criterion_11() {
    const DFunctions d;
    bool ok = true;
    std::string detail;
    for (int k : {3, 6}) {
        int n_min = -1;
        for (int n = 1; n <= 40 && n_min < 0; ++n)
            if (!solve_matching(n, k, 0.2, 0.8, d).empty()) n_min = n;
        if (n_min < 0) {
            ok = false;
            detail += fmt("k=%d: no solutions  ", k);
            continue;
        }
        double worst = 0.0;
        for (int n = n_min; n <= n_min + 10; ++n) {
            const auto sols = solve_matching(n, k, 0.2, 0.8, d);
            if (sols.empty()) {
                ok = false;
                break;
            }
            for (const auto& s : sols) {
                const LambdaGamma lg = lambda_gamma(s.tau, k, d);
                worst = std::max(worst, std::abs(lg.Lambda + s.n * lg.Gamma - s.m));
            }
        }
        ok = ok && worst <= 1e-10;
        // Monotonicity of Lambda + n Gamma in tau, sampled on the interval.
        bool mono = true;
        double prev = -1e300;
        for (int i = 0; i <= 60; ++i) {
            const double t = 0.2 + 0.6 * i / 60.0;
            const LambdaGamma lg = lambda_gamma(t, k, d);
            const double g = lg.Lambda + n_min * lg.Gamma;
            mono = mono && g > prev;
            prev = g;
        }
        ok = ok && mono;
        detail += fmt("k=%d: n_min %d, max |L+nG-m| %.1e, monotone %s  ", k, n_min, worst, mono ? "yes" : "no");
    }
    report(11, ok, "matching solutions exist for 11 consecutive n", detail);
}

// --- 12: balancing ------------------------------------------------------------
void criterion_12() {
    bool ok = true;
    // k = 6 closed form.
    for (double tau : {0.1, 0.35, 0.62, 0.9})
        ok = ok && std::abs(solve_balancing(tau, alpha_k(6)) + tau) <= 1e-12;
    // Defining identity on random parameters.
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> ut(0.02, 0.98), ua(0.05, std::numbers::pi / 2 - 0.05);
    double worst_bla = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = ut(rng), al = ua(rng);
        const double tb = solve_balancing(t, al);
        worst_bla = std::max(worst_bla, std::abs(t * std::abs(t) + 2.0 * std::cos(al) * tb * std::abs(tb)));
    }
    ok = ok && worst_bla <= 1e-15;
    // Force balance of every constructed block.
    double worst_bf = 0.0;
    for (int k = 3; k <= 8; ++k) {
        for (double t : {0.3, 0.6}) {
            worst_bf = std::max(worst_bf, check_balancing(make_type1(t, k)).norm());
            worst_bf = std::max(worst_bf, check_balancing(make_type2(t, k)).norm());
        }
    }
    ok = ok && worst_bf <= 1e-12;
    report(12, ok, "balancing identity and block force balance",
           fmt("max identity residual %.1e, max block residual %.1e", worst_bla, worst_bf));
}

// --- 13: topology of the assembly ----------------------------------------------
void criterion_13() {
    const DFunctions d;
    bool ok = true;
    std::string detail;
    std::mt19937 rng(1313);
    std::uniform_real_distribution<double> us(-1.0, 1.0);
    for (int k = 3; k <= 8; ++k) {
        std::vector<MatchingSolution> sols;
        for (int n = 1; n <= 40 && sols.empty(); ++n) sols = solve_matching(n, k, 0.2, 0.8, d);
        if (sols.empty()) {
            ok = false;
            detail += fmt("k=%d: no matching  ", k);
            continue;
        }
        const MatchingSolution sol = sols.front();
        const GluedAssembly a =
            assemble(k, sol, make_type1(sol.tau, k, d), make_type2(sol.tau, k, d), d);
        const int g = genus(a);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto [wa, wb] = a.partition_weights(i % static_cast<int>(a.necks.size()), us(rng));
            worst = std::max(worst, std::abs(wa + wb - 1.0));
        }
        ok = ok && g == k && worst <= 1e-12;
        detail += fmt("k=%d: genus %d  ", k, g);
    }
    report(13, ok, "assemblies have genus k with exact partition of unity", detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 13 criteria passed\n");
    return 0;
}
