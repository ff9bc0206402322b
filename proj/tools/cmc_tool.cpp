// Command-line front end: profile/period/indicial sweeps, matching
// enumeration, gluing experiments, and report generation. Outputs are
// deterministic for a fixed configuration and embed the resolved config.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cmc/blocks.hpp"
#include "cmc/delaunay.hpp"
#include "cmc/gluing.hpp"
#include "cmc/io.hpp"
#include "cmc/jacobi.hpp"
#include "cmc/patch.hpp"

namespace {

using nlohmann::json;

std::string resolve_out(const std::string& out) {
    if (out.empty() || out.front() == '/') return out;
    if (const char* dir = std::getenv("CMC_OUT_DIR"); dir && *dir)
        return std::string(dir) + "/" + out;
    return out;
}

void emit(const std::string& out, const std::string& body) {
    const std::string path = resolve_out(out);
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output path: " + path);
    f << body;
}

cmc::DFunctions load_dmodel(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read d-model file: " + path);
    return cmc::dfunctions_from_json(json::parse(f));
}

// Simple deterministic parallel sweep: results land by index.
template <class F>
void parallel_for(int n, int jobs, const F& f) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) f(i);
        });
    for (auto& th : pool) th.join();
}

std::string with_config(const std::string& csv, const json& config) {
    return "# config: " + config.dump() + "\n" + csv;
}

// --- profile -----------------------------------------------------------------

int cmd_profile(double tau, int grid_s, int grid_theta, double tol, const std::string& format,
                const std::string& out) {
    const json config{{"command", "profile"}, {"tau", tau},         {"grid_s", grid_s},
                      {"grid_theta", grid_theta}, {"tol", tol},     {"format", format},
                      {"out", out}};
    const auto prof = std::make_shared<const cmc::DelaunayProfile>(
        cmc::DelaunayProfile::solve(tau, 4, std::max(64, grid_s), tol));
    if (format == "json") {
        json j = cmc::profile_to_json(*prof);
        j["config"] = config;
        emit(out, j.dump(2) + "\n");
    } else if (format == "csv") {
        cmc::CsvWriter w({"s", "sigma", "dsigma", "kappa"});
        const auto& sig = prof->sigma_nodes();
        const auto& dsig = prof->dsigma_nodes();
        const auto& kap = prof->kappa_nodes();
        for (std::size_t i = 0; i < sig.size(); ++i)
            w.add_row({i * prof->grid_step(), sig[i], dsig[i], kap[i]});
        emit(out, with_config(w.str(), config));
    } else {  // obj / ply
        cmc::DelaunaySurface surf{prof};
        const cmc::Patch p = cmc::make_delaunay_patch(surf, 0.0, 2.0 * prof->s_half(),
                                                      std::max(16, grid_s), std::max(8, grid_theta));
        const std::string path = resolve_out(out);
        if (path.empty()) throw std::runtime_error("mesh output requires --out");
        if (format == "obj")
            cmc::write_obj(p, path);
        else
            cmc::write_ply(p, path);
    }
    return 0;
}

// --- periods -------------------------------------------------------------------

int cmd_periods(double tau_lo, double tau_hi, int steps, double tol, int jobs, const std::string& out) {
    if (steps < 1) throw std::invalid_argument("periods: --steps must be >= 1");
    const json config{{"command", "periods"}, {"tau_lo", tau_lo}, {"tau_hi", tau_hi},
                      {"steps", steps},       {"tol", tol},       {"out", out}};
    std::vector<std::array<double, 5>> rows(steps);
    parallel_for(steps, jobs, [&](int i) {
        const double tau = steps == 1 ? tau_lo : tau_lo + (tau_hi - tau_lo) * i / (steps - 1);
        rows[i] = {tau, cmc::turning_point(tau),
                   tau == 1.0 ? std::numbers::pi : cmc::half_period(tau, tol),
                   cmc::physical_period(tau, tol), cmc::period_derivative(tau, 1e-5, tol)};
    });
    cmc::CsvWriter w({"tau", "sigma_star", "s_tau", "T", "dT_dtau"});
    for (const auto& r : rows) w.add_row({r[0], r[1], r[2], r[3], r[4]});
    emit(out, with_config(w.str(), config));
    return 0;
}

// --- indicial -------------------------------------------------------------------

int cmd_indicial(double tau, int j_max, double tol, int jobs, const std::string& out) {
    if (j_max < 0) throw std::invalid_argument("indicial: --j-max must be >= 0");
    const json config{{"command", "indicial"}, {"tau", tau}, {"j_max", j_max}, {"tol", tol}, {"out", out}};
    std::vector<cmc::FloquetData> rows(j_max + 1);
    parallel_for(j_max + 1, jobs, [&](int j) { rows[j] = cmc::monodromy(tau, j, tol); });
    cmc::CsvWriter w({"j", "gamma", "trace", "det_defect", "hyperbolic"});
    for (const auto& fd : rows)
        w.add_row({double(fd.j), fd.gamma, fd.trace, fd.det_defect, fd.hyperbolic ? 1.0 : 0.0});
    emit(out, with_config(w.str(), config));
    return 0;
}

// --- match ---------------------------------------------------------------------

int cmd_match(int k, int n_lo, int n_hi, double tau_lo, double tau_hi, double tol,
              const std::string& dmodel, int jobs, const std::string& out) {
    const cmc::DFunctions d = load_dmodel(dmodel);
    const json config{{"command", "match"}, {"k", k},           {"n_lo", n_lo},
                      {"n_hi", n_hi},       {"tau_lo", tau_lo}, {"tau_hi", tau_hi},
                      {"tol", tol},         {"d_model", cmc::dfunctions_to_json(d)}, {"out", out}};
    std::vector<std::vector<cmc::MatchingSolution>> per_n(n_hi - n_lo + 1);
    parallel_for(n_hi - n_lo + 1, jobs,
                 [&](int i) { per_n[i] = cmc::solve_matching(n_lo + i, k, tau_lo, tau_hi, d, tol); });
    json j;
    j["config"] = config;
    j["solutions"] = json::array();
    for (const auto& sols : per_n)
        for (const auto& s : sols) j["solutions"].push_back(cmc::matching_to_json(s));
    emit(out, j.dump(2) + "\n");
    return 0;
}

// --- glue ------------------------------------------------------------------------

int cmd_glue(int k, int n, double tau_lo, double tau_hi, double tol, const std::string& dmodel,
             const std::string& out) {
    const cmc::DFunctions d = load_dmodel(dmodel);
    const json config{{"command", "glue"},   {"k", k},   {"n", n}, {"tau_lo", tau_lo},
                      {"tau_hi", tau_hi},    {"tol", tol}, {"d_model", cmc::dfunctions_to_json(d)},
                      {"out", out}};
    const auto sols = cmc::solve_matching(n, k, tau_lo, tau_hi, d, tol);
    if (sols.empty()) throw std::runtime_error("glue: no matching solution for the given n, k, interval");
    const cmc::MatchingSolution sol = sols.front();
    const cmc::BuildingBlock t1 = cmc::make_type1(sol.tau, k, d);
    const cmc::BuildingBlock t2 = cmc::make_type2(sol.tau, k, d);
    const cmc::GluedAssembly a = cmc::assemble(k, sol, t1, t2, d);

    json j;
    j["config"] = config;
    j["solution"] = cmc::matching_to_json(sol);
    j["type1"] = cmc::block_to_json(t1);
    j["type2"] = cmc::block_to_json(t2);
    j["euler_characteristic"] = a.euler_characteristic;
    j["genus"] = cmc::genus(a);
    j["neck_count"] = a.necks.size();
    // Curvature deviation of the first Y- and Z-neck annuli.
    const cmc::DeviationReport ry = cmc::curvature_deviation(a.necks.front().neck);
    const cmc::DeviationReport rz = cmc::curvature_deviation(a.necks.back().neck);
    j["y_neck"] = {{"sup_annulus", ry.sup_annulus},
                   {"refinement_defect", ry.refinement_defect},
                   {"refinement_ok", ry.refinement_ok}};
    j["z_neck"] = {{"sup_annulus", rz.sup_annulus},
                   {"refinement_defect", rz.refinement_defect},
                   {"refinement_ok", rz.refinement_ok}};
    if (!ry.refinement_ok || !rz.refinement_ok)
        throw std::runtime_error("glue: refinement check failed on a neck annulus");
    emit(out, j.dump(2) + "\n");
    return 0;
}

// --- report ----------------------------------------------------------------------

int cmd_report(double tau, int n_lo, int n_hi, double tol, const std::string& out) {
    if (n_lo < 1 || n_hi < n_lo) throw std::invalid_argument("report: need 1 <= n_lo <= n_hi");
    const json config{{"command", "report"}, {"tau", tau}, {"n_lo", n_lo}, {"n_hi", n_hi},
                      {"tol", tol},          {"out", out}};
    const auto prof = std::make_shared<const cmc::DelaunayProfile>(cmc::DelaunayProfile::solve(tau));
    const double s_tau = prof->s_half();
    const double gamma = cmc::indicial_root(tau, 2, tol);
    auto bloch = std::make_shared<const cmc::BlochMode>(cmc::BlochMode::solve(tau, 2, tol));

    auto end_with = [&](const Eigen::Vector3d& dir, double amp) {
        cmc::EndDescriptor e;
        e.model = cmc::DelaunaySurface{prof, dir, Eigen::Vector3d::Zero()};
        e.direction = dir;
        e.graph.amplitude = amp;
        e.graph.rate = gamma;
        e.graph.bloch = bloch;
        e.decay_rate = gamma;
        return e;
    };

    json sweep = json::array();
    std::vector<double> ns, logs;
    for (int n = n_lo; n <= n_hi; ++n) {
        const cmc::GluedNeck neck = cmc::glue_neck(end_with(Eigen::Vector3d::UnitY(), 1.0),
                                                   end_with(-Eigen::Vector3d::UnitY(), 0.7), n * s_tau);
        const cmc::DeviationReport rep = cmc::curvature_deviation(neck);
        sweep.push_back({{"n", n},
                         {"sup_annulus", rep.sup_annulus},
                         {"refinement_ok", rep.refinement_ok}});
        ns.push_back(n);
        logs.push_back(std::log(rep.sup_annulus));
    }
    const cmc::LineFit fit = cmc::fit_line(ns, logs);
    json j;
    j["config"] = config;
    j["gamma_2"] = gamma;
    j["s_tau"] = s_tau;
    j["expected_slope"] = -gamma * s_tau;
    j["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
    j["sweep"] = sweep;
    emit(out, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delaunay-based CMC gluing toolkit"};
    app.require_subcommand(1);

    double tau = 0.5, tau_lo = 0.2, tau_hi = 0.8, tol = 1e-12;
    int k = 3, n = 5, n_lo = 4, n_hi = 12, j_max = 4, steps = 9;
    int grid_s = 257, grid_theta = 64, jobs = 1;
    std::string out, format = "csv", dmodel;

    auto* profile = app.add_subcommand("profile", "solve and export one Delaunay profile");
    profile->add_option("--tau", tau, "Delaunay parameter in [-inf, 1] \\ {0}")->required();
    profile->add_option("--grid-s", grid_s, "axial nodes per period (table/mesh resolution)");
    profile->add_option("--grid-theta", grid_theta, "angular mesh resolution");
    profile->add_option("--tol", tol, "ODE/quadrature tolerance");
    profile->add_option("--format", format, "csv|json|obj|ply")
        ->check(CLI::IsMember({"csv", "json", "obj", "ply"}));
    profile->add_option("--out", out, "output path (default stdout; meshes require a path)");

    auto* periods = app.add_subcommand("periods", "period table over a tau range");
    periods->add_option("--tau-lo,--tau-min", tau_lo, "range start")->required();
    periods->add_option("--tau-hi,--tau-max", tau_hi, "range end")->required();
    periods->add_option("--steps", steps, "number of samples");
    periods->add_option("--tol", tol, "quadrature tolerance");
    periods->add_option("--jobs", jobs, "sweep parallelism")->check(CLI::PositiveNumber);
    periods->add_option("--out", out, "output path (default stdout)");

    auto* indicial = app.add_subcommand("indicial", "Floquet indicial roots per angular mode");
    indicial->add_option("--tau", tau, "Delaunay parameter")->required();
    indicial->add_option("--j-max", j_max, "largest angular mode");
    indicial->add_option("--tol", tol, "integration tolerance");
    indicial->add_option("--jobs", jobs, "sweep parallelism")->check(CLI::PositiveNumber);
    indicial->add_option("--out", out, "output path (default stdout)");

    auto* match = app.add_subcommand("match", "enumerate matching solutions");
    match->add_option("--k", k, "symmetry order (>= 3)")->check(CLI::Range(3, 64));
    auto* optn = match->add_option("--n", n, "single n (overrides --n-lo/--n-hi)");
    match->add_option("--n-lo", n_lo, "n range start");
    match->add_option("--n-hi", n_hi, "n range end");
    match->add_option("--tau-lo,--tau-min", tau_lo, "tau interval start");
    match->add_option("--tau-hi,--tau-max", tau_hi, "tau interval end");
    match->add_option("--tol", tol, "root tolerance");
    match->add_option("--d-model", dmodel, "JSON file with d0/d0bar/d1 coefficients");
    match->add_option("--jobs", jobs, "sweep parallelism")->check(CLI::PositiveNumber);
    match->add_option("--out", out, "output path (default stdout)");

    auto* glue = app.add_subcommand("glue", "assemble the genus-k configuration for one n");
    glue->add_option("--k", k, "symmetry order (>= 3)")->check(CLI::Range(3, 64));
    glue->add_option("--n", n, "Y-neck window multiplier");
    glue->add_option("--tau-lo,--tau-min", tau_lo, "tau interval start");
    glue->add_option("--tau-hi,--tau-max", tau_hi, "tau interval end");
    glue->add_option("--tol", tol, "matching tolerance");
    glue->add_option("--d-model", dmodel, "JSON file with d0/d0bar/d1 coefficients");
    glue->add_option("--out", out, "output path (default stdout)");

    auto* report = app.add_subcommand("report", "neck-deviation decay sweep and fit");
    report->add_option("--tau", tau, "Delaunay parameter")->required();
    report->add_option("--n-lo", n_lo, "window sweep start");
    report->add_option("--n-hi", n_hi, "window sweep end");
    report->add_option("--tol", tol, "integration tolerance");
    report->add_option("--out", out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (profile->parsed()) return cmd_profile(tau, grid_s, grid_theta, tol, format, out);
        if (periods->parsed()) return cmd_periods(tau_lo, tau_hi, steps, tol, jobs, out);
        if (indicial->parsed()) return cmd_indicial(tau, j_max, tol, jobs, out);
        if (match->parsed()) {
            if (*optn) n_lo = n_hi = n;
            if (n_lo > n_hi) throw std::invalid_argument("match: need n_lo <= n_hi");
            return cmd_match(k, n_lo, n_hi, tau_lo, tau_hi, std::max(tol, 1e-15), dmodel, jobs, out);
        }
        if (glue->parsed()) return cmd_glue(k, n, tau_lo, tau_hi, std::max(tol, 1e-10), dmodel, out);
        if (report->parsed()) return cmd_report(tau, n_lo, n_hi, tol, out);
    } catch (const std::exception& ex) {
        std::cerr << nlohmann::json{{"error", ex.what()}}.dump() << "\n";
        return 1;
    }
    return 2;
}
