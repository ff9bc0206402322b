#pragma once

// Serialization: CSV tables and JSON documents (17 significant digits for
// lossless round-trips), DelaunayProfile caching, and OBJ/PLY mesh export of
// patches.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmc/blocks.hpp"
#include "cmc/delaunay.hpp"
#include "cmc/gluing.hpp"
#include "cmc/patch.hpp"

namespace cmc {

inline std::string format_real(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(std::move(header)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != columns_.size()) throw std::invalid_argument("CsvWriter: row width mismatch");
        rows_.push_back(row);
    }

    std::string str() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << "\n";
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_real(row[i]);
            os << "\n";
        }
        return os.str();
    }

    void write(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("CsvWriter: cannot open " + path);
        f << str();
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json profile_to_json(const DelaunayProfile& p) {
    nlohmann::json j;
    j["tau"] = p.tau();
    j["cylinder"] = p.cylinder();
    j["sigma_star"] = p.sigma_star();
    j["s_half"] = p.s_half();
    j["T"] = p.T();
    j["nodes_per_period"] = p.nodes_per_period();
    j["grid_step"] = p.grid_step();
    j["sigma"] = p.sigma_nodes();
    j["dsigma"] = p.dsigma_nodes();
    j["kappa"] = p.kappa_nodes();
    return j;
}

inline nlohmann::json dfunctions_to_json(const DFunctions& d) {
    return nlohmann::json{{"d0", d.d0}, {"d0bar", d.d0bar}, {"d1", d.d1}};
}

inline DFunctions dfunctions_from_json(const nlohmann::json& j) {
    DFunctions d;
    if (j.contains("d0")) d.d0 = j.at("d0").get<std::vector<double>>();
    if (j.contains("d0bar")) d.d0bar = j.at("d0bar").get<std::vector<double>>();
    if (j.contains("d1")) d.d1 = j.at("d1").get<std::vector<double>>();
    return d;
}

inline nlohmann::json matching_to_json(const MatchingSolution& s) {
    return nlohmann::json{{"n", s.n},       {"m", s.m},           {"tau", s.tau},
                          {"tau_bar", s.tau_bar}, {"residual", s.residual}};
}

inline nlohmann::json block_to_json(const BuildingBlock& b) {
    nlohmann::json j;
    j["kind"] = b.kind == BuildingBlock::Kind::Type1 ? "type1" : "type2";
    j["k"] = b.k;
    j["tau"] = b.tau;
    if (b.kind == BuildingBlock::Kind::Type1) {
        j["tau_bar"] = b.tau_bar;
        j["alpha"] = b.alpha;
    }
    j["ends"] = nlohmann::json::array();
    for (const auto& e : b.ends) {
        nlohmann::json je;
        je["direction"] = {e.direction.x(), e.direction.y(), e.direction.z()};
        je["axial_offset"] = e.axial_offset;
        je["decay_rate"] = e.decay_rate;
        je["graph_amplitude"] = e.graph.amplitude;
        j["ends"].push_back(je);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Mesh export
// ---------------------------------------------------------------------------

namespace detail {

// Quad faces of a theta-periodic patch, split into triangles, 1-based ids.
inline std::vector<std::array<int, 3>> patch_triangles(const Patch& p) {
    std::vector<std::array<int, 3>> tris;
    for (int i = 0; i + 1 < p.ns; ++i) {
        for (int j = 0; j < p.ntheta; ++j) {
            const int jn = (j + 1) % p.ntheta;
            const int a = i * p.ntheta + j + 1;
            const int b = i * p.ntheta + jn + 1;
            const int c = (i + 1) * p.ntheta + jn + 1;
            const int d = (i + 1) * p.ntheta + j + 1;
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
        }
    }
    return tris;
}

}  // namespace detail

inline void write_obj(const Patch& p, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_obj: cannot open " + path);
    f << std::setprecision(17);
    for (const auto& v : p.pos) f << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& t : detail::patch_triangles(p)) f << "f " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

inline void write_ply(const Patch& p, const std::string& path) {
    const auto tris = detail::patch_triangles(p);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_ply: cannot open " + path);
    f << "ply\nformat ascii 1.0\n";
    f << "element vertex " << p.pos.size() << "\n";
    f << "property double x\nproperty double y\nproperty double z\n";
    f << "element face " << tris.size() << "\n";
    f << "property list uchar int vertex_indices\nend_header\n";
    f << std::setprecision(17);
    for (const auto& v : p.pos) f << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& t : tris) f << "3 " << t[0] - 1 << " " << t[1] - 1 << " " << t[2] - 1 << "\n";
}

}  // namespace cmc
