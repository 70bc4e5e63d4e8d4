// SPDX-License-Identifier: Apache-2.0
#include "kflow/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kflow::io {

namespace {

bool has_extension(const std::string& path, const char* ext) {
    return std::filesystem::path(path).extension() == ext;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) fail(path, "cannot open for writing");
    return f;
}

std::ifstream open_in(const std::string& path, bool binary) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) fail(path, "cannot open for reading");
    return f;
}

std::vector<Vec3> read_xyz_rows(const std::string& path) {
    std::ifstream f = open_in(path, false);
    std::vector<Vec3> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        double x, y, z;
        if (!(ss >> x >> y >> z)) {
            fail(path, "parse error at line " + std::to_string(lineno) +
                           ": expected three numeric fields");
        }
        std::string trailing;
        if (ss >> trailing) {
            fail(path, "parse error at line " + std::to_string(lineno) + ": trailing data");
        }
        rows.emplace_back(x, y, z);
    }
    return rows;
}

void write_xyz_rows(const std::string& path, const std::vector<Vec3>& rows) {
    std::ofstream f = open_out(path, false);
    f.precision(9);
    for (const Vec3& p : rows) {
        f << static_cast<float>(p.x) << ' ' << static_cast<float>(p.y) << ' '
          << static_cast<float>(p.z) << '\n';
    }
    if (!f) fail(path, "write failure");
}

std::vector<Vec3> read_binary_rows(const std::string& path, const char magic[4]) {
    std::ifstream f = open_in(path, true);
    char got[4];
    if (!f.read(got, 4)) fail(path, "truncated header at byte 0");
    if (std::memcmp(got, magic, 4) != 0) {
        fail(path, std::string("bad magic: expected \"") + std::string(magic, 4) +
                       "\", found \"" + std::string(got, 4) + "\"");
    }
    std::uint64_t count;
    if (!f.read(reinterpret_cast<char*>(&count), 8)) fail(path, "truncated header at byte 4");
    std::vector<Vec3> rows(count);
    std::vector<float> buf(3 * count);
    if (!f.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float))) {
        fail(path, "truncated payload: expected " + std::to_string(count) + " records");
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        rows[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
    }
    return rows;
}

void write_binary_rows(const std::string& path, const char magic[4],
                       const std::vector<Vec3>& rows) {
    std::ofstream f = open_out(path, true);
    f.write(magic, 4);
    std::uint64_t count = rows.size();
    f.write(reinterpret_cast<const char*>(&count), 8);
    std::vector<float> buf(3 * rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        buf[3 * i] = static_cast<float>(rows[i].x);
        buf[3 * i + 1] = static_cast<float>(rows[i].y);
        buf[3 * i + 2] = static_cast<float>(rows[i].z);
    }
    f.write(reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(float));
    if (!f) fail(path, "write failure");
}

}  // namespace

PointCloud read_points(const std::string& path) {
    if (has_extension(path, ".xyz")) return PointCloud(read_xyz_rows(path));
    return PointCloud(read_binary_rows(path, "PCF1"));
}

void write_points(const std::string& path, const PointCloud& cloud) {
    if (has_extension(path, ".xyz")) {
        write_xyz_rows(path, cloud.points());
    } else {
        write_binary_rows(path, "PCF1", cloud.points());
    }
}

FlowField read_flow(const std::string& path) {
    if (has_extension(path, ".xyz")) return FlowField(read_xyz_rows(path));
    return FlowField(read_binary_rows(path, "FLW1"));
}

void write_flow(const std::string& path, const FlowField& flow) {
    if (has_extension(path, ".xyz")) {
        write_xyz_rows(path, flow.vectors());
    } else {
        write_binary_rows(path, "FLW1", flow.vectors());
    }
}

PeatWeights read_peat_weights(const std::string& path) {
    std::ifstream f = open_in(path, true);
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, "PEAT", 4) != 0) {
        fail(path, "bad PEAT magic");
    }
    std::uint32_t d_pe, d_k, d_v;
    if (!f.read(reinterpret_cast<char*>(&d_pe), 4) || !f.read(reinterpret_cast<char*>(&d_k), 4) ||
        !f.read(reinterpret_cast<char*>(&d_v), 4)) {
        fail(path, "truncated PEAT header");
    }
    auto read_matrix = [&](std::size_t r, std::size_t c, const char* name) {
        Matrix m(r, c);
        std::vector<float> buf(r * c);
        if (!f.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float))) {
            fail(path, std::string("truncated ") + name + " payload");
        }
        for (std::size_t i = 0; i < buf.size(); ++i) m.data()[i] = buf[i];
        return m;
    };
    PeatWeights w{read_matrix(d_pe, d_k, "W_Q"), read_matrix(d_pe, d_k, "W_K"),
                  read_matrix(d_pe, d_v, "W_V")};
    w.validate();
    return w;
}

void write_peat_weights(const std::string& path, const PeatWeights& weights) {
    weights.validate();
    std::ofstream f = open_out(path, true);
    f.write("PEAT", 4);
    std::uint32_t d_pe = weights.d_pe(), d_k = weights.d_k(), d_v = weights.d_v();
    f.write(reinterpret_cast<const char*>(&d_pe), 4);
    f.write(reinterpret_cast<const char*>(&d_k), 4);
    f.write(reinterpret_cast<const char*>(&d_v), 4);
    auto write_matrix = [&](const Matrix& m) {
        std::vector<float> buf(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) buf[i] = static_cast<float>(m.data()[i]);
        f.write(reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(float));
    };
    write_matrix(weights.w_q);
    write_matrix(weights.w_k);
    write_matrix(weights.w_v);
    if (!f) fail(path, "write failure");
}

void write_dt_grid(const std::string& path, const DistanceTransformGrid& grid) {
    std::ofstream f = open_out(path, true);
    f.write("DTG1", 4);
    std::uint32_t dims[3] = {static_cast<std::uint32_t>(grid.gx()),
                             static_cast<std::uint32_t>(grid.gy()),
                             static_cast<std::uint32_t>(grid.gz())};
    float origin[3] = {static_cast<float>(grid.origin().x), static_cast<float>(grid.origin().y),
                       static_cast<float>(grid.origin().z)};
    float spacing = static_cast<float>(grid.spacing());
    f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    f.write(reinterpret_cast<const char*>(origin), sizeof(origin));
    f.write(reinterpret_cast<const char*>(&spacing), sizeof(spacing));
    f.write(reinterpret_cast<const char*>(grid.values().data()),
            grid.values().size() * sizeof(float));
    if (!f) fail(path, "write failure");
}

DistanceTransformGrid read_dt_grid(const std::string& path) {
    std::ifstream f = open_in(path, true);
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, "DTG1", 4) != 0) fail(path, "bad DTG1 magic");
    std::uint32_t dims[3];
    float origin[3], spacing;
    if (!f.read(reinterpret_cast<char*>(dims), sizeof(dims)) ||
        !f.read(reinterpret_cast<char*>(origin), sizeof(origin)) ||
        !f.read(reinterpret_cast<char*>(&spacing), sizeof(spacing))) {
        fail(path, "truncated DTG1 header");
    }
    std::vector<float> values(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    if (!f.read(reinterpret_cast<char*>(values.data()), values.size() * sizeof(float))) {
        fail(path, "truncated DTG1 payload");
    }
    return DistanceTransformGrid({origin[0], origin[1], origin[2]}, spacing, dims[0], dims[1],
                                 dims[2], std::move(values));
}

namespace {
// Hue in [0, 2pi) -> full-value RGB; blended from gray by magnitude.
void flow_color(const Vec3& f, double f_max, unsigned char rgb[3]) {
    double mag = f.norm();
    double m = f_max > 0.0 ? std::min(mag / f_max, 1.0) : 0.0;
    double hue = std::atan2(f.y, f.x);
    if (hue < 0.0) hue += 2.0 * 3.14159265358979323846;
    double h = hue / (3.14159265358979323846 / 3.0);  // sector in [0, 6)
    double x = 1.0 - std::fabs(std::fmod(h, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h) % 6) {
        case 0: r = 1; g = x; break;
        case 1: r = x; g = 1; break;
        case 2: g = 1; b = x; break;
        case 3: g = x; b = 1; break;
        case 4: r = x; b = 1; break;
        default: r = 1; b = x; break;
    }
    auto blend = [&](double c) {
        return static_cast<unsigned char>(std::lround(128.0 * (1.0 - m) + 255.0 * m * c));
    };
    rgb[0] = blend(r);
    rgb[1] = blend(g);
    rgb[2] = blend(b);
}
}  // namespace

void export_ply(const std::string& path, const PointCloud& cloud, const FlowField& flow) {
    if (cloud.size() != flow.size()) {
        throw std::invalid_argument("export_ply: cloud/flow length mismatch");
    }
    // 95th-percentile magnitude sets the brightness scale.
    std::vector<double> mags(flow.size());
    for (std::size_t i = 0; i < flow.size(); ++i) mags[i] = flow[i].norm();
    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    double f_max = sorted[static_cast<std::size_t>(0.95 * (sorted.size() - 1))];

    std::ofstream f = open_out(path, false);
    f << "ply\nformat ascii 1.0\n";
    f << "comment flow color: hue=atan2(fy,fx) (+x is red), brightness=min(|f|/p95,1), "
         "zero flow is gray 128\n";
    f << "element vertex " << cloud.size() << "\n";
    f << "property float x\nproperty float y\nproperty float z\n";
    f << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    f << "end_header\n";
    f.precision(9);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        unsigned char rgb[3];
        flow_color(flow[i], f_max, rgb);
        f << static_cast<float>(cloud[i].x) << ' ' << static_cast<float>(cloud[i].y) << ' '
          << static_cast<float>(cloud[i].z) << ' ' << int(rgb[0]) << ' ' << int(rgb[1]) << ' '
          << int(rgb[2]) << '\n';
    }
    if (!f) fail(path, "write failure");
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream f = open_in(path, false);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(path, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_array()) fail(path, "manifest must be a JSON array");
    auto dir = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (dir / fp).string();
    };
    std::vector<ManifestEntry> entries;
    std::set<std::string> ids;
    for (const auto& item : j) {
        ManifestEntry e;
        e.id = item.at("id").get<std::string>();
        e.source = resolve(item.at("source").get<std::string>());
        e.target = resolve(item.at("target").get<std::string>());
        if (item.contains("gt_flow") && !item["gt_flow"].is_null()) {
            e.gt_flow = resolve(item["gt_flow"].get<std::string>());
        }
        if (!ids.insert(e.id).second) fail(path, "duplicate sample id '" + e.id + "'");
        for (const std::string& p : {e.source, e.target}) {
            if (!std::filesystem::exists(p)) fail(path, "missing file: " + p);
        }
        if (e.gt_flow && !std::filesystem::exists(*e.gt_flow)) {
            fail(path, "missing file: " + *e.gt_flow);
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json item{{"id", e.id}, {"source", e.source}, {"target", e.target}};
        if (e.gt_flow) item["gt_flow"] = *e.gt_flow;
        j.push_back(item);
    }
    std::ofstream f = open_out(path, false);
    f << j.dump(2) << '\n';
    if (!f) fail(path, "write failure");
}

}  // namespace kflow::io
