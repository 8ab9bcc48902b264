// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

namespace spdf {

CloudFormat format_from_path(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot != std::string::npos) {
        std::string ext = path.substr(dot + 1);
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == "ply") return CloudFormat::PlyAscii;
    }
    return CloudFormat::CsvXyz;
}

namespace {

// Column roles shared by both formats.
enum class Col {
    X, Y, Z, Nx, Ny, Nz, SalSurface, SalCurve, SalPoint, Label, Confidence, Skip
};

Col column_from_name(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (name == "x") return Col::X;
    if (name == "y") return Col::Y;
    if (name == "z") return Col::Z;
    if (name == "nx") return Col::Nx;
    if (name == "ny") return Col::Ny;
    if (name == "nz") return Col::Nz;
    if (name == "s_surface") return Col::SalSurface;
    if (name == "s_curve") return Col::SalCurve;
    if (name == "s_point") return Col::SalPoint;
    if (name == "label") return Col::Label;
    if (name == "confidence") return Col::Confidence;
    return Col::Skip;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

struct RowSink {
    PointCloud cloud;
    bool has_normals = false, has_sal = false, has_label = false, has_conf = false;

    void prepare(const std::vector<Col>& layout) {
        for (Col c : layout) {
            if (c == Col::Nx) has_normals = true;
            if (c == Col::SalSurface) has_sal = true;
            if (c == Col::Label) has_label = true;
            if (c == Col::Confidence) has_conf = true;
        }
    }

    void push(const std::vector<Col>& layout, const std::vector<double>& values,
              const std::string& path, std::size_t line_no) {
        Vec3 p = Vec3::Zero(), n = Vec3::Zero(), s = Vec3::Zero();
        double conf = 0.0;
        int label = 0;
        for (std::size_t i = 0; i < layout.size(); ++i) {
            const double v = values[i];
            switch (layout[i]) {
                case Col::X: p.x() = v; break;
                case Col::Y: p.y() = v; break;
                case Col::Z: p.z() = v; break;
                case Col::Nx: n.x() = v; break;
                case Col::Ny: n.y() = v; break;
                case Col::Nz: n.z() = v; break;
                case Col::SalSurface: s.x() = v; break;
                case Col::SalCurve: s.y() = v; break;
                case Col::SalPoint: s.z() = v; break;
                case Col::Label: label = static_cast<int>(v); break;
                case Col::Confidence: conf = v; break;
                case Col::Skip: break;
            }
        }
        if (label < 0 || label > 2) {
            throw ParseError(path, line_no, "label must be 0, 1 or 2");
        }
        cloud.points.push_back(p);
        if (has_normals) cloud.normals.push_back(n);
        if (has_sal) cloud.saliencies.push_back(s);
        if (has_label) cloud.labels.push_back(static_cast<PrimitiveLabel>(label));
        if (has_conf) cloud.confidences.push_back(conf);
    }
};

PointCloud load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");

    std::string line;
    std::size_t line_no = 0;
    std::vector<Col> layout;
    RowSink sink;
    bool saw_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv(line);
        if (fields.empty()) continue;

        if (layout.empty()) {
            if (!parse_double(fields[0])) {
                // Header line names the columns.
                bool saw_x = false, saw_y = false, saw_z = false;
                for (const std::string& f : fields) {
                    const Col c = column_from_name(f);
                    layout.push_back(c);
                    saw_x |= c == Col::X;
                    saw_y |= c == Col::Y;
                    saw_z |= c == Col::Z;
                }
                if (!saw_x || !saw_y || !saw_z) {
                    throw ParseError(path, line_no, "header must name x, y and z columns");
                }
                sink.prepare(layout);
                saw_header = true;
                continue;
            }
            // Headerless: 3 = x,y,z; 6 = x,y,z,nx,ny,nz.
            if (fields.size() == 3) {
                layout = {Col::X, Col::Y, Col::Z};
            } else if (fields.size() == 6) {
                layout = {Col::X, Col::Y, Col::Z, Col::Nx, Col::Ny, Col::Nz};
            } else {
                throw ParseError(path, line_no,
                                 "headerless rows must have 3 or 6 columns");
            }
            sink.prepare(layout);
        }

        if (fields.size() != layout.size()) {
            throw ParseError(path, line_no, "expected " + std::to_string(layout.size()) +
                                                " columns, got " +
                                                std::to_string(fields.size()));
        }
        std::vector<double> values(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto v = parse_double(fields[i]);
            if (!v) throw ParseError(path, line_no, "bad number '" + fields[i] + "'");
            values[i] = *v;
        }
        sink.push(layout, values, path, line_no);
    }
    if (layout.empty() && !saw_header) throw ParseError(path, line_no, "empty file");
    return std::move(sink.cloud);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void save_csv(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);

    std::string header = "x,y,z";
    if (cloud.has_normals()) header += ",nx,ny,nz";
    if (cloud.has_saliencies()) header += ",s_surface,s_curve,s_point";
    if (cloud.has_labels()) header += ",label";
    if (cloud.has_confidences()) header += ",confidence";
    out << header << "\n";

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << format_double(cloud.points[i].x()) << ','
            << format_double(cloud.points[i].y()) << ','
            << format_double(cloud.points[i].z());
        if (cloud.has_normals()) {
            for (int a = 0; a < 3; ++a) out << ',' << format_double(cloud.normals[i](a));
        }
        if (cloud.has_saliencies()) {
            for (int a = 0; a < 3; ++a) out << ',' << format_double(cloud.saliencies[i](a));
        }
        if (cloud.has_labels()) out << ',' << static_cast<int>(cloud.labels[i]);
        if (cloud.has_confidences()) out << ',' << format_double(cloud.confidences[i]);
        out << "\n";
    }
}

PointCloud load_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");

    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next_line() || line != "ply") throw ParseError(path, line_no, "missing 'ply' magic");
    if (!next_line() || line.rfind("format ascii", 0) != 0) {
        throw ParseError(path, line_no, "only 'format ascii' is supported");
    }

    std::size_t vertex_count = 0;
    std::vector<Col> layout;
    std::vector<std::pair<std::string, std::size_t>> other_elements;
    std::string current_element;

    while (true) {
        if (!next_line()) throw ParseError(path, line_no, "unexpected end of header");
        if (line == "end_header") break;
        std::stringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "comment" || tok == "obj_info") continue;
        if (tok == "element") {
            std::string name;
            std::size_t count = 0;
            ss >> name >> count;
            current_element = name;
            if (name == "vertex") {
                vertex_count = count;
            } else {
                other_elements.emplace_back(name, count);
            }
            continue;
        }
        if (tok == "property") {
            if (current_element != "vertex") continue;
            std::string type, name;
            ss >> type >> name;
            if (type == "list") {
                throw ParseError(path, line_no, "list properties are not supported on vertices");
            }
            layout.push_back(column_from_name(name));
            continue;
        }
        throw ParseError(path, line_no, "unrecognized header line '" + line + "'");
    }

    const bool has_xyz = std::count(layout.begin(), layout.end(), Col::X) == 1 &&
                         std::count(layout.begin(), layout.end(), Col::Y) == 1 &&
                         std::count(layout.begin(), layout.end(), Col::Z) == 1;
    if (!has_xyz) throw ParseError(path, line_no, "vertex element must have x, y, z");

    RowSink sink;
    sink.prepare(layout);
    for (std::size_t v = 0; v < vertex_count; ++v) {
        if (!next_line()) throw ParseError(path, line_no, "unexpected end of vertex data");
        std::stringstream ss(line);
        std::vector<double> values(layout.size());
        for (std::size_t i = 0; i < layout.size(); ++i) {
            if (!(ss >> values[i]) || !std::isfinite(values[i])) {
                throw ParseError(path, line_no, "bad vertex value");
            }
        }
        sink.push(layout, values, path, line_no);
    }
    // Remaining elements (faces etc.) are ignored.
    return std::move(sink.cloud);
}

void save_ply(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);

    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (cloud.has_normals()) {
        out << "property double nx\nproperty double ny\nproperty double nz\n";
    }
    if (cloud.has_saliencies()) {
        out << "property double s_surface\nproperty double s_curve\nproperty double s_point\n";
    }
    if (cloud.has_labels()) out << "property uchar label\n";
    if (cloud.has_confidences()) out << "property double confidence\n";
    out << "end_header\n";

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << format_double(cloud.points[i].x()) << ' '
            << format_double(cloud.points[i].y()) << ' '
            << format_double(cloud.points[i].z());
        if (cloud.has_normals()) {
            for (int a = 0; a < 3; ++a) out << ' ' << format_double(cloud.normals[i](a));
        }
        if (cloud.has_saliencies()) {
            for (int a = 0; a < 3; ++a) out << ' ' << format_double(cloud.saliencies[i](a));
        }
        if (cloud.has_labels()) out << ' ' << static_cast<int>(cloud.labels[i]);
        if (cloud.has_confidences()) out << ' ' << format_double(cloud.confidences[i]);
        out << "\n";
    }
}

}  // namespace

PointCloud load_cloud(const std::string& path, CloudFormat format) {
    PointCloud cloud =
        format == CloudFormat::PlyAscii ? load_ply(path) : load_csv(path);
    return cloud;
}

PointCloud load_cloud(const std::string& path) {
    return load_cloud(path, format_from_path(path));
}

void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
    cloud.validate();
    if (format == CloudFormat::PlyAscii) {
        save_ply(cloud, path);
    } else {
        save_csv(cloud, path);
    }
}

void save_cloud(const PointCloud& cloud, const std::string& path) {
    save_cloud(cloud, path, format_from_path(path));
}

}  // namespace spdf
