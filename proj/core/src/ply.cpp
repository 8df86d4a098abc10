#include "pcqa/ply.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace pcqa {

namespace {

const char* kVertexProps[6] = {"x", "y", "z", "red", "green", "blue"};

struct HeaderInfo {
    bool binary = false;
    std::size_t vertex_count = 0;
    std::size_t body_offset = 0; // byte offset of first body byte
};

[[noreturn]] void fail(const std::string& what, std::size_t line) {
    throw PlyError("PLY header error (line " + std::to_string(line) + "): " + what);
}

// Splits on single spaces; PLY headers are space-delimited by definition.
std::vector<std::string> tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

HeaderInfo parse_header(const std::string& bytes) {
    HeaderInfo info;
    std::size_t pos = 0, line_no = 0;
    bool have_format = false, have_end = false;
    int next_prop = 0;
    bool in_vertex_element = false;

    while (pos < bytes.size()) {
        std::size_t eol = bytes.find('\n', pos);
        if (eol == std::string::npos) fail("unterminated header", line_no + 1);
        std::string line = bytes.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = eol + 1;
        ++line_no;

        if (line_no == 1) {
            if (line != "ply") fail("missing 'ply' magic", line_no);
            continue;
        }
        const auto t = tokens(line);
        if (t.empty()) fail("blank header line", line_no);
        if (t[0] == "comment" || t[0] == "obj_info") continue;
        if (t[0] == "format") {
            if (have_format) fail("duplicate format line", line_no);
            if (t.size() != 3 || t[2] != "1.0") fail("unsupported format version", line_no);
            if (t[1] == "ascii") info.binary = false;
            else if (t[1] == "binary_little_endian") info.binary = true;
            else fail("unsupported format '" + t[1] + "'", line_no);
            have_format = true;
            continue;
        }
        if (t[0] == "element") {
            if (t.size() != 3) fail("malformed element line", line_no);
            if (t[1] != "vertex") fail("unsupported element '" + t[1] + "'", line_no);
            if (in_vertex_element) fail("duplicate vertex element", line_no);
            try {
                info.vertex_count = std::stoull(t[2]);
            } catch (...) {
                fail("bad vertex count '" + t[2] + "'", line_no);
            }
            in_vertex_element = true;
            continue;
        }
        if (t[0] == "property") {
            if (!in_vertex_element) fail("property outside vertex element", line_no);
            if (next_prop >= 6) fail("extra property beyond x/y/z/red/green/blue", line_no);
            if (t.size() != 3) fail("malformed property line", line_no);
            const bool is_coord = next_prop < 3;
            const std::string& want_type = is_coord ? "float" : "uchar";
            if (t[1] != want_type)
                fail("property '" + t[2] + "' must have type " + want_type + ", got '" + t[1] + "'", line_no);
            if (t[2] != kVertexProps[next_prop])
                fail(std::string("expected property '") + kVertexProps[next_prop] + "', got '" + t[2] + "'", line_no);
            ++next_prop;
            continue;
        }
        if (t[0] == "end_header") {
            if (!have_format) fail("end_header before format", line_no);
            if (!in_vertex_element) fail("no vertex element declared", line_no);
            if (next_prop != 6) fail("vertex element must declare exactly x/y/z/red/green/blue", line_no);
            have_end = true;
            info.body_offset = pos;
            break;
        }
        fail("unrecognized header line '" + line + "'", line_no);
    }
    if (!have_end) fail("missing end_header", line_no);
    return info;
}

float read_f32_le(const unsigned char* p) {
    std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                      (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

void write_f32_le(float f, unsigned char* p) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    p[0] = static_cast<unsigned char>(u & 0xff);
    p[1] = static_cast<unsigned char>((u >> 8) & 0xff);
    p[2] = static_cast<unsigned char>((u >> 16) & 0xff);
    p[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

} // namespace

PointCloud load_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PlyError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();

    const HeaderInfo h = parse_header(bytes);
    PointCloud pc;
    pc.points.reserve(h.vertex_count);
    pc.colors.reserve(h.vertex_count);

    if (h.binary) {
        constexpr std::size_t stride = 3 * 4 + 3; // 3 float32 + 3 uchar
        const std::size_t need = h.vertex_count * stride;
        const std::size_t have = bytes.size() - h.body_offset;
        if (have < need)
            throw PlyError("PLY body truncated: expected " + std::to_string(need) + " bytes of vertex data, got " +
                           std::to_string(have) + " (file byte " + std::to_string(bytes.size()) + ")");
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + h.body_offset;
        for (std::size_t i = 0; i < h.vertex_count; ++i, p += stride) {
            pc.points.push_back({static_cast<double>(read_f32_le(p)), static_cast<double>(read_f32_le(p + 4)),
                                 static_cast<double>(read_f32_le(p + 8))});
            pc.colors.push_back({p[12], p[13], p[14]});
        }
    } else {
        std::size_t pos = h.body_offset;
        std::size_t line_no = 0;
        for (std::size_t li = 0; li < bytes.size() && li < h.body_offset; ++li)
            if (bytes[li] == '\n') ++line_no; // header line count, for diagnostics
        for (std::size_t i = 0; i < h.vertex_count; ++i) {
            std::size_t eol = bytes.find('\n', pos);
            std::string line = bytes.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            ++line_no;
            if (pos >= bytes.size() || (line.empty() && eol == std::string::npos))
                throw PlyError("PLY body truncated: vertex " + std::to_string(i) + " of " +
                               std::to_string(h.vertex_count) + " missing (line " + std::to_string(line_no) + ")");
            std::istringstream is(line);
            double x, y, z;
            int r, g, b;
            if (!(is >> x >> y >> z >> r >> g >> b))
                throw PlyError("malformed vertex line " + std::to_string(line_no) + ": '" + line + "'");
            std::string rest;
            if (is >> rest)
                throw PlyError("trailing data on vertex line " + std::to_string(line_no) + ": '" + rest + "'");
            if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
                throw PlyError("color out of range on line " + std::to_string(line_no));
            pc.points.push_back({x, y, z});
            pc.colors.push_back({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                 static_cast<std::uint8_t>(b)});
            if (eol == std::string::npos) {
                pos = bytes.size();
            } else {
                pos = eol + 1;
            }
        }
    }
    if (pc.empty()) throw PlyError("PLY declares zero vertices");
    return pc;
}

void save_ply(const PointCloud& pc, const std::filesystem::path& path, bool binary) {
    if (pc.empty()) throw PlyError("refusing to write empty point cloud");
    if (pc.points.size() != pc.colors.size()) throw PlyError("points/colors length mismatch");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw PlyError("cannot open '" + path.string() + "' for writing");

    out << "ply\n"
        << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
        << "element vertex " << pc.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        << "end_header\n";

    if (binary) {
        std::vector<unsigned char> row(15);
        for (std::size_t i = 0; i < pc.size(); ++i) {
            for (int a = 0; a < 3; ++a)
                write_f32_le(static_cast<float>(pc.points[i][a]), row.data() + 4 * a);
            row[12] = pc.colors[i].r;
            row[13] = pc.colors[i].g;
            row[14] = pc.colors[i].b;
            out.write(reinterpret_cast<const char*>(row.data()), 15);
        }
    } else {
        char line[128];
        for (std::size_t i = 0; i < pc.size(); ++i) {
            std::snprintf(line, sizeof line, "%.6f %.6f %.6f %d %d %d\n",
                          static_cast<double>(static_cast<float>(pc.points[i][0])),
                          static_cast<double>(static_cast<float>(pc.points[i][1])),
                          static_cast<double>(static_cast<float>(pc.points[i][2])),
                          static_cast<int>(pc.colors[i].r), static_cast<int>(pc.colors[i].g),
                          static_cast<int>(pc.colors[i].b));
            out << line;
        }
    }
    if (!out) throw PlyError("I/O failure writing '" + path.string() + "'");
}

} // namespace pcqa
