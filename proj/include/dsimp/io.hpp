#pragma once

// Readers and writers: the native `.dsimp` text format (any dimension,
// lossless including type tags, bisection registry and generations), Gmsh MSH
// 2.2 ASCII (3d tetrahedra), and legacy VTK ASCII output for inspection.
// Coordinates are written in shortest round-trip decimal form.

#include "dsimp/compatibility.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dsimp {

inline std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, end);
}

namespace detail {

struct LineReader {
    std::istream& in;
    std::size_t line_no = 0;

    bool next(std::string& line) {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") != std::string::npos) return true;
        }
        return false;
    }

    std::string require(const std::string& what) {
        std::string line;
        if (!next(line))
            throw ParseError("line " + std::to_string(line_no + 1) + ": unexpected end of file, expected " +
                             what);
        return line;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("line " + std::to_string(line_no) + ": " + msg);
    }
};

inline std::vector<std::string> tokens(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

inline long parse_long(const std::string& t, LineReader& r) {
    long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) r.fail("expected integer, got '" + t + "'");
    return v;
}

inline double parse_double(const std::string& t, LineReader& r) {
    double v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) r.fail("expected number, got '" + t + "'");
    return v;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open '" + path.string() + "' for writing");
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open '" + path.string() + "' for reading");
    return in;
}

}  // namespace detail

// --- native format -----------------------------------------------------------

inline void write_native(const Mesh& m, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    const int d = m.dim();
    out << "dsimp " << d << "\n";
    out << "vertices " << m.vertex_count() << "\n";
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        const auto p = m.point(VertexId(v));
        for (int i = 0; i < d; ++i) out << (i ? " " : "") << format_double(p[std::size_t(i)]);
        out << "\n";
    }
    out << "elements " << m.element_count() << "\n";
    for (const Simplex& s : m.elements()) {
        for (std::size_t i = 0; i < s.vertices.size(); ++i) out << (i ? " " : "") << s.vertices[i];
        if (s.type != 0) out << " t=" << s.type;
        out << "\n";
    }
    if (!m.bisection_registry().empty()) {
        out << "registry " << m.bisection_registry().size() << "\n";
        for (const auto& [e, mid] : m.bisection_registry()) out << e[0] << " " << e[1] << " " << mid << "\n";
    }
    if (std::any_of(m.generations().begin(), m.generations().end(), [](int g) { return g != 0; })) {
        out << "generations " << m.element_count() << "\n";
        for (int g : m.generations()) out << g << "\n";
    }
    if (!out) throw IoFailure("write failed for '" + path.string() + "'");
}

inline Mesh read_native(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    detail::LineReader r{in};

    auto header = detail::tokens(r.require("header"));
    if (header.size() != 2 || header[0] != "dsimp") r.fail("expected 'dsimp <dim>' header");
    const int d = int(detail::parse_long(header[1], r));
    if (d < 2) r.fail("dimension must be >= 2");

    auto vhead = detail::tokens(r.require("vertices section"));
    if (vhead.size() != 2 || vhead[0] != "vertices") r.fail("expected 'vertices <count>'");
    const long nv = detail::parse_long(vhead[1], r);

    std::vector<double> coords;
    coords.reserve(std::size_t(nv) * std::size_t(d));
    for (long v = 0; v < nv; ++v) {
        auto toks = detail::tokens(r.require("vertex coordinates"));
        if (int(toks.size()) != d) r.fail("expected " + std::to_string(d) + " coordinates");
        for (const auto& t : toks) coords.push_back(detail::parse_double(t, r));
    }

    auto ehead = detail::tokens(r.require("elements section"));
    if (ehead.size() != 2 || ehead[0] != "elements") r.fail("expected 'elements <count>'");
    const long ne = detail::parse_long(ehead[1], r);

    std::vector<Simplex> elems;
    elems.reserve(std::size_t(ne));
    for (long e = 0; e < ne; ++e) {
        auto toks = detail::tokens(r.require("element"));
        Simplex s;
        if (!toks.empty() && toks.back().rfind("t=", 0) == 0) {
            s.type = int(detail::parse_long(toks.back().substr(2), r));
            toks.pop_back();
        }
        if (int(toks.size()) != d + 1) r.fail("expected " + std::to_string(d + 1) + " vertex ids");
        for (const auto& t : toks) s.vertices.push_back(detail::parse_long(t, r));
        elems.push_back(std::move(s));
    }

    Mesh mesh = [&] {
        try {
            return Mesh(d, std::move(coords), std::move(elems));
        } catch (const Error& e) {
            r.fail(std::string("invalid mesh: ") + e.what());
        }
    }();

    std::string line;
    while (r.next(line)) {
        auto toks = detail::tokens(line);
        if (toks.size() == 2 && toks[0] == "registry") {
            const long nr = detail::parse_long(toks[1], r);
            std::map<EdgeKey, VertexId> reg;
            for (long i = 0; i < nr; ++i) {
                auto rt = detail::tokens(r.require("registry entry"));
                if (rt.size() != 3) r.fail("expected 'a b midpoint'");
                reg[make_edge(detail::parse_long(rt[0], r), detail::parse_long(rt[1], r))] =
                    detail::parse_long(rt[2], r);
            }
            mesh.restore_registry(std::move(reg));
        } else if (toks.size() == 2 && toks[0] == "generations") {
            const long ng = detail::parse_long(toks[1], r);
            if (ng != long(mesh.element_count())) r.fail("generation count differs from element count");
            std::vector<int> gens;
            for (long i = 0; i < ng; ++i)
                gens.push_back(int(detail::parse_long(detail::tokens(r.require("generation"))[0], r)));
            mesh.restore_generations(std::move(gens));
        } else {
            r.fail("unknown section '" + (toks.empty() ? "" : toks[0]) + "'");
        }
    }
    return mesh;
}

// --- Gmsh MSH 2.2 ------------------------------------------------------------

struct MshReadResult {
    Mesh mesh;
    /// Original node tags by dense vertex id.
    std::vector<long> original_node_tags;
    std::size_t ignored_triangles = 0;
    std::size_t ignored_points = 0;
    std::size_t ignored_other = 0;
};

inline MshReadResult read_msh_detailed(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    detail::LineReader r{in};

    std::vector<long> tags;
    std::vector<double> coords;
    std::map<long, VertexId> tag_to_id;
    std::vector<Simplex> tets;
    MshReadResult result{Mesh{}, {}, 0, 0, 0};
    bool saw_format = false, saw_nodes = false, saw_elements = false;

    std::string line;
    while (r.next(line)) {
        auto toks = detail::tokens(line);
        if (toks.empty() || toks[0].empty() || toks[0][0] != '$') r.fail("expected a $Section marker");
        const std::string section = toks[0].substr(1);

        if (section == "MeshFormat") {
            auto ft = detail::tokens(r.require("format line"));
            if (ft.size() < 3) r.fail("malformed $MeshFormat line");
            if (ft[0] != "2.2")
                throw UnsupportedVersion("MSH version " + ft[0] + " is not supported (need 2.2 ASCII)");
            if (ft[1] != "0") throw UnsupportedVersion("binary MSH files are not supported");
            if (detail::tokens(r.require("$EndMeshFormat"))[0] != "$EndMeshFormat")
                throw MalformedSection("missing $EndMeshFormat");
            saw_format = true;
        } else if (section == "Nodes") {
            if (!saw_format) throw MalformedSection("$Nodes before $MeshFormat");
            const long n = detail::parse_long(detail::tokens(r.require("node count"))[0], r);
            for (long i = 0; i < n; ++i) {
                auto nt = detail::tokens(r.require("node"));
                if (nt.size() != 4) r.fail("expected 'tag x y z'");
                const long tag = detail::parse_long(nt[0], r);
                if (tag_to_id.count(tag)) r.fail("duplicate node tag " + std::to_string(tag));
                tag_to_id[tag] = VertexId(tags.size());
                tags.push_back(tag);
                for (int c = 1; c <= 3; ++c) coords.push_back(detail::parse_double(nt[std::size_t(c)], r));
            }
            if (detail::tokens(r.require("$EndNodes"))[0] != "$EndNodes")
                throw MalformedSection("missing $EndNodes");
            saw_nodes = true;
        } else if (section == "Elements") {
            if (!saw_nodes) throw MalformedSection("$Elements before $Nodes");
            const long n = detail::parse_long(detail::tokens(r.require("element count"))[0], r);
            for (long i = 0; i < n; ++i) {
                auto et = detail::tokens(r.require("element"));
                if (et.size() < 3) r.fail("malformed element line");
                const long etype = detail::parse_long(et[1], r);
                const long ntags = detail::parse_long(et[2], r);
                const std::size_t first_node = 3 + std::size_t(ntags);
                if (etype == 4) {
                    if (et.size() != first_node + 4) r.fail("tetrahedron needs 4 node tags");
                    Simplex s;
                    for (std::size_t k = 0; k < 4; ++k) {
                        const long tag = detail::parse_long(et[first_node + k], r);
                        auto it = tag_to_id.find(tag);
                        if (it == tag_to_id.end()) r.fail("element references unknown node tag");
                        s.vertices.push_back(it->second);
                    }
                    tets.push_back(std::move(s));
                } else if (etype == 2) {
                    ++result.ignored_triangles;
                } else if (etype == 15) {
                    ++result.ignored_points;
                } else {
                    ++result.ignored_other;
                }
            }
            if (detail::tokens(r.require("$EndElements"))[0] != "$EndElements")
                throw MalformedSection("missing $EndElements");
            saw_elements = true;
        } else {
            // other sections (physical names etc.) are skipped
            const std::string end = "$End" + section;
            while (true) {
                if (!r.next(line)) throw MalformedSection("missing " + end);
                if (detail::tokens(line)[0] == end) break;
            }
        }
    }
    if (!saw_format) throw MalformedSection("no $MeshFormat section");
    if (!saw_elements) throw MalformedSection("no $Elements section");
    if (tets.empty()) throw NoVolumeElements("file contains no tetrahedra");

    // drop nodes no tetrahedron references, keeping first-appearance order
    std::vector<std::uint8_t> used(tags.size(), 0);
    for (const Simplex& s : tets)
        for (VertexId v : s.vertices) used[std::size_t(v)] = 1;
    std::vector<VertexId> remap(tags.size(), -1);
    std::vector<double> dense_coords;
    std::vector<long> dense_tags;
    for (std::size_t v = 0; v < tags.size(); ++v) {
        if (!used[v]) continue;
        remap[v] = VertexId(dense_tags.size());
        dense_tags.push_back(tags[v]);
        for (int c = 0; c < 3; ++c) dense_coords.push_back(coords[v * 3 + std::size_t(c)]);
    }
    for (Simplex& s : tets)
        for (VertexId& v : s.vertices) v = remap[std::size_t(v)];

    result.mesh = Mesh(3, std::move(dense_coords), std::move(tets));
    result.original_node_tags = std::move(dense_tags);
    return result;
}

inline Mesh read_msh(const std::filesystem::path& path) { return read_msh_detailed(path).mesh; }

inline void write_msh(const Mesh& m, const std::filesystem::path& path) {
    if (m.dim() != 3) throw UnsupportedDimension("MSH output is for 3d meshes");
    auto out = detail::open_out(path);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << m.vertex_count() << "\n";
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        const auto p = m.point(VertexId(v));
        out << (v + 1) << " " << format_double(p[0]) << " " << format_double(p[1]) << " "
            << format_double(p[2]) << "\n";
    }
    out << "$EndNodes\n$Elements\n" << m.element_count() << "\n";
    for (std::size_t e = 0; e < m.element_count(); ++e) {
        const Simplex& s = m.element(e);
        out << (e + 1) << " 4 2 0 0";
        for (VertexId v : s.vertices) out << " " << (v + 1);
        out << "\n";
    }
    out << "$EndElements\n";
    if (!out) throw IoFailure("write failed for '" + path.string() + "'");
}

// --- legacy VTK --------------------------------------------------------------

/// Legacy ASCII unstructured grid with per-cell type tag, generation and the
/// number of its interior faces that are neither strongly nor quasi-strongly
/// compatible (-1 when the mesh is not conforming).
inline void write_vtk(const Mesh& m, const std::filesystem::path& path) {
    const int d = m.dim();
    if (d != 2 && d != 3) throw UnsupportedDimension("VTK output is for 2d and 3d meshes");
    auto out = detail::open_out(path);
    out << "# vtk DataFile Version 2.0\ndsimp mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << m.vertex_count() << " double\n";
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        const auto p = m.point(VertexId(v));
        out << format_double(p[0]) << " " << format_double(p[1]) << " "
            << (d == 3 ? format_double(p[2]) : std::string("0")) << "\n";
    }
    const std::size_t n = m.element_count();
    out << "CELLS " << n << " " << n * std::size_t(d + 2) << "\n";
    for (const Simplex& s : m.elements()) {
        out << (d + 1);
        for (VertexId v : s.vertices) out << " " << v;
        out << "\n";
    }
    out << "CELL_TYPES " << n << "\n";
    for (std::size_t e = 0; e < n; ++e) out << (d == 3 ? 10 : 5) << "\n";

    std::vector<long> noncompat(n, -1);
    if (is_conforming(m)) {
        std::fill(noncompat.begin(), noncompat.end(), 0);
        for (const auto& [face, pair] : interior_faces(m)) {
            const auto c =
                detail::classify_face_pair(m, face, m.element(pair.first), m.element(pair.second)).cls;
            if (c == FaceClass::WeaklyOnly || c == FaceClass::Incompatible) {
                ++noncompat[pair.first];
                ++noncompat[pair.second];
            }
        }
    }
    out << "CELL_DATA " << n << "\n";
    out << "SCALARS type_tag int 1\nLOOKUP_TABLE default\n";
    for (const Simplex& s : m.elements()) out << s.type << "\n";
    out << "SCALARS generation int 1\nLOOKUP_TABLE default\n";
    for (int g : m.generations()) out << g << "\n";
    out << "SCALARS noncompat_faces int 1\nLOOKUP_TABLE default\n";
    for (long c : noncompat) out << c << "\n";
    if (!out) throw IoFailure("write failed for '" + path.string() + "'");
}

}  // namespace dsimp
