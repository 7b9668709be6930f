#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace dsimp;
using namespace dsimp::testing;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    const auto dir = fs::temp_directory_path() / "dsimp_io_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path data(const char* name) { return fs::path(DSIMP_TEST_DATA_DIR) / name; }

}  // namespace

TEST_CASE("native format round trips", "[io]") {
    SECTION("plain Kuhn cube") {
        const Mesh m = generate_kuhn_grid(3, 1);
        const auto path = tmp_dir() / "kuhn.dsimp";
        write_native(m, path);
        CHECK(read_native(path) == m);
    }
    SECTION("4d grid") {
        const Mesh m = generate_kuhn_grid(4, 1);
        REQUIRE(m.element_count() == 24);
        const auto path = tmp_dir() / "kuhn4.dsimp";
        write_native(m, path);
        CHECK(read_native(path) == m);
    }
    SECTION("refined mesh keeps registry, generations and types") {
        Mesh m = generate_kuhn_grid(3, 1);
        refine_closure(m, {0, 3});
        REQUIRE_FALSE(m.bisection_registry().empty());
        const auto path = tmp_dir() / "refined.dsimp";
        write_native(m, path);
        CHECK(read_native(path) == m);
    }
    SECTION("relabeled mesh keeps irrational-free exact coordinates") {
        Mesh m = perturbed_shuffled_kuhn(3, 2, 3);
        relabel_pipeline(m, SetStrategy::ILE, 4, OrderStrategy::SRN2);
        const auto path = tmp_dir() / "relabel.dsimp";
        write_native(m, path);
        CHECK(read_native(path) == m);
    }
    SECTION("truncated files report the offending line") {
        const auto path = tmp_dir() / "broken.dsimp";
        std::ofstream(path) << "dsimp 3\nvertices 4\n0 0 0\n";
        try {
            read_native(path);
            FAIL("no exception");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("line") != std::string::npos);
        }
    }
    SECTION("unknown trailing section is rejected") {
        const auto path = tmp_dir() / "trailing.dsimp";
        write_native(generate_kuhn_grid(3, 1), path);
        std::ofstream(path, std::ios::app) << "surprise 1\n";
        CHECK_THROWS_AS(read_native(path), ParseError);
    }
}

TEST_CASE("MSH reader", "[io]") {
    SECTION("golden two-tet file") {
        const auto res = read_msh_detailed(data("two_tets.msh"));
        CHECK(res.mesh.dim() == 3);
        CHECK(res.mesh.element_count() == 2);
        CHECK(res.mesh.vertex_count() == 5);
        CHECK(res.ignored_points == 1);
        CHECK(res.ignored_triangles == 1);
        CHECK(res.original_node_tags == std::vector<long>{10, 20, 30, 40, 55});
        for (const Simplex& s : res.mesh.elements()) CHECK(s.type == 0);
        CHECK(interior_faces(res.mesh).size() == 1);
    }
    SECTION("triangles only") {
        CHECK_THROWS_AS(read_msh(data("triangles_only.msh")), NoVolumeElements);
    }
    SECTION("unsupported version") {
        CHECK_THROWS_AS(read_msh(data("unsupported_version.msh")), UnsupportedVersion);
    }
    SECTION("write then read is a fixpoint") {
        const Mesh first = read_msh(data("two_tets.msh"));
        const auto path = tmp_dir() / "roundtrip.msh";
        write_msh(first, path);
        const Mesh second = read_msh(path);
        CHECK(second == first);
        write_msh(second, path);
        CHECK(read_msh(path) == second);
    }
    SECTION("non-contiguous tags keep adjacency") {
        const Mesh m = read_msh(data("two_tets.msh"));
        std::multiset<FaceKey> faces;
        for (const Simplex& s : m.elements())
            for (std::size_t pos = 0; pos < s.vertices.size(); ++pos) faces.insert(face_omitting(s, pos));
        CHECK(faces.size() == 8);
        CHECK(interior_faces(m).size() == 1);
    }
    SECTION("msh output rejects non-3d meshes") {
        CHECK_THROWS_AS(write_msh(generate_kuhn_grid(2, 1), tmp_dir() / "bad.msh"), UnsupportedDimension);
    }
}

TEST_CASE("legacy VTK writer", "[io]") {
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    SECTION("tetrahedra use cell type 10") {
        const auto path = tmp_dir() / "tet.vtk";
        write_vtk(unit_tetra(), path);
        const auto text = slurp(path);
        CHECK(text.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
        CHECK(text.find("CELL_TYPES 1\n10") != std::string::npos);
        CHECK(text.find("SCALARS type_tag int 1") != std::string::npos);
        CHECK(text.find("SCALARS generation int 1") != std::string::npos);
        CHECK(text.find("SCALARS noncompat_faces int 1") != std::string::npos);
    }
    SECTION("triangles use cell type 5 and padded points") {
        const auto path = tmp_dir() / "tri.vtk";
        write_vtk(generate_kuhn_grid(2, 1), path);
        const auto text = slurp(path);
        CHECK(text.find("CELL_TYPES 2\n5") != std::string::npos);
    }
    SECTION("4d meshes are rejected") {
        CHECK_THROWS_AS(write_vtk(generate_kuhn_grid(4, 1), tmp_dir() / "nope.vtk"),
                        UnsupportedDimension);
    }
}
