#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace dsimp;
using namespace dsimp::testing;

namespace {

std::set<std::pair<VertexId, VertexId>> level_edges(const EdgeTree& t, std::size_t level) {
    std::set<std::pair<VertexId, VertexId>> out;
    const auto levels = t.levels();
    REQUIRE(level < levels.size());
    for (int n : levels[level]) {
        auto ids = t.edge_ids(n);
        REQUIRE(ids.has_value());
        out.insert(*ids);
    }
    return out;
}

}  // namespace

TEST_CASE("refinement edge", "[refine]") {
    for (int t : {0, 1, 2})
        CHECK(refinement_edge(Simplex{{10, 11, 12, 13}, t}) == make_edge(10, 13));

    // children of a type-0 tetra bisect {z0,z2} and {z1,z3}
    auto [c0, c1] = bisect_children(Simplex{{0, 1, 2, 3}, 0}, 99);
    CHECK(refinement_edge(c0) == make_edge(0, 2));
    CHECK(refinement_edge(c1) == make_edge(1, 3));
    // for types 1 and 2 the second child bisects {z3,z2}
    for (int t : {1, 2}) {
        auto [d0, d1] = bisect_children(Simplex{{0, 1, 2, 3}, t}, 99);
        CHECK(refinement_edge(d0) == make_edge(0, 2));
        CHECK(refinement_edge(d1) == make_edge(3, 2));
    }
}

TEST_CASE("bisection children", "[refine]") {
    SECTION("3d type cases") {
        auto [a0, a1] = bisect_children(Simplex{{0, 1, 2, 3}, 0}, 7);
        CHECK(a0 == Simplex{{0, 7, 1, 2}, 1});
        CHECK(a1 == Simplex{{3, 7, 2, 1}, 1});

        auto [b0, b1] = bisect_children(Simplex{{0, 1, 2, 3}, 1}, 7);
        CHECK(b0 == Simplex{{0, 7, 1, 2}, 2});
        CHECK(b1 == Simplex{{3, 7, 1, 2}, 2});

        auto [c0, c1] = bisect_children(Simplex{{0, 1, 2, 3}, 2}, 7);
        CHECK(c0 == Simplex{{0, 7, 1, 2}, 0});
        CHECK(c1 == Simplex{{3, 7, 1, 2}, 0});
    }
    SECTION("2d") {
        auto [c0, c1] = bisect_children(Simplex{{0, 1, 2}, 0}, 5);
        CHECK(c0 == Simplex{{0, 5, 1}, 1});
        CHECK(c1 == Simplex{{2, 5, 1}, 1});
    }
    SECTION("mesh-level bisection keeps position and registry") {
        Mesh m = two_tets({0, 1, 2, 3}, {0, 1, 2, 4});
        auto [c0, c1] = bisect(m, std::size_t(0));
        REQUIRE(m.element_count() == 3);
        CHECK(m.element(0) == c0);
        CHECK(m.element(1) == c1);
        CHECK(m.generation(0) == 1);
        CHECK(m.generation(2) == 0);
        const VertexId mid = *m.registered_midpoint(make_edge(0, 3));
        auto p = m.point(mid);
        CHECK(p[0] == 0.15);
        CHECK(p[2] == 0.5);
        CHECK_THROWS_AS(bisect(m, Simplex{{0, 1, 2, 3}, 0}), NotALeaf);
    }
    SECTION("type cycles by +1 mod d") {
        Simplex s{{0, 1, 2, 3, 4}, 2};
        for (int k = 1; k <= 7; ++k) {
            s = bisect_children(s, 100 + k).first;
            CHECK(s.type == (2 + k) % 4);
        }
    }
}

TEST_CASE("refinement trees match the uniform bisection cascade", "[refine]") {
    SECTION("type 0 in 3d") {
        const auto t = refinement_tree(Simplex{{0, 1, 2, 3}, 0}, 3);
        CHECK(level_edges(t, 0) == std::set<std::pair<VertexId, VertexId>>{{0, 3}});
        CHECK(level_edges(t, 1) == std::set<std::pair<VertexId, VertexId>>{{0, 2}, {1, 3}});
        CHECK(level_edges(t, 2) ==
              std::set<std::pair<VertexId, VertexId>>{{0, 1}, {1, 2}, {2, 3}});
    }
    SECTION("type 1 in 3d; last level holds the starred vertex") {
        const VertexId star = 9;
        const auto t = refinement_tree(Simplex{{0, star, 1, 2}, 1}, 3);
        CHECK(level_edges(t, 0) == std::set<std::pair<VertexId, VertexId>>{{0, 2}});
        CHECK(level_edges(t, 1) == std::set<std::pair<VertexId, VertexId>>{{0, 1}, {1, 2}});
        CHECK(level_edges(t, 2) ==
              std::set<std::pair<VertexId, VertexId>>{{0, star}, {1, star}, {2, star}});
    }
    SECTION("2d type 0 at depth 2") {
        const auto t = refinement_tree(Simplex{{4, 5, 6}, 0}, 2);
        CHECK(level_edges(t, 0) == std::set<std::pair<VertexId, VertexId>>{{4, 6}});
        CHECK(level_edges(t, 1) == std::set<std::pair<VertexId, VertexId>>{{4, 5}, {5, 6}});
    }
}

TEST_CASE("NVB equivalence", "[refine]") {
    CHECK(nvb_equivalent(Simplex{{0, 1, 2, 3}, 0}, Simplex{{3, 2, 1, 0}, 0}));
    CHECK(nvb_equivalent(Simplex{{0, 1, 2, 3, 4}, 0}, Simplex{{4, 3, 2, 1, 0}, 0}));
    CHECK_FALSE(nvb_equivalent(Simplex{{0, 1, 2, 3}, 0}, Simplex{{0, 2, 1, 3}, 0}));
    CHECK_THROWS_AS(nvb_equivalent(Simplex{{0, 1, 2, 3}, 0}, Simplex{{0, 1, 2, 4}, 0}),
                    VertexSetMismatch);

    SECTION("equivalence relation over all orderings of a tetra") {
        std::vector<Simplex> all;
        std::vector<VertexId> perm{0, 1, 2, 3};
        do {
            for (int t : {0, 1, 2}) all.push_back(Simplex{perm, t});
        } while (std::next_permutation(perm.begin(), perm.end()));
        std::mt19937 rng(3);
        for (int trial = 0; trial < 300; ++trial) {
            const Simplex& a = all[rng() % all.size()];
            const Simplex& b = all[rng() % all.size()];
            const Simplex& c = all[rng() % all.size()];
            CHECK(nvb_equivalent(a, a));
            CHECK(nvb_equivalent(a, b) == nvb_equivalent(b, a));
            if (nvb_equivalent(a, b) && nvb_equivalent(b, c)) CHECK(nvb_equivalent(a, c));
        }
    }
}

TEST_CASE("face trace types", "[refine]") {
    const Simplex t0{{0, 1, 2, 3}, 0};
    for (std::size_t pos = 0; pos < 4; ++pos) CHECK(face_trace_type(t0, face_omitting(t0, pos)) == 0);

    const Simplex t1{{0, 9, 1, 2}, 1};
    CHECK(face_trace_type(t1, make_face({0, 9, 1})) == 1);
    CHECK(face_trace_type(t1, make_face({0, 1, 2})) == 0);

    const Simplex t2{{0, 8, 9, 1, 2}, 2};
    CHECK(face_trace_type(t2, make_face({0, 8, 1, 2})) == 1);  // omits the second starred vertex
    CHECK(face_trace_type(t2, make_face({0, 8, 9, 1})) == 2);
    CHECK(face_trace_type(t2, make_face({8, 9, 1, 2})) == 2);
}

TEST_CASE("face trace rejects foreign faces", "[refine]") {
    CHECK_THROWS_AS(face_trace_type(Simplex{{0, 1, 2, 3}, 0}, make_face({0, 1, 7})), FaceNotInSimplex);
    CHECK_THROWS_AS(induced_face_tree(Simplex{{0, 1, 2, 3}, 0}, make_face({0, 1, 7})), FaceNotInSimplex);
}

TEST_CASE("induced face refinement", "[refine]") {
    SECTION("initial refinement edges of the tetrahedron faces") {
        const Simplex t0{{0, 1, 2, 3}, 0};
        auto tree = induced_face_tree(t0, make_face({1, 2, 3}));
        CHECK(level_edges(tree, 0) == std::set<std::pair<VertexId, VertexId>>{{1, 3}});

        const Simplex t1{{0, 1, 2, 3}, 1};
        tree = induced_face_tree(t1, make_face({1, 2, 3}));
        CHECK(level_edges(tree, 0) == std::set<std::pair<VertexId, VertexId>>{{2, 3}});

        tree = induced_face_tree(t0, make_face({0, 1, 2}));
        CHECK(level_edges(tree, 0) == std::set<std::pair<VertexId, VertexId>>{{0, 2}});
        CHECK(level_edges(tree, 1) == std::set<std::pair<VertexId, VertexId>>{{0, 1}, {1, 2}});
    }
    SECTION("matches the refinement tree of the traced face for types 0 and 1") {
        // type 0: the face omitting position i is NVB-equivalent to the
        // sub-ordering at type 0; type 1: faces keep the star rule
        const Simplex t0{{4, 7, 1, 9}, 0};
        for (std::size_t pos = 0; pos < 4; ++pos) {
            Simplex face_simplex;
            face_simplex.type = 0;
            for (std::size_t i = 0; i < 4; ++i)
                if (i != pos) face_simplex.vertices.push_back(t0.vertices[i]);
            const auto induced = induced_face_tree(t0, face_omitting(t0, pos));
            const auto direct = refinement_tree(face_simplex, 2);
            CHECK(edge_tree_equal(induced, direct, 2));
        }
        // type 1: the faces keeping z0 follow the sub-ordering; the ordering
        // of the face omitting z0 is not pinned down, so it is not asserted
        const Simplex t1{{4, 7, 1, 9}, 1};  // star = 7
        for (std::size_t pos = 1; pos < 4; ++pos) {
            Simplex face_simplex;
            face_simplex.type = pos == 1 ? 0 : 1;
            for (std::size_t i = 0; i < 4; ++i)
                if (i != pos) face_simplex.vertices.push_back(t1.vertices[i]);
            const auto induced = induced_face_tree(t1, face_omitting(t1, pos));
            const auto direct = refinement_tree(face_simplex, 2);
            CHECK(edge_tree_equal(induced, direct, 2));
        }
    }
}

TEST_CASE("uniform refinement", "[refine]") {
    SECTION("k = 0 is the identity") {
        Mesh m = generate_kuhn_grid(3, 1);
        Mesh copy = m;
        uniform_refine(copy, 0);
        CHECK(copy == m);
    }
    SECTION("doubles per pass") {
        Mesh m = generate_kuhn_grid(2, 2);
        uniform_refine(m, 3);
        CHECK(m.element_count() == 8 * 8);
    }
    SECTION("Kuhn cube is conforming after d passes") {
        Mesh m = generate_kuhn_grid(3, 1);
        uniform_refine(m, 1);
        CHECK(is_conforming(m));  // all six tets share the diagonal
        uniform_refine(m, 2);
        CHECK(m.element_count() == 48);
        CHECK(is_conforming(m));
    }
    SECTION("weakly compatible mixed type-0/1 meshes conform every d-th pass") {
        Mesh m = crisscross_grid(3);
        relabel_pipeline(m, SetStrategy::LAE, 4, OrderStrategy::SRN);
        bool mixed = false;
        for (const Simplex& s : m.elements()) mixed |= s.type == 1;
        REQUIRE(mixed);  // 2d labelings only produce types 0 and 1
        REQUIRE(check_weak(m).weakly_compatible());
        uniform_refine(m, 2);
        CHECK(is_conforming(m));
        uniform_refine(m, 2);
        CHECK(is_conforming(m));
    }
}

TEST_CASE("registry midpoints are exact coordinate means", "[refine]") {
    Mesh m = perturbed_shuffled_kuhn(3, 2, 55);
    relabel_pipeline(m, SetStrategy::ILE, 2, OrderStrategy::SRN);
    refine_closure(m, {0, 5, 17});
    for (const auto& [e, mid] : m.bisection_registry()) {
        const auto a = m.point(e[0]), b = m.point(e[1]), p = m.point(mid);
        for (int c = 0; c < 3; ++c)
            CHECK(p[std::size_t(c)] == 0.5 * (a[std::size_t(c)] + b[std::size_t(c)]));
    }
}

TEST_CASE("refinement trees are complete binary trees", "[refine]") {
    for (int depth : {1, 2, 3, 4}) {
        const auto t = refinement_tree(Simplex{{0, 1, 2, 3}, 1}, depth);
        CHECK(t.nodes.size() == (std::size_t(1) << depth) - 1);
        const auto levels = t.levels();
        REQUIRE(levels.size() == std::size_t(depth));
        for (std::size_t l = 0; l < levels.size(); ++l)
            CHECK(levels[l].size() == (std::size_t(1) << l));
    }
}

TEST_CASE("conformity detection", "[refine]") {
    CHECK(is_conforming(generate_kuhn_grid(2, 3)));
    // two triangles sharing edge {0,2}; bisecting only one leaves a hanging vertex
    Mesh m = build_mesh(2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {Simplex{{0, 1, 2}, 0}, Simplex{{0, 3, 2}, 0}});
    bisect(m, std::size_t(0));
    CHECK_FALSE(is_conforming(m));
}

TEST_CASE("conforming closure", "[refine]") {
    SECTION("single element") {
        Mesh m = unit_tetra();
        auto res = refine_closure(m, {0});
        CHECK(res.bisections == 1);
        CHECK(m.element_count() == 2);
        CHECK(is_conforming(m));
        CHECK(res.input_leaf_bisected == std::vector<std::uint8_t>{1});
    }
    SECTION("2d square propagates across the diagonal") {
        Mesh m = build_mesh(2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                            {Simplex{{0, 1, 2}, 0}, Simplex{{0, 3, 2}, 0}});
        auto res = refine_closure(m, {0});
        CHECK(res.bisections == 2);
        CHECK(m.element_count() == 4);
        CHECK(is_conforming(m));
    }
    SECTION("empty mark set is the identity") {
        Mesh m = generate_kuhn_grid(3, 1);
        Mesh copy = m;
        auto res = refine_closure(copy, {});
        CHECK(res.bisections == 0);
        CHECK(copy == m);
    }
    SECTION("matches the brute-force oracle on the Kuhn cube") {
        for (std::size_t mark = 0; mark < 6; ++mark) {
            Mesh a = generate_kuhn_grid(3, 1);
            Mesh b = a;
            const long engine = refine_closure(a, {mark}).bisections;
            const long oracle = closure_oracle(b, {mark});
            CHECK(engine == oracle);
            CHECK(a.element_count() == b.element_count());
        }
    }
    SECTION("generation guard trips when configured tightly") {
        Mesh m = generate_kuhn_grid(3, 1);
        ClosureOptions opt;
        opt.generation_limit = 0;
        CHECK_THROWS_AS(refine_closure(m, {0}, opt), NonTermination);
    }
    SECTION("mark indices are validated") {
        Mesh m = unit_tetra();
        CHECK_THROWS_AS(refine_closure(m, {5}), IndexOutOfRange);
    }
    SECTION("precondition check flag rejects non-conforming input") {
        Mesh m = two_tets({0, 1, 2, 3}, {0, 1, 2, 4});
        bisect(m, std::size_t(0));
        bisect(m, std::size_t(0));
        REQUIRE_FALSE(is_conforming(m));
        ClosureOptions opt;
        opt.check_preconditions = true;
        CHECK_THROWS_AS(refine_closure(m, {}, opt), NonConformingMesh);
    }
}

TEST_CASE("type-0 completion", "[refine]") {
    SECTION("all-type-0 mesh is untouched") {
        Mesh m = generate_kuhn_grid(3, 2);
        Mesh copy = m;
        type0_completion(copy);
        CHECK(copy == m);
    }
    SECTION("a single type-1 tetra becomes four type-0 leaves") {
        Mesh m = unit_tetra(1);
        type0_completion(m);
        CHECK(m.element_count() == 4);
        for (const Simplex& s : m.elements()) CHECK(s.type == 0);
    }
    SECTION("labeled mesh bisects exactly the V0-V0 edges of its typed leaves") {
        Mesh m = perturbed_shuffled_kuhn(3, 2, 77);
        auto outcome = relabel_pipeline(m, SetStrategy::LAE, 15, OrderStrategy::SRN);
        Mesh completed = m;
        type0_completion(completed);

        std::set<EdgeKey> expected;
        for (const Simplex& s : m.elements()) {
            if (s.type == 0) continue;  // untouched by this op
            const auto& z = s.vertices;
            for (std::size_t a = 0; a < z.size(); ++a)
                for (std::size_t b = a + 1; b < z.size(); ++b)
                    if (!outcome.partition.in_v1[std::size_t(z[a])] &&
                        !outcome.partition.in_v1[std::size_t(z[b])])
                        expected.insert(make_edge(z[a], z[b]));
        }
        std::set<EdgeKey> bisected;
        for (const auto& [e, mid] : completed.bisection_registry()) bisected.insert(e);
        CHECK(bisected == expected);
    }
}
