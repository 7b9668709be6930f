#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace dsimp;
using namespace dsimp::testing;

TEST_CASE("equivalent orderings enumeration", "[compat]") {
    // type 0 admits exactly the identity and the full reversal
    for (int d : {2, 3, 4}) {
        const auto& sigmas = equivalent_orderings(d, 0);
        REQUIRE(sigmas.size() == 2);
        std::vector<int> identity, reversal;
        for (int i = 0; i <= d; ++i) identity.push_back(i);
        reversal.assign(identity.rbegin(), identity.rend());
        CHECK(std::find(sigmas.begin(), sigmas.end(), identity) != sigmas.end());
        CHECK(std::find(sigmas.begin(), sigmas.end(), reversal) != sigmas.end());
    }
    // every listed permutation really preserves the tree
    for (int t : {0, 1, 2}) {
        for (const auto& sigma : equivalent_orderings(3, t)) {
            Simplex base{{0, 1, 2, 3}, t}, permuted;
            permuted.type = t;
            for (int i = 0; i <= 3; ++i) permuted.vertices.push_back(sigma[std::size_t(i)]);
            CHECK(nvb_equivalent(base, permuted));
        }
    }
}

TEST_CASE("reflected neighbors", "[compat]") {
    CHECK(reflected_neighbors(Simplex{{0, 1, 2, 3}, 0}, Simplex{{0, 1, 2, 4}, 0}));
    CHECK_FALSE(reflected_neighbors(Simplex{{0, 1, 2, 3}, 0}, Simplex{{0, 1, 2, 4}, 1}));
    // reversal is an equivalent reordering, aligning the apexes
    CHECK(reflected_neighbors(Simplex{{0, 1, 2, 3}, 0}, Simplex{{4, 2, 1, 0}, 0}));
    CHECK_THROWS_AS(reflected_neighbors(Simplex{{0, 1, 2, 3}, 0}, Simplex{{0, 1, 4, 5}, 0}),
                    NotNeighbors);
}

TEST_CASE("weakest compatibility check", "[compat]") {
    SECTION("agreeing orderings pass") {
        Mesh m = two_tets({0, 1, 2, 3}, {0, 1, 2, 4});
        CHECK(check_weakest(m).empty());
    }
    SECTION("conflicting face roots fail") {
        Mesh m = two_tets({0, 1, 2, 3}, {1, 0, 2, 4});
        const auto failures = check_weakest(m);
        REQUIRE(failures.size() == 1);
        CHECK(failures[0] == FaceKey{0, 1, 2});
    }
    SECTION("single element has no interior faces") {
        CHECK(check_weakest(unit_tetra()).empty());
    }
    SECTION("requires a conforming mesh") {
        Mesh m = two_tets({0, 1, 2, 3}, {0, 1, 2, 4});
        bisect(m, std::size_t(0));  // bisects {0,3}, conforming so far
        bisect(m, std::size_t(0));  // bisects {0,2}, hangs on the other tet
        REQUIRE_FALSE(is_conforming(m));
        CHECK_THROWS_AS(check_weakest(m), NonConformingMesh);
    }
}

TEST_CASE("weak compatibility certificate", "[compat]") {
    SECTION("relabeled meshes pass") {
        for (std::uint64_t seed : {1ull, 2ull}) {
            Mesh m = perturbed_shuffled_kuhn(3, 2, seed);
            relabel_pipeline(m, SetStrategy::ILE, 5, OrderStrategy::SRN);
            CHECK(check_weak(m).weakly_compatible());
        }
    }
    SECTION("any conforming 2d mesh relabels to weakly compatible") {
        Mesh m = crisscross_grid(3);
        apply_identity_labeling(m);
        CHECK(check_weak(m).weakly_compatible());
    }
    SECTION("a weakest failure is reported") {
        Mesh m = two_tets({0, 1, 2, 3}, {1, 0, 2, 4});
        const auto rep = check_weak(m);
        CHECK_FALSE(rep.weakest_ok);
        CHECK_FALSE(rep.weakly_compatible());
    }
}

TEST_CASE("face classification", "[compat]") {
    SECTION("reflected pair is strong") {
        Mesh m = two_tets({0, 1, 2, 3}, {0, 1, 2, 4});
        CHECK(classify_face(m, make_face({0, 1, 2})) == FaceClass::Strong);
    }
    SECTION("structured Kuhn grid is strong everywhere") {
        Mesh m = generate_kuhn_grid(3, 2);
        for (const auto& [face, pair] : interior_faces(m))
            CHECK(classify_face(m, face) == FaceClass::Strong);
    }
    SECTION("weakest failure classifies incompatible") {
        Mesh m = two_tets({0, 1, 2, 3}, {1, 0, 2, 4});
        CHECK(classify_face(m, make_face({0, 1, 2})) == FaceClass::Incompatible);
    }
    SECTION("boundary faces are rejected") {
        Mesh m = unit_tetra();
        CHECK_THROWS_AS(classify_face(m, make_face({0, 1, 2})), BoundaryFace);
    }
    SECTION("a once-refined reflected pair is quasi-strong") {
        // bisecting one side of a reflected pair leaves the shared face with
        // neighbors whose types differ by one
        Mesh m = two_tets({0, 1, 2, 3}, {0, 1, 2, 4});
        bisect(m, std::size_t(1));  // splits [0,1,2,4] at {0,4}
        REQUIRE(is_conforming(m));
        CHECK(classify_face(m, make_face({0, 1, 2})) == FaceClass::QuasiStrong);
        const auto rep = distance1(m);
        CHECK(rep.quasi_strong >= 1);
        CHECK(rep.d1() == 0);
    }
    SECTION("classification is orientation independent") {
        Mesh a = two_tets({0, 1, 2, 3}, {1, 0, 2, 4});
        Mesh b = two_tets({1, 0, 2, 4}, {0, 1, 2, 3});
        CHECK(classify_face(a, make_face({0, 1, 2})) == classify_face(b, make_face({0, 1, 2})));
    }
}

TEST_CASE("distance-1 reports", "[compat]") {
    SECTION("single element") {
        const auto rep = distance1(unit_tetra());
        CHECK(rep.interior_faces == 0);
        CHECK(rep.d1() == 0);
        CHECK(rep.boundary_faces == 4);
    }
    SECTION("Kuhn grid is strongly compatible as generated") {
        const auto rep = distance1(generate_kuhn_grid(3, 2));
        CHECK(rep.d1() == 0);
        CHECK(rep.strong == rep.interior_faces);
    }
    SECTION("incompatible pair contributes one") {
        const auto rep = distance1(two_tets({0, 1, 2, 3}, {1, 0, 2, 4}));
        CHECK(rep.interior_faces == 1);
        CHECK(rep.d1() == 1);
        CHECK(rep.incompatible == 1);
    }
    SECTION("boundary faces count as compatible when included") {
        const auto rep = distance1(two_tets({0, 1, 2, 3}, {1, 0, 2, 4}), true);
        CHECK(rep.boundary_included);
        CHECK(rep.face_total() == 7);
        CHECK(rep.d1() == 1);
    }
    SECTION("strong faces always pass the weakest check") {
        for (Mesh m : {generate_kuhn_grid(3, 2), crisscross_grid(3)}) {
            apply_identity_labeling(m);
            const auto failures = check_weakest(m);
            for (const auto& [face, pair] : interior_faces(m)) {
                if (classify_face(m, face) == FaceClass::Strong)
                    CHECK(std::find(failures.begin(), failures.end(), face) == failures.end());
            }
        }
    }
    SECTION("invariant under global vertex renumbering") {
        Mesh m = perturbed_shuffled_kuhn(3, 2, 5);
        relabel_pipeline(m, SetStrategy::LAE, 20, OrderStrategy::SRN2);
        const auto before = distance1(m);

        // renumber ids with a permutation and carry the element lists along
        std::mt19937_64 rng(99);
        std::vector<VertexId> remap(m.vertex_count());
        for (std::size_t v = 0; v < remap.size(); ++v) remap[v] = VertexId(v);
        std::shuffle(remap.begin(), remap.end(), rng);
        std::vector<double> coords(m.coords().size());
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            const auto p = m.point(VertexId(v));
            for (int c = 0; c < m.dim(); ++c)
                coords[std::size_t(remap[v]) * 3 + std::size_t(c)] = p[std::size_t(c)];
        }
        std::vector<Simplex> elems;
        for (const Simplex& s : m.elements()) {
            Simplex t;
            t.type = s.type;
            for (VertexId v : s.vertices) t.vertices.push_back(remap[std::size_t(v)]);
            elems.push_back(std::move(t));
        }
        Mesh renumbered(3, std::move(coords), std::move(elems));
        const auto after = distance1(renumbered);
        CHECK(after.d1() == before.d1());
        CHECK(after.strong == before.strong);
        CHECK(after.quasi_strong == before.quasi_strong);
    }
}
