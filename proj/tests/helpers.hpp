#pragma once

// Shared fixtures for the test suites.

#include "dsimp/dsimp.hpp"

#include <random>

namespace dsimp::testing {

inline Mesh unit_tetra(int type = 0) {
    return build_mesh(3, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {Simplex{{0, 1, 2, 3}, type}});
}

/// Two tetrahedra sharing face {0,1,2}; apex ids 3 and 4.  The vertex lists
/// of both elements are given explicitly so orderings can be controlled.
inline Mesh two_tets(std::vector<VertexId> first, std::vector<VertexId> second, int t1 = 0, int t2 = 0) {
    return build_mesh(3,
                      {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.3, 0.3, 1}, {0.3, 0.3, -1}},
                      {Simplex{std::move(first), t1}, Simplex{std::move(second), t2}});
}

/// Square grid with alternating diagonal directions (criss-cross pattern).
inline Mesh crisscross_grid(int cells) {
    const int np = cells + 1;
    std::vector<Point> pts;
    for (int y = 0; y < np; ++y)
        for (int x = 0; x < np; ++x) pts.push_back({double(x) / cells, double(y) / cells});
    auto id = [&](int x, int y) { return VertexId(x + np * y); };
    std::vector<Simplex> elems;
    for (int y = 0; y < cells; ++y)
        for (int x = 0; x < cells; ++x) {
            const VertexId a = id(x, y), b = id(x + 1, y), c = id(x + 1, y + 1), e = id(x, y + 1);
            if ((x + y) % 2 == 0) {
                elems.push_back({{a, b, c}, 0});
                elems.push_back({{a, e, c}, 0});
            } else {
                elems.push_back({{a, b, e}, 0});
                elems.push_back({{b, c, e}, 0});
            }
        }
    return build_mesh(2, pts, elems);
}

/// Kuhn grid with jittered coordinates and shuffled vertex ids; stays a valid
/// simplicial complex (jitter is well below the cell size).
inline Mesh perturbed_shuffled_kuhn(int dim, int cells, std::uint64_t seed) {
    const Mesh base = generate_kuhn_grid(dim, cells);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.02 / cells, 0.02 / cells);

    const std::size_t nv = base.vertex_count();
    std::vector<VertexId> remap(nv);
    for (std::size_t v = 0; v < nv; ++v) remap[v] = VertexId(v);
    std::shuffle(remap.begin(), remap.end(), rng);

    std::vector<double> coords(nv * std::size_t(dim));
    for (std::size_t v = 0; v < nv; ++v) {
        const auto p = base.point(VertexId(v));
        for (int c = 0; c < dim; ++c)
            coords[std::size_t(remap[v]) * std::size_t(dim) + std::size_t(c)] =
                p[std::size_t(c)] + jitter(rng);
    }
    std::vector<Simplex> elems;
    for (const Simplex& s : base.elements()) {
        Simplex t;
        t.type = s.type;
        for (VertexId v : s.vertices) t.vertices.push_back(remap[std::size_t(v)]);
        elems.push_back(std::move(t));
    }
    std::shuffle(elems.begin(), elems.end(), rng);
    return Mesh(dim, std::move(coords), std::move(elems));
}

/// Labels every vertex into V0 with rank = vertex id (the naive ordering).
inline void apply_identity_labeling(Mesh& m) {
    VertexPartition p;
    p.in_v1.assign(m.vertex_count(), 0);
    p.rank0.resize(m.vertex_count());
    p.rank1.assign(m.vertex_count(), -1);
    for (std::size_t v = 0; v < m.vertex_count(); ++v) p.rank0[v] = std::int64_t(v);
    apply_labeling(m, p);
}

/// Independent conforming-closure oracle: bisects the marked leaves one by
/// one, then repeatedly rescans the whole leaf list from the start and
/// bisects the first leaf with a hanging vertex, until none remains.
inline long closure_oracle(Mesh& m, const std::vector<std::size_t>& marks) {
    long bisections = 0;
    // marked leaves shift as earlier bisections insert children; track by value
    std::vector<Simplex> targets;
    for (std::size_t i : marks) targets.push_back(m.element(i));
    for (const Simplex& t : targets) {
        bisect(m, t);
        ++bisections;
    }
    while (true) {
        bool found = false;
        for (std::size_t i = 0; i < m.element_count() && !found; ++i) {
            const auto& z = m.element(i).vertices;
            for (std::size_t a = 0; a < z.size() && !found; ++a)
                for (std::size_t b = a + 1; b < z.size() && !found; ++b) {
                    auto mid = m.registered_midpoint(make_edge(z[a], z[b]));
                    if (mid && !m.element(i).contains(*mid)) {
                        bisect(m, i);
                        ++bisections;
                        found = true;
                    }
                }
        }
        if (!found) break;
    }
    return bisections;
}

}  // namespace dsimp::testing
