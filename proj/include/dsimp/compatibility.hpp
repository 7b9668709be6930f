#pragma once

// Face compatibility classification.
//
// A face is Strong when its two neighbors (or their face-adjacent direct
// children) are reflected neighbors, QuasiStrong when the neighbor types
// differ by one and the face-containing child of the lower-typed element is
// reflected with the other, WeaklyOnly when only the induced face refinements
// agree, and Incompatible otherwise.  Reflected-neighbor search enumerates
// the type-preserving reorderings with identical refinement trees instead of
// assuming a closed-form symmetry table.

#include "dsimp/refine.hpp"

#include <mutex>

namespace dsimp {

enum class FaceClass { Strong, QuasiStrong, WeaklyOnly, Incompatible };

inline const char* to_string(FaceClass c) {
    switch (c) {
        case FaceClass::Strong: return "strong";
        case FaceClass::QuasiStrong: return "quasi-strong";
        case FaceClass::WeaklyOnly: return "weakly-only";
        case FaceClass::Incompatible: return "incompatible";
    }
    return "?";
}

/// Position permutations sigma with RT([z_{sigma(0)},...,z_{sigma(d)}]_t) ==
/// RT([z_0,...,z_d]_t); the identity is always included.  Cached per (d, t).
inline const std::vector<std::vector<int>>& equivalent_orderings(int d, int type) {
    static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
    static std::mutex mutex;
    std::scoped_lock lock(mutex);
    auto it = cache.find({d, type});
    if (it != cache.end()) return it->second;

    Simplex base;
    base.type = type;
    for (int i = 0; i <= d; ++i) base.vertices.push_back(i);
    const EdgeTree reference = refinement_tree(base, d);

    std::vector<std::vector<int>> result;
    std::vector<int> perm(std::size_t(d) + 1);
    for (int i = 0; i <= d; ++i) perm[std::size_t(i)] = i;
    do {
        Simplex candidate;
        candidate.type = type;
        candidate.vertices.assign(perm.begin(), perm.end());
        if (edge_tree_equal(refinement_tree(candidate, d), reference)) result.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return cache.emplace(std::make_pair(d, type), std::move(result)).first->second;
}

/// True iff the two elements share exactly d vertices, have equal types, and
/// admit equivalent reorderings agreeing everywhere except at one position,
/// which holds the two non-shared vertices.
inline bool reflected_neighbors(const Simplex& a, const Simplex& b) {
    if (a.vertices.size() != b.vertices.size()) throw NotNeighbors("dimension mismatch");
    const int d = int(a.vertices.size()) - 1;
    int shared = 0;
    for (VertexId v : a.vertices)
        if (b.contains(v)) ++shared;
    if (shared != d) throw NotNeighbors("elements do not share exactly d vertices");
    if (a.type != b.type) return false;

    const auto& sigmas = equivalent_orderings(d, a.type);
    std::vector<VertexId> ra(std::size_t(d) + 1), rb(std::size_t(d) + 1);
    for (const auto& sa : sigmas) {
        for (int i = 0; i <= d; ++i) ra[std::size_t(i)] = a.vertices[std::size_t(sa[std::size_t(i)])];
        for (const auto& sb : sigmas) {
            for (int i = 0; i <= d; ++i) rb[std::size_t(i)] = b.vertices[std::size_t(sb[std::size_t(i)])];
            int diffs = 0;
            for (int i = 0; i <= d; ++i)
                if (ra[std::size_t(i)] != rb[std::size_t(i)]) ++diffs;
            if (diffs == 1) return true;
        }
    }
    return false;
}

namespace detail {

/// The direct child of `s` that has `face` as a face, with the fresh midpoint
/// given the sentinel id; absent when the refinement edge lies inside the
/// face (then both children only touch halves of it).
inline std::optional<Simplex> face_adjacent_child(const Simplex& s, const FaceKey& face,
                                                  VertexId midpoint_sentinel) {
    VertexId omitted = -1;
    for (VertexId v : s.vertices)
        if (!std::binary_search(face.begin(), face.end(), v)) omitted = v;
    auto [c0, c1] = bisect_children(s, midpoint_sentinel);
    if (omitted == s.vertices.front()) return c1;
    if (omitted == s.vertices.back()) return c0;
    return std::nullopt;
}

struct FaceClassification {
    FaceClass cls;
    bool quasi_wraparound = false;  // quasi pair using the (d-1, 0) type wrap
};

inline FaceClassification classify_face_pair(const Mesh& m, const FaceKey& face, const Simplex& A,
                                             const Simplex& B) {
    const int d = m.dim();
    // sentinels stand in for the two (necessarily distinct) midpoints
    const VertexId midA = -2, midB = -3;

    if (A.type == B.type) {
        if (reflected_neighbors(A, B)) return {FaceClass::Strong};
        auto ca = face_adjacent_child(A, face, midA);
        auto cb = face_adjacent_child(B, face, midB);
        if (ca && cb && reflected_neighbors(*ca, *cb)) return {FaceClass::Strong};
    }
    const Simplex* pairs[2][2] = {{&A, &B}, {&B, &A}};
    for (auto& [x, y] : pairs) {
        if (y->type == (x->type + 1) % d) {
            auto cx = face_adjacent_child(*x, face, midA);
            if (cx && reflected_neighbors(*cx, *y))
                return {FaceClass::QuasiStrong, x->type == d - 1};
        }
    }
    const bool weakest = edge_tree_equal(induced_face_tree(A, face), induced_face_tree(B, face), d - 1);
    return {weakest ? FaceClass::WeaklyOnly : FaceClass::Incompatible};
}

}  // namespace detail

/// Classifies one interior face of a conforming mesh.
inline FaceClass classify_face(const Mesh& m, const FaceKey& face) {
    if (!is_conforming(m)) throw NonConformingMesh("mesh is not conforming");
    auto incidences = face_incidences(m);
    auto it = incidences.find(face);
    if (it == incidences.end() || it->second.size() == 1)
        throw BoundaryFace("face is not an interior face");
    if (it->second.size() != 2) throw NonConformingMesh("face occurs in more than two elements");
    return detail::classify_face_pair(m, face, m.element(it->second[0]), m.element(it->second[1])).cls;
}

/// Interior faces whose induced refinements disagree between their two
/// neighbors; empty exactly when the weakest compatibility condition holds.
inline std::vector<FaceKey> check_weakest(const Mesh& m) {
    if (!is_conforming(m)) throw NonConformingMesh("mesh is not conforming");
    const int d = m.dim();
    std::vector<FaceKey> failures;
    for (const auto& [face, pair] : interior_faces(m)) {
        const Simplex& a = m.element(pair.first);
        const Simplex& b = m.element(pair.second);
        if (!edge_tree_equal(induced_face_tree(a, face), induced_face_tree(b, face), d - 1))
            failures.push_back(face);
    }
    return failures;
}

struct WeakReport {
    bool weakest_ok = false;
    /// The constructive certificate: refining every leaf through the shared
    /// registry until all leaves are type 0 yields a conforming mesh.
    bool certificate_ok = false;
    std::vector<FaceKey> weakest_failures;

    bool weakly_compatible() const { return weakest_ok && certificate_ok; }
};

namespace detail {

/// Certificate completion: every leaf of type t >= 1 is bisected d-t times,
/// type-0 leaves run the full d-pass cycle (bisecting each of their edges
/// exactly once).  For a labeled mesh this refines exactly the V0-V0 edges
/// of every element, so the union is conforming iff the labeling is weakly
/// compatible.
inline void certificate_completion(Mesh& m) {
    const int d = m.dim();
    std::vector<int> budget(m.element_count());
    for (std::size_t i = 0; i < m.element_count(); ++i) {
        const int t = m.element(i).type;
        budget[i] = t == 0 ? d : d - t;
    }
    for (int pass = 0; pass < d; ++pass) {
        std::vector<char> marks(m.element_count(), 0);
        bool any = false;
        for (std::size_t i = 0; i < m.element_count(); ++i)
            if (budget[i] > 0) {
                marks[i] = 1;
                any = true;
            }
        if (!any) break;
        std::vector<int> next;
        next.reserve(m.element_count() * 2);
        for (std::size_t i = 0; i < m.element_count(); ++i) {
            if (marks[i]) {
                next.push_back(budget[i] - 1);
                next.push_back(budget[i] - 1);
            } else {
                next.push_back(0);
            }
        }
        bisect_marked(m, marks);
        budget = std::move(next);
    }
}

}  // namespace detail

inline WeakReport check_weak(const Mesh& m) {
    WeakReport r;
    r.weakest_failures = check_weakest(m);
    r.weakest_ok = r.weakest_failures.empty();
    Mesh completed = m;
    detail::certificate_completion(completed);
    r.certificate_ok = is_conforming(completed);
    return r;
}

struct CompatReport {
    std::size_t strong = 0;
    std::size_t quasi_strong = 0;
    std::size_t weakly_only = 0;
    std::size_t incompatible = 0;
    std::size_t interior_faces = 0;
    std::size_t boundary_faces = 0;
    std::size_t quasi_wraparound = 0;
    bool boundary_included = false;

    /// Boundary faces, when included, count as compatible.
    std::size_t face_total() const {
        return interior_faces + (boundary_included ? boundary_faces : 0);
    }
    std::size_t d1() const { return interior_faces - strong - quasi_strong; }
    double d1_fraction() const {
        return interior_faces == 0 ? 0.0 : double(d1()) / double(interior_faces);
    }
};

/// d1 = #faces minus the strongly or quasi-strongly compatible ones.
inline CompatReport distance1(const Mesh& m, bool include_boundary = false) {
    if (!is_conforming(m)) throw NonConformingMesh("mesh is not conforming");
    CompatReport rep;
    rep.boundary_included = include_boundary;
    for (const auto& [face, elems] : face_incidences(m)) {
        if (elems.size() == 1) {
            ++rep.boundary_faces;
            continue;
        }
        ++rep.interior_faces;
        auto c = detail::classify_face_pair(m, face, m.element(elems[0]), m.element(elems[1]));
        switch (c.cls) {
            case FaceClass::Strong: ++rep.strong; break;
            case FaceClass::QuasiStrong: ++rep.quasi_strong; break;
            case FaceClass::WeaklyOnly: ++rep.weakly_only; break;
            case FaceClass::Incompatible: ++rep.incompatible; break;
        }
        if (c.quasi_wraparound) ++rep.quasi_wraparound;
    }
    return rep;
}

}  // namespace dsimp
