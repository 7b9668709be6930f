#pragma once

// Newest vertex bisection.
//
// An ordered simplex T = [z_0,...,z_d]_t bisects its refinement edge
// {z_0, z_d} at the midpoint m and is replaced by
//
//   child 0: [z_0, m, z_1, ..., z_{d-1}]                       type (t+1) mod d
//   child 1: [z_d, m, z_1, ..., z_t, z_{d-1}, ..., z_{t+1}]    type (t+1) mod d
//
// The refinement tree records the cascade of refinement edges under repeated
// uniform bisection of a single simplex; two orderings are equivalent exactly
// when their trees coincide as rooted trees with unordered children.  Trees
// are built symbolically: midpoint labels are determined by their parent edge
// and compared structurally, so equivalence is exact combinatorics with no
// geometry involved.

#include "dsimp/mesh.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

namespace dsimp {

/// The edge {z_0, z_d} bisected by the next refinement of `s`.
inline EdgeKey refinement_edge(const Simplex& s) {
    return make_edge(s.vertices.front(), s.vertices.back());
}

/// The two children of `s` for a given midpoint vertex id.
inline std::pair<Simplex, Simplex> bisect_children(const Simplex& s, VertexId mid) {
    const int d = int(s.vertices.size()) - 1;
    const auto& z = s.vertices;
    Simplex c0, c1;
    c0.vertices.reserve(std::size_t(d) + 1);
    c1.vertices.reserve(std::size_t(d) + 1);
    c0.vertices.push_back(z.front());
    c0.vertices.push_back(mid);
    for (int i = 1; i < d; ++i) c0.vertices.push_back(z[std::size_t(i)]);
    c1.vertices.push_back(z.back());
    c1.vertices.push_back(mid);
    for (int i = 1; i <= s.type; ++i) c1.vertices.push_back(z[std::size_t(i)]);
    for (int i = d - 1; i > s.type; --i) c1.vertices.push_back(z[std::size_t(i)]);
    c0.type = c1.type = (s.type + 1) % d;
    return {std::move(c0), std::move(c1)};
}

// ---------------------------------------------------------------------------
// symbolic vertex space for refinement trees

/// Vertices of a symbolic refinement: originals plus interned midpoints.
/// A midpoint is identified by its (unordered) parent pair, recursively, so
/// two independently built spaces can be compared structurally.
class SymbolicSpace {
public:
    int original(VertexId id) {
        auto it = originals_.find(id);
        if (it != originals_.end()) return it->second;
        int s = int(nodes_.size());
        nodes_.push_back(Node{id, -1, -1});
        originals_.emplace(id, s);
        return s;
    }

    int midpoint(int a, int b);  // canonicalizes the parent order

    bool is_original(int s) const { return nodes_[std::size_t(s)].pa < 0; }
    VertexId original_id(int s) const { return nodes_[std::size_t(s)].id; }
    std::pair<int, int> parents(int s) const {
        return {nodes_[std::size_t(s)].pa, nodes_[std::size_t(s)].pb};
    }

private:
    struct Node {
        VertexId id;  // valid for originals only
        int pa, pb;   // canonical parent order; -1/-1 for originals
    };
    std::vector<Node> nodes_;
    std::map<VertexId, int> originals_;
    std::map<std::pair<int, int>, int> midpoints_;
};

/// Structural order on symbolic vertices: originals by id and before any
/// midpoint; midpoints lexicographically by their canonical parents.
inline int symbolic_compare(const SymbolicSpace& A, int u, const SymbolicSpace& B, int v) {
    const bool uo = A.is_original(u), vo = B.is_original(v);
    if (uo != vo) return uo ? -1 : 1;
    if (uo) {
        const VertexId x = A.original_id(u), y = B.original_id(v);
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    const auto [ua, ub] = A.parents(u);
    const auto [va, vb] = B.parents(v);
    if (int c = symbolic_compare(A, ua, B, va)) return c;
    return symbolic_compare(A, ub, B, vb);
}

inline int SymbolicSpace::midpoint(int a, int b) {
    if (symbolic_compare(*this, a, *this, b) > 0) std::swap(a, b);
    auto it = midpoints_.find({a, b});
    if (it != midpoints_.end()) return it->second;
    int s = int(nodes_.size());
    nodes_.push_back(Node{-1, a, b});
    midpoints_.emplace(std::make_pair(a, b), s);
    return s;
}

// ---------------------------------------------------------------------------
// refinement trees

/// Binary tree of refinement edges.  Node 0 is the root; children are the
/// refinement edges of the two children elements.  Sibling order carries no
/// meaning: equality treats children as unordered.
struct EdgeTree {
    struct Node {
        int a = -1, b = -1;       // symbolic vertex ids, canonical order
        int left = -1, right = -1;
    };
    SymbolicSpace space;
    std::vector<Node> nodes;

    bool empty() const { return nodes.empty(); }

    /// Edge of a node as original vertex ids, when both endpoints are original.
    std::optional<std::pair<VertexId, VertexId>> edge_ids(int n) const {
        const Node& nd = nodes[std::size_t(n)];
        if (!space.is_original(nd.a) || !space.is_original(nd.b)) return std::nullopt;
        VertexId x = space.original_id(nd.a), y = space.original_id(nd.b);
        if (x > y) std::swap(x, y);
        return std::make_pair(x, y);
    }

    /// Node indices grouped by level, root first.
    std::vector<std::vector<int>> levels() const {
        std::vector<std::vector<int>> out;
        if (nodes.empty()) return out;
        std::vector<int> cur{0};
        while (!cur.empty()) {
            out.push_back(cur);
            std::vector<int> next;
            for (int n : cur) {
                if (nodes[std::size_t(n)].left >= 0) next.push_back(nodes[std::size_t(n)].left);
                if (nodes[std::size_t(n)].right >= 0) next.push_back(nodes[std::size_t(n)].right);
            }
            cur = std::move(next);
        }
        return out;
    }

    std::string to_string() const {
        std::ostringstream os;
        std::function<void(int, int)> dump = [&](int n, int indent) {
            if (n < 0) return;
            for (int i = 0; i < indent; ++i) os << "  ";
            auto ids = edge_ids(n);
            if (ids)
                os << "{" << ids->first << "," << ids->second << "}\n";
            else
                os << "{sym" << nodes[std::size_t(n)].a << ",sym" << nodes[std::size_t(n)].b << "}\n";
            dump(nodes[std::size_t(n)].left, indent + 1);
            dump(nodes[std::size_t(n)].right, indent + 1);
        };
        dump(nodes.empty() ? -1 : 0, 0);
        return os.str();
    }
};

namespace detail {

inline bool edge_tree_equal_rec(const EdgeTree& A, int na, const EdgeTree& B, int nb, int depth) {
    if (depth == 0) return true;
    if (na < 0 || nb < 0) return na < 0 && nb < 0;
    const auto& x = A.nodes[std::size_t(na)];
    const auto& y = B.nodes[std::size_t(nb)];
    if (symbolic_compare(A.space, x.a, B.space, y.a) != 0) return false;
    if (symbolic_compare(A.space, x.b, B.space, y.b) != 0) return false;
    const int dn = depth < 0 ? -1 : depth - 1;
    if (edge_tree_equal_rec(A, x.left, B, y.left, dn) && edge_tree_equal_rec(A, x.right, B, y.right, dn))
        return true;
    return edge_tree_equal_rec(A, x.left, B, y.right, dn) && edge_tree_equal_rec(A, x.right, B, y.left, dn);
}

}  // namespace detail

/// Rooted-tree isomorphism over edge labels; `depth_limit` < 0 compares whole
/// trees, otherwise only levels 0..depth_limit-1.
inline bool edge_tree_equal(const EdgeTree& A, const EdgeTree& B, int depth_limit = -1) {
    if (depth_limit == 0) return true;
    if (A.empty() || B.empty()) return A.empty() == B.empty();
    return detail::edge_tree_equal_rec(A, 0, B, 0, depth_limit);
}

/// Refinement tree of `depth` uniform bisections of a single simplex.
inline EdgeTree refinement_tree(const Simplex& s, int depth) {
    if (depth < 1) throw Error("refinement tree depth must be >= 1");
    EdgeTree t;
    Simplex sym;
    sym.type = s.type;
    sym.vertices.reserve(s.vertices.size());
    for (VertexId v : s.vertices) sym.vertices.push_back(t.space.original(v));

    std::function<int(const Simplex&, int)> build = [&](const Simplex& e, int levels) -> int {
        int a = int(e.vertices.front()), b = int(e.vertices.back());
        if (symbolic_compare(t.space, a, t.space, b) > 0) std::swap(a, b);
        const int idx = int(t.nodes.size());
        t.nodes.push_back(EdgeTree::Node{a, b, -1, -1});
        if (levels > 1) {
            const int mid = t.space.midpoint(int(e.vertices.front()), int(e.vertices.back()));
            auto [c0, c1] = bisect_children(e, mid);
            const int l = build(c0, levels - 1);
            const int r = build(c1, levels - 1);
            t.nodes[std::size_t(idx)].left = l;
            t.nodes[std::size_t(idx)].right = r;
        }
        return idx;
    };
    build(sym, depth);
    return t;
}

/// Two orderings of the same vertex set are equivalent iff their depth-d
/// refinement trees coincide.
inline bool nvb_equivalent(const Simplex& a, const Simplex& b) {
    if (a.vertices.size() != b.vertices.size())
        throw VertexSetMismatch("simplices have different dimension");
    std::vector<VertexId> sa = a.vertices, sb = b.vertices;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) throw VertexSetMismatch("simplices have different vertex sets");
    const int d = int(a.vertices.size()) - 1;
    return edge_tree_equal(refinement_tree(a, d), refinement_tree(b, d));
}

/// Number of positions 1..t whose vertex lies in `face` (the face's trace
/// type under the parent's refinement).
inline int face_trace_type(const Simplex& s, const FaceKey& face) {
    if (face.size() + 1 != s.vertices.size()) throw FaceNotInSimplex("face has wrong dimension");
    for (VertexId v : face)
        if (!s.contains(v)) throw FaceNotInSimplex("face vertex not in simplex");
    int count = 0;
    for (int i = 1; i <= s.type; ++i)
        if (std::binary_search(face.begin(), face.end(), s.vertices[std::size_t(i)])) ++count;
    return count;
}

namespace detail {

struct FaceTraceBuilder {
    EdgeTree* tree;
    bool incomplete = false;

    // E is traced with the face being verts(E) minus the vertex at symbolic id
    // `omitted`.  When the refinement edge hits the face it becomes a tree
    // node; otherwise the face passes whole into one child with the fresh
    // midpoint as the new omitted vertex.
    int trace(const Simplex& e, int omitted, int elem_budget, int face_levels) {
        if (face_levels == 0) return -1;
        if (elem_budget == 0) {
            incomplete = true;
            return -1;
        }
        const int front = int(e.vertices.front()), back = int(e.vertices.back());
        const int mid = tree->space.midpoint(front, back);
        auto [c0, c1] = bisect_children(e, mid);
        if (omitted == front) return trace(c1, mid, elem_budget - 1, face_levels);
        if (omitted == back) return trace(c0, mid, elem_budget - 1, face_levels);
        int a = front, b = back;
        if (symbolic_compare(tree->space, a, tree->space, b) > 0) std::swap(a, b);
        const int idx = int(tree->nodes.size());
        tree->nodes.push_back(EdgeTree::Node{a, b, -1, -1});
        const int l = trace(c0, omitted, elem_budget - 1, face_levels - 1);
        const int r = trace(c1, omitted, elem_budget - 1, face_levels - 1);
        tree->nodes[std::size_t(idx)].left = l;
        tree->nodes[std::size_t(idx)].right = r;
        return idx;
    }
};

}  // namespace detail

/// Refinement tree induced on a (d-1)-face of `s` by uniform refinement of
/// `s`, restricted to bisections of edges lying in the face.  Built from the
/// element tree with budget 2d-t levels, extended as needed (up to 4d+2) so
/// that `target_depth` face levels are complete; default target is d-1, the
/// depth at which face orderings are compared for equivalence.
inline EdgeTree induced_face_tree(const Simplex& s, const FaceKey& face, int target_depth = -1) {
    const int d = int(s.vertices.size()) - 1;
    if (int(face.size()) != d) throw FaceNotInSimplex("face has wrong dimension");
    VertexId omitted_id = -1;
    int found = 0;
    for (VertexId v : s.vertices) {
        if (std::binary_search(face.begin(), face.end(), v))
            ++found;
        else
            omitted_id = v;
    }
    if (found != d || omitted_id < 0) throw FaceNotInSimplex("face vertex not in simplex");
    if (target_depth < 0) target_depth = d - 1;

    const int budget_cap = 4 * d + 2;
    EdgeTree t;
    for (int budget = std::max(1, 2 * d - s.type); budget <= budget_cap; ++budget) {
        t = EdgeTree{};
        Simplex sym;
        sym.type = s.type;
        sym.vertices.reserve(s.vertices.size());
        for (VertexId v : s.vertices) sym.vertices.push_back(t.space.original(v));
        detail::FaceTraceBuilder builder{&t};
        builder.trace(sym, t.space.original(omitted_id), budget, target_depth);
        if (!builder.incomplete) break;
    }
    return t;
}

// ---------------------------------------------------------------------------
// mesh-level refinement

/// Bisects the leaf at `index`; children replace the parent at its position.
inline std::pair<Simplex, Simplex> bisect(Mesh& m, std::size_t index) {
    if (index >= m.element_count()) throw NotALeaf("no leaf at the given index");
    const VertexId mid = m.midpoint_of(refinement_edge(m.element(index)));
    auto children = bisect_children(m.element(index), mid);
    m.replace_leaf(index, children.first, children.second);
    return children;
}

/// Bisects the given leaf, located by value.
inline std::pair<Simplex, Simplex> bisect(Mesh& m, const Simplex& s) {
    auto it = std::find(m.elements().begin(), m.elements().end(), s);
    if (it == m.elements().end()) throw NotALeaf("simplex is not a leaf of the mesh");
    return bisect(m, std::size_t(it - m.elements().begin()));
}

/// Bisects every leaf with marks[i] set, in one pass; children occupy the
/// parent's position.  Returns the number of bisections.
inline long bisect_marked(Mesh& m, const std::vector<char>& marks) {
    const std::size_t n = m.element_count();
    if (marks.size() != n) throw IndexOutOfRange("mark vector size differs from element count");
    std::vector<Simplex> elems;
    std::vector<int> gens;
    elems.reserve(n * 2);
    gens.reserve(n * 2);
    long count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!marks[i]) {
            elems.push_back(m.element(i));
            gens.push_back(m.generation(i));
            continue;
        }
        const VertexId mid = m.midpoint_of(refinement_edge(m.element(i)));
        auto [c0, c1] = bisect_children(m.element(i), mid);
        const int g = m.generation(i) + 1;
        elems.push_back(std::move(c0));
        gens.push_back(g);
        elems.push_back(std::move(c1));
        gens.push_back(g);
        ++count;
    }
    m.assign_leaves(std::move(elems), std::move(gens));
    return count;
}

/// k passes of bisecting every leaf once.  May leave the mesh non-conforming.
inline void uniform_refine(Mesh& m, int k) {
    if (k < 0) throw Error("refinement count must be >= 0");
    for (int pass = 0; pass < k; ++pass) bisect_marked(m, std::vector<char>(m.element_count(), 1));
}

/// True iff no face occurs more than twice and no leaf edge carries a
/// registered midpoint that is not a vertex of that leaf (no hanging
/// vertices).
inline bool is_conforming(const Mesh& m) {
    std::map<FaceKey, int> counts;
    for (const Simplex& s : m.elements())
        for (std::size_t pos = 0; pos < s.vertices.size(); ++pos)
            if (++counts[face_omitting(s, pos)] > 2) return false;
    for (const Simplex& s : m.elements()) {
        const auto& z = s.vertices;
        for (std::size_t i = 0; i < z.size(); ++i)
            for (std::size_t j = i + 1; j < z.size(); ++j) {
                auto mid = m.registered_midpoint(make_edge(z[i], z[j]));
                if (mid && !s.contains(*mid)) return false;
            }
    }
    return true;
}

struct ClosureOptions {
    /// Abort with NonTermination once any element generation exceeds this;
    /// defaults to the loose bound d*(max initial generation + |marks| +
    /// 2d*|edges|), which only an incompatible input can reach.
    std::optional<long> generation_limit;
    /// Verify the conforming precondition up front instead of trusting the
    /// caller; the guard still backstops an incompatible labeling either way.
    bool check_preconditions = false;
};

struct ClosureResult {
    long bisections = 0;
    int passes = 0;
    /// Which leaves of the *input* mesh were bisected (directly).
    std::vector<std::uint8_t> input_leaf_bisected;
};

/// Bisects all marked leaves, then repeatedly every leaf with a hanging
/// vertex on one of its edges, until the mesh is conforming.
inline ClosureResult refine_closure(Mesh& m, const std::vector<std::size_t>& marks,
                                    const ClosureOptions& opt = {}) {
    const std::size_t n0 = m.element_count();
    for (std::size_t i : marks)
        if (i >= n0) throw IndexOutOfRange("mark index out of range");
    if (opt.check_preconditions && !is_conforming(m))
        throw NonConformingMesh("closure requires a conforming input mesh");

    long limit;
    if (opt.generation_limit) {
        limit = *opt.generation_limit;
    } else {
        int g0 = 0;
        for (std::size_t i = 0; i < n0; ++i) g0 = std::max(g0, m.generation(i));
        const long d = m.dim();
        const long edges = long(skeleton(m, 1).size());
        limit = d * (g0 + long(marks.size()) + 2 * d * edges);
    }

    ClosureResult res;
    res.input_leaf_bisected.assign(n0, 0);
    std::vector<long> origin(n0);
    for (std::size_t i = 0; i < n0; ++i) origin[i] = long(i);

    std::vector<char> cur(n0, 0);
    for (std::size_t i : marks) cur[i] = 1;

    while (std::find(cur.begin(), cur.end(), char(1)) != cur.end()) {
        const std::size_t n = m.element_count();
        std::vector<Simplex> elems;
        std::vector<int> gens;
        std::vector<long> new_origin;
        elems.reserve(n * 2);
        gens.reserve(n * 2);
        new_origin.reserve(n * 2);
        for (std::size_t i = 0; i < n; ++i) {
            if (!cur[i]) {
                elems.push_back(m.element(i));
                gens.push_back(m.generation(i));
                new_origin.push_back(origin[i]);
                continue;
            }
            if (origin[i] >= 0) res.input_leaf_bisected[std::size_t(origin[i])] = 1;
            const int g = m.generation(i) + 1;
            if (g > limit)
                throw NonTermination("conforming closure exceeded the generation bound " +
                                     std::to_string(limit) + " after " + std::to_string(res.passes) +
                                     " passes; the input is not weakly compatible");
            const VertexId mid = m.midpoint_of(refinement_edge(m.element(i)));
            auto [c0, c1] = bisect_children(m.element(i), mid);
            elems.push_back(std::move(c0));
            gens.push_back(g);
            new_origin.push_back(-1);
            elems.push_back(std::move(c1));
            gens.push_back(g);
            new_origin.push_back(-1);
            ++res.bisections;
        }
        m.assign_leaves(std::move(elems), std::move(gens));
        origin = std::move(new_origin);
        ++res.passes;

        // re-mark every leaf with a hanging vertex
        cur.assign(m.element_count(), 0);
        for (std::size_t i = 0; i < m.element_count(); ++i) {
            const auto& z = m.element(i).vertices;
            for (std::size_t a = 0; a < z.size() && !cur[i]; ++a)
                for (std::size_t b = a + 1; b < z.size() && !cur[i]; ++b) {
                    auto mid = m.registered_midpoint(make_edge(z[a], z[b]));
                    if (mid && !m.element(i).contains(*mid)) cur[i] = 1;
                }
        }
    }
    return res;
}

/// Bisects every leaf of type t uniformly d-t times (type-0 leaves are left
/// alone); afterwards all leaves are type 0.  Midpoints are shared through
/// the registry, so the result need not be conforming.
inline void type0_completion(Mesh& m) {
    while (true) {
        std::vector<char> marks(m.element_count(), 0);
        bool any = false;
        for (std::size_t i = 0; i < m.element_count(); ++i)
            if (m.element(i).type != 0) {
                marks[i] = 1;
                any = true;
            }
        if (!any) break;
        bisect_marked(m, marks);
    }
}

}  // namespace dsimp
