#pragma once

// Dimension-generic simplicial meshes.
//
// An element is an *ordered* list of d+1 vertex ids plus a type tag in
// {0,...,d-1}; the ordering and the tag drive newest vertex bisection
// (see refine.hpp).  Vertex identity is id-based throughout: midpoints are
// deduplicated through the mesh-wide edge bisection registry, so topology
// never depends on floating-point comparisons.  Non-conforming intermediate
// states are allowed; conformity is checked on demand, not enforced per
// mutation.

#include "dsimp/errors.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace dsimp {

using VertexId = std::int64_t;
using Point = std::vector<double>;

/// Canonical (ascending) vertex pair identifying an edge.
using EdgeKey = std::array<VertexId, 2>;

/// Canonical (ascending) vertex tuple identifying a (d-1)-face.
using FaceKey = std::vector<VertexId>;

inline EdgeKey make_edge(VertexId a, VertexId b) {
    return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

inline FaceKey make_face(std::vector<VertexId> ids) {
    std::sort(ids.begin(), ids.end());
    return ids;
}

/// Ordered simplex [z_0,...,z_d] with its bisection type tag.
struct Simplex {
    std::vector<VertexId> vertices;  // size d+1, pairwise distinct
    int type = 0;                    // 0 <= type <= d-1

    bool contains(VertexId v) const {
        return std::find(vertices.begin(), vertices.end(), v) != vertices.end();
    }

    friend bool operator==(const Simplex&, const Simplex&) = default;
};

class Mesh {
public:
    Mesh() = default;

    /// Validating constructor; `coords` is the flat dim-per-vertex table.
    Mesh(int dim, std::vector<double> coords, std::vector<Simplex> elements)
        : dim_(dim), coords_(std::move(coords)), elements_(std::move(elements)) {
        if (dim_ < 2) throw DimensionMismatch("mesh dimension must be >= 2");
        if (coords_.size() % std::size_t(dim_) != 0)
            throw DimensionMismatch("coordinate table size is not a multiple of dim");
        if (elements_.empty() || coords_.empty()) throw EmptyMesh("mesh has no vertices or no elements");
        const VertexId nv = VertexId(vertex_count());
        for (const Simplex& s : elements_) {
            if (s.vertices.size() != std::size_t(dim_) + 1)
                throw DimensionMismatch("element does not have dim+1 vertices");
            for (VertexId v : s.vertices)
                if (v < 0 || v >= nv) throw IndexOutOfRange("element references unknown vertex id");
            std::vector<VertexId> sorted = s.vertices;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                throw DuplicateVertexInElement("element lists a vertex twice");
            if (s.type < 0 || s.type >= dim_) throw Error("element type tag out of range");
        }
        generations_.assign(elements_.size(), 0);
        check_manifold();
    }

    int dim() const { return dim_; }
    std::size_t vertex_count() const { return dim_ == 0 ? 0 : coords_.size() / std::size_t(dim_); }
    std::size_t element_count() const { return elements_.size(); }

    std::span<const double> point(VertexId v) const {
        return {coords_.data() + std::size_t(v) * std::size_t(dim_), std::size_t(dim_)};
    }
    const std::vector<double>& coords() const { return coords_; }

    const std::vector<Simplex>& elements() const { return elements_; }
    const Simplex& element(std::size_t i) const { return elements_.at(i); }
    Simplex& element(std::size_t i) { return elements_.at(i); }

    int generation(std::size_t i) const { return generations_.at(i); }
    const std::vector<int>& generations() const { return generations_; }

    const std::map<EdgeKey, VertexId>& bisection_registry() const { return registry_; }

    bool edge_bisected(const EdgeKey& e) const { return registry_.count(e) != 0; }

    std::optional<VertexId> registered_midpoint(const EdgeKey& e) const {
        auto it = registry_.find(e);
        if (it == registry_.end()) return std::nullopt;
        return it->second;
    }

    VertexId add_vertex(std::span<const double> p) {
        if (p.size() != std::size_t(dim_)) throw DimensionMismatch("point length differs from mesh dimension");
        coords_.insert(coords_.end(), p.begin(), p.end());
        return VertexId(vertex_count()) - 1;
    }

    /// Midpoint vertex of an edge, created on first use and reused ever after.
    VertexId midpoint_of(const EdgeKey& e) {
        auto it = registry_.find(e);
        if (it != registry_.end()) return it->second;
        std::vector<double> mid(static_cast<std::size_t>(dim_));
        auto a = point(e[0]), b = point(e[1]);
        for (int i = 0; i < dim_; ++i) mid[std::size_t(i)] = 0.5 * (a[std::size_t(i)] + b[std::size_t(i)]);
        VertexId m = add_vertex(mid);
        registry_.emplace(e, m);
        return m;
    }

    /// Replaces leaf `i` by its two children at the same position.
    void replace_leaf(std::size_t i, Simplex c0, Simplex c1) {
        if (i >= elements_.size()) throw IndexOutOfRange("leaf index out of range");
        const int gen = generations_[i] + 1;
        elements_[i] = std::move(c0);
        generations_[i] = gen;
        elements_.insert(elements_.begin() + std::ptrdiff_t(i) + 1, std::move(c1));
        generations_.insert(generations_.begin() + std::ptrdiff_t(i) + 1, gen);
    }

    /// Wholesale leaf-list replacement used by the batch refinement passes.
    void assign_leaves(std::vector<Simplex> elements, std::vector<int> generations) {
        if (elements.size() != generations.size()) throw Error("leaf/generation size mismatch");
        elements_ = std::move(elements);
        generations_ = std::move(generations);
    }

    // restore hooks for the native reader
    void restore_registry(std::map<EdgeKey, VertexId> registry) {
        const VertexId nv = VertexId(vertex_count());
        for (const auto& [e, m] : registry)
            if (e[0] < 0 || e[1] < 0 || e[0] >= nv || e[1] >= nv || m < 0 || m >= nv)
                throw IndexOutOfRange("registry entry references unknown vertex id");
        registry_ = std::move(registry);
    }
    void restore_generations(std::vector<int> generations) {
        if (generations.size() != elements_.size())
            throw Error("generation table size differs from element count");
        generations_ = std::move(generations);
    }

    friend bool operator==(const Mesh&, const Mesh&) = default;

private:
    void check_manifold() const;

    int dim_ = 0;
    std::vector<double> coords_;
    std::vector<Simplex> elements_;
    std::vector<int> generations_;
    std::map<EdgeKey, VertexId> registry_;
};

namespace detail {

/// Visits all strictly ascending index subsets of size k of {0,...,n-1}.
template <class F>
void for_each_combination(int n, int k, F&& f) {
    if (k < 0 || k > n) return;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[std::size_t(i)] = i;
    while (true) {
        f(static_cast<const std::vector<int>&>(idx));
        int i = k - 1;
        while (i >= 0 && idx[std::size_t(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[std::size_t(i)];
        for (int j = i + 1; j < k; ++j) idx[std::size_t(j)] = idx[std::size_t(j - 1)] + 1;
    }
}

}  // namespace detail

/// FaceKey of the face of `s` that omits vertex position `pos`.
inline FaceKey face_omitting(const Simplex& s, std::size_t pos) {
    FaceKey f;
    f.reserve(s.vertices.size() - 1);
    for (std::size_t i = 0; i < s.vertices.size(); ++i)
        if (i != pos) f.push_back(s.vertices[i]);
    std::sort(f.begin(), f.end());
    return f;
}

/// All leaf indices incident to each face key.
inline std::map<FaceKey, std::vector<std::size_t>> face_incidences(const Mesh& m) {
    std::map<FaceKey, std::vector<std::size_t>> out;
    for (std::size_t e = 0; e < m.element_count(); ++e) {
        const Simplex& s = m.element(e);
        for (std::size_t pos = 0; pos < s.vertices.size(); ++pos) out[face_omitting(s, pos)].push_back(e);
    }
    return out;
}

inline void Mesh::check_manifold() const {
    std::map<FaceKey, int> counts;
    for (const Simplex& s : elements_)
        for (std::size_t pos = 0; pos < s.vertices.size(); ++pos)
            if (++counts[face_omitting(s, pos)] > 2)
                throw NonManifoldFace("a face is shared by more than two elements");
}

/// Validated construction from a point list.
inline Mesh build_mesh(int dim, const std::vector<Point>& points, std::vector<Simplex> elements) {
    if (dim < 2) throw DimensionMismatch("mesh dimension must be >= 2");
    std::vector<double> coords;
    coords.reserve(points.size() * std::size_t(dim));
    for (const Point& p : points) {
        if (int(p.size()) != dim) throw DimensionMismatch("point length differs from mesh dimension");
        coords.insert(coords.end(), p.begin(), p.end());
    }
    return Mesh(dim, std::move(coords), std::move(elements));
}

/// The i-skeleton: every i-dimensional subsimplex of the leaves, as sorted id tuples.
inline std::set<std::vector<VertexId>> skeleton(const Mesh& m, int i) {
    if (i < 0 || i > m.dim()) throw IndexOutOfRange("skeleton index must lie in [0, dim]");
    std::set<std::vector<VertexId>> out;
    for (const Simplex& s : m.elements()) {
        std::vector<VertexId> sorted = s.vertices;
        std::sort(sorted.begin(), sorted.end());
        detail::for_each_combination(int(sorted.size()), i + 1, [&](const std::vector<int>& idx) {
            std::vector<VertexId> sub(idx.size());
            for (std::size_t k = 0; k < idx.size(); ++k) sub[k] = sorted[std::size_t(idx[k])];
            out.insert(std::move(sub));
        });
    }
    return out;
}

/// Interior faces with their two incident leaves; boundary faces are omitted.
inline std::map<FaceKey, std::pair<std::size_t, std::size_t>> interior_faces(const Mesh& m) {
    std::map<FaceKey, std::pair<std::size_t, std::size_t>> out;
    for (auto& [face, elems] : face_incidences(m)) {
        if (elems.size() == 2)
            out.emplace(face, std::make_pair(elems[0], elems[1]));
        else if (elems.size() != 1)
            throw NonConformingMesh("a face occurs in more than two elements");
    }
    return out;
}

/// Unit hypercube split into cells_per_axis^d subcubes of d! Kuhn simplices
/// each.  Every element's vertex chain runs monotonically from the low to the
/// high corner of its cell and all type tags are 0; the result is conforming.
inline Mesh generate_kuhn_grid(int dim, int cells_per_axis) {
    if (dim < 2) throw DimensionMismatch("mesh dimension must be >= 2");
    if (cells_per_axis < 1) throw Error("cells_per_axis must be >= 1");
    const int np = cells_per_axis + 1;

    std::size_t n_points = 1;
    for (int i = 0; i < dim; ++i) n_points *= std::size_t(np);
    std::vector<double> coords;
    coords.reserve(n_points * std::size_t(dim));
    for (std::size_t v = 0; v < n_points; ++v) {
        std::size_t rem = v;
        for (int axis = 0; axis < dim; ++axis) {
            coords.push_back(double(rem % std::size_t(np)) / double(cells_per_axis));
            rem /= std::size_t(np);
        }
    }

    std::vector<VertexId> stride(static_cast<std::size_t>(dim));
    VertexId acc = 1;
    for (int axis = 0; axis < dim; ++axis) {
        stride[std::size_t(axis)] = acc;
        acc *= np;
    }

    std::size_t n_cells = 1;
    for (int i = 0; i < dim; ++i) n_cells *= std::size_t(cells_per_axis);

    std::vector<Simplex> elems;
    std::vector<int> perm(static_cast<std::size_t>(dim));
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        VertexId corner = 0;
        std::size_t rem = cell;
        for (int axis = 0; axis < dim; ++axis) {
            corner += VertexId(rem % std::size_t(cells_per_axis)) * stride[std::size_t(axis)];
            rem /= std::size_t(cells_per_axis);
        }
        for (int i = 0; i < dim; ++i) perm[std::size_t(i)] = i;
        do {
            Simplex s;
            s.vertices.reserve(std::size_t(dim) + 1);
            VertexId cur = corner;
            s.vertices.push_back(cur);
            for (int k = 0; k < dim; ++k) {
                cur += stride[std::size_t(perm[std::size_t(k)])];
                s.vertices.push_back(cur);
            }
            elems.push_back(std::move(s));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return Mesh(dim, std::move(coords), std::move(elems));
}

}  // namespace dsimp
