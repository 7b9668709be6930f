#pragma once

// Vertex relabeling.
//
// The pipeline splits the vertices into (V0, V1), builds one global vertex
// order by successive reflected neighbors (SRN, or SRN2 with announced
// refinement edges), derives the per-class ranks as restrictions of that
// order, and rewrites every element as
//
//   [z_1,...,z_t]        = T intersect V1, ordered by rank1
//   [z_0, z_{t+1},...]   = T intersect V0, ordered by rank0
//   t                    = #(T intersect V1) mod d
//
// with the all-V1 special case sorted entirely by rank1 at type 0.  Elements
// with #(T intersect V1) in {d, d+1} break the slot formula or the type-0
// completion certificate; the pipeline repairs them by demoting their
// lowest-ranked V1 vertex to V0 and re-deriving the ranks until none remain.

#include "dsimp/refine.hpp"

#include <list>
#include <random>

namespace dsimp {

enum class SetStrategy { OT0, ILE, LAE };
enum class OrderStrategy { SRN, SRN2 };

struct VertexPartition {
    std::vector<std::uint8_t> in_v1;  // per vertex id
    std::vector<std::int64_t> rank0;  // dense rank within V0, -1 elsewhere
    std::vector<std::int64_t> rank1;  // dense rank within V1, -1 elsewhere
};

/// One announced edge per element (the edge the element wants to bisect).
using AnnouncedEdges = std::vector<EdgeKey>;

/// Longest edge by Euclidean length; exact double comparison, ties broken by
/// the smallest canonical edge key.
inline EdgeKey longest_edge(const Mesh& m, const Simplex& s) {
    std::vector<VertexId> v = s.vertices;
    std::sort(v.begin(), v.end());
    EdgeKey best{-1, -1};
    double best_sq = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            auto a = m.point(v[i]), b = m.point(v[j]);
            double sq = 0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                const double diff = a[k] - b[k];
                sq += diff * diff;
            }
            if (sq > best_sq) {
                best_sq = sq;
                best = EdgeKey{v[i], v[j]};
            }
        }
    return best;
}

inline AnnouncedEdges default_announcements(const Mesh& m) {
    AnnouncedEdges out;
    out.reserve(m.element_count());
    for (const Simplex& s : m.elements()) out.push_back(longest_edge(m, s));
    return out;
}

// --- set strategies --------------------------------------------------------

inline std::vector<std::uint8_t> partition_ot0(const Mesh& m) {
    return std::vector<std::uint8_t>(m.vertex_count(), 0);
}

/// V0 = vertices appearing in at least `threshold` per-element longest edges.
inline std::vector<std::uint8_t> partition_ile(const Mesh& m, long threshold) {
    if (threshold < 0) throw Error("ILE threshold must be >= 0");
    std::vector<long> counts(m.vertex_count(), 0);
    for (const Simplex& s : m.elements()) {
        const EdgeKey e = longest_edge(m, s);
        ++counts[std::size_t(e[0])];
        ++counts[std::size_t(e[1])];
    }
    std::vector<std::uint8_t> in_v1(m.vertex_count());
    for (std::size_t v = 0; v < counts.size(); ++v) in_v1[v] = counts[v] >= threshold ? 0 : 1;
    return in_v1;
}

/// V1 = vertices adjacent to at most `threshold` elements.
inline std::vector<std::uint8_t> partition_lae(const Mesh& m, long threshold) {
    if (threshold < 0) throw Error("LAE threshold must be >= 0");
    std::vector<long> counts(m.vertex_count(), 0);
    for (const Simplex& s : m.elements())
        for (VertexId v : s.vertices) ++counts[std::size_t(v)];
    std::vector<std::uint8_t> in_v1(m.vertex_count());
    for (std::size_t v = 0; v < counts.size(); ++v) in_v1[v] = counts[v] <= threshold ? 1 : 0;
    return in_v1;
}

inline std::vector<std::uint8_t> compute_membership(const Mesh& m, SetStrategy s, long threshold) {
    switch (s) {
        case SetStrategy::OT0: return partition_ot0(m);
        case SetStrategy::ILE: return partition_ile(m, threshold);
        case SetStrategy::LAE: return partition_lae(m, threshold);
    }
    throw Error("unknown set strategy");
}

// --- global order construction ---------------------------------------------

namespace detail {

/// Sequence container with O(log n) insert-before/after and positional rank,
/// backed by a size-augmented treap with parent pointers.
class OrderList {
public:
    int append(VertexId v) { return insert_at(size(), v); }
    int insert_before(int handle, VertexId v) { return insert_at(rank(handle), v); }
    int insert_after(int handle, VertexId v) { return insert_at(rank(handle) + 1, v); }

    std::size_t size() const { return root_ < 0 ? 0 : std::size_t(nodes_[std::size_t(root_)].size); }

    std::size_t rank(int handle) const {
        std::int64_t r = subtree_size(nodes_[std::size_t(handle)].left);
        int c = handle;
        while (nodes_[std::size_t(c)].parent >= 0) {
            const int p = nodes_[std::size_t(c)].parent;
            if (nodes_[std::size_t(p)].right == c) r += subtree_size(nodes_[std::size_t(p)].left) + 1;
            c = p;
        }
        return std::size_t(r);
    }

    std::vector<VertexId> sequence() const {
        std::vector<VertexId> out;
        out.reserve(size());
        std::vector<int> stack;
        int cur = root_;
        while (cur >= 0 || !stack.empty()) {
            while (cur >= 0) {
                stack.push_back(cur);
                cur = nodes_[std::size_t(cur)].left;
            }
            cur = stack.back();
            stack.pop_back();
            out.push_back(nodes_[std::size_t(cur)].value);
            cur = nodes_[std::size_t(cur)].right;
        }
        return out;
    }

private:
    struct Node {
        int left = -1, right = -1, parent = -1;
        std::uint32_t priority = 0;
        std::int64_t size = 1;
        VertexId value = -1;
    };

    std::int64_t subtree_size(int x) const { return x < 0 ? 0 : nodes_[std::size_t(x)].size; }
    void update_size(int x) {
        nodes_[std::size_t(x)].size =
            1 + subtree_size(nodes_[std::size_t(x)].left) + subtree_size(nodes_[std::size_t(x)].right);
    }

    void rotate_up(int x) {
        const int p = nodes_[std::size_t(x)].parent;
        const int g = nodes_[std::size_t(p)].parent;
        if (nodes_[std::size_t(p)].left == x) {
            nodes_[std::size_t(p)].left = nodes_[std::size_t(x)].right;
            if (nodes_[std::size_t(x)].right >= 0) nodes_[std::size_t(nodes_[std::size_t(x)].right)].parent = p;
            nodes_[std::size_t(x)].right = p;
        } else {
            nodes_[std::size_t(p)].right = nodes_[std::size_t(x)].left;
            if (nodes_[std::size_t(x)].left >= 0) nodes_[std::size_t(nodes_[std::size_t(x)].left)].parent = p;
            nodes_[std::size_t(x)].left = p;
        }
        nodes_[std::size_t(p)].parent = x;
        nodes_[std::size_t(x)].parent = g;
        if (g >= 0) {
            if (nodes_[std::size_t(g)].left == p)
                nodes_[std::size_t(g)].left = x;
            else
                nodes_[std::size_t(g)].right = x;
        } else {
            root_ = x;
        }
        update_size(p);
        update_size(x);
    }

    int insert_at(std::size_t pos, VertexId v) {
        const int id = int(nodes_.size());
        Node node;
        node.priority = rng_();
        node.value = v;
        nodes_.push_back(node);
        if (root_ < 0) {
            root_ = id;
            return id;
        }
        std::int64_t k = std::int64_t(pos);
        int cur = root_;
        while (true) {
            ++nodes_[std::size_t(cur)].size;
            if (k <= subtree_size(nodes_[std::size_t(cur)].left)) {
                if (nodes_[std::size_t(cur)].left < 0) {
                    nodes_[std::size_t(cur)].left = id;
                    nodes_[std::size_t(id)].parent = cur;
                    break;
                }
                cur = nodes_[std::size_t(cur)].left;
            } else {
                k -= subtree_size(nodes_[std::size_t(cur)].left) + 1;
                if (nodes_[std::size_t(cur)].right < 0) {
                    nodes_[std::size_t(cur)].right = id;
                    nodes_[std::size_t(id)].parent = cur;
                    break;
                }
                cur = nodes_[std::size_t(cur)].right;
            }
        }
        while (nodes_[std::size_t(id)].parent >= 0 &&
               nodes_[std::size_t(nodes_[std::size_t(id)].parent)].priority < nodes_[std::size_t(id)].priority)
            rotate_up(id);
        return id;
    }

    std::vector<Node> nodes_;
    int root_ = -1;
    std::mt19937 rng_{0x51f15eedu};
};

}  // namespace detail

/// Builds the global vertex order.  `announced` null selects plain SRN; with
/// announcements the active face list and before-first/after-last insertion
/// of SRN2 apply (new vertices of no-refinement-edge faces go before the
/// first or after the last vertex of the global order, whichever realizes
/// the neighbor's announced edge).  Seeds are the lowest-index untreated
/// elements; the face list is first-in-first-out.
inline std::vector<VertexId> srn_global_order(const Mesh& m, const AnnouncedEdges* announced) {
    if (announced && announced->size() != m.element_count())
        throw Error("announced edge list size differs from element count");
    const int d = m.dim();
    const auto incidences = face_incidences(m);
    const std::size_t n = m.element_count();

    std::vector<std::uint8_t> treated(n, 0);
    std::vector<int> handle(m.vertex_count(), -1);
    detail::OrderList order;
    int global_front = -1;

    struct Entry {
        FaceKey face;
        std::size_t from;
        bool no_ref_edge;
    };
    std::list<Entry> active;
    std::map<FaceKey, std::list<Entry>::iterator> queued;

    auto opposite = [&](const Simplex& s, const FaceKey& f) -> VertexId {
        for (VertexId v : s.vertices)
            if (!std::binary_search(f.begin(), f.end(), v)) return v;
        throw Error("element has no vertex opposite the face");
    };

    auto sorted_members = [&](const Simplex& s) {
        std::vector<VertexId> vs = s.vertices;
        std::sort(vs.begin(), vs.end(), [&](VertexId a, VertexId b) {
            return order.rank(handle[std::size_t(a)]) < order.rank(handle[std::size_t(b)]);
        });
        return vs;
    };

    auto push_faces = [&](std::size_t e, const FaceKey* arrived_through) {
        const Simplex& s = m.element(e);
        for (std::size_t pos = 0; pos <= std::size_t(d); ++pos) {
            FaceKey f = face_omitting(s, pos);
            if (arrived_through && f == *arrived_through) continue;
            if (incidences.at(f).size() != 2) continue;  // boundary
            if (auto it = queued.find(f); it != queued.end()) {
                active.erase(it->second);
                queued.erase(it);
                continue;
            }
            bool contains_announced = false;
            if (announced) {
                const EdgeKey& a = (*announced)[e];
                contains_announced = std::binary_search(f.begin(), f.end(), a[0]) &&
                                     std::binary_search(f.begin(), f.end(), a[1]);
            }
            if (announced && contains_announced) {
                active.push_front(Entry{std::move(f), e, false});
                queued[active.front().face] = active.begin();
            } else {
                active.push_back(Entry{std::move(f), e, announced != nullptr});
                queued[active.back().face] = std::prev(active.end());
            }
        }
    };

    auto seed = [&](std::size_t e) {
        std::vector<VertexId> vs = m.element(e).vertices;
        if (announced) {
            // announced endpoints go to the ends, middles keep their relative
            // order, the endpoint seen first stays in front
            const EdgeKey& a = (*announced)[e];
            std::vector<VertexId> middles;
            std::vector<VertexId> ends;
            for (VertexId v : vs) {
                if (v == a[0] || v == a[1])
                    ends.push_back(v);
                else
                    middles.push_back(v);
            }
            vs.clear();
            vs.push_back(ends.front());
            vs.insert(vs.end(), middles.begin(), middles.end());
            vs.push_back(ends.back());
        }
        for (VertexId v : vs)
            if (handle[std::size_t(v)] < 0) {
                handle[std::size_t(v)] = order.append(v);
                if (global_front < 0) global_front = handle[std::size_t(v)];
            }
        treated[e] = 1;
        push_faces(e, nullptr);
    };

    for (std::size_t start = 0; start < n; ++start) {
        if (treated[start]) continue;
        seed(start);
        while (!active.empty()) {
            Entry entry = std::move(active.front());
            active.pop_front();
            queued.erase(entry.face);
            const auto& pair = incidences.at(entry.face);
            const std::size_t other = pair[0] == entry.from ? pair[1] : pair[0];
            if (treated[other]) continue;
            const Simplex& treated_elem = m.element(entry.from);
            const VertexId v = opposite(treated_elem, entry.face);
            const VertexId vp = opposite(m.element(other), entry.face);
            if (handle[std::size_t(vp)] < 0) {
                if (entry.no_ref_edge) {
                    // new vertex goes before the first or after the last
                    // vertex of the global order, preferring whichever
                    // realizes the neighbor's announced edge
                    std::vector<VertexId> rest = sorted_members(treated_elem);
                    std::erase(rest, v);
                    const EdgeKey& want = (*announced)[other];
                    const bool before_realizes = make_edge(vp, rest.back()) == want;
                    const bool after_realizes = make_edge(rest.front(), vp) == want;
                    if (before_realizes && !after_realizes) {
                        handle[std::size_t(vp)] = order.insert_before(global_front, vp);
                        global_front = handle[std::size_t(vp)];
                    } else {
                        handle[std::size_t(vp)] = order.append(vp);
                    }
                } else {
                    handle[std::size_t(vp)] = order.insert_after(handle[std::size_t(v)], vp);
                }
            }
            treated[other] = 1;
            push_faces(other, &entry.face);
        }
    }

    // vertices outside every element, if any, go to the back in id order
    for (std::size_t v = 0; v < m.vertex_count(); ++v)
        if (handle[v] < 0) handle[v] = order.append(VertexId(v));
    return order.sequence();
}

inline VertexPartition make_vertex_partition(const Mesh& m, std::vector<std::uint8_t> in_v1,
                                             const std::vector<VertexId>& sequence) {
    if (in_v1.size() != m.vertex_count()) throw PartitionIncomplete("membership size mismatch");
    VertexPartition p;
    p.in_v1 = std::move(in_v1);
    p.rank0.assign(m.vertex_count(), -1);
    p.rank1.assign(m.vertex_count(), -1);
    std::int64_t r0 = 0, r1 = 0;
    for (VertexId v : sequence) {
        if (p.in_v1[std::size_t(v)])
            p.rank1[std::size_t(v)] = r1++;
        else
            p.rank0[std::size_t(v)] = r0++;
    }
    return p;
}

inline VertexPartition order_srn(const Mesh& m, std::vector<std::uint8_t> membership) {
    return make_vertex_partition(m, std::move(membership), srn_global_order(m, nullptr));
}

inline VertexPartition order_srn2(const Mesh& m, std::vector<std::uint8_t> membership,
                                  const AnnouncedEdges& announced) {
    for (std::size_t e = 0; e < announced.size() && e < m.element_count(); ++e) {
        const Simplex& s = m.element(e);
        if (!s.contains(announced[e][0]) || !s.contains(announced[e][1]))
            throw Error("announced edge is not an edge of its element");
    }
    return make_vertex_partition(m, std::move(membership), srn_global_order(m, &announced));
}

// --- element rewrite --------------------------------------------------------

struct LabelingResult {
    /// Elements with #(T intersect V1) == d (slot formula inconsistent);
    /// rewritten with the lone V0 vertex first and flagged here.
    std::vector<std::size_t> degenerate_elements;
};

inline LabelingResult apply_labeling(Mesh& m, const VertexPartition& p) {
    const int d = m.dim();
    if (p.in_v1.size() != m.vertex_count() || p.rank0.size() != m.vertex_count() ||
        p.rank1.size() != m.vertex_count())
        throw PartitionIncomplete("partition tables do not cover the mesh vertices");
    for (std::size_t v = 0; v < m.vertex_count(); ++v)
        if (p.in_v1[v] ? p.rank1[v] < 0 : p.rank0[v] < 0)
            throw PartitionIncomplete("vertex " + std::to_string(v) + " has no rank in its class");

    LabelingResult result;
    for (std::size_t i = 0; i < m.element_count(); ++i) {
        Simplex& s = m.element(i);
        std::vector<VertexId> v0, v1;
        for (VertexId v : s.vertices)
            (p.in_v1[std::size_t(v)] ? v1 : v0).push_back(v);
        std::sort(v0.begin(), v0.end(),
                  [&](VertexId a, VertexId b) { return p.rank0[std::size_t(a)] < p.rank0[std::size_t(b)]; });
        std::sort(v1.begin(), v1.end(),
                  [&](VertexId a, VertexId b) { return p.rank1[std::size_t(a)] < p.rank1[std::size_t(b)]; });
        const std::size_t k = v1.size();
        if (k == std::size_t(d) + 1) {
            s.vertices = std::move(v1);
            s.type = 0;
        } else if (k == std::size_t(d)) {
            s.vertices.clear();
            s.vertices.push_back(v0.front());
            s.vertices.insert(s.vertices.end(), v1.begin(), v1.end());
            s.type = 0;
            result.degenerate_elements.push_back(i);
        } else {
            s.vertices.clear();
            s.vertices.push_back(v0.front());
            s.vertices.insert(s.vertices.end(), v1.begin(), v1.end());
            s.vertices.insert(s.vertices.end(), v0.begin() + 1, v0.end());
            s.type = int(k);
        }
    }
    return result;
}

// --- full pipeline -----------------------------------------------------------

struct RelabelOutcome {
    VertexPartition partition;
    std::size_t demoted = 0;  // vertices moved V1 -> V0 by the degeneracy repair
    LabelingResult labeling;
    std::size_t v0_count = 0;
    std::size_t v1_count = 0;
};

/// partition -> order -> degeneracy repair -> element rewrite.  Deterministic
/// for fixed inputs; the global order depends only on the mesh (and the
/// announcements), so the repair only re-derives the class ranks.
inline RelabelOutcome relabel_pipeline(Mesh& m, SetStrategy set_strategy, long threshold,
                                       OrderStrategy order_strategy,
                                       const std::optional<AnnouncedEdges>& announced = {}) {
    const int d = m.dim();
    auto membership = compute_membership(m, set_strategy, threshold);
    AnnouncedEdges ann;
    const AnnouncedEdges* annp = nullptr;
    if (order_strategy == OrderStrategy::SRN2) {
        ann = announced ? *announced : default_announcements(m);
        annp = &ann;
    }
    const auto sequence = srn_global_order(m, annp);

    RelabelOutcome out;
    while (true) {
        out.partition = make_vertex_partition(m, membership, sequence);
        std::set<VertexId> demote;
        for (const Simplex& s : m.elements()) {
            int k = 0;
            for (VertexId v : s.vertices) k += out.partition.in_v1[std::size_t(v)] ? 1 : 0;
            if (k < d) continue;
            VertexId lowest = -1;
            for (VertexId v : s.vertices) {
                if (!out.partition.in_v1[std::size_t(v)]) continue;
                if (lowest < 0 ||
                    out.partition.rank1[std::size_t(v)] < out.partition.rank1[std::size_t(lowest)])
                    lowest = v;
            }
            demote.insert(lowest);
        }
        if (demote.empty()) break;
        for (VertexId v : demote) membership[std::size_t(v)] = 0;
        out.demoted += demote.size();
    }
    out.labeling = apply_labeling(m, out.partition);
    for (std::size_t v = 0; v < m.vertex_count(); ++v)
        (out.partition.in_v1[v] ? out.v1_count : out.v0_count) += 1;
    return out;
}

}  // namespace dsimp
