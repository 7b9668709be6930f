#pragma once

// Geometric quality indicators and closure-cost distances.
//
// The corner polar sine is d!*Volume divided by the product of the edge
// lengths at the corner; the element value averages over its d+1 corners.
// Aspect-ratio exponents follow dimensional analysis (volume vs length ->
// power d, volume vs face measure -> d/(d-1), face vs length -> d-1), making
// every indicator invariant under rigid motions and uniform scaling.

#include "dsimp/refine.hpp"

#include <cmath>

namespace dsimp {

namespace detail {

/// |det| of a k x k matrix, by partial-pivot elimination; a is row-major and
/// gets clobbered.
inline double det_abs(std::vector<double>& a, int k) {
    double det = 1.0;
    for (int col = 0; col < k; ++col) {
        int pivot = col;
        for (int r = col + 1; r < k; ++r)
            if (std::abs(a[std::size_t(r * k + col)]) > std::abs(a[std::size_t(pivot * k + col)])) pivot = r;
        if (a[std::size_t(pivot * k + col)] == 0.0) return 0.0;
        if (pivot != col)
            for (int c = 0; c < k; ++c) std::swap(a[std::size_t(col * k + c)], a[std::size_t(pivot * k + c)]);
        const double p = a[std::size_t(col * k + col)];
        det *= p;
        for (int r = col + 1; r < k; ++r) {
            const double f = a[std::size_t(r * k + col)] / p;
            for (int c = col; c < k; ++c) a[std::size_t(r * k + c)] -= f * a[std::size_t(col * k + c)];
        }
    }
    return std::abs(det);
}

/// |det| of the d x d matrix of edge vectors out of corner `corner`.
inline double corner_det_abs(const Mesh& m, const Simplex& s, int corner) {
    const int d = m.dim();
    std::vector<double> a(std::size_t(d) * std::size_t(d));
    const auto p0 = m.point(s.vertices[std::size_t(corner)]);
    int row = 0;
    for (int i = 0; i <= d; ++i) {
        if (i == corner) continue;
        const auto pi = m.point(s.vertices[std::size_t(i)]);
        for (int j = 0; j < d; ++j) a[std::size_t(row * d + j)] = pi[std::size_t(j)] - p0[std::size_t(j)];
        ++row;
    }
    return det_abs(a, d);
}

inline double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    double sq = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

/// (d-1)-measure of a face given by d vertex ids, via the Gram determinant.
inline double face_measure(const Mesh& m, const std::vector<VertexId>& face) {
    const int k = int(face.size()) - 1;  // = d-1
    const auto p0 = m.point(face[0]);
    std::vector<std::span<const double>> edges;
    for (int i = 1; i <= k; ++i) edges.push_back(m.point(face[std::size_t(i)]));
    std::vector<double> gram(std::size_t(k) * std::size_t(k));
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
            double dot = 0;
            for (std::size_t j = 0; j < p0.size(); ++j)
                dot += (edges[std::size_t(r)][j] - p0[j]) * (edges[std::size_t(c)][j] - p0[j]);
            gram[std::size_t(r * k + c)] = dot;
        }
    return std::sqrt(det_abs(gram, k)) / factorial(k);
}

}  // namespace detail

inline double simplex_volume(const Mesh& m, const Simplex& s) {
    return detail::corner_det_abs(m, s, 0) / detail::factorial(m.dim());
}

/// Corner polar sine: d!*V / prod of edge lengths at the corner.
inline double polar_sine(const Mesh& m, const Simplex& s, int corner) {
    const int d = m.dim();
    if (corner < 0 || corner > d) throw IndexOutOfRange("corner position out of range");
    const double det = detail::corner_det_abs(m, s, corner);
    if (det == 0.0) throw DegenerateElement("element has zero volume");
    double denom = 1.0;
    const auto pc = m.point(s.vertices[std::size_t(corner)]);
    for (int i = 0; i <= d; ++i) {
        if (i == corner) continue;
        denom *= detail::distance(m.point(s.vertices[std::size_t(i)]), pc);
    }
    return det / denom;
}

/// Element polar sine: average over the d+1 corners.
inline double element_polar_sine(const Mesh& m, const Simplex& s) {
    const int d = m.dim();
    double sum = 0;
    for (int c = 0; c <= d; ++c) sum += polar_sine(m, s, c);
    return sum / double(d + 1);
}

struct QualityStats {
    double min = std::numeric_limits<double>::infinity();
    double avg = 0;
    double max = -std::numeric_limits<double>::infinity();

    void accumulate(double x) {
        min = std::min(min, x);
        max = std::max(max, x);
        avg += x;
    }
    void finalize(std::size_t n) {
        if (n) avg /= double(n);
    }
};

struct QualityReport {
    QualityStats polar_sine;  // corner-averaged polar sine per element
    QualityStats v_le, v_se;  // volume over longest/shortest edge ^ d
    QualityStats v_lf, v_sf;  // volume over largest/smallest face ^ (d/(d-1))
    QualityStats f_le, f_se;  // mean face measure over longest/shortest edge ^ (d-1)
    std::size_t max_elements_per_vertex = 0;
    std::size_t max_elements_per_edge = 0;
};

inline QualityReport quality_report(const Mesh& m) {
    const int d = m.dim();
    QualityReport rep;
    std::vector<std::size_t> vertex_adjacency(m.vertex_count(), 0);
    std::map<EdgeKey, std::size_t> edge_adjacency;

    for (const Simplex& s : m.elements()) {
        const double vol = simplex_volume(m, s);
        if (vol == 0.0) throw DegenerateElement("element has zero volume");

        double le = 0, se = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s.vertices.size(); ++i)
            for (std::size_t j = i + 1; j < s.vertices.size(); ++j) {
                const double len = detail::distance(m.point(s.vertices[i]), m.point(s.vertices[j]));
                le = std::max(le, len);
                se = std::min(se, len);
                ++edge_adjacency[make_edge(s.vertices[i], s.vertices[j])];
            }
        for (VertexId v : s.vertices) ++vertex_adjacency[std::size_t(v)];

        double lf = 0, sf = std::numeric_limits<double>::infinity(), face_sum = 0;
        for (std::size_t pos = 0; pos < s.vertices.size(); ++pos) {
            std::vector<VertexId> face;
            for (std::size_t i = 0; i < s.vertices.size(); ++i)
                if (i != pos) face.push_back(s.vertices[i]);
            const double f = detail::face_measure(m, face);
            lf = std::max(lf, f);
            sf = std::min(sf, f);
            face_sum += f;
        }
        const double f_mean = face_sum / double(d + 1);

        const double dd = double(d);
        rep.polar_sine.accumulate(element_polar_sine(m, s));
        rep.v_le.accumulate(vol / std::pow(le, dd));
        rep.v_se.accumulate(vol / std::pow(se, dd));
        rep.v_lf.accumulate(vol / std::pow(lf, dd / (dd - 1.0)));
        rep.v_sf.accumulate(vol / std::pow(sf, dd / (dd - 1.0)));
        rep.f_le.accumulate(f_mean / std::pow(le, dd - 1.0));
        rep.f_se.accumulate(f_mean / std::pow(se, dd - 1.0));
    }
    const std::size_t n = m.element_count();
    rep.polar_sine.finalize(n);
    rep.v_le.finalize(n);
    rep.v_se.finalize(n);
    rep.v_lf.finalize(n);
    rep.v_sf.finalize(n);
    rep.f_le.finalize(n);
    rep.f_se.finalize(n);
    for (std::size_t c : vertex_adjacency) rep.max_elements_per_vertex = std::max(rep.max_elements_per_vertex, c);
    for (const auto& [e, c] : edge_adjacency) rep.max_elements_per_edge = std::max(rep.max_elements_per_edge, c);
    return rep;
}

struct ClosureReport {
    long d2_max = 0;
    double d2_avg_upper = 0;  // exact average when exact_average is set
    bool exact_average = false;
    int level = 0;
    /// Closure size per element; with the subsumption shortcut, elements
    /// refined inside an earlier element's closure inherit that bound.
    std::vector<long> per_element;
};

/// d2 = max over elements of the conforming-closure size of refining that
/// element alone.  The shortcut skips elements already refined inside an
/// earlier closure; the maximum is exact either way, the average an upper
/// bound unless `exact_average`.
inline ClosureReport distance2(const Mesh& m, bool exact_average, int level_tag = 0) {
    const std::size_t n = m.element_count();
    ClosureReport rep;
    rep.exact_average = exact_average;
    rep.level = level_tag;
    rep.per_element.assign(n, -1);

    for (std::size_t i = 0; i < n; ++i) {
        if (!exact_average && rep.per_element[i] >= 0) continue;
        Mesh copy = m;
        const ClosureResult r = refine_closure(copy, {i});
        rep.per_element[i] = r.bisections;
        if (!exact_average)
            for (std::size_t j = 0; j < n; ++j)
                if (r.input_leaf_bisected[j] && rep.per_element[j] < 0) rep.per_element[j] = r.bisections;
    }

    double sum = 0;
    for (long c : rep.per_element) {
        rep.d2_max = std::max(rep.d2_max, c);
        sum += double(c);
    }
    rep.d2_avg_upper = n ? sum / double(n) : 0.0;
    return rep;
}

}  // namespace dsimp
