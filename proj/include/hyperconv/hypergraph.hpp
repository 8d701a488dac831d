#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hyperconv/errors.hpp"
#include "hyperconv/sparse.hpp"

namespace hyperconv {

// Per-vertex and per-hyperedge degrees (diagonals of D and B).
struct DegreePair {
    std::vector<double> vertex_degrees;  // D_ii = sum_e W_e * H_ie
    std::vector<double> edge_degrees;    // B_ee = sum_i H_ie
};

// A hypergraph stored as an N x M incidence matrix with positive hyperedge
// weights. Structural hypergraphs are binary; attention later replaces the
// stored values with real scores.
class Hypergraph {
public:
    Hypergraph(SparseMatrix incidence, std::vector<double> edge_weights)
        : incidence_(std::move(incidence)), edge_weights_(std::move(edge_weights)) {
        if (static_cast<int>(edge_weights_.size()) != incidence_.n_cols())
            throw DimensionMismatch("edge_weights length != number of hyperedges");
        for (double w : edge_weights_)
            if (!(w > 0.0)) throw Error("hyperedge weights must be strictly positive");
        for (double v : incidence_.values())
            if (!(v > 0.0)) throw Error("incidence entries must be strictly positive");
        for (int i = 0; i < incidence_.n_rows(); ++i)
            if (incidence_.row_cols(i).empty())
                throw EmptyHypergraph("vertex " + std::to_string(i) + " has no incident hyperedge");
        std::vector<char> seen(incidence_.n_cols(), 0);
        for (int c : incidence_.col_indices()) seen[c] = 1;
        for (int e = 0; e < incidence_.n_cols(); ++e)
            if (!seen[e])
                throw EmptyHypergraph("hyperedge " + std::to_string(e) + " has no incident vertex");
    }

    static Hypergraph unit_weights(SparseMatrix incidence) {
        std::vector<double> w(incidence.n_cols(), 1.0);
        return Hypergraph(std::move(incidence), std::move(w));
    }

    int n_vertices() const { return incidence_.n_rows(); }
    int n_hyperedges() const { return incidence_.n_cols(); }
    const SparseMatrix& incidence() const { return incidence_; }
    const std::vector<double>& edge_weights() const { return edge_weights_; }

private:
    SparseMatrix incidence_;
    std::vector<double> edge_weights_;
};

// Simple undirected graph: symmetric binary adjacency with a zero diagonal.
struct PairwiseGraph {
    int n_vertices = 0;
    SparseMatrix adjacency;

    std::vector<std::pair<int, int>> edge_list() const {
        std::vector<std::pair<int, int>> e;
        for (int i = 0; i < adjacency.n_rows(); ++i)
            for (int j : adjacency.row_cols(i))
                if (i < j) e.emplace_back(i, j);
        return e;
    }
};

inline DegreePair compute_degrees(const Hypergraph& hg) {
    const SparseMatrix& h = hg.incidence();
    DegreePair d;
    d.vertex_degrees.assign(h.n_rows(), 0.0);
    d.edge_degrees.assign(h.n_cols(), 0.0);
    for (int i = 0; i < h.n_rows(); ++i) {
        auto cols = h.row_cols(i);
        auto vals = h.row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            d.vertex_degrees[i] += hg.edge_weights()[cols[k]] * vals[k];
            d.edge_degrees[cols[k]] += vals[k];
        }
    }
    for (int i = 0; i < h.n_rows(); ++i)
        if (!(d.vertex_degrees[i] > 0.0))
            throw ZeroDegree("vertex " + std::to_string(i) + " has degree 0");
    for (int e = 0; e < h.n_cols(); ++e)
        if (!(d.edge_degrees[e] > 0.0))
            throw ZeroDegree("hyperedge " + std::to_string(e) + " has degree 0");
    return d;
}

// One hyperedge per article: the article itself (centroid) plus every article
// with a citation link to or from it. Direction and duplicates are discarded.
// Isolated articles keep a singleton self-hyperedge so D stays invertible.
inline Hypergraph from_citation_network(const std::vector<std::pair<int, int>>& citation_links,
                                        int n_vertices) {
    std::vector<std::set<int>> members(n_vertices);
    for (int v = 0; v < n_vertices; ++v) members[v].insert(v);
    for (auto [a, b] : citation_links) {
        if (a < 0 || a >= n_vertices || b < 0 || b >= n_vertices)
            throw IndexOutOfRange("citation link (" + std::to_string(a) + "," +
                                  std::to_string(b) + ") outside 0.." +
                                  std::to_string(n_vertices - 1));
        members[a].insert(b);
        members[b].insert(a);
    }
    std::vector<Triplet> t;
    for (int e = 0; e < n_vertices; ++e)
        for (int v : members[e]) t.push_back({v, e, 1.0});
    return Hypergraph::unit_weights(
        SparseMatrix::from_triplets(n_vertices, n_vertices, std::move(t)));
}

// One hyperedge per attribute column; columns connecting fewer than two
// vertices are dropped (a 1-vertex hyperedge propagates nothing).
inline Hypergraph from_attribute_occurrence(const SparseMatrix& occurrence) {
    for (double v : occurrence.values())
        if (v != 1.0) throw Error("occurrence matrix must be binary");
    std::vector<double> card = occurrence.col_sums();
    std::vector<int> col_map(occurrence.n_cols(), -1);
    int kept = 0;
    for (int c = 0; c < occurrence.n_cols(); ++c)
        if (card[c] >= 2.0) col_map[c] = kept++;
    if (kept == 0) throw EmptyHypergraph("no attribute column connects >= 2 vertices");
    std::vector<Triplet> t;
    for (int r = 0; r < occurrence.n_rows(); ++r)
        for (int c : occurrence.row_cols(r))
            if (col_map[c] >= 0) t.push_back({r, col_map[c], 1.0});
    return Hypergraph::unit_weights(
        SparseMatrix::from_triplets(occurrence.n_rows(), kept, std::move(t)));
}

// Clique expansion: connect two vertices iff they share at least one
// attribute. Vertices with no attributes stay isolated and are counted.
inline PairwiseGraph clique_graph_from_occurrence(const SparseMatrix& occurrence,
                                                  int* isolated_count = nullptr) {
    const SparseMatrix byword = occurrence.transpose();
    std::vector<Triplet> t;
    std::vector<std::set<int>> adj(occurrence.n_rows());
    for (int w = 0; w < byword.n_rows(); ++w) {
        auto verts = byword.row_cols(w);
        for (std::size_t a = 0; a < verts.size(); ++a)
            for (std::size_t b = a + 1; b < verts.size(); ++b) adj[verts[a]].insert(verts[b]);
    }
    int isolated = 0;
    for (int i = 0; i < occurrence.n_rows(); ++i) {
        for (int j : adj[i]) {
            t.push_back({i, j, 1.0});
            t.push_back({j, i, 1.0});
        }
    }
    SparseMatrix a =
        SparseMatrix::from_triplets(occurrence.n_rows(), occurrence.n_rows(), std::move(t));
    for (int i = 0; i < a.n_rows(); ++i)
        if (a.row_cols(i).empty()) ++isolated;
    if (isolated_count) *isolated_count = isolated;
    return PairwiseGraph{occurrence.n_rows(), std::move(a)};
}

// Undirected, deduplicated pairwise graph from a citation link list.
// Self-links are discarded (the adjacency diagonal stays zero).
inline PairwiseGraph pairwise_from_links(const std::vector<std::pair<int, int>>& links,
                                         int n_vertices) {
    std::vector<Triplet> t;
    for (auto [a, b] : links) {
        if (a < 0 || a >= n_vertices || b < 0 || b >= n_vertices)
            throw IndexOutOfRange("link outside vertex range");
        if (a == b) continue;
        t.push_back({a, b, 1.0});
        t.push_back({b, a, 1.0});
    }
    SparseMatrix adj = SparseMatrix::from_triplets(n_vertices, n_vertices, std::move(t));
    for (double& v : adj.values()) v = 1.0;  // dedup collapsed duplicates into sums
    return PairwiseGraph{n_vertices, std::move(adj)};
}

// One 2-vertex hyperedge per undirected edge; B == 2I by construction.
inline Hypergraph pairwise_to_hypergraph(const PairwiseGraph& g) {
    std::vector<Triplet> t;
    int e = 0;
    for (int i = 0; i < g.adjacency.n_rows(); ++i)
        for (int j : g.adjacency.row_cols(i))
            if (i < j) {
                t.push_back({i, e, 1.0});
                t.push_back({j, e, 1.0});
                ++e;
            }
    if (e == 0) throw EmptyHypergraph("pairwise graph has no edges");
    return Hypergraph::unit_weights(SparseMatrix::from_triplets(g.n_vertices, e, std::move(t)));
}

// Adds A_ii = 1 for vertices with no incident edge, so D^-1 exists downstream.
inline PairwiseGraph with_self_loops_on_isolated(const PairwiseGraph& g) {
    std::vector<Triplet> t;
    for (int i = 0; i < g.adjacency.n_rows(); ++i) {
        auto cols = g.adjacency.row_cols(i);
        if (cols.empty()) t.push_back({i, i, 1.0});
        for (int j : cols) t.push_back({i, j, 1.0});
    }
    return PairwiseGraph{g.n_vertices,
                         SparseMatrix::from_triplets(g.n_vertices, g.n_vertices, std::move(t))};
}

}  // namespace hyperconv
