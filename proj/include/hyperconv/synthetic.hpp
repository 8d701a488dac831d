#pragma once

#include <set>
#include <utility>
#include <vector>

#include "hyperconv/datasets.hpp"
#include "hyperconv/hypergraph.hpp"
#include "hyperconv/rng.hpp"

namespace hyperconv {

// Random hypergraph with the given mean hyperedge cardinality. Uncovered
// vertices get a singleton hyperedge appended so the invariants hold.
inline Hypergraph random_hypergraph(int n, int m, double mean_cardinality, CounterRng& rng) {
    std::vector<Triplet> t;
    std::vector<char> covered(n, 0);
    for (int e = 0; e < m; ++e) {
        int card = 2 + static_cast<int>(rng.next_uniform() * 2.0 * (mean_cardinality - 2.0) + 0.5);
        if (card < 2) card = 2;
        if (card > n) card = n;
        std::set<int> members;
        while (static_cast<int>(members.size()) < card)
            members.insert(static_cast<int>(rng.next_uniform() * n) % n);
        for (int v : members) {
            t.push_back({v, e, 1.0});
            covered[v] = 1;
        }
    }
    int extra = m;
    for (int v = 0; v < n; ++v)
        if (!covered[v]) t.push_back({v, extra++, 1.0});
    return Hypergraph::unit_weights(SparseMatrix::from_triplets(n, extra, std::move(t)));
}

// Random hypergraph with random positive hyperedge weights.
inline Hypergraph random_weighted_hypergraph(int n, int m, double mean_cardinality,
                                             CounterRng& rng) {
    Hypergraph hg = random_hypergraph(n, m, mean_cardinality, rng);
    std::vector<double> w(hg.n_hyperedges());
    for (double& x : w) x = rng.uniform(0.25, 4.0);
    return Hypergraph(hg.incidence(), std::move(w));
}

// Erdos-Renyi-style pairwise graph; guaranteed at least one edge and no
// isolated vertex (isolated vertices are chained to their successor).
inline PairwiseGraph random_pairwise(int n, double p_edge, CounterRng& rng) {
    std::vector<std::pair<int, int>> links;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.next_uniform() < p_edge) links.emplace_back(i, j);
    PairwiseGraph g = pairwise_from_links(links, n);
    for (int i = 0; i < n; ++i)
        if (g.adjacency.row_cols(i).empty()) {
            links.emplace_back(i, (i + 1) % n);
            g = pairwise_from_links(links, n);
        }
    return g;
}

// Small planted-partition citation dataset: class-indicative sparse features
// and mostly intra-class links. Used by trainer tests; no files involved.
inline DatasetBundle synthetic_citation_dataset(int n, int feats_per_class, int n_classes,
                                                double noise, CounterRng& rng) {
    n -= n % n_classes;  // class = index mod n_classes; keep classes balanced
    DatasetBundle b;
    b.name = "synthetic";
    b.kind = StructureKind::citation_links;
    b.n_classes = n_classes;
    const int f = feats_per_class * n_classes;
    std::vector<Triplet> x;
    for (int i = 0; i < n; ++i) {
        const int c = i % n_classes;
        b.labels.push_back(c);
        for (int j = 0; j < feats_per_class; ++j)
            if (rng.next_uniform() > noise) x.push_back({i, c * feats_per_class + j, 1.0});
        // a little cross-class noise
        if (rng.next_uniform() < noise)
            x.push_back({i, static_cast<int>(rng.next_uniform() * f) % f, 1.0});
        x.push_back({i, c * feats_per_class, 1.0});  // guarantee a nonzero row
    }
    b.features = SparseMatrix::from_triplets(n, f, std::move(x));
    for (int c = 0; c < n_classes; ++c) b.class_names.push_back("c" + std::to_string(c));
    for (int i = 0; i < n; ++i) {
        for (int tries = 0; tries < 3; ++tries) {
            int j;
            if (rng.next_uniform() > noise) {  // same residue => same class
                j = (i + n_classes * (1 + static_cast<int>(rng.next_uniform() * 4))) % n;
            } else {
                j = static_cast<int>(rng.next_uniform() * n) % n;
            }
            if (j != i) b.links.emplace_back(i, j);
        }
    }
    return b;
}

}  // namespace hyperconv
