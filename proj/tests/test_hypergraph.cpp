#include <doctest.h>

#include <set>

#include "hyperconv/hypergraph.hpp"
#include "hyperconv/rng.hpp"
#include "hyperconv/synthetic.hpp"

using namespace hyperconv;

namespace {

Hypergraph hg_from_edges(int n, const std::vector<std::vector<int>>& edges,
                         std::vector<double> w = {}) {
    std::vector<Triplet> t;
    for (std::size_t e = 0; e < edges.size(); ++e)
        for (int v : edges[e]) t.push_back({v, static_cast<int>(e), 1.0});
    SparseMatrix inc = SparseMatrix::from_triplets(n, static_cast<int>(edges.size()), std::move(t));
    if (w.empty()) return Hypergraph::unit_weights(std::move(inc));
    return Hypergraph(std::move(inc), std::move(w));
}

}  // namespace

TEST_CASE("degrees of the five-vertex two-hyperedge scenario") {
    Hypergraph hg = hg_from_edges(5, {{0, 1, 2}, {2, 3, 4}});
    DegreePair d = compute_degrees(hg);
    CHECK(d.vertex_degrees == std::vector<double>{1, 1, 2, 1, 1});
    CHECK(d.edge_degrees == std::vector<double>{3, 3});
}

TEST_CASE("degrees: single hyperedge and weighted hyperedge") {
    DegreePair d = compute_degrees(hg_from_edges(2, {{0, 1}}));
    CHECK(d.vertex_degrees == std::vector<double>{1, 1});
    CHECK(d.edge_degrees == std::vector<double>{2});

    // vertex degrees scale with W, hyperedge degrees do not
    DegreePair w = compute_degrees(hg_from_edges(2, {{0, 1}}, {3.0}));
    CHECK(w.vertex_degrees == std::vector<double>{3, 3});
    CHECK(w.edge_degrees == std::vector<double>{2});
}

TEST_CASE("degree computation matches a scalar-loop oracle bit-exactly") {
    CounterRng rng(7);
    for (int it = 0; it < 20; ++it) {
        Hypergraph hg = random_weighted_hypergraph(15, 8, 3.0, rng);
        DegreePair d = compute_degrees(hg);
        DenseMatrix h = hg.incidence().to_dense();
        for (int i = 0; i < hg.n_vertices(); ++i) {
            double acc = 0.0;
            for (int e = 0; e < hg.n_hyperedges(); ++e) acc += hg.edge_weights()[e] * h(i, e);
            CHECK(d.vertex_degrees[i] == acc);
        }
        for (int e = 0; e < hg.n_hyperedges(); ++e) {
            double acc = 0.0;
            for (int i = 0; i < hg.n_vertices(); ++i) acc += h(i, e);
            CHECK(d.edge_degrees[e] == acc);
        }
    }
}

TEST_CASE("hypergraph invariants reject malformed inputs") {
    // zero column (hyperedge with no vertex)
    CHECK_THROWS_AS(Hypergraph::unit_weights(
                        SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}})),
                    EmptyHypergraph);
    // nonpositive weight
    CHECK_THROWS_AS(Hypergraph(SparseMatrix::from_triplets(1, 1, {{0, 0, 1.0}}), {0.0}), Error);
}

TEST_CASE("citation hypergraph: centroid plus symmetric closure") {
    Hypergraph hg = from_citation_network({{0, 1}}, 2);
    CHECK(hg.n_hyperedges() == 2);
    DenseMatrix h = hg.incidence().to_dense();
    for (int i = 0; i < 2; ++i)
        for (int e = 0; e < 2; ++e) CHECK(h(i, e) == 1.0);

    // no links: singleton hyperedges
    Hypergraph iso = from_citation_network({}, 3);
    CHECK(iso.n_hyperedges() == 3);
    DegreePair d = compute_degrees(iso);
    CHECK(d.edge_degrees == std::vector<double>{1, 1, 1});

    CHECK_THROWS_AS(from_citation_network({{0, 5}}, 3), IndexOutOfRange);
}

TEST_CASE("citation hypergraph membership equals brute-force reconstruction") {
    CounterRng rng(11);
    for (int it = 0; it < 10; ++it) {
        const int n = 5 + static_cast<int>(rng.next_uniform() * 45);
        std::vector<std::pair<int, int>> links;
        for (int k = 0; k < 2 * n; ++k)
            links.emplace_back(static_cast<int>(rng.next_uniform() * n),
                               static_cast<int>(rng.next_uniform() * n));
        Hypergraph hg = from_citation_network(links, n);
        REQUIRE(hg.n_hyperedges() == n);
        DenseMatrix h = hg.incidence().to_dense();
        for (int e = 0; e < n; ++e) {
            std::set<int> expect{e};
            for (auto [a, b] : links) {
                if (a == e) expect.insert(b);
                if (b == e) expect.insert(a);
            }
            for (int i = 0; i < n; ++i)
                CHECK(h(i, e) == (expect.count(i) ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("attribute hypergraph drops degenerate columns") {
    SparseMatrix occ =
        SparseMatrix::from_triplets(3, 2, {{0, 0, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}, {2, 1, 1.0}});
    Hypergraph hg = from_attribute_occurrence(occ);
    CHECK(hg.n_hyperedges() == 2);
    DenseMatrix h = hg.incidence().to_dense();
    CHECK(h(0, 0) == 1.0);
    CHECK(h(1, 0) == 1.0);
    CHECK(h(1, 1) == 1.0);
    CHECK(h(2, 1) == 1.0);

    // single-1 column dropped
    SparseMatrix occ2 = SparseMatrix::from_triplets(
        3, 3, {{0, 0, 1.0}, {1, 0, 1.0}, {2, 1, 1.0}, {0, 2, 1.0}, {2, 2, 1.0}});
    CHECK(from_attribute_occurrence(occ2).n_hyperedges() == 2);

    SparseMatrix only_singletons = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
    CHECK_THROWS_AS(from_attribute_occurrence(only_singletons), EmptyHypergraph);
}

TEST_CASE("clique graph from occurrence") {
    SparseMatrix occ =
        SparseMatrix::from_triplets(3, 2, {{0, 0, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}, {2, 1, 1.0}});
    int isolated = -1;
    PairwiseGraph g = clique_graph_from_occurrence(occ, &isolated);
    CHECK(isolated == 0);
    DenseMatrix a = g.adjacency.to_dense();
    CHECK(a(0, 1) == 1.0);
    CHECK(a(1, 2) == 1.0);
    CHECK(a(0, 2) == 0.0);
    for (int i = 0; i < 3; ++i) CHECK(a(i, i) == 0.0);

    // all-zero row is isolated and counted
    SparseMatrix occ2 = SparseMatrix::from_triplets(3, 1, {{0, 0, 1.0}, {1, 0, 1.0}});
    clique_graph_from_occurrence(occ2, &isolated);
    CHECK(isolated == 1);

    // identical rows become fully connected
    SparseMatrix occ3 = SparseMatrix::from_triplets(
        3, 1, {{0, 0, 1.0}, {1, 0, 1.0}, {2, 0, 1.0}});
    PairwiseGraph g3 = clique_graph_from_occurrence(occ3);
    CHECK(g3.adjacency.nnz() == 6);
}

TEST_CASE("pairwise graph to 2-uniform hypergraph") {
    PairwiseGraph triangle = pairwise_from_links({{0, 1}, {1, 2}, {0, 2}}, 3);
    Hypergraph hg = pairwise_to_hypergraph(triangle);
    CHECK(hg.n_hyperedges() == 3);
    CHECK(compute_degrees(hg).edge_degrees == std::vector<double>{2, 2, 2});

    Hypergraph single = pairwise_to_hypergraph(pairwise_from_links({{0, 1}}, 2));
    DenseMatrix h = single.incidence().to_dense();
    CHECK(h(0, 0) == 1.0);
    CHECK(h(1, 0) == 1.0);

    Hypergraph star = pairwise_to_hypergraph(pairwise_from_links({{0, 1}, {0, 2}, {0, 3}}, 4));
    CHECK(star.n_hyperedges() == 3);
    CHECK(compute_degrees(star).vertex_degrees[0] == 3.0);

    CHECK_THROWS_AS(pairwise_to_hypergraph(PairwiseGraph{2, SparseMatrix::from_triplets(2, 2, {})}),
                    EmptyHypergraph);
}

TEST_CASE("every column of a pairwise-degenerate hypergraph has two nonzeros") {
    CounterRng rng(13);
    for (int it = 0; it < 20; ++it) {
        PairwiseGraph g = random_pairwise(4 + it, 0.4, rng);
        Hypergraph hg = pairwise_to_hypergraph(g);
        for (double b : compute_degrees(hg).edge_degrees) CHECK(b == 2.0);
    }
}

TEST_CASE("pairwise_from_links deduplicates and drops self links") {
    PairwiseGraph g = pairwise_from_links({{0, 1}, {1, 0}, {0, 1}, {2, 2}}, 3);
    CHECK(g.adjacency.nnz() == 2);
    CHECK(g.adjacency.to_dense()(0, 1) == 1.0);
    CHECK(g.adjacency.to_dense()(2, 2) == 0.0);
}
