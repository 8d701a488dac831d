#pragma once

#include <chrono>
#include <sstream>
#include <string>
#include <vector>

#include "hyperconv/layers.hpp"
#include "hyperconv/synthetic.hpp"
#include "hyperconv/transition.hpp"

namespace hyperconv {

namespace bench_detail {

// Literal dense product, no zero shortcuts: the baseline must not borrow
// sparsity from the input.
inline DenseMatrix dense_product(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = ai[k];
            const double* bk = b.row(k);
            for (int j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

// Dense route for D^-1 H W B^-1 H^T: diagonal scalings over the dense H,
// then one full (N x M)(M x N) product — the N^2*M term the factorized
// path avoids.
inline DenseMatrix naive_dense_transition(const Hypergraph& hg, const DegreePair& deg) {
    DenseMatrix h = hg.incidence().to_dense();
    DenseMatrix left = h, right(h.cols(), h.rows());
    for (int i = 0; i < h.rows(); ++i)
        for (int e = 0; e < h.cols(); ++e) {
            left(i, e) = h(i, e) * hg.edge_weights()[e] / deg.vertex_degrees[i];
            right(e, i) = h(i, e) / deg.edge_degrees[e];
        }
    return dense_product(left, right);
}

}  // namespace bench_detail

struct BenchRow {
    int n = 0, m = 0;
    double density = 0.0;
    double t_factorized_s = 0.0;
    double t_naive_s = 0.0;
    double ratio = 0.0;      // t_naive / t_factorized
    double max_dev = 0.0;    // factorized vs naive (correctness piggy-back)
    double forward_ms = 0.0; // one sparse forward pass T * X, informational
};

inline const char* bench_csv_header() {
    return "n,m,density,t_factorized_s,t_naive_s,ratio";
}

inline std::string to_csv(const BenchRow& r) {
    std::ostringstream os;
    os << r.n << ',' << r.m << ',' << r.density << ',' << r.t_factorized_s << ','
       << r.t_naive_s << ',' << r.ratio;
    return os.str();
}

inline BenchRow bench_transition(int n, int m, double mean_cardinality, std::uint64_t seed,
                                 bool check_against_naive = true, int feature_dim = 16) {
    CounterRng rng(seed);
    Hypergraph hg = random_hypergraph(n, m, mean_cardinality, rng);
    DegreePair deg = compute_degrees(hg);
    using clock = std::chrono::steady_clock;
    BenchRow row;
    row.n = hg.n_vertices();
    row.m = hg.n_hyperedges();
    row.density = static_cast<double>(hg.incidence().nnz()) /
                  (static_cast<double>(row.n) * row.m);

    auto t0 = clock::now();
    TransitionOperator fact = build_asymmetric_transition(hg, deg);
    row.t_factorized_s = std::chrono::duration<double>(clock::now() - t0).count();

    t0 = clock::now();
    DenseMatrix naive = bench_detail::naive_dense_transition(hg, deg);
    row.t_naive_s = std::chrono::duration<double>(clock::now() - t0).count();
    row.ratio = row.t_factorized_s > 0.0 ? row.t_naive_s / row.t_factorized_s : 0.0;

    if (check_against_naive) row.max_dev = max_abs_diff(fact.matrix.to_dense(), naive);

    DenseMatrix x(row.n, feature_dim);
    CounterRng xr(seed + 1);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = xr.uniform(-1.0, 1.0);
    t0 = clock::now();
    DenseMatrix y = spmm(fact.matrix, x);
    row.forward_ms = 1e3 * std::chrono::duration<double>(clock::now() - t0).count();
    (void)y;
    return row;
}

}  // namespace hyperconv
