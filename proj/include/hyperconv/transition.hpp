#pragma once

#include <cmath>
#include <vector>

#include "hyperconv/hypergraph.hpp"
#include "hyperconv/rng.hpp"
#include "hyperconv/sparse.hpp"

namespace hyperconv {

enum class TransitionKind { hypergraph_symmetric, hypergraph_asymmetric, gcn_renormalized, averaged };

// N x N propagation operator applied to node embeddings each layer.
struct TransitionOperator {
    SparseMatrix matrix;
    TransitionKind kind;
};

// T = D^-1/2 H W B^-1 H^T D^-1/2, built as F F^T with
// F = D^-1/2 H W^1/2 B^-1/2 so the two sparse factors are transposes.
inline TransitionOperator build_symmetric_transition(const Hypergraph& hg, const DegreePair& deg) {
    SparseMatrix f = hg.incidence();
    std::vector<double> rinv(deg.vertex_degrees.size());
    for (std::size_t i = 0; i < rinv.size(); ++i) {
        if (!(deg.vertex_degrees[i] > 0.0)) throw ZeroDegree("vertex degree 0");
        rinv[i] = 1.0 / std::sqrt(deg.vertex_degrees[i]);
    }
    std::vector<double> cinv(deg.edge_degrees.size());
    for (std::size_t e = 0; e < cinv.size(); ++e) {
        if (!(deg.edge_degrees[e] > 0.0)) throw ZeroDegree("hyperedge degree 0");
        cinv[e] = std::sqrt(hg.edge_weights()[e] / deg.edge_degrees[e]);
    }
    f.scale_rows(rinv);
    f.scale_cols(cinv);
    return {multiply(f, f.transpose()), TransitionKind::hypergraph_symmetric};
}

// T = (D^-1 H W)(H B^-1)^T: L1 row normalization of HW times the transpose of
// the column-L1-normalized H.
inline TransitionOperator build_asymmetric_transition(const Hypergraph& hg, const DegreePair& deg) {
    SparseMatrix r = hg.incidence();
    std::vector<double> rinv(deg.vertex_degrees.size());
    for (std::size_t i = 0; i < rinv.size(); ++i) {
        if (!(deg.vertex_degrees[i] > 0.0)) throw ZeroDegree("vertex degree 0");
        rinv[i] = 1.0 / deg.vertex_degrees[i];
    }
    r.scale_rows(rinv);
    r.scale_cols(hg.edge_weights());

    SparseMatrix c = hg.incidence();
    std::vector<double> cinv(deg.edge_degrees.size());
    for (std::size_t e = 0; e < cinv.size(); ++e) {
        if (!(deg.edge_degrees[e] > 0.0)) throw ZeroDegree("hyperedge degree 0");
        cinv[e] = 1.0 / deg.edge_degrees[e];
    }
    c.scale_cols(cinv);
    return {multiply(r, c.transpose()), TransitionKind::hypergraph_asymmetric};
}

// GCN renormalization: A_hat = Dt^-1/2 (I + D^-1/2 A D^-1/2) Dt^-1/2 with
// Dt the row sums of the inner term.
inline TransitionOperator build_gcn_transition(const PairwiseGraph& g) {
    std::vector<double> degs = g.adjacency.row_sums();
    std::vector<double> dinv(degs.size());
    for (std::size_t i = 0; i < degs.size(); ++i) {
        if (!(degs[i] > 0.0))
            throw ZeroDegree("isolated vertex " + std::to_string(i) +
                             "; add a self-loop before building the GCN operator");
        dinv[i] = 1.0 / std::sqrt(degs[i]);
    }
    SparseMatrix s = g.adjacency;
    s.scale_rows(dinv);
    s.scale_cols(dinv);
    SparseMatrix atilde = add(SparseMatrix::identity(g.n_vertices), s);
    std::vector<double> dt = atilde.row_sums();
    std::vector<double> dtinv(dt.size());
    for (std::size_t i = 0; i < dt.size(); ++i) dtinv[i] = 1.0 / std::sqrt(dt[i]);
    atilde.scale_rows(dtinv);
    atilde.scale_cols(dtinv);
    return {std::move(atilde), TransitionKind::gcn_renormalized};
}

inline TransitionOperator average_transitions(const TransitionOperator& a,
                                              const TransitionOperator& b) {
    if (a.matrix.n_rows() != b.matrix.n_rows() || a.matrix.n_cols() != b.matrix.n_cols())
        throw DimensionMismatch("average_transitions");
    return {scaled(add(a.matrix, b.matrix), 0.5), TransitionKind::averaged};
}

struct SpectralEstimate {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Power iteration for the dominant eigenvalue magnitude. Starts from the
// all-ones vector; restarts once from a fixed pseudo-random vector if the
// Rayleigh quotient stalls near zero (unlucky orthogonal start).
inline SpectralEstimate spectral_radius(const TransitionOperator& t, int iters = 1000,
                                        double tol = 1e-10) {
    const SparseMatrix& m = t.matrix;
    if (m.n_rows() != m.n_cols()) throw DimensionMismatch("spectral_radius: square required");
    const int n = m.n_rows();

    auto run = [&](std::vector<double> x) {
        SpectralEstimate est;
        double norm = 0.0;
        for (double v : x) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : x) v /= norm;
        double prev = 0.0;
        std::vector<double> y(n);
        for (int it = 0; it < iters; ++it) {
            std::fill(y.begin(), y.end(), 0.0);
            for (int r = 0; r < n; ++r) {
                auto cols = m.row_cols(r);
                auto vals = m.row_vals(r);
                double acc = 0.0;
                for (std::size_t k = 0; k < cols.size(); ++k) acc += vals[k] * x[cols[k]];
                y[r] = acc;
            }
            double rayleigh = 0.0, ynorm = 0.0;
            for (int r = 0; r < n; ++r) {
                rayleigh += x[r] * y[r];
                ynorm += y[r] * y[r];
            }
            ynorm = std::sqrt(ynorm);
            est.value = std::fabs(rayleigh);
            est.iterations = it + 1;
            if (ynorm == 0.0) {  // x in the null space
                est.value = 0.0;
                est.converged = true;
                return est;
            }
            for (int r = 0; r < n; ++r) x[r] = y[r] / ynorm;
            if (it > 0 && std::fabs(est.value - prev) < tol) {
                est.converged = true;
                return est;
            }
            prev = est.value;
        }
        return est;
    };

    SpectralEstimate est = run(std::vector<double>(n, 1.0));
    if (est.value < tol * 10.0) {
        CounterRng rng(0x5eedb00cull);
        std::vector<double> x(n);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        SpectralEstimate est2 = run(std::move(x));
        if (est2.value > est.value) est = est2;
    }
    return est;
}

}  // namespace hyperconv
