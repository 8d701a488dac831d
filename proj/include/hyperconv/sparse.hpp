#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hyperconv/dense.hpp"
#include "hyperconv/errors.hpp"

namespace hyperconv {

struct Triplet {
    int row, col;
    double val;
};

// Compressed-sparse-row matrix of 64-bit floats. Column indices are strictly
// increasing within each row and explicit zeros are never stored.
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(int n_rows, int n_cols, std::vector<Triplet> entries) {
        for (const Triplet& t : entries)
            if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
                throw IndexOutOfRange("triplet (" + std::to_string(t.row) + "," +
                                      std::to_string(t.col) + ") outside " +
                                      std::to_string(n_rows) + "x" + std::to_string(n_cols));
        std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        SparseMatrix m;
        m.n_rows_ = n_rows;
        m.n_cols_ = n_cols;
        m.offsets_.assign(n_rows + 1, 0);
        for (std::size_t i = 0; i < entries.size();) {
            std::size_t j = i;
            double v = 0.0;
            while (j < entries.size() && entries[j].row == entries[i].row &&
                   entries[j].col == entries[i].col)
                v += entries[j++].val;
            if (v != 0.0) {
                m.cols_.push_back(entries[i].col);
                m.vals_.push_back(v);
                ++m.offsets_[entries[i].row + 1];
            }
            i = j;
        }
        for (int r = 0; r < n_rows; ++r) m.offsets_[r + 1] += m.offsets_[r];
        return m;
    }

    static SparseMatrix identity(int n) {
        std::vector<Triplet> t;
        t.reserve(n);
        for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
        return from_triplets(n, n, std::move(t));
    }

    int n_rows() const { return n_rows_; }
    int n_cols() const { return n_cols_; }
    std::size_t nnz() const { return vals_.size(); }

    const std::vector<int>& row_offsets() const { return offsets_; }
    const std::vector<int>& col_indices() const { return cols_; }
    const std::vector<double>& values() const { return vals_; }
    std::vector<double>& values() { return vals_; }

    std::span<const int> row_cols(int r) const {
        return {cols_.data() + offsets_[r], static_cast<std::size_t>(offsets_[r + 1] - offsets_[r])};
    }
    std::span<const double> row_vals(int r) const {
        return {vals_.data() + offsets_[r], static_cast<std::size_t>(offsets_[r + 1] - offsets_[r])};
    }

    SparseMatrix transpose() const {
        SparseMatrix t;
        t.n_rows_ = n_cols_;
        t.n_cols_ = n_rows_;
        t.offsets_.assign(n_cols_ + 1, 0);
        for (int c : cols_) ++t.offsets_[c + 1];
        for (int r = 0; r < n_cols_; ++r) t.offsets_[r + 1] += t.offsets_[r];
        t.cols_.resize(nnz());
        t.vals_.resize(nnz());
        std::vector<int> cursor(t.offsets_.begin(), t.offsets_.end() - 1);
        for (int r = 0; r < n_rows_; ++r)
            for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) {
                int p = cursor[cols_[k]]++;
                t.cols_[p] = r;
                t.vals_[p] = vals_[k];
            }
        return t;
    }

    DenseMatrix to_dense() const {
        DenseMatrix d(n_rows_, n_cols_);
        for (int r = 0; r < n_rows_; ++r)
            for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) d(r, cols_[k]) = vals_[k];
        return d;
    }

    // In-place: row r scaled by d[r]
    void scale_rows(std::span<const double> d) {
        if (static_cast<int>(d.size()) != n_rows_) throw DimensionMismatch("scale_rows");
        for (int r = 0; r < n_rows_; ++r)
            for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) vals_[k] *= d[r];
    }

    // In-place: column c scaled by d[c]
    void scale_cols(std::span<const double> d) {
        if (static_cast<int>(d.size()) != n_cols_) throw DimensionMismatch("scale_cols");
        for (std::size_t k = 0; k < vals_.size(); ++k) vals_[k] *= d[cols_[k]];
    }

    std::vector<double> row_sums() const {
        std::vector<double> s(n_rows_, 0.0);
        for (int r = 0; r < n_rows_; ++r)
            for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) s[r] += vals_[k];
        return s;
    }

    std::vector<double> col_sums() const {
        std::vector<double> s(n_cols_, 0.0);
        for (std::size_t k = 0; k < vals_.size(); ++k) s[cols_[k]] += vals_[k];
        return s;
    }

private:
    int n_rows_ = 0, n_cols_ = 0;
    std::vector<int> offsets_;  // size n_rows_+1
    std::vector<int> cols_;
    std::vector<double> vals_;
};

// Sparse-sparse product with a dense row accumulator. Entries whose magnitude
// falls below `prune` are dropped (cancellation noise only).
inline SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b, double prune = 1e-15) {
    if (a.n_cols() != b.n_rows()) throw DimensionMismatch("sparse multiply");
    std::vector<double> acc(b.n_cols(), 0.0);
    std::vector<int> touched;
    std::vector<Triplet> out;
    for (int i = 0; i < a.n_rows(); ++i) {
        touched.clear();
        auto acols = a.row_cols(i);
        auto avals = a.row_vals(i);
        for (std::size_t k = 0; k < acols.size(); ++k) {
            int j = acols[k];
            double av = avals[k];
            auto bcols = b.row_cols(j);
            auto bvals = b.row_vals(j);
            for (std::size_t m = 0; m < bcols.size(); ++m) {
                if (acc[bcols[m]] == 0.0) touched.push_back(bcols[m]);
                acc[bcols[m]] += av * bvals[m];
            }
        }
        for (int c : touched) {
            if (std::fabs(acc[c]) >= prune) out.push_back({i, c, acc[c]});
            acc[c] = 0.0;
        }
    }
    return SparseMatrix::from_triplets(a.n_rows(), b.n_cols(), std::move(out));
}

// Dense result of sparse * dense
inline DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d) {
    if (s.n_cols() != d.rows())
        throw DimensionMismatch("spmm: " + std::to_string(s.n_cols()) + " vs " +
                                std::to_string(d.rows()));
    DenseMatrix out(s.n_rows(), d.cols());
    for (int r = 0; r < s.n_rows(); ++r) {
        double* o = out.row(r);
        auto cols = s.row_cols(r);
        auto vals = s.row_vals(r);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const double v = vals[k];
            const double* dr = d.row(cols[k]);
            for (int j = 0; j < d.cols(); ++j) o[j] += v * dr[j];
        }
    }
    return out;
}

inline SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols())
        throw DimensionMismatch("sparse add");
    std::vector<Triplet> t;
    t.reserve(a.nnz() + b.nnz());
    for (int r = 0; r < a.n_rows(); ++r) {
        auto c = a.row_cols(r);
        auto v = a.row_vals(r);
        for (std::size_t k = 0; k < c.size(); ++k) t.push_back({r, c[k], v[k]});
    }
    for (int r = 0; r < b.n_rows(); ++r) {
        auto c = b.row_cols(r);
        auto v = b.row_vals(r);
        for (std::size_t k = 0; k < c.size(); ++k) t.push_back({r, c[k], v[k]});
    }
    return SparseMatrix::from_triplets(a.n_rows(), a.n_cols(), std::move(t));
}

inline SparseMatrix scaled(SparseMatrix a, double c) {
    for (double& v : a.values()) v *= c;
    return a;
}

inline double max_abs_diff(const SparseMatrix& a, const DenseMatrix& b) {
    return max_abs_diff(a.to_dense(), b);
}

}  // namespace hyperconv
