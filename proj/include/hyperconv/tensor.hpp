#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "hyperconv/dense.hpp"
#include "hyperconv/errors.hpp"
#include "hyperconv/rng.hpp"
#include "hyperconv/sparse.hpp"

namespace hyperconv {

struct TensorData {
    DenseMatrix value;
    DenseMatrix grad;  // allocated iff requires_grad
    bool requires_grad = false;
};

// Shared handle to a dense tensor. Copies alias the same storage; the tape
// keeps operands alive through its recorded backward rules.
class Tensor {
public:
    Tensor() = default;

    static Tensor leaf(DenseMatrix value, bool requires_grad = false) {
        Tensor t;
        t.d_ = std::make_shared<TensorData>();
        t.d_->value = std::move(value);
        t.d_->requires_grad = requires_grad;
        if (requires_grad) t.d_->grad = DenseMatrix(t.d_->value.rows(), t.d_->value.cols());
        return t;
    }

    bool valid() const { return d_ != nullptr; }
    const DenseMatrix& value() const { return d_->value; }
    DenseMatrix& value() { return d_->value; }
    const DenseMatrix& grad() const { return d_->grad; }
    DenseMatrix& grad() { return d_->grad; }
    bool requires_grad() const { return d_ && d_->requires_grad; }
    int rows() const { return d_->value.rows(); }
    int cols() const { return d_->value.cols(); }

    void zero_grad() {
        if (requires_grad()) d_->grad.fill(0.0);
    }

    std::shared_ptr<TensorData> data() const { return d_; }

private:
    std::shared_ptr<TensorData> d_;
};

// Contiguous entries grouped into segments: offsets[s] .. offsets[s+1].
struct SegmentIndex {
    std::vector<int> offsets;
    int n_segments() const { return static_cast<int>(offsets.size()) - 1; }
};

// Fixed sparsity pattern with a fixed entry order; entry k couples output row
// rows[k] with input row cols[k].
struct SparsePattern {
    int n_rows = 0, n_cols = 0;
    std::vector<int> rows, cols;
    std::size_t nnz() const { return rows.size(); }

    SparsePattern transposed() const {
        return SparsePattern{n_cols, n_rows, cols, rows};
    }
};

// Pattern over the stored entries of a CSR matrix, entry order = CSR order,
// so the per-row segments are exactly the CSR row offsets.
inline SparsePattern pattern_of(const SparseMatrix& m) {
    SparsePattern p;
    p.n_rows = m.n_rows();
    p.n_cols = m.n_cols();
    p.rows.reserve(m.nnz());
    p.cols.reserve(m.nnz());
    for (int r = 0; r < m.n_rows(); ++r)
        for (int c : m.row_cols(r)) {
            p.rows.push_back(r);
            p.cols.push_back(c);
        }
    return p;
}

inline SegmentIndex row_segments_of(const SparseMatrix& m) {
    return SegmentIndex{m.row_offsets()};
}

// Records forward operations and replays their backward rules in exact
// reverse order. One backward per recording; reset() clears the tape.
class Tape {
public:
    Tensor matmul(const Tensor& a, const Tensor& b) {
        Tensor out = make_out(hyperconv::matmul(a.value(), b.value()),
                              a.requires_grad() || b.requires_grad());
        if (out.requires_grad())
            record([ad = a.data(), bd = b.data(), od = out.data()] {
                const DenseMatrix& g = od->grad;
                if (ad->requires_grad) {
                    // dA = G * B^T
                    for (int i = 0; i < ad->value.rows(); ++i)
                        for (int k = 0; k < bd->value.rows(); ++k) {
                            double acc = 0.0;
                            const double* gi = g.row(i);
                            const double* bk = bd->value.row(k);
                            for (int j = 0; j < g.cols(); ++j) acc += gi[j] * bk[j];
                            ad->grad(i, k) += acc;
                        }
                }
                if (bd->requires_grad) {
                    // dB = A^T * G
                    for (int i = 0; i < ad->value.rows(); ++i) {
                        const double* ai = ad->value.row(i);
                        const double* gi = g.row(i);
                        for (int k = 0; k < ad->value.cols(); ++k) {
                            const double aik = ai[k];
                            if (aik == 0.0) continue;
                            double* bg = bd->grad.row(k);
                            for (int j = 0; j < g.cols(); ++j) bg[j] += aik * gi[j];
                        }
                    }
                }
            });
        return out;
    }

    // Fixed sparse operator applied to a dense tensor: out = S * x.
    Tensor sparse_apply(const SparseMatrix& s, const Tensor& x) {
        Tensor out = make_out(spmm(s, x.value()), x.requires_grad());
        if (out.requires_grad())
            record([&s, xd = x.data(), od = out.data()] {
                // dX = S^T * G, accumulated by walking S row-wise
                const DenseMatrix& g = od->grad;
                for (int r = 0; r < s.n_rows(); ++r) {
                    auto cols = s.row_cols(r);
                    auto vals = s.row_vals(r);
                    const double* gr = g.row(r);
                    for (std::size_t k = 0; k < cols.size(); ++k) {
                        double* xg = xd->grad.row(cols[k]);
                        const double v = vals[k];
                        for (int j = 0; j < g.cols(); ++j) xg[j] += v * gr[j];
                    }
                }
            });
        return out;
    }

    // Sparse, non-trainable features times a trainable weight: out = X * P.
    Tensor sparse_input_matmul(const SparseMatrix& x, const Tensor& p) {
        if (x.n_cols() != p.rows()) throw DimensionMismatch("sparse_input_matmul");
        Tensor out = make_out(spmm(x, p.value()), p.requires_grad());
        if (out.requires_grad())
            record([&x, pd = p.data(), od = out.data()] {
                // dP = X^T * G
                const DenseMatrix& g = od->grad;
                for (int r = 0; r < x.n_rows(); ++r) {
                    auto cols = x.row_cols(r);
                    auto vals = x.row_vals(r);
                    const double* gr = g.row(r);
                    for (std::size_t k = 0; k < cols.size(); ++k) {
                        double* pg = pd->grad.row(cols[k]);
                        const double v = vals[k];
                        for (int j = 0; j < g.cols(); ++j) pg[j] += v * gr[j];
                    }
                }
            });
        return out;
    }

    Tensor add(const Tensor& a, const Tensor& b) {
        check_same_shape(a.value(), b.value(), "add");
        DenseMatrix v = a.value();
        for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] += b.value().data()[i];
        Tensor out = make_out(std::move(v), a.requires_grad() || b.requires_grad());
        if (out.requires_grad())
            record([ad = a.data(), bd = b.data(), od = out.data()] {
                if (ad->requires_grad)
                    for (std::size_t i = 0; i < od->grad.size(); ++i)
                        ad->grad.data()[i] += od->grad.data()[i];
                if (bd->requires_grad)
                    for (std::size_t i = 0; i < od->grad.size(); ++i)
                        bd->grad.data()[i] += od->grad.data()[i];
            });
        return out;
    }

    Tensor scale(const Tensor& x, double c) {
        DenseMatrix v = x.value();
        for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] *= c;
        Tensor out = make_out(std::move(v), x.requires_grad());
        if (out.requires_grad())
            record([c, xd = x.data(), od = out.data()] {
                for (std::size_t i = 0; i < od->grad.size(); ++i)
                    xd->grad.data()[i] += c * od->grad.data()[i];
            });
        return out;
    }

    Tensor concat_cols(const std::vector<Tensor>& parts) {
        if (parts.empty()) throw DimensionMismatch("concat_cols: empty list");
        int rows = parts[0].rows(), total = 0;
        bool rg = false;
        for (const Tensor& p : parts) {
            if (p.rows() != rows) throw DimensionMismatch("concat_cols: row mismatch");
            total += p.cols();
            rg = rg || p.requires_grad();
        }
        DenseMatrix v(rows, total);
        int off = 0;
        for (const Tensor& p : parts) {
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < p.cols(); ++c) v(r, off + c) = p.value()(r, c);
            off += p.cols();
        }
        Tensor out = make_out(std::move(v), rg);
        if (out.requires_grad()) {
            std::vector<std::shared_ptr<TensorData>> pd;
            for (const Tensor& p : parts) pd.push_back(p.data());
            record([pd = std::move(pd), od = out.data()] {
                int off = 0;
                for (const auto& p : pd) {
                    if (p->requires_grad)
                        for (int r = 0; r < p->value.rows(); ++r)
                            for (int c = 0; c < p->value.cols(); ++c)
                                p->grad(r, c) += od->grad(r, off + c);
                    off += p->value.cols();
                }
            });
        }
        return out;
    }

    Tensor elu(const Tensor& x) {
        DenseMatrix v = x.value();
        for (std::size_t i = 0; i < v.size(); ++i) {
            double z = v.data()[i];
            if (z < 0.0) v.data()[i] = std::expm1(z);
        }
        Tensor out = make_out(std::move(v), x.requires_grad());
        if (out.requires_grad())
            record([xd = x.data(), od = out.data()] {
                for (std::size_t i = 0; i < od->grad.size(); ++i) {
                    double z = xd->value.data()[i];
                    double d = z >= 0.0 ? 1.0 : od->value.data()[i] + 1.0;  // e^z
                    xd->grad.data()[i] += d * od->grad.data()[i];
                }
            });
        return out;
    }

    Tensor leaky_relu(const Tensor& x, double slope) {
        DenseMatrix v = x.value();
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v.data()[i] < 0.0) v.data()[i] *= slope;
        Tensor out = make_out(std::move(v), x.requires_grad());
        if (out.requires_grad())
            record([slope, xd = x.data(), od = out.data()] {
                for (std::size_t i = 0; i < od->grad.size(); ++i) {
                    double d = xd->value.data()[i] >= 0.0 ? 1.0 : slope;
                    xd->grad.data()[i] += d * od->grad.data()[i];
                }
            });
        return out;
    }

    // Inverted-scaling dropout: kept entries are multiplied by 1/(1-rate).
    Tensor dropout(const Tensor& x, double rate, bool training, CounterRng& rng) {
        if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0,1)");
        if (!training || rate == 0.0) return x;
        const double keep_scale = 1.0 / (1.0 - rate);
        auto mask = std::make_shared<std::vector<double>>(x.value().size());
        DenseMatrix v = x.value();
        for (std::size_t i = 0; i < v.size(); ++i) {
            double m = rng.next_uniform() >= rate ? keep_scale : 0.0;
            (*mask)[i] = m;
            v.data()[i] *= m;
        }
        Tensor out = make_out(std::move(v), x.requires_grad());
        if (out.requires_grad())
            record([mask, xd = x.data(), od = out.data()] {
                for (std::size_t i = 0; i < od->grad.size(); ++i)
                    xd->grad.data()[i] += (*mask)[i] * od->grad.data()[i];
            });
        return out;
    }

    // Softmax over each segment of a column vector, with a per-segment
    // max-shift before exponentiation.
    Tensor segment_softmax(const Tensor& scores, const SegmentIndex& segs) {
        if (scores.cols() != 1) throw DimensionMismatch("segment_softmax: column vector required");
        if (segs.offsets.empty() || segs.offsets.back() != scores.rows())
            throw DimensionMismatch("segment_softmax: segments do not partition the scores");
        DenseMatrix v(scores.rows(), 1);
        for (int s = 0; s < segs.n_segments(); ++s) {
            int lo = segs.offsets[s], hi = segs.offsets[s + 1];
            if (lo >= hi) throw EmptySegment("segment " + std::to_string(s) + " is empty");
            double mx = scores.value()(lo, 0);
            for (int k = lo + 1; k < hi; ++k) mx = std::max(mx, scores.value()(k, 0));
            double sum = 0.0;
            for (int k = lo; k < hi; ++k) {
                v(k, 0) = std::exp(scores.value()(k, 0) - mx);
                sum += v(k, 0);
            }
            for (int k = lo; k < hi; ++k) v(k, 0) /= sum;
        }
        Tensor out = make_out(std::move(v), scores.requires_grad());
        if (out.requires_grad())
            record([offsets = segs.offsets, sd = scores.data(), od = out.data()] {
                for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
                    int lo = offsets[s], hi = offsets[s + 1];
                    double dot = 0.0;
                    for (int k = lo; k < hi; ++k) dot += od->grad(k, 0) * od->value(k, 0);
                    for (int k = lo; k < hi; ++k)
                        sd->grad(k, 0) += od->value(k, 0) * (od->grad(k, 0) - dot);
                }
            });
        return out;
    }

    Tensor gather_rows(const Tensor& x, const std::vector<int>& idx) {
        DenseMatrix v(static_cast<int>(idx.size()), x.cols());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] < 0 || idx[k] >= x.rows()) throw IndexOutOfRange("gather_rows");
            for (int j = 0; j < x.cols(); ++j) v(static_cast<int>(k), j) = x.value()(idx[k], j);
        }
        Tensor out = make_out(std::move(v), x.requires_grad());
        if (out.requires_grad())
            record([idx, xd = x.data(), od = out.data()] {
                for (std::size_t k = 0; k < idx.size(); ++k)
                    for (int j = 0; j < od->value.cols(); ++j)
                        xd->grad(idx[k], j) += od->grad(static_cast<int>(k), j);
            });
        return out;
    }

    // Scatter-add of a column vector: out[idx[k]] += vals[k].
    Tensor index_sum(const Tensor& vals, const std::vector<int>& idx, int n_out) {
        if (vals.cols() != 1 || static_cast<int>(idx.size()) != vals.rows())
            throw DimensionMismatch("index_sum");
        DenseMatrix v(n_out, 1);
        for (std::size_t k = 0; k < idx.size(); ++k) v(idx[k], 0) += vals.value()(static_cast<int>(k), 0);
        Tensor out = make_out(std::move(v), vals.requires_grad());
        if (out.requires_grad())
            record([idx, vd = vals.data(), od = out.data()] {
                for (std::size_t k = 0; k < idx.size(); ++k)
                    vd->grad(static_cast<int>(k), 0) += od->grad(idx[k], 0);
            });
        return out;
    }

    // out[rows[k]] += vals[k] * x[cols[k]] — a sparse operator whose values
    // are themselves a tensor; gradients flow to both vals and x.
    Tensor pattern_spmm(const SparsePattern& pat, const Tensor& vals, const Tensor& x) {
        if (vals.cols() != 1 || vals.rows() != static_cast<int>(pat.nnz()))
            throw DimensionMismatch("pattern_spmm: vals must be nnz x 1");
        if (x.rows() != pat.n_cols) throw DimensionMismatch("pattern_spmm: input rows");
        DenseMatrix v(pat.n_rows, x.cols());
        for (std::size_t k = 0; k < pat.nnz(); ++k) {
            const double h = vals.value()(static_cast<int>(k), 0);
            const double* xr = x.value().row(pat.cols[k]);
            double* o = v.row(pat.rows[k]);
            for (int j = 0; j < x.cols(); ++j) o[j] += h * xr[j];
        }
        Tensor out = make_out(std::move(v), vals.requires_grad() || x.requires_grad());
        if (out.requires_grad())
            record([rows = pat.rows, cols = pat.cols, vd = vals.data(), xd = x.data(),
                    od = out.data()] {
                const DenseMatrix& g = od->grad;
                for (std::size_t k = 0; k < rows.size(); ++k) {
                    const double* gr = g.row(rows[k]);
                    if (vd->requires_grad) {
                        const double* xr = xd->value.row(cols[k]);
                        double acc = 0.0;
                        for (int j = 0; j < g.cols(); ++j) acc += gr[j] * xr[j];
                        vd->grad(static_cast<int>(k), 0) += acc;
                    }
                    if (xd->requires_grad) {
                        const double h = vd->value(static_cast<int>(k), 0);
                        double* xg = xd->grad.row(cols[k]);
                        for (int j = 0; j < g.cols(); ++j) xg[j] += h * gr[j];
                    }
                }
            });
        return out;
    }

    // out[r] = x[r] / d[r]; rows with d[r] == 0 produce zero rows (the
    // dropout-emptied-row convention) and propagate no gradient.
    Tensor row_scale_inv(const Tensor& x, const Tensor& d) {
        if (d.cols() != 1 || d.rows() != x.rows()) throw DimensionMismatch("row_scale_inv");
        DenseMatrix v = x.value();
        for (int r = 0; r < x.rows(); ++r) {
            const double dr = d.value()(r, 0);
            const double s = dr != 0.0 ? 1.0 / dr : 0.0;
            for (int j = 0; j < x.cols(); ++j) v(r, j) *= s;
        }
        Tensor out = make_out(std::move(v), x.requires_grad() || d.requires_grad());
        if (out.requires_grad())
            record([xd = x.data(), dd = d.data(), od = out.data()] {
                for (int r = 0; r < od->value.rows(); ++r) {
                    const double dr = dd->value(r, 0);
                    if (dr == 0.0) continue;
                    const double s = 1.0 / dr;
                    double dot = 0.0;
                    for (int j = 0; j < od->value.cols(); ++j) {
                        const double g = od->grad(r, j);
                        if (xd->requires_grad) xd->grad(r, j) += s * g;
                        dot += g * od->value(r, j);
                    }
                    if (dd->requires_grad) dd->grad(r, 0) -= dot * s;
                }
            });
        return out;
    }

    // Mean negative log-likelihood over the masked rows; softmax lives here.
    Tensor cross_entropy_masked(const Tensor& logits, const std::vector<int>& labels,
                                const std::vector<int>& mask) {
        if (static_cast<int>(labels.size()) != logits.rows())
            throw DimensionMismatch("cross_entropy_masked: labels length");
        if (mask.empty()) throw EmptySegment("cross_entropy_masked: empty mask");
        const int c = logits.cols();
        auto probs = std::make_shared<DenseMatrix>(static_cast<int>(mask.size()), c);
        double loss = 0.0;
        for (std::size_t m = 0; m < mask.size(); ++m) {
            int i = mask[m];
            if (i < 0 || i >= logits.rows()) throw IndexOutOfRange("cross_entropy_masked mask");
            if (labels[i] < 0 || labels[i] >= c) throw IndexOutOfRange("cross_entropy_masked label");
            double mx = logits.value()(i, 0);
            for (int j = 1; j < c; ++j) mx = std::max(mx, logits.value()(i, j));
            double sum = 0.0;
            for (int j = 0; j < c; ++j) {
                (*probs)(static_cast<int>(m), j) = std::exp(logits.value()(i, j) - mx);
                sum += (*probs)(static_cast<int>(m), j);
            }
            for (int j = 0; j < c; ++j) (*probs)(static_cast<int>(m), j) /= sum;
            loss -= std::log((*probs)(static_cast<int>(m), labels[i]));
        }
        loss /= static_cast<double>(mask.size());
        DenseMatrix v(1, 1);
        v(0, 0) = loss;
        Tensor out = make_out(std::move(v), logits.requires_grad());
        if (out.requires_grad())
            record([probs, labels, mask, ld = logits.data(), od = out.data()] {
                const double g = od->grad(0, 0) / static_cast<double>(mask.size());
                for (std::size_t m = 0; m < mask.size(); ++m) {
                    int i = mask[m];
                    for (int j = 0; j < ld->value.cols(); ++j) {
                        double p = (*probs)(static_cast<int>(m), j);
                        ld->grad(i, j) += g * (p - (j == labels[i] ? 1.0 : 0.0));
                    }
                }
            });
        return out;
    }

    Tensor sum(const Tensor& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.value().size(); ++i) s += x.value().data()[i];
        DenseMatrix v(1, 1);
        v(0, 0) = s;
        Tensor out = make_out(std::move(v), x.requires_grad());
        if (out.requires_grad())
            record([xd = x.data(), od = out.data()] {
                const double g = od->grad(0, 0);
                for (std::size_t i = 0; i < xd->grad.size(); ++i) xd->grad.data()[i] += g;
            });
        return out;
    }

    void backward(const Tensor& loss) {
        if (loss.rows() != 1 || loss.cols() != 1)
            throw NonScalarLoss("backward requires a 1x1 loss tensor");
        if (consumed_) throw Error("tape already consumed; reset() before backward again");
        if (!loss.requires_grad())
            throw Error("loss does not require gradients");
        consumed_ = true;
        loss.data()->grad(0, 0) += 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    }

    void reset() {
        nodes_.clear();
        consumed_ = false;
    }

    std::size_t node_count() const { return nodes_.size(); }

private:
    Tensor make_out(DenseMatrix v, bool requires_grad) {
        return Tensor::leaf(std::move(v), requires_grad);
    }

    void record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }

    std::vector<std::function<void()>> nodes_;
    bool consumed_ = false;
};

// Uniform samples in +-sqrt(6/(rows+cols)); requires_grad set.
inline Tensor glorot_init(int rows, int cols, CounterRng& rng) {
    if (rows <= 0 || cols <= 0) throw DimensionMismatch("glorot_init: positive dims required");
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    DenseMatrix v(rows, cols);
    for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] = rng.uniform(-bound, bound);
    return Tensor::leaf(std::move(v), true);
}

inline double accuracy(const DenseMatrix& logits, const std::vector<int>& labels,
                       const std::vector<int>& idx) {
    if (idx.empty()) return 0.0;
    int hits = 0;
    for (int i : idx) {
        int best = 0;
        for (int j = 1; j < logits.cols(); ++j)
            if (logits(i, j) > logits(i, best)) best = j;
        if (best == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(idx.size());
}

}  // namespace hyperconv
