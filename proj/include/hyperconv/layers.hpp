#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyperconv/adam.hpp"
#include "hyperconv/errors.hpp"
#include "hyperconv/hypergraph.hpp"
#include "hyperconv/tensor.hpp"
#include "hyperconv/transition.hpp"

namespace hyperconv {

enum class ModelVariant {
    gcn_star,
    hyper_conv,
    gat_star,
    hyper_atten,
    gcn_plus_hyperconv,
    gat_plus_hyperatten,
};

inline const char* to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::gcn_star: return "gcn_star";
        case ModelVariant::hyper_conv: return "hyper_conv";
        case ModelVariant::gat_star: return "gat_star";
        case ModelVariant::hyper_atten: return "hyper_atten";
        case ModelVariant::gcn_plus_hyperconv: return "gcn_plus_hyperconv";
        case ModelVariant::gat_plus_hyperatten: return "gat_plus_hyperatten";
    }
    return "?";
}

inline ModelVariant variant_from_string(const std::string& s) {
    for (ModelVariant v :
         {ModelVariant::gcn_star, ModelVariant::hyper_conv, ModelVariant::gat_star,
          ModelVariant::hyper_atten, ModelVariant::gcn_plus_hyperconv,
          ModelVariant::gat_plus_hyperatten})
        if (s == to_string(v)) return v;
    throw ConfigError("unknown variant '" + s +
                      "'; valid: gcn_star, hyper_conv, gat_star, hyper_atten, "
                      "gcn_plus_hyperconv, gat_plus_hyperatten");
}

inline bool is_attention_variant(ModelVariant v) {
    return v == ModelVariant::gat_star || v == ModelVariant::hyper_atten ||
           v == ModelVariant::gat_plus_hyperatten;
}

enum class Normalization { symmetric, asymmetric };

// Candidate sets for attention: the structural nonzeros of an incidence (or
// self-looped adjacency) matrix, in CSR order so the per-vertex softmax
// segments are the CSR row offsets.
struct AttentionStructure {
    SparsePattern pattern;    // entry k: (vertex rows[k], hyperedge cols[k])
    SparsePattern pattern_t;  // same entries with roles swapped
    SegmentIndex row_segments;
};

inline AttentionStructure attention_structure(const SparseMatrix& structural) {
    AttentionStructure st;
    st.pattern = pattern_of(structural);
    st.pattern_t = st.pattern.transposed();
    st.row_segments = row_segments_of(structural);
    return st;
}

// Attention scores on the structural nonzeros: per entry (i, e),
// leaky_relu(a^T [x_i P || x_e P]) followed by a per-vertex softmax. The
// hyperedge representative x_e is its centroid vertex's row of xp.
inline Tensor attention_incidence_values(Tape& tape, const AttentionStructure& st,
                                         const Tensor& xp, const Tensor& a,
                                         double leaky_slope) {
    if (a.cols() != 1 || a.rows() != 2 * xp.cols())
        throw DimensionMismatch("attention weight vector must be 2*F x 1");
    Tensor xi = tape.gather_rows(xp, st.pattern.rows);
    Tensor xe = tape.gather_rows(xp, st.pattern.cols);
    Tensor cat = tape.concat_cols({xi, xe});
    Tensor scores = tape.leaky_relu(tape.matmul(cat, a), leaky_slope);
    return tape.segment_softmax(scores, st.row_segments);
}

// Asymmetric propagation T(h) * xp with T = D^-1 H B^-1 H^T rebuilt from the
// real-valued attention incidence h; gradients flow through h, B and D.
// Rows whose attention values were all dropped produce zero output rows.
inline Tensor attention_propagate(Tape& tape, const AttentionStructure& st, const Tensor& h,
                                  const Tensor& xp) {
    Tensor d = tape.index_sum(h, st.pattern.rows, st.pattern.n_rows);
    Tensor b = tape.index_sum(h, st.pattern.cols, st.pattern.n_cols);
    Tensor u = tape.pattern_spmm(st.pattern_t, h, xp);   // H^T * xp
    Tensor v = tape.row_scale_inv(u, b);                 // B^-1 ...
    Tensor s = tape.pattern_spmm(st.pattern, h, v);      // H * ...
    return tape.row_scale_inv(s, d);                     // D^-1 ...
}

// sigma(T * x * P) with a fixed structural transition.
inline Tensor hyperconv_forward(Tape& tape, const TransitionOperator& t, const Tensor& x,
                                const Tensor& p, bool apply_elu = true) {
    Tensor out = tape.sparse_apply(t.matrix, tape.matmul(x, p));
    return apply_elu ? tape.elu(out) : out;
}

// Identity skip connection; widths must match.
inline Tensor skip_wrap(Tape& tape, const Tensor& layer_out, const Tensor& x) {
    if (layer_out.cols() != x.cols())
        throw DimensionMismatch("skip connection requires matching widths, got " +
                                std::to_string(x.cols()) + " -> " +
                                std::to_string(layer_out.cols()));
    return tape.add(layer_out, x);
}

enum class Aggregate { concat, average };

inline Tensor multi_head(Tape& tape, const std::vector<Tensor>& head_outputs, Aggregate agg) {
    if (head_outputs.empty()) throw DimensionMismatch("multi_head: no heads");
    if (head_outputs.size() == 1) return head_outputs[0];
    if (agg == Aggregate::concat) return tape.concat_cols(head_outputs);
    Tensor acc = head_outputs[0];
    for (std::size_t k = 1; k < head_outputs.size(); ++k) acc = tape.add(acc, head_outputs[k]);
    return tape.scale(acc, 1.0 / static_cast<double>(head_outputs.size()));
}

struct ModelConfig {
    ModelVariant variant = ModelVariant::hyper_conv;
    int heads1 = 8;       // branches in the hidden layers
    int dim_per_head = 8;
    int depth = 2;
    bool skip = false;
    double dropout = 0.6;
    double leaky_slope = 0.2;
    std::optional<Normalization> normalization;  // default: symmetric for conv variants

    void validate() const {
        if (heads1 < 1 || dim_per_head < 1 || depth < 2) throw ConfigError("invalid model shape");
        if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
    }
};

struct GraphInputs {
    std::optional<Hypergraph> hypergraph;
    std::optional<PairwiseGraph> pairwise;
};

// Value-dropout over the stored entries of a sparse matrix (pattern kept).
inline SparseMatrix dropout_sparse(SparseMatrix m, double rate, CounterRng& rng) {
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& v : m.values()) v = rng.next_uniform() >= rate ? v * keep_scale : 0.0;
    return m;
}

// The two-layer (configurable depth) classifier assembling the layer zoo.
class Model {
public:
    Model(const ModelConfig& cfg, int n, int f_in, int n_classes, const GraphInputs& graphs,
          std::uint64_t init_key)
        : cfg_(cfg), n_(n), f_in_(f_in), n_classes_(n_classes) {
        cfg_.validate();
        build_structure(graphs);
        init_params(init_key);
    }

    const ModelConfig& config() const { return cfg_; }
    std::vector<Tensor>& parameters() { return params_; }
    const std::vector<bool>& attention_params() const { return is_attention_param_; }

    long parameter_count() const {
        long c = 0;
        for (const Tensor& p : params_)
            c += static_cast<long>(p.rows()) * p.cols();
        return c;
    }

    void zero_grad() {
        for (Tensor& p : params_) p.zero_grad();
    }

    std::vector<DenseMatrix> snapshot() const {
        std::vector<DenseMatrix> s;
        for (const Tensor& p : params_) s.push_back(p.value());
        return s;
    }

    void restore(const std::vector<DenseMatrix>& s) {
        if (s.size() != params_.size()) throw DimensionMismatch("restore: parameter count");
        for (std::size_t i = 0; i < s.size(); ++i) params_[i].value() = s[i];
    }

    // Logits for all N vertices. Dropout streams are split per
    // (rng_key, epoch, layer) so results do not depend on scheduling.
    Tensor forward(Tape& tape, const SparseMatrix& features, bool training, std::uint64_t rng_key,
                   std::uint64_t epoch) {
        if (features.n_rows() != n_ || features.n_cols() != f_in_)
            throw DimensionMismatch("forward: features shape");
        dropped_features_.reset();
        Tensor x;  // dense input of the current layer; invalid for layer 0
        for (int l = 0; l < cfg_.depth; ++l) {
            CounterRng rng = CounterRng::stream({rng_key, static_cast<std::uint64_t>(epoch),
                                                 static_cast<std::uint64_t>(l)});
            const bool last = l == cfg_.depth - 1;
            const int heads = last ? 1 : cfg_.heads1;
            const int f_out = last ? n_classes_ : cfg_.dim_per_head;
            const bool sparse_in = l == 0;

            const SparseMatrix* xs = nullptr;
            if (sparse_in) {
                if (training && cfg_.dropout > 0.0)
                    dropped_features_ =
                        std::make_shared<SparseMatrix>(dropout_sparse(features, cfg_.dropout, rng));
                else
                    dropped_features_ = std::make_shared<SparseMatrix>(features);
                xs = dropped_features_.get();
            } else {
                x = tape.dropout(x, cfg_.dropout, training, rng);
            }

            std::vector<Tensor> head_outs;
            for (int k = 0; k < heads; ++k) {
                const HeadParams& hp = layers_[l][k];
                Tensor xp = sparse_in ? tape.sparse_input_matmul(*xs, hp.p)
                                      : tape.matmul(x, hp.p);
                Tensor out = propagate(tape, xp, hp, training, rng);
                if (cfg_.skip) {
                    if (skip_projs_.size() > static_cast<std::size_t>(l) &&
                        skip_projs_[l].valid()) {
                        Tensor proj = sparse_in
                                          ? tape.sparse_input_matmul(*xs, skip_projs_[l])
                                          : tape.matmul(x, skip_projs_[l]);
                        out = tape.add(out, proj);
                    } else if (!sparse_in && x.cols() == f_out) {
                        out = skip_wrap(tape, out, x);
                    }
                }
                if (!last) out = tape.elu(out);
                head_outs.push_back(out);
            }
            x = multi_head(tape, head_outs, Aggregate::concat);
        }
        return x;
    }

private:
    struct HeadParams {
        Tensor p;
        Tensor a_hyper;  // attention vector for the hypergraph pattern
        Tensor a_pair;   // attention vector for the pairwise pattern
    };

    Tensor propagate(Tape& tape, const Tensor& xp, const HeadParams& hp, bool training,
                     CounterRng& rng) {
        switch (cfg_.variant) {
            case ModelVariant::gcn_star:
            case ModelVariant::hyper_conv:
            case ModelVariant::gcn_plus_hyperconv:
                return tape.sparse_apply(conv_->matrix, xp);
            case ModelVariant::hyper_atten:
                return attend(tape, *hyper_attn_, xp, hp.a_hyper, training, rng);
            case ModelVariant::gat_star:
                return attend(tape, *pair_attn_, xp, hp.a_pair, training, rng);
            case ModelVariant::gat_plus_hyperatten: {
                Tensor a = attend(tape, *pair_attn_, xp, hp.a_pair, training, rng);
                Tensor b = attend(tape, *hyper_attn_, xp, hp.a_hyper, training, rng);
                return tape.scale(tape.add(a, b), 0.5);
            }
        }
        throw ConfigError("unhandled variant");
    }

    Tensor attend(Tape& tape, const AttentionStructure& st, const Tensor& xp, const Tensor& a,
                  bool training, CounterRng& rng) {
        Tensor h = attention_incidence_values(tape, st, xp, a, cfg_.leaky_slope);
        h = tape.dropout(h, cfg_.dropout, training, rng);
        return attention_propagate(tape, st, h, xp);
    }

    void build_structure(const GraphInputs& graphs) {
        auto need_hyper = [&]() -> const Hypergraph& {
            if (!graphs.hypergraph) throw ConfigError("variant requires a hypergraph");
            return *graphs.hypergraph;
        };
        auto need_pair = [&]() -> const PairwiseGraph& {
            if (!graphs.pairwise) throw ConfigError("variant requires a pairwise graph");
            return *graphs.pairwise;
        };
        auto hyper_conv_op = [&]() {
            const Hypergraph& hg = need_hyper();
            DegreePair deg = compute_degrees(hg);
            if (cfg_.normalization.value_or(Normalization::symmetric) == Normalization::symmetric)
                return build_symmetric_transition(hg, deg);
            return build_asymmetric_transition(hg, deg);
        };
        switch (cfg_.variant) {
            case ModelVariant::hyper_conv:
                conv_ = hyper_conv_op();
                break;
            case ModelVariant::gcn_star:
                conv_ = build_gcn_transition(with_self_loops_on_isolated(need_pair()));
                break;
            case ModelVariant::gcn_plus_hyperconv:
                conv_ = average_transitions(
                    build_gcn_transition(with_self_loops_on_isolated(need_pair())),
                    hyper_conv_op());
                break;
            case ModelVariant::hyper_atten:
                hyper_attn_ = make_hyper_attention(need_hyper());
                break;
            case ModelVariant::gat_star:
                pair_attn_ = make_pair_attention(need_pair());
                break;
            case ModelVariant::gat_plus_hyperatten:
                hyper_attn_ = make_hyper_attention(need_hyper());
                pair_attn_ = make_pair_attention(need_pair());
                break;
        }
    }

    AttentionStructure make_hyper_attention(const Hypergraph& hg) const {
        if (hg.n_hyperedges() != hg.n_vertices())
            throw ConfigError("hypergraph attention needs hyperedges in the vertex domain "
                              "(centroid construction, M == N)");
        return attention_structure(hg.incidence());
    }

    AttentionStructure make_pair_attention(const PairwiseGraph& g) const {
        // self-attention includes the vertex itself
        SparseMatrix with_self = add(g.adjacency, SparseMatrix::identity(g.n_vertices));
        for (double& v : with_self.values()) v = 1.0;
        return attention_structure(with_self);
    }

    void init_params(std::uint64_t init_key) {
        layers_.resize(cfg_.depth);
        skip_projs_.resize(cfg_.depth);
        int f_in = f_in_;
        for (int l = 0; l < cfg_.depth; ++l) {
            const bool last = l == cfg_.depth - 1;
            const int heads = last ? 1 : cfg_.heads1;
            const int f_out = last ? n_classes_ : cfg_.dim_per_head;
            for (int k = 0; k < heads; ++k) {
                HeadParams hp;
                CounterRng rng = CounterRng::stream({init_key, static_cast<std::uint64_t>(l),
                                                     static_cast<std::uint64_t>(k), 0});
                hp.p = glorot_init(f_in, f_out, rng);
                params_.push_back(hp.p);
                is_attention_param_.push_back(false);
                if (hyper_attn_) {
                    CounterRng ar = CounterRng::stream({init_key, static_cast<std::uint64_t>(l),
                                                        static_cast<std::uint64_t>(k), 1});
                    hp.a_hyper = glorot_init(2 * f_out, 1, ar);
                    params_.push_back(hp.a_hyper);
                    is_attention_param_.push_back(true);
                }
                if (pair_attn_) {
                    CounterRng ar = CounterRng::stream({init_key, static_cast<std::uint64_t>(l),
                                                        static_cast<std::uint64_t>(k), 2});
                    hp.a_pair = glorot_init(2 * f_out, 1, ar);
                    params_.push_back(hp.a_pair);
                    is_attention_param_.push_back(true);
                }
                layers_[l].push_back(hp);
            }
            // learned projection when an identity skip is impossible
            if (cfg_.skip && f_in != f_out) {
                CounterRng rng = CounterRng::stream({init_key, static_cast<std::uint64_t>(l), 999, 3});
                skip_projs_[l] = glorot_init(f_in, f_out, rng);
                params_.push_back(skip_projs_[l]);
                is_attention_param_.push_back(false);
            }
            f_in = last ? n_classes_ : cfg_.heads1 * cfg_.dim_per_head;
        }
    }

    ModelConfig cfg_;
    int n_, f_in_, n_classes_;
    std::optional<TransitionOperator> conv_;
    std::optional<AttentionStructure> hyper_attn_, pair_attn_;
    std::vector<std::vector<HeadParams>> layers_;
    std::vector<Tensor> skip_projs_;
    std::vector<Tensor> params_;
    std::vector<bool> is_attention_param_;
    std::shared_ptr<SparseMatrix> dropped_features_;  // kept alive for backward
};

inline Model build_model(const ModelConfig& cfg, int n, int f_in, int n_classes,
                         const GraphInputs& graphs, std::uint64_t init_key) {
    return Model(cfg, n, f_in, n_classes, graphs, init_key);
}

}  // namespace hyperconv
