#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hyperconv/adam.hpp"
#include "hyperconv/datasets.hpp"
#include "hyperconv/errors.hpp"
#include "hyperconv/layers.hpp"
#include "hyperconv/version.hpp"

namespace hyperconv {

struct TrainConfig {
    ModelVariant variant = ModelVariant::hyper_conv;
    double lr = 0.005;            // 0.01 on Pubmed
    double weight_decay = 3e-4;   // 1e-3 on Pubmed
    double dropout = 0.6;
    int patience = 100;
    int max_epochs = 1000;
    int trials = 100;
    std::uint64_t seed = 1;
    int hidden_per_head = 8;
    int heads = 8;
    int depth = 2;
    bool skip = false;
    std::optional<Normalization> normalization;
    bool decay_attention = true;  // include attention vectors in weight decay
    bool row_normalize = true;

    void validate() const {
        if (lr <= 0.0 || weight_decay < 0.0) throw ConfigError("lr/weight_decay out of range");
        if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
        if (patience <= 0 || max_epochs <= 0 || patience > max_epochs)
            throw ConfigError("need 0 < patience <= max_epochs");
        if (trials < 1 || hidden_per_head < 1 || heads < 1 || depth < 2)
            throw ConfigError("trials/hidden/heads/depth out of range");
    }

    ModelConfig model_config() const {
        ModelConfig m;
        m.variant = variant;
        m.heads1 = heads;
        m.dim_per_head = hidden_per_head;
        m.depth = depth;
        m.skip = skip;
        m.dropout = dropout;
        m.normalization = normalization;
        return m;
    }

    nlohmann::json to_json() const {
        return {{"variant", to_string(variant)},
                {"lr", lr},
                {"weight_decay", weight_decay},
                {"dropout", dropout},
                {"patience", patience},
                {"max_epochs", max_epochs},
                {"trials", trials},
                {"seed", seed},
                {"hidden_per_head", hidden_per_head},
                {"heads", heads},
                {"depth", depth},
                {"skip", skip},
                {"normalization", normalization
                                      ? (*normalization == Normalization::symmetric ? "symmetric"
                                                                                    : "asymmetric")
                                      : "default"},
                {"decay_attention", decay_attention},
                {"row_normalize", row_normalize}};
    }
};

// Structural objects shared by every trial of a run.
struct PreparedData {
    SparseMatrix features;
    std::vector<int> labels;
    int n_classes = 0;
    Split split;
    GraphInputs graphs;
    std::string name;
};

inline PreparedData prepare(const DatasetBundle& bundle, const TrainConfig& cfg,
                            std::optional<Split> split_override = std::nullopt) {
    PreparedData p;
    p.features = bundle.features;
    p.labels = bundle.labels;
    p.n_classes = bundle.n_classes;
    p.name = bundle.name;
    if (split_override)
        p.split = *split_override;
    else if (bundle.split)
        p.split = *bundle.split;
    else
        p.split = make_split(bundle, SplitMode::deterministic);
    if (bundle.kind == StructureKind::citation_links) {
        p.graphs.hypergraph = from_citation_network(bundle.links, bundle.n_vertices());
        p.graphs.pairwise = pairwise_from_links(bundle.links, bundle.n_vertices());
    } else {
        p.graphs.hypergraph = from_attribute_occurrence(bundle.occurrence);
        p.graphs.pairwise = clique_graph_from_occurrence(bundle.occurrence);
    }
    (void)cfg;
    return p;
}

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    int best_epoch = 0;
    int epochs_run = 0;
    double best_val_loss = 0.0;
    double test_accuracy = 0.0;
    bool diverged = false;
};

struct RunReport {
    TrainConfig config;
    std::string dataset;
    std::vector<TrialResult> trials;
    double mean = 0.0;
    double stddev = 0.0;  // unbiased (n-1); 0 by convention for a single trial
    int completed = 0;
    int diverged = 0;
    double wall_seconds = 0.0;
    int threads = 1;
    long parameter_count = 0;

    nlohmann::json to_json(bool include_timing = true) const {
        nlohmann::json jt = nlohmann::json::array();
        for (const TrialResult& t : trials)
            jt.push_back({{"trial", t.trial},
                          {"seed", t.seed},
                          {"best_epoch", t.best_epoch},
                          {"epochs_run", t.epochs_run},
                          {"best_val_loss", t.best_val_loss},
                          {"test_accuracy", t.test_accuracy},
                          {"diverged", t.diverged}});
        nlohmann::json j = {{"version", kVersion},
                            {"dataset", dataset},
                            {"config", config.to_json()},
                            {"trials", jt},
                            {"mean_test_accuracy", mean},
                            {"stddev_test_accuracy", stddev},
                            {"completed_trials", completed},
                            {"diverged_trials", diverged},
                            {"parameter_count", parameter_count}};
        if (include_timing) j["timing"] = {{"wall_seconds", wall_seconds}, {"threads", threads}};
        return j;
    }

    std::string to_text() const {
        std::ostringstream os;
        os << kVersion << "\n";
        os << "dataset: " << dataset << "  variant: " << to_string(config.variant) << "\n";
        os << "trials: " << completed << " completed, " << diverged << " diverged\n";
        os << std::fixed << std::setprecision(2);
        os << "accuracy: " << 100.0 * mean << " +- " << 100.0 * stddev << " (%)\n";
        return os.str();
    }
};

// One full-batch training run: cross-entropy on the train nodes, Adam with
// L2-as-gradient, early stop on the validation loss, parameters restored
// from the best-validation epoch before the single test evaluation.
inline TrialResult train_once(const PreparedData& data, const TrainConfig& cfg,
                              std::uint64_t trial_seed, int trial_index = 0,
                              Model* model_out = nullptr) {
    cfg.validate();
    const std::uint64_t init_key = CounterRng::derive_key({trial_seed, 0xC0FFEEull});
    const std::uint64_t drop_key = CounterRng::derive_key({trial_seed, 0xD20Full});
    Model model(cfg.model_config(), data.features.n_rows(), data.features.n_cols(),
                data.n_classes, data.graphs, init_key);
    std::vector<double> decay(model.parameters().size(), cfg.weight_decay);
    if (!cfg.decay_attention)
        for (std::size_t i = 0; i < decay.size(); ++i)
            if (model.attention_params()[i]) decay[i] = 0.0;
    AdamState adam(model.parameters(), AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});

    TrialResult res;
    res.trial = trial_index;
    res.seed = trial_seed;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    std::vector<DenseMatrix> best_params = model.snapshot();

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Tape tape;
        model.zero_grad();
        Tensor logits = model.forward(tape, data.features, true, drop_key, epoch);
        Tensor loss = tape.cross_entropy_masked(logits, data.labels, data.split.train);
        if (!std::isfinite(loss.value()(0, 0))) {
            res.diverged = true;
            res.epochs_run = epoch;
            return res;
        }
        tape.backward(loss);
        adam.step(model.parameters(), decay);

        Tape eval_tape;
        Tensor eval_logits = model.forward(eval_tape, data.features, false, drop_key, epoch);
        Tensor val_loss =
            eval_tape.cross_entropy_masked(eval_logits, data.labels, data.split.val);
        const double vl = val_loss.value()(0, 0);
        if (!std::isfinite(vl)) {
            res.diverged = true;
            res.epochs_run = epoch;
            return res;
        }
        res.epochs_run = epoch;
        if (vl < best_val) {  // strict improvement; ties keep the earliest epoch
            best_val = vl;
            best_epoch = epoch;
            best_params = model.snapshot();
        }
        if (epoch - best_epoch >= cfg.patience) break;
    }

    model.restore(best_params);
    res.best_epoch = best_epoch;
    res.best_val_loss = best_val;
    Tape test_tape;
    Tensor logits = model.forward(test_tape, data.features, false, drop_key, 0);
    res.test_accuracy = accuracy(logits.value(), data.labels, data.split.test);
    if (model_out) *model_out = std::move(model);
    return res;
}

// Trials are embarrassingly parallel; per-trial seeds depend only on
// (config.seed, trial index), so the report is identical for any thread count.
inline RunReport run_trials(const PreparedData& data, const TrainConfig& cfg, int n_threads = 1) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.config = cfg;
    report.dataset = data.name;
    report.threads = n_threads < 1 ? 1 : n_threads;
    report.trials.resize(cfg.trials);
    {
        Model probe(cfg.model_config(), data.features.n_rows(), data.features.n_cols(),
                    data.n_classes, data.graphs, 0);
        report.parameter_count = probe.parameter_count();
    }

    std::atomic<int> next{0};
    std::vector<std::string> errors(cfg.trials);
    auto worker = [&] {
        for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1)) {
            const std::uint64_t ts =
                CounterRng::derive_key({cfg.seed, static_cast<std::uint64_t>(t)});
            try {
                report.trials[t] = train_once(data, cfg, ts, t);
            } catch (const std::exception& e) {
                report.trials[t].trial = t;
                report.trials[t].seed = ts;
                report.trials[t].diverged = true;
                errors[t] = e.what();
            }
        }
    };
    if (report.threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < report.threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    double sum = 0.0;
    for (const TrialResult& t : report.trials) {
        if (t.diverged) {
            ++report.diverged;
            continue;
        }
        ++report.completed;
        sum += t.test_accuracy;
    }
    if (report.completed == 0) throw AllTrialsDiverged("all " + std::to_string(cfg.trials) +
                                                       " trials diverged");
    report.mean = sum / report.completed;
    if (report.completed > 1) {
        double ss = 0.0;
        for (const TrialResult& t : report.trials)
            if (!t.diverged) ss += (t.test_accuracy - report.mean) * (t.test_accuracy - report.mean);
        report.stddev = std::sqrt(ss / (report.completed - 1));
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

struct SweepRow {
    int width = 0;
    double mean = 0.0, stddev = 0.0;
};

// One run per width with heads forced to 1 (the hidden-width comparison).
inline std::vector<SweepRow> width_sweep(const PreparedData& data, TrainConfig cfg,
                                         const std::vector<int>& widths, int n_threads = 1) {
    cfg.heads = 1;
    std::vector<SweepRow> rows;
    for (int w : widths) {
        if (w < 1) throw ConfigError("width must be positive");
        cfg.hidden_per_head = w;
        RunReport r = run_trials(data, cfg, n_threads);
        rows.push_back({w, r.mean, r.stddev});
    }
    return rows;
}

}  // namespace hyperconv
