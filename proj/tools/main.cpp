#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "hyperconv/bench.hpp"
#include "hyperconv/hyperconv.hpp"

namespace fs = std::filesystem;
using namespace hyperconv;

namespace {

// All report files go through a temp file + rename so a failure mid-write
// never leaves a truncated artifact behind.
void write_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

// Relative manifest paths fall back to $HYPERCONV_DATA_ROOT when the file is
// not found next to the working directory.
std::string resolve_manifest(const std::string& path) {
    if (fs::exists(path)) return path;
    if (const char* root = std::getenv("HYPERCONV_DATA_ROOT")) {
        fs::path candidate = fs::path(root) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    throw Error("cannot open manifest " + path);
}

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct TrainFlags {
    std::string manifest;
    std::string variant = "hyper_conv";
    std::string normalization = "default";
    TrainConfig cfg;
    int threads = default_threads();
    std::string out;       // JSON report path
    std::string text_out;  // text table path
    bool no_decay_attention = false;
    bool timing = false;   // timing block makes reports non-reproducible; opt-in
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool need_variant = true) {
    cmd->add_option("--manifest", f.manifest, "dataset manifest (JSON)")->required();
    if (need_variant)
        cmd->add_option("--variant", f.variant,
                        "gcn_star | hyper_conv | gat_star | hyper_atten | "
                        "gcn_plus_hyperconv | gat_plus_hyperatten");
    cmd->add_option("--lr", f.cfg.lr, "learning rate");
    cmd->add_option("--weight-decay", f.cfg.weight_decay, "L2 coefficient");
    cmd->add_option("--dropout", f.cfg.dropout, "dropout rate");
    cmd->add_option("--patience", f.cfg.patience, "early-stopping patience");
    cmd->add_option("--max-epochs", f.cfg.max_epochs, "epoch cap");
    cmd->add_option("--trials", f.cfg.trials, "independent trials");
    cmd->add_option("--seed", f.cfg.seed, "master seed");
    cmd->add_option("--hidden", f.cfg.hidden_per_head, "hidden units per head");
    cmd->add_option("--heads", f.cfg.heads, "attention/conv heads in layer 1");
    cmd->add_option("--depth", f.cfg.depth, "number of layers");
    cmd->add_flag("--skip", f.cfg.skip, "add skip connections");
    cmd->add_option("--normalization", f.normalization, "symmetric | asymmetric | default");
    cmd->add_flag("--no-decay-attention", f.no_decay_attention,
                  "exclude attention vectors from weight decay");
    cmd->add_option("--threads", f.threads, "worker threads (default: hardware)");
    cmd->add_option("--out", f.out, "JSON report path (default: stdout only)");
    cmd->add_option("--text-out", f.text_out, "text report path");
    cmd->add_flag("--timing", f.timing, "include wall-clock timing in the JSON report");
}

TrainConfig resolve_config(TrainFlags& f) {
    f.cfg.variant = variant_from_string(f.variant);
    if (f.normalization == "symmetric")
        f.cfg.normalization = Normalization::symmetric;
    else if (f.normalization == "asymmetric")
        f.cfg.normalization = Normalization::asymmetric;
    else if (f.normalization != "default")
        throw ConfigError("normalization must be symmetric, asymmetric or default");
    f.cfg.decay_attention = !f.no_decay_attention;
    f.cfg.validate();
    if (f.threads < 1) throw ConfigError("--threads must be positive");
    return f.cfg;
}

int cmd_train(TrainFlags& f) {
    TrainConfig cfg = resolve_config(f);
    DatasetBundle bundle = load_bundle(resolve_manifest(f.manifest));
    PreparedData data = prepare(bundle, cfg);
    RunReport report = run_trials(data, cfg, f.threads);
    const std::string json = report.to_json(f.timing).dump(2) + "\n";
    const std::string text = report.to_text();
    if (!f.out.empty()) write_atomic(f.out, json);
    if (!f.text_out.empty()) write_atomic(f.text_out, text);
    std::cout << text;
    if (f.out.empty()) std::cout << json;
    std::cerr << "wall seconds: " << report.wall_seconds << " on " << report.threads
              << " thread(s)\n";
    return 0;
}

int cmd_sweep(TrainFlags& f, std::vector<int>& widths) {
    TrainConfig cfg = resolve_config(f);
    DatasetBundle bundle = load_bundle(resolve_manifest(f.manifest));
    PreparedData data = prepare(bundle, cfg);
    std::vector<SweepRow> rows = width_sweep(data, cfg, widths, f.threads);
    nlohmann::json jrows = nlohmann::json::array();
    std::ostringstream table;
    table << kVersion << "\ndataset: " << data.name << "  variant: " << to_string(cfg.variant)
          << "  (heads forced to 1)\n";
    table << "width  mean%   std%\n" << std::fixed << std::setprecision(2);
    for (const SweepRow& r : rows) {
        jrows.push_back({{"width", r.width}, {"mean", r.mean}, {"stddev", r.stddev}});
        table << std::setw(5) << r.width << "  " << std::setw(5) << 100.0 * r.mean << "  "
              << std::setw(5) << 100.0 * r.stddev << "\n";
    }
    nlohmann::json j = {{"version", kVersion},
                        {"dataset", data.name},
                        {"config", cfg.to_json()},
                        {"widths", jrows}};
    if (!f.out.empty()) write_atomic(f.out, j.dump(2) + "\n");
    if (!f.text_out.empty()) write_atomic(f.text_out, table.str());
    std::cout << table.str();
    return 0;
}

int cmd_verify(int instances, int max_n, std::uint64_t seed, bool inject_fault) {
    if (instances < 1 || max_n < 8) throw ConfigError("need --instances >= 1 and --max-n >= 8");
    std::cout << kVersion << "\n";
    std::cout << "verify: instances=" << instances << " max_n=" << max_n << " seed=" << seed
              << (inject_fault ? " (fault injected)" : "") << "\n";
    std::vector<PropertyResult> results = run_property_suite(
        instances, max_n, seed,
        inject_fault ? FaultInjection::flip_degree_exponent : FaultInjection::none);
    bool all_pass = true;
    for (const PropertyResult& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  max_dev=" << std::scientific
                  << r.max_dev << std::defaultfloat;
        if (!r.note.empty()) std::cout << "  (" << r.note << ")";
        std::cout << "\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

int cmd_bench(std::vector<int>& sizes, double mean_card, std::uint64_t seed,
              const std::string& out, bool check) {
    std::ostringstream csv;
    csv << "# " << kVersion << "\n";
    csv << "# mean_cardinality=" << mean_card << " seed=" << seed << "\n";
    csv << bench_csv_header() << "\n";
    std::cout << kVersion << "\n";
    for (int n : sizes) {
        if (n < 2) throw ConfigError("bench sizes must be >= 2");
        BenchRow row = bench_transition(n, n, mean_card, seed, check);
        csv << to_csv(row) << "\n";
        std::cout << "n=m=" << row.n << "  ratio=" << std::fixed << std::setprecision(1)
                  << row.ratio << "  forward=" << std::setprecision(3) << row.forward_ms
                  << "ms  max_dev=" << std::scientific << row.max_dev << std::defaultfloat
                  << "\n";
        if (check && row.max_dev > 1e-12)
            throw NumericalDivergence("factorized and naive transitions disagree");
    }
    if (!out.empty())
        write_atomic(out, csv.str());
    else
        std::cout << csv.str();
    return 0;
}

struct ConvertFlags {
    std::string content, cites, matrix, labels;
    std::string name = "dataset";
    std::string out_dir;
};

// Canonical citation form: ids relabeled to 0..N-1 in row order, so running
// convert on its own output reproduces it byte for byte.
int cmd_convert(ConvertFlags& f) {
    const bool citation = !f.content.empty();
    if (citation == !f.matrix.empty())
        throw ConfigError("give either --content/--cites or --matrix/--labels");
    fs::create_directories(f.out_dir);
    nlohmann::json manifest;
    manifest["name"] = f.name;
    DatasetBundle b;
    if (citation) {
        if (f.cites.empty()) throw ConfigError("--content requires --cites");
        b = load_citation_text(f.content, f.cites);
        DenseMatrix feats = b.features.to_dense();
        std::ostringstream content;
        for (int i = 0; i < b.n_vertices(); ++i) {
            content << i;
            for (int j = 0; j < b.n_features(); ++j) content << '\t' << feats(i, j);
            content << '\t' << b.class_names[b.labels[i]] << '\n';
        }
        std::ostringstream cites;  // file order is `cited citing`
        for (auto [citing, cited] : b.links) cites << cited << '\t' << citing << '\n';
        write_atomic((fs::path(f.out_dir) / (f.name + ".content")).string(), content.str());
        write_atomic((fs::path(f.out_dir) / (f.name + ".cites")).string(), cites.str());
        manifest["format"] = "citation";
        manifest["content"] = f.name + ".content";
        manifest["cites"] = f.name + ".cites";
    } else {
        if (f.labels.empty()) throw ConfigError("--matrix requires --labels");
        b = load_occurrence(f.matrix, f.labels);
        std::ostringstream matrix;  // 1-based triplets in row-major order
        for (int i = 0; i < b.occurrence.n_rows(); ++i)
            for (int c : b.occurrence.row_cols(i)) matrix << i + 1 << '\t' << c + 1 << "\t1\n";
        std::ostringstream labels;
        for (int l : b.labels) labels << b.class_names[l] << '\n';
        write_atomic((fs::path(f.out_dir) / (f.name + ".matrix")).string(), matrix.str());
        write_atomic((fs::path(f.out_dir) / (f.name + ".labels")).string(), labels.str());
        manifest["format"] = "occurrence";
        manifest["matrix"] = f.name + ".matrix";
        manifest["labels"] = f.name + ".labels";
        manifest["n_features"] = b.n_features();
    }
    write_atomic((fs::path(f.out_dir) / (f.name + ".json")).string(), manifest.dump(2) + "\n");
    Census c = census_of(b);
    std::cout << kVersion << "\n";
    std::cout << "census: " << c.n_vertices << " vertices, " << c.n_links << " links, "
              << c.n_features << " features, " << c.n_classes << " classes";
    if (b.dropped_links) std::cout << " (" << b.dropped_links << " links dropped)";
    std::cout << "\nwrote manifest " << (fs::path(f.out_dir) / (f.name + ".json")).string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hypergraph convolution/attention training and verification toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    TrainFlags train_flags;
    CLI::App* train = app.add_subcommand("train", "train a model and report mean test accuracy");
    add_train_flags(train, train_flags);

    TrainFlags sweep_flags;
    std::vector<int> widths{2, 4, 8, 16, 32};
    CLI::App* sweep = app.add_subcommand("sweep", "hidden-width comparison with a single head");
    add_train_flags(sweep, sweep_flags);
    sweep->add_option("--widths", widths, "hidden widths to sweep");

    int instances = 100, max_n = 64;
    std::uint64_t verify_seed = 1;
    bool inject_fault = false;
    CLI::App* verify = app.add_subcommand("verify", "run the randomized invariant suite");
    verify->add_option("--instances", instances, "instances per property");
    verify->add_option("--max-n", max_n, "maximum vertex count");
    verify->add_option("--seed", verify_seed, "suite seed");
    verify->add_flag("--inject-fault", inject_fault,
                     "flip a sign in the builder to prove the suite detects defects");

    std::vector<int> sizes{128, 512, 1024, 2708};
    double mean_card = 5.0;
    std::uint64_t bench_seed = 1;
    std::string bench_out;
    bool no_check = false;
    CLI::App* bench = app.add_subcommand("bench", "time factorized vs naive operator construction");
    bench->add_option("--sizes", sizes, "square sizes n=m to benchmark");
    bench->add_option("--mean-card", mean_card, "mean hyperedge cardinality");
    bench->add_option("--seed", bench_seed, "instance seed");
    bench->add_option("--out", bench_out, "CSV output path (default: stdout)");
    bench->add_flag("--no-check", no_check, "skip the factorized-vs-naive agreement check");

    ConvertFlags conv;
    CLI::App* convert = app.add_subcommand("convert", "normalize raw files and write a manifest");
    convert->add_option("--content", conv.content, "citation .content file");
    convert->add_option("--cites", conv.cites, "citation .cites file");
    convert->add_option("--matrix", conv.matrix, "occurrence triplet file");
    convert->add_option("--labels", conv.labels, "occurrence labels file");
    convert->add_option("--name", conv.name, "dataset name");
    convert->add_option("--out-dir", conv.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(train_flags);
        if (*sweep) return cmd_sweep(sweep_flags, widths);
        if (*verify) return cmd_verify(instances, max_n, verify_seed, inject_fault);
        if (*bench) return cmd_bench(sizes, mean_card, bench_seed, bench_out, !no_check);
        if (*convert) return cmd_convert(conv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const SplitInfeasible& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalDivergence& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const AllTrialsDiverged& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const ZeroDegree& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
