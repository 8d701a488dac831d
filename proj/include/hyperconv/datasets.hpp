#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hyperconv/errors.hpp"
#include "hyperconv/sparse.hpp"

namespace hyperconv {

struct Split {
    std::vector<int> train, val, test;
};

enum class StructureKind { citation_links, occurrence };

// In-memory dataset: node features, labels, structural links (or occurrence
// matrix) and an optional train/val/test split.
struct DatasetBundle {
    std::string name;
    SparseMatrix features;  // N x F
    std::vector<int> labels;
    std::vector<std::string> class_names;  // sorted; index == label id
    int n_classes = 0;
    StructureKind kind = StructureKind::citation_links;
    std::vector<std::pair<int, int>> links;  // citation structure
    SparseMatrix occurrence;                 // attribute structure
    std::optional<Split> split;
    int dropped_links = 0;  // links referencing unknown ids

    int n_vertices() const { return features.n_rows(); }
    int n_features() const { return features.n_cols(); }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace detail

// <name>.content rows: id, F binary feature fields, label string.
// <name>.cites rows: cited_id citing_id. Ids are remapped to 0..N-1 in
// first-appearance order of the content file; labels map to indices by
// sorted label-string order; links with unknown ids are dropped and counted.
inline DatasetBundle load_citation_text(const std::string& content_path,
                                        const std::string& cites_path) {
    std::ifstream content(content_path);
    if (!content) throw Error("cannot open " + content_path);
    DatasetBundle b;
    b.kind = StructureKind::citation_links;
    std::map<std::string, int> id_map;
    std::vector<std::string> raw_labels;
    std::vector<Triplet> feats;
    int n_features = -1;
    std::string line;
    long line_no = 0;
    while (std::getline(content, line)) {
        ++line_no;
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() < 3) throw ParseError("content row needs id, features, label", line_no);
        const int f = static_cast<int>(tok.size()) - 2;
        if (n_features < 0) n_features = f;
        if (f != n_features)
            throw DimensionMismatch("ragged content row at line " + std::to_string(line_no) +
                                    ": " + std::to_string(f) + " features, expected " +
                                    std::to_string(n_features));
        if (id_map.count(tok[0])) throw ParseError("duplicate id " + tok[0], line_no);
        const int row = static_cast<int>(id_map.size());
        id_map[tok[0]] = row;
        for (int j = 0; j < f; ++j) {
            double v;
            try {
                v = std::stod(tok[1 + j]);
            } catch (const std::exception&) {
                throw ParseError("bad feature value '" + tok[1 + j] + "'", line_no);
            }
            if (v != 0.0) feats.push_back({row, j, v});
        }
        raw_labels.push_back(tok.back());
    }
    const int n = static_cast<int>(raw_labels.size());
    if (n == 0) throw ParseError("empty content file", 0);
    b.features = SparseMatrix::from_triplets(n, n_features, std::move(feats));

    std::map<std::string, int> label_map;
    for (const std::string& l : raw_labels) label_map.emplace(l, 0);
    for (auto& [name, idx] : label_map) {
        idx = b.n_classes++;
        b.class_names.push_back(name);
    }
    for (const std::string& l : raw_labels) b.labels.push_back(label_map[l]);

    std::ifstream cites(cites_path);
    if (!cites) throw Error("cannot open " + cites_path);
    line_no = 0;
    while (std::getline(cites, line)) {
        ++line_no;
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 2) throw ParseError("cites row needs exactly two ids", line_no);
        auto a = id_map.find(tok[0]);
        auto c = id_map.find(tok[1]);
        if (a == id_map.end() || c == id_map.end()) {
            ++b.dropped_links;
            continue;
        }
        // file order: cited citing
        b.links.emplace_back(c->second, a->second);
    }
    return b;
}

// Sparse triplet text `row col value` with 1-based indices plus a labels
// file (one class id per line). Features are the occurrence matrix itself.
inline DatasetBundle load_occurrence(const std::string& matrix_path,
                                     const std::string& labels_path, int expected_cols = -1) {
    std::ifstream labels(labels_path);
    if (!labels) throw Error("cannot open " + labels_path);
    DatasetBundle b;
    b.kind = StructureKind::occurrence;
    std::vector<std::string> raw_labels;
    std::string line;
    long line_no = 0;
    while (std::getline(labels, line)) {
        ++line_no;
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 1) throw ParseError("labels row needs one class id", line_no);
        raw_labels.push_back(tok[0]);
    }
    const int n = static_cast<int>(raw_labels.size());
    if (n == 0) throw ParseError("empty labels file", 0);
    std::map<std::string, int> label_map;
    for (const std::string& l : raw_labels) label_map.emplace(l, 0);
    for (auto& [name, idx] : label_map) {
        idx = b.n_classes++;
        b.class_names.push_back(name);
    }
    for (const std::string& l : raw_labels) b.labels.push_back(label_map[l]);

    std::ifstream matrix(matrix_path);
    if (!matrix) throw Error("cannot open " + matrix_path);
    std::vector<Triplet> entries;
    int max_col = 0;
    line_no = 0;
    while (std::getline(matrix, line)) {
        ++line_no;
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 3) throw ParseError("triplet row needs row col value", line_no);
        long r, c;
        double v;
        try {
            r = std::stol(tok[0]);
            c = std::stol(tok[1]);
            v = std::stod(tok[2]);
        } catch (const std::exception&) {
            throw ParseError("bad triplet", line_no);
        }
        if (r < 1 || r > n) throw ParseError("row index " + std::to_string(r) + " out of range", line_no);
        if (c < 1 || (expected_cols > 0 && c > expected_cols))
            throw ParseError("column index " + std::to_string(c) + " out of range", line_no);
        if (v != 1.0) throw ParseError("occurrence value must be 1", line_no);
        entries.push_back({static_cast<int>(r - 1), static_cast<int>(c - 1), 1.0});
        max_col = std::max(max_col, static_cast<int>(c));
    }
    const int f = expected_cols > 0 ? expected_cols : max_col;
    b.occurrence = SparseMatrix::from_triplets(n, f, std::move(entries));
    b.features = b.occurrence;
    return b;
}

inline std::vector<int> load_index_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<int> idx;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        try {
            idx.push_back(std::stoi(tok[0]));
        } catch (const std::exception&) {
            throw ParseError("bad index '" + tok[0] + "'", line_no);
        }
    }
    return idx;
}

inline void validate_split(const DatasetBundle& b, const Split& s) {
    std::vector<char> used(b.n_vertices(), 0);
    for (const std::vector<int>* part : {&s.train, &s.val, &s.test})
        for (int i : *part) {
            if (i < 0 || i >= b.n_vertices())
                throw IndexOutOfRange("split index " + std::to_string(i) + " out of range");
            if (used[i]++) throw Error("split sets are not disjoint at index " + std::to_string(i));
        }
}

enum class SplitMode { file, deterministic };

// Deterministic mode: per class the `per_class` lowest-index nodes train,
// then the next `n_val` unused nodes in index order validate and `n_test`
// unused nodes test.
inline Split make_split(const DatasetBundle& b, SplitMode mode,
                        const std::string& train_file = {}, const std::string& val_file = {},
                        const std::string& test_file = {}, int per_class = 20, int n_val = 500,
                        int n_test = 1000) {
    Split s;
    if (mode == SplitMode::file) {
        s.train = load_index_file(train_file);
        s.val = load_index_file(val_file);
        s.test = load_index_file(test_file);
        validate_split(b, s);
        return s;
    }
    std::vector<int> taken_per_class(b.n_classes, 0);
    std::vector<char> used(b.n_vertices(), 0);
    for (int i = 0; i < b.n_vertices() && static_cast<int>(s.train.size()) < per_class * b.n_classes;
         ++i) {
        if (taken_per_class[b.labels[i]] < per_class) {
            s.train.push_back(i);
            ++taken_per_class[b.labels[i]];
            used[i] = 1;
        }
    }
    for (int c = 0; c < b.n_classes; ++c)
        if (taken_per_class[c] < per_class)
            throw SplitInfeasible("class " + std::to_string(c) + " has only " +
                                  std::to_string(taken_per_class[c]) + " nodes, need " +
                                  std::to_string(per_class));
    for (int i = 0; i < b.n_vertices() && static_cast<int>(s.val.size()) < n_val; ++i)
        if (!used[i]) {
            s.val.push_back(i);
            used[i] = 1;
        }
    if (static_cast<int>(s.val.size()) < n_val)
        throw SplitInfeasible("not enough nodes for the validation set");
    for (int i = 0; i < b.n_vertices() && static_cast<int>(s.test.size()) < n_test; ++i)
        if (!used[i]) {
            s.test.push_back(i);
            used[i] = 1;
        }
    if (static_cast<int>(s.test.size()) < n_test)
        throw SplitInfeasible("not enough nodes for the test set");
    validate_split(b, s);
    return s;
}

// L1-normalize each nonzero feature row in place; zero rows untouched.
inline void row_normalize_features(DatasetBundle& b) {
    std::vector<double> sums = b.features.row_sums();
    for (double& s : sums) s = s != 0.0 ? 1.0 / s : 0.0;
    b.features.scale_rows(sums);
}

// Manifest: one JSON file naming the dataset files and preprocessing flags.
inline DatasetBundle load_bundle(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw Error("cannot open manifest " + manifest_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what(), 0);
    }
    const auto dir = std::filesystem::path(manifest_path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (dir / fp).string();
    };
    const std::string format = j.value("format", "citation");
    DatasetBundle b;
    if (format == "citation") {
        b = load_citation_text(resolve(j.at("content")), resolve(j.at("cites")));
    } else if (format == "occurrence") {
        b = load_occurrence(resolve(j.at("matrix")), resolve(j.at("labels")),
                            j.value("n_features", -1));
    } else {
        throw ConfigError("manifest format must be 'citation' or 'occurrence'");
    }
    b.name = j.value("name", "dataset");
    if (j.contains("split")) {
        const auto& s = j.at("split");
        b.split = make_split(b, SplitMode::file, resolve(s.at("train")), resolve(s.at("val")),
                             resolve(s.at("test")));
    }
    if (j.value("row_normalize", true)) row_normalize_features(b);
    return b;
}

struct Census {
    int n_vertices = 0, n_links = 0, n_features = 0, n_classes = 0;
};

inline Census census_of(const DatasetBundle& b) {
    return Census{b.n_vertices(), static_cast<int>(b.links.size()), b.n_features(), b.n_classes};
}

}  // namespace hyperconv
