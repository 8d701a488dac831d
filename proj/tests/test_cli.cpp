#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "hyperconv/synthetic.hpp"

using namespace hyperconv;
namespace fs = std::filesystem;

#ifndef HYPERCONV_CLI_PATH
#define HYPERCONV_CLI_PATH "hyperconv"
#endif

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(HYPERCONV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("hyperconv_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

// Serialize a synthetic dataset in the citation text format plus split files
// and a manifest, so the CLI has something real to chew on.
std::string write_dataset(const fs::path& dir) {
    CounterRng rng(81);
    DatasetBundle b = synthetic_citation_dataset(36, 3, 3, 0.05, rng);
    DenseMatrix feats = b.features.to_dense();
    std::ofstream content(dir / "syn.content");
    for (int i = 0; i < b.n_vertices(); ++i) {
        content << "node" << i;
        for (int j = 0; j < b.n_features(); ++j) content << '\t' << feats(i, j);
        content << '\t' << b.class_names[b.labels[i]] << '\n';
    }
    std::ofstream cites(dir / "syn.cites");
    for (auto [citing, cited] : b.links)
        cites << "node" << cited << "\tnode" << citing << '\n';
    std::ofstream train(dir / "train.txt"), val(dir / "val.txt"), test(dir / "test.txt");
    std::vector<int> seen(b.n_classes, 0);
    for (int i = 0; i < b.n_vertices(); ++i) {
        int& k = seen[b.labels[i]];
        (k < 4 ? train : k < 8 ? val : test) << i << '\n';
        ++k;
    }
    std::ofstream manifest(dir / "syn.json");
    manifest << R"({"name":"syn","format":"citation","content":"syn.content",)"
             << R"("cites":"syn.cites","split":{"train":"train.txt","val":"val.txt",)"
             << R"("test":"test.txt"}})";
    manifest.close();
    return (dir / "syn.json").string();
}

}  // namespace

TEST_CASE("version and bad-usage exit codes") {
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("") != 0);  // a subcommand is required
}

TEST_CASE("verify passes clean and fails under fault injection") {
    CHECK(run_cli("verify --instances 5 --max-n 16") == 0);
    CHECK(run_cli("verify --instances 5 --max-n 16 --inject-fault") == 1);
    CHECK(run_cli("verify --instances 0") == 2);
}

TEST_CASE("train: config errors exit 2, data errors exit 3") {
    TempDir dir;
    std::string manifest = write_dataset(dir.path);
    CHECK(run_cli("train --manifest " + manifest + " --variant bogus --trials 1") == 2);
    CHECK(run_cli("train --manifest " + manifest + " --trials 1 --dropout 1.5") == 2);
    CHECK(run_cli("train --manifest /nonexistent/x.json --trials 1") == 3);
    std::ofstream(dir.path / "broken.json") << "{ nope";
    CHECK(run_cli("train --manifest " + (dir.path / "broken.json").string() + " --trials 1") == 3);
}

TEST_CASE("train runs and identical seeds give byte-identical reports") {
    TempDir dir;
    std::string manifest = write_dataset(dir.path);
    std::string common = "train --manifest " + manifest +
                         " --trials 1 --seed 7 --heads 2 --hidden 4 --max-epochs 20 "
                         "--patience 20 --threads 2 --out ";
    CHECK(run_cli(common + (dir.path / "r1.json").string()) == 0);
    CHECK(run_cli(common + (dir.path / "r2.json").string()) == 0);
    std::string r1 = slurp(dir.path / "r1.json"), r2 = slurp(dir.path / "r2.json");
    CHECK(!r1.empty());
    CHECK(r1 == r2);
    CHECK(r1.find("\"version\"") != std::string::npos);
    CHECK(r1.find("\"config\"") != std::string::npos);
}

TEST_CASE("bench emits the documented CSV header") {
    TempDir dir;
    fs::path csv = dir.path / "bench.csv";
    CHECK(run_cli("bench --sizes 48 --mean-card 4 --out " + csv.string()) == 0);
    std::string text = slurp(csv);
    CHECK(text.find("n,m,density,t_factorized_s,t_naive_s,ratio") != std::string::npos);
    // one data row for the requested size (m may exceed n by singleton
    // hyperedges covering otherwise-isolated vertices)
    CHECK(text.find("\n48,") != std::string::npos);
}

TEST_CASE("convert is idempotent and prints a census") {
    TempDir dir;
    write_dataset(dir.path);
    fs::path out1 = dir.path / "one", out2 = dir.path / "two";
    CHECK(run_cli("convert --content " + (dir.path / "syn.content").string() + " --cites " +
                  (dir.path / "syn.cites").string() + " --name syn --out-dir " + out1.string()) ==
          0);
    CHECK(fs::exists(out1 / "syn.json"));
    CHECK(run_cli("convert --content " + (out1 / "syn.content").string() + " --cites " +
                  (out1 / "syn.cites").string() + " --name syn --out-dir " + out2.string()) == 0);
    CHECK(slurp(out1 / "syn.content") == slurp(out2 / "syn.content"));
    CHECK(slurp(out1 / "syn.cites") == slurp(out2 / "syn.cites"));
    CHECK(slurp(out1 / "syn.json") == slurp(out2 / "syn.json"));

    std::ofstream(dir.path / "bad.content") << "a\t1\tx\nb\t1\n";
    CHECK(run_cli("convert --content " + (dir.path / "bad.content").string() + " --cites " +
                  (dir.path / "syn.cites").string() + " --out-dir " + out2.string()) == 3);
    CHECK(run_cli("convert --out-dir " + out2.string()) == 2);
}

TEST_CASE("sweep writes one row per width") {
    TempDir dir;
    std::string manifest = write_dataset(dir.path);
    fs::path out = dir.path / "sweep.json";
    CHECK(run_cli("sweep --manifest " + manifest +
                  " --widths 2 3 --trials 1 --max-epochs 10 --patience 10 --out " +
                  out.string()) == 0);
    std::string text = slurp(out);
    CHECK(text.find("\"widths\"") != std::string::npos);
    CHECK(text.find("\"width\": 2") != std::string::npos);
    CHECK(text.find("\"width\": 3") != std::string::npos);
}
