#include <catch2/catch.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string output;
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(HOMOGCL_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult r;
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe)) r.output += buf;
    const int rc = pclose(pipe);
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

struct Workspace {
    std::string dir;
    explicit Workspace(const std::string& name) : dir("cli_ws_" + name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }

    std::string data() {
        auto r = run_cli("gen-data --n 24 --classes 3 --p-in 0.4 --p-out 0.05 --feat-dim 9 "
                         "--flip-prob 0.1 --seed 2 --out " + dir + "/data");
        REQUIRE(r.exit_code == 0);
        return dir + "/data";
    }

    std::string data_args(const std::string& d) {
        return " --set data.edges=" + d + "/edges.txt --set data.features=" + d +
               "/features.txt --set data.labels=" + d + "/labels.txt";
    }

    std::string tiny_train_args() {
        return " --set train.epochs=4 --set encoder.hidden_dim=8 --set encoder.out_dim=4 "
               "--set cluster.k=3 --set eval.probe_epochs=40 --set eval.probe_runs=2";
    }
};

}  // namespace

TEST_CASE("gen-data writes the dataset and prints its homophily") {
    Workspace ws("gen");
    auto r = run_cli("gen-data --n 30 --classes 2 --p-in 1 --p-out 0 --feat-dim 6 "
                     "--flip-prob 0 --seed 1 --out " + ws.dir + "/d");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("homophily = 1") != std::string::npos);
    REQUIRE(fs::exists(ws.dir + "/d/edges.txt"));
    REQUIRE(fs::exists(ws.dir + "/d/features.txt"));
    REQUIRE(fs::exists(ws.dir + "/d/labels.txt"));
}

TEST_CASE("gen-data without required flags is a usage error") {
    auto r = run_cli("gen-data --classes 2");
    REQUIRE(r.exit_code == 1);
}

TEST_CASE("unknown config keys are rejected by name") {
    Workspace ws("badkey");
    auto d = ws.data();
    auto r = run_cli("train" + ws.data_args(d) + " --set loss.taau=0.5 --out " + ws.dir + "/r");
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.output.find("loss.taau") != std::string::npos);
}

TEST_CASE("train writes metrics, embeddings and a manifest that reproduces the run") {
    Workspace ws("train");
    auto d = ws.data();
    auto r = run_cli("train" + ws.data_args(d) + ws.tiny_train_args() +
                     " --set loss.mode=homogcl --out " + ws.dir + "/run1");
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(ws.dir + "/run1/metrics.csv"));
    REQUIRE(fs::exists(ws.dir + "/run1/timings.csv"));
    REQUIRE(fs::exists(ws.dir + "/run1/embeddings.txt"));
    REQUIRE(fs::exists(ws.dir + "/run1/manifest.cfg"));

    // rerun from the manifest alone: bit-identical outputs
    auto r2 = run_cli("train --config " + ws.dir + "/run1/manifest.cfg --out " + ws.dir +
                      "/run2");
    REQUIRE(r2.exit_code == 0);
    REQUIRE(slurp(ws.dir + "/run1/metrics.csv") == slurp(ws.dir + "/run2/metrics.csv"));
    REQUIRE(slurp(ws.dir + "/run1/embeddings.txt") == slurp(ws.dir + "/run2/embeddings.txt"));
}

TEST_CASE("metrics csv has the documented header") {
    Workspace ws("csv");
    auto d = ws.data();
    auto r = run_cli("train" + ws.data_args(d) + ws.tiny_train_args() + " --out " + ws.dir +
                     "/run");
    REQUIRE(r.exit_code == 0);
    std::ifstream in(ws.dir + "/run/metrics.csv");
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "epoch,contrastive,homophily,bgrl1,bgrl2,objective");
    std::string first;
    std::getline(in, first);
    REQUIRE(first.rfind("0,", 0) == 0);
}

TEST_CASE("divergent settings exit with the numeric failure code") {
    Workspace ws("div");
    auto d = ws.data();
    auto r = run_cli("train" + ws.data_args(d) + ws.tiny_train_args() +
                     " --set loss.mode=grace --set loss.tau=0.0001 --out " + ws.dir + "/run");
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.output.find("epoch") != std::string::npos);
}

TEST_CASE("eval scores stored embeddings and rejects shape mismatches") {
    Workspace ws("eval");
    auto d = ws.data();
    auto r = run_cli("train" + ws.data_args(d) + ws.tiny_train_args() + " --out " + ws.dir +
                     "/run");
    REQUIRE(r.exit_code == 0);
    auto r2 = run_cli("eval --embeddings " + ws.dir + "/run/embeddings.txt" +
                      ws.data_args(d) +
                      " --task both --set eval.probe_epochs=40 --set eval.probe_runs=2"
                      " --set eval.cluster_runs=3 --set split.val_frac=0.2"
                      " --set split.train_frac=0.3 --out " + ws.dir + "/eval");
    REQUIRE(r2.exit_code == 0);
    const std::string results = slurp(ws.dir + "/eval/results.txt");
    REQUIRE(results.find("accuracy.mean = ") != std::string::npos);
    REQUIRE(results.find("nmi.mean = ") != std::string::npos);
    REQUIRE(results.find("ari.mean = ") != std::string::npos);

    // wrong row count
    auto other = run_cli("gen-data --n 12 --classes 2 --p-in 0.5 --p-out 0.1 --feat-dim 4 "
                         "--seed 5 --out " + ws.dir + "/small");
    REQUIRE(other.exit_code == 0);
    auto r3 = run_cli("eval --embeddings " + ws.dir + "/run/embeddings.txt --set data.edges=" +
                      ws.dir + "/small/edges.txt --set data.features=" + ws.dir +
                      "/small/features.txt --set data.labels=" + ws.dir +
                      "/small/labels.txt --out " + ws.dir + "/eval2");
    REQUIRE(r3.exit_code == 3);
}

TEST_CASE("saliency bins on a one-class graph are flat at 1") {
    Workspace ws("bins");
    auto r0 = run_cli("gen-data --n 20 --classes 1 --p-in 0.4 --p-out 0 --feat-dim 5 "
                      "--flip-prob 0.2 --seed 3 --out " + ws.dir + "/one");
    REQUIRE(r0.exit_code == 0);
    auto r = run_cli("diagnose saliency-bins" + ws.data_args(ws.dir + "/one") +
                     ws.tiny_train_args() + " --bin-size 7 --out " + ws.dir + "/diag");
    REQUIRE(r.exit_code == 0);
    std::ifstream in(ws.dir + "/diag/saliency_bins.csv");
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "bin_start_rank,homophily");
    int bins = 0;
    while (std::getline(in, line)) {
        REQUIRE(line.substr(line.find(',') + 1) == "1");
        bins++;
    }
    REQUIRE(bins >= 1);
}

TEST_CASE("similarity trace requires snapshots") {
    Workspace ws("trace");
    auto d = ws.data();
    auto r = run_cli("diagnose similarity-trace" + ws.data_args(d) + ws.tiny_train_args() +
                     " --out " + ws.dir + "/diag");
    REQUIRE(r.exit_code == 1);
    auto r2 = run_cli("diagnose similarity-trace" + ws.data_args(d) + ws.tiny_train_args() +
                      " --set train.snapshot_every=2 --out " + ws.dir + "/diag");
    REQUIRE(r2.exit_code == 0);
    std::ifstream in(ws.dir + "/diag/similarity_trace.csv");
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "epoch,positive_mean,negative_mean");
}

TEST_CASE("mp ablation writes the three-way comparison") {
    Workspace ws("mp");
    auto d = ws.data();
    auto r = run_cli("diagnose mp-ablation" + ws.data_args(d) + ws.tiny_train_args() +
                     " --set loss.mode=grace --set aug.p_e=0 --set aug.p_f=0"
                     " --set split.train_frac=0.3 --set split.val_frac=0.2 --out " +
                     ws.dir + "/diag");
    REQUIRE(r.exit_code == 0);
    const std::string table = slurp(ws.dir + "/diag/mp_ablation.txt");
    REQUIRE(table.find("w_mp.accuracy.mean = ") != std::string::npos);
    REQUIRE(table.find("wo_mp.accuracy.mean = ") != std::string::npos);
    REQUIRE(table.find("raw_probe.accuracy.mean = ") != std::string::npos);
}

TEST_CASE("sweep repeats the run per value in its own directory") {
    Workspace ws("sweep");
    auto d = ws.data();
    auto r = run_cli("train" + ws.data_args(d) + ws.tiny_train_args() +
                     " --sweep cluster.k=2,4 --out " + ws.dir + "/sw");
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(ws.dir + "/sw/cluster.k=2/metrics.csv"));
    REQUIRE(fs::exists(ws.dir + "/sw/cluster.k=4/metrics.csv"));
}
