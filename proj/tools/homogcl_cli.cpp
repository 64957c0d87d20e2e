// Command-line front-end: dataset generation, training, evaluation and
// diagnostics, all reproducible from a written run manifest.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "homogcl/config.hpp"
#include "homogcl/eval.hpp"
#include "homogcl/train.hpp"

namespace fs = std::filesystem;
using namespace homogcl;

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("HOMOGCL_OUT_DIR")) return env;
    return "runs";
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail<IoError>("cannot create output directory ", dir, ": ", ec.message());
}

Config build_config(const std::vector<std::string>& config_files,
                    const std::vector<std::string>& sets) {
    Config cfg;
    for (const auto& f : config_files) cfg.load_file(f);
    for (const auto& s : sets) cfg.set_pair(s);
    return cfg;
}

Graph load_dataset(const Config& cfg) {
    const std::string edges = cfg.get_string("data.edges", "");
    const std::string feats = cfg.get_string("data.features", "");
    if (edges.empty() || feats.empty())
        fail<ConfigError>("data.edges and data.features must be set");
    const std::string labels = cfg.get_string("data.labels", "");
    return load_graph(edges, feats,
                      labels.empty() ? std::nullopt : std::optional(labels));
}

Split dataset_split(const Config& cfg, const Graph& g) {
    const std::string split_path = cfg.get_string("data.split", "");
    if (!split_path.empty()) return load_split(split_path);
    return make_split(g, cfg.resolve_split(), cfg.get_size("split.seed", 1));
}

std::string fmt(double v) { return Config::format_double(v); }

void write_metrics_csv(const TrainReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail<IoError>("cannot open for writing: ", path);
    out << "epoch,contrastive,homophily,bgrl1,bgrl2,objective\n";
    for (const EpochMetrics& em : report.series)
        out << em.epoch << "," << fmt(em.loss.contrastive) << "," << fmt(em.loss.homophily)
            << "," << fmt(em.loss.bgrl1) << "," << fmt(em.loss.bgrl2) << ","
            << fmt(em.loss.objective) << "\n";
    if (!out) fail<IoError>("write failed: ", path);
}

void write_timings_csv(const TrainReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail<IoError>("cannot open for writing: ", path);
    out << "epoch,t_encode_ms,t_cluster_ms,t_loss_ms\n";
    for (const EpochMetrics& em : report.series)
        out << em.epoch << "," << em.t_encode_ms << "," << em.t_cluster_ms << ","
            << em.t_loss_ms << "\n";
    if (!out) fail<IoError>("write failed: ", path);
}

std::vector<std::pair<std::string, std::string>> manifest_extras(const Config& cfg,
                                                                 const std::string& out_dir) {
    std::vector<std::pair<std::string, std::string>> extras;
    for (const char* key : {"data.edges", "data.features", "data.labels", "data.split"}) {
        const std::string path = cfg.get_string(key, "");
        if (!path.empty())
            extras.emplace_back(std::string("manifest.digest.") + key, file_digest(path));
    }
    extras.emplace_back("manifest.output.dir", out_dir);
    return extras;
}

// One training run into out_dir: metrics, timings, embeddings, manifest.
TrainReport run_train(const Config& cfg, const std::string& out_dir, bool quiet = false) {
    ensure_dir(out_dir);
    const Graph g = load_dataset(cfg);
    const TrainConfig tc = cfg.resolve_train();
    TrainReport report = train(g, tc);
    write_metrics_csv(report, out_dir + "/metrics.csv");
    write_timings_csv(report, out_dir + "/timings.csv");
    save_dense(report.embeddings, out_dir + "/embeddings.txt");
    write_manifest(cfg, out_dir + "/manifest.cfg", manifest_extras(cfg, out_dir));
    if (!quiet) {
        const LossBreakdown& last = report.series.back().loss;
        std::cout << "trained " << to_string(tc.mode) << " for " << tc.epochs
                  << " epochs; final objective " << fmt(last.objective) << "\n"
                  << "outputs in " << out_dir << "\n";
    }
    return report;
}

int cmd_gen_data(std::size_t n, std::size_t classes, double p_in, double p_out,
                 std::size_t feat_dim, double flip_prob, std::uint64_t seed,
                 const std::string& out_dir) {
    ensure_dir(out_dir);
    Graph g = generate_sbm(n, classes, p_in, p_out, feat_dim, flip_prob, seed);
    save_graph(g, out_dir + "/edges.txt", out_dir + "/features.txt",
               out_dir + "/labels.txt");
    std::cout << "wrote " << out_dir << "/{edges,features,labels}.txt (" << g.num_nodes()
              << " nodes, " << g.num_edges() << " edges)\n";
    if (g.num_edges() > 0) std::cout << "homophily = " << fmt(homophily(g)) << "\n";
    else std::cout << "homophily undefined: graph has no edges\n";
    return 0;
}

int cmd_eval(const Config& cfg, const std::string& embeddings_path, const std::string& task,
             std::size_t runs_override, const std::string& out_dir) {
    ensure_dir(out_dir);
    const Graph g = load_dataset(cfg);
    if (!g.has_labels()) fail<ConfigError>("evaluation requires data.labels");
    const DenseMatrix H = load_dense(embeddings_path);
    if (H.rows() != g.num_nodes())
        fail<DataError>("embeddings have ", H.rows(), " rows for ", g.num_nodes(), " nodes");
    Rng rng(cfg.get_size("split.seed", 1));
    std::ofstream out(out_dir + "/results.txt");
    if (!out) fail<IoError>("cannot open for writing: ", out_dir, "/results.txt");

    if (task == "classify" || task == "both") {
        const Split split = dataset_split(cfg, g);
        ProbeOptions opts{.lr = cfg.get_double("eval.probe_lr", 1e-2),
                          .epochs = cfg.get_size("eval.probe_epochs", 300)};
        const std::size_t runs =
            runs_override > 0 ? runs_override : cfg.get_size("eval.probe_runs", 5);
        RngStream stream = rng.stream("probe");
        Stats acc = linear_probe(H, g.labels(), split, cfg.get_double("eval.probe_l2", 1e-4),
                                 runs, stream, opts);
        out << "accuracy.mean = " << fmt(acc.mean) << "\n";
        out << "accuracy.std = " << fmt(acc.stddev) << "\n";
        out << "accuracy.runs = " << acc.runs.size() << "\n";
        std::cout << "accuracy " << fmt(acc.mean) << " +- " << fmt(acc.stddev) << " over "
                  << acc.runs.size() << " runs\n";
    }
    if (task == "cluster" || task == "both") {
        std::size_t num_classes = 0;
        for (int y : g.labels()) num_classes = std::max<std::size_t>(num_classes, y + 1);
        const std::size_t runs =
            runs_override > 0 ? runs_override : cfg.get_size("eval.cluster_runs", 10);
        RngStream stream = rng.stream("cluster-eval");
        ClusteringStats cs = clustering_eval(H, g.labels(), num_classes, runs, stream);
        out << "nmi.mean = " << fmt(cs.nmi.mean) << "\n";
        out << "nmi.std = " << fmt(cs.nmi.stddev) << "\n";
        out << "ari.mean = " << fmt(cs.ari.mean) << "\n";
        out << "ari.std = " << fmt(cs.ari.stddev) << "\n";
        out << "cluster.runs = " << runs << "\n";
        std::cout << "nmi " << fmt(cs.nmi.mean) << " +- " << fmt(cs.nmi.stddev) << ", ari "
                  << fmt(cs.ari.mean) << " +- " << fmt(cs.ari.stddev) << " over " << runs
                  << " runs\n";
    }
    if (!out) fail<IoError>("write failed: ", out_dir, "/results.txt");
    std::cout << "results in " << out_dir << "/results.txt\n";
    return 0;
}

Stats probe_embeddings(const Config& cfg, const Graph& g, const DenseMatrix& H,
                       const Split& split, const std::string& stream_label) {
    ProbeOptions opts{.lr = cfg.get_double("eval.probe_lr", 1e-2),
                      .epochs = cfg.get_size("eval.probe_epochs", 300)};
    RngStream stream = Rng(cfg.get_size("split.seed", 1)).stream(stream_label);
    return linear_probe(H, g.labels(), split, cfg.get_double("eval.probe_l2", 1e-4),
                        cfg.get_size("eval.probe_runs", 5), stream, opts);
}

int cmd_diagnose_mp_ablation(Config cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    const Graph g = load_dataset(cfg);
    if (!g.has_labels()) fail<ConfigError>("mp-ablation requires data.labels");
    const Split split = dataset_split(cfg, g);

    Config with_mp = cfg;
    with_mp.set("encoder.mp_ablation", "false");
    Config without_mp = cfg;
    without_mp.set("encoder.mp_ablation", "true");

    TrainReport rep_mp = train(g, with_mp.resolve_train());
    TrainReport rep_nomp = train(g, without_mp.resolve_train());

    Stats acc_mp = probe_embeddings(cfg, g, rep_mp.embeddings, split, "probe/mp");
    Stats acc_nomp = probe_embeddings(cfg, g, rep_nomp.embeddings, split, "probe/nomp");
    Stats acc_raw = probe_embeddings(cfg, g, g.features(), split, "probe/raw");

    std::ofstream out(out_dir + "/mp_ablation.txt");
    if (!out) fail<IoError>("cannot open for writing: ", out_dir, "/mp_ablation.txt");
    out << "w_mp.accuracy.mean = " << fmt(acc_mp.mean) << "\n";
    out << "w_mp.accuracy.std = " << fmt(acc_mp.stddev) << "\n";
    out << "wo_mp.accuracy.mean = " << fmt(acc_nomp.mean) << "\n";
    out << "wo_mp.accuracy.std = " << fmt(acc_nomp.stddev) << "\n";
    out << "raw_probe.accuracy.mean = " << fmt(acc_raw.mean) << "\n";
    out << "raw_probe.accuracy.std = " << fmt(acc_raw.stddev) << "\n";
    std::cout << "w/ MP   " << fmt(acc_mp.mean) << "\n"
              << "w/o MP  " << fmt(acc_nomp.mean) << "\n"
              << "raw     " << fmt(acc_raw.mean) << "\n"
              << "table in " << out_dir << "/mp_ablation.txt\n";
    return 0;
}

int cmd_diagnose_similarity_trace(const Config& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    const Graph g = load_dataset(cfg);
    const TrainConfig tc = cfg.resolve_train();
    if (tc.snapshot_every == 0)
        fail<ConfigError>("similarity-trace needs snapshots; set train.snapshot_every > 0");
    TrainReport report = train(g, tc);
    std::ofstream out(out_dir + "/similarity_trace.csv");
    if (!out) fail<IoError>("cannot open for writing: ", out_dir, "/similarity_trace.csv");
    out << "epoch,positive_mean,negative_mean\n";
    for (const auto& [epoch, H] : report.snapshots) {
        const SimilaritySummary s = similarity_summary(H);
        out << epoch << "," << fmt(s.positive_mean) << "," << fmt(s.negative_mean) << "\n";
    }
    std::cout << "trace in " << out_dir << "/similarity_trace.csv\n";
    return 0;
}

int cmd_diagnose_saliency_bins(const Config& cfg, std::size_t bin_size,
                               const std::string& out_dir) {
    ensure_dir(out_dir);
    const Graph g = load_dataset(cfg);
    if (!g.has_labels()) fail<ConfigError>("saliency-bins requires data.labels");
    const TrainConfig tc = cfg.resolve_train();
    if (!uses_clustering(tc.mode))
        fail<ConfigError>("saliency-bins needs a clustering mode (homogcl family)");
    TrainReport report = train(g, tc);
    SaliencyBinCurve curve =
        saliency_homophily_bins(report.final_saliency, g, g.labels(), bin_size);
    std::ofstream out(out_dir + "/saliency_bins.csv");
    if (!out) fail<IoError>("cannot open for writing: ", out_dir, "/saliency_bins.csv");
    out << "bin_start_rank,homophily\n";
    for (std::size_t b = 0; b < curve.homophily.size(); ++b)
        out << curve.bin_start[b] << "," << fmt(curve.homophily[b]) << "\n";
    std::cout << curve.homophily.size() << " bins in " << out_dir << "/saliency_bins.csv\n";
    return 0;
}

// --sweep key=v1,v2,... repeats the training run once per value.
std::vector<std::pair<std::string, std::string>> parse_sweep(const std::string& sweep) {
    const auto eq = sweep.find('=');
    if (eq == std::string::npos) fail<ConfigError>("--sweep expects key=v1,v2,...");
    const std::string key = sweep.substr(0, eq);
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream iss(sweep.substr(eq + 1));
    std::string v;
    while (std::getline(iss, v, ',')) out.emplace_back(key, v);
    if (out.empty()) fail<ConfigError>("--sweep has no values");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph contrastive learning lab (GRACE/BGRL bases with "
                 "homophily-driven positive expansion)"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic SBM dataset");
    std::size_t gen_n = 0, gen_classes = 0, gen_feat_dim = 32;
    double gen_p_in = 0.05, gen_p_out = 0.001, gen_flip = 0.1;
    std::uint64_t gen_seed = 1;
    std::string gen_out = default_out_dir();
    gen->add_option("--n", gen_n, "number of nodes")->required();
    gen->add_option("--classes", gen_classes, "number of classes")->required();
    gen->add_option("--p-in", gen_p_in, "intra-class edge probability");
    gen->add_option("--p-out", gen_p_out, "inter-class edge probability");
    gen->add_option("--feat-dim", gen_feat_dim, "feature dimension");
    gen->add_option("--flip-prob", gen_flip, "feature bit flip probability");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory");

    // train
    auto* tr = app.add_subcommand("train", "train a model and write a reproducible run");
    std::vector<std::string> tr_configs, tr_sets;
    std::string tr_out = default_out_dir(), tr_sweep;
    tr->add_option("--config", tr_configs, "config file(s), later files win");
    tr->add_option("--set", tr_sets, "override, key=value");
    tr->add_option("--out", tr_out, "output directory");
    tr->add_option("--sweep", tr_sweep, "repeat runs over key=v1,v2,...");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate stored embeddings");
    std::vector<std::string> ev_configs, ev_sets;
    std::string ev_embeddings, ev_task = "classify", ev_out = default_out_dir();
    std::size_t ev_runs = 0;
    ev->add_option("--embeddings", ev_embeddings, "embedding matrix file")->required();
    ev->add_option("--config", ev_configs, "config file(s)");
    ev->add_option("--set", ev_sets, "override, key=value");
    ev->add_option("--task", ev_task, "classify | cluster | both");
    ev->add_option("--runs", ev_runs, "number of evaluation runs");
    ev->add_option("--out", ev_out, "output directory");

    // diagnose
    auto* dg = app.add_subcommand("diagnose", "paper-style diagnostics");
    dg->require_subcommand(1);
    std::vector<std::string> dg_configs, dg_sets;
    std::string dg_out = default_out_dir();
    std::size_t dg_bin_size = 500;
    auto* dg_mp = dg->add_subcommand("mp-ablation", "train with and without message passing");
    auto* dg_sim = dg->add_subcommand("similarity-trace",
                                      "positive/negative cosine per snapshot epoch");
    auto* dg_bins = dg->add_subcommand("saliency-bins", "homophily per saliency-ranked bin");
    for (auto* sub : {dg_mp, dg_sim, dg_bins}) {
        sub->add_option("--config", dg_configs, "config file(s)");
        sub->add_option("--set", dg_sets, "override, key=value");
        sub->add_option("--out", dg_out, "output directory");
    }
    dg_bins->add_option("--bin-size", dg_bin_size, "edges per bin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(gen_n, gen_classes, gen_p_in, gen_p_out, gen_feat_dim, gen_flip,
                                gen_seed, gen_out);
        if (tr->parsed()) {
            Config cfg = build_config(tr_configs, tr_sets);
            if (tr_sweep.empty()) {
                run_train(cfg, tr_out);
            } else {
                for (const auto& [key, value] : parse_sweep(tr_sweep)) {
                    Config c = cfg;
                    c.set(key, value);
                    run_train(c, tr_out + "/" + key + "=" + value);
                }
            }
            return 0;
        }
        if (ev->parsed())
            return cmd_eval(build_config(ev_configs, ev_sets), ev_embeddings, ev_task, ev_runs,
                            ev_out);
        if (dg->parsed()) {
            Config cfg = build_config(dg_configs, dg_sets);
            if (dg_mp->parsed()) return cmd_diagnose_mp_ablation(cfg, dg_out);
            if (dg_sim->parsed()) return cmd_diagnose_similarity_trace(cfg, dg_out);
            if (dg_bins->parsed()) return cmd_diagnose_saliency_bins(cfg, dg_bin_size, dg_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
