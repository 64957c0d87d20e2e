#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <vector>

#include "homogcl/augment.hpp"
#include "homogcl/cluster.hpp"
#include "homogcl/encoder.hpp"
#include "homogcl/loss.hpp"
#include "homogcl/optim.hpp"

namespace homogcl {

enum class LossMode { Grace, HomoGcl, HomoGclHd, Bgrl, BgrlHomoGcl };

inline const char* to_string(LossMode m) {
    switch (m) {
        case LossMode::Grace: return "grace";
        case LossMode::HomoGcl: return "homogcl";
        case LossMode::HomoGclHd: return "homogcl_hd";
        case LossMode::Bgrl: return "bgrl";
        case LossMode::BgrlHomoGcl: return "bgrl_homogcl";
    }
    return "?";
}

inline LossMode loss_mode_from_string(const std::string& s) {
    if (s == "grace") return LossMode::Grace;
    if (s == "homogcl") return LossMode::HomoGcl;
    if (s == "homogcl_hd") return LossMode::HomoGclHd;
    if (s == "bgrl") return LossMode::Bgrl;
    if (s == "bgrl_homogcl") return LossMode::BgrlHomoGcl;
    fail<ConfigError>("unknown loss mode '", s, "'");
}

inline bool is_bgrl_mode(LossMode m) {
    return m == LossMode::Bgrl || m == LossMode::BgrlHomoGcl;
}
inline bool uses_clustering(LossMode m) {
    return m == LossMode::HomoGcl || m == LossMode::HomoGclHd || m == LossMode::BgrlHomoGcl;
}

struct ClusterConfig {
    std::size_t k = 10;
    std::size_t max_iters = 50;
    double sigma2 = 0.0;  // 0 means data-scaled (mean squared distance to centroid)
    std::size_t refresh_every = 1;
    bool warm_start = true;
};

struct TrainConfig {
    std::size_t epochs = 400;
    double lr = 1e-3;
    double weight_decay = 1e-5;
    std::size_t hidden_dim = 256;
    std::size_t out_dim = 128;
    std::size_t layers = 2;
    bool projection_head = true;
    bool mp_ablation = false;
    AugmentConfig aug;
    ClusterConfig cluster;
    LossMode mode = LossMode::HomoGcl;
    double tau = 0.5;
    double alpha = 1.0;
    double beta = 0.0;  // only meaningful in bgrl_homogcl mode
    double ema_tau = 0.99;
    std::uint64_t seed = 1;
    std::size_t snapshot_every = 0;  // 0 disables periodic snapshots

    void validate() const {
        if (epochs == 0) fail<ConfigError>("train.epochs must be positive");
        if (lr <= 0.0) fail<ConfigError>("train.lr must be positive");
        if (tau <= 0.0) fail<ConfigError>("loss.tau must be positive");
        if (ema_tau < 0.0 || ema_tau > 1.0) fail<ConfigError>("train.ema_tau out of [0,1]");
        if (cluster.refresh_every == 0) fail<ConfigError>("cluster.refresh_every must be >= 1");
        aug.validate();
        if (mode == LossMode::Grace && (alpha != 0.0 || beta != 0.0))
            fail<ConfigError>("grace mode uses neither alpha nor beta; set both to 0");
        if ((mode == LossMode::HomoGcl || mode == LossMode::HomoGclHd) && beta != 0.0)
            fail<ConfigError>("beta is only meaningful in bgrl_homogcl mode; set it to 0");
        if (mode == LossMode::Bgrl && (alpha != 0.0 || beta != 0.0))
            fail<ConfigError>("bgrl mode uses neither alpha nor beta; set both to 0");
    }
};

struct EpochMetrics {
    std::size_t epoch = 0;
    LossBreakdown loss;
    double t_encode_ms = 0.0;
    double t_cluster_ms = 0.0;
    double t_loss_ms = 0.0;
};

struct TrainReport {
    std::vector<EpochMetrics> series;
    DenseMatrix embeddings;       // final encoder output on the un-augmented graph
    EdgeSaliency final_saliency;  // recomputed from the final embeddings (clustering modes)
    std::map<std::size_t, DenseMatrix> snapshots;
    EncoderParams params;                      // final online parameters
    std::vector<DenseMatrix> target_weights;   // bgrl modes only
    std::vector<DenseMatrix> initial_weights;  // encoder weights at init
};

inline const DenseMatrix& snapshot_embeddings(const TrainReport& report, std::size_t epoch) {
    auto it = report.snapshots.find(epoch);
    if (it == report.snapshots.end()) fail<ConfigError>("epoch ", epoch, " was not snapshotted");
    return it->second;
}

namespace detail {

class PhaseTimer {
public:
    void start() { t0_ = std::chrono::steady_clock::now(); }
    double stop_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

// Clustering state carried across epochs (warm starts, refresh cadence).
struct ClusterState {
    std::optional<Centroids> centroids;
    double sigma2 = 0.0;
    EdgeSaliency saliency;
    bool fresh = false;

    void refresh(const DenseMatrix& H, const Graph& g, const ClusterConfig& cfg, bool all_one,
                 RngStream& stream) {
        KmeansResult km = (centroids && cfg.warm_start)
                              ? kmeans_lloyd(H, *centroids, cfg.max_iters)
                              : kmeans(H, cfg.k, cfg.max_iters, stream);
        sigma2 = cfg.sigma2 > 0.0 ? cfg.sigma2 : sigma2_auto(H, km);
        if (all_one) {
            // hard-neighbor variant: every neighbor is a full positive
            saliency.values.assign(g.num_edges(), 1.0);
        } else {
            saliency = homogcl::saliency(gmm_posterior(H, km.centroids, sigma2), g);
        }
        centroids = std::move(km.centroids);
        fresh = true;
    }
};

}  // namespace detail

// Algorithm: per epoch, sample two views, encode the original graph and the
// views with the shared encoder, cluster the original-graph embeddings,
// derive the saliency, assemble the objective, and take one Adam step. The
// BGRL modes keep a gradient-free target encoder updated by EMA.
inline TrainReport train(const Graph& g, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = g.num_nodes();
    Rng rng(cfg.seed);

    RngStream init_stream = rng.stream("init");
    const bool bgrl = is_bgrl_mode(cfg.mode);
    EncoderParams params = init_encoder(g.features().cols(), cfg.hidden_dim, cfg.out_dim,
                                        cfg.layers, cfg.projection_head && !bgrl, init_stream);
    std::vector<DenseMatrix> predictor;
    std::vector<DenseMatrix> target_weights;
    if (bgrl) {
        predictor.push_back(glorot_init(cfg.out_dim, cfg.out_dim, init_stream));
        predictor.push_back(glorot_init(cfg.out_dim, cfg.out_dim, init_stream));
        target_weights = params.weights;
    }

    TrainReport report;
    report.initial_weights = params.weights;

    const CsrMatrix adj0 = cfg.mp_ablation ? identity_adjacency(n) : normalize_adjacency(g);
    AdamState adam_state;
    const AdamConfig adam{.lr = cfg.lr, .weight_decay = cfg.weight_decay};
    detail::ClusterState cluster_state;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        detail::PhaseTimer timer;
        EpochMetrics em;
        em.epoch = epoch;
        try {
            timer.start();
            RngStream s1 = rng.stream("aug/e" + std::to_string(epoch) + "/v1");
            RngStream s2 = rng.stream("aug/e" + std::to_string(epoch) + "/v2");
            const Graph view1 = sample_view(g, cfg.aug, s1);
            const Graph view2 = sample_view(g, cfg.aug, s2);
            const CsrMatrix adj1 = cfg.mp_ablation ? identity_adjacency(n) : normalize_adjacency(view1);
            const CsrMatrix adj2 = cfg.mp_ablation ? identity_adjacency(n) : normalize_adjacency(view2);

            ad::Tape t;
            std::vector<ad::Var> w_vars;
            for (auto& w : params.weights) w_vars.push_back(t.param(w));
            std::vector<ad::Var> proj_vars;
            for (auto& w : params.proj) proj_vars.push_back(t.param(w));
            std::vector<ad::Var> pred_vars;
            for (auto& w : predictor) pred_vars.push_back(t.param(w));

            const bool clustering = uses_clustering(cfg.mode);
            const bool want_snapshot = cfg.snapshot_every > 0 && epoch % cfg.snapshot_every == 0;

            ad::Var obj{};
            ad::Var H{};  // embeddings of the un-augmented graph, on-tape in clustering modes
            DenseMatrix h_value;
            if (!bgrl) {
                ad::Var U = gcn_forward(t, adj1, t.constant(view1.features()), w_vars);
                ad::Var V = gcn_forward(t, adj2, t.constant(view2.features()), w_vars);
                if (clustering) {
                    H = gcn_forward(t, adj0, t.constant(g.features()), w_vars);
                    h_value = t.value(H);
                } else if (want_snapshot) {
                    h_value = gcn_forward_value(adj0, g.features(), params.weights);
                }
                em.t_encode_ms = timer.stop_ms();

                if (clustering) {
                    timer.start();
                    if (epoch % cfg.cluster.refresh_every == 0 || !cluster_state.centroids) {
                        RngStream ks = rng.stream("kmeans/e" + std::to_string(epoch));
                        cluster_state.refresh(h_value, g, cfg.cluster,
                                              cfg.mode == LossMode::HomoGclHd, ks);
                    }
                    em.t_cluster_ms = timer.stop_ms();
                }

                timer.start();
                ad::Var Up = cfg.projection_head ? project(t, U, proj_vars) : U;
                ad::Var Vp = cfg.projection_head ? project(t, V, proj_vars) : V;
                ad::Var l_cont{};
                if (clustering) {
                    l_cont = homogcl_contrastive(t, Up, Vp, cluster_state.saliency, view1, view2,
                                                 cfg.tau);
                    ad::Var R = differentiable_posterior(t, H, *cluster_state.centroids,
                                                         cluster_state.sigma2);
                    ad::Var l_homo = homophily_loss(t, R, g);
                    obj = t.add(t.scalar_mul(l_cont, -1.0), t.scalar_mul(l_homo, cfg.alpha));
                    em.loss.homophily = t.value_scalar(l_homo);
                } else {
                    l_cont = grace_loss(t, Up, Vp, cfg.tau);
                    obj = t.scalar_mul(l_cont, -1.0);
                }
                em.loss.contrastive = t.value_scalar(l_cont);
                em.loss.objective = t.value_scalar(obj);
                em.t_loss_ms = timer.stop_ms();
            } else {
                ad::Var H1o = gcn_forward(t, adj1, t.constant(view1.features()), w_vars);
                ad::Var H2o = gcn_forward(t, adj2, t.constant(view2.features()), w_vars);
                const DenseMatrix H1t = gcn_forward_value(adj1, view1.features(), target_weights);
                const DenseMatrix H2t = gcn_forward_value(adj2, view2.features(), target_weights);
                if (clustering) {
                    // the initial graph goes through the online encoder
                    H = gcn_forward(t, adj0, t.constant(g.features()), w_vars);
                    h_value = t.value(H);
                } else if (want_snapshot) {
                    h_value = gcn_forward_value(adj0, g.features(), params.weights);
                }
                em.t_encode_ms = timer.stop_ms();

                if (clustering) {
                    timer.start();
                    if (epoch % cfg.cluster.refresh_every == 0 || !cluster_state.centroids) {
                        RngStream ks = rng.stream("kmeans/e" + std::to_string(epoch));
                        cluster_state.refresh(h_value, g, cfg.cluster, false, ks);
                    }
                    em.t_cluster_ms = timer.stop_ms();
                }

                timer.start();
                auto predict = [&](ad::Var x) {
                    return t.matmul(t.relu(t.matmul(x, pred_vars[0])), pred_vars[1]);
                };
                ad::Var Z1 = predict(H1o);
                ad::Var Z2 = predict(H2o);
                ad::Var l1 = t.add(bgrl_loss(t, Z1, H2t), bgrl_loss(t, Z2, H1t));
                em.loss.bgrl1 = t.value_scalar(l1);
                if (clustering) {
                    ad::Var R = differentiable_posterior(t, H, *cluster_state.centroids,
                                                         cluster_state.sigma2);
                    ad::Var l_homo = homophily_loss(t, R, g);
                    ad::Var l2 = t.add(bgrl_expanded_loss(t, Z1, H2t, cluster_state.saliency, g),
                                       bgrl_expanded_loss(t, Z2, H1t, cluster_state.saliency, g));
                    obj = t.add(t.add(t.scalar_mul(l1, -1.0), t.scalar_mul(l_homo, cfg.alpha)),
                                t.scalar_mul(l2, -cfg.beta));
                    em.loss.homophily = t.value_scalar(l_homo);
                    em.loss.bgrl2 = t.value_scalar(l2);
                } else {
                    obj = t.scalar_mul(l1, -1.0);
                }
                em.loss.objective = t.value_scalar(obj);
                em.t_loss_ms = timer.stop_ms();
            }

            if (want_snapshot) report.snapshots.emplace(epoch, h_value);

            t.backward(obj);
            std::vector<DenseMatrix*> plist;
            std::vector<ad::Var> vlist;
            for (std::size_t i = 0; i < params.weights.size(); ++i) {
                plist.push_back(&params.weights[i]);
                vlist.push_back(w_vars[i]);
            }
            for (std::size_t i = 0; i < params.proj.size(); ++i) {
                plist.push_back(&params.proj[i]);
                vlist.push_back(proj_vars[i]);
            }
            for (std::size_t i = 0; i < predictor.size(); ++i) {
                plist.push_back(&predictor[i]);
                vlist.push_back(pred_vars[i]);
            }
            std::vector<DenseMatrix> pvals;
            std::vector<DenseMatrix> grads;
            for (std::size_t i = 0; i < plist.size(); ++i) {
                pvals.push_back(*plist[i]);
                grads.push_back(t.grad(vlist[i]));
            }
            adam_step(pvals, grads, adam_state, adam);
            for (std::size_t i = 0; i < plist.size(); ++i) *plist[i] = std::move(pvals[i]);

            if (bgrl) ema_update(params.weights, target_weights, cfg.ema_tau);
        } catch (const NumericError& e) {
            fail<NumericError>("epoch ", epoch, ": ", e.what());
        }
        report.series.push_back(std::move(em));
    }

    report.embeddings = gcn_forward_value(adj0, g.features(), params.weights);
    if (uses_clustering(cfg.mode)) {
        RngStream ks = rng.stream("kmeans/final");
        cluster_state.refresh(report.embeddings, g, cfg.cluster, cfg.mode == LossMode::HomoGclHd,
                              ks);
        report.final_saliency = cluster_state.saliency;
    }
    report.params = std::move(params);
    report.target_weights = std::move(target_weights);
    return report;
}

}  // namespace homogcl
