#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "homogcl/augment.hpp"
#include "homogcl/train.hpp"

namespace homogcl {

// Flat dotted-key = value configuration. Keys are validated against a fixed
// registry so typos fail loudly. Unset keys resolve to defaults, a few of
// which depend on the loss mode.
class Config {
public:
    static const std::vector<std::string>& known_keys() {
        static const std::vector<std::string> keys = {
            "data.edges", "data.features", "data.labels", "data.split",
            "encoder.hidden_dim", "encoder.out_dim", "encoder.layers",
            "encoder.projection_head", "encoder.mp_ablation",
            "aug.p_e", "aug.p_f", "aug.mask_mode",
            "cluster.k", "cluster.max_iters", "cluster.sigma2", "cluster.refresh_every",
            "cluster.warm_start",
            "loss.mode", "loss.tau", "loss.alpha", "loss.beta",
            "train.epochs", "train.lr", "train.weight_decay", "train.seed",
            "train.snapshot_every", "train.ema_tau",
            "eval.probe_lr", "eval.probe_epochs", "eval.probe_l2", "eval.probe_runs",
            "eval.cluster_runs",
            "split.mode", "split.per_class", "split.val_count", "split.train_frac",
            "split.val_frac", "split.seed",
        };
        return keys;
    }

    static bool is_known(const std::string& key) {
        for (const auto& k : known_keys())
            if (k == key) return true;
        // manifest bookkeeping keys are accepted and ignored on input
        return key.rfind("manifest.", 0) == 0;
    }

    void set(const std::string& key, const std::string& value) {
        if (!is_known(key)) fail<ConfigError>("unknown config key '", key, "'");
        values_[key] = value;
    }

    // "key=value" as passed to --set.
    void set_pair(const std::string& pair) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos) fail<ConfigError>("expected key=value, got '", pair, "'");
        set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) fail<IoError>("cannot open config: ", path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            lineno++;
            const std::string stripped = trim(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                fail<ConfigError>(path, ":", lineno, ": expected key = value");
            set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        }
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    double get_double(const std::string& key, double def) const {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        return parse_double(key, it->second);
    }

    std::size_t get_size(const std::string& key, std::size_t def) const {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size() || v < 0) throw std::invalid_argument("");
            return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            fail<ConfigError>("config key '", key, "': expected a non-negative integer, got '",
                              it->second, "'");
        }
    }

    bool get_bool(const std::string& key, bool def) const {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        fail<ConfigError>("config key '", key, "': expected true/false, got '", it->second, "'");
    }

    const std::map<std::string, std::string>& raw() const { return values_; }

    // Fully resolved training configuration. Unset alpha/beta default by
    // mode so that baseline modes validate cleanly.
    TrainConfig resolve_train() const {
        TrainConfig cfg;
        cfg.mode = loss_mode_from_string(get_string("loss.mode", "homogcl"));
        const bool homo_modes = uses_clustering(cfg.mode);
        cfg.epochs = get_size("train.epochs", 400);
        cfg.lr = get_double("train.lr", 1e-3);
        cfg.weight_decay = get_double("train.weight_decay", 1e-5);
        cfg.seed = get_size("train.seed", 1);
        cfg.snapshot_every = get_size("train.snapshot_every", 0);
        cfg.ema_tau = get_double("train.ema_tau", 0.99);
        cfg.hidden_dim = get_size("encoder.hidden_dim", 256);
        cfg.out_dim = get_size("encoder.out_dim", 128);
        cfg.layers = get_size("encoder.layers", 2);
        cfg.projection_head = get_bool("encoder.projection_head", true);
        cfg.mp_ablation = get_bool("encoder.mp_ablation", false);
        cfg.aug.p_e = get_double("aug.p_e", 0.4);
        cfg.aug.p_f = get_double("aug.p_f", 0.2);
        const std::string mask = get_string("aug.mask_mode", "column");
        if (mask == "column") cfg.aug.mask_mode = MaskMode::Column;
        else if (mask == "entry") cfg.aug.mask_mode = MaskMode::Entry;
        else fail<ConfigError>("aug.mask_mode must be column or entry, got '", mask, "'");
        cfg.cluster.k = get_size("cluster.k", 10);
        cfg.cluster.max_iters = get_size("cluster.max_iters", 50);
        const std::string sigma2 = get_string("cluster.sigma2", "auto");
        cfg.cluster.sigma2 = sigma2 == "auto" ? 0.0 : parse_double("cluster.sigma2", sigma2);
        if (sigma2 != "auto" && cfg.cluster.sigma2 <= 0.0)
            fail<ConfigError>("cluster.sigma2 must be positive or 'auto'");
        cfg.cluster.refresh_every = get_size("cluster.refresh_every", 1);
        cfg.cluster.warm_start = get_bool("cluster.warm_start", true);
        cfg.tau = get_double("loss.tau", 0.5);
        cfg.alpha = get_double("loss.alpha", homo_modes ? 1.0 : 0.0);
        cfg.beta = get_double("loss.beta", cfg.mode == LossMode::BgrlHomoGcl ? 1.0 : 0.0);
        cfg.validate();
        return cfg;
    }

    SplitSpec resolve_split() const {
        SplitSpec spec;
        const std::string mode = get_string("split.mode", "proportions");
        if (mode == "proportions") spec.mode = SplitMode::Proportions;
        else if (mode == "per_class_count") spec.mode = SplitMode::PerClassCount;
        else fail<ConfigError>("split.mode must be proportions or per_class_count");
        spec.train_per_class = get_size("split.per_class", 20);
        spec.val_count = get_size("split.val_count", 500);
        spec.train_frac = get_double("split.train_frac", 0.1);
        spec.val_frac = get_double("split.val_frac", 0.1);
        return spec;
    }

    // All keys materialized with their effective values.
    std::map<std::string, std::string> resolved() const {
        const TrainConfig t = resolve_train();
        std::map<std::string, std::string> out;
        out["data.edges"] = get_string("data.edges", "");
        out["data.features"] = get_string("data.features", "");
        out["data.labels"] = get_string("data.labels", "");
        out["data.split"] = get_string("data.split", "");
        out["encoder.hidden_dim"] = std::to_string(t.hidden_dim);
        out["encoder.out_dim"] = std::to_string(t.out_dim);
        out["encoder.layers"] = std::to_string(t.layers);
        out["encoder.projection_head"] = t.projection_head ? "true" : "false";
        out["encoder.mp_ablation"] = t.mp_ablation ? "true" : "false";
        out["aug.p_e"] = format_double(t.aug.p_e);
        out["aug.p_f"] = format_double(t.aug.p_f);
        out["aug.mask_mode"] = t.aug.mask_mode == MaskMode::Column ? "column" : "entry";
        out["cluster.k"] = std::to_string(t.cluster.k);
        out["cluster.max_iters"] = std::to_string(t.cluster.max_iters);
        out["cluster.sigma2"] =
            t.cluster.sigma2 > 0.0 ? format_double(t.cluster.sigma2) : std::string("auto");
        out["cluster.refresh_every"] = std::to_string(t.cluster.refresh_every);
        out["cluster.warm_start"] = t.cluster.warm_start ? "true" : "false";
        out["loss.mode"] = to_string(t.mode);
        out["loss.tau"] = format_double(t.tau);
        out["loss.alpha"] = format_double(t.alpha);
        out["loss.beta"] = format_double(t.beta);
        out["train.epochs"] = std::to_string(t.epochs);
        out["train.lr"] = format_double(t.lr);
        out["train.weight_decay"] = format_double(t.weight_decay);
        out["train.seed"] = std::to_string(t.seed);
        out["train.snapshot_every"] = std::to_string(t.snapshot_every);
        out["train.ema_tau"] = format_double(t.ema_tau);
        out["eval.probe_lr"] = format_double(get_double("eval.probe_lr", 1e-2));
        out["eval.probe_epochs"] = std::to_string(get_size("eval.probe_epochs", 300));
        out["eval.probe_l2"] = format_double(get_double("eval.probe_l2", 1e-4));
        out["eval.probe_runs"] = std::to_string(get_size("eval.probe_runs", 5));
        out["eval.cluster_runs"] = std::to_string(get_size("eval.cluster_runs", 10));
        const SplitSpec s = resolve_split();
        out["split.mode"] =
            s.mode == SplitMode::Proportions ? "proportions" : "per_class_count";
        out["split.per_class"] = std::to_string(s.train_per_class);
        out["split.val_count"] = std::to_string(s.val_count);
        out["split.train_frac"] = format_double(s.train_frac);
        out["split.val_frac"] = format_double(s.val_frac);
        out["split.seed"] = std::to_string(get_size("split.seed", 1));
        return out;
    }

    static std::string format_double(double v) {
        std::ostringstream oss;
        oss << std::setprecision(17) << v;
        return oss.str();
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument("");
            return x;
        } catch (const std::exception&) {
            fail<ConfigError>("config key '", key, "': expected a real number, got '", v, "'");
        }
    }

    std::map<std::string, std::string> values_;
};

// FNV-1a digest of a file's bytes, hex-encoded; used to pin run inputs.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail<IoError>("cannot open: ", path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    std::ostringstream oss;
    oss << std::hex << h;
    return oss.str();
}

inline constexpr const char* kArtifactVersion = "0.1.0";

// A manifest is itself a loadable config: every key resolved, plus
// manifest.* bookkeeping (version, seed, input digests, output paths).
inline void write_manifest(const Config& cfg, const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& extras) {
    std::ofstream out(path);
    if (!out) fail<IoError>("cannot open for writing: ", path);
    out << "manifest.version = " << kArtifactVersion << "\n";
    for (const auto& [k, v] : extras) out << k << " = " << v << "\n";
    for (const auto& [k, v] : cfg.resolved()) out << k << " = " << v << "\n";
    if (!out) fail<IoError>("write failed: ", path);
}

}  // namespace homogcl
