#pragma once

#include <cstdint>
#include <string>

#include "dip/params.hpp"
#include "dip/splits.hpp"
#include "dip/synthetic.hpp"
#include "dip/toml.hpp"

namespace dip {

// A full run description. Parsed from TOML, validated up front, and written
// back verbatim into the output directory so every run is reproducible from
// its artifacts.
struct RunConfig {
    Task task = Task::NodeClassification;
    std::uint64_t seed = 1;
    std::string data_dir;   // bundle path; empty means inline synthetic data
    std::string out_dir = "out";
    bool has_synth = false;
    SynthConfig synth;
    ModelConfig model;
    // training
    int epochs = 0;  // 0 -> task default (200 NC, 100 LP)
    double lr = 1e-3;
    int eval_every = 10;
    int patience = 30;  // early stop after this many epochs without improvement
    int eval_negatives = 1000;
    Ratios lp_ratios = {0.8, 0.1, 0.1};
    Ratios nc_ratios = {0.6, 0.1, 0.3};

    int effective_epochs() const {
        if (epochs > 0) return epochs;
        return task == Task::NodeClassification ? 200 : 100;
    }

    Ratios ratios() const { return task == Task::LinkPrediction ? lp_ratios : nc_ratios; }
};

namespace detail {

inline Ratios ratios_from(const toml::Table& t, const std::string& key, Ratios fallback) {
    if (!t.has(key)) return fallback;
    auto arr = t.get_array(key);
    if (arr.size() != 3) throw ConfigError(key + ": expected 3 ratios");
    return {arr[0], arr[1], arr[2]};
}

}  // namespace detail

inline RunConfig run_config_from_toml(const toml::Table& t) {
    RunConfig cfg;
    cfg.task = task_from_string(t.get_str("run.task", "node-classification"));
    cfg.seed = static_cast<std::uint64_t>(t.get_int("run.seed", 1));
    cfg.out_dir = t.get_str("run.out", "out");
    cfg.data_dir = t.get_str("data.bundle", "");

    if (t.has("synth.n") || cfg.data_dir.empty()) {
        cfg.has_synth = true;
        cfg.synth.n = static_cast<int>(t.get_int("synth.n", cfg.synth.n));
        cfg.synth.blocks = static_cast<int>(t.get_int("synth.blocks", cfg.synth.blocks));
        cfg.synth.p_in = t.get_double("synth.p_in", cfg.synth.p_in);
        cfg.synth.p_out = t.get_double("synth.p_out", cfg.synth.p_out);
        cfg.synth.d_v = static_cast<int>(t.get_int("synth.d_v", cfg.synth.d_v));
        cfg.synth.d_t = static_cast<int>(t.get_int("synth.d_t", cfg.synth.d_t));
        cfg.synth.signal_split = t.get_double("synth.signal_split", cfg.synth.signal_split);
        cfg.synth.noise_sigma = t.get_double("synth.noise_sigma", cfg.synth.noise_sigma);
        cfg.synth.seed = static_cast<std::uint64_t>(t.get_int("synth.seed", static_cast<std::int64_t>(cfg.seed)));
        cfg.synth.validate();
    }

    cfg.model.d_s = static_cast<int>(t.get_int("model.d_s", cfg.model.d_s));
    cfg.model.tau = static_cast<int>(t.get_int("model.tau", cfg.model.tau));
    cfg.model.L = static_cast<int>(t.get_int("model.L", cfg.model.L));
    cfg.model.n_p_v = static_cast<int>(t.get_int("model.n_p_v", cfg.model.n_p_v));
    cfg.model.n_p_t = static_cast<int>(t.get_int("model.n_p_t", cfg.model.n_p_t));
    cfg.model.normalize = normalize_from_string(t.get_str("model.normalize", "row-softmax"));
    cfg.model.seed = cfg.seed;
    cfg.model.flags.use_visual_pseudo = t.get_bool("model.use_visual_pseudo", true);
    cfg.model.flags.use_textual_pseudo = t.get_bool("model.use_textual_pseudo", true);
    cfg.model.flags.use_local = t.get_bool("model.use_local", true);
    cfg.model.flags.use_global = t.get_bool("model.use_global", true);
    cfg.model.flags.use_cross_modal = t.get_bool("model.use_cross_modal", true);

    cfg.epochs = static_cast<int>(t.get_int("train.epochs", 0));
    cfg.lr = t.get_double("train.lr", 1e-3);
    cfg.eval_every = static_cast<int>(t.get_int("train.eval_every", 10));
    cfg.patience = static_cast<int>(t.get_int("train.patience", 30));
    cfg.eval_negatives = static_cast<int>(t.get_int("train.eval_negatives", 1000));
    cfg.lp_ratios = detail::ratios_from(t, "train.lp_ratios", cfg.lp_ratios);
    cfg.nc_ratios = detail::ratios_from(t, "train.nc_ratios", cfg.nc_ratios);

    if (cfg.epochs < 0 || cfg.eval_every < 1 || cfg.patience < 1 || cfg.eval_negatives < 1)
        throw ConfigError("train: epochs >= 0, eval_every/patience/eval_negatives >= 1");
    if (cfg.lr <= 0 && cfg.lr != 0.0) throw ConfigError("train.lr must be >= 0");
    return cfg;
}

// The resolved form written into the output directory.
inline toml::Table run_config_to_toml(const RunConfig& cfg) {
    toml::Table t;
    t.set("run.task", to_string(cfg.task));
    t.set("run.seed", static_cast<std::int64_t>(cfg.seed));
    t.set("run.out", cfg.out_dir);
    if (!cfg.data_dir.empty()) t.set("data.bundle", cfg.data_dir);
    if (cfg.has_synth) {
        t.set("synth.n", static_cast<std::int64_t>(cfg.synth.n));
        t.set("synth.blocks", static_cast<std::int64_t>(cfg.synth.blocks));
        t.set("synth.p_in", cfg.synth.p_in);
        t.set("synth.p_out", cfg.synth.p_out);
        t.set("synth.d_v", static_cast<std::int64_t>(cfg.synth.d_v));
        t.set("synth.d_t", static_cast<std::int64_t>(cfg.synth.d_t));
        t.set("synth.signal_split", cfg.synth.signal_split);
        t.set("synth.noise_sigma", cfg.synth.noise_sigma);
        t.set("synth.seed", static_cast<std::int64_t>(cfg.synth.seed));
    }
    t.set("model.d_s", static_cast<std::int64_t>(cfg.model.d_s));
    t.set("model.tau", static_cast<std::int64_t>(cfg.model.tau));
    t.set("model.L", static_cast<std::int64_t>(cfg.model.L));
    t.set("model.n_p_v", static_cast<std::int64_t>(cfg.model.n_p_v));
    t.set("model.n_p_t", static_cast<std::int64_t>(cfg.model.n_p_t));
    t.set("model.normalize", to_string(cfg.model.normalize));
    t.set("model.use_visual_pseudo", cfg.model.flags.use_visual_pseudo);
    t.set("model.use_textual_pseudo", cfg.model.flags.use_textual_pseudo);
    t.set("model.use_local", cfg.model.flags.use_local);
    t.set("model.use_global", cfg.model.flags.use_global);
    t.set("model.use_cross_modal", cfg.model.flags.use_cross_modal);
    t.set("train.epochs", static_cast<std::int64_t>(cfg.effective_epochs()));
    t.set("train.lr", cfg.lr);
    t.set("train.eval_every", static_cast<std::int64_t>(cfg.eval_every));
    t.set("train.patience", static_cast<std::int64_t>(cfg.patience));
    t.set("train.eval_negatives", static_cast<std::int64_t>(cfg.eval_negatives));
    t.set("train.lp_ratios", std::vector<double>{cfg.lp_ratios[0], cfg.lp_ratios[1], cfg.lp_ratios[2]});
    t.set("train.nc_ratios", std::vector<double>{cfg.nc_ratios[0], cfg.nc_ratios[1], cfg.nc_ratios[2]});
    return t;
}

}  // namespace dip
