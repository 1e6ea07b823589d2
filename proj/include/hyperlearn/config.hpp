#pragma once

// Experiment configuration: a flat key = value text format with presets
// mirroring the reference protocols, CLI overrides, strict unknown-key
// rejection, and a canonical echo used for replayable manifests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hyperlearn/common.hpp"
#include "hyperlearn/dataset.hpp"
#include "hyperlearn/loop.hpp"

namespace hyperlearn {

struct ExperimentConfig {
    std::string dataset;        // two_gaussians | two_moons_like | mnist_idx
    std::string images_path;    // mnist_idx only
    std::string labels_path;
    std::size_t synthetic_n = 2000;
    double synthetic_noise = 1.0;
    SplitSpec split_spec;
    std::vector<std::size_t> hidden = {64, 32};
    MetaConfig meta;
    BatchSizeCodec codec;
    std::string out_dir = "runs";
    bool emit_svg = false;

    // canonical full key set; the manifest echoes this and can be re-parsed
    std::map<std::string, std::string> resolved;
};

namespace cfg_detail {

inline const std::map<std::string, std::map<std::string, std::string>>& presets() {
    static const std::map<std::string, std::map<std::string, std::string>> table = {
        {"stochastic_cifar_like",
         {{"zeta_phi", "0.02"},
          {"zeta_alpha", "0.05"},
          {"dataset", "two_gaussians"},
          {"dataset.n", "4000"},
          {"scheduler", "arbiter"},
          {"eta", "0.1"},
          {"b0", "128"},
          {"epochs", "30"},
          {"optimizer", "sgd"}}},
        {"non_stochastic_cifar_like",
         {{"zeta_phi", "0.02"},
          {"zeta_alpha", "0.05"},
          {"dataset", "two_gaussians"},
          {"dataset.n", "4000"},
          {"scheduler", "arbiter"},
          {"eta", "0.01"},
          {"b0", "400"},
          {"epochs", "30"},
          {"optimizer", "sgd"}}},
        {"milestone_hybrid",
         {{"zeta_phi", "0.02"},
          {"zeta_alpha", "0.05"},
          {"dataset", "two_gaussians"},
          {"dataset.n", "4000"},
          {"scheduler", "hybrid"},
          {"eta", "0.05"},
          {"b0", "64"},
          {"epochs", "120"},
          {"milestones", "25:128,50:256,100:512"},
          {"optimizer", "sgd"}}},
        {"hd_co_adapt",
         {{"zeta_phi", "0.02"},
          {"zeta_alpha", "0.05"},
          {"dataset", "two_gaussians"},
          {"dataset.n", "4000"},
          {"scheduler", "arbiter+hd"},
          {"optimizer", "sgdhd"},
          {"eta", "0.1"},
          {"beta_hyper", "1e-4"},
          {"b0", "128"},
          {"epochs", "30"}}},
        {"hd_baseline",
         {{"dataset", "two_gaussians"},
          {"dataset.n", "4000"},
          {"scheduler", "constant"},
          {"optimizer", "sgdhd"},
          {"eta", "0.1"},
          {"beta_hyper", "1e-4"},
          {"b0", "128"},
          {"epochs", "30"}}},
    };
    return table;
}

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "preset",      "dataset",    "dataset.images", "dataset.labels", "dataset.n",
        "dataset.noise", "split.train", "split.val",   "split.test",     "split.seed",
        "model.hidden", "scheduler",  "optimizer",     "epochs",         "b0",
        "eta",          "beta_hyper", "n_samples",     "n_learn",        "zeta_phi",
        "zeta_alpha",   "val_batch",  "warmup",        "milestones",     "b_min",
        "b_max",        "seed",       "out",           "emit_svg",
    };
    return keys;
}

inline bool key_known(const std::string& k) {
    for (const auto& known : known_keys()) {
        if (k == known) return true;
    }
    return false;
}

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::size_t parse_size(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size() || x < 0) throw std::invalid_argument(v);
        return static_cast<std::size_t>(x);
    } catch (const std::exception&) {
        throw validation_error("config: key '" + key + "' needs a non-negative integer, got '" +
                               v + "'");
    }
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw validation_error("config: key '" + key + "' needs a number, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw validation_error("config: key '" + key + "' needs true/false, got '" + v + "'");
}

inline std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_size(key, item));
    }
    if (out.empty()) throw validation_error("config: key '" + key + "' is empty");
    return out;
}

// "25:128,50:256" -> {(25,128),(50,256)}
inline std::vector<std::pair<std::size_t, std::size_t>> parse_milestones(const std::string& key,
                                                                         const std::string& v) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw validation_error("config: key '" + key + "' entries need epoch:B, got '" +
                                   item + "'");
        }
        out.push_back({parse_size(key, trim(item.substr(0, colon))),
                       parse_size(key, trim(item.substr(colon + 1)))});
    }
    return out;
}

inline std::string format_milestones(const std::vector<std::pair<std::size_t, std::size_t>>& m) {
    std::string out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(m[i].first) + ":" + std::to_string(m[i].second);
    }
    return out;
}

inline std::string format_size_list(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace cfg_detail

// Parses key = value lines; '#' starts a comment. Unknown keys are rejected.
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = cfg_detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw validation_error("config: line " + std::to_string(lineno) +
                                   " is not key = value: '" + line + "'");
        }
        const std::string key = cfg_detail::trim(line.substr(0, eq));
        const std::string value = cfg_detail::trim(line.substr(eq + 1));
        if (!cfg_detail::key_known(key)) {
            throw validation_error("config: unknown key '" + key + "'");
        }
        kv[key] = value;
    }
    return kv;
}

// Resolution order: defaults < preset < file < overrides (CLI flags).
inline ExperimentConfig resolve_config(std::map<std::string, std::string> kv,
                                       const std::map<std::string, std::string>& overrides) {
    for (const auto& [k, v] : overrides) {
        if (!cfg_detail::key_known(k)) throw validation_error("config: unknown key '" + k + "'");
        kv[k] = v;
    }
    if (auto it = kv.find("preset"); it != kv.end()) {
        const auto& table = cfg_detail::presets();
        const auto preset = table.find(it->second);
        if (preset == table.end()) {
            throw validation_error("config: unknown preset '" + it->second + "'");
        }
        for (const auto& [k, v] : preset->second) {
            kv.emplace(k, v);  // keeps explicit settings
        }
    }
    if (!kv.count("dataset")) {
        throw validation_error("config: missing required key 'dataset'");
    }

    ExperimentConfig cfg;
    using namespace cfg_detail;
    auto take = [&](const char* key, auto parse, auto& dest) {
        if (auto it = kv.find(key); it != kv.end()) dest = parse(key, it->second);
    };
    cfg.dataset = kv.at("dataset");
    if (cfg.dataset != "two_gaussians" && cfg.dataset != "two_moons_like" &&
        cfg.dataset != "noisy_linear_regression" && cfg.dataset != "mnist_idx") {
        throw validation_error("config: key 'dataset' has unknown value '" + cfg.dataset + "'");
    }
    if (auto it = kv.find("dataset.images"); it != kv.end()) cfg.images_path = it->second;
    if (auto it = kv.find("dataset.labels"); it != kv.end()) cfg.labels_path = it->second;
    take("dataset.n", parse_size, cfg.synthetic_n);
    take("dataset.noise", parse_double, cfg.synthetic_noise);
    take("split.train", parse_double, cfg.split_spec.train_fraction);
    take("split.val", parse_double, cfg.split_spec.val_fraction);
    take("split.test", parse_double, cfg.split_spec.test_fraction);
    if (auto it = kv.find("split.seed"); it != kv.end()) {
        cfg.split_spec.seed = parse_size("split.seed", it->second);
    }
    if (auto it = kv.find("model.hidden"); it != kv.end()) {
        cfg.hidden = parse_size_list("model.hidden", it->second);
    }
    if (auto it = kv.find("scheduler"); it != kv.end()) {
        cfg.meta.scheduler = scheduler_from_string(it->second);
    }
    if (auto it = kv.find("optimizer"); it != kv.end()) {
        cfg.meta.optimizer = opt_kind_from_string(it->second);
    }
    take("epochs", parse_size, cfg.meta.epochs);
    take("b0", parse_size, cfg.meta.b0);
    take("eta", parse_double, cfg.meta.eta);
    take("beta_hyper", parse_double, cfg.meta.beta_hyper);
    take("n_samples", parse_size, cfg.meta.n_samples);
    take("n_learn", parse_size, cfg.meta.n_learn);
    take("zeta_phi", parse_double, cfg.meta.zeta_phi);
    take("zeta_alpha", parse_double, cfg.meta.zeta_alpha);
    take("val_batch", parse_size, cfg.meta.val_batch);
    take("warmup", parse_size, cfg.meta.warmup_epochs);
    if (auto it = kv.find("milestones"); it != kv.end()) {
        cfg.meta.milestones = parse_milestones("milestones", it->second);
    }
    take("b_min", parse_size, cfg.codec.b_min);
    take("b_max", parse_size, cfg.codec.b_max);
    if (auto it = kv.find("seed"); it != kv.end()) {
        cfg.meta.seed = parse_size("seed", it->second);
    }
    if (auto it = kv.find("out"); it != kv.end()) cfg.out_dir = it->second;
    take("emit_svg", parse_bool, cfg.emit_svg);

    if (cfg.dataset == "mnist_idx") {
        if (cfg.images_path.empty() || cfg.labels_path.empty()) {
            throw validation_error(
                "config: dataset mnist_idx needs 'dataset.images' and 'dataset.labels'");
        }
        for (const std::string* p : {&cfg.images_path, &cfg.labels_path}) {
            if (!std::filesystem::exists(*p)) {
                throw validation_error("config: referenced path does not exist: " + *p);
            }
        }
    }
    cfg.meta.validate();
    cfg.codec.check();

    cfg.resolved = {
        {"dataset", cfg.dataset},
        {"dataset.n", std::to_string(cfg.synthetic_n)},
        {"dataset.noise", format_double(cfg.synthetic_noise)},
        {"split.train", format_double(cfg.split_spec.train_fraction)},
        {"split.val", format_double(cfg.split_spec.val_fraction)},
        {"split.test", format_double(cfg.split_spec.test_fraction)},
        {"split.seed", std::to_string(cfg.split_spec.seed)},
        {"model.hidden", format_size_list(cfg.hidden)},
        {"scheduler", to_string(cfg.meta.scheduler)},
        {"optimizer", to_string(cfg.meta.optimizer)},
        {"epochs", std::to_string(cfg.meta.epochs)},
        {"b0", std::to_string(cfg.meta.b0)},
        {"eta", format_double(cfg.meta.eta)},
        {"beta_hyper", format_double(cfg.meta.beta_hyper)},
        {"n_samples", std::to_string(cfg.meta.n_samples)},
        {"n_learn", std::to_string(cfg.meta.n_learn)},
        {"zeta_phi", format_double(cfg.meta.zeta_phi)},
        {"zeta_alpha", format_double(cfg.meta.zeta_alpha)},
        {"val_batch", std::to_string(cfg.meta.val_batch)},
        {"warmup", std::to_string(cfg.meta.warmup_epochs)},
        {"b_min", std::to_string(cfg.codec.b_min)},
        {"b_max", std::to_string(cfg.codec.b_max)},
        {"seed", std::to_string(cfg.meta.seed)},
        {"out", cfg.out_dir},
        {"emit_svg", cfg.emit_svg ? "true" : "false"},
    };
    if (!cfg.meta.milestones.empty()) {
        cfg.resolved["milestones"] = format_milestones(cfg.meta.milestones);
    }
    if (!cfg.images_path.empty()) cfg.resolved["dataset.images"] = cfg.images_path;
    if (!cfg.labels_path.empty()) cfg.resolved["dataset.labels"] = cfg.labels_path;
    return cfg;
}

inline ExperimentConfig parse_config(const std::optional<std::string>& path,
                                     const std::map<std::string, std::string>& overrides = {}) {
    std::map<std::string, std::string> kv;
    if (path) kv = parse_config_file(*path);
    return resolve_config(std::move(kv), overrides);
}

// Materializes the configured dataset and splits it into a RunSetup.
inline RunSetup build_run_setup(const ExperimentConfig& cfg) {
    Dataset full;
    if (cfg.dataset == "mnist_idx") {
        full = load_idx(cfg.images_path, cfg.labels_path);
    } else {
        SyntheticOptions opt;
        opt.noise = cfg.synthetic_noise;
        full = make_synthetic(cfg.dataset, cfg.synthetic_n, cfg.split_spec.seed, opt);
    }
    if (full.regression()) {
        throw validation_error("config: regression datasets cannot drive the training loop");
    }
    const SplitIndices idx = split(full.size(), cfg.split_spec);
    RunSetup setup;
    setup.train = gather(full, idx.train);
    setup.val = gather(full, idx.val);
    setup.test = gather(full, idx.test);
    // splits inherit the full label space even if a class is absent locally
    setup.train.num_classes = full.num_classes;
    setup.val.num_classes = full.num_classes;
    setup.test.num_classes = full.num_classes;
    setup.meta = cfg.meta;
    setup.codec = cfg.codec;
    setup.hidden_widths = cfg.hidden;
    return setup;
}

}  // namespace hyperlearn
