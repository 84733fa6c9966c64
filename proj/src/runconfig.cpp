#include "msnet/runconfig.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "msnet/errors.hpp"

namespace msnet {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "variant",       "num_blocks",      "pool_stages",
    "channel_widths", "num_classes",    "input_channels",
    "input_h",       "input_w",         "dropout_rate",
    "backward_skip_grad_gate", "loss_weights", "freeze_upsample",
    "base_lr",       "momentum",        "epochs",
    "batch_size",    "seed",            "decay_rate",
    "decay_every_early", "decay_every_late",
    "train_data",    "out_dir"};

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!kKnownKeys.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    RunConfig cfg;
    if (j.contains("variant")) {
        try {
            cfg.arch.variant = variant_from_name(j.at("variant").get<std::string>());
        } catch (const InvalidSpec& e) {
            throw ConfigError(e.what());
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config field 'variant': ") + e.what());
        }
    }
    read_field(j, "num_blocks", cfg.arch.num_blocks);
    read_field(j, "pool_stages", cfg.arch.pool_stages);
    read_field(j, "channel_widths", cfg.arch.channel_widths);
    read_field(j, "num_classes", cfg.arch.num_classes);
    read_field(j, "input_channels", cfg.arch.input_channels);
    read_field(j, "input_h", cfg.arch.input_h);
    read_field(j, "input_w", cfg.arch.input_w);
    read_field(j, "dropout_rate", cfg.arch.dropout_rate);
    read_field(j, "freeze_upsample", cfg.arch.freeze_upsample);
    if (j.contains("backward_skip_grad_gate")) {
        const auto gate = j.at("backward_skip_grad_gate").get<std::string>();
        if (gate == "open")
            cfg.arch.backward_skip_grad_gate = SkipGradGate::Open;
        else if (gate == "closed")
            cfg.arch.backward_skip_grad_gate = SkipGradGate::Closed;
        else
            throw ConfigError("backward_skip_grad_gate must be 'open' or 'closed'");
    }
    if (j.contains("loss_weights")) {
        const auto& lw = j.at("loss_weights");
        if (!lw.is_array() || lw.size() != 2)
            throw ConfigError("loss_weights must be a [master, slave] pair");
        cfg.arch.loss_weights.master = lw[0].get<double>();
        cfg.arch.loss_weights.slave = lw[1].get<double>();
    }

    read_field(j, "base_lr", cfg.train.base_lr);
    read_field(j, "momentum", cfg.train.momentum);
    read_field(j, "epochs", cfg.train.epochs);
    read_field(j, "batch_size", cfg.train.batch_size);
    read_field(j, "seed", cfg.train.seed);
    read_field(j, "decay_rate", cfg.train.decay_rate);
    read_field(j, "decay_every_early", cfg.train.decay_every_early);
    read_field(j, "decay_every_late", cfg.train.decay_every_late);

    read_field(j, "train_data", cfg.train_data);
    read_field(j, "out_dir", cfg.out_dir);

    try {
        cfg.arch.validate();
        cfg.train.validate();
    } catch (const InvalidSpec& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

std::string serialize_run_config(const RunConfig& cfg) {
    json j;
    j["variant"] = variant_name(cfg.arch.variant);
    j["num_blocks"] = cfg.arch.num_blocks;
    j["pool_stages"] = cfg.arch.pool_stages;
    j["channel_widths"] = cfg.arch.channel_widths;
    j["num_classes"] = cfg.arch.num_classes;
    j["input_channels"] = cfg.arch.input_channels;
    j["input_h"] = cfg.arch.input_h;
    j["input_w"] = cfg.arch.input_w;
    j["dropout_rate"] = cfg.arch.dropout_rate;
    j["backward_skip_grad_gate"] =
        cfg.arch.backward_skip_grad_gate == SkipGradGate::Open ? "open" : "closed";
    j["loss_weights"] = {cfg.arch.loss_weights.master, cfg.arch.loss_weights.slave};
    j["freeze_upsample"] = cfg.arch.freeze_upsample;
    j["base_lr"] = cfg.train.base_lr;
    j["momentum"] = cfg.train.momentum;
    j["epochs"] = cfg.train.epochs;
    j["batch_size"] = cfg.train.batch_size;
    j["seed"] = cfg.train.seed;
    j["decay_rate"] = cfg.train.decay_rate;
    j["decay_every_early"] = cfg.train.decay_every_early;
    j["decay_every_late"] = cfg.train.decay_every_late;
    j["train_data"] = cfg.train_data;
    j["out_dir"] = cfg.out_dir;
    return j.dump(2) + "\n";
}

}  // namespace msnet
