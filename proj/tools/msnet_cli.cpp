// Command-line front end: data generation, training, evaluation, prediction
// export, gradient checking and schedule inspection.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "msnet/arch.hpp"
#include "msnet/data.hpp"
#include "msnet/errors.hpp"
#include "msnet/graph.hpp"
#include "msnet/metrics.hpp"
#include "msnet/runconfig.hpp"
#include "msnet/serialize.hpp"
#include "msnet/train.hpp"

namespace fs = std::filesystem;
using namespace msnet;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitShape = 4;
constexpr int kExitGradcheck = 5;

constexpr double kGradTolerance = 1e-4;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw IoError("write failed for " + path);
}

int cmd_gen_data(const std::string& out, int resolution, int count, std::uint64_t seed) {
    const Dataset ds = gen_context_shapes(resolution, count, seed);
    save_dataset(ds, out);
    std::cout << "samples=" << ds.samples.size() << " bytes="
              << msds_file_size(ds.samples.size(), ds.samples[0].image.c, ds.samples[0].image.h,
                                ds.samples[0].image.w)
              << "\n";
    return 0;
}

int cmd_train(const std::string& config_path) {
    const RunConfig cfg = load_run_config(config_path);
    if (cfg.train_data.empty()) throw ConfigError("train: config must set train_data");
    const Dataset ds = load_dataset(cfg.train_data);

    fs::create_directories(cfg.out_dir);
    const std::string resolved = serialize_run_config(cfg);
    write_text(cfg.out_dir + "/config.json", resolved);

    TrainResult result = train(cfg.arch, cfg.train, ds);
    write_text(cfg.out_dir + "/history.csv", format_history(result.history));
    save_weights(result.model.params, resolved, cfg.out_dir + "/weights.mswt");

    double total_ms = 0.0;
    for (const auto& e : result.history.epochs) total_ms += e.wall_ms;
    std::cout << "epochs=" << result.history.epochs.size() << " wall_ms=" << total_ms << "\n";
    if (result.history.has_metrics)
        std::cout << format_metrics_line(result.history.final_metrics) << "\n";
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& weights_path,
             const std::string& data_path) {
    const RunConfig cfg = load_run_config(config_path);
    const Dataset ds = load_dataset(data_path);
    BuiltModel model = build(cfg.arch);
    const LoadedWeights lw = load_weights(weights_path);
    assign_weights(model.params, lw.store);
    const MetricsReport report = evaluate(model, ds);
    std::cout << format_metrics_line(report) << "\n";
    return 0;
}

int cmd_predict(const std::string& weights_path, const std::string& data_path,
                const std::string& out_dir) {
    const LoadedWeights lw = load_weights(weights_path);
    const RunConfig cfg = parse_run_config(lw.config_json);
    const Dataset ds = load_dataset(data_path);
    BuiltModel model = build(cfg.arch);
    assign_weights(model.params, lw.store);

    fs::create_directories(out_dir);
    const ExecutionPlan plan = topo_schedule(model.graph);
    char name[32];
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const Sample& s = ds.samples[i];
        const ActivationTape tape =
            forward(model.graph, plan, s.image, s.labels, model.params, Mode::Eval, 0);
        const LabelMap pred = predict_labels(tape.records[model.graph.master_score].value);
        std::snprintf(name, sizeof(name), "/pred_%04zu.pgm", i);
        export_label_map(pred, 0, ds.num_classes, out_dir + name);
    }
    std::cout << "wrote " << ds.samples.size() << " predictions to " << out_dir << "\n";
    return 0;
}

int cmd_gradcheck(const std::string& variant, std::uint64_t seed) {
    ArchConfig cfg;
    cfg.variant = variant_from_name(variant);
    BuiltModel model = build(cfg);
    fill_params(model.params, seed, SkipInit::Random);
    const ExecutionPlan plan = topo_schedule(model.graph);

    const Dataset ds = gen_context_shapes(cfg.input_h, 1, seed);
    const Sample& s = ds.samples[0];
    const GradCheckReport report =
        grad_check(model.graph, plan, model.params, s.image, s.labels, 1e-5, 200, seed,
                   cfg.loss_weights, cfg.backward_skip_grad_gate);

    std::printf("max_rel_error=%.3e worst_slot=%s analytic=%.6e numeric=%.6e\n",
                report.max_rel_error, report.worst_slot.c_str(), report.worst_analytic,
                report.worst_numeric);
    return report.max_rel_error < kGradTolerance ? 0 : kExitGradcheck;
}

int cmd_inspect_schedule(const std::string& variant) {
    ArchConfig cfg;
    cfg.variant = variant_from_name(variant);
    const BuiltModel model = build(cfg);
    const ExecutionPlan plan = topo_schedule(model.graph);
    std::string out;
    for (int id : plan.order) {
        const Node& n = model.graph.nodes[id];
        out += role_letter(n.role);
        out += ':' + std::to_string(n.block_index) + ':' + n.name + '\n';
    }
    std::fputs(out.c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Master-Slave fully convolutional networks at desk scale"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic MSDS dataset");
    std::string gen_out;
    int gen_resolution = 64;
    int gen_count = 8;
    std::uint64_t gen_seed = 1;
    gen->add_option("--out", gen_out, "output MSDS path")->required();
    gen->add_option("--resolution", gen_resolution, "square image size, multiple of 32");
    gen->add_option("--count", gen_count, "number of samples");
    gen->add_option("--seed", gen_seed, "generator seed");

    auto* tr = app.add_subcommand("train", "train a variant from a JSON config");
    std::string tr_config;
    tr->add_option("--config", tr_config, "run config JSON")->required();

    auto* ev = app.add_subcommand("eval", "evaluate weights on a dataset");
    std::string ev_config, ev_weights, ev_data;
    ev->add_option("--config", ev_config, "run config JSON")->required();
    ev->add_option("--weights", ev_weights, "MSWT weights file")->required();
    ev->add_option("--data", ev_data, "MSDS dataset")->required();

    auto* pr = app.add_subcommand("predict", "write PGM predictions for a dataset");
    std::string pr_weights, pr_data, pr_out;
    pr->add_option("--weights", pr_weights, "MSWT weights file")->required();
    pr->add_option("--data", pr_data, "MSDS dataset")->required();
    pr->add_option("--out-dir", pr_out, "output directory")->required();

    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::string gc_variant = "FCN8s";
    std::uint64_t gc_seed = 1;
    gc->add_option("--variant", gc_variant, "architecture variant");
    gc->add_option("--seed", gc_seed, "seed");

    auto* is = app.add_subcommand("inspect-schedule", "print the execution plan");
    std::string is_variant = "FCN8s";
    is->add_option("--variant", is_variant, "architecture variant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitConfig : 0;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gen_out, gen_resolution, gen_count, gen_seed);
        if (tr->parsed()) return cmd_train(tr_config);
        if (ev->parsed()) return cmd_eval(ev_config, ev_weights, ev_data);
        if (pr->parsed()) return cmd_predict(pr_weights, pr_data, pr_out);
        if (gc->parsed()) return cmd_gradcheck(gc_variant, gc_seed);
        if (is->parsed()) return cmd_inspect_schedule(is_variant);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidSpec& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ShapeMismatch& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return kExitShape;
    } catch (const CyclicGraph& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return kExitShape;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
