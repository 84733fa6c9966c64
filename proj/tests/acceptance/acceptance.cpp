// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Usage: acceptance <cli_path> <golden_dir> <work_dir>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "msnet/arch.hpp"
#include "msnet/blocks.hpp"
#include "msnet/data.hpp"
#include "msnet/errors.hpp"
#include "msnet/graph.hpp"
#include "msnet/metrics.hpp"
#include "msnet/rng.hpp"
#include "msnet/train.hpp"

namespace fs = std::filesystem;
using namespace msnet;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli, g_golden, g_work;
int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %2d: %s: %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void criterion(int id, const std::string& name,
               const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = Clock::now();
    bool pass = false;
    std::string detail;
    try {
        std::tie(pass, detail) = body();
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(id, name, pass, detail, std::chrono::duration<double>(Clock::now() - t0).count());
}

int run_cmd(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -2;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

ArchConfig toy_config(Variant v) {
    ArchConfig cfg;
    cfg.variant = v;
    return cfg;  // defaults: widths {4,8,16,16,16,32,32}, 64x64, 3 classes, dropout 0
}

char buf[512];

// ---- criterion 1 ------------------------------------------------------

std::pair<bool, std::string> gradient_suite() {
    const auto t0 = Clock::now();
    const Dataset ds = gen_context_shapes(64, 1, 1);
    std::string detail;
    bool pass = true;
    for (Variant v : all_variants()) {
        BuiltModel m = build(toy_config(v));
        fill_params(m.params, 1, SkipInit::Random);
        const ExecutionPlan plan = topo_schedule(m.graph);
        const GradCheckReport r = grad_check(m.graph, plan, m.params, ds.samples[0].image,
                                             ds.samples[0].labels, 1e-5, 200, 1);
        std::snprintf(buf, sizeof(buf), "%s=%.1e ", variant_name(v), r.max_rel_error);
        detail += buf;
        if (!(r.max_rel_error < 1e-4)) pass = false;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs >= 60.0) {
        pass = false;
        detail += "OVER TIME BUDGET ";
    }
    return {pass, detail};
}

// ---- criterion 2 ------------------------------------------------------

std::vector<std::pair<char, int>> block_completion_order(const Graph& g,
                                                         const ExecutionPlan& plan) {
    std::vector<std::pair<int, std::pair<char, int>>> events;
    for (int L = 1; L <= g.num_blocks; ++L) {
        if (g.slave_block_output[L - 1] >= 0)
            events.push_back({plan.rank[g.slave_block_output[L - 1]], {'S', L}});
        if (g.master_block_output[L - 1] >= 0)
            events.push_back({plan.rank[g.master_block_output[L - 1]], {'M', L}});
    }
    std::sort(events.begin(), events.end());
    std::vector<std::pair<char, int>> out;
    for (const auto& e : events) out.push_back(e.second);
    return out;
}

std::pair<bool, std::string> schedule_correctness() {
    // exact alternation for MSNetB1
    const BuiltModel b1 = build(toy_config(Variant::MSNetB1));
    const ExecutionPlan plan1 = topo_schedule(b1.graph);
    const auto blocks = block_completion_order(b1.graph, plan1);
    std::vector<std::pair<char, int>> expect;
    for (int L = 1; L <= 7; ++L) {
        expect.push_back({'S', L});
        expect.push_back({'M', L});
    }
    if (blocks != expect) return {false, "MSNetB1 block order is not S1,M1,...,S7,M7"};

    // precedence for the P=3 variants
    for (Variant v : {Variant::MSNetB2, Variant::MSNetFB2}) {
        const BuiltModel m = build(toy_config(v));
        const ExecutionPlan plan = topo_schedule(m.graph);
        for (int L = 1; L <= 7; ++L)
            for (int l = L; l <= std::min(L + 2, 7); ++l)
                if (plan.rank[m.graph.slave_block_output[l - 1]] >=
                    plan.rank[m.graph.master_block_output[L - 1]])
                    return {false, std::string(variant_name(v)) + " Master block " +
                                       std::to_string(L) + " not preceded by Slave " +
                                       std::to_string(l)};
    }

    // golden files from the CLI
    std::string detail = "B1 alternates, B2/FB2 precedence holds; goldens: ";
    for (const char* v : {"FCN8s", "MSNetB1", "MSNetB2", "MSNetFB2"}) {
        const std::string out = g_work + "/schedule_" + v + ".txt";
        const int rc = run_cmd(g_cli + " inspect-schedule --variant " + v + " > " + out);
        if (rc != 0) return {false, std::string("inspect-schedule failed for ") + v};
        if (read_file(out) != read_file(g_golden + "/schedule_" + v + ".txt"))
            return {false, std::string("schedule differs from golden for ") + v};
        detail += std::string(v) + " ";
    }
    return {true, detail};
}

// ---- criterion 3 ------------------------------------------------------

std::pair<bool, std::string> cycle_rejection() {
    Graph g;
    g.num_blocks = 3;
    g.num_classes = 2;
    auto mk = [&](OpKind op, const char* name, int block, std::vector<int> inputs) {
        Node n;
        n.id = static_cast<int>(g.nodes.size());
        n.op = op;
        n.name = name;
        n.role = NetworkRole::Master;
        n.block_index = block;
        n.inputs = std::move(inputs);
        g.nodes.push_back(n);
    };
    mk(OpKind::Input, "input", 0, {});
    mk(OpKind::Add, "m/b1/fuse", 1, {0, 3});  // backward skip inside one network
    mk(OpKind::Relu, "m/b2/relu", 2, {1});
    mk(OpKind::Relu, "m/b3/relu", 3, {2});
    try {
        validate_acyclic(g);
        return {false, "cycle was not detected"};
    } catch (const CyclicGraph& e) {
        if (e.cycle.empty()) return {false, "CyclicGraph carries no cycle nodes"};
        std::snprintf(buf, sizeof(buf), "CyclicGraph raised with a %zu-node cycle",
                      e.cycle.size());
        return {true, buf};
    }
}

// ---- criterion 4 ------------------------------------------------------

struct ScalarBlock {
    double w1, b1, w2, b2;
    double operator()(double x) const {
        return std::max(0.0, w2 * std::max(0.0, w1 * x + b1) + b2);
    }
};

BlockSpec scalar_spec(int L) {
    BlockSpec s;
    s.block_index = L;
    s.conv_count = 2;
    s.in_channels = 1;
    s.out_channels = 1;
    s.kernel_size = 1;
    return s;
}

void set_conv(ParamStore& store, const std::string& name, double w, double b) {
    for (auto& slot : store.slots)
        if (slot.name == name) {
            slot.params.weights[0] = w;
            slot.params.bias[0] = b;
            return;
        }
    throw InvalidSpec("no slot " + name);
}

Tensor4 run_to_node(const Graph& g, const ParamStore& store, const Tensor4& image, int node) {
    LabelMap dummy(1, image.h, image.w);
    return forward(g, topo_schedule(g), image, dummy, store, Mode::Eval, 0).records[node].value;
}

std::pair<bool, std::string> equation_conformance() {
    Tensor4 x(1, 1, 2, 2);
    x.data = {0.2, -0.4, 0.6, -0.8};
    const ScalarBlock F{0.5, 0.1, -1.2, 0.3}, Fs{0.35, 0.15, 1.05, 0.1}, Fm{-0.55, 0.3, 0.95, 0.05};
    const ScalarBlock F1{0.4, 0.05, 1.1, 0.02}, F2{-0.6, 0.3, 0.9, 0.1}, F3{0.8, -0.02, 1.3, 0.05};
    double worst = 0.0;
    auto track = [&](double got, double expect) {
        worst = std::max(worst, std::abs(got - expect));
    };

    {  // y_L = F(x_L) + W_L x_L
        NetBuilder b(1, 0, 2, 1, 2, 2);
        b.build_conv_block(NetworkRole::Master, scalar_spec(1), b.input_node());
        b.attach_forward_skips(NetworkRole::Master, 1, 1);
        const int y = b.block_output(NetworkRole::Master, 1);
        auto [g, store] = b.finish();
        set_conv(store, "m/b1/conv1", F.w1, F.b1);
        set_conv(store, "m/b1/conv2", F.w2, F.b2);
        set_conv(store, "m/b1/fskip1/transform", 0.7, -0.05);
        const Tensor4 out = run_to_node(g, store, x, y);
        for (std::size_t e = 0; e < x.data.size(); ++e)
            track(out.data[e], F(x.data[e]) + (0.7 * x.data[e] - 0.05));
    }
    {  // y_3 = F3(x_3) + W_3 x_3 + W_2 x_2 + W_1 x_1
        NetBuilder b(3, 0, 2, 1, 2, 2);
        int cur = b.input_node();
        for (int L = 1; L <= 3; ++L) {
            b.build_conv_block(NetworkRole::Master, scalar_spec(L), cur);
            cur = b.block_output(NetworkRole::Master, L);
            if (L < 3) b.set_block_input(NetworkRole::Master, L + 1, cur);
        }
        b.attach_forward_skips(NetworkRole::Master, 3, 3);
        const int y = b.block_output(NetworkRole::Master, 3);
        auto [g, store] = b.finish();
        const double w[4] = {0, 0.25, -0.5, 0.75}, wb[4] = {0, 0.01, 0.02, 0.03};
        const ScalarBlock* Fl[4] = {nullptr, &F1, &F2, &F3};
        for (int L = 1; L <= 3; ++L) {
            set_conv(store, "m/b" + std::to_string(L) + "/conv1", Fl[L]->w1, Fl[L]->b1);
            set_conv(store, "m/b" + std::to_string(L) + "/conv2", Fl[L]->w2, Fl[L]->b2);
            set_conv(store, "m/b3/fskip" + std::to_string(L) + "/transform", w[L], wb[L]);
        }
        const Tensor4 out = run_to_node(g, store, x, y);
        for (std::size_t e = 0; e < x.data.size(); ++e) {
            const double x1 = x.data[e], x2 = F1(x1), x3 = F2(x2);
            track(out.data[e], F3(x3) + w[1] * x1 + wb[1] + w[2] * x2 + wb[2] + w[3] * x3 + wb[3]);
        }
    }
    {  // y^m = F(x^m + U y^s)
        NetBuilder b(1, 0, 2, 1, 2, 2);
        b.build_conv_block(NetworkRole::Slave, scalar_spec(1), b.input_node());
        const int fused = b.attach_backward_skips(1, 1, b.input_node(), 1);
        b.build_conv_block(NetworkRole::Master, scalar_spec(1), b.input_node(), fused);
        const int y = b.block_output(NetworkRole::Master, 1);
        auto [g, store] = b.finish();
        set_conv(store, "s/b1/conv1", Fs.w1, Fs.b1);
        set_conv(store, "s/b1/conv2", Fs.w2, Fs.b2);
        set_conv(store, "m/b1/conv1", Fm.w1, Fm.b1);
        set_conv(store, "m/b1/conv2", Fm.w2, Fm.b2);
        set_conv(store, "m/b1/bskip1/transform", 0.6, 0.04);
        const Tensor4 out = run_to_node(g, store, x, y);
        for (std::size_t e = 0; e < x.data.size(); ++e)
            track(out.data[e], Fm(x.data[e] + 0.6 * Fs(x.data[e]) + 0.04));
    }
    {  // y^m = F(x^m + U y^s) + W x^m with the unfused x in the forward term
        NetBuilder b(1, 0, 2, 1, 2, 2);
        b.build_conv_block(NetworkRole::Slave, scalar_spec(1), b.input_node());
        b.attach_combined(scalar_spec(1), b.input_node(), 1, 1);
        const int y = b.block_output(NetworkRole::Master, 1);
        auto [g, store] = b.finish();
        set_conv(store, "s/b1/conv1", Fs.w1, Fs.b1);
        set_conv(store, "s/b1/conv2", Fs.w2, Fs.b2);
        set_conv(store, "m/b1/conv1", Fm.w1, Fm.b1);
        set_conv(store, "m/b1/conv2", Fm.w2, Fm.b2);
        set_conv(store, "m/b1/bskip1/transform", 0.5, -0.02);
        set_conv(store, "m/b1/fskip1/transform", 0.65, 0.07);
        const Tensor4 out = run_to_node(g, store, x, y);
        for (std::size_t e = 0; e < x.data.size(); ++e)
            track(out.data[e],
                  Fm(x.data[e] + 0.5 * Fs(x.data[e]) - 0.02) + 0.65 * x.data[e] + 0.07);
    }

    std::snprintf(buf, sizeof(buf), "four fusion closed forms, max abs deviation %.2e", worst);
    return {worst < 1e-12, buf};
}

// ---- criterion 5 ------------------------------------------------------

std::pair<bool, std::string> zero_skip_equivalence() {
    const Dataset ds = gen_context_shapes(64, 1, 11);
    BuiltModel fcn = build(toy_config(Variant::FCN8s));
    fill_params(fcn.params, 3);
    const Tensor4 fcn_score =
        forward(fcn.graph, topo_schedule(fcn.graph), ds.samples[0].image, ds.samples[0].labels,
                fcn.params, Mode::Eval, 0)
            .records[fcn.graph.master_score]
            .value;

    std::string detail = "bitwise equal Master scores: ";
    for (Variant v : {Variant::FCN8sF1, Variant::FCN8sF2, Variant::MSNetB1, Variant::MSNetB2,
                      Variant::MSNetFB1, Variant::MSNetFB2}) {
        BuiltModel m = build(toy_config(v));
        fill_params(m.params, 3);  // W/U stay zero; shared slots draw identically
        const Tensor4 score =
            forward(m.graph, topo_schedule(m.graph), ds.samples[0].image, ds.samples[0].labels,
                    m.params, Mode::Eval, 0)
                .records[m.graph.master_score]
                .value;
        if (score.data != fcn_score.data)
            return {false, std::string(variant_name(v)) + " diverges from FCN8s"};
        detail += std::string(variant_name(v)) + " ";
    }
    return {true, detail};
}

// ---- criterion 6 ------------------------------------------------------

std::pair<bool, std::string> metric_oracle() {
    RngStream rng(17, "acceptance/metrics");
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(4));
        LabelMap pred(1, 8, 8), gt(1, 8, 8);
        for (auto& l : pred.labels) l = static_cast<std::uint8_t>(rng.next_below(k));
        for (auto& l : gt.labels)
            l = rng.next_double() < 0.15 ? kIgnoreLabel
                                         : static_cast<std::uint8_t>(rng.next_below(k));

        MetricsReport rep(k);
        accumulate(rep, pred, gt);

        // brute force from raw pixels
        std::vector<std::vector<long>> cells(k, std::vector<long>(k, 0));
        for (std::size_t e = 0; e < gt.labels.size(); ++e)
            if (gt.labels[e] != kIgnoreLabel) ++cells[gt.labels[e]][pred.labels[e]];
        for (int t = 0; t < k; ++t)
            for (int p = 0; p < k; ++p)
                if (rep.cell(t, p) != static_cast<std::uint64_t>(cells[t][p]))
                    return {false, "confusion mismatch"};

        long total = 0, trace = 0;
        std::vector<long> row(k, 0), col(k, 0);
        for (int t = 0; t < k; ++t)
            for (int p = 0; p < k; ++p) {
                total += cells[t][p];
                row[t] += cells[t][p];
                col[p] += cells[t][p];
                if (t == p) trace += cells[t][p];
            }
        if (total == 0) continue;
        const MetricsReport fin = finalize(rep);
        double ca = 0, iu = 0;
        int ca_n = 0, iu_n = 0;
        for (int i = 0; i < k; ++i) {
            if (row[i] > 0) {
                ca += double(cells[i][i]) / row[i];
                ++ca_n;
            }
            const long uni = row[i] + col[i] - cells[i][i];
            if (uni > 0) {
                iu += double(cells[i][i]) / uni;
                ++iu_n;
            }
        }
        if (std::abs(fin.pa - double(trace) / total) > 1e-12) return {false, "PA mismatch"};
        if (std::abs(fin.ca - (ca_n ? ca / ca_n : 0.0)) > 1e-12) return {false, "CA mismatch"};
        if (std::abs(fin.iu - (iu_n ? iu / iu_n : 0.0)) > 1e-12) return {false, "IU mismatch"};
    }
    return {true, "100 random 8x8 pairs match brute force exactly"};
}

// ---- criterion 7 ------------------------------------------------------

std::pair<bool, std::string> overfit_check() {
    const auto t0 = Clock::now();
    const Dataset ds = gen_context_shapes(64, 4, 7);
    ArchConfig cfg = toy_config(Variant::MSNetFB1);
    TrainConfig tc;
    tc.base_lr = 1e-3;  // the criterion's toy-scale rate
    tc.decay_rate = 0.0;
    tc.batch_size = 1;
    tc.seed = 7;

    BuiltModel model = build(cfg);
    fill_params(model.params, tc.seed);
    const ExecutionPlan plan = topo_schedule(model.graph);
    std::uint64_t step = 0;
    for (int epoch = 0; epoch < 500; ++epoch) {
        RngStream shuffle_rng(tc.seed, "shuffle/epoch" + std::to_string(epoch));
        const auto order = shuffled_indices(ds.samples.size(), shuffle_rng);
        for (std::size_t b0 = 0; b0 < order.size(); b0 += tc.batch_size) {
            Tensor4 images;
            LabelMap labels;
            stack_batch(ds, order, b0, std::min(order.size(), b0 + tc.batch_size), images, labels);
            const auto tape =
                forward(model.graph, plan, images, labels, model.params, Mode::Train, tc.seed, step++);
            const auto grads = backward(model.graph, plan, tape, model.params, cfg.loss_weights,
                                        cfg.backward_skip_grad_gate);
            sgd_step(model.params, grads, lr_at(epoch, tc), tc.momentum);
        }
        if ((epoch + 1) % 20 == 0) {
            const MetricsReport m = evaluate(model, ds);
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            if (m.pa >= 0.99) {
                std::snprintf(buf, sizeof(buf), "PA=%.4f after %d epochs", m.pa, epoch + 1);
                return {secs < 300.0, buf};
            }
            if (secs > 300.0) {
                std::snprintf(buf, sizeof(buf), "over the 5-minute budget at epoch %d (PA=%.4f)",
                              epoch + 1, m.pa);
                return {false, buf};
            }
        }
    }
    const MetricsReport m = evaluate(model, ds);
    std::snprintf(buf, sizeof(buf), "PA=%.4f after 500 epochs (needs >= 0.99)", m.pa);
    return {false, buf};
}

// ---- criterion 8 ------------------------------------------------------

double train_and_eval_iu(Variant v, std::uint64_t seed, const Dataset& tr, const Dataset& te) {
    ArchConfig cfg = toy_config(v);
    TrainConfig tc;
    tc.epochs = 60;
    tc.base_lr = 1.5e-3;
    tc.batch_size = 2;
    tc.seed = seed;
    const TrainResult r = train(cfg, tc, tr);
    return evaluate(r.model, te).iu;
}

std::pair<bool, std::string> directional_trend() {
    double gap_sum = 0.0;
    std::string detail;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const Dataset tr = gen_context_shapes(64, 64, seed);
        const Dataset te = gen_context_shapes(64, 32, seed + 1000);
        const double fcn = train_and_eval_iu(Variant::FCN8s, seed, tr, te);
        const double ms = train_and_eval_iu(Variant::MSNetB1, seed, tr, te);
        gap_sum += ms - fcn;
        std::snprintf(buf, sizeof(buf), "s%llu:%.3f/%.3f ", (unsigned long long)seed, ms, fcn);
        detail += buf;
    }
    const double mean_gap = gap_sum / 3.0;
    std::snprintf(buf, sizeof(buf), "mean IU gap %+.4f (needs >= +0.02); MSNetB1/FCN8s %s",
                  mean_gap, detail.c_str());
    return {mean_gap >= 0.02, buf};
}

// ---- criterion 9 ------------------------------------------------------

double median_step_ms(Variant v, const Dataset& ds) {
    BuiltModel m = build(toy_config(v));
    fill_params(m.params, 1, SkipInit::Random);
    const ExecutionPlan plan = topo_schedule(m.graph);
    std::vector<double> times;
    for (int trial = 0; trial < 20; ++trial) {
        const auto t0 = Clock::now();
        const auto tape = forward(m.graph, plan, ds.samples[0].image, ds.samples[0].labels,
                                  m.params, Mode::Train, 1, trial);
        const auto grads = backward(m.graph, plan, tape, m.params, {1.0, 1.0});
        times.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

std::pair<bool, std::string> runtime_ratio() {
    const Dataset ds = gen_context_shapes(64, 1, 1);
    const double fcn = median_step_ms(Variant::FCN8s, ds);
    const double ms = median_step_ms(Variant::MSNetB1, ds);
    const double ratio = ms / fcn;
    std::snprintf(buf, sizeof(buf),
                  "MSNetB1 %.1fms vs FCN8s %.1fms per step, ratio %.2fx (needs [1.5, 3.0])", ms,
                  fcn, ratio);
    return {ratio >= 1.5 && ratio <= 3.0, buf};
}

// ---- criterion 10 -----------------------------------------------------

std::pair<bool, std::string> cli_determinism() {
    const std::string data_path = g_work + "/determinism.msds";
    int rc = run_cmd(g_cli + " gen-data --out " + data_path +
                     " --resolution 32 --count 8 --seed 5 > /dev/null");
    if (rc != 0) return {false, "gen-data failed"};

    const std::string out_dir = g_work + "/det_run";
    const std::string config = "{\n"
                               "  \"variant\": \"MSNetB1\",\n"
                               "  \"input_h\": 32, \"input_w\": 32,\n"
                               "  \"dropout_rate\": 0.5,\n"
                               "  \"epochs\": 3, \"batch_size\": 4, \"seed\": 13,\n"
                               "  \"base_lr\": 0.0001,\n"
                               "  \"train_data\": \"" + data_path + "\",\n"
                               "  \"out_dir\": \"" + out_dir + "\"\n"
                               "}\n";
    write_file(g_work + "/det_config.json", config);

    std::string history[2], weights[2], echoed[2];
    for (int run = 0; run < 2; ++run) {
        fs::remove_all(out_dir);
        rc = run_cmd(g_cli + " train --config " + g_work + "/det_config.json > /dev/null");
        if (rc != 0) return {false, "train failed on run " + std::to_string(run + 1)};
        history[run] = read_file(out_dir + "/history.csv");
        weights[run] = read_file(out_dir + "/weights.mswt");
        echoed[run] = read_file(out_dir + "/config.json");
    }
    if (history[0] != history[1]) return {false, "history files differ between runs"};
    if (weights[0] != weights[1]) return {false, "weights files differ between runs"};
    if (echoed[0] != echoed[1]) return {false, "echoed configs differ between runs"};

    std::snprintf(buf, sizeof(buf), "byte-identical history (%zu B) and weights (%zu B)",
                  history[0].size(), weights[0].size());
    return {true, buf};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::fprintf(stderr, "usage: acceptance <cli_path> <golden_dir> <work_dir>\n");
        return 2;
    }
    g_cli = argv[1];
    g_golden = argv[2];
    g_work = argv[3];
    fs::create_directories(g_work);

    criterion(1, "gradient suite over all 7 variants", gradient_suite);
    criterion(2, "alternating schedule", schedule_correctness);
    criterion(3, "cycle rejection", cycle_rejection);
    criterion(4, "closed-form skip fusion", equation_conformance);
    criterion(5, "zero-skip equivalence", zero_skip_equivalence);
    criterion(6, "metric oracle", metric_oracle);
    criterion(7, "overfit to four samples", overfit_check);
    criterion(8, "directional IU trend", directional_trend);
    criterion(9, "runtime ratio", runtime_ratio);
    criterion(10, "train determinism through the CLI", cli_determinism);

    if (g_failures == 0) {
        std::printf("all 10 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria failed\n", g_failures);
    return 1;
}
