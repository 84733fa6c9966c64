#include "msnet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "msnet/errors.hpp"
#include "msnet/rng.hpp"

namespace msnet {

void TrainConfig::validate() const {
    if (base_lr <= 0.0) throw InvalidSpec("TrainConfig: base_lr must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw InvalidSpec("TrainConfig: momentum must be in [0,1)");
    if (epochs < 0) throw InvalidSpec("TrainConfig: epochs must be >= 0");
    if (batch_size < 1) throw InvalidSpec("TrainConfig: batch_size must be >= 1");
    if (decay_rate < 0.0 || decay_rate >= 1.0) throw InvalidSpec("TrainConfig: decay_rate in [0,1)");
    if (decay_every_early < 1 || decay_every_late < 1)
        throw InvalidSpec("TrainConfig: decay intervals must be >= 1");
}

XentResult masked_xent(const Tensor4& logits, const LabelMap& labels) {
    if (logits.n != labels.n || logits.h != labels.h || logits.w != labels.w)
        throw ShapeMismatch("masked_xent: logits and labels extents differ");
    const int k = logits.c;

    XentResult r;
    r.grad_logits = Tensor4::zeros_like(logits);

    // first pass: count valid pixels so the gradient carries the final 1/V
    std::size_t valid = 0;
    for (std::uint8_t t : labels.labels)
        if (t != kIgnoreLabel) ++valid;
    r.valid_count = valid;
    if (valid == 0) {
        r.all_ignored = true;
        return r;
    }

    const double inv_valid = 1.0 / static_cast<double>(valid);
    double loss_sum = 0.0;
    std::vector<double> p(k);
    for (int i = 0; i < logits.n; ++i) {
        for (int y = 0; y < logits.h; ++y) {
            for (int x = 0; x < logits.w; ++x) {
                const std::uint8_t t = labels.at(i, y, x);
                if (t == kIgnoreLabel) continue;
                if (t >= k) throw InvalidSpec("masked_xent: label out of range");

                double m = logits.at(i, 0, y, x);
                for (int j = 1; j < k; ++j) m = std::max(m, logits.at(i, j, y, x));
                double z = 0.0;
                for (int j = 0; j < k; ++j) {
                    p[j] = std::exp(logits.at(i, j, y, x) - m);
                    z += p[j];
                }
                loss_sum += -(logits.at(i, t, y, x) - m - std::log(z));
                for (int j = 0; j < k; ++j) {
                    const double prob = p[j] / z;
                    r.grad_logits.at(i, j, y, x) = (prob - (j == t ? 1.0 : 0.0)) * inv_valid;
                }
            }
        }
    }
    r.loss = loss_sum * inv_valid;
    return r;
}

double lr_at(int epoch, const TrainConfig& cfg) {
    if (epoch < 0) throw InvalidArgument("lr_at: epoch must be >= 0");
    constexpr int kLateStart = 30;  // decay interval switches from early to late here
    const int d = std::min(epoch, kLateStart) / cfg.decay_every_early +
                  std::max(0, (epoch - kLateStart) / cfg.decay_every_late);
    return cfg.base_lr * std::pow(1.0 - cfg.decay_rate, d);
}

void sgd_step(ParamStore& store, const GradStore& grads, double lr, double momentum) {
    if (grads.slots.size() != store.slots.size())
        throw ShapeMismatch("sgd_step: gradient store does not match the parameter store");
    if (store.momentum.size() != store.slots.size()) store.reset_momentum();

    for (std::size_t s = 0; s < store.slots.size(); ++s) {
        ParamSlot& slot = store.slots[s];
        if (slot.frozen) continue;
        const ConvParams& g = grads.slots[s];
        ConvParams& v = store.momentum[s];
        if (g.weights.size() != slot.params.weights.size() ||
            g.bias.size() != slot.params.bias.size())
            throw ShapeMismatch("sgd_step: gradient shape mismatch at slot " + slot.name);

        for (std::size_t i = 0; i < g.weights.size(); ++i) {
            v.weights[i] = momentum * v.weights[i] - lr * g.weights[i];
            slot.params.weights[i] += v.weights[i];
        }
        for (std::size_t i = 0; i < g.bias.size(); ++i) {
            v.bias[i] = momentum * v.bias[i] - lr * g.bias[i];
            slot.params.bias[i] += v.bias[i];
        }
    }
}

void stack_batch(const Dataset& ds, const std::vector<std::size_t>& order, std::size_t begin,
                 std::size_t end, Tensor4& images, LabelMap& labels) {
    const Sample& first = ds.samples.at(order.at(begin));
    const int b = static_cast<int>(end - begin);
    images = Tensor4(b, first.image.c, first.image.h, first.image.w);
    labels = LabelMap(b, first.labels.h, first.labels.w);
    for (int i = 0; i < b; ++i) {
        const Sample& s = ds.samples[order[begin + i]];
        if (!s.image.same_extents(first.image))
            throw ShapeMismatch("stack_batch: samples have different extents");
        std::copy(s.image.data.begin(), s.image.data.end(),
                  images.data.begin() + static_cast<std::ptrdiff_t>(i * s.image.size()));
        std::copy(s.labels.labels.begin(), s.labels.labels.end(),
                  labels.labels.begin() + static_cast<std::ptrdiff_t>(i * s.labels.labels.size()));
    }
}

MetricsReport evaluate(const BuiltModel& model, const Dataset& ds) {
    const ExecutionPlan plan = topo_schedule(model.graph);
    MetricsReport counts(ds.num_classes);
    for (const Sample& s : ds.samples) {
        const ActivationTape tape =
            forward(model.graph, plan, s.image, s.labels, model.params, Mode::Eval, 0);
        const LabelMap pred = predict_labels(tape.records[model.graph.master_score].value);
        accumulate(counts, pred, s.labels);
    }
    return finalize(counts);
}

TrainResult train(const ArchConfig& arch_cfg, const TrainConfig& train_cfg, const Dataset& ds) {
    arch_cfg.validate();
    train_cfg.validate();
    if (ds.samples.empty()) throw InvalidSpec("train: dataset is empty");
    const Sample& first = ds.samples.front();
    if (first.image.c != arch_cfg.input_channels || first.image.h != arch_cfg.input_h ||
        first.image.w != arch_cfg.input_w)
        throw ShapeMismatch("train: dataset extents do not match the architecture config");
    if (ds.num_classes != arch_cfg.num_classes)
        throw ShapeMismatch("train: dataset class count does not match the architecture config");

    TrainResult result;
    result.model = build(arch_cfg);
    fill_params(result.model.params, train_cfg.seed);
    const ExecutionPlan plan = topo_schedule(result.model.graph);

    std::uint64_t step = 0;
    for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = lr_at(epoch, train_cfg);

        RngStream shuffle_rng(train_cfg.seed, "shuffle/epoch" + std::to_string(epoch));
        const std::vector<std::size_t> order = shuffled_indices(ds.samples.size(), shuffle_rng);

        double master_sum = 0.0, slave_sum = 0.0;
        int batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += train_cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + train_cfg.batch_size);
            Tensor4 images;
            LabelMap labels;
            stack_batch(ds, order, begin, end, images, labels);
            const std::string ctx =
                "train: epoch " + std::to_string(epoch) + " batch " + std::to_string(batches) + ": ";
            try {
                const ActivationTape tape = forward(result.model.graph, plan, images, labels,
                                                    result.model.params, Mode::Train,
                                                    train_cfg.seed, step);
                const GradStore grads =
                    backward(result.model.graph, plan, tape, result.model.params,
                             arch_cfg.loss_weights, arch_cfg.backward_skip_grad_gate);
                sgd_step(result.model.params, grads, lr, train_cfg.momentum);
                master_sum += tape.master_loss;
                slave_sum += tape.slave_loss;
            } catch (const ShapeMismatch& e) {
                throw ShapeMismatch(ctx + e.what());
            } catch (const Error& e) {
                throw Error(ctx + e.what());
            }
            ++batches;
            ++step;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.master_loss = batches ? master_sum / batches : 0.0;
        rec.slave_loss = batches ? slave_sum / batches : 0.0;
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                          .count();
        result.history.epochs.push_back(rec);
    }

    if (train_cfg.epochs > 0) {
        result.history.final_metrics = evaluate(result.model, ds);
        result.history.has_metrics = true;
    }
    return result;
}

std::string format_metrics_line(const MetricsReport& report) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "PA=%.4f, CA=%.4f, IU=%.4f", report.pa, report.ca, report.iu);
    return buf;
}

std::string format_history(const TrainHistory& history) {
    std::string out = "epoch,lr,master_loss,slave_loss,ms\n";
    char buf[160];
    for (const EpochRecord& r : history.epochs) {
        // ms column stays 0 so reruns of the same seed are byte-identical
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,0\n", r.epoch, r.lr, r.master_loss,
                      r.slave_loss);
        out += buf;
    }
    if (history.has_metrics) out += format_metrics_line(history.final_metrics) + "\n";
    return out;
}

}  // namespace msnet
