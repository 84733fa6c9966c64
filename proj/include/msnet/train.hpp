#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msnet/arch.hpp"
#include "msnet/data.hpp"
#include "msnet/graph.hpp"
#include "msnet/metrics.hpp"
#include "msnet/tensor.hpp"

namespace msnet {

struct TrainConfig {
    double base_lr = 1e-5;
    double momentum = 0.9;
    int epochs = 50;
    int batch_size = 4;
    std::uint64_t seed = 0;
    double decay_rate = 0.10;
    int decay_every_early = 10;  // epochs per decay before epoch 30
    int decay_every_late = 5;    // epochs per decay after epoch 30

    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

struct XentResult {
    double loss = 0.0;
    Tensor4 grad_logits;
    std::size_t valid_count = 0;
    bool all_ignored = false;
};

/// Per-pixel softmax cross entropy averaged over pixels whose label is not
/// the ignore sentinel, pooled across the batch. Ignored pixels contribute
/// exactly zero gradient. When every pixel is ignored the loss is defined as
/// 0 with zero gradient and the all_ignored flag set.
XentResult masked_xent(const Tensor4& logits, const LabelMap& labels);

/// lr = base_lr * (1 - decay_rate)^d with d = floor(min(epoch,30)/early)
///                                         + max(0, floor((epoch-30)/late)).
double lr_at(int epoch, const TrainConfig& config);

/// Heavy-ball update: v <- momentum*v - lr*g; p <- p + v. Frozen slots are
/// left untouched.
void sgd_step(ParamStore& store, const GradStore& grads, double lr, double momentum);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double master_loss = 0.0;
    double slave_loss = 0.0;
    double wall_ms = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    MetricsReport final_metrics;
    bool has_metrics = false;
};

struct TrainResult {
    TrainHistory history;
    BuiltModel model;
};

/// Seeded epoch shuffle, mini-batched forward/backward/sgd, per-epoch loss
/// means, and a final evaluation pass on the training set. Deterministic for
/// a fixed (configs, dataset) tuple.
TrainResult train(const ArchConfig& arch_cfg, const TrainConfig& train_cfg, const Dataset& ds);

/// Evaluation pass: Master-score argmax against ground truth over a dataset.
MetricsReport evaluate(const BuiltModel& model, const Dataset& ds);

/// History file: header `epoch,lr,master_loss,slave_loss,ms`, one record per
/// epoch, then the final `PA=..., CA=..., IU=...` line. The ms column is
/// written as 0 so identical runs produce identical bytes; measured times stay
/// in TrainHistory.
std::string format_history(const TrainHistory& history);
std::string format_metrics_line(const MetricsReport& report);

/// Stacks samples [begin, end) into one batch. All samples must share extents.
void stack_batch(const Dataset& ds, const std::vector<std::size_t>& order, std::size_t begin,
                 std::size_t end, Tensor4& images, LabelMap& labels);

}  // namespace msnet
