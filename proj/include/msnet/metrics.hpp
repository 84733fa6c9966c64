#pragma once

#include <cstdint>
#include <vector>

#include "msnet/tensor.hpp"

namespace msnet {

struct MetricsReport {
    int num_classes = 0;
    std::vector<std::uint64_t> confusion;  // rows = ground truth, cols = prediction
    double pa = 0.0;
    double ca = 0.0;
    double iu = 0.0;
    std::vector<double> per_class_iu;

    explicit MetricsReport(int classes = 0)
        : num_classes(classes),
          confusion(static_cast<std::size_t>(classes) * classes, 0) {}

    std::uint64_t& cell(int gt, int pred) {
        return confusion[static_cast<std::size_t>(gt) * num_classes + pred];
    }
    std::uint64_t cell(int gt, int pred) const {
        return confusion[static_cast<std::size_t>(gt) * num_classes + pred];
    }
};

/// Adds counts for pixels whose ground truth is not the ignore label.
void accumulate(MetricsReport& report, const LabelMap& pred, const LabelMap& gt);

/// PA = trace/total. CA averages diag/gt_row over classes present in the
/// ground truth. IU averages diag/(gt_row + pred_col - diag) over classes with
/// a nonempty union; classes absent from both gt and predictions are excluded.
MetricsReport finalize(const MetricsReport& counts);

/// Merging per-worker confusion matrices equals sequential accumulation.
void merge(MetricsReport& into, const MetricsReport& from);

/// Per-pixel argmax over channels; ties break to the lowest class index.
LabelMap predict_labels(const Tensor4& score);

}  // namespace msnet
