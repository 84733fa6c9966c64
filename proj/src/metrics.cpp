#include "msnet/metrics.hpp"

#include <string>

#include "msnet/errors.hpp"

namespace msnet {

void accumulate(MetricsReport& report, const LabelMap& pred, const LabelMap& gt) {
    if (!pred.same_extents(gt))
        throw ShapeMismatch("accumulate: prediction and ground-truth extents differ");
    for (std::size_t e = 0; e < gt.labels.size(); ++e) {
        const std::uint8_t t = gt.labels[e];
        if (t == kIgnoreLabel) continue;
        const std::uint8_t p = pred.labels[e];
        if (t >= report.num_classes)
            throw InvalidSpec("accumulate: gt label " + std::to_string(t) + " outside the matrix");
        if (p >= report.num_classes)
            throw InvalidSpec("accumulate: prediction " + std::to_string(p) + " outside the matrix");
        ++report.cell(t, p);
    }
}

MetricsReport finalize(const MetricsReport& counts) {
    const int k = counts.num_classes;
    MetricsReport out = counts;

    std::uint64_t total = 0, trace = 0;
    std::vector<std::uint64_t> gt_row(k, 0), pred_col(k, 0);
    for (int t = 0; t < k; ++t) {
        for (int p = 0; p < k; ++p) {
            const std::uint64_t v = counts.cell(t, p);
            total += v;
            gt_row[t] += v;
            pred_col[p] += v;
            if (t == p) trace += v;
        }
    }
    if (total == 0) throw EmptyConfusion("finalize: confusion matrix is empty");

    out.pa = static_cast<double>(trace) / static_cast<double>(total);

    double ca_sum = 0.0;
    int ca_terms = 0;
    double iu_sum = 0.0;
    int iu_terms = 0;
    out.per_class_iu.assign(k, 0.0);
    for (int i = 0; i < k; ++i) {
        const std::uint64_t diag = counts.cell(i, i);
        if (gt_row[i] > 0) {
            ca_sum += static_cast<double>(diag) / static_cast<double>(gt_row[i]);
            ++ca_terms;
        }
        const std::uint64_t uni = gt_row[i] + pred_col[i] - diag;
        if (uni > 0) {
            out.per_class_iu[i] = static_cast<double>(diag) / static_cast<double>(uni);
            iu_sum += out.per_class_iu[i];
            ++iu_terms;
        }
    }
    out.ca = ca_terms > 0 ? ca_sum / ca_terms : 0.0;
    out.iu = iu_terms > 0 ? iu_sum / iu_terms : 0.0;
    return out;
}

void merge(MetricsReport& into, const MetricsReport& from) {
    if (into.num_classes != from.num_classes)
        throw ShapeMismatch("merge: confusion matrices have different class counts");
    for (std::size_t e = 0; e < into.confusion.size(); ++e) into.confusion[e] += from.confusion[e];
}

LabelMap predict_labels(const Tensor4& score) {
    LabelMap out(score.n, score.h, score.w);
    for (int i = 0; i < score.n; ++i) {
        for (int y = 0; y < score.h; ++y) {
            for (int x = 0; x < score.w; ++x) {
                int best = 0;
                double best_v = score.at(i, 0, y, x);
                for (int j = 1; j < score.c; ++j) {
                    const double v = score.at(i, j, y, x);
                    if (v > best_v) {
                        best_v = v;
                        best = j;
                    }
                }
                out.at(i, y, x) = static_cast<std::uint8_t>(best);
            }
        }
    }
    return out;
}

}  // namespace msnet
