#include "dgfa/metrics.hpp"

#include <stdexcept>

namespace dgfa {

Metrics evaluate(const std::vector<int>& pred, const std::vector<int>& gt, int class_count) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("evaluate: prediction/ground-truth length mismatch");
    if (class_count < 1) throw std::invalid_argument("evaluate: class_count < 1");

    Metrics m;
    m.class_count = class_count;
    m.confusion.assign(static_cast<size_t>(class_count) * class_count, 0);
    for (size_t i = 0; i < gt.size(); ++i) {
        if (gt[i] < 0 || gt[i] >= class_count || pred[i] < 0 || pred[i] >= class_count)
            throw std::invalid_argument("evaluate: label out of range");
        ++m.confusion[static_cast<size_t>(gt[i]) * class_count + pred[i]];
    }

    long long trace = 0;
    double iou_sum = 0.0, acc_sum = 0.0;
    int iou_classes = 0, acc_classes = 0;
    m.per_class_iou.assign(class_count, -1.0);
    for (int c = 0; c < class_count; ++c) {
        long long tp = m.at(c, c), gt_count = 0, pred_count = 0;
        for (int j = 0; j < class_count; ++j) {
            gt_count += m.at(c, j);
            pred_count += m.at(j, c);
        }
        trace += tp;
        const long long uni = gt_count + pred_count - tp;
        if (uni > 0) {
            m.per_class_iou[c] = static_cast<double>(tp) / static_cast<double>(uni);
            iou_sum += m.per_class_iou[c];
            ++iou_classes;
        }
        if (gt_count > 0) {
            acc_sum += static_cast<double>(tp) / static_cast<double>(gt_count);
            ++acc_classes;
        }
    }
    const long long total = static_cast<long long>(gt.size());
    m.overall_accuracy = total > 0 ? static_cast<double>(trace) / static_cast<double>(total) : 0.0;
    m.mean_iou = iou_classes > 0 ? iou_sum / iou_classes : 0.0;
    m.mean_class_accuracy = acc_classes > 0 ? acc_sum / acc_classes : 0.0;
    return m;
}

}  // namespace dgfa
