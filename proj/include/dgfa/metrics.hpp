#pragma once

#include <vector>

namespace dgfa {

// Segmentation metrics from a C x C confusion matrix (rows = ground truth,
// columns = prediction). Classes absent from both prediction and ground truth
// are excluded from the means; per-class accuracy additionally needs the
// class to appear in the ground truth.
struct Metrics {
    int class_count = 0;
    std::vector<long long> confusion;  // C*C counts, row-major
    double overall_accuracy = 0.0;
    double mean_class_accuracy = 0.0;
    double mean_iou = 0.0;
    std::vector<double> per_class_iou;  // -1 for excluded classes

    long long at(int gt, int pred) const { return confusion[static_cast<size_t>(gt) * class_count + pred]; }
};

Metrics evaluate(const std::vector<int>& pred, const std::vector<int>& gt, int class_count);

}  // namespace dgfa
