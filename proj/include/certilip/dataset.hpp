#pragma once

#include <vector>

#include "certilip/linalg.hpp"

namespace certilip {

// Points live in [0,1]^d; labels are 0-based class indices.
struct LabeledDataset {
    Matrix points;           // n x d, one row per instance
    std::vector<int> labels; // size n, values in [0, num_classes)
    int num_classes = 0;

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }

    void validate() const;

    LabeledDataset subsample(Eigen::Index count, unsigned seed) const;
    // Keeps only the listed classes and relabels them 0..k-1 in the given order.
    LabeledDataset select_classes(const std::vector<int>& classes) const;
};

} // namespace certilip
