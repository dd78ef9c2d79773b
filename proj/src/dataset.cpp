#include "certilip/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace certilip {

void LabeledDataset::validate() const {
    if (points.rows() < 1)
        throw_invalid("dataset must contain at least one point");
    if (static_cast<Eigen::Index>(labels.size()) != points.rows())
        throw_invalid("dataset has " + std::to_string(points.rows()) + " points but " +
                      std::to_string(labels.size()) + " labels");
    if (num_classes < 1)
        throw_invalid("dataset class count must be >= 1");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes)
            throw_invalid("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                          " is outside [0, " + std::to_string(num_classes) + ")");
    }
    if (!points.allFinite())
        throw_invalid("dataset contains non-finite feature values");
}

LabeledDataset LabeledDataset::subsample(Eigen::Index count, unsigned seed) const {
    if (count > size())
        throw_invalid("subsample size " + std::to_string(count) + " exceeds dataset size " +
                      std::to_string(size()));
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(count));
    std::sort(idx.begin(), idx.end()); // keep original row order

    LabeledDataset out;
    out.points.resize(count, dim());
    out.labels.resize(static_cast<std::size_t>(count));
    out.num_classes = num_classes;
    for (Eigen::Index i = 0; i < count; ++i) {
        out.points.row(i) = points.row(idx[static_cast<std::size_t>(i)]);
        out.labels[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    }
    return out;
}

LabeledDataset LabeledDataset::select_classes(const std::vector<int>& classes) const {
    if (classes.empty())
        throw_invalid("class subset must not be empty");
    std::vector<int> remap(static_cast<std::size_t>(num_classes), -1);
    for (std::size_t k = 0; k < classes.size(); ++k) {
        if (classes[k] < 0 || classes[k] >= num_classes)
            throw_invalid("class " + std::to_string(classes[k]) + " is outside [0, " +
                          std::to_string(num_classes) + ")");
        if (remap[static_cast<std::size_t>(classes[k])] != -1)
            throw_invalid("class " + std::to_string(classes[k]) + " listed twice");
        remap[static_cast<std::size_t>(classes[k])] = static_cast<int>(k);
    }

    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < size(); ++i)
        if (remap[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] != -1)
            rows.push_back(i);
    if (rows.empty())
        throw_invalid("no instance belongs to the requested class subset");

    LabeledDataset out;
    out.points.resize(static_cast<Eigen::Index>(rows.size()), dim());
    out.labels.resize(rows.size());
    out.num_classes = static_cast<int>(classes.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.points.row(static_cast<Eigen::Index>(i)) = points.row(rows[i]);
        out.labels[i] = remap[static_cast<std::size_t>(labels[static_cast<std::size_t>(rows[i])])];
    }
    return out;
}

} // namespace certilip
