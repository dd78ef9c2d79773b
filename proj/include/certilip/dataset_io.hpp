#pragma once

#include <string>

#include "certilip/dataset.hpp"

namespace certilip {

// CSV rows are "label,f1,...,fd" with no header; features print with 17
// significant digits so save/load round-trips exactly.
LabeledDataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const LabeledDataset& data, const std::string& path);

// IDX image/label pair (magic 0x00000803 / 0x00000801); pixel bytes are
// scaled into [0,1] by dividing by 255. Parse errors name the byte offset.
LabeledDataset load_dataset_idx(const std::string& images_path, const std::string& labels_path);
void save_dataset_idx(const LabeledDataset& data, const std::string& images_path,
                      const std::string& labels_path, int rows, int cols);

enum class SyntheticKind { blobs, moons, xor_grid };

SyntheticKind parse_synthetic_kind(const std::string& name);

// Deterministic synthetic datasets in [0,1]^d. blobs supports any d and
// class count; moons and xor_grid are two-dimensional two-class layouts.
LabeledDataset generate_synthetic(SyntheticKind kind, Eigen::Index n, Eigen::Index d,
                                  int num_classes, unsigned seed, double noise);

} // namespace certilip
