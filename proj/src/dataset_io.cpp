#include "certilip/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

namespace certilip {
namespace {

double clamp01(double v) { return std::max(0.0, std::min(1.0, v)); }

} // namespace

LabeledDataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw_io("cannot open '" + path + "' for reading");

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    int line_number = 0;
    std::size_t width = 0;
    int max_label = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool first = true;
        int label = -1;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double value;
            try {
                value = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw_parse(path + ":" + std::to_string(line_number) + ": cell '" + cell +
                            "' is not a number");
            }
            if (used != cell.size())
                throw_parse(path + ":" + std::to_string(line_number) + ": trailing junk in '" +
                            cell + "'");
            if (first) {
                label = static_cast<int>(value);
                if (static_cast<double>(label) != value || label < 0)
                    throw_parse(path + ":" + std::to_string(line_number) +
                                ": label must be a nonnegative integer");
                first = false;
            } else {
                row.push_back(value);
            }
        }
        if (first)
            throw_parse(path + ":" + std::to_string(line_number) + ": empty row");
        if (width == 0)
            width = row.size();
        else if (row.size() != width)
            throw_parse(path + ":" + std::to_string(line_number) + ": row has " +
                        std::to_string(row.size()) + " features, expected " +
                        std::to_string(width));
        max_label = std::max(max_label, label);
        labels.push_back(label);
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw_parse(path + ": no data rows");

    LabeledDataset data;
    data.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            data.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    data.labels = std::move(labels);
    data.num_classes = max_label + 1;
    data.validate();
    return data;
}

void save_dataset_csv(const LabeledDataset& data, const std::string& path) {
    data.validate();
    std::ofstream out(path);
    if (!out)
        throw_io("cannot open '" + path + "' for writing");
    char buf[40];
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        out << data.labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < data.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.points(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
    out.flush();
    if (!out)
        throw_io("failed while writing '" + path + "'");
}

namespace {

class IdxReader {
public:
    explicit IdxReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_)
            throw_io("cannot open '" + path + "' for reading");
    }

    std::uint32_t read_u32() {
        unsigned char bytes[4];
        in_.read(reinterpret_cast<char*>(bytes), 4);
        if (in_.gcount() != 4)
            throw_parse(path_ + ": truncated at byte offset " + std::to_string(offset_));
        offset_ += 4;
        return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
               (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
    }

    void read_bytes(unsigned char* dst, std::size_t count) {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in_.gcount()) != count)
            throw_parse(path_ + ": truncated at byte offset " +
                        std::to_string(offset_ + static_cast<std::size_t>(in_.gcount())));
        offset_ += count;
    }

    std::size_t offset() const { return offset_; }

private:
    std::string path_;
    std::ifstream in_;
    std::size_t offset_ = 0;
};

} // namespace

LabeledDataset load_dataset_idx(const std::string& images_path, const std::string& labels_path) {
    IdxReader images(images_path);
    const std::uint32_t image_magic = images.read_u32();
    if (image_magic != 0x00000803u)
        throw_parse(images_path + ": bad image magic number 0x" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%08x", image_magic);
            return std::string(buf);
        }() + " at byte offset 0 (expected 0x00000803)");
    const std::uint32_t count = images.read_u32();
    const std::uint32_t rows = images.read_u32();
    const std::uint32_t cols = images.read_u32();
    if (count == 0 || rows == 0 || cols == 0)
        throw_parse(images_path + ": empty image dimensions");

    IdxReader labels(labels_path);
    const std::uint32_t label_magic = labels.read_u32();
    if (label_magic != 0x00000801u)
        throw_parse(labels_path + ": bad label magic number at byte offset 0 (expected 0x00000801)");
    const std::uint32_t label_count = labels.read_u32();
    if (label_count != count)
        throw_parse(labels_path + ": has " + std::to_string(label_count) + " labels but " +
                    images_path + " has " + std::to_string(count) + " images");

    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    LabeledDataset data;
    data.points.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    data.labels.resize(count);
    std::vector<unsigned char> buffer(dim);
    int max_label = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        images.read_bytes(buffer.data(), dim);
        for (std::size_t j = 0; j < dim; ++j)
            data.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                static_cast<double>(buffer[j]) / 255.0;
        unsigned char label;
        labels.read_bytes(&label, 1);
        data.labels[i] = static_cast<int>(label);
        max_label = std::max(max_label, static_cast<int>(label));
    }
    data.num_classes = max_label + 1;
    data.validate();
    return data;
}

void save_dataset_idx(const LabeledDataset& data, const std::string& images_path,
                      const std::string& labels_path, int rows, int cols) {
    data.validate();
    if (static_cast<Eigen::Index>(rows) * cols != data.dim())
        throw_invalid("rows*cols must equal the feature dimension");

    auto write_u32 = [](std::ofstream& out, std::uint32_t v) {
        const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                        static_cast<unsigned char>(v >> 16),
                                        static_cast<unsigned char>(v >> 8),
                                        static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(bytes), 4);
    };

    std::ofstream images(images_path, std::ios::binary);
    if (!images)
        throw_io("cannot open '" + images_path + "' for writing");
    write_u32(images, 0x00000803u);
    write_u32(images, static_cast<std::uint32_t>(data.size()));
    write_u32(images, static_cast<std::uint32_t>(rows));
    write_u32(images, static_cast<std::uint32_t>(cols));
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) {
            const double v = clamp01(data.points(i, j));
            const unsigned char byte = static_cast<unsigned char>(std::lround(v * 255.0));
            images.write(reinterpret_cast<const char*>(&byte), 1);
        }
    }
    if (!images)
        throw_io("failed while writing '" + images_path + "'");

    std::ofstream labels(labels_path, std::ios::binary);
    if (!labels)
        throw_io("cannot open '" + labels_path + "' for writing");
    write_u32(labels, 0x00000801u);
    write_u32(labels, static_cast<std::uint32_t>(data.size()));
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        const unsigned char byte = static_cast<unsigned char>(data.labels[static_cast<std::size_t>(i)]);
        labels.write(reinterpret_cast<const char*>(&byte), 1);
    }
    if (!labels)
        throw_io("failed while writing '" + labels_path + "'");
}

SyntheticKind parse_synthetic_kind(const std::string& name) {
    if (name == "blobs")
        return SyntheticKind::blobs;
    if (name == "moons")
        return SyntheticKind::moons;
    if (name == "xor")
        return SyntheticKind::xor_grid;
    throw_invalid("unknown synthetic dataset kind '" + name + "' (expected blobs, moons or xor)");
}

LabeledDataset generate_synthetic(SyntheticKind kind, Eigen::Index n, Eigen::Index d,
                                  int num_classes, unsigned seed, double noise) {
    if (kind != SyntheticKind::blobs) {
        num_classes = 2;
        if (d != 2)
            throw_invalid("moons and xor are two-dimensional layouts; use d=2");
    }
    if (num_classes < 2)
        throw_invalid("need at least two classes");
    if (n < num_classes)
        throw_invalid("need at least one sample per class");
    if (d < 1)
        throw_invalid("dimension must be >= 1");
    if (noise < 0.0)
        throw_invalid("noise must be >= 0");

    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    LabeledDataset data;
    data.points.resize(n, d);
    data.labels.resize(static_cast<std::size_t>(n));
    data.num_classes = num_classes;

    switch (kind) {
    case SyntheticKind::blobs: {
        Matrix centers(num_classes, d);
        for (int k = 0; k < num_classes; ++k)
            for (Eigen::Index j = 0; j < d; ++j)
                centers(k, j) = 0.2 + 0.6 * unif(rng);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int label = static_cast<int>(i % num_classes);
            data.labels[static_cast<std::size_t>(i)] = label;
            for (Eigen::Index j = 0; j < d; ++j)
                data.points(i, j) = clamp01(centers(label, j) + noise * gauss(rng));
        }
        break;
    }
    case SyntheticKind::moons: {
        // Two interleaved half circles scaled into the unit square.
        for (Eigen::Index i = 0; i < n; ++i) {
            const int label = static_cast<int>(i % 2);
            const double t = M_PI * unif(rng);
            double px, py;
            if (label == 0) {
                px = std::cos(t);
                py = std::sin(t);
            } else {
                px = 1.0 - std::cos(t);
                py = 0.5 - std::sin(t);
            }
            px = (px + 1.5) / 4.0 + noise * gauss(rng);
            py = (py + 1.0) / 3.0 + noise * gauss(rng);
            data.points(i, 0) = clamp01(px);
            data.points(i, 1) = clamp01(py);
            data.labels[static_cast<std::size_t>(i)] = label;
        }
        break;
    }
    case SyntheticKind::xor_grid: {
        // Four corner clusters with diagonals sharing a class.
        for (Eigen::Index i = 0; i < n; ++i) {
            const int corner = static_cast<int>(i % 4);
            const double cx = (corner & 1) ? 0.75 : 0.25;
            const double cy = (corner & 2) ? 0.75 : 0.25;
            data.points(i, 0) = clamp01(cx + noise * gauss(rng));
            data.points(i, 1) = clamp01(cy + noise * gauss(rng));
            data.labels[static_cast<std::size_t>(i)] = ((corner & 1) ^ ((corner >> 1) & 1));
        }
        break;
    }
    }
    data.validate();
    return data;
}

} // namespace certilip
