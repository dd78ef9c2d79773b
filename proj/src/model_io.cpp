#include "certilip/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace certilip {
namespace {

constexpr const char* kMagic = "certilip-model";
constexpr const char* kVersion = "v1";

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c)
                out << ' ';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
}

void write_vector(std::ostream& out, const std::string& name, const Vector& v) {
    Matrix m(1, v.size());
    m.row(0) = v.transpose();
    write_matrix(out, name, m);
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::string next() {
        std::string line;
        if (!std::getline(in_, line))
            throw_parse("model file truncated at line " + std::to_string(number_ + 1));
        ++number_;
        return line;
    }

    int line_number() const { return number_; }

private:
    std::istream& in_;
    int number_ = 0;
};

void expect_key(LineReader& reader, const std::string& key, std::istringstream& rest) {
    const std::string line = reader.next();
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head != key)
        throw_parse("expected '" + key + "' at line " + std::to_string(reader.line_number()) +
                    ", found '" + head + "'");
    rest.str(line.substr(head.size()));
    rest.clear();
}

double read_scalar(LineReader& reader, const std::string& key) {
    std::istringstream rest(std::string{});
    expect_key(reader, key, rest);
    double value = 0.0;
    if (!(rest >> value))
        throw_parse("missing value for '" + key + "' at line " +
                    std::to_string(reader.line_number()));
    return value;
}

Matrix read_matrix(LineReader& reader, const std::string& name) {
    std::istringstream rest(std::string{});
    expect_key(reader, "matrix", rest);
    std::string found;
    Eigen::Index rows = 0, cols = 0;
    if (!(rest >> found >> rows >> cols))
        throw_parse("malformed matrix header at line " + std::to_string(reader.line_number()));
    if (found != name)
        throw_parse("expected matrix '" + name + "' at line " +
                    std::to_string(reader.line_number()) + ", found '" + found + "'");
    if (rows < 0 || cols < 0)
        throw_parse("negative matrix shape at line " + std::to_string(reader.line_number()));
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        std::istringstream row(reader.next());
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!(row >> m(r, c)))
                throw_parse("matrix '" + name + "' row " + std::to_string(r) +
                            " is short at line " + std::to_string(reader.line_number()));
        }
        double extra;
        if (row >> extra)
            throw_parse("matrix '" + name + "' row " + std::to_string(r) +
                        " has extra values at line " + std::to_string(reader.line_number()));
    }
    return m;
}

Vector read_vector(LineReader& reader, const std::string& name) {
    const Matrix m = read_matrix(reader, name);
    if (m.rows() != 1)
        throw_parse("vector block '" + name + "' must have exactly one row");
    return m.row(0).transpose();
}

} // namespace

void save_model(const Model& model, std::ostream& out) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "kind " << model_kind_name(model.kind()) << '\n';
    out << "classes " << model.num_classes() << '\n';
    out << "dim " << model.dim() << '\n';
    if (const auto* lin = model.as_linear()) {
        out << "has_bias " << (lin->bias.size() != 0 ? 1 : 0) << '\n';
        write_matrix(out, "weights", lin->weights);
        if (lin->bias.size() != 0)
            write_vector(out, "bias", lin->bias);
    } else if (const auto* ker = model.as_kernel()) {
        out << "anchors " << ker->anchors.rows() << '\n';
        out << "width " << format_double(ker->width) << '\n';
        write_matrix(out, "coefficients", ker->coefficients);
        write_matrix(out, "anchor_points", ker->anchors);
    } else {
        const auto* net = model.as_network();
        out << "hidden_units " << net->hidden_weights.rows() << '\n';
        out << "steepness " << format_double(net->steepness) << '\n';
        out << "has_hidden_bias " << (net->hidden_bias.size() != 0 ? 1 : 0) << '\n';
        out << "has_output_bias " << (net->output_bias.size() != 0 ? 1 : 0) << '\n';
        write_matrix(out, "hidden_weights", net->hidden_weights);
        write_matrix(out, "output_weights", net->output_weights);
        if (net->hidden_bias.size() != 0)
            write_vector(out, "hidden_bias", net->hidden_bias);
        if (net->output_bias.size() != 0)
            write_vector(out, "output_bias", net->output_bias);
    }
}

void save_model_file(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw_io("cannot open '" + path + "' for writing");
    save_model(model, out);
    out.flush();
    if (!out)
        throw_io("failed while writing '" + path + "'");
}

Model load_model(std::istream& in) {
    LineReader reader(in);
    {
        std::istringstream header(reader.next());
        std::string magic, version;
        header >> magic >> version;
        if (magic != kMagic)
            throw_parse("not a certilip model file (bad magic '" + magic + "')");
        if (version != kVersion)
            throw_parse("unsupported model format version '" + version + "'");
    }
    std::istringstream rest(std::string{});
    expect_key(reader, "kind", rest);
    std::string kind;
    rest >> kind;

    const int classes = static_cast<int>(read_scalar(reader, "classes"));
    const auto dim = static_cast<Eigen::Index>(read_scalar(reader, "dim"));

    if (kind == "linear") {
        const bool has_bias = read_scalar(reader, "has_bias") != 0.0;
        LinearModel m;
        m.weights = read_matrix(reader, "weights");
        if (m.weights.rows() != classes || m.weights.cols() != dim)
            throw_parse("weights shape disagrees with the declared dimensions");
        if (has_bias)
            m.bias = read_vector(reader, "bias");
        return Model(std::move(m));
    }
    if (kind == "kernel") {
        const auto anchors = static_cast<Eigen::Index>(read_scalar(reader, "anchors"));
        GaussianKernelModel m;
        m.width = read_scalar(reader, "width");
        m.coefficients = read_matrix(reader, "coefficients");
        m.anchors = read_matrix(reader, "anchor_points");
        if (m.coefficients.rows() != classes || m.coefficients.cols() != anchors)
            throw_parse("coefficients shape disagrees with the declared dimensions");
        if (m.anchors.rows() != anchors || m.anchors.cols() != dim)
            throw_parse("anchor block shape disagrees with the declared dimensions");
        return Model(std::move(m));
    }
    if (kind == "one_hidden_layer") {
        const auto units = static_cast<Eigen::Index>(read_scalar(reader, "hidden_units"));
        OneHiddenLayerModel m;
        m.steepness = read_scalar(reader, "steepness");
        const bool has_hb = read_scalar(reader, "has_hidden_bias") != 0.0;
        const bool has_ob = read_scalar(reader, "has_output_bias") != 0.0;
        m.hidden_weights = read_matrix(reader, "hidden_weights");
        m.output_weights = read_matrix(reader, "output_weights");
        if (m.hidden_weights.rows() != units || m.hidden_weights.cols() != dim)
            throw_parse("hidden weight shape disagrees with the declared dimensions");
        if (m.output_weights.rows() != classes || m.output_weights.cols() != units)
            throw_parse("output weight shape disagrees with the declared dimensions");
        if (has_hb)
            m.hidden_bias = read_vector(reader, "hidden_bias");
        if (has_ob)
            m.output_bias = read_vector(reader, "output_bias");
        return Model(std::move(m));
    }
    throw_parse("unknown model kind '" + kind + "'");
}

Model load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw_io("cannot open '" + path + "' for reading");
    return load_model(in);
}

} // namespace certilip
