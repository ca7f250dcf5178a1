#include "dpinn/network.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dpinn {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("checkpoint: bad number '" + s + "'");
    }
    return v;
}

auto block(Matrix& m, int k, Eigen::Index points) { return m.middleCols(k * points, points).array(); }
auto block(const Matrix& m, int k, Eigen::Index points) { return m.middleCols(k * points, points).array(); }

// jet_tanh specialised to the column-block layout; also returns z = 1 - y*y.
void tanh_blocks(const Matrix& a, const JetShape& shape, Eigen::Index P, Matrix& y, Matrix& z) {
    y.setZero(a.rows(), a.cols());
    z.setZero(a.rows(), a.cols());
    block(y, 0, P) = 1.0 - 2.0 / ((2.0 * block(a, 0, P)).exp() + 1.0);
    block(z, 0, P) = 1.0 - block(y, 0, P).square();
    for (int k = 1; k < shape.size(); ++k) {
        const MultiIndex m = shape.multi(k);
        const bool along_x = m.x >= 1;
        const double order = along_x ? m.x : m.t;
        for (const auto& [p, q] : shape.product_terms(k)) {
            const MultiIndex mp = shape.multi(p);
            const int weight = along_x ? mp.x : mp.t;
            if (weight != 0) {
                block(y, k, P) += (weight / order) * block(a, p, P) * block(z, q, P);
            }
        }
        for (const auto& [p, q] : shape.product_terms(k)) {
            block(z, k, P) -= block(y, p, P) * block(y, q, P);
        }
    }
}

}  // namespace

MlpParams::MlpParams(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) {
        throw std::invalid_argument("network needs at least an input and an output width");
    }
    for (int w : widths_) {
        if (w <= 0) {
            throw std::invalid_argument("layer widths must be positive");
        }
    }
    Eigen::Index offset = 0;
    for (std::size_t k = 0; k + 1 < widths_.size(); ++k) {
        offsets_.push_back(offset);
        offset += static_cast<Eigen::Index>(widths_[k] + 1) * widths_[k + 1];
    }
    theta_ = Vector::Zero(offset);
    input_offset = Vector::Zero(widths_.front());
    input_scale = Vector::Ones(widths_.front());
}

Eigen::Index MlpParams::parameter_count(const std::vector<int>& widths) {
    Eigen::Index m = 0;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        m += static_cast<Eigen::Index>(widths[k] + 1) * widths[k + 1];
    }
    return m;
}

Eigen::Map<const Matrix> MlpParams::weight(int k) const {
    const auto kk = static_cast<std::size_t>(k);
    return {theta_.data() + offsets_.at(kk), widths_[kk + 1], widths_[kk]};
}

Eigen::Map<Matrix> MlpParams::weight(int k) {
    const auto kk = static_cast<std::size_t>(k);
    return {theta_.data() + offsets_.at(kk), widths_[kk + 1], widths_[kk]};
}

Eigen::Map<const Vector> MlpParams::bias(int k) const {
    const auto kk = static_cast<std::size_t>(k);
    return {theta_.data() + offsets_.at(kk) + static_cast<Eigen::Index>(widths_[kk]) * widths_[kk + 1],
            widths_[kk + 1]};
}

Eigen::Map<Vector> MlpParams::bias(int k) {
    const auto kk = static_cast<std::size_t>(k);
    return {theta_.data() + offsets_.at(kk) + static_cast<Eigen::Index>(widths_[kk]) * widths_[kk + 1],
            widths_[kk + 1]};
}

Vector MlpParams::weight_mask() const {
    Vector mask = Vector::Zero(theta_.size());
    for (int k = 0; k < layer_count(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        mask.segment(offsets_[kk], static_cast<Eigen::Index>(widths_[kk]) * widths_[kk + 1]).setOnes();
    }
    return mask;
}

bool operator==(const MlpParams& a, const MlpParams& b) {
    return a.widths_ == b.widths_ && a.theta_ == b.theta_ && a.input_offset == b.input_offset &&
           a.input_scale == b.input_scale;
}

MlpParams init_params(const std::vector<int>& widths, std::uint64_t seed) {
    if (widths.empty()) {
        throw std::invalid_argument("init_params: empty widths");
    }
    MlpParams params(widths);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < params.layer_count(); ++k) {
        auto w = params.weight(k);
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                w(r, c) = dist(rng);
            }
        }
    }
    return params;
}

Array GradTape::derivative(int i, int j) const {
    const int k = shape->index(i, j);
    if (k < 0) {
        throw std::out_of_range("derivative not carried by the jet shape");
    }
    return coefficient(k).transpose().array() * shape->factorial_weight(k);
}

void GradTape::add_derivative_adjoint(int i, int j, const Eigen::Ref<const Array>& values) {
    const int k = shape->index(i, j);
    if (k < 0) {
        throw std::out_of_range("derivative not carried by the jet shape");
    }
    if (output_adjoint.size() == 0) {
        output_adjoint = Matrix::Zero(1, output.cols());
    }
    output_adjoint.row(0).segment(k * points, points).array() += values.transpose() * shape->factorial_weight(k);
}

GradTape forward_batch(const MlpParams& params, const Eigen::Ref<const Matrix>& inputs, const ShapePtr& shape) {
    if (inputs.rows() != params.input_dim()) {
        throw std::invalid_argument("input dimension does not match the network");
    }
    GradTape tape;
    tape.params = &params;
    tape.shape = shape;
    tape.points = inputs.cols();
    const Eigen::Index P = tape.points;
    const int S = shape->size();

    Matrix input = Matrix::Zero(inputs.rows(), S * P);
    input.leftCols(P) =
        ((inputs.colwise() - params.input_offset).array().colwise() * params.input_scale.array()).matrix();
    if (const int kt = shape->index(1, 0); kt >= 0) {
        input.row(0).segment(kt * P, P).setConstant(params.input_scale(0));
    }
    if (const int kx = shape->index(0, 1); kx >= 0 && inputs.rows() > 1) {
        input.row(1).segment(kx * P, P).setConstant(params.input_scale(1));
    }
    const int L = params.layer_count();
    tape.activations.reserve(static_cast<std::size_t>(L));
    tape.tanh_slopes.reserve(static_cast<std::size_t>(L - 1));
    tape.activations.push_back(std::move(input));

    Matrix a;
    for (int k = 0; k < L; ++k) {
        a.noalias() = params.weight(k) * tape.activations.back();
        a.leftCols(P).colwise() += params.bias(k);
        if (k + 1 < L) {
            Matrix y;
            Matrix z;
            tanh_blocks(a, *shape, P, y, z);
            tape.activations.push_back(std::move(y));
            tape.tanh_slopes.push_back(std::move(z));
        } else {
            tape.output = std::move(a);
        }
    }
    return tape;
}

Vector loss_gradient(const GradTape& tape) {
    const MlpParams& params = *tape.params;
    Vector grad = Vector::Zero(params.theta().size());
    if (tape.output_adjoint.size() == 0) {
        return grad;
    }
    const Eigen::Index P = tape.points;
    const JetShape& shape = *tape.shape;
    Matrix adj = tape.output_adjoint;
    Matrix adj_y;
    for (int k = params.layer_count() - 1; k >= 0; --k) {
        const Matrix& prev = tape.activations[static_cast<std::size_t>(k)];
        const Eigen::Index rows = adj.rows();
        const Eigen::Index cols = prev.rows();
        Eigen::Map<Matrix>(grad.data() + params.offset(k), rows, cols).noalias() = adj * prev.transpose();
        grad.segment(params.offset(k) + rows * cols, rows) = adj.leftCols(P).rowwise().sum();
        if (k == 0) {
            break;
        }
        adj_y.noalias() = params.weight(k).transpose() * adj;
        // The tanh layer is linear in its input jet with factor z = 1 - y*y.
        const Matrix& z = tape.tanh_slopes[static_cast<std::size_t>(k - 1)];
        adj.setZero(adj_y.rows(), adj_y.cols());
        for (int m = 0; m < shape.size(); ++m) {
            for (const auto& [p, q] : shape.product_terms(m)) {
                block(adj, q, P) += block(adj_y, m, P) * block(z, p, P);
            }
        }
    }
    return grad;
}

Jet2<double> forward_jet(const MlpParams& params, const Eigen::Ref<const Vector>& point, const ShapePtr& shape) {
    const GradTape tape = forward_batch(params, point, shape);
    Jet2<double> out(shape);
    for (int k = 0; k < shape->size(); ++k) {
        out[k] = tape.output(0, k);
    }
    return out;
}

Array evaluate(const MlpParams& params, const Eigen::Ref<const Matrix>& inputs) {
    if (inputs.rows() != params.input_dim()) {
        throw std::invalid_argument("input dimension does not match the network");
    }
    Matrix z = ((inputs.colwise() - params.input_offset).array().colwise() * params.input_scale.array()).matrix();
    const int L = params.layer_count();
    for (int k = 0; k < L; ++k) {
        Matrix a = params.weight(k) * z;
        a.colwise() += params.bias(k);
        z = k + 1 < L ? Matrix(a.array().tanh().matrix()) : a;
    }
    return z.row(0).transpose().array();
}

void write_checkpoint(std::ostream& out, const MlpParams& params) {
    out << "dpinn-checkpoint 1\n";
    out << "widths";
    for (int w : params.widths()) {
        out << ' ' << w;
    }
    out << "\ninput_offset";
    for (double v : params.input_offset) {
        out << ' ' << format_double(v);
    }
    out << "\ninput_scale";
    for (double v : params.input_scale) {
        out << ' ' << format_double(v);
    }
    out << "\ntheta " << params.theta().size() << '\n';
    for (double v : params.theta()) {
        out << format_double(v) << '\n';
    }
}

MlpParams read_checkpoint(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "dpinn-checkpoint 1") {
        throw std::runtime_error("checkpoint: missing header");
    }
    auto read_tagged = [&](const std::string& tag) {
        if (!std::getline(in, line)) {
            throw std::runtime_error("checkpoint: truncated before '" + tag + "'");
        }
        std::istringstream ls(line);
        std::string got;
        ls >> got;
        if (got != tag) {
            throw std::runtime_error("checkpoint: expected '" + tag + "', found '" + got + "'");
        }
        std::vector<std::string> fields;
        for (std::string f; ls >> f;) {
            fields.push_back(f);
        }
        return fields;
    };
    std::vector<int> widths;
    for (const auto& f : read_tagged("widths")) {
        widths.push_back(std::stoi(f));
    }
    MlpParams params(widths);
    const auto offsets = read_tagged("input_offset");
    const auto scales = read_tagged("input_scale");
    if (static_cast<int>(offsets.size()) != params.input_dim() || static_cast<int>(scales.size()) != params.input_dim()) {
        throw std::runtime_error("checkpoint: input map has the wrong dimension");
    }
    for (int i = 0; i < params.input_dim(); ++i) {
        params.input_offset(i) = parse_double(offsets[static_cast<std::size_t>(i)]);
        params.input_scale(i) = parse_double(scales[static_cast<std::size_t>(i)]);
    }
    const auto count = read_tagged("theta");
    if (count.size() != 1 || std::stol(count[0]) != params.theta().size()) {
        throw std::runtime_error("checkpoint: parameter count does not match widths");
    }
    for (Eigen::Index i = 0; i < params.theta().size(); ++i) {
        if (!std::getline(in, line)) {
            throw std::runtime_error("checkpoint: truncated parameter list");
        }
        params.theta()(i) = parse_double(line);
    }
    return params;
}

void save_checkpoint(const std::string& path, const MlpParams& params) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write checkpoint " + path);
    }
    write_checkpoint(out, params);
}

MlpParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open checkpoint " + path);
    }
    return read_checkpoint(in);
}

}  // namespace dpinn
