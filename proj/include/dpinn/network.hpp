#pragma once

/// \file network.hpp
/// tanh multilayer perceptron evaluated on batches of jets, with reverse
/// accumulation of parameter gradients through the jet coefficients.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpinn/jets.hpp"

namespace dpinn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Array = Eigen::ArrayXd;

/// Network parameters. All storage lives in the flat vector `theta`, laid out
/// layer by layer as W_k (column-major, d_{k+1} x d_k) followed by b_k.
///
/// Inputs pass through a fixed (non-trainable) affine map
/// z -> (z - input_offset) .* input_scale before the first layer; the
/// default is the identity.
class MlpParams {
public:
    MlpParams() = default;
    explicit MlpParams(std::vector<int> widths);

    /// M = sum_k (d_k + 1) d_{k+1}.
    static Eigen::Index parameter_count(const std::vector<int>& widths);

    [[nodiscard]] const std::vector<int>& widths() const noexcept { return widths_; }
    [[nodiscard]] int input_dim() const { return widths_.front(); }
    /// Number of affine maps C_1..C_{K-1}.
    [[nodiscard]] int layer_count() const noexcept { return static_cast<int>(widths_.size()) - 1; }

    [[nodiscard]] Eigen::Map<const Matrix> weight(int k) const;
    [[nodiscard]] Eigen::Map<Matrix> weight(int k);
    [[nodiscard]] Eigen::Map<const Vector> bias(int k) const;
    [[nodiscard]] Eigen::Map<Vector> bias(int k);

    [[nodiscard]] const Vector& theta() const noexcept { return theta_; }
    [[nodiscard]] Vector& theta() noexcept { return theta_; }

    /// Start of layer k (its weight matrix) inside theta.
    [[nodiscard]] Eigen::Index offset(int k) const { return offsets_.at(static_cast<std::size_t>(k)); }

    /// 1 for entries of theta that belong to a weight matrix, 0 for biases.
    [[nodiscard]] Vector weight_mask() const;

    Vector input_offset;
    Vector input_scale;

    friend bool operator==(const MlpParams& a, const MlpParams& b);

private:
    std::vector<int> widths_;
    std::vector<Eigen::Index> offsets_;
    Vector theta_;
};

/// Xavier-uniform weights, zero biases; deterministic for a given seed.
MlpParams init_params(const std::vector<int>& widths, std::uint64_t seed);

/// Forward record of one batched jet evaluation.
///
/// Every layer value is a (width x S*P) matrix: S coefficient blocks of P
/// columns, block k holding coefficient `shape->multi(k)` for all points.
struct GradTape {
    const MlpParams* params = nullptr;
    ShapePtr shape;
    Eigen::Index points = 0;
    std::vector<Matrix> activations;  ///< input layer, then each hidden layer after tanh
    std::vector<Matrix> tanh_slopes;  ///< 1 - y*y jets of each hidden layer
    Matrix output;                    ///< 1 x S*P output jet
    Matrix output_adjoint;            ///< d(loss)/d(output), filled by the caller

    [[nodiscard]] auto coefficient(int k) const { return output.row(0).segment(k * points, points); }

    /// d_t^i d_x^j u for every point of the batch.
    [[nodiscard]] Array derivative(int i, int j) const;
    /// Adds `values` (adjoints with respect to d_t^i d_x^j u) into output_adjoint.
    void add_derivative_adjoint(int i, int j, const Eigen::Ref<const Array>& values);
};

/// Batched forward pass. `inputs` is (d_1 x P): row 0 is t, row 1 is x,
/// further rows are constant parameters.
GradTape forward_batch(const MlpParams& params, const Eigen::Ref<const Matrix>& inputs, const ShapePtr& shape);

/// Reverse accumulation through the recorded batch. Requires
/// `tape.output_adjoint` to be set; returns a vector of length M.
Vector loss_gradient(const GradTape& tape);

/// Jet of the network output at one point.
Jet2<double> forward_jet(const MlpParams& params, const Eigen::Ref<const Vector>& point, const ShapePtr& shape);

/// Plain pointwise evaluation of u at the columns of `inputs`.
Array evaluate(const MlpParams& params, const Eigen::Ref<const Matrix>& inputs);

/// Text checkpoint: see README for the layout.
void write_checkpoint(std::ostream& out, const MlpParams& params);
MlpParams read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const MlpParams& params);
MlpParams load_checkpoint(const std::string& path);

}  // namespace dpinn
