#pragma once

/// \file spectral.hpp
/// Radix-2 FFT, FFT-based convolution and the discrete Hilbert transforms
/// used by the Benjamin-Ono residual.

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace dpinn {

using Complex = std::complex<double>;

/// In-place FFT of a power-of-two length sequence. The inverse transform is
/// normalised by 1/n.
void fft(std::vector<Complex>& a, bool inverse = false);

/// Circular convolution c_i = sum_m a_m b_{(i - m) mod n} of equal-length
/// sequences, zero-padded to a power of two internally.
Eigen::ArrayXd fft_convolve(const Eigen::Ref<const Eigen::ArrayXd>& a, const Eigen::Ref<const Eigen::ArrayXd>& b);

/// Discrete Hilbert transform on the grid {x_i}, i = -N..N (2N+1 values).
///
/// periodic: H u(x_i) = 1/(2N) sum_{j != 0} cot(pi j / 2N) u(x_{i-j}) with
/// indices modulo 2N, so x_N and x_{-N} are the same periodic node; the output
/// at x_N repeats x_{-N} and the input at x_N is not read.
///
/// line: the values are extended by zero outside [-L, L] and convolved with
/// dx / (pi x_j) = 1 / (pi j), j != 0. Since the extension is zero, the
/// restriction to [-L, L] only involves the original nodes.
class HilbertTransform {
public:
    enum class Kind { periodic, line };

    static HilbertTransform periodic(int half_nodes);
    static HilbertTransform line(int half_nodes);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] int half_nodes() const noexcept { return half_nodes_; }
    [[nodiscard]] int size() const noexcept { return 2 * half_nodes_ + 1; }

    [[nodiscard]] Eigen::ArrayXd apply(const Eigen::Ref<const Eigen::ArrayXd>& u) const;
    /// Transpose of `apply` (used to pull residual adjoints back to u_xx).
    [[nodiscard]] Eigen::ArrayXd apply_transpose(const Eigen::Ref<const Eigen::ArrayXd>& v) const;
    /// Dense (2N+1)^2 matrix of the operator, built from the kernel directly.
    [[nodiscard]] Eigen::MatrixXd matrix() const;

private:
    HilbertTransform(Kind kind, int half_nodes);
    [[nodiscard]] Eigen::ArrayXd convolve(const Eigen::Ref<const Eigen::ArrayXd>& u, double sign) const;

    Kind kind_;
    int half_nodes_;
    int length_;                     // 2N (periodic core) or 2N+1 (line)
    int padded_;                     // power-of-two FFT size
    std::vector<double> kernel_;     // k_d at offset d + length - 1
    std::vector<Complex> kernel_hat_;
};

}  // namespace dpinn
