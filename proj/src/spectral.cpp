#include "dpinn/spectral.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dpinn {

void fft(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || !std::has_single_bit(n)) {
        throw std::invalid_argument("fft length must be a power of two");
    }
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(a[i], a[j]);
        }
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::size_t half = len / 2;
        std::vector<Complex> w(half);
        for (std::size_t k = 0; k < half; ++k) {
            w[k] = std::polar(1.0, angle * static_cast<double>(k));
        }
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + half] * w[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
    if (inverse) {
        for (auto& v : a) {
            v /= static_cast<double>(n);
        }
    }
}

Eigen::ArrayXd fft_convolve(const Eigen::Ref<const Eigen::ArrayXd>& a, const Eigen::Ref<const Eigen::ArrayXd>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("fft_convolve needs equal lengths");
    }
    const auto n = static_cast<std::size_t>(a.size());
    if (n == 0) {
        return {};
    }
    const std::size_t m = std::bit_ceil(2 * n - 1);
    std::vector<Complex> fa(m), fb(m);
    for (std::size_t i = 0; i < n; ++i) {
        fa[i] = a(static_cast<Eigen::Index>(i));
        fb[i] = b(static_cast<Eigen::Index>(i));
    }
    fft(fa);
    fft(fb);
    for (std::size_t i = 0; i < m; ++i) {
        fa[i] *= fb[i];
    }
    fft(fa, true);
    Eigen::ArrayXd c(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double wrapped = i + n < m ? fa[i + n].real() : 0.0;
        c(static_cast<Eigen::Index>(i)) = fa[i].real() + wrapped;
    }
    return c;
}

HilbertTransform::HilbertTransform(Kind kind, int half_nodes)
    : kind_(kind), half_nodes_(half_nodes), length_(kind == Kind::periodic ? 2 * half_nodes : 2 * half_nodes + 1) {
    if (half_nodes < 1) {
        throw std::invalid_argument("Hilbert transform needs N >= 1");
    }
    // Toeplitz kernel k_d, d = -(n-1)..n-1, stored at offset d + n - 1 for a
    // linear convolution y_i = sum_m u_m k_{i-m}.
    const int n = length_;
    padded_ = static_cast<int>(std::bit_ceil(static_cast<unsigned>(3 * n - 2)));
    kernel_.assign(static_cast<std::size_t>(2 * n - 1), 0.0);
    for (int d = 1; d <= n - 1; ++d) {
        double k = 0.0;
        if (kind == Kind::periodic) {
            // cot(pi j / n) / n, evaluated on the half period so that the
            // kernel is odd to the last bit.
            const int j = d % n;
            if (2 * j < n) {
                k = 1.0 / (std::tan(std::numbers::pi * j / n) * n);
            } else if (2 * j > n) {
                k = -1.0 / (std::tan(std::numbers::pi * (n - j) / n) * n);
            }
        } else {
            k = 1.0 / (std::numbers::pi * d);
        }
        kernel_[static_cast<std::size_t>(n - 1 + d)] = k;
        kernel_[static_cast<std::size_t>(n - 1 - d)] = -k;
    }
    kernel_hat_.assign(static_cast<std::size_t>(padded_), Complex(0.0));
    for (std::size_t i = 0; i < kernel_.size(); ++i) {
        kernel_hat_[i] = kernel_[i];
    }
    fft(kernel_hat_);
}

HilbertTransform HilbertTransform::periodic(int half_nodes) { return {Kind::periodic, half_nodes}; }

HilbertTransform HilbertTransform::line(int half_nodes) { return {Kind::line, half_nodes}; }

Eigen::ArrayXd HilbertTransform::convolve(const Eigen::Ref<const Eigen::ArrayXd>& u, double sign) const {
    const int n = length_;
    std::vector<Complex> f(static_cast<std::size_t>(padded_), Complex(0.0));
    for (int i = 0; i < n; ++i) {
        f[static_cast<std::size_t>(i)] = u(i);
    }
    fft(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] *= kernel_hat_[i];
    }
    fft(f, true);
    Eigen::ArrayXd y(n);
    for (int i = 0; i < n; ++i) {
        y(i) = sign * f[static_cast<std::size_t>(i + n - 1)].real();
    }
    return y;
}

Eigen::ArrayXd HilbertTransform::apply(const Eigen::Ref<const Eigen::ArrayXd>& u) const {
    if (u.size() != size()) {
        throw std::invalid_argument("grid function has the wrong length for this transform");
    }
    if (kind_ == Kind::line) {
        return convolve(u, 1.0);
    }
    Eigen::ArrayXd y(size());
    y.head(length_) = convolve(u.head(length_), 1.0);
    y(length_) = y(0);
    return y;
}

Eigen::ArrayXd HilbertTransform::apply_transpose(const Eigen::Ref<const Eigen::ArrayXd>& v) const {
    if (v.size() != size()) {
        throw std::invalid_argument("grid function has the wrong length for this transform");
    }
    // Both kernels are odd, so the convolution part is antisymmetric.
    if (kind_ == Kind::line) {
        return convolve(v, -1.0);
    }
    Eigen::ArrayXd folded = v.head(length_);
    folded(0) += v(length_);
    Eigen::ArrayXd y(size());
    y.head(length_) = convolve(folded, -1.0);
    y(length_) = 0.0;
    return y;
}

Eigen::MatrixXd HilbertTransform::matrix() const {
    const int n = length_;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size(), size());
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < n; ++c) {
            m(i, c) = kernel_[static_cast<std::size_t>(i - c + n - 1)];
        }
    }
    if (kind_ == Kind::periodic) {
        m.row(n) = m.row(0);
    }
    return m;
}

}  // namespace dpinn
