#pragma once

/// \file jets.hpp
/// Truncated bivariate Taylor arithmetic in (t, x).
///
/// A jet stores the Taylor-normalized coefficients f_{ij} = d_t^i d_x^j f / (i! j!)
/// of a scalar field at an expansion point. Coefficients live on a
/// downward-closed set of multi-indices (a JetShape), so products are plain
/// truncated Cauchy convolutions. The coefficient type is a template
/// parameter: `double` for a single point, or an Eigen array holding the same
/// coefficient for a whole batch of points.

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dpinn {

/// A multi-index (i, j): i time derivatives, j space derivatives.
struct MultiIndex {
    int t = 0;
    int x = 0;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Downward-closed set of multi-indices. Row i holds x-orders 0..max_x[i].
///
/// `rectangle(I, J)` is the full (I+1)(J+1) block. `staircase` keeps only the
/// mixed coefficients an equation needs (e.g. {0..5} x-orders at t-order 0
/// and only the pure u_t at t-order 1 for the Kawahara residual).
class JetShape {
public:
    /// Builds a staircase shape; `max_x` must be non-increasing and non-empty.
    explicit JetShape(std::vector<int> max_x);

    static std::shared_ptr<const JetShape> rectangle(int t_degree, int x_degree);
    static std::shared_ptr<const JetShape> staircase(std::vector<int> max_x);

    [[nodiscard]] int size() const noexcept { return static_cast<int>(indices_.size()); }
    [[nodiscard]] int t_degree() const noexcept { return static_cast<int>(max_x_.size()) - 1; }
    [[nodiscard]] int x_degree() const noexcept { return max_x_.front(); }
    [[nodiscard]] const std::vector<int>& max_x() const noexcept { return max_x_; }
    [[nodiscard]] bool is_rectangle() const noexcept;

    /// Position of (i, j) in coefficient storage, or -1 when not stored.
    [[nodiscard]] int index(int i, int j) const noexcept;
    [[nodiscard]] bool contains(int i, int j) const noexcept { return index(i, j) >= 0; }
    [[nodiscard]] MultiIndex multi(int k) const { return indices_.at(static_cast<std::size_t>(k)); }

    /// Pairs (p, q) of storage positions with multi(p) + multi(q) == multi(k).
    [[nodiscard]] const std::vector<std::pair<int, int>>& product_terms(int k) const {
        return products_[static_cast<std::size_t>(k)];
    }

    /// i! j! for storage position k.
    [[nodiscard]] double factorial_weight(int k) const { return factorials_[static_cast<std::size_t>(k)]; }

    friend bool operator==(const JetShape& a, const JetShape& b) noexcept { return a.max_x_ == b.max_x_; }

private:
    std::vector<int> max_x_;
    std::vector<int> offsets_;
    std::vector<MultiIndex> indices_;
    std::vector<std::vector<std::pair<int, int>>> products_;
    std::vector<double> factorials_;
};

using ShapePtr = std::shared_ptr<const JetShape>;

namespace detail {
inline void require_same_shape(const ShapePtr& a, const ShapePtr& b) {
    if (a != b && !(*a == *b)) {
        throw std::invalid_argument("jet shapes differ");
    }
}

template <typename Scalar>
Scalar zero_like(const Scalar& like) {
    if constexpr (std::is_arithmetic_v<Scalar>) {
        (void)like;
        return Scalar{0};
    } else {
        return Scalar::Zero(like.rows(), like.cols());
    }
}

template <typename Scalar>
Scalar constant_like(const Scalar& like, double value) {
    if constexpr (std::is_arithmetic_v<Scalar>) {
        (void)like;
        return Scalar(value);
    } else {
        return Scalar::Constant(like.rows(), like.cols(), value);
    }
}

template <typename Scalar>
Scalar tanh_of(const Scalar& v) {
    if constexpr (std::is_arithmetic_v<Scalar>) {
        return std::tanh(v);
    } else {
        // Eigen's tanh is not vectorised for double; the exp form is, and
        // saturates correctly to +-1 when exp overflows or underflows.
        return 1.0 - 2.0 / ((2.0 * v).exp() + 1.0);
    }
}
}  // namespace detail

/// Truncated bivariate Taylor polynomial with coefficients of type Scalar.
template <typename Scalar>
class Jet2 {
public:
    Jet2(ShapePtr shape, Scalar zero) : shape_(std::move(shape)) {
        coeffs_.assign(static_cast<std::size_t>(shape_->size()), zero);
    }

    explicit Jet2(ShapePtr shape)
        requires std::is_arithmetic_v<Scalar>
        : Jet2(std::move(shape), Scalar{0}) {}

    [[nodiscard]] const ShapePtr& shape() const noexcept { return shape_; }
    [[nodiscard]] int size() const noexcept { return shape_->size(); }

    Scalar& operator[](int k) { return coeffs_[static_cast<std::size_t>(k)]; }
    const Scalar& operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }

    /// Taylor coefficient at (i, j); throws if the shape does not store it.
    [[nodiscard]] const Scalar& coeff(int i, int j) const { return coeffs_.at(checked_index(i, j)); }
    Scalar& coeff(int i, int j) { return coeffs_.at(checked_index(i, j)); }

    /// d_t^i d_x^j f at the expansion point.
    [[nodiscard]] Scalar derivative(int i, int j) const {
        const int k = static_cast<int>(checked_index(i, j));
        return coeffs_[static_cast<std::size_t>(k)] * shape_->factorial_weight(k);
    }

    [[nodiscard]] const std::vector<Scalar>& coeffs() const noexcept { return coeffs_; }

private:
    std::size_t checked_index(int i, int j) const {
        const int k = shape_->index(i, j);
        if (k < 0) {
            throw std::out_of_range("multi-index not stored in jet shape");
        }
        return static_cast<std::size_t>(k);
    }

    ShapePtr shape_;
    std::vector<Scalar> coeffs_;
};

enum class Coordinate { time, space };

/// Jet of a constant function.
template <typename Scalar>
Jet2<Scalar> jet_constant(const ShapePtr& shape, const Scalar& value) {
    Jet2<Scalar> out(shape, detail::zero_like(value));
    out[0] = value;
    return out;
}

/// Jet of the coordinate function t or x evaluated at `value`.
template <typename Scalar>
Jet2<Scalar> seed_input(Coordinate which, const Scalar& value, const ShapePtr& shape) {
    Jet2<Scalar> out = jet_constant(shape, value);
    const int k = which == Coordinate::time ? shape->index(1, 0) : shape->index(0, 1);
    if (k >= 0) {
        out[k] = detail::constant_like(value, 1.0);
    }
    return out;
}

template <typename Scalar>
Jet2<Scalar> jet_add(const Jet2<Scalar>& a, const Jet2<Scalar>& b) {
    detail::require_same_shape(a.shape(), b.shape());
    Jet2<Scalar> out = a;
    for (int k = 0; k < a.size(); ++k) {
        out[k] += b[k];
    }
    return out;
}

template <typename Scalar>
Jet2<Scalar> jet_scale(const Jet2<Scalar>& a, double s) {
    Jet2<Scalar> out = a;
    for (int k = 0; k < a.size(); ++k) {
        out[k] *= s;
    }
    return out;
}

/// Truncated Cauchy product.
template <typename Scalar>
Jet2<Scalar> jet_mul(const Jet2<Scalar>& a, const Jet2<Scalar>& b) {
    detail::require_same_shape(a.shape(), b.shape());
    const JetShape& shape = *a.shape();
    Jet2<Scalar> out(a.shape(), detail::zero_like(a[0]));
    for (int k = 0; k < shape.size(); ++k) {
        for (const auto& [p, q] : shape.product_terms(k)) {
            out[k] += a[p] * b[q];
        }
    }
    return out;
}

/// Composition tanh(a), using tanh' = 1 - tanh^2.
///
/// Coefficients with j >= 1 come from differentiating in x, those with
/// j == 0 from differentiating in t:
///   j y_{ij} = sum_{q>=1} q a_{pq} z_{i-p,j-q},   z = 1 - y*y.
template <typename Scalar>
Jet2<Scalar> jet_tanh(const Jet2<Scalar>& a) {
    const JetShape& shape = *a.shape();
    const Scalar zero = detail::zero_like(a[0]);
    Jet2<Scalar> y(a.shape(), zero);
    Jet2<Scalar> z(a.shape(), zero);
    y[0] = detail::tanh_of(a[0]);
    z[0] = detail::constant_like(a[0], 1.0) - y[0] * y[0];
    for (int k = 1; k < shape.size(); ++k) {
        const MultiIndex m = shape.multi(k);
        const bool along_x = m.x >= 1;
        const double order = along_x ? m.x : m.t;
        for (const auto& [p, q] : shape.product_terms(k)) {
            const MultiIndex mp = shape.multi(p);
            const int weight = along_x ? mp.x : mp.t;
            if (weight != 0) {
                y[k] += (weight / order) * a[p] * z[q];
            }
        }
        for (const auto& [p, q] : shape.product_terms(k)) {
            z[k] -= y[p] * y[q];
        }
    }
    return y;
}

/// Adjoint of the truncated product with a fixed factor `f`:
/// given w = f * v, accumulates adj_v[n] += sum_m adj_w[m] f[m - n].
template <typename Scalar>
void jet_mul_adjoint(const Jet2<Scalar>& factor, const Jet2<Scalar>& adj_out, Jet2<Scalar>& adj_in) {
    const JetShape& shape = *factor.shape();
    for (int k = 0; k < shape.size(); ++k) {
        for (const auto& [p, q] : shape.product_terms(k)) {
            adj_in[q] += adj_out[k] * factor[p];
        }
    }
}

/// 1 - y*y for a jet y = tanh(a); the truncated derivative of the composition.
template <typename Scalar>
Jet2<Scalar> tanh_derivative_jet(const Jet2<Scalar>& y) {
    Jet2<Scalar> z = jet_scale(jet_mul(y, y), -1.0);
    z[0] += detail::constant_like(y[0], 1.0);
    return z;
}

}  // namespace dpinn
