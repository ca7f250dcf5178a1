#pragma once

/// \file sampling.hpp
/// Training sets: Sobol points for interiors and boundaries, Cartesian
/// time-sliced grids for Benjamin-Ono interiors.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace dpinn {

/// Unscrambled Sobol sequence (Joe-Kuo direction numbers), skipping the
/// initial all-zero point. Supports up to max_dim dimensions.
class SobolSequence {
public:
    static constexpr int max_dim = 8;

    explicit SobolSequence(int dim);

    /// Next point, each coordinate in (0, 1).
    Eigen::VectorXd next();

    [[nodiscard]] int dim() const noexcept { return dim_; }

private:
    static constexpr int bits = 52;
    int dim_;
    std::uint64_t index_ = 0;
    std::vector<std::uint64_t> state_;
    std::vector<std::vector<std::uint64_t>> directions_;
};

/// First n points as columns of a (dim x n) matrix.
Eigen::MatrixXd sobol_points(int n, int dim);

/// Space-time domain (x_left, x_right) x (0, T), optionally extended by a box
/// of constant parameters that become extra network inputs.
struct Domain {
    double x_left = 0.0;
    double x_right = 1.0;
    double T = 1.0;
    std::vector<double> param_lo;
    std::vector<double> param_hi;

    [[nodiscard]] int param_dim() const noexcept { return static_cast<int>(param_lo.size()); }
    /// Network input dimension: t, x and the parameters.
    [[nodiscard]] int input_dim() const noexcept { return 2 + param_dim(); }
    [[nodiscard]] double length() const noexcept { return x_right - x_left; }
};

/// Points as columns (rows: t, x, parameters...) with one quadrature weight each.
struct PointBlock {
    Eigen::MatrixXd points;
    Eigen::ArrayXd weights;

    [[nodiscard]] Eigen::Index size() const noexcept { return points.cols(); }
};

/// Time-sliced uniform grid: slice k holds nodes x_{-N..N} at time t_k.
/// Interior points are stored slice by slice, nodes left to right.
struct CartesianGrid {
    int half_nodes = 0;  ///< N
    int slices = 0;
    double dx = 0.0;
    double dt = 0.0;

    [[nodiscard]] int nodes_per_slice() const noexcept { return 2 * half_nodes + 1; }
};

/// Interior, spatial-boundary and temporal-boundary collocation points.
///
/// Parameter dimensions are treated as a probability measure: weights carry
/// the space-time measure only, so sums over the parameter box are averages.
struct TrainingSet {
    Domain domain;
    PointBlock interior;
    PointBlock spatial_left;   ///< x = x_left
    PointBlock spatial_right;  ///< x = x_right, same (t, parameters) as spatial_left
    PointBlock temporal;       ///< t = 0
    std::optional<CartesianGrid> grid;

    [[nodiscard]] Eigen::Index n_int() const noexcept { return interior.size(); }
    [[nodiscard]] Eigen::Index n_sb() const noexcept { return spatial_left.size(); }
    [[nodiscard]] Eigen::Index n_tb() const noexcept { return temporal.size(); }
};

/// Sobol interior, boundaries with shared t_n on both faces, equal weights.
TrainingSet build_training_set(const Domain& domain, int n_int, int n_sb, int n_tb);

/// Cartesian interior on a symmetric domain (-L, L): 2N+1 nodes with x_0 = 0,
/// dt = ratio * dx, slices t_k = k dt for k = 1..floor(T / dt). Weights are
/// trapezoidal in x and T / slices in time.
PointBlock cartesian_interior(const Domain& domain, int half_nodes, double ratio, CartesianGrid* grid = nullptr);

/// Sobol boundaries with a Cartesian interior.
TrainingSet build_cartesian_training_set(const Domain& domain, int half_nodes, double ratio, int n_sb, int n_tb);

/// CSV with columns kind,t,x,p0..,weight.
void write_training_set_csv(std::ostream& out, const TrainingSet& set);

}  // namespace dpinn
