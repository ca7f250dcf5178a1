#pragma once

/// \file equations.hpp
/// Interior, spatial-boundary and temporal-boundary residuals of the four
/// equation families, evaluated from network jets (with exact parameter
/// gradients of weighted squared sums) or from finite differences of a
/// reference solution.

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "dpinn/exact.hpp"
#include "dpinn/jets.hpp"
#include "dpinn/network.hpp"
#include "dpinn/sampling.hpp"
#include "dpinn/spectral.hpp"

namespace dpinn {

enum class EquationKind { kdv_kawahara, camassa_holm, benjamin_ono, kdv_parametric };

std::string to_string(EquationKind kind);
EquationKind equation_kind_from_string(const std::string& name);

/// Equation and its boundary/initial data.
///
/// kdv_kawahara:   u_t + u u_x + alpha u_xxx - beta u_xxxxx (+ u_x with drift)
/// camassa_holm:   u_t - u_txx + 3 u u_x + 2 kappa u_x - 2 u_x u_xx - u u_xxx
/// benjamin_ono:   u_t + u u_x - H u_xx on time slices of a Cartesian grid
/// kdv_parametric: u_t + gamma u u_x + kappa u_xxx, inputs (t, x, alpha, beta, gamma, kappa)
///
/// Boundary and initial data are traces of `data`; an empty reference means
/// homogeneous data.
struct EquationSpec {
    EquationKind kind = EquationKind::kdv_kawahara;
    double alpha = 1.0;
    double beta = 0.0;
    bool drift = false;
    double kappa = 0.0;
    HilbertTransform::Kind hilbert = HilbertTransform::Kind::periodic;
    exact::Reference data;
};

/// Components of the spatial boundary residual: 5, 4, 1 and 3.
int spatial_components(EquationKind kind);

/// Residual values per training point. `spatial` is n_sb x components.
/// For Camassa-Holm `temporal` holds the composite value
/// sqrt((u - u0)^2 + (u_x - u0_x)^2).
struct ResidualBundle {
    Array interior;
    Matrix spatial;
    Array temporal;
};

/// Weighted squared residual sums (E_T^int)^2, (E_T^sb)^2, (E_T^tb)^2.
struct ResidualSums {
    double interior = 0.0;
    double spatial = 0.0;
    double temporal = 0.0;
};

/// Multipliers of the three sums in a loss.
struct LossScales {
    double interior = 1.0;
    double spatial = 1.0;
    double temporal = 1.0;
};

/// Residual assembly for one equation on one training set. Boundary and
/// initial data are evaluated once at construction. Interior points are
/// processed in chunks (one time slice per chunk for Benjamin-Ono).
class ResidualSystem {
public:
    ResidualSystem(EquationSpec spec, TrainingSet set, int chunk = 256);

    [[nodiscard]] const EquationSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const TrainingSet& training_set() const noexcept { return set_; }

    /// Jet shapes used for the three point groups.
    [[nodiscard]] const ShapePtr& interior_shape() const noexcept { return interior_shape_; }
    [[nodiscard]] const ShapePtr& spatial_shape() const noexcept { return spatial_shape_; }
    [[nodiscard]] const ShapePtr& temporal_shape() const noexcept { return temporal_shape_; }

    [[nodiscard]] ResidualBundle residuals(const MlpParams& params) const;
    /// Same residuals with all derivatives of u taken from `solution` by
    /// central differences.
    [[nodiscard]] ResidualBundle residuals(const exact::Reference& solution) const;

    /// Weighted squared sums; if `grad` is non-null it receives the gradient
    /// of scales.interior * interior + scales.spatial * spatial + scales.temporal * temporal.
    ResidualSums sums(const MlpParams& params, const LossScales& scales, Vector* grad) const;

    /// Weighted squared sums of an existing bundle.
    [[nodiscard]] ResidualSums sums(const ResidualBundle& bundle) const;

private:
    /// Derivatives d_t^i d_x^j u at the columns of `points`, one array per
    /// position of `shape`.
    using FieldSource = std::function<std::vector<Array>(const Matrix& points, const ShapePtr& shape)>;

    void check_network(const MlpParams& params) const;
    [[nodiscard]] ResidualBundle collect(const FieldSource& source) const;

    EquationSpec spec_;
    TrainingSet set_;
    int chunk_;
    ShapePtr interior_shape_;
    ShapePtr spatial_shape_;
    ShapePtr temporal_shape_;
    Matrix spatial_points_;  // left block then right block
    Matrix spatial_data_;    // n_sb x components
    Matrix temporal_data_;   // n_tb x (1 or 2)
    std::vector<HilbertTransform> hilbert_;
};

}  // namespace dpinn
