#pragma once

/// \file metrics.hpp
/// Generalization errors, derivative sup norms, the a-posteriori error
/// bounds of the three equation families and parameter statistics.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

#include "dpinn/equations.hpp"
#include "dpinn/exact.hpp"
#include "dpinn/network.hpp"
#include "dpinn/sampling.hpp"

namespace dpinn {

/// Quadrature nodes (rows t, x, parameters...) and weights.
struct Quadrature {
    Matrix points;
    Array weights;
};

/// Trapezoid rule on an nx x nt tensor grid of (x_left, x_right) x (0, T).
Quadrature tensor_quadrature(const Domain& domain, int nx, int nt);

/// Trapezoid (x, t) grid combined with n_params Sobol points of the parameter
/// box. The box counts as a probability measure, so weights average over it.
Quadrature parametric_quadrature(const Domain& domain, int nx, int nt, int n_params);

/// 256 x 256 tensor grid, or 64 x 64 x 256 samples for parametric domains.
Quadrature evaluation_quadrature(const Domain& domain);

struct GeneralizationError {
    double absolute = 0.0;
    double relative = 0.0;  ///< absolute / ||u||_L2 on the same nodes
};

GeneralizationError generalization_error(const Array& model, const Array& exact, const Array& weights);
GeneralizationError generalization_error(const MlpParams& params, const exact::Reference& exact,
                                         const Quadrature& quad);

/// sups(i, j) = max over an nx x nt grid of |d_t^i d_x^j f| for i <= m, j <= n.
/// Networks use jets; references use central differences on the grid itself.
Matrix derivative_sups(const MlpParams& params, const Domain& domain, int m, int n, int nx = 512, int nt = 512);
Matrix derivative_sups(const exact::Reference& fn, const Domain& domain, int m, int n, int nx = 512,
                       int nt = 512);

/// ||f||_{C_t^m C_x^n} = sum_{i <= m, j <= n} sups(i, j).
double mixed_norm(const Matrix& sups, int m, int n);

enum class BoundKind { kdv_kawahara, camassa_holm, benjamin_ono };

/// Bound family of an equation; empty for the parametric problem.
std::optional<BoundKind> bound_kind(EquationKind kind);
std::string to_string(BoundKind kind);

/// Quadrature constants and rates of the theorem statements.
struct QuadratureTails {
    double c_tb = 0.0;
    double c_sb = 0.0;
    double c_int = 0.0;
    double alpha_tb = 1.0;
    double alpha_sb = 1.0;
    double alpha_int = 1.0;
    double n_tb = 1.0;
    double n_sb = 1.0;
    double n_int = 1.0;
};

/// Inputs of the bounds. `e_tb`, `e_sb`, `e_int` are root residual sums:
/// training errors when tails are supplied, otherwise square roots of
/// residual integrals on a fine grid. Sup tables are indexed (i, j) with
/// i <= 1 and j <= 4, as returned by derivative_sups(..., 1, 4).
struct BoundInputs {
    double T = 1.0;
    double e_tb = 0.0;
    double e_sb = 0.0;
    double e_int = 0.0;
    Matrix model_sups = Matrix::Zero(2, 5);
    Matrix exact_sups = Matrix::Zero(2, 5);
    double kappa = 0.0;
    std::optional<QuadratureTails> tails;
};

struct BoundValue {
    double rhs = 0.0;             ///< bound on E_G
    std::vector<double> constants;  ///< C_1, C_2, ...
};

/// Bound on E_G from the theorem statement.
BoundValue theorem_bound(BoundKind kind, const BoundInputs& in);
/// Square root of the bound on E_G^2 reached at the end of each proof,
/// before quadrature errors enter. Tails are ignored.
BoundValue proof_bound(BoundKind kind, const BoundInputs& in);

/// Residual integrals: int R_tb^2, sum_i int R_sb,i^2, int int R_int^2.
struct ResidualIntegrals {
    double temporal = 0.0;
    double spatial = 0.0;
    double interior = 0.0;
};

struct VerifyOptions {
    int nx = 512;          ///< interior and initial-line nodes
    int nt = 256;          ///< interior and boundary-line nodes
    int bo_half_nodes = 512;  ///< Cartesian interior for Benjamin-Ono
    int bo_slices = 64;
    int sup_nx = 512;
    int sup_nt = 512;
};

/// Training set with trapezoid weights on fine lines and grids, so that
/// residual sums approximate the residual integrals.
TrainingSet integral_training_set(const EquationSpec& spec, const Domain& domain, const VerifyOptions& opt);

ResidualIntegrals residual_integrals(const MlpParams& params, const EquationSpec& spec, const Domain& domain,
                                     const VerifyOptions& opt);

struct BoundVerification {
    BoundKind kind = BoundKind::kdv_kawahara;
    GeneralizationError error;
    ResidualIntegrals integrals;
    BoundInputs inputs;
    BoundValue proof;
    BoundValue theorem;
    bool satisfied = false;  ///< E_G <= proof bound
};

/// E_G, residual integrals and both bounds for a network against the
/// equation's reference solution. Throws for the parametric problem.
BoundVerification verify_bound(const MlpParams& params, const EquationSpec& spec, const Domain& domain,
                               const VerifyOptions& opt = {});

/// Pointwise mean and standard deviation over parameter samples.
struct UqFields {
    Array mean;
    Array std;
};

/// Model evaluated at network input columns (t, x, parameters...).
using FieldFn = std::function<Array(const Matrix& inputs)>;

/// Statistics of `fn` at the (t, x) columns of `xt` over n_samples Sobol
/// points of the domain's parameter box.
UqFields uq_statistics(const FieldFn& fn, const Domain& domain, const Matrix& xt, int n_samples);

/// The Sobol parameter samples used by uq_statistics (param_dim x n).
Matrix parameter_samples(const Domain& domain, int n_samples);

}  // namespace dpinn
