#include "dpinn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpinn {

namespace {

// Trapezoid nodes and weights on [a, b].
void trapezoid(double a, double b, int n, Array& nodes, Array& weights) {
    if (n < 2) {
        throw std::invalid_argument("trapezoid rule needs at least 2 nodes");
    }
    nodes = Array::LinSpaced(n, a, b);
    const double h = (b - a) / (n - 1);
    weights = Array::Constant(n, h);
    weights(0) = weights(n - 1) = 0.5 * h;
}

double mixed(const Matrix& sups, int m, int n) {
    if (m >= sups.rows() || n >= sups.cols()) {
        throw std::out_of_range("mixed norm order exceeds the sup table");
    }
    return sups.topLeftCorner(m + 1, n + 1).sum();
}

// (T + 2 C T^2 e^{2 C T}) from integrating the Gronwall estimate over time.
double gronwall(double c, double T) { return T + 2.0 * c * T * T * std::exp(2.0 * c * T); }

}  // namespace

Quadrature tensor_quadrature(const Domain& domain, int nx, int nt) {
    Array xs, wx, ts, wt;
    trapezoid(domain.x_left, domain.x_right, nx, xs, wx);
    trapezoid(0.0, domain.T, nt, ts, wt);
    Quadrature q;
    q.points.resize(2, static_cast<Eigen::Index>(nx) * nt);
    q.weights.resize(q.points.cols());
    Eigen::Index col = 0;
    for (int k = 0; k < nt; ++k) {
        for (int i = 0; i < nx; ++i, ++col) {
            q.points(0, col) = ts(k);
            q.points(1, col) = xs(i);
            q.weights(col) = wt(k) * wx(i);
        }
    }
    return q;
}

Quadrature parametric_quadrature(const Domain& domain, int nx, int nt, int n_params) {
    const Quadrature xt = tensor_quadrature(domain, nx, nt);
    const Matrix params = parameter_samples(domain, n_params);
    const Eigen::Index m = xt.points.cols();
    const int pd = domain.param_dim();
    Quadrature q;
    q.points.resize(2 + pd, m * n_params);
    q.weights.resize(q.points.cols());
    for (int s = 0; s < n_params; ++s) {
        auto block = q.points.middleCols(s * m, m);
        block.topRows(2) = xt.points;
        block.bottomRows(pd) = params.col(s).replicate(1, m);
        q.weights.segment(s * m, m) = xt.weights / n_params;
    }
    return q;
}

Quadrature evaluation_quadrature(const Domain& domain) {
    if (domain.param_dim() > 0) {
        return parametric_quadrature(domain, 64, 64, 256);
    }
    return tensor_quadrature(domain, 256, 256);
}

GeneralizationError generalization_error(const Array& model, const Array& exact, const Array& weights) {
    if (model.size() != exact.size() || model.size() != weights.size()) {
        throw std::invalid_argument("generalization_error: size mismatch");
    }
    GeneralizationError e;
    e.absolute = std::sqrt((weights * (model - exact).square()).sum());
    const double norm = std::sqrt((weights * exact.square()).sum());
    if (norm > 0.0) {
        e.relative = e.absolute / norm;
    } else {
        e.relative = e.absolute == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return e;
}

GeneralizationError generalization_error(const MlpParams& params, const exact::Reference& exact,
                                         const Quadrature& quad) {
    return generalization_error(evaluate(params, quad.points), exact.evaluate(quad.points), quad.weights);
}

Matrix derivative_sups(const MlpParams& params, const Domain& domain, int m, int n, int nx, int nt) {
    if (domain.param_dim() != 0) {
        throw std::invalid_argument("derivative_sups works on (x, t) domains");
    }
    const Quadrature grid = tensor_quadrature(domain, nx, nt);
    const ShapePtr shape = JetShape::rectangle(m, n);
    Matrix sups = Matrix::Zero(m + 1, n + 1);
    constexpr Eigen::Index chunk = 2048;
    for (Eigen::Index start = 0; start < grid.points.cols(); start += chunk) {
        const Eigen::Index len = std::min(chunk, grid.points.cols() - start);
        const GradTape tape = forward_batch(params, grid.points.middleCols(start, len), shape);
        for (int i = 0; i <= m; ++i) {
            for (int j = 0; j <= n; ++j) {
                sups(i, j) = std::max(sups(i, j), tape.derivative(i, j).abs().maxCoeff());
            }
        }
    }
    return sups;
}

Matrix derivative_sups(const exact::Reference& fn, const Domain& domain, int m, int n, int nx, int nt) {
    if (fn.input_dim() != 2 || domain.param_dim() != 0) {
        throw std::invalid_argument("derivative_sups works on (x, t) domains");
    }
    // Values on the grid extended by the stencil half-widths, then separable
    // central differences with the grid spacing as step.
    auto half = [](int order) { return order == 0 ? 0 : (order + 1) / 2 + 4; };
    const int px = half(n);
    const int pt = half(m);
    const double hx = domain.length() / (nx - 1);
    const double ht = domain.T / (nt - 1);
    Matrix values(nt + 2 * pt, nx + 2 * px);  // rows t, columns x
    Eigen::Vector2d p;
    for (int k = 0; k < values.rows(); ++k) {
        p(0) = (k - pt) * ht;
        for (int i = 0; i < values.cols(); ++i) {
            p(1) = domain.x_left + (i - px) * hx;
            values(k, i) = fn(p);
        }
    }
    Matrix sups = Matrix::Zero(m + 1, n + 1);
    for (int j = 0; j <= n; ++j) {
        // x-derivative of order j on all rows, kept on the nx interior columns.
        Matrix dx = Matrix::Zero(values.rows(), nx);
        if (j == 0) {
            dx = values.middleCols(px, nx);
        } else {
            const int h = half(j);
            const std::vector<double> w = exact::central_weights(j, h);
            for (int s = -h; s <= h; ++s) {
                dx += w[static_cast<std::size_t>(s + h)] * values.middleCols(px + s, nx);
            }
            dx /= std::pow(hx, j);
        }
        for (int i = 0; i <= m; ++i) {
            Matrix d = Matrix::Zero(nt, nx);
            if (i == 0) {
                d = dx.middleRows(pt, nt);
            } else {
                const int h = half(i);
                const std::vector<double> w = exact::central_weights(i, h);
                for (int s = -h; s <= h; ++s) {
                    d += w[static_cast<std::size_t>(s + h)] * dx.middleRows(pt + s, nt);
                }
                d /= std::pow(ht, i);
            }
            sups(i, j) = d.cwiseAbs().maxCoeff();
        }
    }
    return sups;
}

double mixed_norm(const Matrix& sups, int m, int n) { return mixed(sups, m, n); }

std::optional<BoundKind> bound_kind(EquationKind kind) {
    switch (kind) {
        case EquationKind::kdv_kawahara:
            return BoundKind::kdv_kawahara;
        case EquationKind::camassa_holm:
            return BoundKind::camassa_holm;
        case EquationKind::benjamin_ono:
            return BoundKind::benjamin_ono;
        case EquationKind::kdv_parametric:
            break;
    }
    return std::nullopt;
}

std::string to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::kdv_kawahara:
            return "kdv_kawahara";
        case BoundKind::camassa_holm:
            return "camassa_holm";
        case BoundKind::benjamin_ono:
            return "benjamin_ono";
    }
    return "unknown";
}

BoundValue theorem_bound(BoundKind kind, const BoundInputs& in) {
    const Matrix& us = in.model_sups;
    const Matrix& u = in.exact_sups;
    const double T = in.T;
    BoundValue out;
    double inner = in.e_tb + in.e_int;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    switch (kind) {
        case BoundKind::kdv_kawahara: {
            const double c4 = mixed(us, 0, 1) + 0.5 * mixed(u, 0, 1) + 0.5;
            c1 = std::sqrt(gronwall(c4, T));
            c2 = std::sqrt(mixed(u, 0, 0) + 1.0);
            c3 = std::sqrt(10.0 * (mixed(us, 0, 4) + mixed(u, 0, 4)) * std::sqrt(T));
            out.constants = {c1, c2, c3, c4};
            break;
        }
        case BoundKind::camassa_holm: {
            const double c4 = 0.5 + 3.0 * mixed(us, 0, 1) + 1.5 * mixed(u, 0, 3);
            c1 = std::sqrt(gronwall(c4, T));
            c2 = std::sqrt(2.0 * (std::abs(in.kappa) + mixed(us, 0, 2) + mixed(u, 0, 2)));
            c3 = 2.0 * std::pow(T, 0.25) *
                 std::sqrt(2.0 * mixed(us, 1, 1) + 2.0 * mixed(u, 1, 1) +
                           2.0 * mixed(u, 0, 1) * (mixed(us, 0, 1) + mixed(u, 0, 1)));
            out.constants = {c1, c2, c3, c4};
            break;
        }
        case BoundKind::benjamin_ono: {
            const double c3b = 0.5 + mixed(us, 0, 1) + 0.5 * mixed(u, 0, 1);
            c1 = std::sqrt(gronwall(c3b, T));
            c2 = std::pow(T, 0.25) * std::sqrt(2.0 * (mixed(us, 0, 2) + mixed(u, 0, 2)) +
                                               2.0 * mixed(u, 0, 0) * (mixed(u, 0, 0) + mixed(us, 0, 0)));
            out.constants = {c1, c2, c3b};
            break;
        }
    }
    if (kind == BoundKind::benjamin_ono) {
        inner += c2 * std::sqrt(in.e_sb);
    } else {
        inner += c2 * in.e_sb + c3 * std::sqrt(in.e_sb);
    }
    if (in.tails) {
        const QuadratureTails& q = *in.tails;
        inner += std::sqrt(q.c_tb) * std::pow(q.n_tb, -q.alpha_tb / 2.0);
        inner += std::sqrt(q.c_int) * std::pow(q.n_int, -q.alpha_int / 2.0);
        const double sb4 = std::pow(q.c_sb, 0.25) * std::pow(q.n_sb, -q.alpha_sb / 4.0);
        if (kind == BoundKind::benjamin_ono) {
            inner += c2 * sb4;
        } else {
            inner += c2 * std::sqrt(q.c_sb) * std::pow(q.n_sb, -q.alpha_sb / 2.0) + c3 * sb4;
        }
    }
    out.rhs = c1 * inner;
    return out;
}

BoundValue proof_bound(BoundKind kind, const BoundInputs& in) {
    const Matrix& us = in.model_sups;
    const Matrix& u = in.exact_sups;
    const double T = in.T;
    const double tb = in.e_tb * in.e_tb;
    const double sb = in.e_sb * in.e_sb;
    const double it = in.e_int * in.e_int;
    BoundValue out;
    double squared = 0.0;
    switch (kind) {
        case BoundKind::kdv_kawahara: {
            const double c1 = mixed(u, 0, 4) + mixed(us, 0, 4);
            const double c2 = 0.5 * mixed(u, 0, 0) + 0.5;
            const double c3 = mixed(us, 0, 1) + 0.5 * mixed(u, 0, 1) + 0.5;
            squared = gronwall(c3, T) * (tb + 10.0 * c1 * std::sqrt(T) * in.e_sb + 2.0 * c2 * sb + it);
            out.constants = {c1, c2, c3};
            break;
        }
        case BoundKind::camassa_holm: {
            const double c1 = mixed(us, 1, 1) + mixed(u, 1, 1) + mixed(u, 0, 1) * (mixed(us, 0, 1) + mixed(u, 0, 1));
            const double c2 = std::abs(in.kappa) + mixed(us, 0, 2) + mixed(u, 0, 2);
            const double c3 = 0.5 + 3.0 * mixed(us, 0, 1) + 1.5 * mixed(u, 0, 3);
            squared = gronwall(c3, T) * (tb + 8.0 * c1 * std::sqrt(T) * in.e_sb + 2.0 * c2 * sb + it);
            out.constants = {c1, c2, c3};
            break;
        }
        case BoundKind::benjamin_ono: {
            const double c1 = mixed(us, 0, 2) + mixed(u, 0, 2) + mixed(u, 0, 0) * (mixed(u, 0, 0) + mixed(us, 0, 0));
            const double c2 = 0.5 + mixed(us, 0, 1) + 0.5 * mixed(u, 0, 1);
            squared = gronwall(c2, T) * (tb + 2.0 * c1 * std::sqrt(T) * in.e_sb + it);
            out.constants = {c1, c2};
            break;
        }
    }
    out.rhs = std::sqrt(squared);
    return out;
}

TrainingSet integral_training_set(const EquationSpec& spec, const Domain& domain, const VerifyOptions& opt) {
    if (domain.param_dim() != 0) {
        throw std::invalid_argument("residual integrals are defined on (x, t) domains");
    }
    TrainingSet set;
    set.domain = domain;
    if (spec.kind == EquationKind::benjamin_ono) {
        CartesianGrid grid;
        const double dx = 0.5 * domain.length() / opt.bo_half_nodes;
        const double ratio = domain.T / opt.bo_slices / dx;
        set.interior = cartesian_interior(domain, opt.bo_half_nodes, ratio, &grid);
        set.grid = grid;
    } else {
        const Quadrature q = tensor_quadrature(domain, opt.nx, opt.nt);
        set.interior.points = q.points;
        set.interior.weights = q.weights;
    }
    Array ts, wt, xs, wx;
    trapezoid(0.0, domain.T, opt.nt, ts, wt);
    trapezoid(domain.x_left, domain.x_right, opt.nx, xs, wx);
    set.spatial_left.points.resize(2, opt.nt);
    set.spatial_left.points.row(0) = ts.matrix().transpose();
    set.spatial_left.points.row(1).setConstant(domain.x_left);
    set.spatial_left.weights = wt;
    set.spatial_right = set.spatial_left;
    set.spatial_right.points.row(1).setConstant(domain.x_right);
    set.temporal.points.resize(2, opt.nx);
    set.temporal.points.row(0).setZero();
    set.temporal.points.row(1) = xs.matrix().transpose();
    set.temporal.weights = wx;
    return set;
}

ResidualIntegrals residual_integrals(const MlpParams& params, const EquationSpec& spec, const Domain& domain,
                                     const VerifyOptions& opt) {
    const ResidualSystem system(spec, integral_training_set(spec, domain, opt));
    const ResidualSums s = system.sums(params, LossScales{}, nullptr);
    return {s.temporal, s.spatial, s.interior};
}

BoundVerification verify_bound(const MlpParams& params, const EquationSpec& spec, const Domain& domain,
                               const VerifyOptions& opt) {
    const auto kind = bound_kind(spec.kind);
    if (!kind) {
        throw std::invalid_argument("no generalization bound covers the " + to_string(spec.kind) + " problem");
    }
    if (!spec.data) {
        throw std::invalid_argument("bound verification needs a reference solution");
    }
    BoundVerification v;
    v.kind = *kind;
    v.error = generalization_error(params, spec.data, tensor_quadrature(domain, opt.nx, opt.nt));
    v.integrals = residual_integrals(params, spec, domain, opt);
    v.inputs.T = domain.T;
    v.inputs.e_tb = std::sqrt(v.integrals.temporal);
    v.inputs.e_sb = std::sqrt(v.integrals.spatial);
    v.inputs.e_int = std::sqrt(v.integrals.interior);
    v.inputs.kappa = spec.kappa;
    v.inputs.model_sups = derivative_sups(params, domain, 1, 4, opt.sup_nx, opt.sup_nt);
    v.inputs.exact_sups = derivative_sups(spec.data, domain, 1, 4, opt.sup_nx, opt.sup_nt);
    v.proof = proof_bound(v.kind, v.inputs);
    v.theorem = theorem_bound(v.kind, v.inputs);
    v.satisfied = v.error.absolute <= v.proof.rhs;
    return v;
}

Matrix parameter_samples(const Domain& domain, int n_samples) {
    const int pd = domain.param_dim();
    if (pd == 0 || n_samples < 1) {
        throw std::invalid_argument("parameter sampling needs a parameter box and n >= 1");
    }
    Matrix unit = sobol_points(n_samples, pd);
    for (int d = 0; d < pd; ++d) {
        const auto dd = static_cast<std::size_t>(d);
        const double lo = domain.param_lo[dd];
        const double hi = domain.param_hi[dd];
        unit.row(d) = (lo + (hi - lo) * unit.row(d).array()).matrix();
    }
    return unit;
}

UqFields uq_statistics(const FieldFn& fn, const Domain& domain, const Matrix& xt, int n_samples) {
    if (xt.rows() != 2) {
        throw std::invalid_argument("uq_statistics expects (t, x) columns");
    }
    const Matrix params = parameter_samples(domain, n_samples);
    const int pd = domain.param_dim();
    Matrix inputs(2 + pd, xt.cols());
    inputs.topRows(2) = xt;
    UqFields out;
    out.mean = Array::Zero(xt.cols());
    Array m2 = Array::Zero(xt.cols());
    // Welford updates, so identical samples give exactly zero spread.
    for (int s = 0; s < n_samples; ++s) {
        inputs.bottomRows(pd) = params.col(s).replicate(1, xt.cols());
        const Array v = fn(inputs);
        const Array delta = v - out.mean;
        out.mean += delta / (s + 1);
        m2 += delta * (v - out.mean);
    }
    out.std = (m2 / n_samples).max(0.0).sqrt();
    return out;
}

}  // namespace dpinn
