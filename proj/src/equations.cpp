#include "dpinn/equations.hpp"

#include <algorithm>
#include <stdexcept>

namespace dpinn {

namespace {

// Derivative arrays indexed by the positions of a jet shape.
struct Fields {
    ShapePtr shape;
    std::vector<Array> d;

    [[nodiscard]] const Array& operator()(int i, int j) const {
        const int k = shape->index(i, j);
        if (k < 0) {
            throw std::logic_error("residual needs a derivative outside the jet shape");
        }
        return d[static_cast<std::size_t>(k)];
    }
};

// One term of a spatial boundary component: sign * d_x^order u on a side.
struct BoundaryTerm {
    bool right;
    int order;
    double sign;
};

std::vector<std::vector<BoundaryTerm>> boundary_terms(EquationKind kind) {
    switch (kind) {
        case EquationKind::kdv_kawahara:
            return {{{false, 0, 1.0}}, {{true, 0, 1.0}}, {{false, 1, 1.0}}, {{true, 1, 1.0}}, {{true, 2, 1.0}}};
        case EquationKind::camassa_holm:
            return {{{false, 0, 1.0}}, {{true, 0, 1.0}}, {{false, 2, 1.0}}, {{true, 2, 1.0}}};
        case EquationKind::benjamin_ono:
            return {{{false, 0, 1.0}, {true, 0, -1.0}}};
        case EquationKind::kdv_parametric:
            return {{{false, 0, 1.0}, {true, 0, -1.0}},
                    {{false, 1, 1.0}, {true, 1, -1.0}},
                    {{false, 2, 1.0}, {true, 2, -1.0}}};
    }
    throw std::logic_error("unknown equation kind");
}

// Boundary components from derivatives at [left | right] points.
Matrix boundary_values(const std::vector<std::vector<BoundaryTerm>>& terms, const Fields& f, Eigen::Index n) {
    Matrix out = Matrix::Zero(n, static_cast<Eigen::Index>(terms.size()));
    for (std::size_t c = 0; c < terms.size(); ++c) {
        for (const auto& term : terms[c]) {
            out.col(static_cast<Eigen::Index>(c)).array() += term.sign * f(0, term.order).segment(term.right ? n : 0, n);
        }
    }
    return out;
}

int temporal_components(EquationKind kind) { return kind == EquationKind::camassa_holm ? 2 : 1; }

// Interior residual of the pointwise families.
Array pointwise_residual(const EquationSpec& spec, const Fields& f, const Matrix& points) {
    switch (spec.kind) {
        case EquationKind::kdv_kawahara: {
            Array r = f(1, 0) + f(0, 0) * f(0, 1) + spec.alpha * f(0, 3);
            if (spec.beta != 0.0) {
                r -= spec.beta * f(0, 5);
            }
            if (spec.drift) {
                r += f(0, 1);
            }
            return r;
        }
        case EquationKind::camassa_holm:
            return f(1, 0) - f(1, 2) + 3.0 * f(0, 0) * f(0, 1) + 2.0 * spec.kappa * f(0, 1) -
                   2.0 * f(0, 1) * f(0, 2) - f(0, 0) * f(0, 3);
        case EquationKind::kdv_parametric: {
            const Array gamma = points.row(4).transpose().array();
            const Array kappa = points.row(5).transpose().array();
            return f(1, 0) + gamma * f(0, 0) * f(0, 1) + kappa * f(0, 3);
        }
        case EquationKind::benjamin_ono:
            break;
    }
    throw std::logic_error("pointwise residual requested for a nonlocal equation");
}

// Adds the pullback of adjoint g of the pointwise interior residual into the tape.
void pointwise_adjoint(const EquationSpec& spec, const Fields& f, const Matrix& points, const Array& g, GradTape& tape) {
    switch (spec.kind) {
        case EquationKind::kdv_kawahara:
            tape.add_derivative_adjoint(1, 0, g);
            tape.add_derivative_adjoint(0, 0, g * f(0, 1));
            tape.add_derivative_adjoint(0, 1, g * (f(0, 0) + (spec.drift ? 1.0 : 0.0)));
            tape.add_derivative_adjoint(0, 3, spec.alpha * g);
            if (spec.beta != 0.0) {
                tape.add_derivative_adjoint(0, 5, -spec.beta * g);
            }
            return;
        case EquationKind::camassa_holm:
            tape.add_derivative_adjoint(1, 0, g);
            tape.add_derivative_adjoint(1, 2, -g);
            tape.add_derivative_adjoint(0, 0, g * (3.0 * f(0, 1) - f(0, 3)));
            tape.add_derivative_adjoint(0, 1, g * (3.0 * f(0, 0) + 2.0 * spec.kappa - 2.0 * f(0, 2)));
            tape.add_derivative_adjoint(0, 2, -2.0 * g * f(0, 1));
            tape.add_derivative_adjoint(0, 3, -g * f(0, 0));
            return;
        case EquationKind::kdv_parametric: {
            const Array gamma = points.row(4).transpose().array();
            const Array kappa = points.row(5).transpose().array();
            tape.add_derivative_adjoint(1, 0, g);
            tape.add_derivative_adjoint(0, 0, g * gamma * f(0, 1));
            tape.add_derivative_adjoint(0, 1, g * gamma * f(0, 0));
            tape.add_derivative_adjoint(0, 3, g * kappa);
            return;
        }
        case EquationKind::benjamin_ono:
            break;
    }
    throw std::logic_error("pointwise adjoint requested for a nonlocal equation");
}

// Benjamin-Ono residual on one time slice.
Array slice_residual(const Fields& f, const HilbertTransform& H) {
    return f(1, 0) + f(0, 0) * f(0, 1) - H.apply(f(0, 2));
}

Fields tape_fields(const GradTape& tape) {
    Fields f{tape.shape, {}};
    f.d.reserve(static_cast<std::size_t>(tape.shape->size()));
    for (int k = 0; k < tape.shape->size(); ++k) {
        const MultiIndex m = tape.shape->multi(k);
        f.d.push_back(tape.derivative(m.t, m.x));
    }
    return f;
}

ShapePtr interior_shape_for(const EquationSpec& spec) {
    switch (spec.kind) {
        case EquationKind::kdv_kawahara:
            return JetShape::staircase({spec.beta != 0.0 ? 5 : 3, 0});
        case EquationKind::camassa_holm:
            return JetShape::staircase({3, 2});
        case EquationKind::benjamin_ono:
            return JetShape::staircase({2, 0});
        case EquationKind::kdv_parametric:
            return JetShape::staircase({3, 0});
    }
    throw std::logic_error("unknown equation kind");
}

int spatial_order(EquationKind kind) { return kind == EquationKind::benjamin_ono ? 0 : 2; }

}  // namespace

std::string to_string(EquationKind kind) {
    switch (kind) {
        case EquationKind::kdv_kawahara:
            return "kdv_kawahara";
        case EquationKind::camassa_holm:
            return "camassa_holm";
        case EquationKind::benjamin_ono:
            return "benjamin_ono";
        case EquationKind::kdv_parametric:
            return "kdv_parametric";
    }
    throw std::logic_error("unknown equation kind");
}

EquationKind equation_kind_from_string(const std::string& name) {
    for (auto k : {EquationKind::kdv_kawahara, EquationKind::camassa_holm, EquationKind::benjamin_ono,
                   EquationKind::kdv_parametric}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown equation kind '" + name + "'");
}

int spatial_components(EquationKind kind) { return static_cast<int>(boundary_terms(kind).size()); }

ResidualSystem::ResidualSystem(EquationSpec spec, TrainingSet set, int chunk)
    : spec_(std::move(spec)), set_(std::move(set)), chunk_(chunk) {
    if (chunk_ < 1) {
        throw std::invalid_argument("chunk size must be positive");
    }
    const bool parametric = spec_.kind == EquationKind::kdv_parametric;
    if (parametric != (set_.domain.param_dim() == 4)) {
        throw std::invalid_argument("the parametric KdV equation needs exactly four parameter dimensions");
    }
    if (!parametric && set_.domain.param_dim() != 0) {
        throw std::invalid_argument("parameter dimensions are only supported for the parametric KdV equation");
    }
    if (spec_.kind == EquationKind::benjamin_ono) {
        if (!set_.grid) {
            throw std::invalid_argument("the Benjamin-Ono residual needs a Cartesian interior grid");
        }
        hilbert_.push_back(spec_.hilbert == HilbertTransform::Kind::periodic
                               ? HilbertTransform::periodic(set_.grid->half_nodes)
                               : HilbertTransform::line(set_.grid->half_nodes));
    }
    interior_shape_ = interior_shape_for(spec_);
    spatial_shape_ = JetShape::staircase({spatial_order(spec_.kind)});
    temporal_shape_ = spec_.kind == EquationKind::camassa_holm ? JetShape::staircase({1}) : JetShape::staircase({0});

    const Eigen::Index n_sb = set_.n_sb();
    spatial_points_.resize(set_.spatial_left.points.rows(), 2 * n_sb);
    spatial_points_ << set_.spatial_left.points, set_.spatial_right.points;

    const auto terms = boundary_terms(spec_.kind);
    spatial_data_ = Matrix::Zero(n_sb, static_cast<Eigen::Index>(terms.size()));
    temporal_data_ = Matrix::Zero(set_.n_tb(), temporal_components(spec_.kind));
    if (spec_.data) {
        const auto& data = spec_.data;
        if (data.input_dim() != set_.domain.input_dim()) {
            throw std::invalid_argument("data reference has the wrong input dimension");
        }
        Fields fs{spatial_shape_, {}};
        for (int j = 0; j <= spatial_order(spec_.kind); ++j) {
            fs.d.push_back(data.derivative(spatial_points_, 0, j));
        }
        spatial_data_ = boundary_values(terms, fs, n_sb);
        temporal_data_.col(0) = data.evaluate(set_.temporal.points).matrix();
        if (temporal_data_.cols() == 2) {
            temporal_data_.col(1) = data.derivative(set_.temporal.points, 0, 1).matrix();
        }
    }
}

void ResidualSystem::check_network(const MlpParams& params) const {
    if (params.input_dim() != set_.domain.input_dim() || params.widths().back() != 1) {
        throw std::invalid_argument("network shape does not fit the training set");
    }
}

ResidualBundle ResidualSystem::collect(const FieldSource& source) const {
    ResidualBundle out;
    const auto& pts = set_.interior.points;
    out.interior.resize(pts.cols());
    if (spec_.kind == EquationKind::benjamin_ono) {
        const int nodes = set_.grid->nodes_per_slice();
        for (int k = 0; k < set_.grid->slices; ++k) {
            const Matrix slice = pts.middleCols(static_cast<Eigen::Index>(k) * nodes, nodes);
            const Fields f{interior_shape_, source(slice, interior_shape_)};
            out.interior.segment(static_cast<Eigen::Index>(k) * nodes, nodes) = slice_residual(f, hilbert_.front());
        }
    } else {
        for (Eigen::Index begin = 0; begin < pts.cols(); begin += chunk_) {
            const Eigen::Index n = std::min<Eigen::Index>(chunk_, pts.cols() - begin);
            const Matrix chunk = pts.middleCols(begin, n);
            const Fields f{interior_shape_, source(chunk, interior_shape_)};
            out.interior.segment(begin, n) = pointwise_residual(spec_, f, chunk);
        }
    }

    const Fields fs{spatial_shape_, source(spatial_points_, spatial_shape_)};
    out.spatial = boundary_values(boundary_terms(spec_.kind), fs, set_.n_sb()) - spatial_data_;

    const Fields ft{temporal_shape_, source(set_.temporal.points, temporal_shape_)};
    if (spec_.kind == EquationKind::camassa_holm) {
        const Array a = ft(0, 0) - temporal_data_.col(0).array();
        const Array b = ft(0, 1) - temporal_data_.col(1).array();
        out.temporal = (a.square() + b.square()).sqrt();
    } else {
        out.temporal = ft(0, 0) - temporal_data_.col(0).array();
    }
    return out;
}

ResidualBundle ResidualSystem::residuals(const MlpParams& params) const {
    check_network(params);
    return collect([&](const Matrix& points, const ShapePtr& shape) {
        return tape_fields(forward_batch(params, points, shape)).d;
    });
}

ResidualBundle ResidualSystem::residuals(const exact::Reference& solution) const {
    if (solution.input_dim() != set_.domain.input_dim()) {
        throw std::invalid_argument("reference has the wrong input dimension");
    }
    return collect([&](const Matrix& points, const ShapePtr& shape) {
        std::vector<Array> d;
        for (int k = 0; k < shape->size(); ++k) {
            const MultiIndex m = shape->multi(k);
            d.push_back(solution.derivative(points, m.t, m.x));
        }
        return d;
    });
}

ResidualSums ResidualSystem::sums(const ResidualBundle& bundle) const {
    ResidualSums s;
    s.interior = (set_.interior.weights * bundle.interior.square()).sum();
    s.spatial = (set_.spatial_left.weights * bundle.spatial.array().square().rowwise().sum()).sum();
    s.temporal = (set_.temporal.weights * bundle.temporal.square()).sum();
    return s;
}

ResidualSums ResidualSystem::sums(const MlpParams& params, const LossScales& scales, Vector* grad) const {
    check_network(params);
    ResidualSums s;
    if (grad != nullptr) {
        grad->setZero(params.theta().size());
    }
    const auto& pts = set_.interior.points;
    const auto& w_int = set_.interior.weights;

    auto interior_piece = [&](Eigen::Index begin, Eigen::Index n, bool slice) {
        const Matrix chunk = pts.middleCols(begin, n);
        GradTape tape = forward_batch(params, chunk, interior_shape_);
        const Fields f = tape_fields(tape);
        const Array r = slice ? slice_residual(f, hilbert_.front()) : pointwise_residual(spec_, f, chunk);
        const Array w = w_int.segment(begin, n);
        s.interior += (w * r.square()).sum();
        if (grad == nullptr) {
            return;
        }
        const Array g = 2.0 * scales.interior * w * r;
        if (slice) {
            tape.add_derivative_adjoint(1, 0, g);
            tape.add_derivative_adjoint(0, 0, g * f(0, 1));
            tape.add_derivative_adjoint(0, 1, g * f(0, 0));
            tape.add_derivative_adjoint(0, 2, -hilbert_.front().apply_transpose(g));
        } else {
            pointwise_adjoint(spec_, f, chunk, g, tape);
        }
        *grad += loss_gradient(tape);
    };
    if (spec_.kind == EquationKind::benjamin_ono) {
        const int nodes = set_.grid->nodes_per_slice();
        for (int k = 0; k < set_.grid->slices; ++k) {
            interior_piece(static_cast<Eigen::Index>(k) * nodes, nodes, true);
        }
    } else {
        for (Eigen::Index begin = 0; begin < pts.cols(); begin += chunk_) {
            interior_piece(begin, std::min<Eigen::Index>(chunk_, pts.cols() - begin), false);
        }
    }

    {
        const Eigen::Index n = set_.n_sb();
        GradTape tape = forward_batch(params, spatial_points_, spatial_shape_);
        const Fields f = tape_fields(tape);
        const auto terms = boundary_terms(spec_.kind);
        const Matrix r = boundary_values(terms, f, n) - spatial_data_;
        const Array& w = set_.spatial_left.weights;
        s.spatial = (w * r.array().square().rowwise().sum()).sum();
        if (grad != nullptr) {
            std::vector<Array> adj(static_cast<std::size_t>(spatial_order(spec_.kind) + 1), Array::Zero(2 * n));
            for (std::size_t c = 0; c < terms.size(); ++c) {
                const Array g = 2.0 * scales.spatial * w * r.col(static_cast<Eigen::Index>(c)).array();
                for (const auto& term : terms[c]) {
                    adj[static_cast<std::size_t>(term.order)].segment(term.right ? n : 0, n) += term.sign * g;
                }
            }
            for (std::size_t j = 0; j < adj.size(); ++j) {
                tape.add_derivative_adjoint(0, static_cast<int>(j), adj[j]);
            }
            *grad += loss_gradient(tape);
        }
    }

    {
        GradTape tape = forward_batch(params, set_.temporal.points, temporal_shape_);
        const Array& w = set_.temporal.weights;
        for (Eigen::Index c = 0; c < temporal_data_.cols(); ++c) {
            const Array r = tape.derivative(0, static_cast<int>(c)) - temporal_data_.col(c).array();
            s.temporal += (w * r.square()).sum();
            if (grad != nullptr) {
                tape.add_derivative_adjoint(0, static_cast<int>(c), 2.0 * scales.temporal * w * r);
            }
        }
        if (grad != nullptr) {
            *grad += loss_gradient(tape);
        }
    }
    return s;
}

}  // namespace dpinn
