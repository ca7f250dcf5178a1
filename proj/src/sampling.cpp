#include "dpinn/sampling.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dpinn {

namespace {

struct Primitive {
    int s;
    unsigned a;
    std::vector<std::uint64_t> m;
};

// new-joe-kuo-6.21201, dimensions 2..8.
const std::array<Primitive, 7> kPrimitives = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
}};

void check_domain(const Domain& d) {
    if (!(d.x_right > d.x_left) || !(d.T > 0.0)) {
        throw std::invalid_argument("domain needs x_left < x_right and T > 0");
    }
    if (d.param_lo.size() != d.param_hi.size()) {
        throw std::invalid_argument("parameter box bounds differ in length");
    }
    for (std::size_t i = 0; i < d.param_lo.size(); ++i) {
        if (d.param_hi[i] < d.param_lo[i]) {
            throw std::invalid_argument("parameter box has negative width");
        }
    }
}

double param_value(const Domain& d, int i, double u) {
    const auto k = static_cast<std::size_t>(i);
    return d.param_lo[k] + u * (d.param_hi[k] - d.param_lo[k]);
}

}  // namespace

SobolSequence::SobolSequence(int dim) : dim_(dim) {
    if (dim < 1 || dim > max_dim) {
        throw std::invalid_argument("Sobol dimension must be in 1.." + std::to_string(max_dim));
    }
    state_.assign(static_cast<std::size_t>(dim), 0);
    directions_.resize(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        auto& v = directions_[static_cast<std::size_t>(d)];
        v.assign(bits + 1, 0);
        if (d == 0) {
            for (int i = 1; i <= bits; ++i) {
                v[static_cast<std::size_t>(i)] = std::uint64_t{1} << (bits - i);
            }
            continue;
        }
        const Primitive& p = kPrimitives[static_cast<std::size_t>(d - 1)];
        for (int i = 1; i <= p.s && i <= bits; ++i) {
            v[static_cast<std::size_t>(i)] = p.m[static_cast<std::size_t>(i - 1)] << (bits - i);
        }
        for (int i = p.s + 1; i <= bits; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            v[ii] = v[ii - static_cast<std::size_t>(p.s)] ^ (v[ii - static_cast<std::size_t>(p.s)] >> p.s);
            for (int k = 1; k < p.s; ++k) {
                if ((p.a >> (p.s - 1 - k)) & 1U) {
                    v[ii] ^= v[ii - static_cast<std::size_t>(k)];
                }
            }
        }
    }
}

Eigen::VectorXd SobolSequence::next() {
    // Gray-code update: flip the direction number of the lowest zero bit.
    const int c = std::countr_one(index_) + 1;
    if (c > bits) {
        throw std::out_of_range("Sobol sequence exhausted");
    }
    ++index_;
    Eigen::VectorXd out(dim_);
    const double scale = std::ldexp(1.0, -bits);
    for (int d = 0; d < dim_; ++d) {
        auto& x = state_[static_cast<std::size_t>(d)];
        x ^= directions_[static_cast<std::size_t>(d)][static_cast<std::size_t>(c)];
        out(d) = static_cast<double>(x) * scale;
    }
    return out;
}

Eigen::MatrixXd sobol_points(int n, int dim) {
    if (n < 0) {
        throw std::invalid_argument("negative Sobol point count");
    }
    SobolSequence seq(dim);
    Eigen::MatrixXd out(dim, n);
    for (int i = 0; i < n; ++i) {
        out.col(i) = seq.next();
    }
    return out;
}

TrainingSet build_training_set(const Domain& domain, int n_int, int n_sb, int n_tb) {
    check_domain(domain);
    if (n_int <= 0 || n_sb <= 0 || n_tb <= 0) {
        throw std::invalid_argument("training set counts must be positive");
    }
    const int P = domain.param_dim();
    TrainingSet set;
    set.domain = domain;

    const Eigen::MatrixXd s_int = sobol_points(n_int, 2 + P);
    set.interior.points.resize(2 + P, n_int);
    for (int i = 0; i < n_int; ++i) {
        set.interior.points(0, i) = domain.T * s_int(0, i);
        set.interior.points(1, i) = domain.x_left + domain.length() * s_int(1, i);
        for (int p = 0; p < P; ++p) {
            set.interior.points(2 + p, i) = param_value(domain, p, s_int(2 + p, i));
        }
    }
    set.interior.weights = Eigen::ArrayXd::Constant(n_int, domain.T * domain.length() / n_int);

    const Eigen::MatrixXd s_sb = sobol_points(n_sb, 1 + P);
    set.spatial_left.points.resize(2 + P, n_sb);
    for (int i = 0; i < n_sb; ++i) {
        set.spatial_left.points(0, i) = domain.T * s_sb(0, i);
        set.spatial_left.points(1, i) = domain.x_left;
        for (int p = 0; p < P; ++p) {
            set.spatial_left.points(2 + p, i) = param_value(domain, p, s_sb(1 + p, i));
        }
    }
    set.spatial_left.weights = Eigen::ArrayXd::Constant(n_sb, domain.T / n_sb);
    set.spatial_right = set.spatial_left;
    set.spatial_right.points.row(1).setConstant(domain.x_right);

    const Eigen::MatrixXd s_tb = sobol_points(n_tb, 1 + P);
    set.temporal.points.resize(2 + P, n_tb);
    for (int i = 0; i < n_tb; ++i) {
        set.temporal.points(0, i) = 0.0;
        set.temporal.points(1, i) = domain.x_left + domain.length() * s_tb(0, i);
        for (int p = 0; p < P; ++p) {
            set.temporal.points(2 + p, i) = param_value(domain, p, s_tb(1 + p, i));
        }
    }
    set.temporal.weights = Eigen::ArrayXd::Constant(n_tb, domain.length() / n_tb);
    return set;
}

PointBlock cartesian_interior(const Domain& domain, int half_nodes, double ratio, CartesianGrid* grid) {
    check_domain(domain);
    if (domain.param_dim() != 0) {
        throw std::invalid_argument("Cartesian interiors carry no parameter dimensions");
    }
    if (half_nodes < 1 || !(ratio > 0.0)) {
        throw std::invalid_argument("Cartesian grid needs N >= 1 and a positive step ratio");
    }
    const double L = 0.5 * domain.length();
    if (std::abs(domain.x_left + domain.x_right) > 1e-12 * L) {
        throw std::invalid_argument("Cartesian grid needs a symmetric domain (-L, L)");
    }
    const double dx = L / half_nodes;
    const double dt = ratio * dx;
    if (dt > domain.T) {
        throw std::invalid_argument("time step ratio * dx exceeds the horizon T");
    }
    const int slices = static_cast<int>(std::floor(domain.T / dt * (1.0 + 1e-12)));
    const int nodes = 2 * half_nodes + 1;

    PointBlock block;
    block.points.resize(2, static_cast<Eigen::Index>(slices) * nodes);
    block.weights.resize(block.points.cols());
    const double w_time = domain.T / slices;
    for (int k = 0; k < slices; ++k) {
        for (int i = -half_nodes; i <= half_nodes; ++i) {
            const Eigen::Index col = static_cast<Eigen::Index>(k) * nodes + (i + half_nodes);
            block.points(0, col) = (k + 1) * dt;
            block.points(1, col) = i * dx;
            const double w_space = std::abs(i) == half_nodes ? 0.5 * dx : dx;
            block.weights(col) = w_space * w_time;
        }
    }
    if (grid != nullptr) {
        *grid = CartesianGrid{half_nodes, slices, dx, dt};
    }
    return block;
}

TrainingSet build_cartesian_training_set(const Domain& domain, int half_nodes, double ratio, int n_sb, int n_tb) {
    TrainingSet set = build_training_set(domain, 1, n_sb, n_tb);
    CartesianGrid grid;
    set.interior = cartesian_interior(domain, half_nodes, ratio, &grid);
    set.grid = grid;
    return set;
}

void write_training_set_csv(std::ostream& out, const TrainingSet& set) {
    const int P = set.domain.param_dim();
    out << "kind,t,x";
    for (int p = 0; p < P; ++p) {
        out << ",p" << p;
    }
    out << ",weight\n";
    auto emit = [&](const char* kind, const PointBlock& b) {
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            out << kind;
            for (Eigen::Index r = 0; r < b.points.rows(); ++r) {
                out << ',' << b.points(r, i);
            }
            out << ',' << b.weights(i) << '\n';
        }
    };
    const auto old_precision = out.precision(17);
    emit("interior", set.interior);
    emit("spatial_left", set.spatial_left);
    emit("spatial_right", set.spatial_right);
    emit("temporal", set.temporal);
    out.precision(old_precision);
}

}  // namespace dpinn
