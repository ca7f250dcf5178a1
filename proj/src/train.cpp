#include "dpinn/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace dpinn {

void ExperimentConfig::validate() const {
    auto fail = [this](const std::string& what) {
        throw std::invalid_argument("config '" + name + "': " + what);
    };
    if (!(domain.x_right > domain.x_left) || !(domain.T > 0.0)) {
        fail("domain needs x_left < x_right and T > 0");
    }
    if (domain.param_lo.size() != domain.param_hi.size()) {
        fail("parameter bounds differ in length");
    }
    for (std::size_t i = 0; i < domain.param_lo.size(); ++i) {
        if (domain.param_lo[i] > domain.param_hi[i]) {
            fail("parameter box has lo > hi");
        }
    }
    if (n_sb < 1 || n_tb < 1 || (half_nodes == 0 && n_int < 1)) {
        fail("point counts must be positive");
    }
    if (hidden_layers < 1 || width < 1) {
        fail("need at least one hidden layer of positive width");
    }
    if (!(lambda > 0.0) || lambda_reg < 0.0 || (q != 1 && q != 2)) {
        fail("need lambda > 0, lambda_reg >= 0 and q in {1, 2}");
    }
    if (retrains < 1 || max_iters < 0 || chunk < 1) {
        fail("need retrains >= 1, max_iters >= 0 and chunk >= 1");
    }
    const bool bo = equation.kind == EquationKind::benjamin_ono;
    if (bo != (half_nodes > 0)) {
        fail("a Cartesian interior (half_nodes > 0) is used exactly for Benjamin-Ono");
    }
    if (bo && !(grid_ratio > 0.0)) {
        fail("Benjamin-Ono needs a positive grid_ratio");
    }
    if ((equation.kind == EquationKind::kdv_parametric) != (domain.param_dim() == 4)) {
        fail("the parametric problem needs exactly four parameter ranges");
    }
    const exact::Reference ref = exact::make_reference(reference);
    if (ref.input_dim() != domain.input_dim()) {
        fail("reference '" + reference + "' does not match the input dimension");
    }
}

std::vector<int> ExperimentConfig::widths() const {
    std::vector<int> w(static_cast<std::size_t>(hidden_layers) + 2, width);
    w.front() = domain.input_dim();
    w.back() = 1;
    return w;
}

EquationSpec ExperimentConfig::resolve() const {
    EquationSpec spec = equation;
    spec.data = exact::make_reference(reference);
    return spec;
}

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const HyperGrid& grid) {
    auto or_base = [](const auto& list, auto value) {
        using T = std::decay_t<decltype(value)>;
        return list.empty() ? std::vector<T>{value} : std::vector<T>(list.begin(), list.end());
    };
    const auto layers = or_base(grid.hidden_layers, base.hidden_layers);
    const auto widths = or_base(grid.widths, base.width);
    const auto lambdas = or_base(grid.lambdas, base.lambda);
    const auto regs = or_base(grid.lambda_regs, base.lambda_reg);
    std::vector<ExperimentConfig> out;
    for (int l : layers) {
        for (int w : widths) {
            for (double lam : lambdas) {
                for (double reg : regs) {
                    ExperimentConfig c = base;
                    c.hidden_layers = l;
                    c.width = w;
                    c.lambda = lam;
                    c.lambda_reg = reg;
                    out.push_back(std::move(c));
                }
            }
        }
    }
    if (out.size() > 1) {
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k].name = base.name + "#" + std::to_string(k);
        }
    }
    return out;
}

TrainingSet make_training_set(const ExperimentConfig& config) {
    if (config.half_nodes > 0) {
        return build_cartesian_training_set(config.domain, config.half_nodes, config.grid_ratio, config.n_sb,
                                            config.n_tb);
    }
    return build_training_set(config.domain, config.n_int, config.n_sb, config.n_tb);
}

void normalize_inputs(MlpParams& params, const Domain& domain) {
    if (params.input_dim() != domain.input_dim()) {
        throw std::invalid_argument("normalize_inputs: network and domain dimensions differ");
    }
    auto set = [&](int row, double lo, double hi) {
        params.input_offset(row) = 0.5 * (lo + hi);
        params.input_scale(row) = hi > lo ? 2.0 / (hi - lo) : 1.0;
    };
    set(0, 0.0, domain.T);
    set(1, domain.x_left, domain.x_right);
    for (int i = 0; i < domain.param_dim(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        set(2 + i, domain.param_lo[ii], domain.param_hi[ii]);
    }
}

MlpParams initial_params(const ExperimentConfig& config, std::uint64_t seed) {
    MlpParams p = init_params(config.widths(), seed);
    normalize_inputs(p, config.domain);
    return p;
}

double LossBreakdown::training_error() const { return std::sqrt(temporal + spatial + lambda * interior); }

double weight_regularization(const MlpParams& params, int q, Vector* grad) {
    const Vector mask = params.weight_mask();
    const Vector w = params.theta().cwiseProduct(mask);
    if (q == 2) {
        if (grad != nullptr) {
            *grad += 2.0 * w;
        }
        return w.squaredNorm();
    }
    if (q == 1) {
        if (grad != nullptr) {
            *grad += w.cwiseSign();
        }
        return w.lpNorm<1>();
    }
    throw std::invalid_argument("regularization exponent q must be 1 or 2");
}

LossBreakdown assemble_loss(const MlpParams& params, const ExperimentConfig& config, const ResidualSystem& system,
                            Vector* grad) {
    const LossScales scales{config.lambda, 1.0, 1.0};
    const ResidualSums s = system.sums(params, scales, grad);
    LossBreakdown b;
    b.temporal = s.temporal;
    b.spatial = s.spatial;
    b.interior = s.interior;
    b.lambda = config.lambda;
    b.lambda_reg = config.lambda_reg;
    if (config.lambda_reg > 0.0) {
        Vector reg_grad;
        if (grad != nullptr) {
            reg_grad.setZero(grad->size());
        }
        b.regularization = weight_regularization(params, config.q, grad != nullptr ? &reg_grad : nullptr);
        if (grad != nullptr) {
            *grad += config.lambda_reg * reg_grad;
        }
    } else {
        b.regularization = weight_regularization(params, config.q, nullptr);
    }
    b.total = b.temporal + b.spatial + b.lambda * b.interior + b.lambda_reg * b.regularization;
    return b;
}

TrainResult train_single(const ExperimentConfig& config, std::uint64_t seed, const ResidualSystem& system,
                         const IterationCallback& callback) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    MlpParams params = initial_params(config, seed);
    MlpParams work = params;
    const Objective objective = [&](const Vector& theta, Vector& grad) {
        work.theta() = theta;
        return assemble_loss(work, config, system, &grad).total;
    };
    LbfgsOptions opt;
    opt.max_iters = config.max_iters;
    const LbfgsResult r = minimize_lbfgs(objective, params.theta(), opt, callback);

    TrainResult out;
    params.theta() = r.theta;
    out.loss = assemble_loss(params, config, system, nullptr);
    out.params = std::move(params);
    out.history = r.history;
    out.iterations = r.iterations;
    out.evaluations = r.evaluations;
    out.stop_reason = r.stop_reason;
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

TrainResult train_single(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    const ResidualSystem system(config.resolve(), make_training_set(config), config.chunk);
    return train_single(config, seed, system);
}

std::size_t select_best(const std::vector<RunRecord>& runs) {
    std::optional<std::size_t> best;
    auto key = [&](std::size_t k) { return std::make_tuple(runs[k].loss, runs[k].config_index, runs[k].seed); };
    for (std::size_t k = 0; k < runs.size(); ++k) {
        if (runs[k].failed || !std::isfinite(runs[k].loss)) {
            continue;
        }
        if (!best || key(k) < key(*best)) {
            best = k;
        }
    }
    if (!best) {
        throw std::runtime_error("every ensemble run failed");
    }
    return *best;
}

EnsembleResult ensemble_train(const std::vector<ExperimentConfig>& grid, int jobs) {
    if (grid.empty()) {
        throw std::invalid_argument("ensemble_train: empty configuration grid");
    }
    for (const auto& c : grid) {
        c.validate();
    }
    struct Task {
        int config;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        for (int r = 0; r < grid[c].retrains; ++r) {
            tasks.push_back({static_cast<int>(c), grid[c].seed_base + static_cast<std::uint64_t>(r)});
        }
    }

    // Systems are built lazily, once per distinct configuration.
    std::vector<std::unique_ptr<ResidualSystem>> systems(grid.size());
    std::vector<std::once_flag> built(grid.size());
    std::vector<std::optional<Quadrature>> quads(grid.size());
    auto system_for = [&](int c) -> const ResidualSystem& {
        const auto cc = static_cast<std::size_t>(c);
        std::call_once(built[cc], [&] {
            systems[cc] = std::make_unique<ResidualSystem>(grid[cc].resolve(), make_training_set(grid[cc]),
                                                           grid[cc].chunk);
            quads[cc] = evaluation_quadrature(grid[cc].domain);
        });
        return *systems[cc];
    };

    EnsembleResult out;
    out.runs.resize(tasks.size());
    std::vector<MlpParams> params(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
            const Task& t = tasks[k];
            const ExperimentConfig& cfg = grid[static_cast<std::size_t>(t.config)];
            RunRecord& rec = out.runs[k];
            rec.config_index = t.config;
            rec.config_id = cfg.name;
            rec.seed = t.seed;
            try {
                const ResidualSystem& sys = system_for(t.config);
                TrainResult r = train_single(cfg, t.seed, sys);
                rec.iterations = r.iterations;
                rec.wall_seconds = r.wall_seconds;
                rec.loss = r.loss.total;
                rec.training_error = r.loss.training_error();
                rec.error = generalization_error(r.params, sys.spec().data, *quads[static_cast<std::size_t>(t.config)]);
                rec.message = r.stop_reason;
                params[k] = std::move(r.params);
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.message = e.what();
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    out.best = select_best(out.runs);
    out.best_params = std::move(params[out.best]);
    return out;
}

}  // namespace dpinn
