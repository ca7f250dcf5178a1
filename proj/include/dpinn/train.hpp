#pragma once

/// \file train.hpp
/// Experiment configuration, loss assembly, single training runs and
/// ensemble training over a hyperparameter grid.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dpinn/equations.hpp"
#include "dpinn/metrics.hpp"
#include "dpinn/network.hpp"
#include "dpinn/optimize.hpp"
#include "dpinn/sampling.hpp"

namespace dpinn {

struct ExperimentConfig {
    std::string name = "experiment";
    /// Equation; its `data` member is filled from `reference` by resolve().
    EquationSpec equation;
    std::string reference = "zero";
    Domain domain;
    int n_int = 1024;
    int n_sb = 256;
    int n_tb = 256;
    int hidden_layers = 4;
    int width = 20;
    double lambda = 1.0;
    double lambda_reg = 0.0;
    int q = 2;
    int retrains = 1;
    std::uint64_t seed_base = 0;
    int max_iters = 1000;
    /// Benjamin-Ono only: Cartesian interior with 2N+1 nodes per slice and
    /// time step ratio * dx. Used when half_nodes > 0.
    int half_nodes = 0;
    double grid_ratio = 0.0;
    /// Interior points per jet batch.
    int chunk = 256;

    /// Throws std::invalid_argument on inconsistent fields.
    void validate() const;
    /// Layer widths {input, width x hidden_layers, 1}.
    [[nodiscard]] std::vector<int> widths() const;
    /// Copy of the equation with its reference solution attached.
    [[nodiscard]] EquationSpec resolve() const;
};

/// Hyperparameter grid; empty lists keep the base value.
struct HyperGrid {
    std::vector<int> hidden_layers;
    std::vector<int> widths;
    std::vector<double> lambdas;
    std::vector<double> lambda_regs;
};

/// All combinations in the order (hidden_layers, width, lambda, lambda_reg),
/// last index fastest. Names get a "#k" suffix when the grid has more than one entry.
std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const HyperGrid& grid);

TrainingSet make_training_set(const ExperimentConfig& config);

/// Sets the fixed input map so that the domain (and parameter box) maps to [-1, 1].
void normalize_inputs(MlpParams& params, const Domain& domain);

/// Xavier initialization for `seed` with normalized inputs.
MlpParams initial_params(const ExperimentConfig& config, std::uint64_t seed);

/// Squared residual sums and the total loss
/// J = temporal + spatial + lambda * interior + lambda_reg * regularization.
struct LossBreakdown {
    double temporal = 0.0;
    double spatial = 0.0;
    double interior = 0.0;
    double regularization = 0.0;  ///< ||theta_W||_q^q
    double lambda = 1.0;
    double lambda_reg = 0.0;
    double total = 0.0;

    /// E_T = sqrt(temporal + spatial + lambda * interior).
    [[nodiscard]] double training_error() const;
};

/// ||theta_W||_q^q over weight entries; adds its gradient into `grad` if non-null.
double weight_regularization(const MlpParams& params, int q, Vector* grad);

/// Loss and, if `grad` is non-null, its exact gradient.
LossBreakdown assemble_loss(const MlpParams& params, const ExperimentConfig& config, const ResidualSystem& system,
                            Vector* grad);

struct TrainResult {
    MlpParams params;
    LossBreakdown loss;
    std::vector<double> history;  ///< total loss after each iteration
    int iterations = 0;
    int evaluations = 0;
    std::string stop_reason;
    double wall_seconds = 0.0;
};

/// init_params(seed) followed by L-BFGS on the assembled loss.
TrainResult train_single(const ExperimentConfig& config, std::uint64_t seed, const ResidualSystem& system,
                         const IterationCallback& callback = {});
TrainResult train_single(const ExperimentConfig& config, std::uint64_t seed);

/// One row of the ensemble table.
struct RunRecord {
    int config_index = 0;
    std::string config_id;
    std::uint64_t seed = 0;
    int iterations = 0;
    double wall_seconds = 0.0;
    double loss = 0.0;
    double training_error = 0.0;
    GeneralizationError error;
    bool failed = false;
    std::string message;
};

struct EnsembleResult {
    std::vector<RunRecord> runs;  ///< config-major, seeds ascending
    std::size_t best = 0;         ///< index into runs
    MlpParams best_params;
};

/// Trains every configuration `retrains` times with seeds seed_base, seed_base + 1, ...
/// on up to `jobs` threads and selects the run with the smallest loss, ties
/// broken by (grid index, seed). Failed runs are recorded and skipped; throws
/// if all runs fail. E_G is measured against the reference on
/// evaluation_quadrature when the reference is not "zero".
EnsembleResult ensemble_train(const std::vector<ExperimentConfig>& grid, int jobs = 1);

/// Index of the selected run under the (loss, grid index, seed) order.
std::size_t select_best(const std::vector<RunRecord>& runs);

}  // namespace dpinn
