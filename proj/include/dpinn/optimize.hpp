#pragma once

/// \file optimize.hpp
/// Limited-memory BFGS with a strong Wolfe line search.

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace dpinn {

/// Loss value at theta; writes the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
    int memory = 50;
    int max_iters = 1000;
    /// Cap on objective evaluations; negative means ceil(1.25 * max_iters).
    int max_evaluations = -1;
    double grad_tolerance = 1e-9;
    double c1 = 1e-4;  ///< sufficient decrease
    double c2 = 0.9;   ///< curvature
    int max_line_search = 25;
};

struct LbfgsResult {
    Eigen::VectorXd theta;  ///< best iterate seen
    double loss = 0.0;
    int iterations = 0;
    int evaluations = 0;
    std::vector<double> history;  ///< loss after each iteration
    std::string stop_reason;
};

/// Called after every iteration with (iteration, loss); returning false stops the run.
using IterationCallback = std::function<bool(int iteration, double loss)>;

LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd theta0, const LbfgsOptions& options = {},
                           const IterationCallback& callback = {});

}  // namespace dpinn
