#include "dpinn/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace dpinn {

namespace {

using Eigen::VectorXd;

struct Probe {
    double t = 0.0;
    double f = 0.0;
    double dg = 0.0;  // directional derivative along the search direction
    VectorXd g;
};

struct NonFinite : std::runtime_error {
    NonFinite() : std::runtime_error("non-finite loss or gradient") {}
};

// Minimiser of the cubic through (a.t, a.f, a.dg) and (b.t, b.f, b.dg), clamped to [lo, hi].
double cubic_step(const Probe& a, const Probe& b, double lo, double hi) {
    const double d1 = a.dg + b.dg - 3.0 * (a.f - b.f) / (a.t - b.t);
    const double disc = d1 * d1 - a.dg * b.dg;
    if (disc >= 0.0) {
        const double d2 = std::sqrt(disc);
        double t = 0.0;
        if (a.t <= b.t) {
            t = b.t - (b.t - a.t) * ((b.dg + d2 - d1) / (b.dg - a.dg + 2.0 * d2));
        } else {
            t = a.t - (a.t - b.t) * ((a.dg + d2 - d1) / (a.dg - b.dg + 2.0 * d2));
        }
        if (std::isfinite(t)) {
            return std::clamp(t, lo, hi);
        }
    }
    return 0.5 * (lo + hi);
}

class LineSearch {
public:
    LineSearch(const Objective& f, const VectorXd& x, const VectorXd& d, const LbfgsOptions& opt)
        : f_(f), x_(x), d_(d), opt_(opt) {}

    // Strong Wolfe search from `start` (t = 0). Returns the first point
    // meeting both conditions, or else the lowest point of the last bracket.
    Probe run(const Probe& start, double t) {
        const double f0 = start.f;
        const double dg0 = start.dg;
        auto armijo_fails = [&](const Probe& p) { return p.f > f0 + opt_.c1 * p.t * dg0; };
        auto curvature_ok = [&](const Probe& p) { return std::abs(p.dg) <= -opt_.c2 * dg0; };

        Probe prev = start;
        Probe cur = probe(t);
        int count = 1;
        Probe lo, hi;
        bool bracketed = false;
        while (count < opt_.max_line_search) {
            if (armijo_fails(cur) || (count > 1 && cur.f >= prev.f)) {
                lo = prev;
                hi = cur;
                bracketed = true;
                break;
            }
            if (curvature_ok(cur)) {
                return cur;
            }
            if (cur.dg >= 0.0) {
                lo = cur;
                hi = prev;
                bracketed = true;
                break;
            }
            const double min_step = cur.t + 0.01 * (cur.t - prev.t);
            const double max_step = 10.0 * cur.t;
            const double next = cubic_step(prev, cur, min_step, max_step);
            prev = std::move(cur);
            cur = probe(next);
            ++count;
        }
        if (!bracketed) {
            return cur.f < prev.f ? cur : prev;
        }

        // Zoom: lo always holds the lowest sufficient-decrease point.
        const double dmax = d_.cwiseAbs().maxCoeff();
        bool poor_progress = false;
        while (count < opt_.max_line_search) {
            const double a = std::min(lo.t, hi.t);
            const double b = std::max(lo.t, hi.t);
            if ((b - a) * dmax < 1e-12 * std::max(1.0, x_.cwiseAbs().maxCoeff())) {
                break;
            }
            double t_new = cubic_step(lo, hi, a, b);
            // Keep trial steps away from the bracket ends.
            const double margin = 0.1 * (b - a);
            if (std::min(b - t_new, t_new - a) < margin) {
                if (poor_progress || t_new >= b || t_new <= a) {
                    t_new = std::abs(t_new - b) < std::abs(t_new - a) ? b - margin : a + margin;
                    poor_progress = false;
                } else {
                    poor_progress = true;
                }
            } else {
                poor_progress = false;
            }
            Probe p = probe(t_new);
            ++count;
            if (armijo_fails(p) || p.f >= lo.f) {
                hi = std::move(p);
            } else {
                if (curvature_ok(p)) {
                    return p;
                }
                if (p.dg * (hi.t - lo.t) >= 0.0) {
                    hi = lo;
                }
                lo = std::move(p);
            }
        }
        return lo;
    }

    [[nodiscard]] int evaluations() const noexcept { return evaluations_; }

private:
    Probe probe(double t) {
        Probe p;
        p.t = t;
        p.g.resize(x_.size());
        p.f = f_(x_ + t * d_, p.g);
        ++evaluations_;
        if (!std::isfinite(p.f) || !p.g.allFinite()) {
            throw NonFinite();
        }
        p.dg = p.g.dot(d_);
        return p;
    }

    const Objective& f_;
    const VectorXd& x_;
    const VectorXd& d_;
    const LbfgsOptions& opt_;
    int evaluations_ = 0;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& f, VectorXd theta0, const LbfgsOptions& options,
                           const IterationCallback& callback) {
    if (options.memory < 1 || options.max_iters < 0) {
        throw std::invalid_argument("L-BFGS needs memory >= 1 and max_iters >= 0");
    }
    const long max_evals = options.max_evaluations >= 0
                               ? options.max_evaluations
                               : static_cast<long>(std::ceil(1.25 * options.max_iters));

    LbfgsResult result;
    VectorXd x = std::move(theta0);
    VectorXd g(x.size());
    double fx = f(x, g);
    result.evaluations = 1;
    if (!std::isfinite(fx) || !g.allFinite()) {
        throw std::invalid_argument("L-BFGS: loss is not finite at the starting point");
    }
    result.theta = x;
    result.loss = fx;

    std::deque<VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> alpha(static_cast<std::size_t>(options.memory));
    bool restarted = false;

    auto converged = [&] { return g.cwiseAbs().maxCoeff() <= options.grad_tolerance; };
    if (converged()) {
        result.stop_reason = "gradient tolerance";
        return result;
    }
    if (options.max_iters == 0) {
        result.stop_reason = "iteration limit";
        return result;
    }

    while (true) {
        // Two-loop recursion.
        VectorXd d = -g;
        const std::size_t m = s_hist.size();
        for (std::size_t i = m; i-- > 0;) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(d);
            d.noalias() -= alpha[i] * y_hist[i];
        }
        if (m > 0) {
            d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        }
        for (std::size_t i = 0; i < m; ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(d);
            d.noalias() += (alpha[i] - beta) * s_hist[i];
        }
        double dg = g.dot(d);
        if (!(dg < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = -g;
            dg = -g.squaredNorm();
        }
        const double t0 = s_hist.empty() ? std::min(1.0, 1.0 / g.lpNorm<1>()) : 1.0;

        LineSearch search(f, x, d, options);
        Probe start;
        start.f = fx;
        start.dg = dg;
        Probe next;
        try {
            next = search.run(start, t0);
        } catch (const NonFinite&) {
            result.evaluations += search.evaluations();
            result.stop_reason = "non-finite loss";
            break;
        }
        result.evaluations += search.evaluations();

        if (!(next.f < fx)) {
            // No decrease: retry once from steepest descent before giving up.
            if (!s_hist.empty() && !restarted) {
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                restarted = true;
                if (result.evaluations >= max_evals) {
                    result.stop_reason = "evaluation limit";
                    break;
                }
                continue;
            }
            result.stop_reason = "line search failed";
            break;
        }
        restarted = false;

        VectorXd s = next.t * d;
        VectorXd y = next.g - g;
        const double sy = s.dot(y);
        if (sy > 0.0) {
            if (static_cast<int>(s_hist.size()) == options.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
        }
        x.noalias() += next.t * d;
        fx = next.f;
        g = std::move(next.g);
        ++result.iterations;
        result.history.push_back(fx);
        if (fx < result.loss) {
            result.loss = fx;
            result.theta = x;
        }
        if (callback && !callback(result.iterations, fx)) {
            result.stop_reason = "stopped by callback";
            break;
        }
        if (converged()) {
            result.stop_reason = "gradient tolerance";
            break;
        }
        if (result.iterations >= options.max_iters) {
            result.stop_reason = "iteration limit";
            break;
        }
        if (result.evaluations >= max_evals) {
            result.stop_reason = "evaluation limit";
            break;
        }
    }
    return result;
}

}  // namespace dpinn
