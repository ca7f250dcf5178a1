// Acceptance runner: one PASS/FAIL line per criterion, details indented
// underneath. Exit status is 0 only if every selected criterion passes.

#include <malloc.h>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "experiment_io.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace dpinn;
using Clock = std::chrono::steady_clock;

struct Settings {
    fs::path configs;
    fs::path models;
};

struct Outcome {
    bool pass = true;
    std::string summary;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v, int digits = 2) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(digits) << v;
    return s.str();
}

std::string minutes(double seconds) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << seconds / 60.0 << " min";
    return s.str();
}

void detail(const std::string& line) { std::cout << "    " << line << std::endl; }

io::ExperimentFile load(const Settings& s, const std::string& name) {
    return io::load_experiment((s.configs / (name + ".json")).string());
}

// ---------------------------------------------------------------- 1

Outcome oracle_residuals(const Settings& s) {
    const auto start = Clock::now();
    struct Family {
        const char* config;
        double tol;
    };
    Outcome out;
    double worst_ratio = 0.0;
    for (const auto& [name, tol] : {Family{"kdv_single", 1e-4}, Family{"kdv_double", 1e-4}, Family{"kawahara", 1e-4},
                                    Family{"kdv_uq", 1e-4}, Family{"ch_single", 1e-3}, Family{"ch_double", 1e-3},
                                    Family{"bo_periodic", 1e-2}, Family{"bo_line", 1e-2}}) {
        ExperimentConfig c = load(s, name).config;
        c.n_int = 2000;
        c.n_sb = 64;
        c.n_tb = 64;
        if (c.half_nodes > 0) {
            c.half_nodes = 256;
            c.grid_ratio = (c.domain.T / 10.0) / (c.domain.length() / 512.0);
        }
        const EquationSpec spec = c.resolve();
        const ResidualSystem sys(spec, make_training_set(c), c.chunk);
        const double worst = sys.residuals(spec.data).interior.abs().maxCoeff();
        const bool ok = worst < tol;
        out.pass = out.pass && ok;
        worst_ratio = std::max(worst_ratio, worst / tol);
        detail(std::string(ok ? "ok   " : "FAIL ") + name + ": max |residual| " + sci(worst) + " (tol " + sci(tol, 0) +
               ")");
    }
    const double wall = seconds_since(start);
    out.pass = out.pass && wall < 60.0;
    out.summary = "worst residual/tolerance " + sci(worst_ratio) + ", " + minutes(wall) + " (< 1 min)";
    return out;
}

// ---------------------------------------------------------------- 2

MlpParams random_network(const Domain& d, int width, int hidden, std::uint64_t seed) {
    std::vector<int> widths(static_cast<std::size_t>(hidden + 2), width);
    widths.front() = d.input_dim();
    widths.back() = 1;
    MlpParams p = init_params(widths, seed);
    std::mt19937_64 rng(seed + 1000);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int k = 0; k < p.layer_count(); ++k) {
        for (Eigen::Index i = 0; i < p.bias(k).size(); ++i) {
            p.bias(k)(i) = u(rng);
        }
    }
    normalize_inputs(p, d);
    return p;
}

Outcome differentiation(const Settings& s) {
    const auto start = Clock::now();
    Outcome out;
    const Domain box{-2.0, 2.0, 1.0, {}, {}};
    const ShapePtr shape = JetShape::rectangle(1, 5);
    double worst_jet = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const MlpParams p = random_network(box, 16, 3, seed);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> ux(-1.5, 1.5), ut(0.1, 0.9);
        for (int k = 0; k < 3; ++k) {
            Vector pt(2);
            pt << ut(rng), ux(rng);
            const auto jet = forward_jet(p, pt, shape);
            auto f = [&](testing::quad t, testing::quad x) { return testing::network_quad(p, {t, x}); };
            for (int m = 0; m < shape->size(); ++m) {
                const auto mi = shape->multi(m);
                const double want = testing::mixed_partial(f, pt(0), pt(1), mi.t, mi.x);
                worst_jet = std::max(worst_jet, std::abs(jet.derivative(mi.t, mi.x) - want) /
                                                    std::max(1.0, std::abs(want)));
            }
        }
    }
    detail("jets to order (1,5): worst error / max(1, |d|) " + sci(worst_jet));

    double worst_grad = 0.0;
    int directions = 0;
    const std::vector<std::string> names{"kdv_single", "kawahara", "kdv_uq", "ch_single", "bo_periodic"};
    for (std::size_t e = 0; directions < 20; ++e) {
        ExperimentConfig c = load(s, names[e % names.size()]).config;
        c.n_int = 96;
        c.n_sb = 24;
        c.n_tb = 24;
        c.hidden_layers = 2;
        c.width = 10;
        if (c.half_nodes > 0) {
            c.half_nodes = 24;
            c.grid_ratio = 0.3;
        }
        const ResidualSystem sys(c.resolve(), make_training_set(c), c.chunk);
        const MlpParams q = random_network(c.domain, c.width, c.hidden_layers, 40 + e);
        Vector g;
        assemble_loss(q, c, sys, &g);
        std::mt19937_64 rng(e);
        std::normal_distribution<double> n01;
        for (int k = 0; k < 4 && directions < 20; ++k, ++directions) {
            Vector d(g.size());
            for (Eigen::Index i = 0; i < d.size(); ++i) {
                d(i) = n01(rng);
            }
            const double h = 1e-4;
            auto f = [&](double t) {
                MlpParams x = q;
                x.theta() += t * d;
                return assemble_loss(x, c, sys, nullptr).total;
            };
            const double fd = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
            worst_grad = std::max(worst_grad, testing::relative_error(g.dot(d), fd));
        }
    }
    detail("loss gradient, 20 directions over 5 equations: worst relative error " + sci(worst_grad));
    const double wall = seconds_since(start);
    out.pass = worst_jet < 1e-5 && worst_grad < 1e-5 && wall < 60.0;
    out.summary = "jets " + sci(worst_jet) + ", gradients " + sci(worst_grad) + " (< 1e-5), " + minutes(wall) +
                  " (< 1 min)";
    return out;
}

// ---------------------------------------------------------------- 3

Eigen::ArrayXd direct_periodic(const Eigen::ArrayXd& u, int N) {
    Eigen::ArrayXd v(2 * N + 1);
    for (int i = 0; i < 2 * N; ++i) {
        long double acc = 0.0L;
        for (int j = -N; j <= N; ++j) {
            if (j == 0) {
                continue;
            }
            const int k = ((i - j) % (2 * N) + 2 * N) % (2 * N);
            acc += static_cast<long double>(1.0 / std::tan(M_PI * j / (2.0 * N))) * u(k);
        }
        v(i) = static_cast<double>(acc / (2 * N));
    }
    v(2 * N) = v(0);
    return v;
}

Eigen::ArrayXd direct_line(const Eigen::ArrayXd& u, int N) {
    Eigen::ArrayXd v(2 * N + 1);
    for (int i = 0; i <= 2 * N; ++i) {
        long double acc = 0.0L;
        for (int k = 0; k <= 2 * N; ++k) {
            if (k != i) {
                acc += static_cast<long double>(u(k)) / (M_PI * (i - k));
            }
        }
        v(i) = static_cast<double>(acc);
    }
    return v;
}

Outcome hilbert(const Settings&) {
    Outcome out;
    const int N = 256;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Eigen::ArrayXd u(2 * N + 1);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        u(i) = U(rng);
    }
    u(2 * N) = u(0);
    const auto P = HilbertTransform::periodic(N);
    const auto Lh = HilbertTransform::line(N);
    const double fft_periodic = (P.apply(u) - direct_periodic(u, N)).abs().maxCoeff();
    const double fft_line = (Lh.apply(u) - direct_line(u, N)).abs().maxCoeff();
    detail("FFT vs direct sum: periodic " + sci(fft_periodic) + ", line " + sci(fft_line) + " (< 1e-12)");

    const double L = 15.0;
    const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(2 * N + 1, -L, L);
    const double sine = (P.apply((M_PI * x / L).sin()) + (M_PI * x / L).cos()).abs().maxCoeff();
    detail("periodic H sin + cos at N=256: " + sci(sine) + " (< 1e-3)");

    // Antisymmetry of the kernel: the operator matrix is skew on the
    // independent nodes (the periodic node x_N only repeats x_{-N}).
    double skew = 0.0;
    for (const auto* H : {&P, &Lh}) {
        const Eigen::MatrixXd A = H->matrix();
        const int core = H->kind() == HilbertTransform::Kind::periodic ? 2 * N : 2 * N + 1;
        const Eigen::MatrixXd block = A.topLeftCorner(core, core);
        skew = std::max(skew, (block + block.transpose()).cwiseAbs().maxCoeff());
    }
    detail("antisymmetry: max |A + A^T| " + sci(skew) + " (exact 0)");
    out.pass = fft_periodic < 1e-12 && fft_line < 1e-12 && sine < 1e-3 && skew == 0.0;
    out.summary = "FFT/direct " + sci(std::max(fft_periodic, fft_line)) + ", sin identity " + sci(sine) +
                  ", antisymmetry " + sci(skew);
    return out;
}

// ---------------------------------------------------------------- 4-8

struct Replication {
    const char* config;
    const char* label;
    double tol;
    double budget_seconds;
};

Outcome replicate(const Settings& s, const Replication& r) {
    const auto start = Clock::now();
    const io::ExperimentFile f = load(s, r.config);
    const ExperimentConfig& c = f.config;
    const EquationSpec spec = c.resolve();
    const ResidualSystem sys(spec, make_training_set(c), c.chunk);
    const Quadrature quad = evaluation_quadrature(c.domain);
    std::optional<TrainResult> best;
    GeneralizationError best_error;
    double min_rel = std::numeric_limits<double>::infinity();
    for (int k = 0; k < c.retrains; ++k) {
        const std::uint64_t seed = c.seed_base + static_cast<std::uint64_t>(k);
        TrainResult t = train_single(c, seed, sys);
        const GeneralizationError ge = generalization_error(t.params, spec.data, quad);
        min_rel = std::min(min_rel, ge.relative);
        detail("seed " + std::to_string(seed) + ": " + std::to_string(t.iterations) + " iterations, " +
               minutes(t.wall_seconds) + ", loss " + sci(t.loss.total) + ", E_T " +
               sci(t.loss.training_error()) + ", E_G_rel " + sci(ge.relative));
        if (!best || t.loss.total < best->loss.total) {
            best = std::move(t);
            best_error = ge;
        }
    }
    fs::create_directories(s.models);
    save_checkpoint((s.models / (std::string(r.config) + ".txt")).string(), best->params);
    const double wall = seconds_since(start);
    Outcome out;
    out.pass = best_error.relative <= r.tol && wall <= r.budget_seconds;
    out.summary = std::string(r.label) + ": selected E_G_rel " + sci(best_error.relative) + " <= " + sci(r.tol, 0) +
                  " (min over seeds " + sci(min_rel) + "), " + minutes(wall) + " <= " + minutes(r.budget_seconds);
    return out;
}

// ---------------------------------------------------------------- 9

Outcome bounds(const Settings& s) {
    Outcome out;
    int checked = 0;
    double worst = 0.0;
    for (const char* name : {"kdv_single", "kdv_double", "kawahara", "ch_single", "bo_line"}) {
        const fs::path ckpt = s.models / (std::string(name) + ".txt");
        if (!fs::exists(ckpt)) {
            detail(std::string("FAIL ") + name + ": no trained model at " + ckpt.string());
            out.pass = false;
            continue;
        }
        const io::ExperimentFile f = load(s, name);
        const MlpParams p = load_checkpoint(ckpt.string());
        const BoundVerification v = verify_bound(p, f.config.resolve(), f.config.domain, f.verify);
        const double lhs = v.error.absolute * v.error.absolute;
        const double rhs = v.proof.rhs * v.proof.rhs;
        ++checked;
        worst = std::max(worst, lhs / rhs);
        out.pass = out.pass && v.satisfied;
        detail(std::string(v.satisfied ? "ok   " : "FAIL ") + name + " (" + to_string(v.kind) + "): E_G^2 " +
               sci(lhs) + " <= " + sci(rhs) + ", residual integrals tb " + sci(v.integrals.temporal) + " sb " +
               sci(v.integrals.spatial) + " int " + sci(v.integrals.interior));
    }
    out.summary = std::to_string(checked) + "/5 models checked, worst E_G^2 / rhs " + sci(worst);
    return out;
}

// ---------------------------------------------------------------- 10

Outcome uq(const Settings& s) {
    const auto start = Clock::now();
    const io::ExperimentFile f = load(s, "kdv_uq");
    const ExperimentConfig& c = f.config;
    const EquationSpec spec = c.resolve();
    const ResidualSystem sys(spec, make_training_set(c), c.chunk);
    std::optional<TrainResult> best;
    for (int k = 0; k < c.retrains; ++k) {
        const std::uint64_t seed = c.seed_base + static_cast<std::uint64_t>(k);
        TrainResult t = train_single(c, seed, sys);
        detail("seed " + std::to_string(seed) + ": " + std::to_string(t.iterations) + " iterations, " +
               minutes(t.wall_seconds) + ", loss " + sci(t.loss.total));
        if (!best || t.loss.total < best->loss.total) {
            best = std::move(t);
        }
    }
    fs::create_directories(s.models);
    save_checkpoint((s.models / "kdv_uq.txt").string(), best->params);
    const GeneralizationError ge = generalization_error(best->params, spec.data, evaluation_quadrature(c.domain));
    const MlpParams& p = best->params;
    const auto table = cli::uq_table([&](const Matrix& in) { return evaluate(p, in); },
                                     [&](const Matrix& in) { return spec.data.evaluate(in); }, c.domain, f.uq);
    const double wall = seconds_since(start);
    detail("E_G_rel over the 6-D domain " + sci(ge.relative) + "; mean sup discrepancy " + sci(table.mean_sup_rel) +
           ", std sup discrepancy " + sci(table.std_sup_rel));
    Outcome out;
    out.pass = ge.relative <= 2e-2 && table.mean_sup_rel <= 5e-2 && table.std_sup_rel <= 5e-2 && wall <= 45 * 60.0;
    out.summary = "E_G_rel " + sci(ge.relative) + " <= 2e-02, mean/std sup " + sci(table.mean_sup_rel) + "/" +
                  sci(table.std_sup_rel) + " <= 5e-02, " + minutes(wall) + " <= 45.0 min";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    mallopt(M_MMAP_THRESHOLD, 32 << 20);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);

    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    std::string configs = std::string(DPINN_SOURCE_DIR) + "/configs";
    std::string models = "acceptance-models";
    app.add_option("--only", only, "criteria to run (default all)")->check(CLI::Range(1, 10));
    app.add_option("--configs", configs, "directory of bundled experiment files");
    app.add_option("--models", models, "where criteria 4-8 and 10 store, and 9 reads, trained models");
    CLI11_PARSE(app, argc, argv);
    if (only.empty()) {
        for (int k = 1; k <= 10; ++k) {
            only.push_back(k);
        }
    }
    const Settings s{configs, models};

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle residual suite", [&] { return oracle_residuals(s); }},
        {"differentiation cross-check", [&] { return differentiation(s); }},
        {"Hilbert transform", [&] { return hilbert(s); }},
        {"KdV single soliton", [&] { return replicate(s, {"kdv_single", "2000 iterations", 1e-3, 10 * 60.0}); }},
        {"KdV double soliton", [&] { return replicate(s, {"kdv_double", "5000 iterations", 2e-2, 30 * 60.0}); }},
        {"Kawahara single soliton", [&] { return replicate(s, {"kawahara", "2000 iterations", 5e-2, 30 * 60.0}); }},
        {"Camassa-Holm single soliton", [&] { return replicate(s, {"ch_single", "1000 iterations", 1e-2, 20 * 60.0}); }},
        {"Benjamin-Ono line double soliton",
         [&] { return replicate(s, {"bo_line", "2000 iterations", 5e-2, 45 * 60.0}); }},
        {"bound verification", [&] { return bounds(s); }},
        {"UQ replication", [&] { return uq(s); }},
    };

    bool all = true;
    for (int k : only) {
        const auto& [name, run] = criteria[static_cast<std::size_t>(k - 1)];
        std::cout << "criterion " << k << " (" << name << ") running" << std::endl;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << k << " (" << name << "): " << o.summary
                  << std::endl;
    }
    return all ? 0 : 1;
}
