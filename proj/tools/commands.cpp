#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

namespace dpinn::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

struct Loaded {
    io::ExperimentFile file;
    fs::path dir;
};

Loaded prepare(const CommandOptions& opt) {
    Loaded l{io::load_experiment(opt.config_path), {}};
    if (opt.seed) {
        l.file.config.seed_base = *opt.seed;
    }
    if (opt.max_iters) {
        l.file.config.max_iters = *opt.max_iters;
    }
    l.file.config.validate();
    const std::string root = opt.out_dir.empty() ? default_out_dir() : opt.out_dir;
    l.dir = fs::path(root) / l.file.config.name;
    fs::create_directories(l.dir);
    return l;
}

MlpParams load_model(const CommandOptions& opt, const ExperimentConfig& config) {
    if (opt.checkpoint.empty()) {
        throw std::runtime_error("this command needs --checkpoint");
    }
    MlpParams p = load_checkpoint(opt.checkpoint);
    if (p.input_dim() != config.domain.input_dim()) {
        throw std::runtime_error("checkpoint '" + opt.checkpoint + "' has " + std::to_string(p.input_dim()) +
                                 " inputs, the experiment needs " + std::to_string(config.domain.input_dim()));
    }
    return p;
}

// (x, t) sample grid at the centre of the parameter box.
Matrix sample_points(const Domain& d, int nx, int nt) {
    const Quadrature q = tensor_quadrature(d, nx, nt);
    Matrix pts(d.input_dim(), q.points.cols());
    pts.topRows(2) = q.points;
    for (int i = 0; i < d.param_dim(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        pts.row(2 + i).setConstant(0.5 * (d.param_lo[ii] + d.param_hi[ii]));
    }
    return pts;
}

int guarded(const char* name, std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        err << "dpinn " << name << ": " << e.what() << '\n';
        return 1;
    }
}

json error_json(const GeneralizationError& e) { return {{"E_G", e.absolute}, {"E_G_rel", e.relative}}; }

}  // namespace

std::string default_out_dir() {
    const char* env = std::getenv("DPINN_OUT_DIR");
    return env != nullptr && *env != '\0' ? std::string(env) : std::string("dpinn-out");
}

int cmd_train(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
    return guarded("train", err, [&] {
        const Loaded l = prepare(opt);
        const ExperimentConfig& c = l.file.config;
        const EquationSpec spec = c.resolve();
        const ResidualSystem system(spec, make_training_set(c), c.chunk);
        const std::uint64_t seed = c.seed_base;
        log << "training " << c.name << " (seed " << seed << ", " << c.max_iters << " iterations)\n";
        const TrainResult r = train_single(c, seed, system, [&](int it, double loss) {
            if (it % 100 == 0) {
                log << "  iter " << it << "  loss " << loss << '\n';
            }
            return true;
        });
        const GeneralizationError ge = generalization_error(r.params, spec.data, evaluation_quadrature(c.domain));

        const std::string ckpt = (l.dir / "checkpoint.txt").string();
        const std::string hist = (l.dir / "loss_history.csv").string();
        const std::string sol = (l.dir / "solution.csv").string();
        const std::string man = (l.dir / "manifest.json").string();
        save_checkpoint(ckpt, r.params);

        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < r.history.size(); ++k) {
            rows.push_back({static_cast<double>(k + 1), r.history[k]});
        }
        io::write_csv(hist, {"iteration", "loss"}, rows);

        const Matrix pts = sample_points(c.domain, 201, 11);
        const Array u = evaluate(r.params, pts);
        const Array ue = spec.data.evaluate(pts);
        rows.clear();
        for (Eigen::Index k = 0; k < pts.cols(); ++k) {
            rows.push_back({pts(1, k), pts(0, k), u(k), ue(k)});
        }
        io::write_csv(sol, {"x", "t", "u_pinn", "u_exact"}, rows);

        io::RunManifest m;
        m.experiment = c.name;
        m.command = "train";
        m.config = io::to_json(l.file);
        m.seeds = {seed};
        m.wall_seconds = r.wall_seconds;
        m.seconds_per_iteration = r.iterations > 0 ? r.wall_seconds / r.iterations : 0.0;
        m.outputs = {{"checkpoint", ckpt}, {"loss_history", hist}, {"solution", sol}};
        m.results = {{"iterations", r.iterations},
                     {"evaluations", r.evaluations},
                     {"stop_reason", r.stop_reason},
                     {"loss", r.loss.total},
                     {"E_T", r.loss.training_error()},
                     {"E_T_tb", std::sqrt(r.loss.temporal)},
                     {"E_T_sb", std::sqrt(r.loss.spatial)},
                     {"E_T_int", std::sqrt(r.loss.interior)},
                     {"E_G", ge.absolute},
                     {"E_G_rel", ge.relative}};
        io::write_json(man, io::to_json(m));
        log << std::setprecision(4) << "done: " << r.iterations << " iterations, " << r.wall_seconds
            << " s, E_T " << r.loss.training_error() << ", E_G " << ge.absolute << ", E_G_rel " << ge.relative
            << "\noutputs in " << l.dir.string() << '\n';
        return 0;
    });
}

int cmd_ensemble(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
    return guarded("ensemble", err, [&] {
        const Loaded l = prepare(opt);
        const auto grid = expand_grid(l.file.config, l.file.grid);
        log << "ensemble " << l.file.config.name << ": " << grid.size() << " configurations x "
            << l.file.config.retrains << " seeds on " << opt.jobs << " job(s)\n";
        const auto start = std::chrono::steady_clock::now();
        const EnsembleResult e = ensemble_train(grid, opt.jobs);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const std::string table = (l.dir / "ensemble.csv").string();
        const std::string ckpt = (l.dir / "best_checkpoint.txt").string();
        const std::string man = (l.dir / "manifest.json").string();
        std::ofstream out(table);
        if (!out) {
            throw std::runtime_error("cannot write '" + table + "'");
        }
        out << std::setprecision(std::numeric_limits<double>::max_digits10);
        out << "config-id,seed,iters,wall-time-s,E_T,E_G,E_G_rel\n";
        json failures = json::array();
        long iterations = 0;
        for (const RunRecord& r : e.runs) {
            if (r.failed) {
                failures.push_back({{"config-id", r.config_id}, {"seed", r.seed}, {"message", r.message}});
                err << "run " << r.config_id << " seed " << r.seed << " failed: " << r.message << '\n';
                continue;
            }
            iterations += r.iterations;
            out << r.config_id << ',' << r.seed << ',' << r.iterations << ',' << r.wall_seconds << ','
                << r.training_error << ',' << r.error.absolute << ',' << r.error.relative << '\n';
        }
        out.close();
        save_checkpoint(ckpt, e.best_params);

        const RunRecord& b = e.runs[e.best];
        io::ExperimentFile best_file = l.file;
        best_file.config = grid[static_cast<std::size_t>(b.config_index)];
        best_file.grid = {};

        io::RunManifest m;
        m.experiment = l.file.config.name;
        m.command = "ensemble";
        m.config = io::to_json(l.file);
        for (const RunRecord& r : e.runs) {
            m.seeds.push_back(r.seed);
        }
        m.wall_seconds = wall;
        m.seconds_per_iteration = iterations > 0 ? wall / static_cast<double>(iterations) : 0.0;
        m.outputs = {{"table", table}, {"best_checkpoint", ckpt}};
        m.results = {{"best", {{"config-id", b.config_id},
                               {"seed", b.seed},
                               {"loss", b.loss},
                               {"E_T", b.training_error},
                               {"E_G", b.error.absolute},
                               {"E_G_rel", b.error.relative}}},
                     {"best_config", io::to_json(best_file)},
                     {"failures", failures}};
        io::write_json(man, io::to_json(m));
        log << std::setprecision(4) << "best: " << b.config_id << " seed " << b.seed << ", E_T "
            << b.training_error << ", E_G_rel " << b.error.relative << "\noutputs in " << l.dir.string() << '\n';
        return 0;
    });
}

int cmd_verify_bound(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
    return guarded("verify-bound", err, [&] {
        const Loaded l = prepare(opt);
        const ExperimentConfig& c = l.file.config;
        const MlpParams params = load_model(opt, c);
        const std::string report_path = (l.dir / "bound_report.json").string();
        json report;
        report["equation"] = to_string(c.equation.kind);
        report["checkpoint"] = opt.checkpoint;
        if (!bound_kind(c.equation.kind)) {
            report["status"] = "not covered";
            report["satisfied"] = nullptr;
            io::write_json(report_path, report);
            log << "not covered: no generalization bound for the " << to_string(c.equation.kind)
                << " problem\n";
            return 0;
        }
        const BoundVerification v = verify_bound(params, c.resolve(), c.domain, l.file.verify);
        report["status"] = "ok";
        report["theorem"] = to_string(v.kind);
        report["E_G"] = v.error.absolute;
        report["E_G_rel"] = v.error.relative;
        report["residual_integrals"] = {
            {"temporal", v.integrals.temporal}, {"spatial", v.integrals.spatial}, {"interior", v.integrals.interior}};
        report["constants"] = {{"proof", v.proof.constants}, {"theorem", v.theorem.constants}};
        report["bound_rhs"] = v.proof.rhs;
        report["theorem_rhs"] = v.theorem.rhs;
        report["satisfied"] = v.satisfied;
        io::write_json(report_path, report);
        log << std::setprecision(4) << "E_G " << v.error.absolute << " <= " << v.proof.rhs << " : "
            << (v.satisfied ? "satisfied" : "violated") << "\nreport " << report_path << '\n';
        return 0;
    });
}

UqTable uq_table(const FieldFn& model, const FieldFn& exact, const Domain& domain, const io::UqOptions& opt) {
    UqTable t;
    t.xt = tensor_quadrature(domain, opt.nx, opt.nt).points;
    t.model = uq_statistics(model, domain, t.xt, opt.samples);
    t.exact = uq_statistics(exact, domain, t.xt, opt.samples);
    auto rel = [](const Array& a, const Array& b) {
        const double scale = b.abs().maxCoeff();
        const double diff = (a - b).abs().maxCoeff();
        return scale > 0.0 ? diff / scale : diff;
    };
    t.mean_sup_rel = rel(t.model.mean, t.exact.mean);
    t.std_sup_rel = rel(t.model.std, t.exact.std);
    return t;
}

int cmd_uq(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
    return guarded("uq", err, [&] {
        const Loaded l = prepare(opt);
        const ExperimentConfig& c = l.file.config;
        if (c.domain.input_dim() != 6) {
            throw std::runtime_error("uq needs a six-input (t, x, alpha, beta, gamma, kappa) experiment");
        }
        const MlpParams params = load_model(opt, c);
        const exact::Reference ref = c.resolve().data;
        const UqTable t = uq_table([&](const Matrix& in) { return evaluate(params, in); },
                                   [&](const Matrix& in) { return ref.evaluate(in); }, c.domain, l.file.uq);
        const GeneralizationError ge = generalization_error(params, ref, evaluation_quadrature(c.domain));

        const std::string csv = (l.dir / "uq.csv").string();
        const std::string summary = (l.dir / "uq_summary.json").string();
        std::vector<std::vector<double>> rows;
        for (Eigen::Index k = 0; k < t.xt.cols(); ++k) {
            rows.push_back({t.xt(1, k), t.xt(0, k), t.model.mean(k), t.model.std(k), t.exact.mean(k), t.exact.std(k)});
        }
        io::write_csv(csv, {"x", "t", "mean_pinn", "std_pinn", "mean_exact", "std_exact"}, rows);
        json s = error_json(ge);
        s["samples"] = l.file.uq.samples;
        s["mean_sup_rel"] = t.mean_sup_rel;
        s["std_sup_rel"] = t.std_sup_rel;
        io::write_json(summary, s);
        log << std::setprecision(4) << "E_G_rel " << ge.relative << ", mean discrepancy " << t.mean_sup_rel
            << ", std discrepancy " << t.std_sup_rel << "\noutputs in " << l.dir.string() << '\n';
        return 0;
    });
}

}  // namespace dpinn::cli
