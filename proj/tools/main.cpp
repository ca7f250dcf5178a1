#include <malloc.h>

#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
    // Keep large jet buffers out of mmap/munmap churn.
    mallopt(M_MMAP_THRESHOLD, 32 << 20);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);

    CLI::App app{"Physics-informed neural networks for dispersive PDEs"};
    app.require_subcommand(1);

    dpinn::cli::CommandOptions opt;
    std::uint64_t seed = 0;
    int max_iters = 0;
    auto common = [&](CLI::App* sub, bool training) {
        sub->add_option("--config", opt.config_path, "experiment JSON file")->required();
        sub->add_option("--out-dir", opt.out_dir, "output root (default $DPINN_OUT_DIR or ./dpinn-out)");
        if (training) {
            sub->add_option("--seed", seed, "seed (base seed for ensembles)");
            sub->add_option("--max-iters", max_iters, "override the L-BFGS iteration limit")
                ->check(CLI::NonNegativeNumber);
        }
    };

    auto* train = app.add_subcommand("train", "train one network");
    common(train, true);
    auto* ensemble = app.add_subcommand("ensemble", "train the hyperparameter grid and keep the best run");
    common(ensemble, true);
    ensemble->add_option("--jobs", opt.jobs, "concurrent runs")->check(CLI::PositiveNumber);
    auto* verify = app.add_subcommand("verify-bound", "evaluate the generalization bound of a checkpoint");
    common(verify, false);
    verify->add_option("--checkpoint", opt.checkpoint, "trained network")->required();
    auto* uq = app.add_subcommand("uq", "mean and standard deviation over the parameter box");
    common(uq, false);
    uq->add_option("--checkpoint", opt.checkpoint, "trained six-input network")->required();

    CLI11_PARSE(app, argc, argv);

    for (CLI::App* sub : {train, ensemble}) {
        if (sub->parsed()) {
            if (sub->count("--seed") > 0) {
                opt.seed = seed;
            }
            if (sub->count("--max-iters") > 0) {
                opt.max_iters = max_iters;
            }
        }
    }
    if (train->parsed()) {
        return dpinn::cli::cmd_train(opt, std::cout, std::cerr);
    }
    if (ensemble->parsed()) {
        return dpinn::cli::cmd_ensemble(opt, std::cout, std::cerr);
    }
    if (verify->parsed()) {
        return dpinn::cli::cmd_verify_bound(opt, std::cout, std::cerr);
    }
    return dpinn::cli::cmd_uq(opt, std::cout, std::cerr);
}
