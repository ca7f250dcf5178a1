#pragma once

// Subcommands of the dpinn tool. Each returns a process exit status and
// writes progress to `log`, diagnostics to `err`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "experiment_io.hpp"

namespace dpinn::cli {

struct CommandOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iters;
    int jobs = 1;
    std::string out_dir;
    std::string checkpoint;
};

/// $DPINN_OUT_DIR if set, else "dpinn-out".
std::string default_out_dir();

int cmd_train(const CommandOptions& opt, std::ostream& log, std::ostream& err);
int cmd_ensemble(const CommandOptions& opt, std::ostream& log, std::ostream& err);
int cmd_verify_bound(const CommandOptions& opt, std::ostream& log, std::ostream& err);
int cmd_uq(const CommandOptions& opt, std::ostream& log, std::ostream& err);

/// Mean/std fields of a model and of the exact family on the (x, t) grid of
/// the UQ options, plus sup-norm discrepancies relative to the exact fields.
struct UqTable {
    Matrix xt;
    UqFields model;
    UqFields exact;
    double mean_sup_rel = 0.0;
    double std_sup_rel = 0.0;
};

UqTable uq_table(const FieldFn& model, const FieldFn& exact, const Domain& domain, const io::UqOptions& opt);

}  // namespace dpinn::cli
