#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "experiment_io.hpp"

namespace {

namespace fs = std::filesystem;
using dpinn::io::json;

const fs::path kConfigs = fs::path(DPINN_SOURCE_DIR) / "configs";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (header != nullptr) {
        header->clear();
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) {
            header->push_back(cell);
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        rows.push_back(row);
    }
    return rows;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("dpinn_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    static json small_kdv() {
        return {{"name", "tiny"},
                {"reference", "kdv_single"},
                {"equation", {{"kind", "kdv_kawahara"}}},
                {"domain", {{"x_left", -5.0}, {"x_right", 5.0}, {"T", 1.0}}},
                {"points", {{"interior", 64}, {"spatial", 16}, {"temporal", 16}}},
                {"network", {{"hidden_layers", 2}, {"width", 6}}},
                {"loss", {{"lambda", 0.1}}},
                {"training", {{"retrains", 1}, {"seed_base", 3}, {"max_iters", 4}}}};
    }

    static json small_uq() {
        return {{"name", "tiny_uq"},
                {"reference", "kdv_param"},
                {"equation", {{"kind", "kdv_parametric"}}},
                {"domain",
                 {{"x_left", -5.0},
                  {"x_right", 5.0},
                  {"T", 1.0},
                  {"param_lo", {8.7, -0.4, 0.9, 0.9}},
                  {"param_hi", {9.3, 0.4, 1.1, 1.1}}}},
                {"points", {{"interior", 32}, {"spatial", 8}, {"temporal", 8}}},
                {"network", {{"hidden_layers", 1}, {"width", 4}}},
                {"training", {{"max_iters", 0}}},
                {"uq", {{"samples", 64}, {"nx", 11}, {"nt", 3}}}};
    }

    std::string write_config(const json& j, const std::string& file = "config.json") const {
        const std::string path = (dir_ / file).string();
        dpinn::io::write_json(path, j);
        return path;
    }

    dpinn::cli::CommandOptions options(const std::string& config) const {
        dpinn::cli::CommandOptions o;
        o.config_path = config;
        o.out_dir = (dir_ / "out").string();
        return o;
    }

    fs::path dir_;
    std::ostringstream log_;
    std::ostringstream err_;
};

TEST_F(CliTest, ExperimentRoundTrip) {
    json j = small_kdv();
    j["ensemble"] = {{"hidden_layers", {2, 3}}, {"width", {6}}, {"lambda", {0.1, 1.0}}};
    j["verify"] = {{"nx", 33}};
    const auto f = dpinn::io::parse_experiment(j);
    const json full = dpinn::io::to_json(f);
    const auto g = dpinn::io::parse_experiment(full);
    EXPECT_EQ(dpinn::io::to_json(g), full);
    EXPECT_EQ(g.grid.hidden_layers, (std::vector<int>{2, 3}));
    EXPECT_EQ(g.verify.nx, 33);
    EXPECT_EQ(g.config.seed_base, 3u);
}

TEST_F(CliTest, ManifestRoundTrip) {
    dpinn::io::RunManifest m;
    m.experiment = "x";
    m.command = "train";
    m.config = small_kdv();
    m.seeds = {0, 7, 18446744073709551615ull};
    m.wall_seconds = 1.0 / 3.0;
    m.seconds_per_iteration = 1e-7;
    m.outputs = {{"checkpoint", "a/b.txt"}};
    m.results = {{"E_G", 0.1 + 0.2}};
    const std::string path = (dir_ / "m.json").string();
    dpinn::io::write_json(path, dpinn::io::to_json(m));
    EXPECT_EQ(dpinn::io::manifest_from_json(dpinn::io::read_json(path)), m);
}

TEST_F(CliTest, RejectsBadConfigs) {
    json j = small_kdv();
    j["network"]["depth"] = 3;
    EXPECT_THROW(dpinn::io::parse_experiment(j), std::invalid_argument);
    j = small_kdv();
    j["extra"] = 1;
    EXPECT_THROW(dpinn::io::parse_experiment(j), std::invalid_argument);
    j = small_kdv();
    j["loss"]["lambda"] = "big";
    EXPECT_THROW(dpinn::io::parse_experiment(j), std::invalid_argument);
    j = small_kdv();
    j["loss"]["lambda"] = -1.0;
    EXPECT_THROW(dpinn::io::parse_experiment(j), std::invalid_argument);
    j = small_kdv();
    j["equation"]["kind"] = "heat";
    EXPECT_THROW(dpinn::io::parse_experiment(j), std::invalid_argument);
    j = small_kdv();
    j["reference"] = "kdv_param";
    EXPECT_THROW(dpinn::io::parse_experiment(j), std::invalid_argument);

    auto o = options(write_config(j));
    EXPECT_NE(dpinn::cli::cmd_train(o, log_, err_), 0);
    EXPECT_NE(err_.str().find("config.json"), std::string::npos);
}

TEST_F(CliTest, MissingConfigNamesPath) {
    const std::string path = (dir_ / "nowhere.json").string();
    EXPECT_NE(dpinn::cli::cmd_train(options(path), log_, err_), 0);
    EXPECT_NE(err_.str().find(path), std::string::npos);
}

TEST_F(CliTest, BundledConfigsValidate) {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".json") {
            continue;
        }
        ++count;
        const auto f = dpinn::io::load_experiment(entry.path().string());
        EXPECT_EQ(f.config.name, entry.path().stem().string());
        EXPECT_FALSE(dpinn::expand_grid(f.config, f.grid).empty());
    }
    EXPECT_EQ(count, 8);
}

TEST_F(CliTest, BundledKdvTrainEmitsAllFiles) {
    auto o = options((kConfigs / "kdv_single.json").string());
    o.max_iters = 3;
    ASSERT_EQ(dpinn::cli::cmd_train(o, log_, err_), 0) << err_.str();
    const fs::path out = dir_ / "out" / "kdv_single";
    for (const char* f : {"checkpoint.txt", "loss_history.csv", "solution.csv", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    std::vector<std::string> header;
    const auto sol = read_csv(out / "solution.csv", &header);
    EXPECT_EQ(header, (std::vector<std::string>{"x", "t", "u_pinn", "u_exact"}));
    EXPECT_EQ(sol.size(), 201u * 11u);
    const auto m = dpinn::io::manifest_from_json(dpinn::io::read_json((out / "manifest.json").string()));
    EXPECT_EQ(m.experiment, "kdv_single");
    EXPECT_EQ(m.config["training"]["max_iters"], 3);
    EXPECT_EQ(read_csv(out / "loss_history.csv").size(), m.results["iterations"].get<std::size_t>());

    // The checkpoint reproduces the recorded solution samples exactly.
    const auto params = dpinn::load_checkpoint((out / "checkpoint.txt").string());
    dpinn::Matrix pts(2, static_cast<Eigen::Index>(sol.size()));
    for (std::size_t k = 0; k < sol.size(); ++k) {
        pts(0, static_cast<Eigen::Index>(k)) = sol[k][1];
        pts(1, static_cast<Eigen::Index>(k)) = sol[k][0];
    }
    const dpinn::Array u = dpinn::evaluate(params, pts);
    for (std::size_t k = 0; k < sol.size(); ++k) {
        ASSERT_EQ(u(static_cast<Eigen::Index>(k)), sol[k][2]);
    }
}

TEST_F(CliTest, ZeroIterationsGivesInitialCheckpoint) {
    auto o = options(write_config(small_kdv()));
    o.max_iters = 0;
    o.seed = 11;
    ASSERT_EQ(dpinn::cli::cmd_train(o, log_, err_), 0) << err_.str();
    const auto f = dpinn::io::parse_experiment(small_kdv());
    const auto saved = dpinn::load_checkpoint((dir_ / "out" / "tiny" / "checkpoint.txt").string());
    EXPECT_TRUE(saved == dpinn::initial_params(f.config, 11));
}

TEST_F(CliTest, RerunIsIdentical) {
    const auto o = options(write_config(small_kdv()));
    ASSERT_EQ(dpinn::cli::cmd_train(o, log_, err_), 0);
    const fs::path out = dir_ / "out" / "tiny";
    const std::string ckpt = slurp(out / "checkpoint.txt");
    const std::string sol = slurp(out / "solution.csv");
    ASSERT_EQ(dpinn::cli::cmd_train(o, log_, err_), 0);
    EXPECT_EQ(slurp(out / "checkpoint.txt"), ckpt);
    EXPECT_EQ(slurp(out / "solution.csv"), sol);
}

TEST_F(CliTest, EnsembleTable) {
    json j = small_kdv();
    j["training"]["retrains"] = 2;
    j["ensemble"] = {{"width", {4, 6}}, {"lambda", {0.1, 1.0, 10.0}}};
    ASSERT_EQ(dpinn::cli::cmd_ensemble(options(write_config(j)), log_, err_), 0) << err_.str();
    const fs::path out = dir_ / "out" / "tiny";
    std::vector<std::string> header;
    std::ifstream in(out / "ensemble.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "config-id,seed,iters,wall-time-s,E_T,E_G,E_G_rel");
    std::vector<std::string> ids;
    std::vector<double> et;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        ASSERT_EQ(cells.size(), 7u);
        ids.push_back(cells[0]);
        et.push_back(std::stod(cells[4]));
    }
    EXPECT_EQ(et.size(), 2u * 3u * 2u);
    const auto m = dpinn::io::read_json((out / "manifest.json").string());
    const double best = m["results"]["best"]["E_T"].get<double>();
    double lo = et.front();
    for (double e : et) {
        lo = std::min(lo, e);
    }
    EXPECT_EQ(best, lo);
    EXPECT_TRUE(fs::exists(out / "best_checkpoint.txt"));
}

TEST_F(CliTest, SingleConfigEnsembleMatchesTrain) {
    const auto o = options(write_config(small_kdv()));
    ASSERT_EQ(dpinn::cli::cmd_train(o, log_, err_), 0);
    const std::string trained = slurp(dir_ / "out" / "tiny" / "checkpoint.txt");
    ASSERT_EQ(dpinn::cli::cmd_ensemble(o, log_, err_), 0) << err_.str();
    EXPECT_EQ(slurp(dir_ / "out" / "tiny" / "best_checkpoint.txt"), trained);
}

TEST_F(CliTest, ZeroNetworkOnZeroDataHasZeroBound) {
    json j = small_kdv();
    j["reference"] = "zero";
    j["verify"] = {{"nx", 33}, {"nt", 17}, {"sup_nx", 33}, {"sup_nt", 17}};
    auto o = options(write_config(j));
    auto params = dpinn::initial_params(dpinn::io::parse_experiment(j).config, 0);
    params.theta().setZero();
    o.checkpoint = (dir_ / "zero.txt").string();
    dpinn::save_checkpoint(o.checkpoint, params);
    ASSERT_EQ(dpinn::cli::cmd_verify_bound(o, log_, err_), 0) << err_.str();
    const auto r = dpinn::io::read_json((dir_ / "out" / "tiny" / "bound_report.json").string());
    EXPECT_EQ(r["status"], "ok");
    EXPECT_EQ(r["E_G"].get<double>(), 0.0);
    EXPECT_EQ(r["bound_rhs"].get<double>(), 0.0);
    for (const char* k : {"temporal", "spatial", "interior"}) {
        EXPECT_EQ(r["residual_integrals"][k].get<double>(), 0.0) << k;
    }
    EXPECT_TRUE(r["satisfied"].get<bool>());
}

TEST_F(CliTest, ParametricBoundNotCovered) {
    auto o = options(write_config(small_uq()));
    o.checkpoint = (dir_ / "uq.txt").string();
    dpinn::save_checkpoint(o.checkpoint, dpinn::initial_params(dpinn::io::parse_experiment(small_uq()).config, 0));
    ASSERT_EQ(dpinn::cli::cmd_verify_bound(o, log_, err_), 0) << err_.str();
    const auto r = dpinn::io::read_json((dir_ / "out" / "tiny_uq" / "bound_report.json").string());
    EXPECT_EQ(r["status"], "not covered");
}

TEST_F(CliTest, UqExactAgainstExact) {
    const auto f = dpinn::io::parse_experiment(small_uq());
    const auto ref = f.config.resolve().data;
    const dpinn::FieldFn exact = [&](const dpinn::Matrix& in) { return ref.evaluate(in); };
    const auto t = dpinn::cli::uq_table(exact, exact, f.config.domain, f.uq);
    EXPECT_LE((t.model.mean - t.exact.mean).abs().maxCoeff(), 1e-12);
    EXPECT_LE((t.model.std - t.exact.std).abs().maxCoeff(), 1e-12);
    EXPECT_GT(t.exact.std.maxCoeff(), 0.0);
    EXPECT_LE(t.mean_sup_rel, 1e-12);
}

TEST_F(CliTest, UqZeroWidthBox) {
    json j = small_uq();
    j["domain"]["param_lo"] = {9.0, 0.0, 1.0, 1.0};
    j["domain"]["param_hi"] = {9.0, 0.0, 1.0, 1.0};
    auto o = options(write_config(j));
    o.checkpoint = (dir_ / "uq.txt").string();
    dpinn::save_checkpoint(o.checkpoint, dpinn::initial_params(dpinn::io::parse_experiment(j).config, 2));
    ASSERT_EQ(dpinn::cli::cmd_uq(o, log_, err_), 0) << err_.str();
    std::vector<std::string> header;
    const auto rows = read_csv(dir_ / "out" / "tiny_uq" / "uq.csv", &header);
    EXPECT_EQ(header, (std::vector<std::string>{"x", "t", "mean_pinn", "std_pinn", "mean_exact", "std_exact"}));
    EXPECT_EQ(rows.size(), 11u * 3u);
    for (const auto& r : rows) {
        EXPECT_EQ(r[3], 0.0);
        EXPECT_EQ(r[5], 0.0);
    }
    EXPECT_TRUE(fs::exists(dir_ / "out" / "tiny_uq" / "uq_summary.json"));
}

TEST_F(CliTest, UqRejectsWrongInputDimension) {
    auto o = options(write_config(small_kdv()));
    o.checkpoint = (dir_ / "k.txt").string();
    dpinn::save_checkpoint(o.checkpoint, dpinn::initial_params(dpinn::io::parse_experiment(small_kdv()).config, 0));
    EXPECT_NE(dpinn::cli::cmd_uq(o, log_, err_), 0);

    // A two-input checkpoint against the six-input experiment.
    auto p = options(write_config(small_uq(), "uq.json"));
    p.checkpoint = o.checkpoint;
    err_.str("");
    EXPECT_NE(dpinn::cli::cmd_uq(p, log_, err_), 0);
    EXPECT_NE(err_.str().find("inputs"), std::string::npos);
}

TEST_F(CliTest, DefaultOutDirFromEnvironment) {
    ::setenv("DPINN_OUT_DIR", (dir_ / "env").c_str(), 1);
    EXPECT_EQ(dpinn::cli::default_out_dir(), (dir_ / "env").string());
    auto o = options(write_config(small_kdv()));
    o.out_dir.clear();
    o.max_iters = 0;
    ASSERT_EQ(dpinn::cli::cmd_train(o, log_, err_), 0);
    EXPECT_TRUE(fs::exists(dir_ / "env" / "tiny" / "manifest.json"));
    ::unsetenv("DPINN_OUT_DIR");
    EXPECT_EQ(dpinn::cli::default_out_dir(), "dpinn-out");
}

}  // namespace
