#include "experiment_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace dpinn::io {

namespace {

template <class T>
T get(const json& j, const char* key, const T& fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
    }
}

const json& section(const json& j, const char* key) {
    static const json empty = json::object();
    if (!j.contains(key)) {
        return empty;
    }
    if (!j.at(key).is_object()) {
        throw std::invalid_argument(std::string("'") + key + "' must be an object");
    }
    return j.at(key);
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw std::invalid_argument("unknown key '" + key + "' in " + where);
        }
    }
}

HilbertTransform::Kind hilbert_from_string(const std::string& s) {
    if (s == "periodic") {
        return HilbertTransform::Kind::periodic;
    }
    if (s == "line") {
        return HilbertTransform::Kind::line;
    }
    throw std::invalid_argument("hilbert must be 'periodic' or 'line', got '" + s + "'");
}

}  // namespace

ExperimentFile parse_experiment(const json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("experiment file must hold a JSON object");
    }
    check_keys(j, {"name", "equation", "reference", "domain", "points", "network", "loss", "training", "grid",
                   "ensemble", "verify", "uq"},
               "experiment");
    ExperimentFile f;
    ExperimentConfig& c = f.config;
    c.name = get<std::string>(j, "name", c.name);
    c.reference = get<std::string>(j, "reference", c.reference);

    const json& eq = section(j, "equation");
    check_keys(eq, {"kind", "alpha", "beta", "drift", "kappa", "hilbert"}, "equation");
    c.equation.kind = equation_kind_from_string(get<std::string>(eq, "kind", "kdv_kawahara"));
    c.equation.alpha = get<double>(eq, "alpha", c.equation.alpha);
    c.equation.beta = get<double>(eq, "beta", c.equation.beta);
    c.equation.drift = get<bool>(eq, "drift", c.equation.drift);
    c.equation.kappa = get<double>(eq, "kappa", c.equation.kappa);
    c.equation.hilbert = hilbert_from_string(get<std::string>(eq, "hilbert", "periodic"));

    const json& d = section(j, "domain");
    check_keys(d, {"x_left", "x_right", "T", "param_lo", "param_hi"}, "domain");
    c.domain.x_left = get<double>(d, "x_left", c.domain.x_left);
    c.domain.x_right = get<double>(d, "x_right", c.domain.x_right);
    c.domain.T = get<double>(d, "T", c.domain.T);
    c.domain.param_lo = get<std::vector<double>>(d, "param_lo", {});
    c.domain.param_hi = get<std::vector<double>>(d, "param_hi", {});

    const json& p = section(j, "points");
    check_keys(p, {"interior", "spatial", "temporal"}, "points");
    c.n_int = get<int>(p, "interior", c.n_int);
    c.n_sb = get<int>(p, "spatial", c.n_sb);
    c.n_tb = get<int>(p, "temporal", c.n_tb);

    const json& n = section(j, "network");
    check_keys(n, {"hidden_layers", "width"}, "network");
    c.hidden_layers = get<int>(n, "hidden_layers", c.hidden_layers);
    c.width = get<int>(n, "width", c.width);

    const json& l = section(j, "loss");
    check_keys(l, {"lambda", "lambda_reg", "q"}, "loss");
    c.lambda = get<double>(l, "lambda", c.lambda);
    c.lambda_reg = get<double>(l, "lambda_reg", c.lambda_reg);
    c.q = get<int>(l, "q", c.q);

    const json& t = section(j, "training");
    check_keys(t, {"retrains", "seed_base", "max_iters", "chunk"}, "training");
    c.retrains = get<int>(t, "retrains", c.retrains);
    c.seed_base = get<std::uint64_t>(t, "seed_base", c.seed_base);
    c.max_iters = get<int>(t, "max_iters", c.max_iters);
    c.chunk = get<int>(t, "chunk", c.chunk);

    const json& g = section(j, "grid");
    check_keys(g, {"half_nodes", "ratio"}, "grid");
    c.half_nodes = get<int>(g, "half_nodes", c.half_nodes);
    c.grid_ratio = get<double>(g, "ratio", c.grid_ratio);

    const json& e = section(j, "ensemble");
    check_keys(e, {"hidden_layers", "width", "lambda", "lambda_reg"}, "ensemble");
    f.grid.hidden_layers = get<std::vector<int>>(e, "hidden_layers", {});
    f.grid.widths = get<std::vector<int>>(e, "width", {});
    f.grid.lambdas = get<std::vector<double>>(e, "lambda", {});
    f.grid.lambda_regs = get<std::vector<double>>(e, "lambda_reg", {});

    const json& v = section(j, "verify");
    check_keys(v, {"nx", "nt", "bo_half_nodes", "bo_slices", "sup_nx", "sup_nt"}, "verify");
    f.verify.nx = get<int>(v, "nx", f.verify.nx);
    f.verify.nt = get<int>(v, "nt", f.verify.nt);
    f.verify.bo_half_nodes = get<int>(v, "bo_half_nodes", f.verify.bo_half_nodes);
    f.verify.bo_slices = get<int>(v, "bo_slices", f.verify.bo_slices);
    f.verify.sup_nx = get<int>(v, "sup_nx", f.verify.sup_nx);
    f.verify.sup_nt = get<int>(v, "sup_nt", f.verify.sup_nt);

    const json& u = section(j, "uq");
    check_keys(u, {"samples", "nx", "nt"}, "uq");
    f.uq.samples = get<int>(u, "samples", f.uq.samples);
    f.uq.nx = get<int>(u, "nx", f.uq.nx);
    f.uq.nt = get<int>(u, "nt", f.uq.nt);

    c.validate();
    return f;
}

ExperimentFile load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read config file '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return parse_experiment(j);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("config file '" + path + "': " + e.what());
    }
}

json to_json(const ExperimentFile& f) {
    const ExperimentConfig& c = f.config;
    json j;
    j["name"] = c.name;
    j["reference"] = c.reference;
    j["equation"] = {{"kind", to_string(c.equation.kind)},
                     {"alpha", c.equation.alpha},
                     {"beta", c.equation.beta},
                     {"drift", c.equation.drift},
                     {"kappa", c.equation.kappa},
                     {"hilbert", c.equation.hilbert == HilbertTransform::Kind::line ? "line" : "periodic"}};
    j["domain"] = {{"x_left", c.domain.x_left},
                   {"x_right", c.domain.x_right},
                   {"T", c.domain.T},
                   {"param_lo", c.domain.param_lo},
                   {"param_hi", c.domain.param_hi}};
    j["points"] = {{"interior", c.n_int}, {"spatial", c.n_sb}, {"temporal", c.n_tb}};
    j["network"] = {{"hidden_layers", c.hidden_layers}, {"width", c.width}};
    j["loss"] = {{"lambda", c.lambda}, {"lambda_reg", c.lambda_reg}, {"q", c.q}};
    j["training"] = {{"retrains", c.retrains}, {"seed_base", c.seed_base}, {"max_iters", c.max_iters}, {"chunk", c.chunk}};
    j["grid"] = {{"half_nodes", c.half_nodes}, {"ratio", c.grid_ratio}};
    j["ensemble"] = {{"hidden_layers", f.grid.hidden_layers},
                     {"width", f.grid.widths},
                     {"lambda", f.grid.lambdas},
                     {"lambda_reg", f.grid.lambda_regs}};
    j["verify"] = {{"nx", f.verify.nx},
                   {"nt", f.verify.nt},
                   {"bo_half_nodes", f.verify.bo_half_nodes},
                   {"bo_slices", f.verify.bo_slices},
                   {"sup_nx", f.verify.sup_nx},
                   {"sup_nt", f.verify.sup_nt}};
    j["uq"] = {{"samples", f.uq.samples}, {"nx", f.uq.nx}, {"nt", f.uq.nt}};
    return j;
}

json to_json(const RunManifest& m) {
    return {{"experiment", m.experiment},
            {"command", m.command},
            {"config", m.config},
            {"seeds", m.seeds},
            {"timings", {{"wall_seconds", m.wall_seconds}, {"seconds_per_iteration", m.seconds_per_iteration}}},
            {"outputs", m.outputs},
            {"results", m.results},
            {"version", m.version}};
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.experiment = j.at("experiment").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.wall_seconds = j.at("timings").at("wall_seconds").get<double>();
    m.seconds_per_iteration = j.at("timings").at("seconds_per_iteration").get<double>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.results = j.at("results");
    m.version = j.at("version").get<std::string>();
    return m;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read '" + path + "'");
    }
    return json::parse(in);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << '\n';
    }
}

}  // namespace dpinn::io
