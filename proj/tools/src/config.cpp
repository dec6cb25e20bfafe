#include "config.hpp"

#include <algorithm>
#include <initializer_list>
#include <string_view>

#include <json.hpp>

#include "sarcf/io.hpp"

namespace sarcf::cli {

namespace {

using nlohmann::json;

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
    const std::size_t end = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n'));
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError("config: " + path + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("config: unknown key '" + key + "' in " + path);
    }
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("config: " + path + "." + key + ": expected a number");
    return v.get<double>();
}

long get_integer(const json& obj, const std::string& path, const char* key, long fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError("config: " + path + "." + key + ": expected an integer");
    return v.get<long>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError("config: " + path + "." + key + ": expected a boolean");
    return v.get<bool>();
}

AssignmentSpec parse_assignment(const json& obj, const std::string& path,
                                const AssignmentSpec& fallback) {
    check_keys(obj, path, {"mode", "p", "kappa"});
    AssignmentSpec spec = fallback;
    if (obj.contains("mode")) {
        const json& v = obj.at("mode");
        if (!v.is_string()) throw ConfigError("config: " + path + ".mode: expected a string");
        const auto mode = v.get<std::string>();
        if (mode == "exogenous") spec.mode = AssignmentMode::kExogenous;
        else if (mode == "confounded") spec.mode = AssignmentMode::kConfounded;
        else throw ConfigError("config: " + path + ".mode: expected 'exogenous' or 'confounded'");
    }
    spec.p = get_number(obj, path, "p", spec.p);
    spec.kappa = get_number(obj, path, "kappa", spec.kappa);
    return spec;
}

} // namespace

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.experiment = default_config();
    return cfg;
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config:" + std::to_string(line_of_byte(text, e.byte)) +
                          ": " + e.what());
    }

    check_keys(doc, "top level",
               {"schema", "seed", "n_units", "n_reps", "coord_dim", "econ_dim", "network",
                "params", "assignment", "assignment_alt", "estimators"});
    if (!doc.contains("schema")) throw ConfigError("config: missing required key 'schema'");
    if (!doc.at("schema").is_number_integer() || doc.at("schema").get<long>() != 1)
        throw ConfigError("config: schema: only version 1 is supported");

    RunConfig cfg = default_run_config();
    ExperimentConfig& exp = cfg.experiment;

    if (doc.contains("seed")) {
        const json& v = doc.at("seed");
        if (!v.is_number_unsigned() && !v.is_number_integer())
            throw ConfigError("config: seed: expected an unsigned integer");
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
            throw ConfigError("config: seed: expected an unsigned integer");
        exp.seed = v.get<std::uint64_t>();
    }
    exp.n_units = get_integer(doc, "top level", "n_units", exp.n_units);
    exp.n_reps = static_cast<int>(get_integer(doc, "top level", "n_reps", exp.n_reps));
    exp.coord_dim = get_integer(doc, "top level", "coord_dim", exp.coord_dim);
    exp.econ_dim = get_integer(doc, "top level", "econ_dim", exp.econ_dim);

    if (doc.contains("network")) {
        const json& net = doc.at("network");
        check_keys(net, "network", {"k", "decay", "econ_weight", "row_normalize"});
        exp.network.k = static_cast<int>(get_integer(net, "network", "k", exp.network.k));
        exp.network.decay = get_number(net, "network", "decay", exp.network.decay);
        exp.network.econ_weight = get_number(net, "network", "econ_weight", exp.network.econ_weight);
        exp.network.row_normalize = get_bool(net, "network", "row_normalize", exp.network.row_normalize);
    }

    bool gamma_given = false;
    if (doc.contains("params")) {
        const json& par = doc.at("params");
        check_keys(par, "params", {"beta", "rho", "gamma", "sigma"});
        exp.params.beta = get_number(par, "params", "beta", exp.params.beta);
        exp.params.rho = get_number(par, "params", "rho", exp.params.rho);
        exp.params.sigma = get_number(par, "params", "sigma", exp.params.sigma);
        if (par.contains("gamma")) {
            const json& g = par.at("gamma");
            if (!g.is_array()) throw ConfigError("config: params.gamma: expected an array of numbers");
            exp.params.gamma.resize(static_cast<Eigen::Index>(g.size()));
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (!g[i].is_number())
                    throw ConfigError("config: params.gamma: expected an array of numbers");
                exp.params.gamma(static_cast<Eigen::Index>(i)) = g[i].get<double>();
            }
            gamma_given = true;
        }
    }
    // gamma defaults to 0.5 per econ column; an explicit gamma must match
    // econ_dim (validated by the experiment config).
    if (!gamma_given) exp.params.gamma = Eigen::VectorXd::Constant(exp.econ_dim, 0.5);

    if (doc.contains("assignment"))
        exp.assignment = parse_assignment(doc.at("assignment"), "assignment", exp.assignment);
    if (doc.contains("assignment_alt")) {
        AssignmentSpec fallback = exp.assignment;
        fallback.mode = exp.assignment.mode == AssignmentMode::kExogenous
                            ? AssignmentMode::kConfounded
                            : AssignmentMode::kExogenous;
        cfg.assignment_alt = parse_assignment(doc.at("assignment_alt"), "assignment_alt", fallback);
        if (cfg.assignment_alt->mode == exp.assignment.mode)
            throw ConfigError("config: assignment_alt.mode must differ from assignment.mode");
    }

    if (doc.contains("estimators")) {
        const json& ests = doc.at("estimators");
        if (!ests.is_array() || ests.empty())
            throw ConfigError("config: estimators: expected a non-empty array");
        exp.estimators.clear();
        for (const auto& e : ests) {
            if (!e.is_string()) throw ConfigError("config: estimators: expected strings");
            const auto name = e.get<std::string>();
            if (name == "sar_ml") exp.estimators.push_back(Estimator::kSarMl);
            else if (name == "ols") exp.estimators.push_back(Estimator::kOls);
            else throw ConfigError("config: estimators: unknown estimator '" + name + "'");
        }
    }

    try {
        exp.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_config(text);
}

} // namespace sarcf::cli
