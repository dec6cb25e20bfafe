#include "sarcf/mcharness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <Eigen/LU>

#include "sarcf/rng.hpp"

namespace sarcf {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Design {
    UnitCharacteristics chars;
    InteractionMatrix w;
};

// Characteristics and network are drawn once per experiment and held
// fixed across replications.
Design build_design(const ExperimentConfig& cfg) {
    Design d;
    d.chars = draw_characteristics(cfg.n_units, cfg.coord_dim, cfg.econ_dim, cfg.seed);
    d.w = build_weights(d.chars, cfg.network);
    return d;
}

double sample_sd(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace

std::string estimator_name(Estimator e) {
    switch (e) {
        case Estimator::kSarMl: return "sar_ml";
        case Estimator::kOls: return "ols";
    }
    throw ParamError("estimator_name: unknown estimator");
}

void ExperimentConfig::validate() const {
    if (n_units < 2) throw ParamError("experiment: n_units must be >= 2");
    if (n_reps < 1) throw ParamError("experiment: n_reps must be >= 1");
    if (coord_dim < 1) throw ParamError("experiment: coord_dim must be >= 1");
    if (econ_dim < 0) throw ParamError("experiment: econ_dim must be >= 0");
    network.validate(n_units);
    params.validate();
    if (params.gamma.size() != econ_dim)
        throw ParamError("experiment: gamma length must equal econ_dim");
    assignment.validate();
    if (estimators.empty()) throw ParamError("experiment: at least one estimator required");
    for (std::size_t i = 0; i < estimators.size(); ++i)
        for (std::size_t j = i + 1; j < estimators.size(); ++j)
            if (estimators[i] == estimators[j])
                throw ParamError("experiment: duplicate estimator " + estimator_name(estimators[i]));
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.params.gamma = Eigen::VectorXd::Constant(1, 0.5);
    return cfg;
}

SummaryRow summarize(std::string name, const std::vector<double>& draws, double truth) {
    if (draws.empty()) throw InputError("summarize: empty draw vector");
    const double n = static_cast<double>(draws.size());
    SummaryRow row;
    row.name = std::move(name);
    row.truth = truth;
    row.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
    row.bias = row.mean - truth;
    row.sd = sample_sd(draws, row.mean);
    double mse = 0.0;
    for (double x : draws) mse += (x - truth) * (x - truth);
    row.rmse = std::sqrt(mse / n);
    row.n_effective = static_cast<int>(draws.size());
    return row;
}

std::optional<double> bias_amplification_ratio(double bias_nc, double bias_beta) {
    if (bias_beta == 0.0) return std::nullopt;
    return bias_nc / bias_beta;
}

std::optional<double> bias_amplification_ratio(const MonteCarloSummary& summary) {
    const SummaryRow* beta = nullptr;
    const SummaryRow* nc = nullptr;
    for (const auto& row : summary.rows) {
        if (row.name == "sar_ml.beta_hat") beta = &row;
        if (row.name == "sar_ml.nc_hat_mean") nc = &row;
    }
    if (beta == nullptr || nc == nullptr) return std::nullopt;
    return bias_amplification_ratio(nc->bias, beta->bias);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
    cfg.validate();
    if (jobs < 1) throw ParamError("run_experiment: jobs must be >= 1");

    const Design design = build_design(cfg);
    const CounterfactualReport truth = report(design.w, cfg.params);
    const LogDetSpectrum spectrum(design.w.w);

    const int n_est = static_cast<int>(cfg.estimators.size());
    std::vector<RepDraw> draws(static_cast<std::size_t>(cfg.n_reps) * n_est);

    const auto run_rep = [&](int rep) {
        const std::uint64_t seed_r = rng::rep_seed(cfg.seed, static_cast<std::uint64_t>(rep));
        RepDraw* slot = draws.data() + static_cast<std::size_t>(rep) * n_est;
        for (int e = 0; e < n_est; ++e) {
            slot[e].rep = rep;
            slot[e].estimator = cfg.estimators[static_cast<std::size_t>(e)];
            slot[e].beta_hat = kNan;
            slot[e].rho_hat = kNan;
            slot[e].nc_hat_mean = kNan;
            slot[e].flagged = true;
        }
        Population pop;
        try {
            pop = generate_population(design.chars, design.w, cfg.params, cfg.assignment, seed_r);
        } catch (const std::exception&) {
            return; // whole replication flagged
        }
        for (int e = 0; e < n_est; ++e) {
            try {
                const EstimationResult est =
                    cfg.estimators[static_cast<std::size_t>(e)] == Estimator::kSarMl
                        ? fit_sar_ml(pop.y, pop.d, pop.chars.econ, design.w, spectrum)
                        : fit_ols(pop.y, pop.d, pop.chars.econ);
                slot[e].beta_hat = est.beta_hat;
                slot[e].rho_hat = est.rho_hat;
                if (est.converged) {
                    slot[e].nc_hat_mean = implied_effects(est, design.w).nc_hat_mean;
                    slot[e].flagged = false;
                }
            } catch (const std::exception&) {
                // flagged slot already records the failure
            }
        }
    };

    const int workers = std::min(jobs, cfg.n_reps);
    if (workers <= 1) {
        for (int rep = 0; rep < cfg.n_reps; ++rep) run_rep(rep);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (int rep = t; rep < cfg.n_reps; rep += workers) run_rep(rep);
            });
        for (auto& th : pool) th.join();
    }

    ExperimentResult result;
    result.truth_pe = truth.pe;
    result.truth_nc_mean = truth.nc_mean;
    result.draws = std::move(draws);

    for (int e = 0; e < n_est; ++e) {
        const std::string name = estimator_name(cfg.estimators[static_cast<std::size_t>(e)]);
        std::vector<double> beta_draws, rho_draws, nc_draws;
        for (int rep = 0; rep < cfg.n_reps; ++rep) {
            const RepDraw& d = result.draws[static_cast<std::size_t>(rep) * n_est + e];
            if (d.flagged) continue;
            beta_draws.push_back(d.beta_hat);
            rho_draws.push_back(d.rho_hat);
            nc_draws.push_back(d.nc_hat_mean);
        }
        if (beta_draws.empty())
            throw ExperimentError("run_experiment: every replication flagged for estimator " + name);
        result.summary.rows.push_back(summarize(name + ".beta_hat", beta_draws, cfg.params.beta));
        result.summary.rows.push_back(summarize(name + ".rho_hat", rho_draws, cfg.params.rho));
        result.summary.rows.push_back(summarize(name + ".nc_hat_mean", nc_draws, truth.nc_mean));
    }

    const SummaryRow* beta_row = nullptr;
    const SummaryRow* nc_row = nullptr;
    for (const auto& row : result.summary.rows) {
        if (row.name == "sar_ml.beta_hat") beta_row = &row;
        if (row.name == "sar_ml.nc_hat_mean") nc_row = &row;
    }
    if (beta_row != nullptr && nc_row != nullptr) {
        result.summary.bias_beta = beta_row->bias;
        result.summary.bias_nc = nc_row->bias;
        result.summary.bias_amp_ratio = bias_amplification_ratio(nc_row->bias, beta_row->bias);
    }
    return result;
}

Prop1Report prop1_check(const ExperimentConfig& cfg) {
    cfg.validate();
    const Design design = build_design(cfg);
    const Eigen::Index n = cfg.n_units;
    const Eigen::MatrixXd& x = design.chars.econ;

    Eigen::VectorXd xg = Eigen::VectorXd::Zero(n);
    if (cfg.econ_dim > 0) xg = x * cfg.params.gamma;

    // Baseline outcomes Y0 share one factorization across replications;
    // the interaction term is then frozen at rho * (W Y0) while D varies.
    const Eigen::MatrixXd a =
        Eigen::MatrixXd::Identity(n, n) - cfg.params.rho * design.w.w;
    const double margin = stability_margin(design.w, cfg.params.rho);
    if (!(margin > 0.01))
        throw ModelError("prop1_check: stability margin " + std::to_string(margin) +
                         " is not above 0.01");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);

    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(cfg.n_reps));
    for (int rep = 0; rep < cfg.n_reps; ++rep) {
        const std::uint64_t seed_r = rng::rep_seed(cfg.seed, static_cast<std::uint64_t>(rep));
        const Eigen::VectorXd eps = draw_shocks(n, cfg.params.sigma, seed_r);
        const Eigen::VectorXd y0 = lu.solve(xg + eps);
        const Eigen::VectorXd frozen = cfg.params.rho * (design.w.w * y0);
        const Eigen::VectorXi d = cfg.assignment.mode == AssignmentMode::kExogenous
                                      ? assign_exogenous(n, cfg.assignment.p, seed_r)
                                      : assign_confounded(eps, cfg.assignment.p,
                                                          cfg.assignment.kappa, seed_r);
        double sum1 = 0.0, sum0 = 0.0;
        int n1 = 0, n0 = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double y = cfg.params.beta * d(i) + frozen(i) + xg(i) + eps(i);
            if (d(i) == 1) { sum1 += y; ++n1; } else { sum0 += y; ++n0; }
        }
        if (n1 == 0 || n0 == 0) continue;
        diffs.push_back(sum1 / n1 - sum0 / n0);
    }

    Prop1Report rep;
    rep.target = cfg.params.beta;
    rep.n_reps_used = static_cast<int>(diffs.size());
    if (diffs.empty()) return rep;
    rep.estimate = std::accumulate(diffs.begin(), diffs.end(), 0.0) /
                   static_cast<double>(diffs.size());
    rep.se = sample_sd(diffs, rep.estimate) / std::sqrt(static_cast<double>(diffs.size()));
    rep.pass = rep.se > 0.0 ? std::abs(rep.estimate - rep.target) < 3.0 * rep.se
                            : rep.estimate == rep.target;
    return rep;
}

Prop2Report prop2_check(const ExperimentConfig& cfg) {
    cfg.validate();
    const Design design = build_design(cfg);
    const Eigen::Index n = cfg.n_units;
    const Eigen::MatrixXd& x = design.chars.econ;

    // Sample three connected ordered pairs plus, when one exists, a
    // disconnected control pair.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (Eigen::Index from = 0; from < n; ++from)
        for (Eigen::Index to = 0; to < n; ++to)
            if (to != from && design.w.w(to, from) > 0.0) edges.emplace_back(from, to);
    auto gen = rng::engine(cfg.seed, rng::Stream::kPairs);
    std::shuffle(edges.begin(), edges.end(), gen);
    if (edges.size() > 3) edges.resize(3);
    for (int attempt = 0; attempt < 100; ++attempt) {
        const auto from = static_cast<Eigen::Index>(gen() % static_cast<std::uint64_t>(n));
        const auto to = static_cast<Eigen::Index>(gen() % static_cast<std::uint64_t>(n));
        if (from == to || design.w.w(to, from) != 0.0) continue;
        edges.emplace_back(from, to);
        break;
    }

    Prop2Report rep;
    rep.pass = true;
    if (edges.empty()) return rep;

    std::vector<std::vector<double>> treated(edges.size()), control(edges.size());
    for (int r = 0; r < cfg.n_reps; ++r) {
        const std::uint64_t seed_r = rng::rep_seed(cfg.seed, static_cast<std::uint64_t>(r));
        const Eigen::VectorXd eps = draw_shocks(n, cfg.params.sigma, seed_r);
        const Eigen::VectorXi d = cfg.assignment.mode == AssignmentMode::kExogenous
                                      ? assign_exogenous(n, cfg.assignment.p, seed_r)
                                      : assign_confounded(eps, cfg.assignment.p,
                                                          cfg.assignment.kappa, seed_r);
        const Eigen::VectorXd y = li_outcomes(design.w, cfg.params, d, x, eps);
        for (std::size_t pr = 0; pr < edges.size(); ++pr) {
            const auto [from, to] = edges[pr];
            (d(from) == 1 ? treated[pr] : control[pr]).push_back(y(to));
        }
    }

    for (std::size_t pr = 0; pr < edges.size(); ++pr) {
        Prop2PairReport pair;
        pair.from = edges[pr].first;
        pair.to = edges[pr].second;
        pair.weight = design.w.w(pair.to, pair.from);
        pair.target = cfg.params.beta * cfg.params.rho * pair.weight;
        if (treated[pr].empty() || control[pr].empty()) {
            pair.estimate = kNan;
            pair.se = kNan;
            pair.pass = false;
        } else {
            const double m1 = std::accumulate(treated[pr].begin(), treated[pr].end(), 0.0) /
                              static_cast<double>(treated[pr].size());
            const double m0 = std::accumulate(control[pr].begin(), control[pr].end(), 0.0) /
                              static_cast<double>(control[pr].size());
            const double s1 = sample_sd(treated[pr], m1);
            const double s0 = sample_sd(control[pr], m0);
            pair.estimate = m1 - m0;
            pair.se = std::sqrt(s1 * s1 / static_cast<double>(treated[pr].size()) +
                                s0 * s0 / static_cast<double>(control[pr].size()));
            pair.pass = pair.se > 0.0 ? std::abs(pair.estimate - pair.target) < 3.0 * pair.se
                                      : pair.estimate == pair.target;
        }
        rep.pass = rep.pass && pair.pass;
        rep.pairs.push_back(pair);
    }
    return rep;
}

} // namespace sarcf
