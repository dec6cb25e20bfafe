#include "sarcf/dgp.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "sarcf/rng.hpp"

namespace sarcf {

namespace {

constexpr double kMarginFloor = 0.01;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double mean_propensity(double a, double kappa, const Eigen::VectorXd& z) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) s += logistic(a + kappa * z(i));
    return s / static_cast<double>(z.size());
}

} // namespace

void StructuralParams::validate() const {
    if (!std::isfinite(beta)) throw ParamError("params: beta not finite");
    if (!std::isfinite(rho)) throw ParamError("params: rho not finite");
    if (gamma.size() > 0 && !gamma.allFinite()) throw ParamError("params: gamma not finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParamError("params: sigma must be > 0");
}

void AssignmentSpec::validate() const {
    if (!(p > 0.0 && p < 1.0)) throw ParamError("assignment: p must lie in (0,1)");
    if (!std::isfinite(kappa)) throw ParamError("assignment: kappa not finite");
}

Eigen::VectorXd draw_shocks(Eigen::Index n, double sigma, std::uint64_t seed) {
    if (n < 1) throw InputError("draw_shocks: n must be >= 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ParamError("draw_shocks: sigma must be >= 0");
    Eigen::VectorXd eps = Eigen::VectorXd::Zero(n);
    if (sigma == 0.0) return eps;
    auto gen = rng::engine(seed, rng::Stream::kShocks);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index i = 0; i < n; ++i) eps(i) = normal(gen);
    return eps;
}

Eigen::VectorXi assign_exogenous(Eigen::Index n, double p, std::uint64_t seed) {
    if (n < 1) throw InputError("assign_exogenous: n must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw ParamError("assign_exogenous: p must lie in (0,1)");
    auto gen = rng::engine(seed, rng::Stream::kAssign);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXi d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = unif(gen) < p ? 1 : 0;
    return d;
}

Eigen::VectorXi assign_confounded(const Eigen::VectorXd& eps, double p, double kappa,
                                  std::uint64_t seed) {
    const Eigen::Index n = eps.size();
    if (n < 1) throw InputError("assign_confounded: empty shock vector");
    if (!eps.allFinite()) throw InputError("assign_confounded: non-finite shock");
    if (!(p > 0.0 && p < 1.0)) throw ParamError("assign_confounded: p must lie in (0,1)");
    if (!std::isfinite(kappa)) throw ParamError("assign_confounded: kappa not finite");

    // Standardize the shock; a constant vector carries no signal, so the
    // propensity degenerates to p regardless of kappa.
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    if (n > 1) {
        const double mean = eps.mean();
        const double sd = std::sqrt((eps.array() - mean).square().sum() / static_cast<double>(n - 1));
        if (sd > 0.0) z = (eps.array() - mean) / sd;
    }

    // Intercept solving mean(logistic(a + kappa z)) = p. The mean is
    // increasing in a; expand the bracket until it straddles p, then
    // bisect the interval below 1e-10.
    double lo = -50.0, hi = 50.0;
    int expansions = 0;
    while (mean_propensity(lo, kappa, z) > p) {
        lo *= 2.0;
        if (++expansions > 60) throw NumericError("assign_confounded: intercept bracket failed (low)");
    }
    expansions = 0;
    while (mean_propensity(hi, kappa, z) < p) {
        hi *= 2.0;
        if (++expansions > 60) throw NumericError("assign_confounded: intercept bracket failed (high)");
    }
    int iters = 0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (mean_propensity(mid, kappa, z) < p) lo = mid; else hi = mid;
        if (++iters > 200) throw NumericError("assign_confounded: bisection did not converge");
    }
    const double a = 0.5 * (lo + hi);

    auto gen = rng::engine(seed, rng::Stream::kAssign);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXi d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = unif(gen) < logistic(a + kappa * z(i)) ? 1 : 0;
    return d;
}

Eigen::VectorXd solve_equilibrium(const InteractionMatrix& w, const StructuralParams& params,
                                  const Eigen::VectorXi& d, const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& eps) {
    params.validate();
    const Eigen::Index n = w.n();
    if (d.size() != n || eps.size() != n) throw InputError("solve_equilibrium: dimension mismatch");
    if (x.size() > 0 && x.rows() != n) throw InputError("solve_equilibrium: covariate row mismatch");
    const Eigen::Index q = x.size() > 0 ? x.cols() : 0;
    if (params.gamma.size() != q) throw InputError("solve_equilibrium: gamma length != covariate count");

    const double margin = stability_margin(w, params.rho);
    if (!(margin > kMarginFloor))
        throw ModelError("solve_equilibrium: stability margin " + std::to_string(margin) +
                         " is not above " + std::to_string(kMarginFloor));

    Eigen::VectorXd rhs = params.beta * d.cast<double>() + eps;
    if (q > 0) rhs += x * params.gamma;

    const Eigen::MatrixXd a =
        Eigen::MatrixXd::Identity(n, n) - params.rho * w.w;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd y = lu.solve(rhs);
    if (!y.allFinite()) throw NumericError("solve_equilibrium: factorization produced non-finite solution");

    const double resid = (a * y - rhs).lpNorm<Eigen::Infinity>();
    if (resid > 1e-10 * rhs.lpNorm<Eigen::Infinity>())
        throw NumericError("solve_equilibrium: residual " + std::to_string(resid) +
                           " exceeds tolerance");
    return y;
}

UnitCharacteristics draw_characteristics(Eigen::Index n, Eigen::Index coord_dim,
                                         Eigen::Index econ_dim, std::uint64_t seed) {
    if (n < 2) throw InputError("draw_characteristics: need at least 2 units");
    if (coord_dim < 1) throw InputError("draw_characteristics: need at least 1 coordinate dimension");
    if (econ_dim < 0) throw InputError("draw_characteristics: negative econ dimension");

    UnitCharacteristics chars;
    chars.coords.resize(n, coord_dim);
    {
        auto gen = rng::engine(seed, rng::Stream::kCoords);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index c = 0; c < coord_dim; ++c) chars.coords(i, c) = unif(gen);
    }
    chars.econ.resize(n, econ_dim);
    if (econ_dim > 0) {
        auto gen = rng::engine(seed, rng::Stream::kEcon);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index c = 0; c < econ_dim; ++c) chars.econ(i, c) = normal(gen);
        for (Eigen::Index c = 0; c < econ_dim; ++c) {
            const double mean = chars.econ.col(c).mean();
            chars.econ.col(c).array() -= mean;
            const double sd =
                std::sqrt(chars.econ.col(c).squaredNorm() / static_cast<double>(n - 1));
            if (sd > 0.0) chars.econ.col(c) /= sd;
        }
    }
    return chars;
}

Population generate_population(const UnitCharacteristics& chars, const InteractionMatrix& w,
                               const StructuralParams& params, const AssignmentSpec& assignment,
                               std::uint64_t seed) {
    chars.validate();
    params.validate();
    assignment.validate();
    if (chars.n() != w.n()) throw InputError("generate_population: characteristics/network size mismatch");

    Population pop;
    pop.chars = chars;
    pop.eps = draw_shocks(chars.n(), params.sigma, seed);
    pop.d = assignment.mode == AssignmentMode::kExogenous
                ? assign_exogenous(chars.n(), assignment.p, seed)
                : assign_confounded(pop.eps, assignment.p, assignment.kappa, seed);
    pop.y = solve_equilibrium(w, params, pop.d, chars.econ, pop.eps);
    return pop;
}

} // namespace sarcf
