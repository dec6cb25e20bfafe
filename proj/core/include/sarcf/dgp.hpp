#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "sarcf/netgen.hpp"

namespace sarcf {

// Coefficients of the outcome equation Y = rho W Y + beta D + X gamma + eps.
struct StructuralParams {
    double beta = 1.0;
    double rho = 0.4;
    Eigen::VectorXd gamma; // one coefficient per econ covariate column
    double sigma = 1.0;    // shock standard deviation

    void validate() const;
};

enum class AssignmentMode { kExogenous, kConfounded };

// How treatment is assigned. `kappa` only matters in confounded mode:
// D_i ~ Bernoulli(logistic(a + kappa * eps_i / sd(eps))) with the
// intercept a calibrated so the mean propensity equals p. Negative kappa
// means treatment targets adversely-shocked units.
struct AssignmentSpec {
    AssignmentMode mode = AssignmentMode::kExogenous;
    double p = 0.5;
    double kappa = -2.0;

    void validate() const;
};

// One simulated economy. `y` solves (I - rho W) y = beta d + X gamma + eps.
struct Population {
    UnitCharacteristics chars;
    Eigen::VectorXd eps;
    Eigen::VectorXi d;
    Eigen::VectorXd y;
};

// i.i.d. Normal(0, sigma^2); sigma = 0 yields exact zeros.
Eigen::VectorXd draw_shocks(Eigen::Index n, double sigma, std::uint64_t seed);

// i.i.d. Bernoulli(p) on its own RNG stream, independent of any shock
// vector by construction.
Eigen::VectorXi assign_exogenous(Eigen::Index n, double p, std::uint64_t seed);

// Logistic-in-shock propensity with mean calibrated to p by bisection
// (to 1e-10). kappa = 0 reduces to constant propensity p.
Eigen::VectorXi assign_confounded(const Eigen::VectorXd& eps, double p, double kappa,
                                  std::uint64_t seed);

// Direct dense solve of (I - rho W) Y = beta d + X gamma + eps.
// Requires stability_margin(w, rho) > 0.01; checks the residual to
// 1e-10 relative.
Eigen::VectorXd solve_equilibrium(const InteractionMatrix& w, const StructuralParams& params,
                                  const Eigen::VectorXi& d, const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& eps);

// Coordinates uniform on the unit cube [0,1]^coord_dim, economic
// attributes standard normal then column-standardized (mean 0, sd 1).
UnitCharacteristics draw_characteristics(Eigen::Index n, Eigen::Index coord_dim,
                                         Eigen::Index econ_dim, std::uint64_t seed);

// Shocks, treatment, and equilibrium outcomes for fixed characteristics
// and network. Pure function of (inputs, seed).
Population generate_population(const UnitCharacteristics& chars, const InteractionMatrix& w,
                               const StructuralParams& params, const AssignmentSpec& assignment,
                               std::uint64_t seed);

} // namespace sarcf
