#pragma once

#include <optional>

#include <Eigen/Dense>

#include "sarcf/dgp.hpp"
#include "sarcf/netgen.hpp"

namespace sarcf {

// The three causal objects implied by one (beta, rho, W):
//   pe            - partial-equilibrium effect, holding all other outcomes
//                   fixed; equals beta.
//   li_own        - own effect under one round of neighbour response;
//                   equals beta exactly because W has zero diagonal.
//   nc            - per-unit network-consistent (full equilibrium) effect
//                   beta * [(I - rho W)^{-1}]_{ii}.
//   amplification - nc_i / pe; absent when beta = 0.
struct CounterfactualReport {
    double pe = 0.0;
    double li_own = 0.0;
    Eigen::VectorXd nc;
    std::optional<Eigen::VectorXd> amplification;
    double nc_mean = 0.0;
};

// Spillover from treating `from` onto unit `to`:
//   li = beta * rho * W[to, from]          (single neighbour round)
//   nc = beta * [(I - rho W)^{-1}][to, from] (full equilibrium)
struct SpilloverEntry {
    Eigen::Index from = 0;
    Eigen::Index to = 0;
    double li = 0.0;
    double nc = 0.0;
};

double effect_pe(const StructuralParams& params);

// One-round response map (I + rho W)(beta d + X gamma + eps). Polynomial
// in W, so no invertibility requirement.
Eigen::VectorXd li_outcomes(const InteractionMatrix& w, const StructuralParams& params,
                            const Eigen::VectorXi& d, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& eps);

double effect_li_own(const StructuralParams& params);

double effect_li_spillover(const StructuralParams& params, const InteractionMatrix& w,
                           Eigen::Index from, Eigen::Index to);

// beta * [(I - rho W)^{-1}]_{unit,unit}, via one linear solve against
// the unit's basis vector (no full inverse for single queries).
double effect_nc(const InteractionMatrix& w, const StructuralParams& params, Eigen::Index unit);

SpilloverEntry spillover(const InteractionMatrix& w, const StructuralParams& params,
                         Eigen::Index from, Eigen::Index to);

// Full report; the N network-consistent effects share one factorization.
CounterfactualReport report(const InteractionMatrix& w, const StructuralParams& params);

} // namespace sarcf
