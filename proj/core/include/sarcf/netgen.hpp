#pragma once

#include <Eigen/Dense>

#include "sarcf/errors.hpp"

namespace sarcf {

// Predetermined unit attributes the interaction matrix is built from:
// spatial positions plus standardized economic covariates.
struct UnitCharacteristics {
    Eigen::MatrixXd coords; // N x d
    Eigen::MatrixXd econ;   // N x q, q may be 0

    Eigen::Index n() const { return coords.rows(); }
    void validate() const;
};

// Parameters of the W(theta; X) mapping: k-nearest-neighbour support on a
// mixed geographic/economic distance, inverse-distance weights with
// exponent `decay` (decay = 0 gives binary weights), optional row
// normalization.
struct NetworkParams {
    int k = 4;
    double decay = 0.0;
    double econ_weight = 0.0; // in [0,1]: 0 = geographic only, 1 = economic only
    bool row_normalize = true;

    void validate(Eigen::Index n) const;
};

// N x N nonnegative interaction weights with zero diagonal and a cached
// spectral radius (dominant eigenvalue modulus).
struct InteractionMatrix {
    Eigen::MatrixXd w;
    double spectral_radius = 0.0;

    Eigen::Index n() const { return w.rows(); }

    // Validates the invariants (square, finite, nonnegative, zero
    // diagonal) and caches the radius.
    static InteractionMatrix from_matrix(Eigen::MatrixXd w);
};

// Builds W from characteristics: support is the k nearest neighbours
// under dist_ij = (1 - econ_weight) * |coords_i - coords_j|
//               + econ_weight * |econ_i - econ_j|,
// ties broken toward the lower unit index; weight dist^(-decay) before
// optional row normalization.
InteractionMatrix build_weights(const UnitCharacteristics& chars, const NetworkParams& params);

// Divides each row with positive sum by that sum; zero rows pass through.
Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& w);

// Dominant eigenvalue modulus from the full dense spectrum (Schur/QR
// iteration), accurate to 1e-8 relative. Throws NumericError if the
// eigensolver does not converge.
double spectral_radius(const Eigen::MatrixXd& w);

// 1 - |rho| * spectral_radius(W). Positive iff (I - rho W) is safely
// invertible under the solver's margin policy.
double stability_margin(const InteractionMatrix& w, double rho);

} // namespace sarcf
