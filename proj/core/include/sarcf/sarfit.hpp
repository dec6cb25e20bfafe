#pragma once

#include <utility>

#include <Eigen/Dense>

#include "sarcf/counterfact.hpp"
#include "sarcf/dgp.hpp"
#include "sarcf/netgen.hpp"

namespace sarcf {

// Quasi-maximum-likelihood estimates of the outcome equation given a
// known W. `rho_bounds` is the interval actually searched; `converged`
// is false when the likelihood peaks at a grid boundary.
struct EstimationResult {
    double beta_hat = 0.0;
    double rho_hat = 0.0;
    Eigen::VectorXd gamma_hat;
    double sigma2_hat = 0.0;
    double loglik = 0.0;
    bool converged = false;
    std::pair<double, double> rho_bounds{0.0, 0.0};
};

// Counterfactual effects implied by an estimate: pe_hat = beta_hat,
// nc_hat_i = beta_hat * [(I - rho_hat W)^{-1}]_{ii}.
struct ImpliedEffects {
    double pe_hat = 0.0;
    double nc_hat_mean = 0.0;
    Eigen::VectorXd nc_hat;
};

// Eigenvalues of W, cached so ln|det(I - rho W)| = sum_i ln|1 - rho l_i|
// can be evaluated for many rho without refactorizing. The Monte Carlo
// harness shares one spectrum across all replications of a fixed W.
class LogDetSpectrum {
public:
    explicit LogDetSpectrum(const Eigen::MatrixXd& w);

    // ln|det(I - rho W)|
    double operator()(double rho) const;

private:
    Eigen::VectorXcd eigs_;
};

// Concentrated Gaussian log-likelihood
//   l(rho) = ln|I - rho W| - (N/2) ln(SSR(rho)/N) - (N/2)(ln 2pi + 1)
// with SSR(rho) the residual sum of squares from least squares of
// (I - rho W) y on [d, x]. The log-determinant comes from an LU
// factorization with sign tracking. Requires |rho| * radius(W) < 1.
double concentrated_loglik(double rho, const Eigen::VectorXd& y, const Eigen::VectorXi& d,
                           const Eigen::MatrixXd& x, const InteractionMatrix& w);

// Maximizes the concentrated log-likelihood over rho: 201-point grid on
// the stability interval shrunk by 1%, then golden-section refinement to
// an interval below 1e-8. beta_hat/gamma_hat follow by generalized least
// squares at rho_hat, sigma2_hat = SSR(rho_hat)/N.
EstimationResult fit_sar_ml(const Eigen::VectorXd& y, const Eigen::VectorXi& d,
                            const Eigen::MatrixXd& x, const InteractionMatrix& w);

// Same estimator with a caller-provided spectrum (avoids recomputing the
// eigendecomposition when many data sets share one W). Results are
// bit-identical to the self-computing overload.
EstimationResult fit_sar_ml(const Eigen::VectorXd& y, const Eigen::VectorXi& d,
                            const Eigen::MatrixXd& x, const InteractionMatrix& w,
                            const LogDetSpectrum& spectrum);

// Least squares of y on [d, x] with rho pinned at 0. The naive baseline
// that targets the partial-equilibrium effect only.
EstimationResult fit_ols(const Eigen::VectorXd& y, const Eigen::VectorXi& d,
                         const Eigen::MatrixXd& x);

// Maps an estimate into implied counterfactual effects through the same
// equilibrium expression used for the true parameters.
ImpliedEffects implied_effects(const EstimationResult& est, const InteractionMatrix& w);

} // namespace sarcf
