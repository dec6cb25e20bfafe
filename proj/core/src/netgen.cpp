#include "sarcf/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace sarcf {

void UnitCharacteristics::validate() const {
    if (coords.rows() < 2) throw InputError("characteristics: need at least 2 units");
    if (coords.cols() < 1) throw InputError("characteristics: need at least 1 coordinate dimension");
    if (!coords.allFinite()) throw InputError("characteristics: non-finite coordinate entry");
    if (econ.size() > 0) {
        if (econ.rows() != coords.rows())
            throw InputError("characteristics: econ row count does not match coords");
        if (!econ.allFinite()) throw InputError("characteristics: non-finite econ entry");
    }
}

void NetworkParams::validate(Eigen::Index n) const {
    if (k < 1) throw ParamError("network: k must be >= 1");
    if (k >= n) throw ParamError("network: k must be < number of units");
    if (!(decay >= 0.0) || !std::isfinite(decay)) throw ParamError("network: decay must be >= 0");
    if (!(econ_weight >= 0.0 && econ_weight <= 1.0))
        throw ParamError("network: econ_weight must lie in [0,1]");
}

InteractionMatrix InteractionMatrix::from_matrix(Eigen::MatrixXd w) {
    if (w.rows() != w.cols()) throw InputError("interaction matrix: not square");
    if (!w.allFinite()) throw InputError("interaction matrix: non-finite entry");
    if ((w.array() < 0.0).any()) throw InputError("interaction matrix: negative entry");
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        if (w(i, i) != 0.0) throw InputError("interaction matrix: nonzero diagonal");
    InteractionMatrix m;
    m.spectral_radius = sarcf::spectral_radius(w);
    m.w = std::move(w);
    return m;
}

InteractionMatrix build_weights(const UnitCharacteristics& chars, const NetworkParams& params) {
    chars.validate();
    const Eigen::Index n = chars.n();
    params.validate(n);
    const bool use_econ = params.econ_weight > 0.0 && chars.econ.size() > 0;

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    std::vector<std::pair<double, Eigen::Index>> order(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            double dist = (1.0 - params.econ_weight) * (chars.coords.row(i) - chars.coords.row(j)).norm();
            if (use_econ) dist += params.econ_weight * (chars.econ.row(i) - chars.econ.row(j)).norm();
            order[m++] = {dist, j};
        }
        // ties broken toward the lower unit index
        std::sort(order.begin(), order.end());
        for (int r = 0; r < params.k; ++r) {
            const auto [dist, j] = order[static_cast<std::size_t>(r)];
            double weight = 1.0;
            if (params.decay > 0.0) {
                if (dist <= 0.0)
                    throw InputError("build_weights: coincident units " + std::to_string(i) + " and " +
                                     std::to_string(j) + " with positive decay");
                weight = std::pow(dist, -params.decay);
            }
            w(i, j) = weight;
        }
    }
    if (params.row_normalize) w = row_normalize(w);
    return InteractionMatrix::from_matrix(std::move(w));
}

Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& w) {
    if (w.rows() != w.cols()) throw InputError("row_normalize: not square");
    if ((w.array() < 0.0).any()) throw InputError("row_normalize: negative entry");
    Eigen::MatrixXd out = w;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const double s = w.row(i).sum();
        if (s > 0.0) out.row(i) /= s;
    }
    return out;
}

double spectral_radius(const Eigen::MatrixXd& w) {
    if (w.rows() != w.cols()) throw InputError("spectral_radius: not square");
    if (!w.allFinite()) throw InputError("spectral_radius: non-finite entry");
    if (w.rows() == 0) return 0.0;
    if (w.isZero(0.0)) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(w, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericError("spectral_radius: QR iteration failed to converge on " +
                           std::to_string(w.rows()) + "x" + std::to_string(w.cols()) + " matrix");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double stability_margin(const InteractionMatrix& w, double rho) {
    return 1.0 - std::abs(rho) * w.spectral_radius;
}

} // namespace sarcf
