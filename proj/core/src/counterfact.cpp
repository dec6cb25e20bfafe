#include "sarcf/counterfact.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

namespace sarcf {

namespace {

constexpr double kMarginFloor = 0.01;

void require_stable(const InteractionMatrix& w, double rho, const char* where) {
    const double margin = stability_margin(w, rho);
    if (!(margin > kMarginFloor))
        throw ModelError(std::string(where) + ": stability margin " + std::to_string(margin) +
                         " is not above " + std::to_string(kMarginFloor));
}

void require_unit(const InteractionMatrix& w, Eigen::Index unit, const char* where) {
    if (unit < 0 || unit >= w.n())
        throw InputError(std::string(where) + ": unit index " + std::to_string(unit) +
                         " out of range");
}

} // namespace

double effect_pe(const StructuralParams& params) { return params.beta; }

Eigen::VectorXd li_outcomes(const InteractionMatrix& w, const StructuralParams& params,
                            const Eigen::VectorXi& d, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& eps) {
    const Eigen::Index n = w.n();
    if (d.size() != n || eps.size() != n) throw InputError("li_outcomes: dimension mismatch");
    const Eigen::Index q = x.size() > 0 ? x.cols() : 0;
    if (x.size() > 0 && x.rows() != n) throw InputError("li_outcomes: covariate row mismatch");
    if (params.gamma.size() != q) throw InputError("li_outcomes: gamma length != covariate count");

    Eigen::VectorXd base = params.beta * d.cast<double>() + eps;
    if (q > 0) base += x * params.gamma;
    return base + params.rho * (w.w * base);
}

double effect_li_own(const StructuralParams& params) { return params.beta; }

double effect_li_spillover(const StructuralParams& params, const InteractionMatrix& w,
                           Eigen::Index from, Eigen::Index to) {
    require_unit(w, from, "effect_li_spillover");
    require_unit(w, to, "effect_li_spillover");
    if (from == to) throw ParamError("effect_li_spillover: own effect requested; use effect_li_own");
    return params.beta * params.rho * w.w(to, from);
}

double effect_nc(const InteractionMatrix& w, const StructuralParams& params, Eigen::Index unit) {
    require_unit(w, unit, "effect_nc");
    require_stable(w, params.rho, "effect_nc");
    const Eigen::Index n = w.n();
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - params.rho * w.w;
    const Eigen::VectorXd z = Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(
        Eigen::VectorXd::Unit(n, unit));
    return params.beta * z(unit);
}

SpilloverEntry spillover(const InteractionMatrix& w, const StructuralParams& params,
                         Eigen::Index from, Eigen::Index to) {
    require_unit(w, from, "spillover");
    require_unit(w, to, "spillover");
    if (from == to) throw ParamError("spillover: own effect requested; use effect_nc");
    require_stable(w, params.rho, "spillover");
    const Eigen::Index n = w.n();
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - params.rho * w.w;
    const Eigen::VectorXd z = Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(
        Eigen::VectorXd::Unit(n, from));
    SpilloverEntry entry;
    entry.from = from;
    entry.to = to;
    entry.li = effect_li_spillover(params, w, from, to);
    entry.nc = params.beta * z(to);
    return entry;
}

CounterfactualReport report(const InteractionMatrix& w, const StructuralParams& params) {
    require_stable(w, params.rho, "report");
    const Eigen::Index n = w.n();
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - params.rho * w.w;
    const Eigen::MatrixXd inv =
        Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(Eigen::MatrixXd::Identity(n, n));
    if (!inv.allFinite()) throw NumericError("report: factorization produced non-finite inverse");

    CounterfactualReport rep;
    rep.pe = params.beta;
    rep.li_own = params.beta;
    rep.nc = params.beta * inv.diagonal();
    rep.nc_mean = rep.nc.mean();
    if (params.beta != 0.0) rep.amplification = rep.nc / params.beta;
    return rep;
}

} // namespace sarcf
