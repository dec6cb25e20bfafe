#include <doctest.h>

#include <cmath>
#include <utility>

#include <Eigen/LU>

#include "sarcf/dgp.hpp"
#include "sarcf/netgen.hpp"
#include "sarcf/rng.hpp"
#include "sarcf/sarfit.hpp"

using namespace sarcf;

namespace {

struct Draw {
    UnitCharacteristics chars;
    InteractionMatrix w;
    Population pop;
};

Draw make_draw(Eigen::Index n, std::uint64_t design_seed, std::uint64_t rep_seed,
               double rho = 0.4, double sigma = 1.0) {
    Draw d;
    d.chars = draw_characteristics(n, 2, 1, design_seed);
    d.w = build_weights(d.chars, NetworkParams{});
    StructuralParams params;
    params.rho = rho;
    params.sigma = sigma;
    params.gamma = Eigen::VectorXd::Constant(1, 0.5);
    d.pop = generate_population(d.chars, d.w, params, AssignmentSpec{}, rep_seed);
    return d;
}

InteractionMatrix exchange_2x2() {
    Eigen::MatrixXd m(2, 2);
    m << 0, 1,
         1, 0;
    return InteractionMatrix::from_matrix(m);
}

double sample_sd(const Eigen::VectorXd& v) {
    return std::sqrt((v.array() - v.mean()).square().sum() / (v.size() - 1.0));
}

} // namespace

TEST_CASE("LogDetSpectrum matches direct determinant computations") {
    // Exchange network: eigenvalues +-1, so ln|det(I - rho W)| = ln|1 - rho^2|.
    const LogDetSpectrum exch(exchange_2x2().w);
    CHECK(exch(0.4) == doctest::Approx(std::log(0.84)).epsilon(1e-14));
    CHECK(exch(-0.7) == doctest::Approx(std::log(1.0 - 0.49)).epsilon(1e-14));

    const LogDetSpectrum zero(Eigen::MatrixXd::Zero(8, 8));
    CHECK(zero(0.9) == 0.0);

    const InteractionMatrix small = build_weights(draw_characteristics(12, 2, 1, 3), NetworkParams{});
    const LogDetSpectrum spec12(small.w);
    for (double rho : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
        const double det =
            (Eigen::MatrixXd::Identity(12, 12) - rho * small.w).determinant();
        CHECK(spec12(rho) == doctest::Approx(std::log(std::abs(det))).epsilon(1e-12));
    }

    const InteractionMatrix big = build_weights(draw_characteristics(60, 2, 1, 4), NetworkParams{});
    const LogDetSpectrum spec60(big.w);
    for (double rho : {-0.8, 0.2, 0.9}) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(60, 60) - rho * big.w);
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < 60; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
        CHECK(spec60(rho) == doctest::Approx(logdet).epsilon(1e-8));
    }
}

TEST_CASE("concentrated_loglik peaks near the generating rho") {
    const Draw d = make_draw(1000, 42, 7);
    const double at_truth = concentrated_loglik(0.4, d.pop.y, d.pop.d, d.chars.econ, d.w);
    CHECK(at_truth > concentrated_loglik(0.0, d.pop.y, d.pop.d, d.chars.econ, d.w));
    CHECK(at_truth > concentrated_loglik(-0.4, d.pop.y, d.pop.d, d.chars.econ, d.w));
    CHECK(at_truth > concentrated_loglik(0.9, d.pop.y, d.pop.d, d.chars.econ, d.w));
    CHECK_THROWS_AS(concentrated_loglik(1.0, d.pop.y, d.pop.d, d.chars.econ, d.w), ModelError);
    CHECK_THROWS_AS(concentrated_loglik(-1.3, d.pop.y, d.pop.d, d.chars.econ, d.w), ModelError);
}

TEST_CASE("concentrated_loglik is invariant to spanned extra columns") {
    const Draw d = make_draw(150, 10, 3);
    Eigen::MatrixXd wide(150, 3);
    wide.col(0) = d.chars.econ.col(0);
    wide.col(1) = d.pop.d.cast<double>();         // duplicates the treatment column
    wide.col(2) = 2.0 * d.chars.econ.col(0);       // spanned by column 0
    const double lean = concentrated_loglik(0.3, d.pop.y, d.pop.d, d.chars.econ, d.w);
    const double fat = concentrated_loglik(0.3, d.pop.y, d.pop.d, wide, d.w);
    CHECK(fat == doctest::Approx(lean).epsilon(1e-10));
}

TEST_CASE("concentrated_loglik agrees with the profile used by the optimizer") {
    // The fitted maximum must weakly dominate the truth under the same profile.
    const Draw d = make_draw(400, 21, 5);
    const EstimationResult est = fit_sar_ml(d.pop.y, d.pop.d, d.chars.econ, d.w);
    REQUIRE(est.converged);
    const double at_hat = concentrated_loglik(est.rho_hat, d.pop.y, d.pop.d, d.chars.econ, d.w);
    const double at_truth = concentrated_loglik(0.4, d.pop.y, d.pop.d, d.chars.econ, d.w);
    CHECK(at_hat >= at_truth - 1e-9);
    CHECK(est.loglik == doctest::Approx(at_hat).epsilon(1e-8));
}

TEST_CASE("fit_sar_ml recovers the parameters as noise vanishes") {
    const Draw d = make_draw(300, 6, 2, 0.4, 1e-6);
    const EstimationResult est = fit_sar_ml(d.pop.y, d.pop.d, d.chars.econ, d.w);
    REQUIRE(est.converged);
    CHECK(std::abs(est.rho_hat - 0.4) < 1e-3);
    CHECK(std::abs(est.beta_hat - 1.0) < 1e-3);
    CHECK(std::abs(est.gamma_hat(0) - 0.5) < 1e-3);
    CHECK(est.sigma2_hat < 1e-9);
}

TEST_CASE("fit_sar_ml has no systematic drift at rho zero") {
    const Eigen::Index n = 200;
    const UnitCharacteristics chars = draw_characteristics(n, 2, 1, 42);
    const InteractionMatrix w = build_weights(chars, NetworkParams{});
    const LogDetSpectrum spectrum(w.w);
    StructuralParams params;
    params.rho = 0.0;
    params.gamma = Eigen::VectorXd::Constant(1, 0.5);

    const int reps = 200;
    Eigen::VectorXd rho_hats(reps);
    for (int r = 0; r < reps; ++r) {
        const Population pop =
            generate_population(chars, w, params, AssignmentSpec{}, rng::rep_seed(7, r));
        const EstimationResult est = fit_sar_ml(pop.y, pop.d, chars.econ, w, spectrum);
        REQUIRE(est.converged);
        rho_hats(r) = est.rho_hat;
    }
    CAPTURE(rho_hats.mean());
    CAPTURE(sample_sd(rho_hats));
    CHECK(std::abs(rho_hats.mean()) < 0.02);
    CHECK(sample_sd(rho_hats) < 0.15);
}

TEST_CASE("fit_sar_ml single draw self consistency at large N") {
    const Draw d = make_draw(1000, 42, 11);
    const EstimationResult est = fit_sar_ml(d.pop.y, d.pop.d, d.chars.econ, d.w);
    REQUIRE(est.converged);

    // Curvature-based standard error for rho from the concentrated profile.
    const double h = 1e-4;
    const auto cl = [&](double rho) {
        return concentrated_loglik(rho, d.pop.y, d.pop.d, d.chars.econ, d.w);
    };
    const double curvature = (cl(est.rho_hat + h) - 2.0 * cl(est.rho_hat) + cl(est.rho_hat - h)) / (h * h);
    REQUIRE(curvature < 0.0);
    const double se_rho = 1.0 / std::sqrt(-curvature);
    CAPTURE(est.rho_hat);
    CAPTURE(se_rho);
    CHECK(std::abs(est.rho_hat - 0.4) < 4.0 * se_rho);
    CHECK(std::abs(est.beta_hat - 1.0) < 0.25);
    CHECK(std::abs(est.gamma_hat(0) - 0.5) < 0.25);
    CHECK(est.sigma2_hat == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("fit_sar_ml is deterministic and the spectrum overload is bit identical") {
    const Draw d = make_draw(150, 9, 4);
    const EstimationResult a = fit_sar_ml(d.pop.y, d.pop.d, d.chars.econ, d.w);
    const EstimationResult b = fit_sar_ml(d.pop.y, d.pop.d, d.chars.econ, d.w);
    const EstimationResult c = fit_sar_ml(d.pop.y, d.pop.d, d.chars.econ, d.w, LogDetSpectrum(d.w.w));
    CHECK(a.rho_hat == b.rho_hat);
    CHECK(a.beta_hat == b.beta_hat);
    CHECK(a.loglik == b.loglik);
    CHECK(a.rho_hat == c.rho_hat);
    CHECK(a.beta_hat == c.beta_hat);
    CHECK(a.sigma2_hat == c.sigma2_hat);
    CHECK(a.loglik == c.loglik);
}

TEST_CASE("fit_sar_ml flags a flat profile instead of fabricating convergence") {
    const Eigen::Index n = 40;
    const InteractionMatrix w = InteractionMatrix::from_matrix(Eigen::MatrixXd::Zero(n, n));
    Eigen::VectorXi d(n);
    Eigen::VectorXd y(n);
    Eigen::MatrixXd x(n, 1);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i) = unif(gen) < 0.5 ? 1 : 0;
        x(i, 0) = unif(gen);
        y(i) = d(i) + 0.5 * x(i, 0) + unif(gen) - 0.5;
    }
    const EstimationResult est = fit_sar_ml(y, d, x, w);
    CHECK(!est.converged);
    CHECK(est.rho_bounds.first == doctest::Approx(-0.99).epsilon(1e-15));
    CHECK(est.rho_bounds.second == doctest::Approx(0.99).epsilon(1e-15));

    // With W = 0 the generalized step reduces to ordinary least squares.
    const EstimationResult ols = fit_ols(y, d, x);
    CHECK(est.beta_hat == doctest::Approx(ols.beta_hat).epsilon(1e-12));
    CHECK(est.gamma_hat(0) == doctest::Approx(ols.gamma_hat(0)).epsilon(1e-12));
}

TEST_CASE("fit entry points reject degenerate inputs") {
    const Draw d = make_draw(50, 12, 1);

    Eigen::MatrixXd collinear(50, 2);
    collinear.col(0) = d.chars.econ.col(0);
    collinear.col(1) = d.pop.d.cast<double>();
    CHECK_THROWS_AS(fit_sar_ml(d.pop.y, d.pop.d, collinear, d.w), InputError);
    CHECK_THROWS_AS(fit_ols(d.pop.y, d.pop.d, collinear), InputError);

    Eigen::VectorXd bad = d.pop.y;
    bad(3) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_sar_ml(bad, d.pop.d, d.chars.econ, d.w), InputError);

    Eigen::VectorXi short_d = d.pop.d.head(49);
    CHECK_THROWS_AS(fit_sar_ml(d.pop.y, short_d, d.chars.econ, d.w), InputError);

    // Too few observations for the profile search: need n > q + 2.
    Eigen::MatrixXd m3 = Eigen::MatrixXd::Zero(3, 3);
    m3(0, 1) = 1;
    m3(1, 0) = 1;
    m3(2, 0) = 1;
    const InteractionMatrix w3 = InteractionMatrix::from_matrix(m3);
    Eigen::VectorXd y3(3);
    y3 << 0.3, 1.4, -0.2;
    Eigen::VectorXi d3(3);
    d3 << 1, 0, 0;
    Eigen::MatrixXd x3(3, 1);
    x3 << 0.0, 1.0, 2.0;
    CHECK_THROWS_AS(fit_sar_ml(y3, d3, x3, w3), InputError);

    Eigen::VectorXd y2(2);
    y2 << 1.0, 0.0;
    Eigen::VectorXi d2(2);
    d2 << 1, 0;
    Eigen::MatrixXd x2(2, 1);
    x2 << 0.0, 1.0;
    CHECK_THROWS_AS(fit_ols(y2, d2, x2), InputError);
}

TEST_CASE("fit_ols recovers exact coefficients on noiseless static data") {
    const Eigen::Index n = 30;
    const UnitCharacteristics chars = draw_characteristics(n, 2, 2, 8);
    const Eigen::VectorXi d = assign_exogenous(n, 0.5, 3);
    Eigen::VectorXd gamma(2);
    gamma << 0.5, -1.25;
    const Eigen::VectorXd y = 2.0 * d.cast<double>() + chars.econ * gamma;
    const EstimationResult est = fit_ols(y, d, chars.econ);
    CHECK(est.beta_hat == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(est.gamma_hat(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(est.gamma_hat(1) == doctest::Approx(-1.25).epsilon(1e-12));
    CHECK(est.rho_hat == 0.0);
    CHECK(est.converged);
    CHECK(est.sigma2_hat < 1e-20);
}

TEST_CASE("fit_sar_ml and fit_ols coincide when rho is truly zero, up to rho_hat noise") {
    // The two direct-effect estimates differ only through the sampling
    // error of rho_hat: beta_hat moves by roughly half of rho_hat here
    // (W y carries a treatment-share level that loads onto d). With
    // rho_hat ~ N^{-1/2} the gap cannot be driven below ~1e-2 at any
    // practical N, so the check is proportional rather than absolute.
    const Draw d = make_draw(2000, 33, 19, 0.0);
    const EstimationResult sar = fit_sar_ml(d.pop.y, d.pop.d, d.chars.econ, d.w);
    const EstimationResult ols = fit_ols(d.pop.y, d.pop.d, d.chars.econ);
    REQUIRE(sar.converged);
    CAPTURE(sar.rho_hat);
    CAPTURE(sar.beta_hat - ols.beta_hat);
    CHECK(std::abs(sar.rho_hat) < 0.08);
    CHECK(std::abs(sar.beta_hat - ols.beta_hat) < 2.0 * std::abs(sar.rho_hat) + 1e-6);
    CHECK(std::abs(sar.beta_hat - ols.beta_hat) < 0.05);
}

TEST_CASE("implied_effects maps estimates through the equilibrium expression") {
    EstimationResult est;
    est.beta_hat = 1.0;
    est.rho_hat = 0.4;
    est.gamma_hat = Eigen::VectorXd::Zero(0);
    est.converged = true;

    const ImpliedEffects two = implied_effects(est, exchange_2x2());
    CHECK(two.pe_hat == 1.0);
    CHECK(two.nc_hat(0) == doctest::Approx(1.0 / 0.84).epsilon(1e-12));
    CHECK(two.nc_hat(1) == doctest::Approx(1.0 / 0.84).epsilon(1e-12));
    CHECK(two.nc_hat_mean == doctest::Approx(1.0 / 0.84).epsilon(1e-12));

    const InteractionMatrix w = build_weights(draw_characteristics(40, 2, 1, 15), NetworkParams{});
    est.rho_hat = 0.0;
    est.beta_hat = 1.3;
    const ImpliedEffects flat = implied_effects(est, w);
    CHECK((flat.nc_hat.array() - 1.3).abs().maxCoeff() < 1e-12);

    StructuralParams truth;
    truth.gamma = Eigen::VectorXd::Constant(1, 0.5);
    est.beta_hat = truth.beta;
    est.rho_hat = truth.rho;
    const ImpliedEffects mapped = implied_effects(est, w);
    const CounterfactualReport rep = report(w, truth);
    CHECK((mapped.nc_hat - rep.nc).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(mapped.nc_hat_mean == doctest::Approx(rep.nc_mean).epsilon(1e-14));

    est.rho_hat = 1.2;
    CHECK_THROWS_AS(implied_effects(est, w), ModelError);
}
