#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sarcf/dgp.hpp"
#include "sarcf/netgen.hpp"

using namespace sarcf;

namespace {

Eigen::MatrixXd random_nonneg_zero_diag(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = i == j ? 0.0 : unif(gen);
    return m;
}

UnitCharacteristics random_chars(Eigen::Index n, std::uint64_t seed) {
    return draw_characteristics(n, 2, 1, seed);
}

} // namespace

TEST_CASE("build_weights nearest neighbor on a line breaks ties to the lower index") {
    UnitCharacteristics chars;
    chars.coords.resize(3, 1);
    chars.coords << 0.0, 1.0, 2.0;
    chars.econ.resize(3, 0);

    NetworkParams params;
    params.k = 1;
    const InteractionMatrix w = build_weights(chars, params);

    Eigen::MatrixXd expected(3, 3);
    expected << 0, 1, 0,
                1, 0, 0,
                0, 1, 0;
    CHECK((w.w - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_weights row sums are 0 or 1 when row normalized") {
    const InteractionMatrix w = build_weights(random_chars(30, 5), NetworkParams{.k = 3});
    for (Eigen::Index i = 0; i < w.n(); ++i)
        CHECK(std::abs(w.w.row(i).sum() - 1.0) < 1e-12);
    CHECK(w.w.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.w.minCoeff() >= 0.0);
}

TEST_CASE("build_weights default design has unit spectral radius") {
    const InteractionMatrix w = build_weights(random_chars(200, 42), NetworkParams{});
    CHECK(w.spectral_radius == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("build_weights supports inverse distance decay") {
    UnitCharacteristics chars;
    chars.coords.resize(3, 1);
    chars.coords << 0.0, 1.0, 3.0;
    chars.econ.resize(3, 0);

    NetworkParams params;
    params.k = 2;
    params.decay = 1.0;
    params.row_normalize = false;
    const InteractionMatrix w = build_weights(chars, params);
    CHECK(w.w(0, 1) == doctest::Approx(1.0));
    CHECK(w.w(0, 2) == doctest::Approx(1.0 / 3.0));
    CHECK(w.w(2, 1) == doctest::Approx(0.5));
}

TEST_CASE("build_weights rejects bad inputs") {
    UnitCharacteristics chars = random_chars(5, 1);
    CHECK_THROWS_AS(build_weights(chars, NetworkParams{.k = 5}), ParamError);
    CHECK_THROWS_AS(build_weights(chars, NetworkParams{.k = 0}), ParamError);
    CHECK_THROWS_AS(build_weights(chars, NetworkParams{.k = 2, .decay = -1.0}), ParamError);
    CHECK_THROWS_AS(build_weights(chars, NetworkParams{.k = 2, .econ_weight = 1.5}), ParamError);

    UnitCharacteristics bad = chars;
    bad.coords(2, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(build_weights(bad, NetworkParams{.k = 2}), InputError);

    UnitCharacteristics dup = chars;
    dup.coords.row(1) = dup.coords.row(0);
    CHECK_THROWS_AS(build_weights(dup, NetworkParams{.k = 1, .decay = 1.0}), InputError);
}

TEST_CASE("build_weights is permutation equivariant") {
    const UnitCharacteristics chars = random_chars(12, 7);
    const NetworkParams params{.k = 3};
    const InteractionMatrix w = build_weights(chars, params);

    Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
    perm.setIdentity();
    std::mt19937_64 gen(99);
    std::shuffle(perm.indices().data(), perm.indices().data() + 12, gen);

    UnitCharacteristics permuted;
    permuted.coords = perm * chars.coords;
    permuted.econ = perm * chars.econ;
    const InteractionMatrix wp = build_weights(permuted, params);

    const Eigen::MatrixXd expected = perm * w.w * perm.transpose();
    CHECK((wp.w - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_weights support is the k nearest neighbors") {
    const UnitCharacteristics chars = random_chars(15, 11);
    NetworkParams params{.k = 4};
    params.row_normalize = false;
    const InteractionMatrix w = build_weights(chars, params);

    for (Eigen::Index i = 0; i < 15; ++i) {
        std::vector<std::pair<double, Eigen::Index>> dist;
        for (Eigen::Index j = 0; j < 15; ++j)
            if (j != i) dist.push_back({(chars.coords.row(i) - chars.coords.row(j)).norm(), j});
        std::sort(dist.begin(), dist.end());
        int support = 0;
        for (Eigen::Index j = 0; j < 15; ++j)
            if (w.w(i, j) > 0.0) ++support;
        CHECK(support == 4);
        for (int r = 0; r < 4; ++r) CHECK(w.w(i, dist[static_cast<std::size_t>(r)].second) > 0.0);
    }
}

TEST_CASE("row_normalize examples") {
    Eigen::MatrixXd m(2, 2);
    m << 0, 2,
         3, 0;
    Eigen::MatrixXd expected(2, 2);
    expected << 0, 1,
                1, 0;
    CHECK((row_normalize(m) - expected).cwiseAbs().maxCoeff() == 0.0);

    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 4);
    CHECK(row_normalize(zero).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd random = random_nonneg_zero_diag(5, 3);
    random.row(2).setZero();
    const Eigen::MatrixXd normalized = row_normalize(random);
    for (Eigen::Index i = 0; i < 5; ++i) {
        const double s = normalized.row(i).sum();
        CHECK((std::abs(s) < 1e-12 || std::abs(s - 1.0) < 1e-12));
    }

    Eigen::MatrixXd negative = random;
    negative(0, 1) = -0.5;
    CHECK_THROWS_AS(row_normalize(negative), InputError);
}

TEST_CASE("spectral_radius closed forms") {
    CHECK(spectral_radius(Eigen::MatrixXd::Zero(6, 6)) == 0.0);

    Eigen::MatrixXd exchange(2, 2);
    exchange << 0, 1,
                1, 0;
    CHECK(spectral_radius(exchange) == doctest::Approx(1.0).epsilon(1e-12));

    const Eigen::MatrixXd stochastic = row_normalize(random_nonneg_zero_diag(20, 9));
    CHECK(spectral_radius(stochastic) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("spectral_radius matches a symmetric eigensolver oracle") {
    Eigen::MatrixXd m = random_nonneg_zero_diag(50, 13);
    m = ((m + m.transpose()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(m);
    const double expected = oracle.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(spectral_radius(m) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("stability_margin") {
    const InteractionMatrix w = build_weights(random_chars(40, 21), NetworkParams{.k = 4});
    CHECK(stability_margin(w, 0.0) == doctest::Approx(1.0));
    CHECK(stability_margin(w, 0.4) == doctest::Approx(0.6).epsilon(1e-8));
    CHECK(stability_margin(w, 1.0) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("from_matrix validates invariants and caches the radius") {
    CHECK_THROWS_AS(InteractionMatrix::from_matrix(Eigen::MatrixXd::Zero(3, 4)), InputError);

    Eigen::MatrixXd diag = random_nonneg_zero_diag(4, 17);
    diag(1, 1) = 0.2;
    CHECK_THROWS_AS(InteractionMatrix::from_matrix(diag), InputError);

    Eigen::MatrixXd negative = random_nonneg_zero_diag(4, 17);
    negative(0, 2) = -1.0;
    CHECK_THROWS_AS(InteractionMatrix::from_matrix(negative), InputError);

    const Eigen::MatrixXd m = random_nonneg_zero_diag(25, 19);
    const InteractionMatrix w = InteractionMatrix::from_matrix(m);
    CHECK(w.spectral_radius == doctest::Approx(spectral_radius(m)).epsilon(1e-12));
}
