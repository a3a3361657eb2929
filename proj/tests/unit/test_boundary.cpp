#include <doctest.h>

#include <cmath>
#include <random>

#include "daadb/boundary.hpp"
#include "daadb/error.hpp"
#include "oracles.hpp"

using namespace daadb;

TEST_CASE("softplus and friends") {
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(softplus(800.0) == 800.0);
    CHECK(softplus(-800.0) >= 0.0);
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(-800.0) >= 0.0);
    for (double r : {1e-6, 0.3, 1.0, 5.0, 40.0}) CHECK(softplus(inverse_softplus(r)) == doctest::Approx(r).epsilon(1e-12));
    CHECK_THROWS_AS(inverse_softplus(0.0), ContractError);
}

TEST_CASE("boundary set constructors stay consistent") {
    const auto a = BoundarySet::from_raw({0.0, 1.0});
    CHECK(a.radius[0] == doctest::Approx(std::log(2.0)));
    const auto b = BoundarySet::from_radius({2.0, 0.5});
    CHECK(softplus(b.raw[0]) == doctest::Approx(2.0));
    CHECK(init_boundaries(3, 1) == init_boundaries(3, 1));
    CHECK_FALSE(init_boundaries(3, 1) == init_boundaries(3, 2));
}

TEST_CASE("boundary gradient worked example") {
    // Three samples outside, one inside, raw = 0: (1 - 3) / 4 * sigmoid(0) = -0.25.
    Centroids c{Matrix(1, 1), {4}};
    const Matrix z(4, 1, std::vector<double>{2.0, -3.0, 5.0, 0.1});
    const std::vector<std::size_t> y{0, 0, 0, 0};
    const auto b = BoundarySet::from_raw({0.0}, c);
    CHECK(boundary_gradient(z, y, b, 0) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(boundary_loss(z, y, b) == doctest::Approx((2.0 + 3.0 + 5.0 - 3 * std::log(2.0) + std::log(2.0) - 0.1) / 4));
}

TEST_CASE("boundary gradient matches finite differences away from kinks") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int checked = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t k_count = 2 + t % 4;
        const std::size_t n = 10 + t % 30;
        std::vector<std::size_t> y = oracle::random_labels(rng, n, k_count);
        for (std::size_t k = 0; k < k_count; ++k) y[k] = k;
        std::vector<double> d(n);
        for (auto& v : d) v = std::abs(u(rng)) * 2.0;
        std::vector<double> raw(k_count);
        for (auto& v : raw) v = u(rng);
        const auto b = BoundarySet::from_raw(raw);
        for (std::size_t k = 0; k < k_count; ++k) {
            const double h = 1e-6;
            bool near_kink = false;
            for (std::size_t i = 0; i < n; ++i) near_kink |= y[i] == k && std::abs(d[i] - b.radius[k]) < 1e-4;
            if (near_kink) continue;
            const double fd = (oracle::class_boundary_loss(d, y, k, raw[k] + h) -
                               oracle::class_boundary_loss(d, y, k, raw[k] - h)) / (2 * h);
            CHECK(std::abs(boundary_gradient(d, y, b, k) - fd) < 1e-6);
            ++checked;
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("boundary gradient needs class samples") {
    const std::vector<double> d{1.0};
    const std::vector<std::size_t> y{0};
    const auto b = BoundarySet::from_raw({0.0, 0.0});
    CHECK_THROWS_AS(boundary_gradient(d, y, b, 1), ContractError);
    CHECK_THROWS_AS(boundary_gradient(d, y, b, 2), ContractError);
}

TEST_CASE("fitted radii settle near the median distance") {
    std::mt19937_64 rng(5);
    const Matrix z = oracle::random_matrix(rng, 2000, 2);
    std::vector<std::size_t> y(2000);
    for (std::size_t i = 0; i < 2000; ++i) y[i] = i % 2;
    const auto c = compute_centroids(z, y, 2);
    BoundaryTrainConfig cfg;
    cfg.seed = 1;
    const auto fit = fit_boundaries(z, y, c, cfg);
    CHECK(fit.converged);
    CHECK(fit.epochs <= 200);
    CHECK(fit.radius_history.size() == fit.epochs);
    const auto d = distances_to_own_centroid(z, y, c);
    for (std::size_t k = 0; k < 2; ++k) {
        std::size_t inside = 0, total = 0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (y[i] != k) continue;
            ++total;
            inside += d[i] <= fit.boundaries.radius[k];
        }
        const double frac = static_cast<double>(inside) / static_cast<double>(total);
        CHECK(frac >= 0.45);
        CHECK(frac <= 0.55);
    }
    CHECK(fit_boundaries(z, y, c, cfg).boundaries == fit.boundaries);
}

TEST_CASE("mini-batch fitting runs and skips absent classes") {
    std::mt19937_64 rng(6);
    const Matrix z = oracle::random_matrix(rng, 300, 2);
    std::vector<std::size_t> y(300, 0);
    y[0] = 1;  // class 1 appears in few batches
    y[1] = 1;
    const auto c = compute_centroids(z, y, 2);
    BoundaryTrainConfig cfg;
    cfg.batch_size = 16;
    cfg.max_epochs = 10;
    const auto fit = fit_boundaries(z, y, c, cfg);
    CHECK(fit.epochs == 10);
    for (double r : fit.boundaries.radius) CHECK(std::isfinite(r));
}

TEST_CASE("a ring of equal distances keeps the radius next to the ring") {
    // Every sample sits at distance 2 from the single centroid, so the loss has a single kink and no flat
    // region. Adam then settles into a small limit cycle around the ring rather than a fixed point.
    const std::size_t n = 64;
    Matrix z(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        z(i, 0) = 2.0 * std::cos(a);
        z(i, 1) = 2.0 * std::sin(a);
    }
    const std::vector<std::size_t> y(n, 0);
    const auto c = compute_centroids(z, y, 1);
    BoundaryTrainConfig cfg;
    cfg.max_epochs = 400;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        cfg.seed = seed;
        const auto fit = fit_boundaries(z, y, c, cfg);
        // Cycle amplitude is about lr * (1 - beta1) / (1 + beta1) in raw units.
        CHECK(std::abs(fit.boundaries.radius[0] - 2.0) < 0.01);
    }
}

TEST_CASE("softplus is linear for large raw values") {
    CHECK(softplus(100.0) == doctest::Approx(100.0).epsilon(1e-15));
    for (double raw : {-50.0, -5.0, 0.0, 3.0}) CHECK(BoundarySet::from_raw({raw}).radius[0] > 0.0);
}

TEST_CASE("boundary loss hand cases") {
    Centroids c{Matrix(1, 1), {1}};
    const Matrix z(1, 1, std::vector<double>{3.0});
    const std::vector<std::size_t> y{0};
    CHECK(boundary_loss(z, y, BoundarySet::from_radius({1.0}, c)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(boundary_loss(z, y, BoundarySet::from_radius({3.0}, c)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("boundary loss equals the mean absolute deviation") {
    std::mt19937_64 rng(14);
    const Matrix z = oracle::random_matrix(rng, 40, 3);
    auto y = oracle::random_labels(rng, 40, 3);
    y[0] = 0, y[1] = 1, y[2] = 2;
    const auto c = compute_centroids(z, y, 3);
    const auto b = BoundarySet::from_raw({0.3, -0.2, 1.1}, c);
    double ref = 0.0;
    for (std::size_t i = 0; i < 40; ++i) ref += std::abs(oracle::distance(z.row(i), c.matrix.row(y[i])) - b.radius[y[i]]);
    CHECK(std::abs(boundary_loss(z, y, b) - ref / 40.0) < 1e-9);
}

TEST_CASE("gradient sign law") {
    const std::vector<std::size_t> y{0, 0, 0, 0};
    const auto b = BoundarySet::from_raw({0.4});
    const std::vector<double> inside{0.1, 0.2, 0.3, 0.4}, outside{5, 6, 7, 8}, half{0.1, 0.2, 5, 6};
    CHECK(boundary_gradient(inside, y, b, 0) == doctest::Approx(sigmoid(0.4)));
    CHECK(boundary_gradient(outside, y, b, 0) == doctest::Approx(-sigmoid(0.4)));
    CHECK(boundary_gradient(half, y, b, 0) == 0.0);
}

TEST_CASE("one update moves the radius toward the samples") {
    const std::vector<std::size_t> y(10, 0);
    Centroids c{Matrix(1, 1), {10}};
    BoundaryTrainConfig cfg;
    cfg.max_epochs = 1;
    cfg.seed = 4;
    const double r0 = init_boundaries(1, 4).radius[0];
    const Matrix far(10, 1, 50.0);
    CHECK(fit_boundaries(far, y, c, cfg).boundaries.radius[0] > r0);
    const Matrix at_centre(10, 1, 0.0);
    CHECK(fit_boundaries(at_centre, y, c, cfg).boundaries.radius[0] < r0);
}

TEST_CASE("samples on their centroid shrink the radius monotonically") {
    const std::vector<std::size_t> y(10, 0);
    Centroids c{Matrix(1, 2), {10}};
    const Matrix z(10, 2);
    BoundaryTrainConfig cfg;
    cfg.max_epochs = 150;
    const auto fit = fit_boundaries(z, y, c, cfg);
    double prev = init_boundaries(1, cfg.seed).radius[0];
    for (const auto& r : fit.radius_history) {
        CHECK(r[0] < prev);
        prev = r[0];
    }
    CHECK(prev < 0.05);
}
