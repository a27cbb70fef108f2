#include "doctest.h"
#include "oracles.hpp"

#include "paneitz/bubbles.hpp"

#include <random>

using namespace paneitz;
using oracle::rel;

TEST_CASE("smoothstep cutoff") {
    const double d = 0.5;
    CHECK(smoothstep_cutoff(0.0, d) == 1.0);
    CHECK(smoothstep_cutoff(d, d) == 1.0);
    CHECK(smoothstep_cutoff(1.5 * d, d) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(smoothstep_cutoff(2 * d, d) == 0.0);
    CHECK(smoothstep_cutoff(3.0, d) == 0.0);
    // first and second derivatives vanish at both seams
    const double h = 1e-4;
    for (double r : {d, 2 * d}) {
        const double f0 = smoothstep_cutoff(r, d), fp = smoothstep_cutoff(r + h, d), fm = smoothstep_cutoff(r - h, d);
        CHECK(std::abs((fp - fm) / (2 * h)) <= 1e-6);
        CHECK(std::abs((fp - 2 * f0 + fm) / (h * h)) <= 1e-2);
    }
}

TEST_CASE("bubble profile is exact inside the cutoff radius") {
    const auto data = EinsteinData::round_sphere(12);
    const auto rule = build_quadrature(data, 200);
    const BubbleSpec spec{0.1, 0.5, true};
    const auto raw = bubble_profile(spec, rule, 12);
    const auto theta = rule.colatitudes();
    for (int j = 0; j < rule.size(); ++j) {
        if (theta(j) <= 0.5) CHECK(raw(j) == std::pow(theta(j) * theta(j) + 0.1 * 0.1, -4.0));
        if (theta(j) >= 1.0) CHECK(raw(j) == 0.0);
    }
    const auto south = bubble_profile(BubbleSpec{0.1, 0.5, false}, rule, 12);
    for (int j = 0; j < rule.size(); ++j) CHECK(south(j) == doctest::Approx(raw(rule.size() - 1 - j)).epsilon(1e-12));
    CHECK_THROWS_AS(bubble_profile(BubbleSpec{0.0, 0.5, true}, rule, 12), DomainError);
    CHECK_THROWS_AS(bubble_profile(BubbleSpec{0.1, 2.0, true}, rule, 12), DomainError);
}

TEST_CASE("bubble field normalization and resolution guard") {
    const auto data = EinsteinData::round_sphere(12);
    const auto coeffs = derive_coefficients(data);
    auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, 400));
    ZonalBasis basis(rule, 320);
    for (double eps : {0.05, 0.1, 0.2}) {
        const auto b = bubble_field(BubbleSpec{eps, 0.5, true}, basis, coeffs);
        CHECK(std::abs(rule->weights.dot(b.v.values.array().abs().pow(coeffs.N).matrix()) - 1.0) <= 1e-10);
        CHECK(b.alias_error <= 1e-2);
    }
    ZonalBasis coarse(rule, 48);
    CHECK(required_degree(0.05) == 320);
    try {
        bubble_field(BubbleSpec{0.05, 0.5, true}, coarse, coeffs);
        FAIL("expected rejection");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("L >= 320") != std::string::npos);
    }
}

TEST_CASE("functional Y on round spheres") {
    const auto data = EinsteinData::round_sphere(5);
    const auto coeffs = derive_coefficients(data);
    auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, 80));
    ZonalBasis basis(rule, 30);
    const auto one = basis.from_coeffs(Eigen::VectorXd::Unit(31, 0));
    const auto z1 = basis.from_coeffs(Eigen::VectorXd::Unit(31, 1));
    const double y0 = functional_Y(one, coeffs, basis);
    CHECK(rel(y0, oracle::kFrozen[0].k2_inv_sq) <= 1e-12);
    CHECK(functional_Y(z1, coeffs, basis) > y0);
    CHECK(rel(functional_Y(basis.from_coeffs(-3.5 * z1.coeffs), coeffs, basis), functional_Y(z1, coeffs, basis)) <= 1e-12);

    // sharpness restricted to the zonal cone
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd c(31);
        for (int l = 0; l < 31; ++l) c(l) = g(rng) / (1.0 + l * l);
        CHECK(functional_Y(basis.from_coeffs(c), coeffs, basis) >= y0 * (1.0 - 1e-10));
    }
    CHECK_THROWS_AS(functional_Y(basis.from_coeffs(Eigen::VectorXd::Zero(31)), coeffs, basis), DomainError);
}

TEST_CASE("epsilon sweep guards and fitted limit") {
    CHECK_THROWS_AS(epsilon_sweep(EinsteinData::round_sphere(5), default_eps_grid()), DomainError);
    CHECK_THROWS_AS(epsilon_sweep(EinsteinData::round_sphere(6), default_eps_grid()), DomainError);
    CHECK_THROWS_AS(epsilon_sweep(EinsteinData::round_sphere(12), {0.1, 0.2}), DomainError);

    const auto rep = epsilon_sweep(EinsteinData::round_sphere(12), default_eps_grid());
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.A_relative_error <= 0.02);
    CHECK(rep.residual <= 0.01 * rep.A);
    CHECK(std::abs(rep.c_norm_exponent - 4.0) <= 0.4);
    for (const auto& row : rep.rows) CHECK_FALSE(row.below_sharp_constant);
}

TEST_CASE("two-plane bound on S^12") {
    const auto data = EinsteinData::round_sphere(12);
    const double K = derive_coefficients(data).K2_inv_sq;
    const auto rep = two_plane_bound(data, K, {0.05, 0.1, 0.5});
    CHECK(rel(rep.target, std::pow(2.0, 1.0 / 3.0) * K) <= 1e-12);
    CHECK_FALSE(rep.outside_hypothesis);
    CHECK(rep.best_eps == 0.05);
    CHECK(rep.best_bound <= rep.target * 1.05);
    CHECK(rep.rows[2].upper_bound > rep.target * 1.05);
    for (const auto& row : rep.rows) CHECK(row.lower_value <= row.upper_bound);

    const auto d8 = EinsteinData::round_sphere(8);
    const auto rep8 = two_plane_bound(d8, derive_coefficients(d8).K2_inv_sq, {0.1}, 0.5, 200, 160);
    CHECK(rep8.outside_hypothesis);
}

TEST_CASE("elementary inequality sampler") {
    CHECK(elementary_inequality_check(3.0, 3.0, 100000, 1).violations == 0);
    CHECK(elementary_inequality_check(4.0, 16.0, 100000, 2).violations == 0);
    // x^2 y^2 <= (x^3 y + x y^3)/2 gives C = 7 at p = 4
    CHECK(elementary_inequality_check(4.0, 7.0, 100000, 3).violations == 0);
    CHECK(elementary_inequality_check(4.0, 0.1, 100000, 4).violations > 0);
    CHECK_THROWS_AS(elementary_inequality_check(2.0, 4.0, 10), DomainError);
    CHECK_THROWS_AS(elementary_inequality_check(3.0, 0.0, 10), DomainError);
    CHECK_THROWS_AS(elementary_inequality_check(3.0, 1.0, 0), DomainError);
    const auto a = elementary_inequality_check(5.5, 45.0, 1000, 8);
    const auto b = elementary_inequality_check(5.5, 45.0, 1000, 8);
    CHECK(a.worst_ratio == b.worst_ratio);
}
