#include "doctest.h"
#include "oracles.hpp"

#include "paneitz/spectral.hpp"

#include <random>

using namespace paneitz;
using oracle::rel;

namespace {

struct Setup {
    EinsteinData data;
    OperatorCoefficients coeffs;
    std::shared_ptr<const QuadratureRule> rule;
    ZonalBasis basis;

    Setup(int n, int q, int L)
        : data(EinsteinData::round_sphere(n)), coeffs(derive_coefficients(data)),
          rule(std::make_shared<const QuadratureRule>(build_quadrature(data, q))), basis(rule, L) {}
};

ConformalDensity random_density(const Setup& s, int Lq, std::mt19937_64& rng) {
    ZonalBasis qb(s.rule, Lq);
    std::normal_distribution<double> g;
    Eigen::VectorXd c(Lq + 1);
    for (int i = 0; i <= Lq; ++i) c(i) = g(rng) / (1.0 + i);
    c(0) += 2.0;
    return ConformalDensity::from_root(qb, c, s.coeffs.N);
}

} // namespace

TEST_CASE("stiffness entries for n=5, S=20") {
    Setup s(5, 40, 10);
    const auto A = assemble_stiffness(s.coeffs, s.basis);
    CHECK(A.diag(0) == doctest::Approx(6.5625).epsilon(1e-15));
    CHECK(A.diag(1) == doctest::Approx(59.0625).epsilon(1e-15));
    CHECK(A.diag(2) == doctest::Approx(216.5625).epsilon(1e-15));
    const auto c6 = derive_coefficients(EinsteinData::round_sphere(6));
    CHECK_THROWS_AS(assemble_stiffness(c6, s.basis), DomainError);
}

TEST_CASE("constant density gives a scaled identity mass form") {
    for (const auto& f : oracle::kFrozen) {
        Setup s(f.n, 60, 20);
        const auto u = ConformalDensity::constant(*s.rule, s.coeffs.N);
        CHECK(rel(u.lN_mass(*s.rule, s.coeffs.N), 1.0) <= 1e-12);
        const auto B = assemble_mass(u, s.basis, s.coeffs.N);
        const double expect = std::pow(f.vol, -4.0 / f.n);
        CHECK((B.B - expect * Eigen::MatrixXd::Identity(21, 21)).cwiseAbs().maxCoeff() <= 1e-12 * expect);
    }
}

TEST_CASE("mass form homogeneity and degenerate inputs") {
    Setup s(6, 60, 12);
    std::mt19937_64 rng(5);
    const auto u = random_density(s, 6, rng);
    const auto B1 = assemble_mass(u, s.basis, s.coeffs.N);
    const auto B3 = assemble_mass(u.scaled(3.0), s.basis, s.coeffs.N);
    CHECK((B3.B - std::pow(3.0, s.coeffs.N - 2.0) * B1.B).cwiseAbs().maxCoeff() <= 1e-12 * B3.B.cwiseAbs().maxCoeff());

    ConformalDensity zero;
    zero.u = Eigen::VectorXd::Zero(60);
    CHECK_THROWS_AS(assemble_mass(zero, s.basis, s.coeffs.N), DomainError);
    ConformalDensity negative;
    negative.u = Eigen::VectorXd::Ones(60);
    negative.u(3) = -1.0;
    CHECK_THROWS_AS(assemble_mass(negative, s.basis, s.coeffs.N), DomainError);
}

TEST_CASE("half-supported density: singular mass form is shifted and reported") {
    Setup s(5, 40, 39);
    Eigen::VectorXd vals = Eigen::VectorXd::Zero(40);
    vals.tail(20).setOnes();
    const auto u = ConformalDensity::from_values(*s.rule, vals, s.coeffs.N, true);
    const auto A = assemble_stiffness(s.coeffs, s.basis);
    const auto B = assemble_mass(u, s.basis, s.coeffs.N);
    CHECK(std::abs(smallest_mass_eigenvalue(B)) <= 1e-12 * B.B.trace());
    const auto sp = solve_generalized_eigen(A, B, 3, s.basis);
    CHECK(sp.shift == doctest::Approx(1e-12 * B.B.trace() / 40.0).epsilon(1e-12));
    CHECK(sp.eigenvalues[0] <= sp.eigenvalues[1]);
    for (double r : sp.residuals) CHECK(r <= 1e-8);
}

TEST_CASE("identity mass form returns the stiffness diagonal") {
    Setup s(5, 40, 8);
    const auto A = assemble_stiffness(s.coeffs, s.basis);
    MassForm B{Eigen::MatrixXd::Identity(9, 9)};
    const auto sp = solve_generalized_eigen(A, B, 9, s.basis);
    for (int i = 0; i < 9; ++i) CHECK(rel(sp.eigenvalues[i], A.diag(i)) <= 1e-13);
    CHECK(sp.shift == 0.0);
    CHECK_THROWS_AS(solve_generalized_eigen(A, B, 10, s.basis), DomainError);
    CHECK_THROWS_AS(solve_generalized_eigen(A, B, 0, s.basis), DomainError);
}

TEST_CASE("nonpositive stiffness is refused") {
    // S = -80 on S^5: roots -15 and -7 bracket mu_2 = 12. S = 0: A_0 = 0.
    for (double S : {-80.0, 0.0}) {
        const auto data = EinsteinData::with_curvature(5, S);
        const auto coeffs = derive_coefficients(data);
        auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, 30));
        ZonalBasis basis(rule, 6);
        const auto A = assemble_stiffness(coeffs, basis);
        CHECK(A.diag.minCoeff() <= 0.0);
        MassForm B{Eigen::MatrixXd::Identity(7, 7)};
        CHECK_THROWS_AS(solve_generalized_eigen(A, B, 2, basis), DomainError);
    }
}

TEST_CASE("round S^5 constant density closed form") {
    Setup s(5, 200, 48);
    const auto u = ConformalDensity::constant(*s.rule, s.coeffs.N);
    const auto ds = density_spectrum(s.coeffs, s.basis, u, 3);
    CHECK(rel(ds.normalized[0], oracle::kFrozen[0].k2_inv_sq) <= 1e-10);
    CHECK(rel(ds.normalized[1], oracle::kLambda2ConstS5) <= 1e-10);
    CHECK(rel(ds.normalized[0], s.coeffs.K2_inv_sq) <= 1e-10);
    // first eigenfield is the positive constant
    const auto& v = ds.spectrum.eigenfields[0].values;
    CHECK(v.minCoeff() > 0.0);
    CHECK((v.array() - v(0)).abs().maxCoeff() <= 1e-10 * v(0));
}

TEST_CASE("property: spectra of random densities") {
    Setup s(5, 120, 40);
    std::mt19937_64 rng(17);
    const auto A = assemble_stiffness(s.coeffs, s.basis);
    for (int t = 0; t < 20; ++t) {
        const auto u = random_density(s, 8, rng);
        auto B = assemble_mass(u, s.basis, s.coeffs.N);
        const auto sp = solve_generalized_eigen(A, B, 5, s.basis);
        // orthonormality holds for the pencil actually solved
        B.B.diagonal().array() += sp.shift;
        for (int i = 0; i < 5; ++i) {
            CHECK(sp.residuals[i] <= 1e-8);
            if (i > 0) CHECK(sp.eigenvalues[i] >= sp.eigenvalues[i - 1]);
            for (int j = 0; j <= i; ++j) {
                const double g = sp.eigenfields[i].coeffs.dot(B.B * sp.eigenfields[j].coeffs);
                CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-10);
            }
            CHECK(rel(rayleigh(A, B, sp.eigenfields[i].coeffs), sp.eigenvalues[i]) <= 1e-10);
        }
        const auto& v1 = sp.eigenfields[0].coeffs;
        const auto& v2 = sp.eigenfields[1].coeffs;
        CHECK(rel(rayleigh(A, B, (v1 + v2) / std::sqrt(2.0)), 0.5 * (sp.eigenvalues[0] + sp.eigenvalues[1])) <= 1e-10);
        CHECK(rel(minimax_over_plane(A, B, v1, v2), sp.eigenvalues[1]) <= 1e-10);

        double sup = 0.0;
        for (int j = 0; j < 256; ++j) {
            const double th = std::numbers::pi * j / 256.0;
            sup = std::max(sup, rayleigh(A, B, std::cos(th) * v1 + std::sin(th) * v2));
        }
        CHECK(rel(sup, sp.eigenvalues[1]) <= 1e-8);
    }
}

TEST_CASE("property: scale invariance of normalized eigenvalues") {
    Setup s(6, 100, 30);
    std::mt19937_64 rng(23);
    for (int t = 0; t < 100; ++t) {
        const auto u = random_density(s, 6, rng);
        const auto base = density_spectrum(s.coeffs, s.basis, u, 3);
        for (double c : {0.1, 3.0, 10.0}) {
            const auto sc = density_spectrum(s.coeffs, s.basis, u.scaled(c), 3);
            for (int i = 0; i < 3; ++i) {
                CHECK(rel(sc.normalized[i], base.normalized[i]) <= 1e-10);
                CHECK(rel(sc.spectrum.eigenvalues[i], std::pow(c, -(s.coeffs.N - 2.0)) * base.spectrum.eigenvalues[i]) <= 1e-10);
                const Eigen::VectorXd a = sc.spectrum.eigenfields[i].coeffs.normalized();
                const Eigen::VectorXd b = base.spectrum.eigenfields[i].coeffs.normalized();
                CHECK(std::min((a - b).norm(), (a + b).norm()) <= 1e-6);
            }
        }
        CHECK(rel(base.normalized[0], base.spectrum.eigenvalues[0]) <= 1e-10);
    }
}

TEST_CASE("property: eigenvalues decrease under basis refinement") {
    const auto data = EinsteinData::round_sphere(8);
    const auto coeffs = derive_coefficients(data);
    auto rule = std::make_shared<const QuadratureRule>(build_quadrature(data, 120));
    std::mt19937_64 rng(31);
    Setup helper(8, 120, 10);
    for (int t = 0; t < 5; ++t) {
        const auto u = random_density(helper, 10, rng);
        double prev[3] = {1e300, 1e300, 1e300};
        for (int L : {4, 8, 16, 32, 64}) {
            ZonalBasis basis(rule, L);
            const auto ds = density_spectrum(coeffs, basis, u, 3);
            for (int i = 0; i < 3; ++i) {
                CHECK(ds.spectrum.eigenvalues[i] <= prev[i] * (1.0 + 1e-12));
                prev[i] = ds.spectrum.eigenvalues[i];
            }
        }
    }
}
