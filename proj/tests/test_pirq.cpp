#include "pirqsim/pirq.hpp"

#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

using namespace pirqsim;

namespace {

LtiSystem identified_actuator() {
    return from_transfer_function({1.0}, {0.0008, 0.045, 1.0});
}

LtiSystem default_sensor() {
    return from_transfer_function({1.0}, {0.000032, 0.009, 1.0});
}

// Random stable strictly-proper system with unit DC gain and no zeros.
LtiSystem random_unit_dc_plant(std::mt19937& rng) {
    std::uniform_real_distribution<double> wn(5.0, 50.0);
    std::uniform_real_distribution<double> zeta(0.4, 1.2);
    std::uniform_int_distribution<int> pick(0, 1);
    if (pick(rng) == 0) {
        const double tau = 1.0 / wn(rng);
        return from_transfer_function({1.0}, {tau, 1.0});
    }
    const double w = wn(rng), z = zeta(rng);
    return from_transfer_function({1.0}, {1.0 / (w * w), 2.0 * z / w, 1.0});
}

}  // namespace

TEST_CASE("pirq realization") {
    const PirqGains g{1.0, 1.0, 1.0, 1.0};
    const auto sys = pirq_realization(g);
    CHECK(sys.order() == 3);
    CHECK(sys.d == 1.0);
    CHECK(sys.c[0] == 1.0);
    CHECK(sys.c[1] == 1.0);
    CHECK(sys.c[2] == 1.0);
    CHECK(sys.A(0, 1) == 1.0);
    CHECK(sys.A(1, 2) == 1.0);
    CHECK(sys.A.diagonal().norm() == 0.0);

    // Triple integrator: every eigenvalue at the origin.
    CHECK(sys.A.eigenvalues().cwiseAbs().maxCoeff() < 1e-12);

    const PirqGains g2{2.0, 3.0, 5.0, 7.0};
    const auto sys2 = pirq_realization(g2);
    const auto h1 = frequency_response(sys2, 1.0);
    // C(j) = (kP j^3 + kI j^2 + kR j + kQ)/j^3
    const std::complex<double> j(0.0, 1.0);
    const std::complex<double> expected =
        (g2.kP * j * j * j + g2.kI * j * j + g2.kR * j + g2.kQ) / (j * j * j);
    CHECK(std::abs(h1 - expected) < 1e-12);
}

TEST_CASE("stabilizing gains") {
    const auto gp = identified_actuator();
    const auto ga = default_sensor();

    SUBCASE("triple zero at -1 expands to (1,3,3,1)") {
        const auto g = stabilizing_gains({{{-1.0, 0.0}, {-1.0, 0.0}, {-1.0, 0.0}}}, 1.0, gp, ga);
        CHECK(g.kP == doctest::Approx(1.0));
        CHECK(g.kI == doctest::Approx(3.0));
        CHECK(g.kR == doctest::Approx(3.0));
        CHECK(g.kQ == doctest::Approx(1.0));
    }
    SUBCASE("zero scaling is polynomially homogeneous") {
        const double lam = 2.5;
        const auto g1 = stabilizing_gains({{{-1.0, 0.0}, {-2.0, 0.0}, {-3.0, 0.0}}}, 1.0, gp, ga);
        const auto g2 = stabilizing_gains(
            {{{-lam, 0.0}, {-2.0 * lam, 0.0}, {-3.0 * lam, 0.0}}}, 1.0, gp, ga);
        CHECK(g2.kI == doctest::Approx(lam * g1.kI));
        CHECK(g2.kR == doctest::Approx(lam * lam * g1.kR));
        CHECK(g2.kQ == doctest::Approx(lam * lam * lam * g1.kQ));
    }
    SUBCASE("designer zeros with a workable kP stabilize the loop") {
        const auto g = stabilizing_gains({{{-10.0, 0.0}, {-15.0, 5.0}, {-15.0, -5.0}}}, 1.0, gp, ga);
        const auto loop = closed_loop_matrix(gp, pirq_realization(g), ga);
        CHECK(spectral_abscissa(loop.A) < 0.0);
    }
    SUBCASE("too much gain is rejected") {
        CHECK_THROWS_WITH_AS(
            stabilizing_gains({{{-10.0, 0.0}, {-15.0, 5.0}, {-15.0, -5.0}}}, 5.0, gp, ga),
            doctest::Contains("loop not stabilized"), std::runtime_error);
    }
    SUBCASE("right-half-plane zeros are rejected") {
        CHECK_THROWS_AS(stabilizing_gains({{{1.0, 0.0}, {-1.0, 0.0}, {-1.0, 0.0}}}, 1.0, gp, ga),
                        std::invalid_argument);
    }
    SUBCASE("non-conjugate complex zeros are rejected") {
        CHECK_THROWS_AS(stabilizing_gains({{{-1.0, 2.0}, {-1.0, 3.0}, {-2.0, 0.0}}}, 1.0, gp, ga),
                        std::invalid_argument);
    }
}

TEST_CASE("inversion coefficients") {
    const auto gp = identified_actuator();
    const double g0 = 9.807;
    const double a_d = 0.378 * g0;

    SUBCASE("no drag reduces to a constant feedforward") {
        const auto c = inversion_coefficients(gp, 0.0, a_d, g0);
        CHECK(c.u2 == 0.0);
        CHECK(c.u1 == 0.0);
        CHECK(c.u0 == doctest::Approx(a_d - g0));
        CHECK(c.x1.norm() == 0.0);
        CHECK(c.x2.norm() == 0.0);
        const Eigen::VectorXd expect_x0 =
            -gp.A.fullPivLu().solve(gp.b) * (a_d - g0);
        CHECK((c.x0 - expect_x0).norm() < 1e-12);
    }
    SUBCASE("quadratic coefficient from the drag model") {
        const auto c = inversion_coefficients(gp, 0.05, 3.707, g0);
        CHECK(c.u2 == doctest::Approx(2.0 * 0.05 * 3.707 * 3.707));
        CHECK(c.u2 == doctest::Approx(1.374).epsilon(2e-4));
    }
    SUBCASE("algebraic invariants hold for randomized plants") {
        std::mt19937 rng(31337);
        for (int trial = 0; trial < 25; ++trial) {
            const auto plant = random_unit_dc_plant(rng);
            const double b = 0.01 + 0.1 * (trial % 7) / 7.0;
            const auto c = inversion_coefficients(plant, b, a_d, g0);
            // A_p x2 + b_p u2 = 0 and c_p' x2 = 2 b a_d^2
            CHECK((plant.A * c.x2 + plant.b * c.u2).norm() < 1e-10 * (1.0 + std::abs(c.u2)));
            CHECK(plant.c.dot(c.x2) ==
                  doctest::Approx(2.0 * b * a_d * a_d).epsilon(1e-10));
        }
    }
    SUBCASE("defining property: simulated output is exactly the quadratic") {
        // Oracle: exact linear simulation of xdot = A x + b u(t) using an
        // augmented autonomous system whose extra chain generates u(t).
        const double b = 0.05;
        const auto c = inversion_coefficients(gp, b, a_d, g0);
        const int n = gp.order();
        Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 3, n + 3);
        aug.topLeftCorner(n, n) = gp.A;
        aug.block(0, n, n, 1) = gp.b;
        aug(n, n + 1) = 1.0;
        aug(n + 1, n + 2) = 1.0;
        Eigen::VectorXd X(n + 3);
        X.head(n) = c.x0;
        X[n] = c.u0;
        X[n + 1] = c.u1;
        X[n + 2] = c.u2;
        const double dt = 1e-3;
        const Eigen::MatrixXd M = (aug * dt).exp();
        double max_err = 0.0, scale = 0.0;
        for (int k = 0; k <= 3000; ++k) {
            const double t = k * dt;
            const double y = gp.c.dot(X.head(n));
            const double y_ref = b * a_d * a_d * t * t + a_d - g0;
            max_err = std::max(max_err, std::abs(y - y_ref));
            scale = std::max(scale, std::abs(y_ref));
            X = M * X;
        }
        CHECK(max_err / scale < 1e-8);
    }
    SUBCASE("unit DC gain is required") {
        const auto bad = from_transfer_function({2.0}, {0.0008, 0.045, 1.0});
        CHECK_THROWS_AS(inversion_coefficients(bad, 0.05, a_d, g0), std::invalid_argument);
    }
    SUBCASE("scaling a_d by lambda scales the quadratic parts by lambda^2") {
        const double lam = 1.7, b = 0.05;
        const auto c1 = inversion_coefficients(gp, b, a_d, g0);
        const auto c2 = inversion_coefficients(gp, b, lam * a_d, g0);
        CHECK(c2.u2 == doctest::Approx(lam * lam * c1.u2));
        CHECK(c2.u1 == doctest::Approx(lam * lam * c1.u1));
        CHECK((c2.x2 - lam * lam * c1.x2).norm() < 1e-10);
        CHECK((c2.x1 - lam * lam * c1.x1).norm() < 1e-10);
        // Drag-dependent part of u0 scales; the (a_d - g) part does not.
        CHECK(c2.u0 - (lam * a_d - g0) ==
              doctest::Approx(lam * lam * (c1.u0 - (a_d - g0))));
    }
}

TEST_CASE("controller initial condition") {
    const PirqGains g{3.0, 49.0, 241.0, 104.0};

    SUBCASE("constant-only feedforward") {
        InversionCoefficients c;
        c.u0 = -6.1;
        c.u1 = 0.0;
        c.u2 = 0.0;
        const auto ic = controller_initial_condition(g, c);
        CHECK(ic.q0 == doctest::Approx(c.u0 / g.kQ));
        CHECK(ic.r0 == 0.0);
        CHECK(ic.s0 == 0.0);
    }
    SUBCASE("kR = 0 reduces per the formula") {
        const PirqGains gz{2.0, 10.0, 0.0, 5.0};
        InversionCoefficients c;
        c.u0 = 1.0;
        c.u1 = 2.0;
        c.u2 = 3.0;
        const auto ic = controller_initial_condition(gz, c);
        CHECK(ic.s0 == doctest::Approx(c.u2 / gz.kQ));
        CHECK(ic.r0 == doctest::Approx(c.u1 / gz.kQ));
        // With kR = 0 the formula collapses to q0 = (u0 - kI u2 / kQ) / kQ.
        CHECK(ic.q0 == doctest::Approx((c.u0 - gz.kI * c.u2 / gz.kQ) / gz.kQ));
    }
    SUBCASE("zero-input controller reproduces the feedforward polynomial") {
        const auto gp = identified_actuator();
        const double g0 = 9.807;
        const auto c = inversion_coefficients(gp, 0.05, 0.378 * g0, g0);
        const auto ic = controller_initial_condition(g, c);
        PirqState st{g};
        st.reset_ic(ic);
        const double dt = 1e-3;
        double max_err = 0.0;
        for (int k = 0; k <= 3000; ++k) {
            const double t = k * dt;
            const double u_ref = c.u0 + c.u1 * t + 0.5 * c.u2 * t * t;
            max_err = std::max(max_err, std::abs(st.output(0.0) - u_ref));
            st.advance(0.0, dt);
        }
        CHECK(max_err < 1e-12 * 1e3);  // exact polynomial, rounding only
        CHECK(max_err < 1e-9);
    }
}

TEST_CASE("closed loop matrix") {
    const auto gp = identified_actuator();
    const auto ga = default_sensor();
    const auto gains = stabilizing_gains({{{-1.0, 0.0}, {-2.0, 0.0}, {-3.0, 0.0}}}, 1.0, gp, ga);
    const auto ctrl = pirq_realization(gains);
    const auto loop = closed_loop_matrix(gp, ctrl, ga);

    CHECK(loop.A.rows() == 7);
    CHECK(loop.np == 2);
    CHECK(loop.nc == 3);
    CHECK(loop.na == 2);

    SUBCASE("zero coupling degenerates to a block diagonal") {
        LtiSystem plant0 = gp;
        plant0.b.setZero();
        LtiSystem ctrl0 = ctrl;
        ctrl0.b.setZero();
        LtiSystem sensor0 = ga;
        sensor0.b.setZero();
        const auto bd = closed_loop_matrix(plant0, ctrl0, sensor0);
        Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(7, 7);
        expect.block(0, 0, 2, 2) = gp.A;
        expect.block(2, 2, 3, 3) = ctrl.A;
        expect.block(5, 5, 2, 2) = ga.A;
        CHECK((bd.A - expect).norm() == 0.0);
    }
    SUBCASE("design gains place every eigenvalue in the open left half plane") {
        CHECK(spectral_abscissa(loop.A) < 0.0);
    }
    SUBCASE("sensor equilibrium satisfies its block row") {
        const double a_d = 3.707, g0 = 9.807;
        const Eigen::VectorXd xa_eq = -ga.A.fullPivLu().solve(ga.b) * (a_d - g0);
        // Row 3 of the loop with z_p = 0: A_a x_a + b_a (c_p' x_p) + b_a * 0;
        // at the maneuver equilibrium the sensor input is (a_d - g).
        const Eigen::VectorXd resid = ga.A * xa_eq + ga.b * (a_d - g0);
        CHECK(resid.norm() < 1e-12 * (1.0 + xa_eq.norm()));
        CHECK(ga.c.dot(xa_eq) == doctest::Approx(a_d - g0).epsilon(1e-12));
    }
}
