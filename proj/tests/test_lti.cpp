#include "pirqsim/lti.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace pirqsim;

namespace {

// Random stable system for property checks, order 1..4.
LtiSystem random_stable(std::mt19937& rng) {
    std::uniform_int_distribution<int> order(1, 4);
    std::uniform_real_distribution<double> pole(-20.0, -0.5);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    const int n = order(rng);
    // Denominator from real poles, numerator random of lower degree.
    std::vector<double> den = {1.0};
    for (int i = 0; i < n; ++i) {
        const double p = pole(rng);
        std::vector<double> next(den.size() + 1, 0.0);
        for (size_t j = 0; j < den.size(); ++j) {
            next[j] += den[j];
            next[j + 1] -= p * den[j];
        }
        den = next;
    }
    std::vector<double> num(n + 1);
    for (auto& v : num) v = coef(rng);
    if (num[0] == 0.0) num[0] = 1.0;
    return from_transfer_function(num, den);
}

}  // namespace

TEST_CASE("from_transfer_function: identified actuator") {
    const auto sys = from_transfer_function({1.0}, {0.0008, 0.045, 1.0});
    CHECK(sys.order() == 2);
    CHECK(dc_gain(sys) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sys.d == 0.0);
}

TEST_CASE("from_transfer_function: pure gain") {
    const auto sys = from_transfer_function({2.5}, {1.0});
    CHECK(sys.order() == 0);
    CHECK(sys.d == doctest::Approx(2.5));
    CHECK(dc_gain(sys) == doctest::Approx(2.5));
}

TEST_CASE("from_transfer_function: PIRQ numerator over s^3 gives the canonical realization") {
    const double kP = 3.0, kI = 49.0, kR = 241.0, kQ = 104.0;
    const auto sys = from_transfer_function({kP, kI, kR, kQ}, {1.0, 0.0, 0.0, 0.0});
    REQUIRE(sys.order() == 3);
    Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(3, 3);
    shift(0, 1) = 1.0;
    shift(1, 2) = 1.0;
    CHECK((sys.A - shift).norm() == doctest::Approx(0.0));
    CHECK(sys.b[0] == 0.0);
    CHECK(sys.b[1] == 0.0);
    CHECK(sys.b[2] == 1.0);
    CHECK(sys.c[0] == doctest::Approx(kQ));
    CHECK(sys.c[1] == doctest::Approx(kR));
    CHECK(sys.c[2] == doctest::Approx(kI));
    CHECK(sys.d == doctest::Approx(kP));
}

TEST_CASE("from_transfer_function rejects improper transfer functions") {
    CHECK_THROWS_AS(from_transfer_function({1.0, 0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(from_transfer_function({1.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("dc_gain") {
    SUBCASE("first-order lag") {
        LtiSystem sys(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Ones(1),
                      Eigen::VectorXd::Ones(1), 0.0);
        CHECK(dc_gain(sys) == doctest::Approx(1.0));
    }
    SUBCASE("pole at the origin is rejected") {
        const auto pirq = from_transfer_function({1.0, 1.0, 1.0, 1.0}, {1.0, 0.0, 0.0, 0.0});
        CHECK_THROWS_AS(dc_gain(pirq), std::domain_error);
    }
}

TEST_CASE("stability and minimum phase") {
    const auto gp = from_transfer_function({1.0}, {0.0008, 0.045, 1.0});
    CHECK(is_stable(gp));
    CHECK(is_minimum_phase(gp));

    // Poles of the identified actuator: quadratic root formula.
    const auto eigs = gp.A.eigenvalues();
    const double re = eigs[0].real();
    const double im = std::abs(eigs[0].imag());
    CHECK(re == doctest::Approx(-28.125).epsilon(1e-9));
    CHECK(im == doctest::Approx(std::sqrt(1.0 / 0.0008 - 28.125 * 28.125)).epsilon(1e-9));

    SUBCASE("single integrator is not stable") {
        LtiSystem integ(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1),
                        Eigen::VectorXd::Ones(1), 0.0);
        CHECK_FALSE(is_stable(integ));
    }
    SUBCASE("RHP zero: (s-1)/(s+2)^2 is stable but not minimum phase") {
        const auto sys = from_transfer_function({1.0, -1.0}, {1.0, 4.0, 4.0});
        CHECK(is_stable(sys));
        CHECK_FALSE(is_minimum_phase(sys));
        const auto zs = transmission_zeros(sys);
        REQUIRE(zs.size() == 1);
        CHECK(zs[0].real() == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("no finite zeros means minimum phase") {
        CHECK(transmission_zeros(gp).empty());
    }
}

TEST_CASE("frequency_response") {
    const auto lag = from_transfer_function({1.0}, {1.0, 1.0});
    const auto h0 = frequency_response(lag, 0.0);
    CHECK(h0.real() == doctest::Approx(1.0));
    CHECK(h0.imag() == doctest::Approx(0.0));

    const auto h1 = frequency_response(lag, 1.0);
    CHECK(h1.real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(h1.imag() == doctest::Approx(-0.5).epsilon(1e-12));

    const auto gp = from_transfer_function({1.0}, {0.0008, 0.045, 1.0});
    CHECK(std::abs(frequency_response(gp, 1e6)) < 1e-8);
}

TEST_CASE("propagate") {
    SUBCASE("integrator accumulates input") {
        LtiSystem sys(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1),
                      Eigen::VectorXd::Ones(1), 0.0);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
        x = propagate(sys, x, 1.0, 0.003);
        CHECK(x[0] == doctest::Approx(0.003).epsilon(1e-14));
    }
    SUBCASE("scalar exponential decay") {
        LtiSystem sys(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Zero(1),
                      Eigen::VectorXd::Ones(1), 0.0);
        Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
        x = propagate(sys, x, 0.0, 1.0);
        CHECK(x[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    }
    SUBCASE("zero state, zero input stays zero") {
        const auto gp = from_transfer_function({1.0}, {0.0008, 0.045, 1.0});
        Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
        x = propagate(gp, x, 0.0, 0.01);
        CHECK(x.norm() == 0.0);
    }
    SUBCASE("dt must be positive") {
        const auto gp = from_transfer_function({1.0}, {0.0008, 0.045, 1.0});
        CHECK_THROWS_AS(propagate(gp, Eigen::VectorXd::Zero(2), 0.0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("transfer function round trip is the identity on coefficients") {
    std::mt19937 rng(12345);
    for (int trial = 0; trial < 50; ++trial) {
        const auto sys = random_stable(rng);
        const auto [num, den] = transfer_function(sys);
        const auto back = from_transfer_function(num, den);
        const auto [num2, den2] = transfer_function(back);
        REQUIRE(num.size() == num2.size());
        double scale = 1.0;
        for (double v : num) scale = std::max(scale, std::abs(v));
        for (size_t i = 0; i < num.size(); ++i) {
            CHECK(num[i] == doctest::Approx(num2[i]).epsilon(1e-10).scale(scale));
            CHECK(den[i] == doctest::Approx(den2[i]).epsilon(1e-10).scale(scale));
        }
    }
}

TEST_CASE("dc gain equals the real part of the response at omega = 0") {
    std::mt19937 rng(777);
    for (int trial = 0; trial < 30; ++trial) {
        const auto sys = random_stable(rng);
        const auto h0 = frequency_response(sys, 0.0);
        CHECK(dc_gain(sys) == doctest::Approx(h0.real()).epsilon(1e-10));
        CHECK(h0.imag() == doctest::Approx(0.0).scale(1.0 + std::abs(h0.real())));
    }
}

TEST_CASE("propagate satisfies the semigroup property for constant input") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const auto sys = random_stable(rng);
        Eigen::VectorXd x0(sys.order());
        for (int i = 0; i < x0.size(); ++i) x0[i] = ud(rng);
        const double u = ud(rng);
        const double dt = 0.05;
        const Eigen::VectorXd two_steps = propagate(sys, propagate(sys, x0, u, dt), u, dt);
        const Eigen::VectorXd one_step = propagate(sys, x0, u, 2.0 * dt);
        CHECK((two_steps - one_step).norm() ==
              doctest::Approx(0.0).scale(1.0 + one_step.norm()).epsilon(1e-10));
    }
}
