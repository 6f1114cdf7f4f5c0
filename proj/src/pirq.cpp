#include "pirqsim/pirq.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pirqsim {

LtiSystem pirq_realization(const PirqGains& gains) {
    if (gains.kP <= 0.0 || gains.kI <= 0.0 || gains.kR <= 0.0 || gains.kQ <= 0.0) {
        throw std::invalid_argument("pirq_realization: all gains must be positive");
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
    A(0, 1) = 1.0;
    A(1, 2) = 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
    b[2] = 1.0;
    Eigen::VectorXd c(3);
    c << gains.kQ, gains.kR, gains.kI;
    return LtiSystem(std::move(A), std::move(b), std::move(c), gains.kP);
}

PirqGains stabilizing_gains(const std::array<std::complex<double>, 3>& zeros, double kP,
                            const LtiSystem& plant, const LtiSystem& sensor) {
    if (kP <= 0.0) {
        throw std::invalid_argument("stabilizing_gains: kP must be positive");
    }
    for (const auto& z : zeros) {
        if (z.real() >= 0.0) {
            throw std::invalid_argument("stabilizing_gains: zeros must lie in the open left half plane");
        }
    }
    if (!is_stable(plant) || !is_stable(sensor)) {
        throw std::invalid_argument("stabilizing_gains: actuator and sensor models must be stable");
    }
    if (!is_minimum_phase(plant) || !is_minimum_phase(sensor)) {
        throw std::invalid_argument("stabilizing_gains: actuator and sensor models must be minimum phase");
    }

    // Expand (s - z1)(s - z2)(s - z3); the set must be closed under
    // conjugation for the coefficients to be real.
    const auto z1 = zeros[0], z2 = zeros[1], z3 = zeros[2];
    const std::complex<double> e2 = -(z1 + z2 + z3);
    const std::complex<double> e1 = z1 * z2 + z1 * z3 + z2 * z3;
    const std::complex<double> e0 = -z1 * z2 * z3;
    const double scale = std::abs(e0) + std::abs(e1) + std::abs(e2) + 1.0;
    if (std::abs(e2.imag()) > 1e-9 * scale || std::abs(e1.imag()) > 1e-9 * scale ||
        std::abs(e0.imag()) > 1e-9 * scale) {
        throw std::invalid_argument("stabilizing_gains: zeros must be real or conjugate pairs");
    }

    PirqGains gains{kP, kP * e2.real(), kP * e1.real(), kP * e0.real()};
    const auto loop = closed_loop_matrix(plant, pirq_realization(gains), sensor);
    const double abscissa = spectral_abscissa(loop.A);
    if (abscissa >= 0.0) {
        std::ostringstream oss;
        oss << "loop not stabilized: closed-loop spectral abscissa " << abscissa
            << " >= 0; adjust kP or the zero locations";
        throw std::runtime_error(oss.str());
    }
    return gains;
}

InversionCoefficients inversion_coefficients(const LtiSystem& plant, double b, double a_d,
                                             double g) {
    if (!is_stable(plant)) {
        throw std::invalid_argument("inversion_coefficients: actuator model must be stable");
    }
    const double dc = dc_gain(plant);
    if (std::abs(dc - 1.0) > 1e-9) {
        std::ostringstream oss;
        oss << "inversion_coefficients: actuator DC gain must be 1 (got " << dc << ")";
        throw std::invalid_argument(oss.str());
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(plant.A);
    const Eigen::VectorXd w1 = lu.solve(plant.b);   // A^-1 b
    const Eigen::VectorXd w2 = lu.solve(w1);        // A^-2 b
    const Eigen::VectorXd w3 = lu.solve(w2);        // A^-3 b
    const double s2 = plant.c.dot(w2);              // c' A^-2 b
    const double s3 = plant.c.dot(w3);              // c' A^-3 b

    InversionCoefficients out;
    out.u2 = 2.0 * b * a_d * a_d;
    out.x2 = -out.u2 * w1;
    out.u1 = out.u2 * s2;
    out.x1 = -out.u2 * (w2 + s2 * w1);
    out.u0 = out.u2 * (s3 + s2 * s2) + (a_d - g);
    out.x0 = -out.u2 * (w3 + s2 * w2 + (s3 + s2 * s2) * w1) - w1 * (a_d - g);
    return out;
}

ControllerIC controller_initial_condition(const PirqGains& gains,
                                          const InversionCoefficients& coeffs) {
    if (gains.kQ <= 0.0) {
        throw std::invalid_argument("controller_initial_condition: kQ must be positive");
    }
    const double kQ = gains.kQ, kR = gains.kR, kI = gains.kI;
    ControllerIC ic;
    ic.s0 = coeffs.u2 / kQ;
    ic.r0 = (coeffs.u1 - kR / kQ * coeffs.u2) / kQ;
    ic.q0 = (coeffs.u0 - kR / kQ * coeffs.u1 + (kR * kR - kI * kQ) / (kQ * kQ) * coeffs.u2) / kQ;
    return ic;
}

ClosedLoop closed_loop_matrix(const LtiSystem& plant, const LtiSystem& controller,
                              const LtiSystem& sensor) {
    const int np = plant.order();
    const int nc = controller.order();
    const int na = sensor.order();
    const int n = np + nc + na;

    ClosedLoop cl;
    cl.np = np;
    cl.nc = nc;
    cl.na = na;
    cl.A = Eigen::MatrixXd::Zero(n, n);
    cl.A.block(0, 0, np, np) = plant.A;
    cl.A.block(0, np, np, nc) = plant.b * controller.c.transpose();
    cl.A.block(0, np + nc, np, na) = -controller.d * plant.b * sensor.c.transpose();
    cl.A.block(np, np, nc, nc) = controller.A;
    cl.A.block(np, np + nc, nc, na) = -controller.b * sensor.c.transpose();
    cl.A.block(np + nc, 0, na, np) = sensor.b * plant.c.transpose();
    cl.A.block(np + nc, np + nc, na, na) = sensor.A;

    cl.input = Eigen::VectorXd::Zero(n);
    cl.input.segment(0, np) = plant.b * controller.d;
    cl.input.segment(np, nc) = controller.b;
    return cl;
}

}  // namespace pirqsim
