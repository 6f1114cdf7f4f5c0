#pragma once

#include "pirqsim/lti.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace pirqsim {

/// Coefficients of the compensator C(s) = (kP s^3 + kI s^2 + kR s + kQ)/s^3.
/// All strictly positive for a stabilizing design.
struct PirqGains {
    double kP = 0.0;
    double kI = 0.0;
    double kR = 0.0;
    double kQ = 0.0;
};

/// Canonical realization: A upper shift, b = e3, c' = [kQ kR kI], d = kP.
LtiSystem pirq_realization(const PirqGains& gains);

/// Gains from three desired left-half-plane compensator zeros and the overall
/// gain kP. The returned gains are verified to stabilize the loop formed with
/// the supplied actuator and sensor models; otherwise throws
/// std::runtime_error("loop not stabilized ...").
PirqGains stabilizing_gains(const std::array<std::complex<double>, 3>& zeros, double kP,
                            const LtiSystem& plant, const LtiSystem& sensor);

/// Quadratic feedforward trajectories for the drag-compensated maneuver:
/// input u(t) = u0 + u1 t + u2 t^2/2 and actuator state
/// x(t) = x0 + x1 t + x2 t^2/2 whose output is b a_d^2 t^2 + a_d - g.
struct InversionCoefficients {
    double u0 = 0.0, u1 = 0.0, u2 = 0.0;
    Eigen::VectorXd x0, x1, x2;
};

/// Closed-form dynamic inversion of the quadratic output. Requires a stable
/// actuator model with unit DC gain (within 1e-9).
InversionCoefficients inversion_coefficients(const LtiSystem& plant, double b, double a_d,
                                             double g);

/// Triple-integrator state at maneuver onset that makes the zero-input
/// controller output reproduce the feedforward input u(t) exactly.
struct ControllerIC {
    double q0 = 0.0, r0 = 0.0, s0 = 0.0;
};

ControllerIC controller_initial_condition(const PirqGains& gains,
                                          const InversionCoefficients& coeffs);

/// Closed-loop matrix of the actuator/controller/sensor loop
///
///   [A_p     b_p c_c'   -b_p d_c c_a']
///   [0       A_c        -b_c c_a'    ]
///   [b_a c_p' 0          A_a         ]
///
/// plus the constant-input map [b_p d_c; b_c; 0] that multiplies (a_d - g).
struct ClosedLoop {
    Eigen::MatrixXd A;
    Eigen::VectorXd input;
    int np = 0, nc = 0, na = 0;
};

ClosedLoop closed_loop_matrix(const LtiSystem& plant, const LtiSystem& controller,
                              const LtiSystem& sensor);

/// Running PIRQ controller: output y = c'x + kP e, with the integrator chain
/// advanced in closed form (the chain is nilpotent, so the zero-order-hold
/// update is an exact polynomial).
struct PirqState {
    PirqGains gains;
    Eigen::Vector3d x = Eigen::Vector3d::Zero();

    double output(double e) const {
        return gains.kQ * x[0] + gains.kR * x[1] + gains.kI * x[2] + gains.kP * e;
    }

    void advance(double e, double dt) {
        const double d2 = dt * dt;
        x = Eigen::Vector3d(x[0] + x[1] * dt + x[2] * 0.5 * d2 + e * d2 * dt / 6.0,
                            x[1] + x[2] * dt + e * 0.5 * d2,
                            x[2] + e * dt);
    }

    /// Bumpless start: holds a given output value with zero output slope.
    void reset_hold(double y_hold) { x = Eigen::Vector3d(y_hold / gains.kQ, 0.0, 0.0); }

    void reset_ic(const ControllerIC& ic) { x = Eigen::Vector3d(ic.q0, ic.r0, ic.s0); }
};

}  // namespace pirqsim
