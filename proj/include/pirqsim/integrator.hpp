#pragma once

#include <Eigen/Dense>

namespace pirqsim {

enum class IntegratorKind { BogackiShampine3, RungeKutta4 };

struct StepResult {
    Eigen::VectorXd state;
    // Embedded second-order estimate of the local error (Bogacki-Shampine
    // pair only; zero for classic RK4). Monitored, never used to adapt the
    // fixed step.
    double error_estimate = 0.0;
};

/// One fixed step of the Bogacki-Shampine 3(2) explicit pair. The propagated
/// solution is third order; the embedded second-order result only feeds the
/// error estimate.
template <typename Deriv>
StepResult bs3_step(const Deriv& f, const Eigen::VectorXd& x, double t, double dt) {
    const Eigen::VectorXd k1 = f(t, x);
    const Eigen::VectorXd k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = f(t + 0.75 * dt, x + 0.75 * dt * k2);
    Eigen::VectorXd next = x + dt * (2.0 / 9.0 * k1 + 1.0 / 3.0 * k2 + 4.0 / 9.0 * k3);
    const Eigen::VectorXd k4 = f(t + dt, next);
    const Eigen::VectorXd err =
        dt * (-5.0 / 72.0 * k1 + 1.0 / 12.0 * k2 + 1.0 / 9.0 * k3 - 1.0 / 8.0 * k4);
    return {std::move(next), err.norm()};
}

template <typename Deriv>
StepResult rk4_step(const Deriv& f, const Eigen::VectorXd& x, double t, double dt) {
    const Eigen::VectorXd k1 = f(t, x);
    const Eigen::VectorXd k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = f(t + dt, x + dt * k3);
    Eigen::VectorXd next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return {std::move(next), 0.0};
}

template <typename Deriv>
StepResult integrate_step(IntegratorKind kind, const Deriv& f, const Eigen::VectorXd& x, double t,
                          double dt) {
    if (kind == IntegratorKind::RungeKutta4) {
        return rk4_step(f, x, t, dt);
    }
    return bs3_step(f, x, t, dt);
}

}  // namespace pirqsim
