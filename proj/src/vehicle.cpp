#include "pirqsim/vehicle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pirqsim {

void VehicleParams::validate() const {
    if (m <= 0.0 || Ixx <= 0.0 || Iyy <= 0.0 || Izz <= 0.0) {
        throw std::invalid_argument("VehicleParams: mass and inertias must be positive");
    }
    if (b < 0.0) {
        throw std::invalid_argument("VehicleParams: drag coefficient must be nonnegative");
    }
    if (delta_max <= 0.0) {
        throw std::invalid_argument("VehicleParams: delta_max must be positive");
    }
    if (thrust_curve.empty()) {
        throw std::invalid_argument("VehicleParams: thrust curve is empty");
    }
    for (double ck : thrust_curve) {
        if (ck < 0.0) {
            throw std::invalid_argument("VehicleParams: thrust curve must be monotone (nonnegative odd coefficients)");
        }
    }
    const double peak = thrust_from_deflection(delta_max, *this).thrust;
    if (peak < m * g) {
        throw std::invalid_argument("VehicleParams: maximum thrust below hover requirement m*g");
    }
}

std::vector<double> VehicleParams::default_thrust_curve(double m, double g, double delta_max,
                                                        double max_factor, double cubic_fraction) {
    const double peak = max_factor * m * g;
    const double c3 = cubic_fraction * peak / (delta_max * delta_max * delta_max);
    const double c1 = (1.0 - cubic_fraction) * peak / delta_max;
    return {c1, c3};
}

Eigen::Matrix<double, 13, 1> RigidBodyState::pack() const {
    Eigen::Matrix<double, 13, 1> x;
    x.segment<3>(0) = position;
    x.segment<4>(3) = quat;
    x.segment<3>(7) = velocity;
    x.segment<3>(10) = rates;
    return x;
}

RigidBodyState RigidBodyState::unpack(const Eigen::Matrix<double, 13, 1>& x) {
    RigidBodyState s;
    s.position = x.segment<3>(0);
    s.quat = x.segment<4>(3);
    s.velocity = x.segment<3>(7);
    s.rates = x.segment<3>(10);
    return s;
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector4d& q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d R;
    R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return R;
}

Eigen::Vector3d euler_angles(const Eigen::Vector4d& q) {
    const Eigen::Matrix3d R = rotation_matrix(q);
    const double phi = std::atan2(R(2, 1), R(2, 2));
    const double theta = -std::asin(std::clamp(R(2, 0), -1.0, 1.0));
    const double psi = std::atan2(R(1, 0), R(0, 0));
    return {phi, theta, psi};
}

Eigen::Vector4d normalize_quaternion(const Eigen::Vector4d& q) {
    const double n = q.norm();
    if (n <= 0.0) {
        throw std::domain_error("normalize_quaternion: zero quaternion");
    }
    return q / n;
}

Eigen::Vector3d translational_derivatives(const RigidBodyState& state, const Eigen::Vector3d& F,
                                          const VehicleParams& params) {
    const double u = state.velocity[0], v = state.velocity[1], w = state.velocity[2];
    const double p = state.rates[0], q = state.rates[1], r = state.rates[2];
    // Gravity rotated into body axes; equals the Euler-angle terms of the
    // kinematic equations for any attitude.
    const Eigen::Vector3d g_body =
        rotation_matrix(state.quat).transpose() * Eigen::Vector3d(0.0, 0.0, params.g);
    return {v * r - w * q + g_body[0] + F[0] / params.m,
            w * p - u * r + g_body[1] + F[1] / params.m,
            u * q - v * p + g_body[2] + F[2] / params.m};
}

Eigen::Vector3d rotational_derivatives(const RigidBodyState& state, const Eigen::Vector3d& M,
                                       const VehicleParams& params) {
    const double p = state.rates[0], q = state.rates[1], r = state.rates[2];
    return {q * r * (params.Iyy - params.Izz) / params.Ixx + M[0] / params.Ixx,
            p * r * (params.Izz - params.Ixx) / params.Iyy + M[1] / params.Iyy,
            p * q * (params.Ixx - params.Iyy) / params.Izz + M[2] / params.Izz};
}

Eigen::Vector4d quaternion_derivative(const Eigen::Vector4d& q, const Eigen::Vector3d& omega) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    const double p = omega[0], qr = omega[1], r = omega[2];
    return {0.5 * (-x * p - y * qr - z * r),
            0.5 * (w * p + y * r - z * qr),
            0.5 * (w * qr - x * r + z * p),
            0.5 * (w * r + x * qr - y * p)};
}

double drag_acceleration(double v, double b) {
    return -b * v * std::abs(v);
}

namespace {

double odd_polynomial(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    double xp = x;
    const double x2 = x * x;
    for (double ck : coeffs) {
        acc += ck * xp;
        xp *= x2;
    }
    return acc;
}

double odd_polynomial_slope(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    double xp = 1.0;
    const double x2 = x * x;
    int k = 1;
    for (double ck : coeffs) {
        acc += ck * k * xp;
        xp *= x2;
        k += 2;
    }
    return acc;
}

}  // namespace

ThrustResult thrust_from_deflection(double delta, const VehicleParams& params) {
    ThrustResult out;
    double dl = delta;
    if (dl > params.delta_max) {
        dl = params.delta_max;
        out.saturated = true;
    } else if (dl < -params.delta_max) {
        dl = -params.delta_max;
        out.saturated = true;
    }
    out.thrust = odd_polynomial(params.thrust_curve, dl);
    return out;
}

DeflectionResult deflection_from_thrust(double thrust, const VehicleParams& params) {
    DeflectionResult out;
    const double peak = odd_polynomial(params.thrust_curve, params.delta_max);
    if (thrust >= peak) {
        return {params.delta_max, thrust > peak};
    }
    if (thrust <= -peak) {
        return {-params.delta_max, thrust < -peak};
    }
    // Newton on the monotone odd polynomial; the linear term gives a good
    // starting point and the slope is bounded away from zero on the envelope.
    double x = thrust / params.thrust_curve[0];
    x = std::clamp(x, -params.delta_max, params.delta_max);
    for (int it = 0; it < 50; ++it) {
        const double f = odd_polynomial(params.thrust_curve, x) - thrust;
        const double fp = odd_polynomial_slope(params.thrust_curve, x);
        const double step = f / fp;
        x -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) {
            break;
        }
    }
    out.delta = std::clamp(x, -params.delta_max, params.delta_max);
    return out;
}

double bifilar_inertia(double m, double g, double d, double T, double L) {
    if (m <= 0.0 || g <= 0.0 || d <= 0.0 || T <= 0.0 || L <= 0.0) {
        throw std::invalid_argument("bifilar_inertia: all inputs must be positive");
    }
    const double pi = std::numbers::pi;
    return m * g * d * d * T * T / (16.0 * L * pi * pi);
}

Eigen::Matrix<double, 13, 1> rigid_body_derivatives(const RigidBodyState& state,
                                                    const Eigen::Vector3d& F,
                                                    const Eigen::Vector3d& M,
                                                    const VehicleParams& params) {
    Eigen::Matrix<double, 13, 1> dx;
    dx.segment<3>(0) = rotation_matrix(state.quat) * state.velocity;
    dx.segment<4>(3) = quaternion_derivative(state.quat, state.rates);
    dx.segment<3>(7) = translational_derivatives(state, F, params);
    dx.segment<3>(10) = rotational_derivatives(state, M, params);
    return dx;
}

}  // namespace pirqsim
