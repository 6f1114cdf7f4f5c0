#pragma once

#include <Eigen/Dense>

#include <vector>

namespace pirqsim {

/// Physical parameters of the variable-pitch vehicle. Axes are body-fixed
/// NED (z down); positive blade deflection produces upward thrust.
struct VehicleParams {
    double m = 1.265;     // kg
    double Ixx = 0.0068;  // kg m^2
    double Iyy = 0.0171;
    double Izz = 0.0207;
    double b = 0.05;     // quadratic drag coefficient, 1/m
    double g = 9.807;    // m/s^2
    double delta_max = 0.09;  // rad
    // Odd polynomial mapping blade deflection (rad) to thrust (N) at the
    // operating rotor speed: coefficients of delta, delta^3, delta^5, ...
    std::vector<double> thrust_curve;
    // Optional linear thrust derate with vertical inflow (per m/s of descent
    // speed along body z). Zero disables the correction.
    double inflow_derate = 0.0;

    void validate() const;

    /// Default odd cubic whose peak is max_factor * m * g at delta_max, with
    /// cubic_fraction of the peak carried by the cubic term.
    static std::vector<double> default_thrust_curve(double m, double g, double delta_max,
                                                    double max_factor, double cubic_fraction);
};

/// Rigid-body state: inertial NED position, body->inertial quaternion
/// (w,x,y,z), body-axis velocity (u,v,w) and body rates (p,q,r).
struct RigidBodyState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector4d quat = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
    Eigen::Vector3d rates = Eigen::Vector3d::Zero();

    Eigen::Matrix<double, 13, 1> pack() const;
    static RigidBodyState unpack(const Eigen::Matrix<double, 13, 1>& x);
};

/// Body->inertial rotation matrix of a unit quaternion (w,x,y,z).
Eigen::Matrix3d rotation_matrix(const Eigen::Vector4d& q);

/// ZYX Euler angles (roll, pitch, yaw) of a unit quaternion.
Eigen::Vector3d euler_angles(const Eigen::Vector4d& q);

Eigen::Vector4d normalize_quaternion(const Eigen::Vector4d& q);

/// Body-axis translational accelerations. F is the non-gravitational force
/// in body axes; gravity is applied internally by rotating (0,0,g) into the
/// body frame, which reproduces the (-g sin(theta), g sin(phi) cos(theta),
/// g cos(phi) cos(theta)) terms without a gimbal singularity.
Eigen::Vector3d translational_derivatives(const RigidBodyState& state, const Eigen::Vector3d& F,
                                          const VehicleParams& params);

/// Body-axis angular accelerations with a diagonal inertia tensor.
Eigen::Vector3d rotational_derivatives(const RigidBodyState& state, const Eigen::Vector3d& M,
                                       const VehicleParams& params);

/// Quaternion kinematics qdot = 1/2 q * (0, omega).
Eigen::Vector4d quaternion_derivative(const Eigen::Vector4d& q, const Eigen::Vector3d& omega);

/// -b v |v|: opposes the motion, odd in v.
double drag_acceleration(double v, double b);

struct ThrustResult {
    double thrust = 0.0;  // N, positive up
    bool saturated = false;
};

/// Thrust at a commanded deflection. Out-of-envelope commands are clamped to
/// +-delta_max and flagged.
ThrustResult thrust_from_deflection(double delta, const VehicleParams& params);

struct DeflectionResult {
    double delta = 0.0;
    bool saturated = false;
};

/// Inverse of the static thrust curve (monotone odd polynomial), clamped to
/// the deflection envelope.
DeflectionResult deflection_from_thrust(double thrust, const VehicleParams& params);

/// Bifilar-pendulum inertia estimate m g d^2 T^2 / (16 L pi^2).
double bifilar_inertia(double m, double g, double d, double T, double L);

/// Full 13-state derivative for the fixed-step integrator. F and M are the
/// non-gravitational force and the total moment in body axes.
Eigen::Matrix<double, 13, 1> rigid_body_derivatives(const RigidBodyState& state,
                                                    const Eigen::Vector3d& F,
                                                    const Eigen::Vector3d& M,
                                                    const VehicleParams& params);

}  // namespace pirqsim
