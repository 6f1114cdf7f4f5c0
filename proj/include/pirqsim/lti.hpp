#pragma once

#include <Eigen/Dense>

#include <complex>
#include <utility>
#include <vector>

namespace pirqsim {

/// Minimal SISO state-space system
///
///   x' = A x + b u,   y = c'x + d u
///
/// The order n may be zero, in which case the system is a pure gain y = d u.
struct LtiSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    double d = 0.0;

    LtiSystem() = default;
    LtiSystem(Eigen::MatrixXd A_in, Eigen::VectorXd b_in, Eigen::VectorXd c_in, double d_in);

    int order() const { return static_cast<int>(A.rows()); }
};

/// Controllable-canonical realization of num(s)/den(s), coefficients in
/// descending powers of s. Requires deg(num) <= deg(den) and a nonzero
/// leading denominator coefficient.
LtiSystem from_transfer_function(const std::vector<double>& num, const std::vector<double>& den);

/// Readback of the transfer function: {num, den}, den monic, num padded to
/// den's length. Computed with the Faddeev-LeVerrier recursion so the result
/// is deterministic and does not depend on an eigendecomposition.
std::pair<std::vector<double>, std::vector<double>> transfer_function(const LtiSystem& sys);

/// -c'A^{-1}b + d. Throws std::domain_error if A is singular (pole at s=0).
double dc_gain(const LtiSystem& sys);

bool is_stable(const LtiSystem& sys);

/// Transmission zeros from the generalized eigenvalues of the Rosenbrock
/// pencil; infinite eigenvalues are filtered out.
std::vector<std::complex<double>> transmission_zeros(const LtiSystem& sys);

/// All transmission zeros strictly in the open left half plane. Systems with
/// no finite zeros are minimum phase.
bool is_minimum_phase(const LtiSystem& sys);

/// c (jwI - A)^{-1} b + d
std::complex<double> frequency_response(const LtiSystem& sys, double omega);

/// Exact zero-order-hold discretization over a step dt.
struct ZohPair {
    Eigen::MatrixXd Ad;
    Eigen::VectorXd bd;
};
ZohPair zoh_discretize(const LtiSystem& sys, double dt);

/// Advance the state by dt under a constant input. Exact to machine
/// precision (matrix exponential of the augmented pair).
Eigen::VectorXd propagate(const LtiSystem& sys, const Eigen::VectorXd& state, double input,
                          double dt);

/// max Re(eig(A)); -inf for 0x0 matrices.
double spectral_abscissa(const Eigen::MatrixXd& A);

}  // namespace pirqsim
