#pragma once

#include "pirqsim/lti.hpp"
#include "pirqsim/pirq.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace pirqsim {

/// Which bound and centering the frequency test uses. The grid check is the
/// ground truth for any certificate either way.
///  - MidpointSmallGain: Atilde centered at (theta_min+theta_max)/2, bound
///    1/theta_r (bounded-real form consistent with the Riccati equation).
///  - Paper: Atilde at A0 + (theta_max-theta_min) A1, bound 1/theta_r^2.
enum class BoundConvention { MidpointSmallGain, Paper };

const char* convention_name(BoundConvention c);

/// Transverse dynamics of the maneuver: rho' = A(theta) rho with
/// A(theta) = Abar - 2 b a_d (xbar1 + xbar2 theta) cbar'.
struct TransverseSystem {
    Eigen::MatrixXd Abar;
    Eigen::VectorXd xbar1;
    Eigen::VectorXd xbar2;
    Eigen::VectorXd cbar;
    double b = 0.0;
    double a_d = 0.0;
    int np = 0, nc = 0, na = 0;
};

/// The theta-affine decomposition vectors. Both depend only on the actuator
/// realization and the controller gains, not on a_d; the sensor block is
/// zero.
std::pair<Eigen::VectorXd, Eigen::VectorXd> transverse_vectors(const LtiSystem& plant,
                                                               const PirqGains& gains);

TransverseSystem make_transverse_system(const LtiSystem& plant, const PirqGains& gains,
                                        const LtiSystem& sensor, double b, double a_d);

Eigen::MatrixXd a_theta(const TransverseSystem& ts, double theta);

/// Maneuver curve parametrized by the descent speed v >= 0: the actuator and
/// controller blocks are quadratic polynomials in v/a_d and the sensor block
/// is the constant equilibrium -A_a^{-1} b_a (a_d - g).
struct ManeuverCurve {
    InversionCoefficients coeffs;
    ControllerIC ic;
    Eigen::VectorXd xa_eq;
    double a_d = 0.0;

    ManeuverCurve(const LtiSystem& plant, const PirqGains& gains, const LtiSystem& sensor,
                  double b, double a_d, double g);

    Eigen::VectorXd actuator_block(double v) const;
    Eigen::Vector3d controller_block(double v) const;
    /// Stacked (x_p, x_c, x_a) point on the curve.
    Eigen::VectorXd stacked(double v) const;
    /// d/dv of the stacked curve.
    Eigen::VectorXd stacked_derivative(double v) const;
};

struct FrequencyGrid {
    double omega_min = 1e-3;
    double omega_max = 1e4;
    int points = 400;
};

std::vector<double> make_log_grid(const FrequencyGrid& grid);

/// sup over the grid of |c (jwI - A)^{-1} b|, with local refinement around
/// the detected peak. The serial variant is the reference implementation;
/// peak_modulus runs the grid sweep with OpenMP and must return identical
/// results.
struct PeakResult {
    double peak = 0.0;
    double omega_at_peak = 0.0;
};
PeakResult peak_modulus_serial(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& c, const std::vector<double>& omegas);
PeakResult peak_modulus(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                        const Eigen::VectorXd& c, const std::vector<double>& omegas);

struct CircleCheck {
    bool shifted_stable = false;
    double max_re_shifted = 0.0;  // spectral abscissa of Atilde + eps I
    double peak = 0.0;
    double omega_at_peak = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // bound - peak; certified iff positive
    bool degenerate = false;  // theta_r == 0 or vanishing perturbation
};

CircleCheck circle_criterion_check(const TransverseSystem& ts, double epsilon, double theta_min,
                                   double theta_max, const FrequencyGrid& grid,
                                   BoundConvention convention);

/// Stabilizing solution of
///   (Atilde+eps I)' P + P (Atilde+eps I) + P b b' P theta_r^2 + c' c = 0
/// by the Hamiltonian invariant-subspace method. theta_r = 0 degenerates to
/// the Lyapunov equation. Throws CertificationError when no stabilizing
/// solution exists or the residual exceeds 1e-8 (1 + ||P||).
struct CertificationError : std::runtime_error {
    explicit CertificationError(const std::string& what) : std::runtime_error(what) {}
};

Eigen::MatrixXd solve_riccati(const Eigen::MatrixXd& Atilde, double epsilon,
                              const Eigen::VectorXd& b_vec, const Eigen::VectorXd& c_vec,
                              double theta_r);

/// Evaluates max eig of A(theta)' P + P A(theta) + 2 eps P over the samples.
/// A(theta) is affine in theta and the eigenvalue is convex along the family,
/// so the two endpoints decide the answer; interior samples are a redundancy
/// check. The serial variant is the reference; the OpenMP variant must match
/// it exactly.
struct GridCheck {
    bool pass = false;
    double worst = 0.0;
    double theta_at_worst = 0.0;
};
GridCheck lyapunov_grid_check_serial(const TransverseSystem& ts, const Eigen::MatrixXd& P,
                                     double epsilon, const std::vector<double>& theta_samples);
GridCheck lyapunov_grid_check(const TransverseSystem& ts, const Eigen::MatrixXd& P, double epsilon,
                              const std::vector<double>& theta_samples);

std::vector<double> make_theta_samples(double theta_min, double theta_max, int count);

struct StabilityCertificate {
    bool certified = false;
    double epsilon = 0.0;
    Eigen::MatrixXd P;
    double theta_min = 0.0;
    double theta_max = 0.0;
    double freq_margin = 0.0;
    double peak = 0.0;
    double bound = 0.0;
    double p_min_eig = 0.0;
    double p_max_eig = 0.0;
    double grid_worst = 0.0;
    std::string method_notes;
};

struct CertifyOptions {
    double theta_min = 0.0;
    double theta_max = 1.0;
    double epsilon = 0.0;  // 0: bisect for the largest certifiable rate
    FrequencyGrid grid;
    int theta_grid = 23;
    BoundConvention convention = BoundConvention::MidpointSmallGain;
};

/// Runs the frequency test, the Riccati solve and the grid check; when
/// options.epsilon is zero, bisects for the largest certifiable decay rate.
StabilityCertificate certify(const TransverseSystem& ts, const CertifyOptions& options);

/// Flat key = value rendering of a certificate.
std::string certificate_report(const StabilityCertificate& cert);

/// Full nonlinear vertical-channel closed loop (v, x_p, x_c, x_a) with
/// vdot = c_p'x_p - b v|v| + g, simulated from a perturbation rho0 of the
/// maneuver at onset speed v0. Reports max over t of V(t) e^{2 eps t}/V(0)
/// while theta = v/a_d remains in the certified window.
struct DecayReport {
    double max_ratio = 0.0;
    double v_initial = 0.0;
    double t_end = 0.0;
    bool truncated = false;  // left the certified theta range early
};

DecayReport transverse_decay_sim(const LtiSystem& plant, const PirqGains& gains,
                                 const LtiSystem& sensor, double b, double a_d, double g,
                                 const Eigen::VectorXd& rho0, const Eigen::MatrixXd& P,
                                 double epsilon, double theta_min, double theta_max, double v0,
                                 double dt = 1e-4);

}  // namespace pirqsim
