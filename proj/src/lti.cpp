#include "pirqsim/lti.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pirqsim {

LtiSystem::LtiSystem(Eigen::MatrixXd A_in, Eigen::VectorXd b_in, Eigen::VectorXd c_in, double d_in)
    : A(std::move(A_in)), b(std::move(b_in)), c(std::move(c_in)), d(d_in) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("LtiSystem: A must be square");
    }
    if (b.size() != A.rows() || c.size() != A.rows()) {
        throw std::invalid_argument("LtiSystem: b and c must match the order of A");
    }
}

LtiSystem from_transfer_function(const std::vector<double>& num_in,
                                 const std::vector<double>& den_in) {
    if (den_in.empty() || num_in.empty()) {
        throw std::invalid_argument("from_transfer_function: empty coefficient list");
    }
    if (den_in.front() == 0.0) {
        throw std::invalid_argument("from_transfer_function: leading denominator coefficient is zero");
    }

    // Strip leading zeros from the numerator so degrees compare correctly.
    std::vector<double> num = num_in;
    while (num.size() > 1 && num.front() == 0.0) {
        num.erase(num.begin());
    }
    if (num.size() > den_in.size()) {
        throw std::invalid_argument(
            "from_transfer_function: improper transfer function (numerator degree exceeds "
            "denominator degree)");
    }

    const int n = static_cast<int>(den_in.size()) - 1;

    // Normalize so the denominator is monic.
    std::vector<double> den(den_in.size());
    for (size_t i = 0; i < den_in.size(); ++i) {
        den[i] = den_in[i] / den_in.front();
    }
    std::vector<double> nump(n + 1, 0.0);
    for (size_t i = 0; i < num.size(); ++i) {
        nump[n + 1 - num.size() + i] = num[i] / den_in.front();
    }

    const double d = nump[0];
    if (n == 0) {
        return LtiSystem(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), Eigen::VectorXd(0), d);
    }

    // Strictly proper remainder after removing the feedthrough.
    Eigen::VectorXd rem(n);
    for (int i = 0; i < n; ++i) {
        rem[i] = nump[i + 1] - d * den[i + 1];
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        A(i, i + 1) = 1.0;
    }
    for (int j = 0; j < n; ++j) {
        A(n - 1, j) = -den[n - j];
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[n - 1] = 1.0;
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) {
        c[j] = rem[n - 1 - j];
    }
    return LtiSystem(std::move(A), std::move(b), std::move(c), d);
}

std::pair<std::vector<double>, std::vector<double>> transfer_function(const LtiSystem& sys) {
    const int n = sys.order();
    std::vector<double> den(n + 1, 0.0);
    std::vector<double> num(n + 1, 0.0);
    den[0] = 1.0;

    // Faddeev-LeVerrier: den picks up the characteristic polynomial, and
    // c' M_k b are the coefficients of c' adj(sI-A) b.
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    std::vector<double> strict(n, 0.0);
    for (int k = 1; k <= n; ++k) {
        strict[k - 1] = sys.c.dot(M * sys.b);
        const double ck = -(sys.A * M).trace() / k;
        den[k] = ck;
        M = sys.A * M + ck * Eigen::MatrixXd::Identity(n, n);
    }

    for (int i = 0; i <= n; ++i) {
        num[i] = sys.d * den[i] + (i >= 1 ? strict[i - 1] : 0.0);
    }
    return {num, den};
}

double dc_gain(const LtiSystem& sys) {
    if (sys.order() == 0) {
        return sys.d;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.A);
    if (!lu.isInvertible()) {
        throw std::domain_error("dc_gain: undefined DC gain, system has a pole at s = 0");
    }
    return -sys.c.dot(lu.solve(sys.b)) + sys.d;
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
    if (A.rows() == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    return A.eigenvalues().real().maxCoeff();
}

bool is_stable(const LtiSystem& sys) {
    if (sys.order() == 0) {
        return true;
    }
    return spectral_abscissa(sys.A) < 0.0;
}

std::vector<std::complex<double>> transmission_zeros(const LtiSystem& sys) {
    const int n = sys.order();
    if (n == 0) {
        return {};
    }

    // Rosenbrock pencil sN - M = [sI - A, -b; c', d]. Finite generalized
    // eigenvalues of (M, N) are the transmission zeros.
    Eigen::MatrixXd M(n + 1, n + 1);
    M.topLeftCorner(n, n) = sys.A;
    M.topRightCorner(n, 1) = sys.b;
    M.bottomLeftCorner(1, n) = -sys.c.transpose();
    M(n, n) = -sys.d;
    Eigen::MatrixXd N = Eigen::MatrixXd::Zero(n + 1, n + 1);
    N.topLeftCorner(n, n).setIdentity();

    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(M, N, true);
    const auto alphas = ges.alphas();
    const auto betas = ges.betas();

    double beta_scale = 0.0;
    for (int i = 0; i < betas.size(); ++i) {
        beta_scale = std::max(beta_scale, std::abs(betas[i]));
    }
    std::vector<std::complex<double>> zeros;
    for (int i = 0; i < betas.size(); ++i) {
        if (std::abs(betas[i]) > 1e-9 * (1.0 + beta_scale)) {
            zeros.push_back(alphas[i] / betas[i]);
        }
    }
    return zeros;
}

bool is_minimum_phase(const LtiSystem& sys) {
    for (const auto& z : transmission_zeros(sys)) {
        if (z.real() >= 0.0) {
            return false;
        }
    }
    return true;
}

std::complex<double> frequency_response(const LtiSystem& sys, double omega) {
    const int n = sys.order();
    if (n == 0) {
        return {sys.d, 0.0};
    }
    Eigen::MatrixXcd M = std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) -
                         sys.A.cast<std::complex<double>>();
    const Eigen::VectorXcd x = M.fullPivLu().solve(sys.b.cast<std::complex<double>>());
    std::complex<double> y = sys.d;
    for (int i = 0; i < n; ++i) {
        y += sys.c[i] * x[i];
    }
    return y;
}

ZohPair zoh_discretize(const LtiSystem& sys, double dt) {
    if (dt <= 0.0) {
        throw std::invalid_argument("zoh_discretize: dt must be positive");
    }
    const int n = sys.order();
    if (n == 0) {
        return {Eigen::MatrixXd(0, 0), Eigen::VectorXd(0)};
    }
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = sys.A;
    aug.topRightCorner(n, 1) = sys.b;
    const Eigen::MatrixXd E = (aug * dt).exp();
    return {E.topLeftCorner(n, n), E.topRightCorner(n, 1)};
}

Eigen::VectorXd propagate(const LtiSystem& sys, const Eigen::VectorXd& state, double input,
                          double dt) {
    if (state.size() != sys.order()) {
        throw std::invalid_argument("propagate: state size does not match system order");
    }
    if (sys.order() == 0) {
        return state;
    }
    const ZohPair z = zoh_discretize(sys, dt);
    return z.Ad * state + z.bd * input;
}

}  // namespace pirqsim
