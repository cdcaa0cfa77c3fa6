#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace entpulse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

// Quadrature conventions used throughout the library:
//
//   X = a + a^dagger,   P = -i (a - a^dagger),   [X, P] = 2i
//
// so the vacuum has <X^2> = <P^2> = 1 and its covariance matrix is the
// identity. Phase-space vectors are ordered (X1, P1, X2, P2, ...). The
// covariance is the symmetrized second moment
//   V_ij = <{dR_i, dR_j}>/2,  dR = R - <R>,
// and physical states satisfy V + i Omega >= 0, i.e. every symplectic
// eigenvalue is >= 1.
//
// With this normalization a mode with mean occupation n has
// <X^2> + <P^2> = 4n + 2 and a homodyne quadrature
//   q(theta) = a e^{i theta} + a^dagger e^{-i theta} = cos(theta) X - sin(theta) P.

inline constexpr double symmetry_tolerance = 1e-12;
inline constexpr double physicality_tolerance = 1e-9;

class GaussianState {
public:
    // Validates shapes, label uniqueness and symmetry of cov (to 1e-12
    // relative). Physicality is not checked here; see is_physical().
    GaussianState(std::vector<std::string> labels, Vector mean, Matrix cov);

    std::size_t n_modes() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const Vector& mean() const noexcept { return mean_; }
    const Matrix& cov() const noexcept { return cov_; }

    // Throws InvalidParameter for an unknown label.
    std::size_t index_of(const std::string& label) const;
    bool has_mode(const std::string& label) const;

    // Marginal state of the listed modes, in the listed order.
    GaussianState reduced(std::span<const std::string> labels) const;
    GaussianState reduced(std::initializer_list<std::string> labels) const;

    // Product state this (x) other. Labels must stay unique.
    GaussianState tensor(const GaussianState& other) const;

    GaussianState relabeled(std::vector<std::string> labels) const;

    // R -> S R for a real 2N x 2N matrix S (symplectic for unitary maps).
    GaussianState transformed(const Matrix& s) const;

private:
    std::vector<std::string> labels_;
    Vector mean_;
    Matrix cov_;
};

// Default labels "m0", "m1", ... are used when none are given.
GaussianState vacuum(std::size_t n_modes);
GaussianState vacuum(std::vector<std::string> labels);

// Single-mode thermal state, cov = (2 nbar + 1) I.
GaussianState thermal(double nbar, std::string label = "m0");

// Two-mode squeezed vacuum with squeezing ratio r and correlation phase
// beta: cosh s = (1 + r^2)/|1 - r^2|, sinh s = 2r/|1 - r^2| and
// <a1 a2> = sinh(s) cosh(s) e^{i beta}. r < 1 is mapped to 1/r, which leaves
// the pair amplitude 2r/(1 + r^2) unchanged. Throws InfiniteSqueezing at r = 1.
GaussianState tmss(double r, double beta, std::string label1 = "cav1",
                   std::string label2 = "cav2");

// Squeezing parameter s of tmss(r, .).
double tmss_squeezing(double r);

// The symplectic form, block diagonal with [[0, 1], [-1, 0]] per mode.
Matrix symplectic_form(std::size_t n_modes);

// Sorted ascending, one value per mode. cov must be positive definite.
Vector symplectic_eigenvalues(const Matrix& cov);

// min nu >= 1 - tolerance * max(1, ||V||_F). Rounding in a squeezed covariance
// grows with its norm, so the slack does too.
bool is_physical(const GaussianState& state, double tolerance = physicality_tolerance);

// Real 2N x 2N matrix acting on (X, P) quadratures that corresponds to the
// complex-mode linear map a_j -> sum_k (u_jk a_k + v_jk a_k^dagger). Used both
// for Bogoliubov transformations and for the drift of linear Heisenberg
// equations da/dt = M a + N a^dagger.
Matrix ladder_to_quadrature(const ComplexMatrix& u, const ComplexMatrix& v);

// d<R>/dt = A <R>,   dV/dt = A V + V A^T + D.
struct LinearDynamics {
    Matrix drift;
    Matrix diffusion;

    std::size_t n_modes() const noexcept { return static_cast<std::size_t>(drift.rows() / 2); }
};

// Heisenberg equations da/dt = M a + N a^dagger - decay_j a_j with
// vacuum-noise input D = 2 decay_j on the quadratures of each damped mode.
LinearDynamics dynamics_from_ladder(const ComplexMatrix& m, const ComplexMatrix& n,
                                    const Vector& decay_rates);

// Drift of H = H1 + H2 on modes (cav1, cav2, motion):
//   da1/dt = chi1 b^dagger - k a1
//   da2/dt = chi2 b        - k a2
//   db/dt  = chi1 a1^dagger - conj(chi2) a2
// with k = kappa when include_decay, else 0.
LinearDynamics dynamics_from_couplings(std::complex<double> chi1, std::complex<double> chi2,
                                       double kappa, bool include_decay);

// Labels of the three-mode system used by dynamics_from_couplings.
inline const std::vector<std::string>& simultaneous_mode_labels() {
    static const std::vector<std::string> labels{"cav1", "cav2", "motion"};
    return labels;
}

// Exact propagation:
//   mean' = e^{At} mean
//   cov'  = e^{At} cov e^{A^T t} + int_0^t e^{As} D e^{A^T s} ds
// The noise integral comes from the exponential of the augmented block
// matrix [[A, D], [0, -A^T]] t.
GaussianState evolve(const GaussianState& state, const LinearDynamics& dynamics, double t);

// The pair (e^{At}, noise integral) used by evolve.
struct Propagator {
    Matrix transfer;
    Matrix noise;
};
Propagator propagator(const LinearDynamics& dynamics, double t);

// Quadrature matrix of the closed-form map at T_pi = pi / Theta:
//   a1 -> u a1 - v a2^dagger,  a2 -> v a1^dagger - u a2,  b -> -b
// with u = (|chi1|^2 + |chi2|^2)/Theta^2 and v = 2 chi1 chi2 / Theta^2.
// Requires |chi2| > |chi1| (UndefinedPeriod otherwise); chi1 = 0 is allowed.
Matrix bogoliubov_tpi(std::complex<double> chi1, std::complex<double> chi2);

// (X^2 + P^2 + <X>^2 + <P>^2 - 2)/4 for the named mode.
double mean_photons(const GaussianState& state, const std::string& mode);

// Variance of q_i(theta_i) - q_j(theta_j). theta = (0, 0) gives
// Delta(X_i - X_j)^2 and (pi/2, -pi/2) gives Delta(P_i + P_j)^2. Two
// independent vacua give 2.
double epr_variance(const GaussianState& state, const std::string& mode_i,
                    const std::string& mode_j, double theta_i = 0.0, double theta_j = 0.0);

// Logarithmic negativity across the cut (part | rest). Throws InvalidState
// when the state itself is unphysical.
double log_negativity(const GaussianState& state, std::span<const std::string> part);
double log_negativity(const GaussianState& state, std::initializer_list<std::string> part);

// Frobenius norm of the cross-covariance block between two disjoint mode sets.
double decorrelation_norm(const GaussianState& state, std::span<const std::string> block_a,
                          std::span<const std::string> block_b);
double decorrelation_norm(const GaussianState& state, std::initializer_list<std::string> block_a,
                          std::initializer_list<std::string> block_b);

}  // namespace entpulse
